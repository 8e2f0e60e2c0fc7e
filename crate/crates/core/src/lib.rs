//! Pre/postselected quantum systems: weak values, loss and unitary
//! shortcuts checked against brute-force evolution, a polarization pointer
//! model, canonical scenarios and counting statistics.

pub mod checks;
pub mod counting;
pub mod error;
pub mod export;
pub mod fit;
pub mod pointer;
pub mod prepost;
pub mod random;
pub mod scenario;
pub mod scenario_file;
pub mod shortcut;
pub mod state;

pub use error::{Error, Result};
pub use prepost::{
    evolve_full, joint_weak_value, weak_value, Circuit, CircuitElement, PrePost, EPS_POST,
};
pub use scenario::{builtin, ScenarioSpec, TargetWeakValues};
pub use state::{Ket, Operator, Space, C64};
