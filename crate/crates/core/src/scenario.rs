//! Canonical pre/postselection configurations and the designer that
//! synthesizes states from target weak values.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::prepost::{evolve_full, Circuit, CircuitElement, EvolutionResult, PrePost};
use crate::shortcut::predict_conditional;
use crate::state::{rotation, Ket, Operator, Space, C64};

/// A named, fully specified configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub prepost: PrePost,
    pub circuit: Circuit,
    /// Initial internal state; the unit scalar when there is none.
    pub internal_init: Ket,
    /// Interferometer visibility applied to inter-path cross terms.
    pub visibility: f64,
}

impl ScenarioSpec {
    pub fn new(name: &str, description: &str, prepost: PrePost) -> Self {
        let circuit = Circuit::new(prepost.space().clone());
        Self {
            name: name.into(),
            description: description.into(),
            prepost,
            circuit,
            internal_init: Ket::unit(),
            visibility: 1.0,
        }
    }

    pub fn with_element(mut self, element: CircuitElement) -> Result<Self> {
        self.circuit.push(element)?;
        Ok(self)
    }

    pub fn evolve(&self) -> Result<EvolutionResult> {
        evolve_full(&self.circuit, &self.prepost, &self.internal_init)
    }

    /// Postselection success probability, honoring `visibility`.
    pub fn success_probability(&self) -> Result<f64> {
        Ok(self.evolve()?.probability_with_visibility(self.visibility))
    }

    /// Index of a selection-basis label.
    pub fn path_index(&self, label: &str) -> Result<usize> {
        self.prepost.space().index_of(label).ok_or_else(|| {
            Error::SpaceMismatch(format!("no path `{label}` in scenario `{}`", self.name))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThreeBoxVariant {
    /// `|i> = (1,1,1)/sqrt 3`, `|f> = (1,-1,1)/sqrt 3`.
    Intro,
    /// The unequal-amplitude states realised with three interferometers.
    Experimental,
}

pub fn three_box(variant: ThreeBoxVariant) -> ScenarioSpec {
    let space = Space::paths(3).expect("three paths");
    let (name, description, pre, post) = match variant {
        ThreeBoxVariant::Intro => (
            "three-box-intro",
            "Three-path box problem, equal-amplitude pre/postselection",
            [1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0],
        ),
        ThreeBoxVariant::Experimental => (
            "three-box-experimental",
            "Three-path box problem, unequal amplitudes set by three interferometers",
            [1.0 / (2.0 * SQRT_2), 0.5, 1.0 / SQRT_2],
            [1.0 / SQRT_2, -0.5, 1.0 / (2.0 * SQRT_2)],
        ),
    };
    let pp = PrePost::new(
        Ket::from_real(space.clone(), &pre).expect("3 amps"),
        Ket::from_real(space, &post).expect("3 amps"),
    )
    .expect("non-orthogonal");
    ScenarioSpec::new(name, description, pp)
}

/// Extra annihilation points between pre- and postselection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HardyOverlap {
    /// Paths `NO+` and `O-` overlap.
    NoPlusOMinus,
    /// Paths `NO+` and `NO-` overlap.
    NoPlusNoMinus,
    /// Paths `O+` and `NO-` overlap.
    OPlusNoMinus,
}

impl HardyOverlap {
    pub fn label(self) -> &'static str {
        match self {
            HardyOverlap::NoPlusOMinus => "NO+,O-",
            HardyOverlap::NoPlusNoMinus => "NO+,NO-",
            HardyOverlap::OPlusNoMinus => "O+,NO-",
        }
    }
}

pub fn hardy_space() -> Space {
    Space::single("positron", ["NO+", "O+"])
        .and_then(|p| p.tensor(&Space::single("electron", ["NO-", "O-"])?))
        .expect("disjoint subsystems")
}

/// Positron/electron interferometers with the central annihilation point
/// already excluded from the preselection. Each requested overlap becomes a
/// joint shutter on its composite label.
pub fn hardy(overlaps: &[HardyOverlap]) -> ScenarioSpec {
    let space = hardy_space();
    // Basis order: (NO+,NO-), (NO+,O-), (O+,NO-), (O+,O-).
    let pp = PrePost::new(
        Ket::from_real(space.clone(), &[1.0, 1.0, 1.0, 0.0]).expect("4 amps"),
        Ket::from_real(space, &[1.0, -1.0, -1.0, 1.0]).expect("4 amps"),
    )
    .expect("non-orthogonal");
    let mut spec = ScenarioSpec::new(
        "hardy",
        "Hardy's paradox with optional annihilation points",
        pp,
    );
    let mut sorted = overlaps.to_vec();
    sorted.sort();
    sorted.dedup();
    for o in sorted {
        spec.circuit
            .push(CircuitElement::JointShutter {
                labels: vec![o.label().to_string()],
            })
            .expect("label exists");
    }
    spec
}

/// Built-in scenarios by name.
pub fn builtin(name: &str) -> Option<ScenarioSpec> {
    match name {
        "three-box-intro" => Some(three_box(ThreeBoxVariant::Intro)),
        "three-box-experimental" => Some(three_box(ThreeBoxVariant::Experimental)),
        "hardy" => Some(hardy(&[])),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["three-box-intro", "three-box-experimental", "hardy"];

/// `||(2I - U(phi)) - U(-phi)||_F`; equals `sqrt 2 (2 - 2 cos phi)`.
pub fn rotation_negation_gap(phi: f64) -> f64 {
    let id = Operator::identity(Space::polarization());
    let negated = id
        .scale(C64::new(2.0, 0.0))
        .sub(&rotation(phi))
        .expect("same space");
    negated.distance(&rotation(-phi)).expect("same space")
}

/// Polarization angle `atan2(V, H)` of `|H>` after a rotation `U(phi)` on a
/// path whose weak value is `-1` (the other path carries `+2`).
pub fn negated_rotation_angle(phi: f64) -> Result<f64> {
    let pp = design_prepost(&TargetWeakValues::new(vec![
        C64::new(-1.0, 0.0),
        C64::new(2.0, 0.0),
    ])?)?;
    let pol = Space::polarization();
    let h = Ket::from_label(pol.clone(), "H")?;
    let out =
        predict_conditional(&[rotation(phi), Operator::identity(pol)], &pp, &h)?.conditional_state;
    let (a, b) = (out.amps()[0], out.amps()[1]);
    // Remove the global phase before reading the angle.
    let phase = if a.norm() > 0.0 {
        a.conj() / a.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    Ok((b * phase).re.atan2((a * phase).re))
}

/// Target projector weak values, one per path; they must sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetWeakValues(Vec<C64>);

/// Sum-rule tolerance for designer targets.
pub const TARGET_SUM_TOL: f64 = 1e-9;

/// Floor on `|<k|i>|^2` for zero targets.
pub const DESIGN_FLOOR: f64 = 1e-6;

impl TargetWeakValues {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.iter().all(|w| *w == C64::new(0.0, 0.0)) {
            return Err(Error::DegenerateTargets);
        }
        let residual = (values.iter().sum::<C64>() - C64::new(1.0, 0.0)).norm();
        if residual > TARGET_SUM_TOL || !residual.is_finite() {
            return Err(Error::SumRuleViolation { residual });
        }
        Ok(Self(values))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn values(&self) -> &[C64] {
        &self.0
    }
}

/// One valid `(|i>, |f>)` realising the targets: `<k|i> = sqrt(max(|w_k|,
/// floor))` and `<f|k> = w_k / <k|i>`, so that `<f|i> = 1` before
/// normalization.
pub fn design_prepost(targets: &TargetWeakValues) -> Result<PrePost> {
    let space = Space::paths(targets.0.len())?;
    let pre: Vec<C64> = targets
        .0
        .iter()
        .map(|w| C64::new(w.norm().max(DESIGN_FLOOR).sqrt(), 0.0))
        .collect();
    let post: Vec<C64> = targets
        .0
        .iter()
        .zip(&pre)
        .map(|(w, i)| (w / i).conj())
        .collect();
    PrePost::new(Ket::new(space.clone(), pre)?, Ket::new(space, post)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prepost::{joint_weak_value, weak_value};
    use crate::state::TOL;

    #[test]
    fn three_box_variants_share_weak_values() {
        for v in [ThreeBoxVariant::Intro, ThreeBoxVariant::Experimental] {
            let w = three_box(v).prepost.path_weak_values();
            for (a, b) in w.iter().zip([1.0, -1.0, 1.0]) {
                assert!((a - C64::new(b, 0.0)).norm() <= TOL, "{v:?}: {w:?}");
            }
        }
        let intro = three_box(ThreeBoxVariant::Intro);
        assert!((intro.prepost.success_probability() - 1.0 / 9.0).abs() <= TOL);
    }

    #[test]
    fn hardy_joint_weak_values() {
        let s = hardy(&[]);
        let expected = [
            ("NO+,O-", 1.0),
            ("O+,NO-", 1.0),
            ("O+,O-", 0.0),
            ("NO+,NO-", -1.0),
        ];
        for (label, w) in expected {
            let p = Operator::basis_projector(hardy_space(), label).unwrap();
            let got = joint_weak_value(&p, &s.prepost).unwrap();
            assert!((got - C64::new(w, 0.0)).norm() <= TOL, "{label}: {got}");
        }
    }

    #[test]
    fn hardy_marginals_are_one() {
        let s = hardy(&[]);
        let pos = Space::single("positron", ["NO+", "O+"]).unwrap();
        let ele = Space::single("electron", ["NO-", "O-"]).unwrap();
        let o_plus = Operator::basis_projector(pos.clone(), "O+")
            .unwrap()
            .tensor(&Operator::identity(ele.clone()))
            .unwrap();
        let o_minus = Operator::identity(pos)
            .tensor(&Operator::basis_projector(ele, "O-").unwrap())
            .unwrap();
        for op in [o_plus, o_minus] {
            assert!((weak_value(&op, &s.prepost).unwrap() - C64::new(1.0, 0.0)).norm() <= TOL);
        }
    }

    #[test]
    fn hardy_overlap_probabilities() {
        let none = hardy(&[]).success_probability().unwrap();
        assert!((none - 1.0 / 12.0).abs() <= TOL);
        let one = hardy(&[HardyOverlap::NoPlusOMinus])
            .success_probability()
            .unwrap();
        assert!(one <= TOL * TOL);
        let blocked = hardy(&[HardyOverlap::NoPlusOMinus]).evolve().unwrap();
        assert!(matches!(
            crate::prepost::conditional_state(&blocked),
            Err(Error::PostselectionSingular { .. })
        ));
        let both = hardy(&[HardyOverlap::NoPlusOMinus, HardyOverlap::NoPlusNoMinus])
            .success_probability()
            .unwrap();
        assert!((both - 1.0 / 12.0).abs() <= TOL);
    }

    #[test]
    fn builders_are_deterministic() {
        assert_eq!(
            three_box(ThreeBoxVariant::Experimental),
            three_box(ThreeBoxVariant::Experimental)
        );
        assert_eq!(
            hardy(&[HardyOverlap::OPlusNoMinus]),
            hardy(&[HardyOverlap::OPlusNoMinus])
        );
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name, name);
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn rotation_negation_gap_matches_closed_form() {
        assert!(rotation_negation_gap(0.0).abs() <= TOL);
        for phi in [0.01, 0.05, 0.1, -0.3] {
            let closed = SQRT_2 * (2.0 - 2.0 * f64::cos(phi));
            assert!((rotation_negation_gap(phi) - closed).abs() <= TOL);
            assert!(rotation_negation_gap(phi) <= 2.0 * phi * phi);
        }
    }

    #[test]
    fn negative_weak_value_mirrors_rotation() {
        let phi = 0.01;
        let h = Ket::from_label(Space::polarization(), "H").unwrap();
        let forward = rotation(phi).apply(&h).unwrap();
        let forward_angle = forward.amps()[1].re.atan2(forward.amps()[0].re);
        let mirrored = rotation(-phi).apply(&h).unwrap();
        let mirrored_angle = mirrored.amps()[1].re.atan2(mirrored.amps()[0].re);
        let got = negated_rotation_angle(phi).unwrap();
        assert!((got - mirrored_angle).abs() <= phi * phi);
        assert!((got + forward_angle).abs() <= phi * phi);
    }

    #[test]
    fn designer_roundtrips() {
        for targets in [
            vec![1.0, -1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![2.0, -2.0, 1.0],
            vec![0.5, 0.5],
        ] {
            let pp = design_prepost(&TargetWeakValues::from_real(&targets).unwrap()).unwrap();
            for (got, want) in pp.path_weak_values().iter().zip(&targets) {
                assert!((got - C64::new(*want, 0.0)).norm() <= 1e-9, "{targets:?}");
            }
        }
    }

    #[test]
    fn designer_errors() {
        assert!(matches!(
            TargetWeakValues::from_real(&[1.0, 1.0]),
            Err(Error::SumRuleViolation { .. })
        ));
        assert!(matches!(
            TargetWeakValues::from_real(&[0.0, 0.0]),
            Err(Error::DegenerateTargets)
        ));
    }
}
