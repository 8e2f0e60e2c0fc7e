//! JSON scenario documents.
//!
//! ```json
//! {
//!   "name": "three-box-intro",
//!   "selection_dim": 3,
//!   "pre": [[0.577, 0.0], [0.577, 0.0], [0.577, 0.0]],
//!   "post": [[0.577, 0.0], [-0.577, 0.0], [0.577, 0.0]],
//!   "elements": [{ "kind": "attenuator", "path": 1, "T": 0.5 }]
//! }
//! ```
//!
//! Complex numbers are `[re, im]`. Paths are 1-based selection-basis
//! indices. Without `subsystems` the selection basis is labelled `1..=k`;
//! `internal_dim = 2` is a polarization `{H, V}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prepost::{CircuitElement, PrePost};
use crate::scenario::ScenarioSpec;
use crate::state::{Ket, Operator, Space, Subsystem, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub selection_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<Vec<Subsystem>>,
    pub pre: Vec<[f64; 2]>,
    pub post: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal_init: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<f64>,
    #[serde(default)]
    pub elements: Vec<ElementFile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Unitary,
    Attenuator,
    Shutter,
    JointShutter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementFile {
    pub kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn encode(amps: &[C64]) -> Vec<[f64; 2]> {
    // `+ 0.0` folds negative zero.
    amps.iter().map(|z| [z.re + 0.0, z.im + 0.0]).collect()
}

fn decode(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn internal_space(dim: Option<usize>) -> Result<Space> {
    match dim {
        None | Some(1) => Ok(Space::trivial()),
        Some(2) => Ok(Space::polarization()),
        Some(0) => Err(Error::Format("internal_dim must be positive".into())),
        Some(d) => Space::single("internal", (0..d).map(|i| i.to_string())),
    }
}

fn format_err(e: Error) -> Error {
    match e {
        Error::Format(_) => e,
        other => Error::Format(other.to_string()),
    }
}

impl ScenarioFile {
    pub fn from_spec(spec: &ScenarioSpec) -> Self {
        let selection = spec.prepost.space();
        let subsystems = match Space::paths(selection.dim()) {
            Ok(default) if &default == selection => None,
            _ => Some(selection.factors().to_vec()),
        };
        let internal = spec.circuit.internal();
        let internal_dim =
            (internal.dim() > 1 || !internal.factors().is_empty()).then(|| internal.dim());
        let default_init = Ket::basis(internal.clone(), 0).expect("non-empty space");
        let internal_init = (internal_dim.is_some() && spec.internal_init != default_init)
            .then(|| encode(spec.internal_init.amps()));
        let elements = spec
            .circuit
            .elements()
            .iter()
            .map(|e| match e {
                CircuitElement::Unitary { path, op } => ElementFile {
                    kind: ElementKind::Unitary,
                    path: Some(path + 1),
                    transmission: None,
                    labels: None,
                    matrix: Some(op.rows().iter().map(|r| encode(r)).collect()),
                },
                CircuitElement::Attenuator { path, transmission } => ElementFile {
                    kind: ElementKind::Attenuator,
                    path: Some(path + 1),
                    transmission: Some(*transmission),
                    labels: None,
                    matrix: None,
                },
                CircuitElement::Shutter { path } => ElementFile {
                    kind: ElementKind::Shutter,
                    path: Some(path + 1),
                    transmission: None,
                    labels: None,
                    matrix: None,
                },
                CircuitElement::JointShutter { labels } => ElementFile {
                    kind: ElementKind::JointShutter,
                    path: None,
                    transmission: None,
                    labels: Some(labels.clone()),
                    matrix: None,
                },
            })
            .collect();
        Self {
            name: spec.name.clone(),
            description: spec.description.clone(),
            selection_dim: selection.dim(),
            subsystems,
            pre: encode(spec.prepost.pre().amps()),
            post: encode(spec.prepost.post().amps()),
            internal_dim,
            internal_init,
            visibility: (spec.visibility != 1.0).then_some(spec.visibility),
            elements,
        }
    }

    pub fn to_spec(&self) -> Result<ScenarioSpec> {
        self.build().map_err(format_err)
    }

    fn build(&self) -> Result<ScenarioSpec> {
        let selection = match &self.subsystems {
            Some(factors) => Space::new(factors.clone())?,
            None => Space::paths(self.selection_dim)?,
        };
        if selection.dim() != self.selection_dim {
            return Err(Error::Format(format!(
                "selection_dim {} does not match subsystems of dimension {}",
                self.selection_dim,
                selection.dim()
            )));
        }
        let prepost = PrePost::new(
            Ket::new(selection.clone(), decode(&self.pre))?,
            Ket::new(selection.clone(), decode(&self.post))?,
        )?;
        let internal = internal_space(self.internal_dim)?;
        let mut spec = ScenarioSpec::new(&self.name, &self.description, prepost);
        spec.circuit = crate::prepost::Circuit::with_internal(selection, internal.clone());
        spec.internal_init = match &self.internal_init {
            Some(amps) => Ket::normalized(internal.clone(), decode(amps))?,
            None => Ket::basis(internal.clone(), 0)?,
        };
        if let Some(v) = self.visibility {
            spec.visibility = crate::prepost::check_visibility(v)?;
        }
        for (i, e) in self.elements.iter().enumerate() {
            let path = || {
                e.path
                    .filter(|&p| p >= 1)
                    .map(|p| p - 1)
                    .ok_or_else(|| Error::Format(format!("element {i}: 1-based `path` required")))
            };
            let element =
                match e.kind {
                    ElementKind::Unitary => {
                        let rows = e.matrix.as_ref().ok_or_else(|| {
                            Error::Format(format!("element {i}: `matrix` required"))
                        })?;
                        CircuitElement::Unitary {
                            path: path()?,
                            op: Operator::from_rows(
                                internal.clone(),
                                rows.iter().map(|r| decode(r)).collect(),
                            )?,
                        }
                    }
                    ElementKind::Attenuator => CircuitElement::Attenuator {
                        path: path()?,
                        transmission: e
                            .transmission
                            .ok_or_else(|| Error::Format(format!("element {i}: `T` required")))?,
                    },
                    ElementKind::Shutter => CircuitElement::Shutter { path: path()? },
                    ElementKind::JointShutter => CircuitElement::JointShutter {
                        labels: e.labels.clone().ok_or_else(|| {
                            Error::Format(format!("element {i}: `labels` required"))
                        })?,
                    },
                };
            spec.circuit.push(element)?;
        }
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }
}

pub fn load_spec(text: &str) -> Result<ScenarioSpec> {
    ScenarioFile::from_json(text)?.to_spec()
}

pub fn save_spec(spec: &ScenarioSpec) -> String {
    ScenarioFile::from_spec(spec).to_json()
}
