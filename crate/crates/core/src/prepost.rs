//! Weak values of a pre/postselected system and the brute-force evolution
//! oracle that follows the state element by element.

use crate::error::{Error, Result};
use crate::state::{inner, Ket, Operator, Space, C64, TOL};

/// Smallest admissible `|<f|i>|`; weak values diverge below it.
pub const EPS_POST: f64 = 1e-9;

/// A preselected state `|i>` and postselected state `|f>` on one selection
/// space. Both are normalized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PrePost {
    pre: Ket,
    post: Ket,
    overlap: C64,
}

impl PrePost {
    pub fn new(pre: Ket, post: Ket) -> Result<Self> {
        let pre = pre.normalize()?;
        let post = post.normalize()?;
        let overlap = inner(&post, &pre)?;
        if overlap.norm() <= EPS_POST {
            return Err(Error::PostselectionSingular {
                magnitude: overlap.norm(),
            });
        }
        Ok(Self { pre, post, overlap })
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> &Ket {
        &self.post
    }

    pub fn space(&self) -> &Space {
        self.pre.space()
    }

    /// `<f|i>`.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    /// `|<f|i>|^2`, the postselection success probability with no elements.
    pub fn success_probability(&self) -> f64 {
        self.overlap.norm_sqr()
    }

    /// `<f|k><k|i>` for each selection basis state `k`.
    pub fn path_products(&self) -> Vec<C64> {
        self.post
            .amps()
            .iter()
            .zip(self.pre.amps())
            .map(|(f, i)| f.conj() * i)
            .collect()
    }

    /// Weak values of the basis projectors `|k><k|`.
    pub fn path_weak_values(&self) -> Vec<C64> {
        self.path_products()
            .into_iter()
            .map(|p| p / self.overlap)
            .collect()
    }
}

/// `<f|O|i> / <f|i>`.
pub fn weak_value(obs: &Operator, pp: &PrePost) -> Result<C64> {
    if pp.overlap.norm() <= EPS_POST {
        return Err(Error::PostselectionSingular {
            magnitude: pp.overlap.norm(),
        });
    }
    let transformed = obs.apply(&pp.pre)?;
    Ok(inner(&pp.post, &transformed)? / pp.overlap)
}

/// Weak value of an observable on a multi-particle selection space.
pub fn joint_weak_value(obs: &Operator, pp: &PrePost) -> Result<C64> {
    if !pp.space().is_composite() {
        return Err(Error::SpaceMismatch(format!(
            "joint weak value needs a composite space, got [{}]",
            pp.space()
        )));
    }
    weak_value(obs, pp)
}

fn ensure_complete(projectors: &[Operator], space: &Space) -> Result<()> {
    let mut sum = Operator::zeros(space.clone());
    for p in projectors {
        sum = sum.add(p)?;
    }
    let gap = sum.distance(&Operator::identity(space.clone()))?;
    if gap > TOL {
        return Err(Error::IncompleteDecomposition { gap });
    }
    Ok(())
}

/// `|sum_k w_k - 1|` over a complete set of projectors.
pub fn sum_rule_residual(projectors: &[Operator], pp: &PrePost) -> Result<f64> {
    ensure_complete(projectors, pp.space())?;
    let total = projectors
        .iter()
        .map(|p| weak_value(p, pp))
        .sum::<Result<C64>>()?;
    Ok((total - C64::new(1.0, 0.0)).norm())
}

/// One element placed between pre- and postselection. Path indices address
/// the selection basis (0-based). Losses are phase-free.
#[derive(Clone, Debug, PartialEq)]
pub enum CircuitElement {
    /// Unitary on the internal degree of freedom, applied on one path.
    Unitary {
        path: usize,
        op: Operator,
    },
    /// Amplitude on `path` is multiplied by `sqrt(transmission)`.
    Attenuator {
        path: usize,
        transmission: f64,
    },
    Shutter {
        path: usize,
    },
    /// Zeroes the listed composite selection-basis amplitudes.
    JointShutter {
        labels: Vec<String>,
    },
}

impl CircuitElement {
    /// Amplitude multiplier of a loss element, `None` for unitaries.
    pub fn transmission(&self) -> Option<f64> {
        match self {
            CircuitElement::Attenuator { transmission, .. } => Some(*transmission),
            CircuitElement::Shutter { .. } | CircuitElement::JointShutter { .. } => Some(0.0),
            CircuitElement::Unitary { .. } => None,
        }
    }
}

pub fn check_transmission(t: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(Error::InvalidTransmission(t))
    }
}

pub fn check_visibility(v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::InvalidVisibility(v))
    }
}

/// Ordered list of per-path elements acting on `selection x internal`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    selection: Space,
    internal: Space,
    elements: Vec<CircuitElement>,
}

impl Circuit {
    /// Circuit with no internal degree of freedom.
    pub fn new(selection: Space) -> Self {
        Self::with_internal(selection, Space::trivial())
    }

    pub fn with_internal(selection: Space, internal: Space) -> Self {
        Self {
            selection,
            internal,
            elements: Vec::new(),
        }
    }

    pub fn selection(&self) -> &Space {
        &self.selection
    }

    pub fn internal(&self) -> &Space {
        &self.internal
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn check_path(&self, path: usize) -> Result<()> {
        if path < self.selection.dim() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "path index {path} outside selection space of dimension {}",
                self.selection.dim()
            )))
        }
    }

    pub fn push(&mut self, element: CircuitElement) -> Result<()> {
        match &element {
            CircuitElement::Unitary { path, op } => {
                self.check_path(*path)?;
                if op.space() != &self.internal {
                    return Err(Error::SpaceMismatch(format!(
                        "unitary acts on [{}], internal space is [{}]",
                        op.space(),
                        self.internal
                    )));
                }
                let defect = op.unitarity_defect();
                if defect > TOL {
                    return Err(Error::NotUnitary(defect));
                }
            }
            CircuitElement::Attenuator { path, transmission } => {
                self.check_path(*path)?;
                check_transmission(*transmission)?;
            }
            CircuitElement::Shutter { path } => self.check_path(*path)?,
            CircuitElement::JointShutter { labels } => {
                for l in labels {
                    if self.selection.index_of(l).is_none() {
                        return Err(Error::SpaceMismatch(format!(
                            "no selection label `{l}` in [{}]",
                            self.selection
                        )));
                    }
                }
            }
        }
        self.elements.push(element);
        Ok(())
    }

    pub fn with(mut self, element: CircuitElement) -> Result<Self> {
        self.push(element)?;
        Ok(self)
    }

    /// Selection-basis indices a joint shutter addresses.
    pub(crate) fn shutter_indices(&self, labels: &[String]) -> Vec<usize> {
        labels
            .iter()
            .filter_map(|l| self.selection.index_of(l))
            .collect()
    }
}

/// Outcome of following the evolution and contracting with `<f|`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    /// Unnormalized internal state after postselection.
    pub conditional_state: Ket,
    /// Squared norm of `conditional_state`.
    pub success_probability: f64,
    /// Per-path contributions `<f|k>` times the evolved internal state on
    /// path `k`; they sum to `conditional_state`.
    pub branches: Vec<Ket>,
}

impl EvolutionResult {
    /// Postselection probability with inter-path cross terms damped by
    /// `visibility`.
    pub fn probability_with_visibility(&self, visibility: f64) -> f64 {
        let dim = self.conditional_state.dim();
        (0..dim)
            .map(|j| damped_intensity(self.branches.iter().map(|b| b.amps()[j]), visibility))
            .sum()
    }

    /// Probability of postselection followed by projecting the internal
    /// state onto `analysis`, with cross terms damped by `visibility`.
    pub fn projected_probability(&self, analysis: &Ket, visibility: f64) -> Result<f64> {
        let amps = self
            .branches
            .iter()
            .map(|b| inner(analysis, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(damped_intensity(amps.into_iter(), visibility))
    }
}

/// `sum_k |a_k|^2 + V sum_{j != k} a_j conj(a_k)`.
fn damped_intensity(amps: impl Iterator<Item = C64>, visibility: f64) -> f64 {
    let (mut total, mut incoherent) = (C64::new(0.0, 0.0), 0.0);
    for a in amps {
        total += a;
        incoherent += a.norm_sqr();
    }
    let coherent = total.norm_sqr();
    (incoherent + visibility * (coherent - incoherent)).max(0.0)
}

/// Brute-force route: evolve `|i> x |psi>` through every element in list
/// order, then postselect on `<f|`.
pub fn evolve_full(
    circuit: &Circuit,
    pp: &PrePost,
    internal_init: &Ket,
) -> Result<EvolutionResult> {
    if pp.space() != circuit.selection() {
        return Err(Error::SpaceMismatch(format!(
            "pre/post over [{}], circuit selection [{}]",
            pp.space(),
            circuit.selection()
        )));
    }
    if internal_init.space() != circuit.internal() {
        return Err(Error::SpaceMismatch(format!(
            "internal state over [{}], circuit internal [{}]",
            internal_init.space(),
            circuit.internal()
        )));
    }

    let mut rows: Vec<Ket> = pp
        .pre()
        .amps()
        .iter()
        .map(|&a| internal_init.scale(a))
        .collect();
    for element in circuit.elements() {
        match element {
            CircuitElement::Unitary { path, op } => rows[*path] = op.apply(&rows[*path])?,
            CircuitElement::Attenuator { path, transmission } => {
                rows[*path] = rows[*path].scale(C64::new(transmission.sqrt(), 0.0));
            }
            CircuitElement::Shutter { path } => rows[*path] = rows[*path].scale(C64::new(0.0, 0.0)),
            CircuitElement::JointShutter { labels } => {
                for idx in circuit.shutter_indices(labels) {
                    rows[idx] = rows[idx].scale(C64::new(0.0, 0.0));
                }
            }
        }
    }

    let branches: Vec<Ket> = pp
        .post()
        .amps()
        .iter()
        .zip(&rows)
        .map(|(f, row)| row.scale(f.conj()))
        .collect();
    let mut conditional = Ket::new(
        circuit.internal().clone(),
        vec![C64::new(0.0, 0.0); circuit.internal().dim()],
    )?;
    for b in &branches {
        conditional = conditional.add(b)?;
    }
    let success_probability = conditional.norm_sqr();
    Ok(EvolutionResult {
        conditional_state: conditional,
        success_probability,
        branches,
    })
}

/// Normalized internal state after successful postselection.
pub fn conditional_state(result: &EvolutionResult) -> Result<Ket> {
    if result.success_probability <= EPS_POST * EPS_POST {
        return Err(Error::PostselectionSingular {
            magnitude: result.success_probability.sqrt(),
        });
    }
    result.conditional_state.clone().normalize()
}
