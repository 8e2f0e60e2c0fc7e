//! Dense complex linear algebra over small labeled Hilbert spaces.
//!
//! Every space in this crate is a tensor product of named subsystems, each
//! with an ordered list of basis labels. Composite bases are row-major: the
//! first factor varies slowest. A composite basis label is the per-factor
//! labels joined with `,` (for example `NO+,O-`).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for identities that hold exactly in real arithmetic.
pub const TOL: f64 = 1e-12;

/// Relative slack below which a ket is treated as already normalized, so
/// repeated normalization is idempotent bit-for-bit.
const RENORM_SLACK: f64 = 8.0 * f64::EPSILON;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub name: String,
    pub labels: Vec<String>,
}

impl Subsystem {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// An ordered tensor product of subsystems. The empty product is the
/// one-dimensional trivial space.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Space {
    factors: Vec<Subsystem>,
}

impl Space {
    pub fn new(factors: Vec<Subsystem>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.labels.is_empty() {
                return Err(Error::SpaceMismatch(format!(
                    "subsystem `{}` has no basis labels",
                    f.name
                )));
            }
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::SpaceMismatch(format!(
                    "duplicate subsystem `{}`",
                    f.name
                )));
            }
            for (j, l) in f.labels.iter().enumerate() {
                if f.labels[..j].contains(l) {
                    return Err(Error::SpaceMismatch(format!(
                        "duplicate label `{l}` in `{}`",
                        f.name
                    )));
                }
            }
        }
        Ok(Self { factors })
    }

    /// A single subsystem with the given basis labels.
    pub fn single<S: Into<String>>(
        name: &str,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::new(vec![Subsystem::new(name, labels)])
    }

    /// Path subsystem labelled `1..=k`.
    pub fn paths(k: usize) -> Result<Self> {
        Self::single("path", (1..=k).map(|i| i.to_string()))
    }

    pub fn polarization() -> Self {
        Self::single("pol", ["H", "V"]).expect("static labels")
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[Subsystem] {
        &self.factors
    }

    pub fn is_composite(&self) -> bool {
        self.factors.len() > 1
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Subsystem::dim).product()
    }

    pub fn tensor(&self, other: &Space) -> Result<Space> {
        if let Some(f) = self
            .factors
            .iter()
            .find(|f| other.factors.iter().any(|g| g.name == f.name))
        {
            return Err(Error::SpaceMismatch(format!(
                "subsystem `{}` appears in both factors",
                f.name
            )));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Space { factors })
    }

    /// Composite label of basis index `index`.
    pub fn label(&self, mut index: usize) -> String {
        let mut parts = vec![""; self.factors.len()];
        for (slot, f) in self.factors.iter().enumerate().rev() {
            parts[slot] = &f.labels[index % f.dim()];
            index /= f.dim();
        }
        parts.join(",")
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        let parts: Vec<&str> = if self.factors.is_empty() {
            vec![]
        } else {
            label.split(',').map(str::trim).collect()
        };
        if parts.len() != self.factors.len() {
            return None;
        }
        parts.iter().zip(&self.factors).try_fold(0, |acc, (p, f)| {
            f.labels
                .iter()
                .position(|l| l == p)
                .map(|pos| acc * f.dim() + pos)
        })
    }

    fn ensure_same(&self, other: &Space, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "{what}: [{self}] vs [{other}]"
            )))
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{}{{{}}}", s.name, s.labels.join(","))?;
        }
        Ok(())
    }
}

fn check_finite(values: &[C64]) -> Result<()> {
    match values
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// A pure state (not necessarily normalized) over a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    space: Space,
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(space: Space, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dim()
            )));
        }
        check_finite(&amps)?;
        Ok(Self { space, amps })
    }

    pub fn normalized(space: Space, amps: Vec<C64>) -> Result<Self> {
        Self::new(space, amps)?.normalize()
    }

    pub fn from_real(space: Space, amps: &[f64]) -> Result<Self> {
        Self::new(space, amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(space: Space, index: usize) -> Result<Self> {
        let dim = space.dim();
        if index >= dim {
            return Err(Error::SpaceMismatch(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn from_label(space: Space, label: &str) -> Result<Self> {
        let index = space.index_of(label).ok_or_else(|| {
            Error::SpaceMismatch(format!("no basis label `{label}` in [{space}]"))
        })?;
        Self::basis(space, index)
    }

    /// The unit scalar on the trivial space.
    pub fn unit() -> Self {
        Self {
            space: Space::trivial(),
            amps: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::DegenerateState(
                "cannot normalize the zero vector".into(),
            ));
        }
        if (n2 - 1.0).abs() > RENORM_SLACK {
            let inv = 1.0 / n2.sqrt();
            self.amps.iter_mut().for_each(|z| *z *= inv);
        }
        Ok(self)
    }

    pub fn scale(&self, factor: C64) -> Ket {
        Ket {
            space: self.space.clone(),
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        self.space.ensure_same(&other.space, "ket sum")?;
        Ok(Ket {
            space: self.space.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let space = self.space.tensor(&other.space)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Ket { space, amps })
    }

    /// `|<self|other>|`, the global-phase-insensitive overlap of two kets.
    pub fn fidelity_amplitude(&self, other: &Ket) -> Result<f64> {
        Ok(inner(self, other)?.norm())
    }
}

/// Builds a ket over `space`, optionally normalizing it.
pub fn make_ket(space: Space, amps: Vec<C64>, normalize: bool) -> Result<Ket> {
    let ket = Ket::new(space, amps)?;
    if normalize {
        ket.normalize()
    } else {
        Ok(ket)
    }
}

/// `<bra|ket>`, conjugate-linear in `bra`.
pub fn inner(bra: &Ket, ket: &Ket) -> Result<C64> {
    bra.space.ensure_same(&ket.space, "inner product")?;
    Ok(bra
        .amps
        .iter()
        .zip(&ket.amps)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

/// Dense square matrix over a labeled space, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: Space,
    data: Vec<C64>,
}

impl Operator {
    pub fn from_rows(space: Space, rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = space.dim();
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::SpaceMismatch(format!("matrix is not {dim}x{dim}")));
        }
        let data: Vec<C64> = rows.into_iter().flatten().collect();
        check_finite(&data)?;
        Ok(Self { space, data })
    }

    pub fn from_real_rows(space: Space, rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            space,
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(space: Space) -> Self {
        let dim = space.dim();
        Self {
            space,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(space: Space) -> Self {
        let mut op = Self::zeros(space);
        let dim = op.dim();
        for i in 0..dim {
            op.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        op
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &Ket, bra: &Ket) -> Result<Self> {
        ket.space.ensure_same(&bra.space, "outer product")?;
        let data = ket
            .amps
            .iter()
            .flat_map(|k| bra.amps.iter().map(move |b| k * b.conj()))
            .collect();
        Ok(Self {
            space: ket.space.clone(),
            data,
        })
    }

    /// Projector onto a single basis label.
    pub fn basis_projector(space: Space, label: &str) -> Result<Self> {
        projector_of(&Ket::from_label(space, label)?)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim()).map(<[C64]>::to_vec).collect()
    }

    pub fn adjoint(&self) -> Operator {
        let dim = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[c * dim + r] = self.data[r * dim + c].conj();
            }
        }
        Operator {
            space: self.space.clone(),
            data,
        }
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        self.space.ensure_same(&ket.space, "operator application")?;
        let amps = self
            .data
            .chunks(self.dim())
            .map(|row| row.iter().zip(&ket.amps).map(|(m, v)| m * v).sum())
            .collect();
        Ok(Ket {
            space: self.space.clone(),
            amps,
        })
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        self.space.ensure_same(&rhs.space, "operator product")?;
        let dim = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.data[r * dim + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..dim {
                    data[r * dim + c] += a * rhs.data[k * dim + c];
                }
            }
        }
        Ok(Operator {
            space: self.space.clone(),
            data,
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Operator> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            space: self.space.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    fn zip_with(&self, rhs: &Operator, f: impl Fn(C64, C64) -> C64) -> Result<Operator> {
        self.space.ensure_same(&rhs.space, "operator sum")?;
        Ok(Operator {
            space: self.space.clone(),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Kronecker product; the result acts on `self.space x rhs.space`.
    pub fn tensor(&self, rhs: &Operator) -> Result<Operator> {
        let space = self.space.tensor(&rhs.space)?;
        let (da, db) = (self.dim(), rhs.dim());
        let dim = da * db;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.data[ar * da + ac];
                for br in 0..db {
                    for bc in 0..db {
                        data[(ar * db + br) * dim + ac * db + bc] = a * rhs.data[br * db + bc];
                    }
                }
            }
        }
        Ok(Operator { space, data })
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance `||self - rhs||_F`.
    pub fn distance(&self, rhs: &Operator) -> Result<f64> {
        Ok(self.sub(rhs)?.frobenius_norm())
    }

    /// `||U^dagger U - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let product = self.adjoint().compose(self).expect("same space");
        product
            .distance(&Operator::identity(self.space.clone()))
            .expect("same space")
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= TOL
    }

    pub fn is_projector(&self) -> bool {
        let square = self.compose(self).expect("same space");
        square.distance(self).expect("same space") <= TOL
            && self.distance(&self.adjoint()).expect("same space") <= TOL
    }
}

/// `|v><v|` for a normalized `v`.
pub fn projector_of(ket: &Ket) -> Result<Operator> {
    if !ket.is_normalized() {
        return Err(Error::DegenerateState(format!(
            "projector needs a normalized ket (squared norm {})",
            ket.norm_sqr()
        )));
    }
    Operator::outer(ket, ket)
}

pub fn apply(op: &Operator, ket: &Ket) -> Result<Ket> {
    op.apply(ket)
}

/// Polarization rotation `[[cos, sin], [-sin, cos]]` in the `{H, V}` basis.
pub fn rotation(phi: f64) -> Operator {
    let (s, c) = phi.sin_cos();
    Operator::from_real_rows(Space::polarization(), &[&[c, s], &[-s, c]]).expect("2x2")
}
