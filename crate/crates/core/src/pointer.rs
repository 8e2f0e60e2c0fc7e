//! Weak measurement of a path projector through a polarization pointer.
//!
//! The marked path's polarization is rotated from `|H>` to
//! `cos 2a |H> + sin 2a |V>` (a half-wave plate at mount angle `a`), the
//! other paths stay `|H>`. After postselection the photon is analysed in
//! `|+-> = cos(a +- pi/4)|H> + sin(a +- pi/4)|V>`. With `b = pi/4 - a` the
//! strength is `G = cos^2 b - sin^2 b = sin 2a` and the normalized readout
//! `R = (P(+|f) - sin^2 b) / G` tends to `Re w` of the marked path as
//! `G -> 0`.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;
use crate::prepost::{check_visibility, evolve_full, Circuit, CircuitElement, PrePost, EPS_POST};
use crate::state::{rotation, Ket, Operator, Space};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkingConfig {
    path: usize,
    alpha: f64,
}

impl MarkingConfig {
    pub fn new(path: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_4).contains(&alpha) {
            return Err(Error::InvalidAngle(alpha));
        }
        Ok(Self { path, alpha })
    }

    /// Marking angle that yields strength `g`.
    pub fn from_strength(path: usize, g: f64) -> Result<Self> {
        check_strength(g)?;
        Self::new(path, g.asin() / 2.0)
    }

    pub fn path(&self) -> usize {
        self.path
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn strength(&self) -> f64 {
        strength(self.alpha)
    }
}

/// `cos^2 b - sin^2 b` with `b = pi/4 - alpha`.
pub fn strength(alpha: f64) -> f64 {
    let beta = FRAC_PI_4 - alpha;
    beta.cos().powi(2) - beta.sin().powi(2)
}

fn check_strength(g: f64) -> Result<f64> {
    if g > 0.0 && g <= 1.0 {
        Ok(g)
    } else {
        Err(Error::InvalidStrength(g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointerSample {
    pub g: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub r: f64,
}

impl PointerSample {
    /// Builds a sample from the joint probabilities (or counts) of
    /// postselection together with each analysis outcome.
    pub fn from_joint(alpha: f64, joint_plus: f64, joint_minus: f64) -> Result<Self> {
        let g = strength(alpha);
        if g.abs() <= f64::EPSILON {
            return Err(Error::StrengthZero);
        }
        let total = joint_plus + joint_minus;
        if total <= 0.0 {
            return Err(Error::PostselectionSingular {
                magnitude: total.max(0.0).sqrt(),
            });
        }
        let p_plus = joint_plus / total;
        let sin2_beta = (FRAC_PI_4 - alpha).sin().powi(2);
        Ok(Self {
            g,
            p_plus,
            p_minus: joint_minus / total,
            r: (p_plus - sin2_beta) / g,
        })
    }
}

/// Half-wave plate action on the marked path: `|H> -> cos 2a |H> + sin 2a |V>`.
pub fn marking_operator(alpha: f64) -> Operator {
    rotation(-2.0 * alpha)
}

/// `(|+>, |->)` for marking angle `alpha`.
pub fn analysis_basis(alpha: f64) -> (Ket, Ket) {
    let ket = |theta: f64| {
        Ket::from_real(Space::polarization(), &[theta.cos(), theta.sin()]).expect("2 amps")
    };
    (ket(alpha + FRAC_PI_4), ket(alpha - FRAC_PI_4))
}

/// Joint probabilities `P(f, +)` and `P(f, -)`, inter-path coherence damped
/// by `visibility`.
pub fn joint_readout_probabilities(
    pp: &PrePost,
    cfg: &MarkingConfig,
    visibility: f64,
) -> Result<(f64, f64)> {
    check_visibility(visibility)?;
    let circuit = Circuit::with_internal(pp.space().clone(), Space::polarization()).with(
        CircuitElement::Unitary {
            path: cfg.path,
            op: marking_operator(cfg.alpha),
        },
    )?;
    let h = Ket::from_label(Space::polarization(), "H")?;
    let result = evolve_full(&circuit, pp, &h)?;
    let (plus, minus) = analysis_basis(cfg.alpha);
    Ok((
        result.projected_probability(&plus, visibility)?,
        result.projected_probability(&minus, visibility)?,
    ))
}

pub fn mark_and_readout(pp: &PrePost, cfg: &MarkingConfig) -> Result<PointerSample> {
    mark_and_readout_with_visibility(pp, cfg, 1.0)
}

pub fn mark_and_readout_with_visibility(
    pp: &PrePost,
    cfg: &MarkingConfig,
    visibility: f64,
) -> Result<PointerSample> {
    if cfg.alpha == 0.0 {
        return Err(Error::StrengthZero);
    }
    let (plus, minus) = joint_readout_probabilities(pp, cfg, visibility)?;
    if plus + minus <= EPS_POST * EPS_POST {
        return Err(Error::PostselectionSingular {
            magnitude: (plus + minus).sqrt(),
        });
    }
    PointerSample::from_joint(cfg.alpha, plus, minus)
}

/// Default strength grid `0.1, 0.2, ..., 1.0`.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    for &g in grid {
        check_strength(g)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedGrid);
    }
    Ok(())
}

pub fn sweep_strength(pp: &PrePost, path: usize, grid: &[f64]) -> Result<Vec<PointerSample>> {
    sweep_strength_with_visibility(pp, path, grid, 1.0)
}

pub fn sweep_strength_with_visibility(
    pp: &PrePost,
    path: usize,
    grid: &[f64],
    visibility: f64,
) -> Result<Vec<PointerSample>> {
    validate_grid(grid)?;
    grid.iter()
        .map(|&g| {
            mark_and_readout_with_visibility(
                pp,
                &MarkingConfig::from_strength(path, g)?,
                visibility,
            )
        })
        .collect()
}

/// How `R(G)` is extrapolated to `G = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitModel {
    /// Straight line `R = intercept + slope G`.
    Linear,
    /// `R = intercept + slope G^2 + c2 G^4 + ...` up to `G^(2 degree)`.
    /// The readout is an analytic function of `G^2` under this marking, so
    /// odd powers vanish.
    EvenPolynomial { degree: usize },
}

impl Default for FitModel {
    fn default() -> Self {
        FitModel::EvenPolynomial { degree: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValueEstimate {
    /// Extrapolated `R(0)`, the estimate of `Re w`.
    pub intercept: f64,
    /// Leading coefficient: `dR/dG` for the line, `dR/d(G^2)` otherwise.
    pub slope: f64,
    /// RMS of the fit residuals.
    pub residual: f64,
    pub model: FitModel,
}

pub fn extrapolate_weak_value(
    samples: &[PointerSample],
    model: FitModel,
) -> Result<WeakValueEstimate> {
    let g: Vec<f64> = samples.iter().map(|s| s.g).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let needed = match model {
        FitModel::Linear => 3,
        FitModel::EvenPolynomial { degree } => (degree + 1).max(3),
    };
    let mut distinct = g.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: distinct.len(),
        });
    }
    match model {
        FitModel::Linear => {
            let line = fit::line(&g, &r)?;
            Ok(WeakValueEstimate {
                intercept: line.intercept,
                slope: line.slope,
                residual: line.rms,
                model,
            })
        }
        FitModel::EvenPolynomial { degree } => {
            let g2: Vec<f64> = g.iter().map(|x| x * x).collect();
            let (coeffs, rms) = fit::polynomial(&g2, &r, degree)?;
            Ok(WeakValueEstimate {
                intercept: coeffs[0],
                slope: coeffs.get(1).copied().unwrap_or(0.0),
                residual: rms,
                model,
            })
        }
    }
}
