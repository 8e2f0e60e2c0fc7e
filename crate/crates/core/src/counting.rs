//! Monte Carlo emulation of coincidence counting.
//!
//! Every grid point draws from its own ChaCha8 stream, selected by the
//! setting index under the run seed, so results do not depend on evaluation
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;
use crate::pointer::{joint_readout_probabilities, validate_grid, MarkingConfig, PointerSample};
use crate::prepost::{check_transmission, check_visibility, CircuitElement};
use crate::scenario::ScenarioSpec;

pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trials: u64,
    pub seed: u64,
    /// Overrides the scenario visibility when set.
    pub visibility: Option<f64>,
}

impl RunConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(Self {
            trials,
            seed,
            visibility: None,
        })
    }

    pub fn with_visibility(mut self, v: f64) -> Result<Self> {
        self.visibility = Some(check_visibility(v)?);
        Ok(self)
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn binomial(rng: &mut ChaCha8Rng, trials: u64, p: f64) -> Result<u64> {
    let dist =
        Binomial::new(trials, check_probability(p)?).map_err(|_| Error::InvalidProbability(p))?;
    Ok(dist.sample(rng))
}

/// Number of successes in `cfg.trials` independent postselections.
pub fn simulate_counts(p: f64, cfg: &RunConfig) -> Result<u64> {
    binomial(&mut stream(cfg.seed, 0), cfg.trials, p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    /// Swept transmission values.
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
    pub analytic: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl CountSeries {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }

    /// Binomial standard deviation of the frequency at each point.
    pub fn frequency_sigmas(&self) -> Vec<f64> {
        let n = self.trials as f64;
        self.analytic
            .iter()
            .map(|p| (p * (1.0 - p) / n).sqrt())
            .collect()
    }

    /// Largest `|freq - p| / sigma`; points with zero variance count only
    /// when they deviate at all.
    pub fn max_z_score(&self) -> f64 {
        self.frequencies()
            .iter()
            .zip(&self.analytic)
            .zip(self.frequency_sigmas())
            .map(|((f, p), s)| {
                let d = (f - p).abs();
                if s > 0.0 {
                    d / s
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// OLS slope of counts against the swept value and its standard error
    /// under binomial noise.
    pub fn count_slope(&self) -> Result<(f64, f64)> {
        let y: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        let line = fit::line(&self.values, &y)?;
        let n = self.trials as f64;
        let var: Vec<f64> = self.analytic.iter().map(|p| n * p * (1.0 - p)).collect();
        Ok((line.slope, line.slope_std_error(&self.values, &var)))
    }
}

/// Sweeps one transmission value over the listed selection paths (0-based
/// indices), sampling counts at each setting.
pub fn sweep_loss(
    scenario: &ScenarioSpec,
    lossy_paths: &[usize],
    grid: &[f64],
    cfg: &RunConfig,
) -> Result<CountSeries> {
    let visibility = cfg.visibility.unwrap_or(scenario.visibility);
    check_visibility(visibility)?;
    let mut analytic = Vec::with_capacity(grid.len());
    let mut counts = Vec::with_capacity(grid.len());
    for (index, &t) in grid.iter().enumerate() {
        check_transmission(t)?;
        let mut circuit = scenario.circuit.clone();
        for &path in lossy_paths {
            circuit.push(CircuitElement::Attenuator {
                path,
                transmission: t,
            })?;
        }
        let result =
            crate::prepost::evolve_full(&circuit, &scenario.prepost, &scenario.internal_init)?;
        let p = result.probability_with_visibility(visibility).min(1.0);
        counts.push(binomial(
            &mut stream(cfg.seed, index as u64),
            cfg.trials,
            p,
        )?);
        analytic.push(p);
    }
    Ok(CountSeries {
        values: grid.to_vec(),
        counts,
        analytic,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

/// Copy of `scenario` with inter-path interference damped by `visibility`.
pub fn apply_visibility(scenario: &ScenarioSpec, visibility: f64) -> Result<ScenarioSpec> {
    let mut out = scenario.clone();
    out.visibility = check_visibility(visibility)?;
    Ok(out)
}

/// Sampled pointer sweep: per strength, postselected photons are drawn
/// from `P(f)` and then split between the `+` and `-` analyser ports.
pub fn sweep_pointer_counts(
    scenario: &ScenarioSpec,
    path: usize,
    grid: &[f64],
    cfg: &RunConfig,
) -> Result<Vec<PointerSample>> {
    validate_grid(grid)?;
    let visibility = cfg.visibility.unwrap_or(scenario.visibility);
    grid.iter()
        .enumerate()
        .map(|(index, &g)| {
            let marking = MarkingConfig::from_strength(path, g)?;
            let (plus, minus) =
                joint_readout_probabilities(&scenario.prepost, &marking, visibility)?;
            let total = (plus + minus).min(1.0);
            let mut rng = stream(cfg.seed, index as u64);
            let detected = binomial(&mut rng, cfg.trials, total)?;
            let n_plus = binomial(&mut rng, detected, plus / (plus + minus))?;
            PointerSample::from_joint(marking.alpha(), n_plus as f64, (detected - n_plus) as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{three_box, ThreeBoxVariant};
    use crate::state::TOL;

    fn cfg(trials: u64, seed: u64) -> RunConfig {
        RunConfig::new(trials, seed).unwrap()
    }

    #[test]
    fn certain_outcomes() {
        assert_eq!(simulate_counts(0.0, &cfg(1000, 1)).unwrap(), 0);
        assert_eq!(simulate_counts(1.0, &cfg(1000, 1)).unwrap(), 1000);
    }

    #[test]
    fn one_ninth_within_three_sigma() {
        let n = 100_000u64;
        let p = 1.0 / 9.0;
        let c = simulate_counts(p, &cfg(n, 42)).unwrap() as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((c - n as f64 * p).abs() <= 3.0 * sigma, "{c}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            simulate_counts(1.5, &cfg(10, 0)),
            Err(Error::InvalidProbability(_))
        ));
        assert!(RunConfig::new(0, 0).is_err());
        assert!(matches!(
            cfg(1, 0).with_visibility(-0.1),
            Err(Error::InvalidVisibility(_))
        ));
        let s = three_box(ThreeBoxVariant::Intro);
        assert!(matches!(
            sweep_loss(&s, &[7], &[0.5], &cfg(10, 0)),
            Err(Error::SpaceMismatch(_))
        ));
        assert!(matches!(
            sweep_loss(&s, &[0], &[1.5], &cfg(10, 0)),
            Err(Error::InvalidTransmission(_))
        ));
        assert!(matches!(
            apply_visibility(&s, 2.0),
            Err(Error::InvalidVisibility(_))
        ));
    }

    #[test]
    fn seeded_sweeps_are_reproducible() {
        let s = three_box(ThreeBoxVariant::Intro);
        let grid = [0.0, 0.5, 1.0];
        let a = sweep_loss(&s, &[0, 1], &grid, &cfg(5000, 9)).unwrap();
        let b = sweep_loss(&s, &[0, 1], &grid, &cfg(5000, 9)).unwrap();
        assert_eq!(a, b);
        // The substream of a point does not depend on the rest of the grid.
        let single = sweep_loss(&s, &[0, 1], &grid[..1], &cfg(5000, 9)).unwrap();
        assert_eq!(single.counts[0], a.counts[0]);
    }

    #[test]
    fn visibility_limits() {
        let s = three_box(ThreeBoxVariant::Intro);
        let coherent = apply_visibility(&s, 1.0).unwrap();
        assert!(
            (coherent.success_probability().unwrap() - s.success_probability().unwrap()).abs()
                <= TOL
        );
        let classical = apply_visibility(&s, 0.0).unwrap();
        let expected: f64 = s.prepost.path_products().iter().map(|p| p.norm_sqr()).sum();
        assert!((classical.success_probability().unwrap() - expected).abs() <= TOL);
        // Without interference loss on a single path acts classically.
        let blocked = classical
            .with_element(CircuitElement::Shutter { path: 1 })
            .unwrap();
        assert!((blocked.success_probability().unwrap() - 2.0 / 9.0).abs() <= TOL);
    }
}
