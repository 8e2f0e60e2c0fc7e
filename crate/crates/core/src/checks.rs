//! Batch invariant suites shared by the command line and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prepost::{
    joint_weak_value, sum_rule_residual, weak_value, Circuit, CircuitElement, PrePost,
};
use crate::random::{random_decomposition, random_ket, random_unitary};
use crate::scenario::{
    design_prepost, hardy, hardy_space, negated_rotation_angle, rotation_negation_gap, three_box,
    HardyOverlap, TargetWeakValues, ThreeBoxVariant,
};
use crate::shortcut::{check_oracle_equivalence, predict_success_probability, LossAssignment};
use crate::state::{Ket, Operator, Space, C64};

pub const ORACLE_TOL: f64 = 1e-9;
pub const EXACT_TOL: f64 = 1e-12;
pub const DEFAULT_CIRCUITS: usize = 100;
pub const DEFAULT_PHIS: [f64; 3] = [0.01, 0.05, 0.1];
/// Random pre/post pairs closer to orthogonal than this are redrawn.
pub const MIN_RANDOM_OVERLAP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracle,
    Negation,
    SumRule,
    Appendix,
    Hardy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Oracle,
        Suite::Negation,
        Suite::SumRule,
        Suite::Appendix,
        Suite::Hardy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Negation => "negation",
            Suite::SumRule => "sumrule",
            Suite::Appendix => "appendix",
            Suite::Hardy => "hardy",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }

    fn failed(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: format!("{}: {err}", name.into()),
            deviation: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub seed: u64,
    pub circuits: usize,
    pub phis: Vec<f64>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            seed: 0,
            circuits: DEFAULT_CIRCUITS,
            phis: DEFAULT_PHIS.to_vec(),
        }
    }
}

pub fn run_suite(suite: Suite, params: &SuiteParams) -> SuiteReport {
    let checks = match suite {
        Suite::Oracle => oracle_checks(params),
        Suite::Negation => negation_checks(),
        Suite::SumRule => sum_rule_checks(params),
        Suite::Appendix => appendix_checks(&params.phis),
        Suite::Hardy => hardy_checks(),
    };
    SuiteReport { suite, checks }
}

fn record(
    checks: &mut Vec<CheckOutcome>,
    name: impl Into<String>,
    tolerance: f64,
    value: Result<f64>,
) {
    let name = name.into();
    checks.push(match value {
        Ok(d) => CheckOutcome::new(name, d, tolerance),
        Err(e) => CheckOutcome::failed(name, &e),
    });
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn max_gap(a: &[C64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - c(*y)).norm())
        .fold(0.0, f64::max)
}

/// Pre/post pair on `space` with `|<f|i>| >= MIN_RANDOM_OVERLAP`.
pub fn random_prepost(rng: &mut impl Rng, space: &Space) -> Result<PrePost> {
    loop {
        let pp = PrePost::new(random_ket(rng, space)?, random_ket(rng, space)?)?;
        if pp.overlap().norm() >= MIN_RANDOM_OVERLAP {
            return Ok(pp);
        }
    }
}

/// A random configuration the shortcut formulas accept.
#[derive(Clone, Debug)]
pub struct RandomCircuit {
    pub circuit: Circuit,
    pub prepost: PrePost,
    pub internal_init: Ket,
}

/// 2 to 4 paths, internal dimension 1 or 2, and either one unitary per
/// chosen path or one attenuator (sometimes a shutter) per chosen path.
pub fn random_per_path_circuit(rng: &mut impl Rng) -> Result<RandomCircuit> {
    let paths = rng.random_range(2..=4);
    let selection = Space::paths(paths)?;
    let internal = if rng.random_bool(0.5) {
        Space::polarization()
    } else {
        Space::trivial()
    };
    let prepost = random_prepost(rng, &selection)?;
    let internal_init = random_ket(rng, &internal)?;
    let mut circuit = Circuit::with_internal(selection, internal.clone());
    let unitaries = rng.random_bool(0.5);
    for path in 0..paths {
        if !rng.random_bool(0.7) {
            continue;
        }
        let element = if unitaries {
            CircuitElement::Unitary {
                path,
                op: random_unitary(rng, &internal)?,
            }
        } else if rng.random_bool(0.1) {
            CircuitElement::Shutter { path }
        } else {
            CircuitElement::Attenuator {
                path,
                transmission: rng.random_range(0.0..=1.0),
            }
        };
        circuit.push(element)?;
    }
    Ok(RandomCircuit {
        circuit,
        prepost,
        internal_init,
    })
}

fn oracle_checks(params: &SuiteParams) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut checks = Vec::with_capacity(params.circuits);
    for i in 0..params.circuits {
        let value = random_per_path_circuit(&mut rng)
            .and_then(|rc| check_oracle_equivalence(&rc.circuit, &rc.prepost, &rc.internal_init));
        record(&mut checks, format!("circuit {i}"), ORACLE_TOL, value);
    }
    checks
}

const T_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn loss_sweep_gap(pp: &PrePost, lossy: &[usize], expected: impl Fn(f64) -> f64) -> Result<f64> {
    let k = pp.space().dim();
    let mut worst = 0.0_f64;
    for t in T_GRID {
        let loss = LossAssignment::on_paths(k, lossy, t)?;
        let shortcut = predict_success_probability(pp, &loss)?;
        let mut circuit = Circuit::new(pp.space().clone());
        for &path in lossy {
            circuit.push(CircuitElement::Attenuator {
                path,
                transmission: t,
            })?;
        }
        let oracle = crate::prepost::evolve_full(&circuit, pp, &Ket::unit())?.success_probability;
        worst = worst
            .max((shortcut - expected(t)).abs())
            .max((oracle - expected(t)).abs());
    }
    Ok(worst)
}

fn negation_checks() -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    let three = three_box(ThreeBoxVariant::Intro).prepost;
    record(
        &mut checks,
        "three-box loss on path 1 gives T/9",
        EXACT_TOL,
        loss_sweep_gap(&three, &[0], |t| t / 9.0),
    );
    record(
        &mut checks,
        "three-box loss on paths 1,2 is cancelled",
        EXACT_TOL,
        loss_sweep_gap(&three, &[0, 1], |_| 1.0 / 9.0),
    );
    record(
        &mut checks,
        "three-box loss on path 2 raises the probability",
        EXACT_TOL,
        loss_sweep_gap(&three, &[1], |t| (2.0 - t.sqrt()).powi(2) / 9.0),
    );
    record(
        &mut checks,
        "weak value 0 path is inert",
        EXACT_TOL,
        TargetWeakValues::from_real(&[0.5, 0.0, 0.5])
            .and_then(|t| design_prepost(&t))
            .and_then(|pp| {
                let p = pp.success_probability();
                loss_sweep_gap(&pp, &[1], |_| p)
            }),
    );
    for a in [0.5, 2.0, -1.5] {
        record(
            &mut checks,
            format!("weak values ({a}, {}, 1) cancel under equal loss", -a),
            EXACT_TOL,
            TargetWeakValues::from_real(&[a, -a, 1.0])
                .and_then(|t| design_prepost(&t))
                .and_then(|pp| {
                    let p = pp.success_probability();
                    loss_sweep_gap(&pp, &[0, 1], |_| p)
                }),
        );
    }
    for phi in [0.1, 0.7, 1.3] {
        record(
            &mut checks,
            format!("rotation by {phi} is reversed on a -1 path"),
            phi * phi,
            // U(phi) takes |H> to angle -phi.
            negated_rotation_angle(phi).map(|angle| (angle - phi).abs()),
        );
    }
    checks
}

fn sum_rule_checks(params: &SuiteParams) -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    for (name, variant) in [
        ("three-box-intro", ThreeBoxVariant::Intro),
        ("three-box-experimental", ThreeBoxVariant::Experimental),
    ] {
        let pp = three_box(variant).prepost;
        let projectors: Result<Vec<Operator>> = pp
            .space()
            .labels()
            .iter()
            .map(|l| Operator::basis_projector(pp.space().clone(), l))
            .collect();
        record(
            &mut checks,
            format!("{name} path projectors"),
            EXACT_TOL,
            projectors.and_then(|ps| sum_rule_residual(&ps, &pp)),
        );
    }
    let pp = hardy(&[]).prepost;
    let projectors: Result<Vec<Operator>> = hardy_space()
        .labels()
        .iter()
        .map(|l| Operator::basis_projector(hardy_space(), l))
        .collect();
    record(
        &mut checks,
        "hardy joint projectors",
        EXACT_TOL,
        projectors.and_then(|ps| sum_rule_residual(&ps, &pp)),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for i in 0..20 {
        let value = (|| {
            let dim = rng.random_range(2..=5);
            let space = Space::paths(dim)?;
            let pp = random_prepost(&mut rng, &space)?;
            let parts = rng.random_range(1..=dim);
            let projectors = random_decomposition(&mut rng, &space, parts)?;
            sum_rule_residual(&projectors, &pp)
        })();
        record(
            &mut checks,
            format!("random decomposition {i}"),
            EXACT_TOL,
            value,
        );
    }
    checks
}

fn appendix_checks(phis: &[f64]) -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    for &phi in phis {
        let gap = rotation_negation_gap(phi);
        let closed = std::f64::consts::SQRT_2 * (2.0 - 2.0 * phi.cos());
        checks.push(CheckOutcome::new(
            format!("phi = {phi}: gap <= 2 phi^2"),
            gap,
            2.0 * phi * phi,
        ));
        checks.push(CheckOutcome::new(
            format!("phi = {phi}: closed form"),
            (gap - closed).abs(),
            EXACT_TOL,
        ));
    }
    checks
}

/// Label order of the reported joint weak values `(1, 1, 0, -1)`.
pub const HARDY_JOINT_ORDER: [&str; 4] = ["NO+,O-", "O+,NO-", "O+,O-", "NO+,NO-"];

fn hardy_checks() -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    let pp = hardy(&[]).prepost;
    let space = hardy_space();
    let joint: Result<Vec<C64>> = HARDY_JOINT_ORDER
        .iter()
        .map(|l| {
            Operator::basis_projector(space.clone(), l).and_then(|p| joint_weak_value(&p, &pp))
        })
        .collect();
    record(
        &mut checks,
        "joint weak values (1, 1, 0, -1)",
        EXACT_TOL,
        joint.map(|w| max_gap(&w, &[1.0, 1.0, 0.0, -1.0])),
    );
    let marginals = (|| {
        let mut ws = Vec::new();
        for (name, labels) in [("positron", ["NO+", "O+"]), ("electron", ["NO-", "O-"])] {
            for label in labels {
                let factor = space
                    .factors()
                    .iter()
                    .find(|f| f.name == name)
                    .expect("known factor");
                let single = Space::new(vec![factor.clone()])?;
                let p = Operator::basis_projector(single, label)?;
                let full = if name == "positron" {
                    p.tensor(&Operator::identity(Space::new(vec![
                        space.factors()[1].clone()
                    ])?))?
                } else {
                    Operator::identity(Space::new(vec![space.factors()[0].clone()])?).tensor(&p)?
                };
                ws.push(weak_value(&full, &pp)?);
            }
        }
        Ok(max_gap(&ws, &[0.0, 1.0, 0.0, 1.0]))
    })();
    record(
        &mut checks,
        "single-particle weak values",
        EXACT_TOL,
        marginals,
    );
    let probability =
        |overlaps: &[HardyOverlap]| hardy(overlaps).evolve().map(|r| r.success_probability);
    record(
        &mut checks,
        "no overlap: probability 1/12",
        EXACT_TOL,
        probability(&[]).map(|p| (p - 1.0 / 12.0).abs()),
    );
    record(
        &mut checks,
        "overlap (NO+,O-): probability 0",
        EXACT_TOL,
        probability(&[HardyOverlap::NoPlusOMinus]).map(|p| p.abs()),
    );
    record(
        &mut checks,
        "both overlaps: probability 1/12",
        EXACT_TOL,
        probability(&[HardyOverlap::NoPlusOMinus, HardyOverlap::NoPlusNoMinus])
            .map(|p| (p - 1.0 / 12.0).abs()),
    );
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        let params = SuiteParams::default();
        for suite in Suite::ALL {
            let report = run_suite(suite, &params);
            assert!(!report.checks.is_empty());
            assert!(report.passed(), "{:?}", report.failures());
        }
    }

    #[test]
    fn suite_names_roundtrip() {
        for suite in Suite::ALL {
            assert_eq!(Suite::parse(suite.name()), Some(suite));
        }
        assert_eq!(Suite::parse("bogus"), None);
    }

    #[test]
    fn appendix_bound_holds_beyond_small_angles() {
        let report = run_suite(
            Suite::Appendix,
            &SuiteParams {
                phis: vec![0.5, 1.0, 3.0],
                ..SuiteParams::default()
            },
        );
        assert!(report.passed(), "{:?}", report.failures());
    }

    #[test]
    fn random_circuits_are_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = random_per_path_circuit(&mut a).unwrap();
            let y = random_per_path_circuit(&mut b).unwrap();
            assert_eq!(x.circuit, y.circuit);
            assert_eq!(x.prepost, y.prepost);
        }
    }

    #[test]
    fn errors_become_failed_checks() {
        let mut checks = Vec::new();
        record(&mut checks, "broken", 1.0, Err(Error::StrengthZero));
        assert!(!checks[0].passed);
        assert!(checks[0].name.starts_with("broken"));
    }
}
