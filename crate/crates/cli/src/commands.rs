use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use postsel::checks::{run_suite, Suite, SuiteParams, DEFAULT_PHIS};
use postsel::counting::{sweep_loss, sweep_pointer_counts, RunConfig};
use postsel::export::{counts_csv, pointer_csv};
use postsel::pointer::{
    default_grid, extrapolate_weak_value, sweep_strength_with_visibility, validate_grid, FitModel,
};
use postsel::prepost::{check_transmission, sum_rule_residual};
use postsel::scenario::{builtin, design_prepost, BUILTIN_NAMES};
use postsel::scenario_file::{load_spec, save_spec};
use postsel::{joint_weak_value, weak_value, Operator, ScenarioSpec, Space, TargetWeakValues, C64};
use serde_json::{json, Value};

use crate::parse;
use crate::report::{command_echo, RunReport};
use crate::{CheckArgs, DesignArgs, SweepArgs, SweepMode, WeakValuesArgs};

/// Designed states must reproduce their targets this closely.
const DESIGN_TOL: f64 = 1e-9;

/// Invalid command-line input; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl fmt::Display) -> anyhow::Error {
    anyhow!(Usage(format!("{e:#}")))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

/// Built-in names take precedence over files of the same name.
pub fn resolve_scenario(name: &str) -> Result<ScenarioSpec> {
    if let Some(spec) = builtin(name) {
        return Ok(spec);
    }
    let path = Path::new(name);
    if !path.is_file() {
        bail!(
            "scenario not found: `{name}` is neither a built-in ({}) nor a file",
            BUILTIN_NAMES.join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    load_spec(&text).with_context(|| format!("loading {name}"))
}

fn complex_entry(label: &str, z: C64) -> Value {
    // `+ 0.0` folds negative zero.
    json!({ "label": label, "re": z.re + 0.0, "im": z.im + 0.0 })
}

fn single(space: &Space, factor: usize) -> Result<Space> {
    Ok(Space::new(vec![space.factors()[factor].clone()])?)
}

/// `I x .. x |l><l| x .. x I` with the projector on `factor`.
fn marginal_projector(space: &Space, factor: usize, label: &str) -> Result<Operator> {
    let mut acc: Option<Operator> = None;
    for j in 0..space.factors().len() {
        let s = single(space, j)?;
        let piece = if j == factor {
            Operator::basis_projector(s, label)?
        } else {
            Operator::identity(s)
        };
        acc = Some(match acc {
            None => piece,
            Some(a) => a.tensor(&piece)?,
        });
    }
    acc.ok_or_else(|| anyhow!("empty space"))
}

pub fn weak_values(args: &[String], a: &WeakValuesArgs) -> Result<RunReport> {
    let spec = resolve_scenario(&a.scenario)?;
    let pp = &spec.prepost;
    let space = pp.space().clone();

    let mut entries = Vec::new();
    let mut residual = 0.0_f64;
    if a.joint || !space.is_composite() {
        let projectors: Vec<Operator> = space
            .labels()
            .iter()
            .map(|l| Operator::basis_projector(space.clone(), l))
            .collect::<postsel::Result<_>>()?;
        for (label, p) in space.labels().iter().zip(&projectors) {
            let w = if a.joint {
                joint_weak_value(p, pp)?
            } else {
                weak_value(p, pp)?
            };
            entries.push(complex_entry(label, w));
        }
        residual = sum_rule_residual(&projectors, pp)?;
    } else {
        for (j, factor) in space.factors().iter().enumerate() {
            let projectors: Vec<Operator> = factor
                .labels
                .iter()
                .map(|l| marginal_projector(&space, j, l))
                .collect::<Result<_>>()?;
            for (label, p) in factor.labels.iter().zip(&projectors) {
                entries.push(complex_entry(
                    &format!("{}:{label}", factor.name),
                    weak_value(p, pp)?,
                ));
            }
            residual = residual.max(sum_rule_residual(&projectors, pp)?);
        }
    }

    let circuit = spec.evolve()?;
    let outputs = json!({
        "weak_values": entries,
        "sum_rule_residual": residual,
        "overlap_magnitude": pp.overlap().norm(),
        "success_probability": pp.success_probability(),
        "circuit_success_probability": circuit.probability_with_visibility(spec.visibility),
    });
    let config = json!({
        "scenario": a.scenario,
        "name": spec.name,
        "joint": a.joint,
        "visibility": spec.visibility,
        "elements": spec.circuit.elements().len(),
    });
    Ok(RunReport::new(
        command_echo(args, None),
        None,
        config,
        outputs,
        true,
    ))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<Option<String>> {
    match path {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            Ok(Some(p.display().to_string()))
        }
        None => Ok(None),
    }
}

fn parse_fit(s: &str) -> Result<FitModel> {
    match s.split_once(':') {
        None if s == "linear" => Ok(FitModel::Linear),
        Some(("even", d)) => {
            let degree: usize = d
                .parse()
                .map_err(|_| usage(format!("bad fit degree `{d}`")))?;
            if degree == 0 {
                return Err(usage("fit degree must be at least 1"));
            }
            Ok(FitModel::EvenPolynomial { degree })
        }
        _ => Err(usage(format!(
            "fit must be `linear` or `even:<degree>`, got `{s}`"
        ))),
    }
}

pub fn sweep(args: &[String], a: &SweepArgs) -> Result<RunReport> {
    let spec = resolve_scenario(&a.scenario)?;
    let dim = spec.prepost.space().dim();
    if let Some(v) = a.visibility {
        postsel::prepost::check_visibility(v).map_err(usage)?;
    }
    match a.mode {
        SweepMode::Loss => sweep_loss_mode(args, a, &spec, dim),
        SweepMode::Pointer => sweep_pointer_mode(args, a, &spec, dim),
    }
}

fn run_config(a: &SweepArgs, seed: u64) -> Result<RunConfig> {
    let cfg = RunConfig::new(a.trials, seed).map_err(|_| usage("--trials must be positive"))?;
    match a.visibility {
        Some(v) => cfg.with_visibility(v).map_err(usage),
        None => Ok(cfg),
    }
}

fn sweep_loss_mode(
    args: &[String],
    a: &SweepArgs,
    spec: &ScenarioSpec,
    dim: usize,
) -> Result<RunReport> {
    let paths = a
        .paths
        .as_deref()
        .ok_or_else(|| usage("loss mode needs --paths"))?;
    let lossy = parse::paths(paths, dim).map_err(usage)?;
    let grid = parse::grid(a.grid.as_deref().unwrap_or("0:1:0.1")).map_err(usage)?;
    for &t in &grid {
        check_transmission(t).map_err(usage)?;
    }
    let seed = resolve_seed(a.seed);
    let cfg = run_config(a, seed)?;
    let series = sweep_loss(spec, &lossy, &grid, &cfg)?;
    let (slope, slope_stderr) = series.count_slope().unwrap_or((f64::NAN, f64::NAN));
    let csv_path = write_out(a.out.as_deref(), &counts_csv(&series, a.loss_column))?;
    let rows: Vec<Value> = series
        .values
        .iter()
        .zip(&series.analytic)
        .zip(&series.counts)
        .enumerate()
        .map(|(i, ((t, p), c))| json!({ "setting": i, "T": t, "analytic_p": p, "counts": c }))
        .collect();
    let config = json!({
        "scenario": a.scenario,
        "mode": "loss",
        "paths": lossy.iter().map(|p| p + 1).collect::<Vec<_>>(),
        "grid": grid,
        "trials": a.trials,
        "visibility": cfg.visibility.unwrap_or(spec.visibility),
        "loss_column": a.loss_column,
    });
    let outputs = json!({
        "rows": rows,
        "max_z_score": series.max_z_score(),
        "count_slope": slope,
        "count_slope_stderr": slope_stderr,
        "csv": csv_path,
    });
    Ok(RunReport::new(
        command_echo(args, Some(seed)),
        Some(seed),
        config,
        outputs,
        true,
    ))
}

fn sweep_pointer_mode(
    args: &[String],
    a: &SweepArgs,
    spec: &ScenarioSpec,
    dim: usize,
) -> Result<RunReport> {
    let path = a.path.ok_or_else(|| usage("pointer mode needs --path"))?;
    if path == 0 || path > dim {
        return Err(usage(format!("path {path} outside 1..={dim}")));
    }
    let grid = match &a.grid {
        Some(g) => parse::grid(g).map_err(usage)?,
        None => default_grid(),
    };
    validate_grid(&grid).map_err(usage)?;
    let model = parse_fit(&a.fit)?;
    let visibility = a.visibility.unwrap_or(spec.visibility);
    let seed = a.sampled.then(|| resolve_seed(a.seed));
    let samples = match seed {
        Some(seed) => sweep_pointer_counts(spec, path - 1, &grid, &run_config(a, seed)?)?,
        None => sweep_strength_with_visibility(&spec.prepost, path - 1, &grid, visibility)?,
    };
    let estimate = extrapolate_weak_value(&samples, model)?;
    let csv_path = write_out(a.out.as_deref(), &pointer_csv(&samples))?;
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| json!({ "G": s.g, "P_plus": s.p_plus, "R": s.r }))
        .collect();
    let config = json!({
        "scenario": a.scenario,
        "mode": "pointer",
        "path": path,
        "grid": grid,
        "visibility": visibility,
        "fit": model,
        "sampled": a.sampled,
        "trials": a.sampled.then_some(a.trials),
    });
    let outputs = json!({
        "rows": rows,
        "intercept": estimate.intercept,
        "slope": estimate.slope,
        "fit_residual": estimate.residual,
        "csv": csv_path,
    });
    Ok(RunReport::new(
        command_echo(args, seed),
        seed,
        config,
        outputs,
        true,
    ))
}

pub fn design(args: &[String], a: &DesignArgs) -> Result<RunReport> {
    let values = parse::complex_list(&a.targets).map_err(usage)?;
    let targets = TargetWeakValues::new(values.clone())?;
    let spec = ScenarioSpec::new(
        &a.name,
        "Designed from target weak values",
        design_prepost(&targets)?,
    );
    let text = save_spec(&spec);
    let reloaded = load_spec(&text)?;
    let got = reloaded.prepost.path_weak_values();
    let max_error = got
        .iter()
        .zip(&values)
        .map(|(g, w)| (g - w).norm())
        .fold(0.0, f64::max);
    let file_path = write_out(a.out.as_deref(), &text)?;
    let labels = reloaded.prepost.space().labels();
    let outputs = json!({
        "weak_values": labels.iter().zip(&got).map(|(l, w)| complex_entry(l, *w)).collect::<Vec<_>>(),
        "max_error": max_error,
        "success_probability": reloaded.prepost.success_probability(),
        "scenario": serde_json::from_str::<Value>(&text)?,
        "scenario_file": file_path,
    });
    let config = json!({
        "targets": labels.iter().zip(&values).map(|(l, w)| complex_entry(l, *w)).collect::<Vec<_>>(),
        "name": a.name,
        "tolerance": DESIGN_TOL,
    });
    let ok = max_error <= DESIGN_TOL;
    if !ok {
        eprintln!("designed states miss the targets by {max_error:.3e}");
    }
    Ok(RunReport::new(
        command_echo(args, None),
        None,
        config,
        outputs,
        ok,
    ))
}

pub fn check(args: &[String], a: &CheckArgs) -> Result<RunReport> {
    let suite = Suite::parse(&a.suite).ok_or_else(|| {
        usage(format!(
            "unknown suite `{}`; expected one of {}",
            a.suite,
            Suite::ALL.map(Suite::name).join(", ")
        ))
    })?;
    if a.phi.iter().any(|p| !p.is_finite()) {
        return Err(usage("--phi values must be finite"));
    }
    let seed = matches!(suite, Suite::Oracle | Suite::SumRule).then(|| resolve_seed(a.seed));
    let params = SuiteParams {
        seed: seed.unwrap_or(0),
        circuits: a.circuits,
        phis: if a.phi.is_empty() {
            DEFAULT_PHIS.to_vec()
        } else {
            a.phi.clone()
        },
    };
    let report = run_suite(suite, &params);
    for failure in report.failures() {
        eprintln!(
            "FAILED {}: deviation {:.3e} > tolerance {:.3e}",
            failure.name, failure.deviation, failure.tolerance
        );
    }
    let config = json!({
        "suite": suite.name(),
        "circuits": (suite == Suite::Oracle).then_some(a.circuits),
        "phi": (suite == Suite::Appendix).then(|| params.phis.clone()),
    });
    let outputs = json!({
        "passed": report.passed(),
        "max_deviation": report.max_deviation(),
        "checks": report.checks,
    });
    Ok(RunReport::new(
        command_echo(args, seed),
        seed,
        config,
        outputs,
        report.passed(),
    ))
}
