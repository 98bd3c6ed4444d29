use std::sync::Arc;

use gaussmink_core::body::{max_radius, CurvatureBundle, SupportField};
use gaussmink_core::solver::{
    admissible_radius, constant_solutions, g_profile, solve_isotropic, ConstantSolution, ExperimentParams,
    ExperimentReport, GProfile, SolveOutcome, uniqueness_experiment,
};
use gaussmink_core::spectral::{
    check_hilbert_spectral, check_ibp_identity, check_iu, check_main_chain, check_pointwise_xs, check_spg,
    check_vector_inequality, ChainReport, IdentityReport, InequalityReport, Orthogonality, PointwiseReport,
    SpgReport, Verdict,
};
use gaussmink_core::sphere::QuadratureScheme;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Check, Command, Format, RunConfig};
use crate::error::CliError;
use crate::output::{csv_num, csv_opt, to_csv, to_json, OutDir};
use crate::spec::BodySpec;

/// Smallest converged fraction an experiment needs to pass.
pub const MIN_CONVERGED_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Success
        } else {
            Status::Failure
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Failure => 1,
        }
    }
}

/// What a finished command hands back to `main`.
#[derive(Debug)]
pub struct RunResult {
    pub status: Status,
    /// Summary for stdout in the configured format.
    pub summary: String,
}

pub fn execute(cfg: &RunConfig) -> Result<RunResult, CliError> {
    cfg.validate()?;
    let out = OutDir::create(&cfg.out)?;
    out.write_json("config.json", cfg)?;
    match cfg.command {
        Command::Verify => verify(cfg, &out),
        Command::Solve => solve(cfg, &out),
        Command::Constants => constants(cfg, &out),
        Command::Experiment => experiment(cfg, &out),
        Command::GenBody => gen_body(cfg, &out),
    }
}

fn summarize<T: Serialize>(cfg: &RunConfig, json: &T, header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    match cfg.format {
        Format::Json => to_json(json),
        Format::Csv => to_csv(header, rows),
    }
}

fn body_seed(cfg: &RunConfig, index: usize) -> u64 {
    cfg.seed.wrapping_add(index as u64)
}

fn scheme(cfg: &RunConfig) -> Result<Arc<QuadratureScheme>, CliError> {
    Ok(QuadratureScheme::build(cfg.n, cfg.resolution)?)
}

fn realize(cfg: &RunConfig, s: &Arc<QuadratureScheme>, index: usize) -> Result<SupportField, CliError> {
    cfg.body.realize(s, body_seed(cfg, index), cfg.p(), cfg.c())
}

fn bundle_of(body: &SupportField) -> Result<CurvatureBundle, CliError> {
    body.bundle()
        .map_err(|e| CliError::Config(format!("body is not usable: {e}")))
}

// ---------------------------------------------------------------- verify

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CheckResult {
    Inequality(InequalityReport),
    Identity(IdentityReport),
    Pointwise(PointwiseReport),
    Spg(SpgReport),
    Chain(ChainReport),
}

/// Flat view of a check result for the summary table.
struct Row {
    lhs: Option<f64>,
    rhs: Option<f64>,
    margin: f64,
    relative: f64,
    verdict: Verdict,
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    let rank = |v| match v {
        Verdict::Holds | Verdict::Equality => 0,
        Verdict::ViolatedWithinTol => 1,
        Verdict::Violated => 2,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn inequality_row(r: &InequalityReport) -> Row {
    Row {
        lhs: Some(r.lhs),
        rhs: Some(r.rhs),
        margin: r.margin,
        relative: r.relative_margin(),
        verdict: r.verdict,
    }
}

fn within(err: f64, tol: f64) -> Verdict {
    if err <= tol {
        Verdict::Equality
    } else {
        Verdict::Violated
    }
}

impl CheckResult {
    fn row(&self, tol: f64) -> Row {
        match self {
            CheckResult::Inequality(r) => inequality_row(r),
            CheckResult::Identity(r) => Row {
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                margin: r.rhs - r.lhs,
                relative: r.rel_error,
                verdict: within(r.rel_error, tol),
            },
            CheckResult::Pointwise(r) => Row {
                lhs: None,
                rhs: None,
                margin: -r.max_abs_error,
                relative: r.max_rel_error,
                verdict: within(r.max_rel_error, tol),
            },
            CheckResult::Spg(r) => {
                let mut row = inequality_row(&r.full);
                row.verdict = r.reports().fold(Verdict::Holds, |v, x| worst(v, x.verdict));
                row
            }
            CheckResult::Chain(r) => {
                let link = r
                    .inequality_links()
                    .into_iter()
                    .min_by(|a, b| a.relative_margin().total_cmp(&b.relative_margin()))
                    .expect("three links");
                let mut row = inequality_row(link);
                row.verdict = r.inequality_links().iter().fold(Verdict::Holds, |v, x| worst(v, x.verdict));
                row
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyRecord {
    check: Check,
    index: usize,
    seed: u64,
    body: String,
    resolution: usize,
    passed: bool,
    verdict: Option<Verdict>,
    error: Option<String>,
    result: Option<CheckResult>,
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    command: Command,
    check: Check,
    bodies: usize,
    passed: usize,
    failed: usize,
    min_relative_margin: f64,
    summary_file: String,
}

fn run_check(cfg: &RunConfig, bundle: &CurvatureBundle, seed: u64) -> Result<CheckResult, CliError> {
    let tol = cfg.tolerances.check;
    let check = cfg.check.expect("validated");
    let r = match check {
        Check::Hilbert => {
            let f = cfg.test_function.realize(bundle, seed)?;
            CheckResult::Inequality(check_hilbert_spectral(bundle, &f, cfg.n, tol, Orthogonality::Project)?)
        }
        Check::Vector => CheckResult::Inequality(check_vector_inequality(bundle, cfg.alpha, tol)?),
        Check::Iu => CheckResult::Inequality(check_iu(bundle, cfg.alpha, tol)?),
        Check::Ibp => CheckResult::Identity(check_ibp_identity(bundle, cfg.alpha)?),
        Check::Xs => CheckResult::Pointwise(check_pointwise_xs(bundle, cfg.alpha)?),
        Check::Spg => {
            let f = cfg.test_function.realize(bundle, seed)?;
            CheckResult::Spg(check_spg(bundle, &f, tol)?)
        }
        Check::Chain => CheckResult::Chain(check_main_chain(
            bundle,
            cfg.p(),
            cfg.c(),
            cfg.tolerances.residual,
            tol,
        )?),
    };
    Ok(r)
}

fn verify_one(cfg: &RunConfig, s: &Arc<QuadratureScheme>, index: usize) -> Result<(VerifyRecord, Row), CliError> {
    let seed = body_seed(cfg, index);
    let body = realize(cfg, s, index)?;
    let bundle = bundle_of(&body)?;
    let check = cfg.check.expect("validated");
    let mut record = VerifyRecord {
        check,
        index,
        seed,
        body: cfg.body.to_string(),
        resolution: body.scheme().resolution(),
        passed: false,
        verdict: None,
        error: None,
        result: None,
    };
    let row = match run_check(cfg, &bundle, seed) {
        Ok(result) => {
            let row = result.row(cfg.tolerances.check);
            record.passed = !row.verdict.is_violation();
            record.verdict = Some(row.verdict);
            record.result = Some(result);
            row
        }
        Err(CliError::Core(e)) => {
            record.error = Some(e.to_string());
            Row {
                lhs: None,
                rhs: None,
                margin: f64::NAN,
                relative: f64::NAN,
                verdict: Verdict::Violated,
            }
        }
        Err(e) => return Err(e),
    };
    Ok((record, row))
}

pub const VERIFY_COLUMNS: [&str; 9] = ["index", "seed", "body", "lhs", "rhs", "margin", "relative", "verdict", "passed"];

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Equality => "equality",
        Verdict::ViolatedWithinTol => "violated-within-tol",
        Verdict::Violated => "violated",
    }
}

fn verify(cfg: &RunConfig, out: &OutDir) -> Result<RunResult, CliError> {
    let s = scheme(cfg)?;
    let check = cfg.check.expect("validated");
    let results: Vec<Result<(VerifyRecord, Row), CliError>> =
        (0..cfg.num_seeds).into_par_iter().map(|i| verify_one(cfg, &s, i)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut passed = 0;
    let mut min_rel = f64::INFINITY;
    for r in results {
        let (record, row) = r?;
        out.write_json(&format!("{}-{:04}.json", check.name(), record.index), &record)?;
        passed += usize::from(record.passed);
        min_rel = min_rel.min(row.relative);
        rows.push(vec![
            record.index.to_string(),
            record.seed.to_string(),
            record.body.clone(),
            csv_opt(row.lhs),
            csv_opt(row.rhs),
            csv_num(row.margin),
            csv_num(row.relative),
            record.error.as_ref().map_or(verdict_name(row.verdict), |_| "error").to_string(),
            record.passed.to_string(),
        ]);
    }
    let summary_file = format!("{}-summary.csv", check.name());
    let table = to_csv(&VERIFY_COLUMNS, &rows)?;
    out.write(&summary_file, &table)?;
    let summary = VerifySummary {
        command: Command::Verify,
        check,
        bodies: rows.len(),
        passed,
        failed: rows.len() - passed,
        min_relative_margin: min_rel,
        summary_file,
    };
    Ok(RunResult {
        status: Status::from_pass(passed == rows.len()),
        summary: match cfg.format {
            Format::Json => to_json(&summary)?,
            Format::Csv => table,
        },
    })
}

// ----------------------------------------------------------------- solve

#[derive(Debug, Serialize)]
struct SolveFile<'a> {
    n: usize,
    p: f64,
    c: f64,
    resolution: usize,
    initial_body: String,
    admissible_radius: Option<f64>,
    /// `max |h − r_adm|` of the final body.
    radius_error: Option<f64>,
    outcome: &'a SolveOutcome,
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    status: gaussmink_core::solver::SolveStatus,
    iterations: usize,
    final_residual: f64,
    mean_radius: f64,
    distance_to_ball: f64,
    max_radius: f64,
    admissible_radius: Option<f64>,
    radius_error: Option<f64>,
}

pub const HISTORY_COLUMNS: [&str; 4] = ["iteration", "residual", "step_length", "linear_iterations"];

fn solve(cfg: &RunConfig, out: &OutDir) -> Result<RunResult, CliError> {
    let s = scheme(cfg)?;
    let init = realize(cfg, &s, 0)?;
    let (p, c) = (cfg.p(), cfg.c());
    let outcome = solve_isotropic(cfg.n, p, c, &init, &cfg.solver_params())?;
    let target = admissible_radius(cfg.n, p, c).unwrap_or(None);
    let radius_error = target.map(|r| outcome.body.values().iter().map(|h| (h - r).abs()).fold(0.0, f64::max));
    out.write_json(
        "solve.json",
        &SolveFile {
            n: cfg.n,
            p,
            c,
            resolution: outcome.body.scheme().resolution(),
            initial_body: cfg.body.to_string(),
            admissible_radius: target,
            radius_error,
            outcome: &outcome,
        },
    )?;
    let rows: Vec<Vec<String>> = outcome
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let step = i.checked_sub(1).and_then(|k| outcome.step_lengths.get(k).copied());
            let lin = i
                .checked_sub(1)
                .and_then(|k| outcome.linear_iterations.get(k))
                .map(usize::to_string)
                .unwrap_or_default();
            vec![i.to_string(), csv_num(*r), csv_opt(step), lin]
        })
        .collect();
    out.write("solve-history.csv", &to_csv(&HISTORY_COLUMNS, &rows)?)?;
    out.write_json("solution-body.json", &outcome.body)?;

    let summary = SolveSummary {
        status: outcome.status,
        iterations: outcome.iterations,
        final_residual: outcome.final_residual,
        mean_radius: outcome.mean_radius,
        distance_to_ball: outcome.distance_to_ball,
        max_radius: outcome.max_radius,
        admissible_radius: target,
        radius_error,
    };
    let header = [
        "status",
        "iterations",
        "final_residual",
        "mean_radius",
        "distance_to_ball",
        "max_radius",
        "admissible_radius",
        "radius_error",
    ];
    let row = vec![
        serde_json::to_value(outcome.status)?.as_str().unwrap_or_default().to_string(),
        outcome.iterations.to_string(),
        csv_num(outcome.final_residual),
        csv_num(outcome.mean_radius),
        csv_num(outcome.distance_to_ball),
        csv_num(outcome.max_radius),
        csv_opt(target),
        csv_opt(radius_error),
    ];
    Ok(RunResult {
        status: Status::from_pass(outcome.converged()),
        summary: summarize(cfg, &summary, &header, &[row])?,
    })
}

// ------------------------------------------------------------- constants

#[derive(Debug, Serialize)]
struct ConstantsCell {
    p: f64,
    c: f64,
    profile: GProfile,
    /// Whether `p` lies in `(−(n+1), −1)`.
    p_in_open_range: bool,
    roots: Vec<ConstantSolution>,
    notes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ConstantsFile {
    n: usize,
    cells: Vec<ConstantsCell>,
}

pub const CONSTANTS_COLUMNS: [&str; 11] = [
    "p", "c", "t_star", "g_max", "root", "radius", "branch", "admissible", "g_at_root", "roots", "note",
];

fn constants(cfg: &RunConfig, out: &OutDir) -> Result<RunResult, CliError> {
    let n = cfg.n;
    let nf = n as f64;
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for &p in &cfg.p {
        let profile = g_profile(n, p)?;
        for &c in &cfg.c {
            let roots = constant_solutions(n, p, c)?;
            let p_in_open_range = p > -(nf + 1.0) && p < -1.0;
            let mut notes = Vec::new();
            if !p_in_open_range {
                notes.push(format!("p outside the uniqueness range (-{}, -1)", n + 1));
            }
            if roots.is_empty() {
                notes.push("no roots: c exceeds g_max".into());
            }
            let note = notes.join("; ");
            let base = |row: Vec<String>| {
                let mut r = vec![csv_num(p), csv_num(c), csv_num(profile.t_star), csv_num(profile.g_max)];
                r.extend(row);
                r.push(roots.len().to_string());
                r.push(note.clone());
                r
            };
            if roots.is_empty() {
                rows.push(base(vec![String::new(); 5]));
            }
            for (k, r) in roots.iter().enumerate() {
                rows.push(base(vec![
                    k.to_string(),
                    csv_num(r.radius),
                    serde_json::to_value(r.branch)?.as_str().unwrap_or_default().to_string(),
                    r.admissible.to_string(),
                    csv_num(profile.g(r.radius)),
                ]));
            }
            cells.push(ConstantsCell {
                p,
                c,
                profile,
                p_in_open_range,
                roots,
                notes,
            });
        }
    }
    let table = to_csv(&CONSTANTS_COLUMNS, &rows)?;
    out.write("constants.csv", &table)?;
    let file = ConstantsFile { n, cells };
    out.write_json("constants.json", &file)?;
    Ok(RunResult {
        status: Status::Success,
        summary: match cfg.format {
            Format::Json => to_json(&file)?,
            Format::Csv => table,
        },
    })
}

// ------------------------------------------------------------ experiment

#[derive(Debug, Serialize)]
struct ExperimentSummary {
    converged: usize,
    num_seeds: usize,
    converged_fraction: f64,
    admissible_radius: Option<f64>,
    max_radius_error: f64,
    max_distance_to_ball: f64,
    all_agree: bool,
    chain_passed: bool,
    min_chain_margin: f64,
    passed: bool,
}

pub const SEED_COLUMNS: [&str; 14] = [
    "index",
    "seed",
    "init_radius",
    "init_max_radius",
    "status",
    "iterations",
    "final_residual",
    "distance_to_ball",
    "mean_radius",
    "max_radius",
    "radius_error",
    "chain_min_margin",
    "chain_passed",
    "error",
];

pub fn experiment_params(cfg: &RunConfig) -> Result<ExperimentParams, CliError> {
    let BodySpec::Perturbed {
        radius,
        amplitude,
        degree,
    } = cfg.body
    else {
        return Err(CliError::Config("experiment needs a perturbed:R:AMP:DEG body".into()));
    };
    Ok(ExperimentParams {
        resolution: cfg.resolution,
        radius_range: [0.8 * radius, radius],
        amplitude,
        max_degree: degree,
        solver: cfg.solver_params(),
        chain_tol: cfg.tolerances.check,
        agreement_tol: cfg.tolerances.agreement,
    })
}

pub fn experiment_passed(r: &ExperimentReport) -> bool {
    r.converged_fraction >= MIN_CONVERGED_FRACTION && r.all_agree && r.chain_passed
}

fn experiment(cfg: &RunConfig, out: &OutDir) -> Result<RunResult, CliError> {
    let params = experiment_params(cfg)?;
    let report = uniqueness_experiment(cfg.n, cfg.p(), cfg.c(), cfg.num_seeds, cfg.seed, &params)?;
    out.write_json("experiment.json", &report)?;
    let rows: Vec<Vec<String>> = report
        .outcomes
        .iter()
        .map(|o| {
            vec![
                o.index.to_string(),
                o.seed.to_string(),
                csv_num(o.init_radius),
                csv_opt(o.init_max_radius),
                o.status
                    .and_then(|s| serde_json::to_value(s).ok())
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                o.iterations.to_string(),
                csv_opt(o.final_residual),
                csv_opt(o.distance_to_ball),
                csv_opt(o.mean_radius),
                csv_opt(o.max_radius),
                csv_opt(o.radius_error),
                csv_opt(o.chain.as_ref().map(ChainReport::min_relative_margin)),
                o.chain.as_ref().map(|c| (!c.any_violation()).to_string()).unwrap_or_default(),
                o.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let table = to_csv(&SEED_COLUMNS, &rows)?;
    out.write("experiment-seeds.csv", &table)?;
    let passed = experiment_passed(&report);
    let summary = ExperimentSummary {
        converged: report.converged,
        num_seeds: report.num_seeds,
        converged_fraction: report.converged_fraction,
        admissible_radius: report.admissible_radius,
        max_radius_error: report.max_radius_error,
        max_distance_to_ball: report.max_distance_to_ball,
        all_agree: report.all_agree,
        chain_passed: report.chain_passed,
        min_chain_margin: report.min_chain_margin,
        passed,
    };
    Ok(RunResult {
        status: Status::from_pass(passed),
        summary: match cfg.format {
            Format::Json => to_json(&summary)?,
            Format::Csv => table,
        },
    })
}

// -------------------------------------------------------------- gen-body

#[derive(Debug, Serialize)]
struct GeneratedBody {
    file: String,
    seed: u64,
    min_h: f64,
    max_h: f64,
    max_radius: f64,
}

fn gen_body(cfg: &RunConfig, out: &OutDir) -> Result<RunResult, CliError> {
    let s = scheme(cfg)?;
    let bodies: Vec<Result<(SupportField, f64), CliError>> = (0..cfg.num_seeds)
        .into_par_iter()
        .map(|i| {
            let body = realize(cfg, &s, i)?;
            let r = max_radius(&bundle_of(&body)?);
            Ok((body, r))
        })
        .collect();
    let mut listing = Vec::new();
    for (i, b) in bodies.into_iter().enumerate() {
        let (body, radius) = b?;
        let file = if cfg.num_seeds == 1 {
            "body.json".to_string()
        } else {
            format!("body-{i:04}.json")
        };
        out.write_json(&file, &body)?;
        let h = body.values();
        listing.push(GeneratedBody {
            file,
            seed: body_seed(cfg, i),
            min_h: h.iter().copied().fold(f64::INFINITY, f64::min),
            max_h: h.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            max_radius: radius,
        });
    }
    let rows: Vec<Vec<String>> = listing
        .iter()
        .map(|g| {
            vec![
                g.file.clone(),
                g.seed.to_string(),
                csv_num(g.min_h),
                csv_num(g.max_h),
                csv_num(g.max_radius),
            ]
        })
        .collect();
    Ok(RunResult {
        status: Status::Success,
        summary: summarize(cfg, &listing, &["file", "seed", "min_h", "max_h", "max_radius"], &rows)?,
    })
}
