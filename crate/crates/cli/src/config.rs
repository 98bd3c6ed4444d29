//! Command-line parsing and the resolved, serialisable run configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussmink_core::solver::{SolverMethod, SolverParams};
use gaussmink_core::sphere::MIN_RESOLUTION;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::spec::{BodySpec, TestFunction};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GAUSSMINK_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "gaussmink-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Solve,
    Constants,
    Experiment,
    GenBody,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Constants => "constants",
            Command::Experiment => "experiment",
            Command::GenBody => "gen-body",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Hilbert,
    Vector,
    Iu,
    Ibp,
    Xs,
    Spg,
    Chain,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Hilbert => "hilbert",
            Check::Vector => "vector",
            Check::Iu => "iu",
            Check::Ibp => "ibp",
            Check::Xs => "xs",
            Check::Spg => "spg",
            Check::Chain => "chain",
        }
    }
}

/// Format of the summary printed on stdout. Files are always written in both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Newton,
    FixedPoint,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::FixedPoint => "fixed-point",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "gaussmink", version, about = "Spectral checks, isotropic solves and constant-solution tables for convex bodies in Gaussian space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Run one spectral check over a body corpus.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Solve the isotropic equation from one starting body.
    Solve(CommonArgs),
    /// Tabulate constant solutions over a (p, c) grid.
    Constants(CommonArgs),
    /// Solve from many random starting bodies and compare with the admissible ball.
    Experiment(CommonArgs),
    /// Write body files.
    GenBody(CommonArgs),
    /// Replay a saved config.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Sphere dimension (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Comma-separated list; only `constants` takes more than one value.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Vec<f64>,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Defaults to 128 (n = 1) or 32 (n = 2), halved for solve and experiment.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Relative tolerance of the checks.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Residual target of the solver.
    #[arg(long, default_value_t = 1e-10)]
    pub solver_tol: f64,
    /// Largest residual a body may have to be fed to the chain check.
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    /// Experiment agreement tolerance against the admissible ball.
    #[arg(long, default_value_t = 1e-4)]
    pub agreement_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub num_seeds: usize,
    /// ball:R | ellipsoid:A,B[,C] | shifted-ball:R:V | perturbed:R:AMP:DEG | constant | PATH
    #[arg(long)]
    pub body: Option<BodySpec>,
    /// random:DEG | witness:V | linear:V | one
    #[arg(long, default_value = "random:3")]
    pub test_function: TestFunction,
    #[arg(long, value_enum, default_value_t = Method::Newton)]
    pub method: Method,
    /// First step length per iteration; defaults to 1 (Newton) or 0.3 (fixed point).
    #[arg(long)]
    pub damping: Option<f64>,
    /// Defaults to 50 (Newton) or 500 (fixed point).
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub check: f64,
    pub solver: f64,
    pub residual: f64,
    pub agreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    pub damping: f64,
    pub max_iter: usize,
}

/// Everything a run depends on, with defaults filled in. Saved as
/// `config.json` in the output directory and replayable with `run --config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub check: Option<Check>,
    pub n: usize,
    pub p: Vec<f64>,
    pub c: Vec<f64>,
    pub alpha: f64,
    pub resolution: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub num_seeds: usize,
    pub body: BodySpec,
    pub test_function: TestFunction,
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub format: Format,
}

/// A parsed command line: the run plus its thread count.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub config: RunConfig,
    pub threads: Option<usize>,
}

impl Cli {
    pub fn into_invocation(self) -> Result<Invocation, CliError> {
        let (command, check, args) = match self.command {
            CliCommand::Verify { check, args } => (Command::Verify, Some(check), args),
            CliCommand::Solve(a) => (Command::Solve, None, a),
            CliCommand::Constants(a) => (Command::Constants, None, a),
            CliCommand::Experiment(a) => (Command::Experiment, None, a),
            CliCommand::GenBody(a) => (Command::GenBody, None, a),
            CliCommand::Run { config, threads } => {
                return Ok(Invocation {
                    config: RunConfig::load(&config)?,
                    threads,
                })
            }
        };
        let threads = args.threads;
        Ok(Invocation {
            config: RunConfig::resolve(command, check, args)?,
            threads,
        })
    }
}

fn default_body(command: Command, check: Option<Check>) -> BodySpec {
    match (command, check) {
        (Command::Verify, Some(Check::Chain)) => BodySpec::Constant,
        (Command::Solve, _) => BodySpec::Ball { radius: 0.9 },
        (Command::Experiment, _) => BodySpec::Perturbed {
            radius: 0.95,
            amplitude: 0.05,
            degree: 4,
        },
        _ => BodySpec::Perturbed {
            radius: 1.0,
            amplitude: 0.15,
            degree: 4,
        },
    }
}

fn default_resolution(command: Command, n: usize) -> usize {
    let full = if n == 1 { 128 } else { 32 };
    match command {
        Command::Solve | Command::Experiment => full / 2,
        _ => full,
    }
}

impl RunConfig {
    pub fn resolve(command: Command, check: Option<Check>, a: CommonArgs) -> Result<Self, CliError> {
        let (damping, max_iter) = match a.method {
            Method::Newton => (1.0, 50),
            Method::FixedPoint => (0.3, 500),
        };
        let cfg = RunConfig {
            command,
            check,
            n: a.n,
            p: if a.p.is_empty() { vec![-2.0] } else { a.p },
            c: if a.c.is_empty() { vec![0.5] } else { a.c },
            alpha: a.alpha,
            resolution: a.resolution.unwrap_or_else(|| default_resolution(command, a.n)),
            tolerances: Tolerances {
                check: a.tol,
                solver: a.solver_tol,
                residual: a.residual_tol,
                agreement: a.agreement_tol,
            },
            seed: a.seed,
            num_seeds: a.num_seeds,
            body: a.body.unwrap_or_else(|| default_body(command, check)),
            test_function: a.test_function,
            solver: SolverConfig {
                method: a.method,
                damping: a.damping.unwrap_or(damping),
                max_iter: a.max_iter.unwrap_or(max_iter),
            },
            out: a.out,
            format: a.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Arguments that parse back to this config (without the program name).
    pub fn to_args(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut args = vec![self.command.name().to_string()];
        if let Some(check) = self.check {
            args.push(check.name().to_string());
        }
        args.extend([
            format!("--n={}", self.n),
            format!("--p={}", list(&self.p)),
            format!("--c={}", list(&self.c)),
            format!("--alpha={}", self.alpha),
            format!("--resolution={}", self.resolution),
            format!("--tol={}", self.tolerances.check),
            format!("--solver-tol={}", self.tolerances.solver),
            format!("--residual-tol={}", self.tolerances.residual),
            format!("--agreement-tol={}", self.tolerances.agreement),
            format!("--seed={}", self.seed),
            format!("--num-seeds={}", self.num_seeds),
            format!("--body={}", self.body),
            format!("--test-function={}", self.test_function),
            format!("--method={}", self.solver.method.name()),
            format!("--damping={}", self.solver.damping),
            format!("--max-iter={}", self.solver.max_iter),
            format!("--out={}", self.out.display()),
            format!(
                "--format={}",
                match self.format {
                    Format::Json => "json",
                    Format::Csv => "csv",
                }
            ),
        ]);
        args
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            method: match self.solver.method {
                Method::Newton => SolverMethod::Newton,
                Method::FixedPoint => SolverMethod::FixedPoint,
            },
            damping: self.solver.damping,
            max_iter: self.solver.max_iter,
            tol: self.tolerances.solver,
        }
    }

    /// The single `p` of a scalar command.
    pub fn p(&self) -> f64 {
        self.p[0]
    }

    pub fn c(&self) -> f64 {
        self.c[0]
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let n = self.n;
        if n != 1 && n != 2 {
            return bad(format!("--n must be 1 or 2 (got {n})"));
        }
        if (self.command == Command::Verify) != self.check.is_some() {
            return bad("a check is given exactly for verify".into());
        }
        let finite = |v: &[f64]| !v.is_empty() && v.iter().all(|x| x.is_finite());
        if !finite(&self.p) || !finite(&self.c) {
            return bad("--p and --c need at least one finite value".into());
        }
        if self.command != Command::Constants && (self.p.len() != 1 || self.c.len() != 1) {
            return bad(format!("{} takes a single --p and --c", self.command.name()));
        }
        if self.c.iter().any(|c| *c <= 0.0) {
            return bad("--c must be positive".into());
        }
        let nf = n as f64;
        match self.command {
            Command::Constants if self.p.iter().any(|p| *p >= nf + 1.0) => {
                return bad(format!("constants needs p < n + 1 = {}", n + 1));
            }
            Command::Solve if self.p() >= 1.0 => return bad("solve needs p < 1".into()),
            Command::Verify if self.check == Some(Check::Chain) && self.p() >= 1.0 => {
                return bad("the chain check needs p < 1".into());
            }
            Command::Experiment => {
                if !(self.p() >= -(nf + 1.0) && self.p() < -1.0) {
                    return bad(format!("experiment needs -(n+1) <= p < -1 (got {})", self.p()));
                }
                if self.c() > (-0.5f64).exp() {
                    return bad(format!("experiment needs c <= e^(-1/2) (got {})", self.c()));
                }
                if !matches!(self.body, BodySpec::Perturbed { .. }) {
                    return bad("experiment needs a perturbed:R:AMP:DEG body".into());
                }
            }
            _ => {}
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("--alpha must be positive".into());
        }
        if self.resolution < MIN_RESOLUTION {
            return bad(format!("--resolution must be at least {MIN_RESOLUTION}"));
        }
        let t = &self.tolerances;
        if ![t.check, t.solver, t.residual, t.agreement]
            .iter()
            .all(|x| *x > 0.0 && x.is_finite())
        {
            return bad("tolerances must be positive and finite".into());
        }
        if self.num_seeds == 0 {
            return bad("--num-seeds must be at least 1".into());
        }
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) || self.solver.max_iter == 0 {
            return bad("--damping must lie in (0, 1] and --max-iter be positive".into());
        }
        self.body.validate(n).map_err(CliError::Config)?;
        self.test_function.validate(n).map_err(CliError::Config)?;
        if self.out.as_os_str().is_empty() {
            return bad("--out must not be empty".into());
        }
        Ok(())
    }
}
