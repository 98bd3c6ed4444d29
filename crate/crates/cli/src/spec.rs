//! Text forms of body sources and test functions, as accepted by `--body`
//! and `--test-function` and stored in saved configs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use gaussmink_core::body::{ball, ellipsoid, perturbed_ball, translate, SphericalPolynomial, SupportField};
use gaussmink_core::solver::admissible_radius;
use gaussmink_core::spectral::equality_witness;
use gaussmink_core::sphere::{QuadratureScheme, ScalarField};
use gaussmink_core::body::CurvatureBundle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Where the bodies of a run come from.
///
/// * `ball:R`
/// * `ellipsoid:A,B` or `ellipsoid:A,B,C`
/// * `shifted-ball:R:V1,V2[,V3]`
/// * `perturbed:R:AMP:DEG`, seeded per body
/// * `constant`, the admissible ball solving the isotropic equation for the run's `p`, `c`
/// * `file:PATH` or any other text, read as a body JSON file
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum BodySpec {
    Ball { radius: f64 },
    Ellipsoid { semiaxes: Vec<f64> },
    ShiftedBall { radius: f64, offset: Vec<f64> },
    Perturbed { radius: f64, amplitude: f64, degree: u32 },
    Constant,
    File(PathBuf),
}

const BODY_KINDS: [&str; 6] = ["ball", "ellipsoid", "shifted-ball", "perturbed", "constant", "file"];

fn list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{what}: cannot parse {s:?} as a number"))?;
    if !v.is_finite() {
        return Err(format!("{what}: {s} is not finite"));
    }
    Ok(v)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| parse_f64(x, what)).collect()
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySpec::Ball { radius } => write!(f, "ball:{radius}"),
            BodySpec::Ellipsoid { semiaxes } => write!(f, "ellipsoid:{}", list(semiaxes)),
            BodySpec::ShiftedBall { radius, offset } => write!(f, "shifted-ball:{radius}:{}", list(offset)),
            BodySpec::Perturbed {
                radius,
                amplitude,
                degree,
            } => write!(f, "perturbed:{radius}:{amplitude}:{degree}"),
            BodySpec::Constant => write!(f, "constant"),
            BodySpec::File(p) => {
                let text = p.to_string_lossy();
                let head = text.split(':').next().unwrap_or("");
                if BODY_KINDS.contains(&head) {
                    write!(f, "file:{text}")
                } else {
                    write!(f, "{text}")
                }
            }
        }
    }
}

impl FromStr for BodySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let parts: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
        let want = |k: usize| {
            if parts.len() == k {
                Ok(())
            } else {
                Err(format!("body spec {s:?}: expected {k} field(s) after '{kind}:'"))
            }
        };
        match kind {
            "ball" => {
                want(1)?;
                Ok(BodySpec::Ball {
                    radius: parse_f64(parts[0], "ball radius")?,
                })
            }
            "ellipsoid" => {
                want(1)?;
                Ok(BodySpec::Ellipsoid {
                    semiaxes: parse_list(parts[0], "ellipsoid semiaxes")?,
                })
            }
            "shifted-ball" => {
                want(2)?;
                Ok(BodySpec::ShiftedBall {
                    radius: parse_f64(parts[0], "ball radius")?,
                    offset: parse_list(parts[1], "offset")?,
                })
            }
            "perturbed" => {
                want(3)?;
                Ok(BodySpec::Perturbed {
                    radius: parse_f64(parts[0], "radius")?,
                    amplitude: parse_f64(parts[1], "amplitude")?,
                    degree: parts[2]
                        .trim()
                        .parse()
                        .map_err(|_| format!("degree: cannot parse {:?}", parts[2]))?,
                })
            }
            "constant" if rest.is_empty() && !s.contains(':') => Ok(BodySpec::Constant),
            "file" if !rest.is_empty() => Ok(BodySpec::File(PathBuf::from(rest))),
            "constant" | "file" => Err(format!("body spec {s:?} is malformed")),
            _ if s.is_empty() => Err("empty body spec".into()),
            _ => Ok(BodySpec::File(PathBuf::from(s))),
        }
    }
}

impl From<BodySpec> for String {
    fn from(b: BodySpec) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BodySpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl BodySpec {
    /// Whether different seeds give different bodies.
    pub fn is_random(&self) -> bool {
        matches!(self, BodySpec::Perturbed { .. })
    }

    /// Checks the parts of the spec that do not need a scheme.
    pub fn validate(&self, n: usize) -> Result<(), String> {
        let amb = n + 1;
        match self {
            BodySpec::Ball { radius } if *radius <= 0.0 => Err("ball radius must be positive".into()),
            BodySpec::Ellipsoid { semiaxes } if semiaxes.len() != amb => {
                Err(format!("ellipsoid needs {amb} semiaxes for n = {n}"))
            }
            BodySpec::Ellipsoid { semiaxes } if semiaxes.iter().any(|a| *a <= 0.0) => {
                Err("semiaxes must be positive".into())
            }
            BodySpec::ShiftedBall { radius, offset } => {
                if offset.len() != amb {
                    Err(format!("offset needs {amb} components for n = {n}"))
                } else if *radius <= 0.0 {
                    Err("ball radius must be positive".into())
                } else {
                    Ok(())
                }
            }
            BodySpec::Perturbed {
                radius,
                amplitude,
                degree,
            } => {
                if *radius <= 0.0 || !(0.0..1.0).contains(amplitude) || *degree == 0 {
                    Err("perturbed body needs radius > 0, 0 <= amplitude < 1 and degree >= 1".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Builds the body for `seed`. File bodies bring their own scheme; all
    /// others are sampled on `scheme`.
    pub fn realize(
        &self,
        scheme: &Arc<QuadratureScheme>,
        seed: u64,
        p: f64,
        c: f64,
    ) -> Result<SupportField, CliError> {
        let n = scheme.dim();
        let body = match self {
            BodySpec::Ball { radius } => ball(scheme, *radius)?,
            BodySpec::Ellipsoid { semiaxes } => ellipsoid(scheme, semiaxes)?,
            BodySpec::ShiftedBall { radius, offset } => translate(&ball(scheme, *radius)?, offset)?,
            BodySpec::Perturbed {
                radius,
                amplitude,
                degree,
            } => perturbed_ball(scheme, *radius, *degree, *amplitude, seed)?.0,
            BodySpec::Constant => {
                let r = admissible_radius(n, p, c)?.ok_or_else(|| {
                    CliError::Config(format!("no admissible constant solution for n = {n}, p = {p}, c = {c}"))
                })?;
                ball(scheme, r)?
            }
            BodySpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read body file {}: {e}", path.display())))?;
                let body: SupportField = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("invalid body file {}: {e}", path.display())))?;
                if body.dim() != n {
                    return Err(CliError::Config(format!(
                        "body file {} is for n = {}, run uses n = {n}",
                        path.display(),
                        body.dim()
                    )));
                }
                body
            }
        };
        Ok(body)
    }
}

/// Test function handed to the scalar spectral checks.
///
/// * `random:DEG`: random spherical polynomial of degree `1..=DEG`, seeded per body
/// * `witness:V1,V2[,V3]`: `⟨x, v⟩ / h`
/// * `linear:V1,V2[,V3]`: `⟨x, v⟩`
/// * `one`: the constant 1
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TestFunction {
    Random { degree: u32 },
    Witness { direction: Vec<f64> },
    Linear { direction: Vec<f64> },
    One,
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Random { degree } => write!(f, "random:{degree}"),
            TestFunction::Witness { direction } => write!(f, "witness:{}", list(direction)),
            TestFunction::Linear { direction } => write!(f, "linear:{}", list(direction)),
            TestFunction::One => write!(f, "one"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("random", d)) => Ok(TestFunction::Random {
                degree: d.parse().map_err(|_| format!("test function degree {d:?} is not an integer"))?,
            }),
            Some(("witness", v)) => Ok(TestFunction::Witness {
                direction: parse_list(v, "witness direction")?,
            }),
            Some(("linear", v)) => Ok(TestFunction::Linear {
                direction: parse_list(v, "linear direction")?,
            }),
            None if s == "one" => Ok(TestFunction::One),
            _ => Err(format!("unknown test function {s:?}")),
        }
    }
}

impl From<TestFunction> for String {
    fn from(t: TestFunction) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TestFunction {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl TestFunction {
    pub fn validate(&self, n: usize) -> Result<(), String> {
        match self {
            TestFunction::Random { degree: 0 } => Err("random test function needs degree >= 1".into()),
            TestFunction::Witness { direction } | TestFunction::Linear { direction }
                if direction.len() != n + 1 =>
            {
                Err(format!("test function direction needs {} components", n + 1))
            }
            _ => Ok(()),
        }
    }

    pub fn realize(&self, bundle: &CurvatureBundle, seed: u64) -> Result<ScalarField, CliError> {
        let scheme = bundle.scheme();
        let mut padded = [0.0; 3];
        let field = match self {
            TestFunction::Random { degree } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // Separate stream from the one the body generator draws from.
                rng.set_stream(1);
                SphericalPolynomial::random(scheme.dim(), *degree, &mut rng).sample(scheme)?
            }
            TestFunction::Witness { direction } => equality_witness(bundle, direction)?,
            TestFunction::Linear { direction } => {
                padded[..direction.len()].copy_from_slice(direction);
                ScalarField::from_fn(scheme, |x| x.iter().zip(&padded).map(|(a, b)| a * b).sum())?
            }
            TestFunction::One => ScalarField::constant(scheme, 1.0)?,
        };
        Ok(field)
    }
}
