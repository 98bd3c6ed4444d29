//! Constant and non-constant solutions of the isotropic equation
//! `h^{1−p} σ_n e^{−|X|²/2} = c` and the uniqueness experiment built on them.
//!
//! Two iterations are available. [`SolverMethod::FixedPoint`] is the damped
//! update `h ← (1−τ)h + τ (c e^{|X|²/2}/σ_n)^{1/(1−p)}`. Linearised at a ball of
//! radius `r`, its degree-`ℓ` multiplier is
//! `1 − τ + τ (r² − n + ℓ(ℓ+n−1)) / (1−p)`, which exceeds one for large `ℓ`
//! whatever `τ`. It is therefore only useful from exactly radial data.
//! [`SolverMethod::Newton`] (the default) applies damped Newton steps to
//! `F(h) = log σ_n + (1−p) log h − |X|²/2 − log c`, solving each linear system
//! with preconditioned GMRES.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::body::{max_radius, perturbed_ball, CurvatureBundle, SupportField};
use crate::error::{Error, Result};
use crate::gaussian::isotropic_residual;
use crate::spectral::{check_main_chain, ChainReport};
use crate::sphere::QuadratureScheme;

/// Roots within this distance above one still count as `R(K) ≤ 1`.
pub const ADMISSIBLE_SLACK: f64 = 1e-12;

/// Step-length halvings tried before a step is given up.
pub const MAX_HALVINGS: usize = 20;

/// Residual growth over its running minimum that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// `g(t) = t^{n+1−p} e^{−t²/2}`: a ball of radius `t` solves the isotropic
/// equation exactly when `g(t) = c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GProfile {
    pub n: usize,
    pub p: f64,
    /// `√(n+1−p)`, where `g` peaks.
    pub t_star: f64,
    /// `(n+1−p)^{(n+1−p)/2} e^{−(n+1−p)/2}`.
    pub g_max: f64,
}

impl GProfile {
    pub fn exponent(&self) -> f64 {
        self.n as f64 + 1.0 - self.p
    }

    pub fn g(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        (self.exponent() * t.ln() - 0.5 * t * t).exp()
    }
}

pub fn g_profile(n: usize, p: f64) -> Result<GProfile> {
    if n == 0 {
        return Err(Error::UnsupportedDimension(n));
    }
    let e = n as f64 + 1.0 - p;
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::InvalidParameter(format!("profile needs p < n + 1 (got p = {p})")));
    }
    Ok(GProfile {
        n,
        p,
        t_star: e.sqrt(),
        g_max: (0.5 * e * e.ln() - 0.5 * e).exp(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Increasing,
    Peak,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantSolution {
    pub radius: f64,
    pub branch: Branch,
    /// Whether the ball lies in `R(K) ≤ 1`.
    pub admissible: bool,
}

/// Relative closeness to `g_max` at which the two roots merge into `t*`.
const PEAK_TOL: f64 = 1e-14;

/// Balls solving the isotropic equation, sorted by radius.
pub fn constant_solutions(n: usize, p: f64, c: f64) -> Result<Vec<ConstantSolution>> {
    let prof = g_profile(n, p)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
    }
    let label = |radius, branch| ConstantSolution {
        radius,
        branch,
        admissible: radius <= 1.0 + ADMISSIBLE_SLACK,
    };
    if c > prof.g_max * (1.0 + PEAK_TOL) {
        return Ok(Vec::new());
    }
    if c >= prof.g_max * (1.0 - PEAK_TOL) {
        return Ok(vec![label(prof.t_star, Branch::Peak)]);
    }
    let g = |t| prof.g(t);
    let rising = bisect(|t| g(t) - c, 0.0, prof.t_star);
    let mut hi = 2.0 * prof.t_star;
    while g(hi) >= c {
        hi *= 2.0;
    }
    let falling = bisect(|t| c - g(t), prof.t_star, hi);
    Ok(vec![label(rising, Branch::Increasing), label(falling, Branch::Decreasing)])
}

/// Root of an increasing function on `[lo, hi]` with a sign change, to machine precision.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let (fl, fh) = (f(lo).abs(), f(hi).abs());
            return if fl <= fh { lo } else { hi };
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Unique admissible constant solution when it exists.
pub fn admissible_radius(n: usize, p: f64, c: f64) -> Result<Option<f64>> {
    Ok(constant_solutions(n, p, c)?
        .into_iter()
        .find(|s| s.admissible)
        .map(|s| s.radius))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Newton,
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub method: SolverMethod,
    /// First step length tried each iteration; halved on failure.
    pub damping: f64,
    pub max_iter: usize,
    /// Target for `max |h^{1−p} σ_n e^{−|X|²/2} − c|`.
    pub tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            method: SolverMethod::Newton,
            damping: 1.0,
            max_iter: 50,
            tol: 1e-10,
        }
    }
}

impl SolverParams {
    pub fn fixed_point() -> Self {
        SolverParams {
            method: SolverMethod::FixedPoint,
            damping: 0.3,
            max_iter: 500,
            tol: 1e-10,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping {} must lie in (0, 1]",
                self.damping
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    Diverged,
    LostConvexity,
    MaxIter,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Max-norm residual of the starting body followed by one entry per iteration.
    pub residual_history: Vec<f64>,
    /// Accepted step length per iteration.
    pub step_lengths: Vec<f64>,
    /// Krylov iterations per Newton step (empty for the fixed point).
    pub linear_iterations: Vec<usize>,
    pub final_residual: f64,
    /// `min_r max |h − r|`, attained at `r = (max h + min h)/2`.
    pub distance_to_ball: f64,
    pub mean_radius: f64,
    /// `R(K)` of the final body.
    pub max_radius: f64,
    pub body: SupportField,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn into_result(self) -> Result<SolveOutcome> {
        let iteration = self.iterations;
        let residual = self.final_residual;
        match self.status {
            SolveStatus::Converged => Ok(self),
            SolveStatus::Diverged => Err(Error::Diverged { iteration, residual }),
            SolveStatus::LostConvexity => Err(Error::LostConvexity { iteration }),
            SolveStatus::MaxIter => Err(Error::MaxIterations {
                iterations: iteration,
                residual,
            }),
        }
    }
}

fn max_residual(bundle: &CurvatureBundle, p: f64, c: f64) -> f64 {
    let r = isotropic_residual(bundle, p, c).max_abs();
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

/// Bundle of `h` if it is a valid strictly convex body.
fn try_bundle(scheme: &Arc<QuadratureScheme>, h: Vec<f64>) -> Option<(SupportField, CurvatureBundle)> {
    if h.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let body = SupportField::from_values(scheme, h).ok()?;
    let bundle = body.bundle().ok()?;
    Some((body, bundle))
}

pub fn solve_isotropic(
    n: usize,
    p: f64,
    c: f64,
    init: &SupportField,
    params: &SolverParams,
) -> Result<SolveOutcome> {
    if init.dim() != n {
        return Err(Error::InvalidParameter(format!(
            "initial body lives on S^{} but n = {n}",
            init.dim()
        )));
    }
    if !(p < 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("solver needs p < 1 (got {p})")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
    }
    params.validate()?;

    let scheme = init.scheme().clone();
    let mut body = init.clone();
    let mut bundle = body.bundle()?;
    let mut residual = max_residual(&bundle, p, c);
    let mut best = residual;
    let mut history = vec![residual];
    let mut steps = Vec::new();
    let mut linear = Vec::new();
    let mut precond = match params.method {
        SolverMethod::Newton => Some(BallPreconditioner::new(&scheme)),
        SolverMethod::FixedPoint => None,
    };

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    while iterations < params.max_iter {
        if residual <= params.tol {
            status = SolveStatus::Converged;
            break;
        }
        let h = bundle.h().to_vec();
        let trial_at: Box<dyn Fn(f64) -> Vec<f64>> = match precond.as_mut() {
            Some(pc) => {
                let rhs: Vec<f64> = newton_residual(&bundle, p, c).iter().map(|v| -v).collect();
                let (lo, hi) = min_max(&h);
                pc.set_radius(0.5 * (lo + hi), n, p);
                let jac = |u: &[f64]| jacobian_apply(&bundle, p, u);
                let rtol = (0.01_f64).min(residual / c).max(1e-13);
                let (delta, its) = gmres(jac, |v| pc.apply(v), &rhs, rtol, 60, 600);
                linear.push(its);
                Box::new(move |tau| h.iter().zip(&delta).map(|(a, d)| a + tau * d).collect())
            }
            None => {
                let target = fixed_point_map(&bundle, p, c);
                Box::new(move |tau| {
                    h.iter()
                        .zip(&target)
                        .map(|(a, t)| (1.0 - tau) * a + tau * t)
                        .collect()
                })
            }
        };
        let require_decrease = params.method == SolverMethod::Newton;

        let mut tau = params.damping;
        let mut fallback = None;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            if let Some((b, bd)) = try_bundle(&scheme, trial_at(tau)) {
                let r = max_residual(&bd, p, c);
                if !require_decrease || r < residual {
                    accepted = Some((b, bd, r, tau));
                    break;
                }
                fallback = Some((b, bd, r, tau));
            }
            tau *= 0.5;
        }
        iterations += 1;
        let Some((b, bd, r, tau)) = accepted.or(fallback) else {
            status = SolveStatus::LostConvexity;
            break;
        };
        body = b;
        bundle = bd;
        residual = r;
        history.push(r);
        steps.push(tau);
        best = best.min(r);
        if !r.is_finite() || r > DIVERGENCE_FACTOR * best {
            status = SolveStatus::Diverged;
            break;
        }
    }
    if status == SolveStatus::MaxIter && residual <= params.tol {
        status = SolveStatus::Converged;
    }

    let (lo, hi) = min_max(bundle.h());
    Ok(SolveOutcome {
        status,
        iterations,
        residual_history: history,
        step_lengths: steps,
        linear_iterations: linear,
        final_residual: residual,
        distance_to_ball: 0.5 * (hi - lo),
        mean_radius: 0.5 * (hi + lo),
        max_radius: max_radius(&bundle),
        body,
    })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

/// `(c e^{|X|²/2} / σ_n)^{1/(1−p)}`.
fn fixed_point_map(bundle: &CurvatureBundle, p: f64, c: f64) -> Vec<f64> {
    let q = 1.0 / (1.0 - p);
    (0..bundle.len())
        .map(|i| {
            let r = bundle.x_norm()[i];
            (q * (c.ln() + 0.5 * r * r - bundle.sigma_n()[i].ln())).exp()
        })
        .collect()
}

/// `F(h) = log σ_n + (1−p) log h − |X|²/2 − log c`.
fn newton_residual(bundle: &CurvatureBundle, p: f64, c: f64) -> Vec<f64> {
    (0..bundle.len())
        .map(|i| {
            let r = bundle.x_norm()[i];
            bundle.sigma_n()[i].ln() + (1.0 - p) * bundle.h()[i].ln() - 0.5 * r * r - c.ln()
        })
        .collect()
}

/// Derivative of the discrete `F` at `h` in the direction `u`:
/// `σ_n^{ij}(u_ij + u δ_ij)/σ_n + (1−p) u/h − h u − ⟨∇h, ∇u⟩`.
fn jacobian_apply(bundle: &CurvatureBundle, p: f64, u: &[f64]) -> Vec<f64> {
    let n = bundle.dim();
    let (grad, hess) = bundle.scheme().grad_hess_values(u);
    (0..u.len())
        .map(|i| {
            let cof = bundle.cofactor(n, i);
            let hs = &hess[i];
            let trace = if n == 1 {
                cof[0][0] * (hs[0][0] + u[i])
            } else {
                cof[0][0] * (hs[0][0] + u[i])
                    + cof[0][1] * hs[0][1]
                    + cof[1][0] * hs[1][0]
                    + cof[1][1] * (hs[1][1] + u[i])
            };
            let h = bundle.h()[i];
            let gh = &bundle.grad_h()[i];
            trace / bundle.sigma_n()[i] + (1.0 - p) * u[i] / h
                - h * u[i]
                - (gh[0] * grad[i][0] + gh[1] * grad[i][1])
        })
        .collect()
}

/// Inverse of the Jacobian at a centred ball of radius `r`,
/// `u ↦ ((Δ + n + 1 − p) u)/r − r u`, block-diagonalised by an azimuthal FFT.
/// The discrete Laplacian commutes with the grid's azimuthal rotations and
/// reflections, so each azimuthal wavenumber couples the rings through one
/// small matrix, obtained by applying the Laplacian to `cos(kφ)` on each ring.
struct BallPreconditioner {
    rings: usize,
    ring_len: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    laplace_blocks: Vec<DMatrix<f64>>,
    factors: Vec<Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>>,
}

impl BallPreconditioner {
    fn new(scheme: &Arc<QuadratureScheme>) -> Self {
        let (rings, ring_len) = scheme.ring_layout();
        let n = scheme.dim();
        let mut laplace_blocks = Vec::with_capacity(ring_len / 2 + 1);
        for k in 0..=ring_len / 2 {
            let mut block = DMatrix::zeros(rings, rings);
            for q in 0..rings {
                let mut u = vec![0.0; scheme.len()];
                for j in 0..ring_len {
                    u[q * ring_len + j] = (2.0 * std::f64::consts::PI * (k * j) as f64 / ring_len as f64).cos();
                }
                let hess = scheme.hess_values(&u);
                for r in 0..rings {
                    let hs = &hess[r * ring_len];
                    block[(r, q)] = if n == 1 { hs[0][0] } else { hs[0][0] + hs[1][1] };
                }
            }
            laplace_blocks.push(block);
        }
        let mut planner = FftPlanner::new();
        BallPreconditioner {
            rings,
            ring_len,
            fft: planner.plan_fft_forward(ring_len),
            ifft: planner.plan_fft_inverse(ring_len),
            laplace_blocks,
            factors: Vec::new(),
        }
    }

    fn set_radius(&mut self, r: f64, n: usize, p: f64) {
        let nf = n as f64;
        // Keep clear of radii where a low-degree ball mode is singular.
        let mut r = r;
        for _ in 0..8 {
            let near = (0..=8).any(|l| {
                let l = l as f64;
                ((nf + 1.0 - p - l * (l + nf - 1.0)) / r - r).abs() < 0.05 / r
            });
            if !near {
                break;
            }
            r *= 1.1;
        }
        let shift = (nf + 1.0 - p) / r - r;
        self.factors = self
            .laplace_blocks
            .iter()
            .map(|d| {
                let m = d / r + DMatrix::identity(self.rings, self.rings) * shift;
                let lu = m.lu();
                lu.is_invertible().then_some(lu)
            })
            .collect();
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (rings, len) = (self.rings, self.ring_len);
        let mut spec: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        for ring in spec.chunks_mut(len) {
            self.fft.process(ring);
        }
        for k in 0..len {
            let Some(lu) = &self.factors[k.min(len - k)] else {
                continue;
            };
            let re = DVector::from_iterator(rings, (0..rings).map(|q| spec[q * len + k].re));
            let im = DVector::from_iterator(rings, (0..rings).map(|q| spec[q * len + k].im));
            let (Some(re), Some(im)) = (lu.solve(&re), lu.solve(&im)) else {
                continue;
            };
            for q in 0..rings {
                spec[q * len + k] = Complex::new(re[q], im[q]);
            }
        }
        for ring in spec.chunks_mut(len) {
            self.ifft.process(ring);
        }
        let scale = 1.0 / len as f64;
        spec.iter().map(|z| z.re * scale).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Restarted, right-preconditioned GMRES from a zero initial guess. Returns
/// the approximate solution and the number of Krylov iterations used.
fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let dim = b.len();
    let target = rtol * norm(b);
    let mut x = vec![0.0; dim];
    let mut total = 0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta <= target || beta == 0.0 {
            break;
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<_>>()];
        let mut z_vecs: Vec<Vec<f64>> = Vec::new();
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        for j in 0..restart {
            let z = precond(&basis[j]);
            let mut w = apply(&z);
            z_vecs.push(z);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wn = norm(&w);
            col[j + 1] = wn;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let d = col[j].hypot(col[j + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (col[j] / d, col[j + 1] / d) };
            cs.push(c);
            sn.push(s);
            col[j] = d;
            col[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            hess.push(col);
            total += 1;
            if g[j + 1].abs() <= target || wn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let k = hess.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|l| hess[l][i] * y[l]).sum();
            y[i] = if hess[i][i] != 0.0 { (g[i] - s) / hess[i][i] } else { 0.0 };
        }
        for (yi, z) in y.iter().zip(&z_vecs) {
            for (xk, zk) in x.iter_mut().zip(z) {
                *xk += yi * zk;
            }
        }
        if g[k].abs() <= target {
            break;
        }
    }
    (x, total)
}

/// Settings for [`uniqueness_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub resolution: usize,
    /// Initial radii are drawn uniformly from this interval.
    pub radius_range: [f64; 2],
    pub amplitude: f64,
    pub max_degree: u32,
    pub solver: SolverParams,
    /// Relative tolerance passed to the proof-chain check.
    pub chain_tol: f64,
    /// Allowed max-norm gap between a converged body and the admissible ball.
    pub agreement_tol: f64,
}

impl ExperimentParams {
    pub fn for_dimension(n: usize) -> Self {
        ExperimentParams {
            resolution: if n == 1 { 64 } else { 16 },
            radius_range: [0.75, 0.95],
            amplitude: 0.05,
            max_degree: 4,
            solver: SolverParams::default(),
            chain_tol: 1e-6,
            agreement_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub index: usize,
    pub seed: u64,
    pub init_radius: f64,
    pub init_max_radius: Option<f64>,
    pub status: Option<SolveStatus>,
    pub iterations: usize,
    pub final_residual: Option<f64>,
    pub distance_to_ball: Option<f64>,
    pub mean_radius: Option<f64>,
    pub max_radius: Option<f64>,
    /// `max |h − r_adm|` against the admissible constant solution.
    pub radius_error: Option<f64>,
    pub chain: Option<ChainReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dimension: usize,
    pub p: f64,
    pub c: f64,
    pub seed: u64,
    pub num_seeds: usize,
    pub params: ExperimentParams,
    /// False on the closed endpoint `p = −(n+1)`, which the uniqueness
    /// theorem leaves out.
    pub p_in_open_range: bool,
    pub admissible_radius: Option<f64>,
    pub converged: usize,
    pub converged_fraction: f64,
    /// Largest max-norm difference between two converged support functions.
    pub max_pairwise_deviation: f64,
    pub max_distance_to_ball: f64,
    pub max_radius_error: f64,
    /// Every converged body is within `agreement_tol` of the admissible ball.
    pub all_agree: bool,
    /// Every converged body passed the proof chain without a violation.
    pub chain_passed: bool,
    pub min_chain_margin: f64,
    pub outcomes: Vec<SeedOutcome>,
}

/// Solves the isotropic equation from `num_seeds` random starting bodies with
/// `R(K) ≤ 1` and compares the results with the admissible ball. Seeds run in
/// parallel; seed `i` uses the stream `seed + i` and results are kept in seed order.
pub fn uniqueness_experiment(
    n: usize,
    p: f64,
    c: f64,
    num_seeds: usize,
    seed: u64,
    params: &ExperimentParams,
) -> Result<ExperimentReport> {
    let nf = n as f64;
    if !(p >= -(nf + 1.0) && p < -1.0) {
        return Err(Error::InvalidParameter(format!("experiment needs -(n+1) <= p < -1 (got {p})")));
    }
    if !(c > 0.0 && c <= (-0.5_f64).exp()) {
        return Err(Error::InvalidParameter(format!("experiment needs 0 < c <= e^(-1/2) (got {c})")));
    }
    if num_seeds == 0 {
        return Err(Error::InvalidParameter("num_seeds must be at least 1".into()));
    }
    let [lo, hi] = params.radius_range;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidParameter("radius range must satisfy 0 < lo <= hi".into()));
    }
    params.solver.validate()?;
    let scheme = QuadratureScheme::build(n, params.resolution)?;
    let target = admissible_radius(n, p, c)?;

    let runs: Vec<(SeedOutcome, Option<SupportField>)> = (0..num_seeds)
        .into_par_iter()
        .map(|index| run_seed(&scheme, n, p, c, index, seed.wrapping_add(index as u64), target, params))
        .collect();

    let finals: Vec<&SupportField> = runs.iter().filter_map(|(_, b)| b.as_ref()).collect();
    let mut max_pairwise: f64 = 0.0;
    for (i, a) in finals.iter().enumerate() {
        for b in &finals[i + 1..] {
            let d = a
                .values()
                .iter()
                .zip(b.values())
                .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            max_pairwise = max_pairwise.max(d);
        }
    }
    let outcomes: Vec<SeedOutcome> = runs.into_iter().map(|(o, _)| o).collect();
    let converged_runs: Vec<&SeedOutcome> = outcomes
        .iter()
        .filter(|o| o.status == Some(SolveStatus::Converged))
        .collect();
    let converged = converged_runs.len();
    let fold_max = |f: fn(&SeedOutcome) -> Option<f64>| {
        converged_runs
            .iter()
            .map(|o| f(o).unwrap_or(f64::INFINITY))
            .fold(0.0_f64, f64::max)
    };
    let max_distance = fold_max(|o| o.distance_to_ball);
    let max_radius_error = fold_max(|o| o.radius_error);
    let within = |v: Option<f64>| v.is_some_and(|v| v <= params.agreement_tol);
    let all_agree = converged_runs
        .iter()
        .all(|o| within(o.radius_error) && within(o.distance_to_ball));
    let chains: Vec<&ChainReport> = converged_runs.iter().filter_map(|o| o.chain.as_ref()).collect();
    let chain_passed = chains.len() == converged && chains.iter().all(|r| !r.any_violation());
    let min_chain_margin = chains
        .iter()
        .map(|r| r.min_relative_margin())
        .fold(f64::INFINITY, f64::min);

    Ok(ExperimentReport {
        dimension: n,
        p,
        c,
        seed,
        num_seeds,
        params: params.clone(),
        p_in_open_range: p > -(nf + 1.0),
        admissible_radius: target,
        converged,
        converged_fraction: converged as f64 / num_seeds as f64,
        max_pairwise_deviation: max_pairwise,
        max_distance_to_ball: max_distance,
        max_radius_error,
        all_agree,
        chain_passed,
        min_chain_margin,
        outcomes,
    })
}

/// Shrinks of the initial radius allowed while pushing `R(K)` below one.
const RADIUS_SHRINKS: usize = 40;

#[allow(clippy::too_many_arguments)]
fn run_seed(
    scheme: &Arc<QuadratureScheme>,
    n: usize,
    p: f64,
    c: f64,
    index: usize,
    seed: u64,
    target: Option<f64>,
    params: &ExperimentParams,
) -> (SeedOutcome, Option<SupportField>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [lo, hi] = params.radius_range;
    let init_radius = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let poly_seed: u64 = rng.random();
    let mut out = SeedOutcome {
        index,
        seed,
        init_radius,
        init_max_radius: None,
        status: None,
        iterations: 0,
        final_residual: None,
        distance_to_ball: None,
        mean_radius: None,
        max_radius: None,
        radius_error: None,
        chain: None,
        error: None,
    };

    let init = (|| -> Result<(SupportField, f64, f64)> {
        let mut r = init_radius;
        for _ in 0..RADIUS_SHRINKS {
            let (body, _) = perturbed_ball(scheme, r, params.max_degree, params.amplitude, poly_seed)?;
            let big = max_radius(&body.bundle()?);
            if big <= 1.0 {
                return Ok((body, r, big));
            }
            r *= 0.95;
        }
        Err(Error::GenerationFailed { attempts: RADIUS_SHRINKS })
    })();
    let (body, r0, big) = match init {
        Ok(v) => v,
        Err(e) => {
            out.error = Some(e.to_string());
            return (out, None);
        }
    };
    out.init_radius = r0;
    out.init_max_radius = Some(big);

    let solved = match solve_isotropic(n, p, c, &body, &params.solver) {
        Ok(s) => s,
        Err(e) => {
            out.error = Some(e.to_string());
            return (out, None);
        }
    };
    out.status = Some(solved.status);
    out.iterations = solved.iterations;
    out.final_residual = Some(solved.final_residual);
    out.distance_to_ball = Some(solved.distance_to_ball);
    out.mean_radius = Some(solved.mean_radius);
    out.max_radius = Some(solved.max_radius);
    out.radius_error = target.map(|rt| {
        solved
            .body
            .values()
            .iter()
            .fold(0.0_f64, |m, h| m.max((h - rt).abs()))
    });
    if !solved.converged() {
        return (out, None);
    }
    match solved
        .body
        .bundle()
        .and_then(|bd| check_main_chain(&bd, p, c, params.solver.tol, params.chain_tol))
    {
        Ok(chain) => out.chain = Some(chain),
        Err(e) => out.error = Some(e.to_string()),
    }
    (out, Some(solved.body))
}
