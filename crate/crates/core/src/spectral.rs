//! Numerical checks of the spectral inequalities and integral identities
//! behind the uniqueness argument for the isotropic equation, plus the
//! local Ehrhard-type inequality.
//!
//! Every inequality is reported as `LHS ≤ RHS` with `margin = RHS − LHS` and
//! a per-term breakdown. Throughout, `dV = h σ_n dσ` and all gradients of
//! derived fields are taken numerically with the scheme's operators.

use serde::{Deserialize, Serialize};

use crate::body::{quad_form, CurvatureBundle};
use crate::error::{Error, Result};
use crate::gaussian::{gaussian_normalization, gaussian_volume, isotropic_residual, ogive};
use crate::sphere::{dot3, ScalarField, Tangent, Vec3};

/// Margins within this multiple of the verdict scale are called equalities.
pub const EQUALITY_BAND: f64 = 1e-12;

/// The verdict scale never drops below this multiple of a report's natural
/// scale, so sides that vanish up to rounding are not judged relative to noise.
pub const VERDICT_FLOOR: f64 = 1e-12;

/// `α` used in the proof chain for the isotropic equation.
pub const CHAIN_ALPHA: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Equality,
    ViolatedWithinTol,
    Violated,
}

impl Verdict {
    /// Classifies `margin` given the sides' scale and a relative tolerance.
    pub fn classify(margin: f64, scale: f64, tol: f64) -> Self {
        if !margin.is_finite() {
            return Verdict::Violated;
        }
        if margin.abs() <= EQUALITY_BAND * scale {
            Verdict::Equality
        } else if margin > 0.0 {
            Verdict::Holds
        } else if margin >= -tol * scale {
            Verdict::ViolatedWithinTol
        } else {
            Verdict::Violated
        }
    }

    pub fn is_violation(self) -> bool {
        self == Verdict::Violated
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub side: Side,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

fn term(name: &str, side: Side, value: f64) -> Term {
    Term {
        name: name.to_string(),
        side,
        value,
    }
}

fn diag(name: impl Into<String>, value: f64) -> Diagnostic {
    Diagnostic {
        name: name.into(),
        value,
    }
}

/// Outcome of one inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub dimension: usize,
    pub resolution: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Relative tolerance; the violation threshold is `tolerance · scale`
    /// with `scale = max(|lhs|, |rhs|, VERDICT_FLOOR · natural_scale)`.
    pub tolerance: f64,
    /// Size of the body's own integrals in the same units as the sides, or
    /// zero when the check has no such scale.
    pub natural_scale: f64,
    pub verdict: Verdict,
    /// Signed summands; those on each side add up to `lhs` and `rhs`.
    pub terms: Vec<Term>,
    pub diagnostics: Vec<Diagnostic>,
}

impl InequalityReport {
    pub fn from_terms(name: &str, bundle: &CurvatureBundle, terms: Vec<Term>, tol: f64, natural: f64) -> Self {
        let sum = |side| terms.iter().filter(|t| t.side == side).map(|t| t.value).sum::<f64>();
        let lhs = sum(Side::Lhs);
        let rhs = sum(Side::Rhs);
        let margin = rhs - lhs;
        let scale = lhs.abs().max(rhs.abs()).max(VERDICT_FLOOR * natural);
        InequalityReport {
            name: name.to_string(),
            dimension: bundle.dim(),
            resolution: bundle.scheme().resolution(),
            lhs,
            rhs,
            margin,
            tolerance: tol,
            natural_scale: natural,
            verdict: Verdict::classify(margin, scale, tol),
            terms,
            diagnostics: Vec::new(),
        }
    }

    fn with_diagnostics(mut self, d: Vec<Diagnostic>) -> Self {
        self.diagnostics = d;
        self
    }

    /// `max(|lhs|, |rhs|, VERDICT_FLOOR · natural_scale)`.
    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs()).max(VERDICT_FLOOR * self.natural_scale)
    }

    /// `margin / scale`, or zero when every side vanishes.
    pub fn relative_margin(&self) -> f64 {
        let s = self.scale();
        if s > 0.0 {
            self.margin / s
        } else {
            0.0
        }
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.name == name).map(|d| d.value)
    }
}

/// Two numerically independent evaluations of the same quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub dimension: usize,
    pub resolution: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`; when both sides are below
    /// `1e-9 · natural_scale` the error is taken relative to `natural_scale`.
    pub rel_error: f64,
    pub natural_scale: f64,
    pub terms: Vec<Term>,
}

impl IdentityReport {
    fn new(name: &str, bundle: &CurvatureBundle, terms: Vec<Term>, natural_scale: f64) -> Self {
        let sum = |side| terms.iter().filter(|t| t.side == side).map(|t| t.value).sum::<f64>();
        let lhs = sum(Side::Lhs);
        let rhs = sum(Side::Rhs);
        let abs_error = (lhs - rhs).abs();
        let big = lhs.abs().max(rhs.abs());
        let rel_error = if big > 1e-9 * natural_scale {
            abs_error / big
        } else if natural_scale > 0.0 {
            abs_error / natural_scale
        } else {
            abs_error
        };
        IdentityReport {
            name: name.to_string(),
            dimension: bundle.dim(),
            resolution: bundle.scheme().resolution(),
            lhs,
            rhs,
            abs_error,
            rel_error,
            natural_scale,
            terms,
        }
    }
}

/// Pointwise comparison of two per-node expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub name: String,
    pub resolution: usize,
    pub max_abs_error: f64,
    /// `max_abs_error / max_i |rhs_i|`.
    pub max_rel_error: f64,
    pub worst_node: usize,
}

fn integrate(bundle: &CurvatureBundle, f: impl Fn(usize) -> f64) -> f64 {
    let vals: Vec<f64> = (0..bundle.len()).map(f).collect();
    bundle.integrate(&vals)
}

fn dv(bundle: &CurvatureBundle, i: usize) -> f64 {
    bundle.h()[i] * bundle.sigma_n()[i]
}

fn dot2(a: &Tangent, b: &Tangent) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// How [`check_hilbert_spectral`] treats a test function that is not
/// orthogonal to `h σ_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orthogonality {
    /// Fail with [`Error::OrthogonalityViolated`].
    Require,
    /// Subtract `(∫ f h σ_k / ∫ h σ_k) · 1` first.
    Project,
}

/// `k ∫ f² h σ_k dσ ≤ ∫ h² σ_k^{ij} f_i f_j dσ` for `∫ f h σ_k dσ = 0`.
///
/// With `Orthogonality::Require` the hypothesis is accepted when
/// `|∫ f h σ_k| ≤ tol · ‖f‖₂ · ‖h σ_k‖₂`.
pub fn check_hilbert_spectral(
    bundle: &CurvatureBundle,
    f: &ScalarField,
    k: usize,
    tol: f64,
    mode: Orthogonality,
) -> Result<InequalityReport> {
    let n = bundle.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..={n}")));
    }
    if f.values().len() != bundle.len() {
        return Err(Error::LengthMismatch {
            expected: bundle.len(),
            got: f.values().len(),
        });
    }
    let sigma = bundle.sigma(k);
    let weight: Vec<f64> = bundle.h().iter().zip(sigma).map(|(h, s)| h * s).collect();
    let inner = integrate(bundle, |i| f.values()[i] * weight[i]);
    let mass = bundle.integrate(&weight);

    let (values, coefficient) = match mode {
        Orthogonality::Project => {
            let c = inner / mass;
            (f.values().iter().map(|v| v - c).collect::<Vec<_>>(), c)
        }
        Orthogonality::Require => {
            let wn = integrate(bundle, |i| weight[i] * weight[i]).sqrt();
            let bound = tol * f.l2_norm() * wn;
            if inner.abs() > bound {
                return Err(Error::OrthogonalityViolated { inner, bound });
            }
            (f.values().to_vec(), 0.0)
        }
    };
    let grad = bundle.scheme().grad_values(&values);

    let lhs = k as f64 * integrate(bundle, |i| values[i] * values[i] * weight[i]);
    let rhs = integrate(bundle, |i| {
        let h = bundle.h()[i];
        h * h * quad_form(&bundle.cofactor(k, i), &grad[i], &grad[i])
    });
    let residual = integrate(bundle, |i| values[i] * weight[i]);
    Ok(InequalityReport::from_terms(
        "hilbert-spectral",
        bundle,
        vec![
            term("k∫f²hσ_k", Side::Lhs, lhs),
            term("∫h²σ_k^{ij}f_if_j", Side::Rhs, rhs),
        ],
        tol,
        0.0,
    )
    .with_diagnostics(vec![
        diag("k", k as f64),
        diag("projection_coefficient", coefficient),
        diag("orthogonality_residual", residual),
    ]))
}

/// `f(x) = ⟨x, v⟩ / h(x)`, the equality case of the spectral inequality.
pub fn equality_witness(bundle: &CurvatureBundle, v: &[f64]) -> Result<ScalarField> {
    let scheme = bundle.scheme();
    if v.len() != scheme.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "witness vector needs {} components",
            scheme.ambient_dim()
        )));
    }
    let mut w = [0.0; 3];
    w[..v.len()].copy_from_slice(v);
    let vals = scheme
        .nodes()
        .iter()
        .zip(bundle.h())
        .map(|(x, h)| dot3(x, &w) / h)
        .collect();
    bundle.field(vals)
}

fn check_alpha(bundle: &CurvatureBundle, alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} is not finite")));
    }
    if alpha < 0.5 && bundle.min_h() < 1e-3 {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} < 1/2 needs min h ≥ 1e-3 (got {:e})",
            bundle.min_h()
        )));
    }
    Ok(())
}

/// Per-node quantities shared by the α-weighted checks.
struct AlphaWeights {
    /// `e^{−|X|^α}`
    full: Vec<f64>,
    /// `e^{−|X|^α / 2}`
    half: Vec<f64>,
    /// `h ⟨∇h, ∇|X|⟩`
    h_cross: Vec<f64>,
}

impl AlphaWeights {
    fn new(bundle: &CurvatureBundle, alpha: f64) -> Self {
        let mut full = Vec::with_capacity(bundle.len());
        let mut half = Vec::with_capacity(bundle.len());
        let mut h_cross = Vec::with_capacity(bundle.len());
        for i in 0..bundle.len() {
            let ra = bundle.x_norm()[i].powf(alpha);
            full.push((-ra).exp());
            half.push((-0.5 * ra).exp());
            h_cross.push(bundle.h()[i] * bundle.grad_h_dot_grad_x_norm(i));
        }
        AlphaWeights { full, half, h_cross }
    }
}

/// `∫ e^{−|X|^α/2} X dV` as an ambient vector.
fn weighted_x_moment(bundle: &CurvatureBundle, half: &[f64]) -> Vec3 {
    let mut m = [0.0; 3];
    for (c, slot) in m.iter_mut().enumerate() {
        *slot = integrate(bundle, |i| half[i] * bundle.x()[i][c] * dv(bundle, i));
    }
    m
}

/// The quantities that appear on both sides of the vector inequality and
/// its rearrangements.
struct VectorTerms {
    volume: f64,
    moment: Vec3,
    /// `n |∫ e^{−|X|^α/2} X dV|² / ∫ dV`
    mean: f64,
    /// `(α²/4) ∫ |X|^{2α−1} e^{−|X|^α} h⟨∇h, ∇|X|⟩ dV`
    quadratic: f64,
    /// `∫ |X|^{α−1} e^{−|X|^α} h⟨∇h, ∇|X|⟩ dV`
    linear_base: f64,
    /// `∫ h² e^{−|X|^α} dV`
    natural: f64,
}

impl VectorTerms {
    fn new(bundle: &CurvatureBundle, alpha: f64, w: &AlphaWeights) -> Self {
        let n = bundle.dim() as f64;
        let volume = integrate(bundle, |i| dv(bundle, i));
        let moment = weighted_x_moment(bundle, &w.half);
        let mean = n * dot3(&moment, &moment) / volume;
        let quadratic = 0.25
            * alpha
            * alpha
            * integrate(bundle, |i| {
                bundle.x_norm()[i].powf(2.0 * alpha - 1.0) * w.full[i] * w.h_cross[i] * dv(bundle, i)
            });
        let linear_base = integrate(bundle, |i| {
            bundle.x_norm()[i].powf(alpha - 1.0) * w.full[i] * w.h_cross[i] * dv(bundle, i)
        });
        let natural = integrate(bundle, |i| bundle.h()[i].powi(2) * w.full[i] * dv(bundle, i));
        VectorTerms {
            volume,
            moment,
            mean,
            quadratic,
            linear_base,
            natural,
        }
    }
}

/// Standard basis of the ambient space.
pub fn standard_basis(n: usize) -> Vec<Vec3> {
    (0..=n)
        .map(|l| {
            let mut e = [0.0; 3];
            e[l] = 1.0;
            e
        })
        .collect()
}

/// Vector form of the spectral inequality with `f_l = e^{−|X|^α/2}⟨X, E_l⟩ − mean`:
///
/// `n∫e^{−|X|^α}|X|² dV − n|∫e^{−|X|^α/2}X dV|²/∫dV
///   ≤ ∫e^{−|X|^α} h(Δh + nh) dV + (α²/4)∫|X|^{2α−1}e^{−|X|^α}h⟨∇h,∇|X|⟩ dV
///     − α∫|X|^{α−1}e^{−|X|^α}h⟨∇h,∇|X|⟩ dV`.
///
/// Diagnostics carry, for each basis vector, the two sides of the scalar
/// spectral inequality applied to `f_l` directly.
pub fn check_vector_inequality(bundle: &CurvatureBundle, alpha: f64, tol: f64) -> Result<InequalityReport> {
    check_vector_inequality_in_basis(bundle, alpha, tol, &standard_basis(bundle.dim()))
}

pub fn check_vector_inequality_in_basis(
    bundle: &CurvatureBundle,
    alpha: f64,
    tol: f64,
    basis: &[Vec3],
) -> Result<InequalityReport> {
    check_alpha(bundle, alpha)?;
    if basis.len() != bundle.dim() + 1 {
        return Err(Error::InvalidParameter("basis must span the ambient space".into()));
    }
    let n = bundle.dim() as f64;
    let w = AlphaWeights::new(bundle, alpha);
    let vt = VectorTerms::new(bundle, alpha, &w);

    let energy = n * integrate(bundle, |i| {
        w.full[i] * bundle.x_norm()[i].powi(2) * dv(bundle, i)
    });
    let curvature = integrate(bundle, |i| {
        w.full[i] * bundle.h()[i] * bundle.sigma1()[i] * dv(bundle, i)
    });
    let linear = -alpha * vt.linear_base;

    let mut diagnostics = vec![diag("alpha", alpha), diag("volume", vt.volume)];
    let mut sum_lhs = 0.0;
    let mut sum_rhs = 0.0;
    for (l, e) in basis.iter().enumerate() {
        let mean = dot3(&vt.moment, e) / vt.volume;
        let f: Vec<f64> = (0..bundle.len())
            .map(|i| w.half[i] * dot3(&bundle.x()[i], e) - mean)
            .collect();
        let grad = bundle.scheme().grad_values(&f);
        let lhs_l = n * integrate(bundle, |i| f[i] * f[i] * dv(bundle, i));
        let rhs_l = integrate(bundle, |i| {
            let h = bundle.h()[i];
            h * h * quad_form(&bundle.cofactor(bundle.dim(), i), &grad[i], &grad[i])
        });
        sum_lhs += lhs_l;
        sum_rhs += rhs_l;
        diagnostics.push(diag(format!("f{l}.lhs"), lhs_l));
        diagnostics.push(diag(format!("f{l}.rhs"), rhs_l));
    }
    diagnostics.push(diag("sum_l.lhs", sum_lhs));
    diagnostics.push(diag("sum_l.rhs", sum_rhs));

    Ok(InequalityReport::from_terms(
        "vector",
        bundle,
        vec![
            term("n∫e^{-|X|^α}|X|²dV", Side::Lhs, energy),
            term("-n|∫e^{-|X|^α/2}XdV|²/∫dV", Side::Lhs, -vt.mean),
            term("∫e^{-|X|^α}h(Δh+nh)dV", Side::Rhs, curvature),
            term("(α²/4)∫|X|^{2α-1}e^{-|X|^α}h⟨∇h,∇|X|⟩dV", Side::Rhs, vt.quadratic),
            term("-α∫|X|^{α-1}e^{-|X|^α}h⟨∇h,∇|X|⟩dV", Side::Rhs, linear),
        ],
        tol,
        vt.natural,
    )
    .with_diagnostics(diagnostics))
}

/// Compares, node by node, `Σ_{l,i,j} σ_n^{ij} ∇_i f_l ∇_j f_l` (gradients
/// taken numerically) with its closed form
/// `e^{−|X|^α}σ_1σ_n + (α²/4)σ_n e^{−|X|^α}|X|^{2α−1}⟨∇h,∇|X|⟩ − α|X|^{α−1}σ_n e^{−|X|^α}⟨∇h,∇|X|⟩`.
pub fn check_pointwise_xs(bundle: &CurvatureBundle, alpha: f64) -> Result<PointwiseReport> {
    check_alpha(bundle, alpha)?;
    let n = bundle.dim();
    let w = AlphaWeights::new(bundle, alpha);
    let grads: Vec<Vec<Tangent>> = standard_basis(n)
        .iter()
        .map(|e| {
            let f: Vec<f64> = (0..bundle.len())
                .map(|i| w.half[i] * dot3(&bundle.x()[i], e))
                .collect();
            bundle.scheme().grad_values(&f)
        })
        .collect();

    let mut max_abs = 0.0_f64;
    let mut worst = 0;
    let mut scale = 0.0_f64;
    for i in 0..bundle.len() {
        let cof = bundle.cofactor(n, i);
        let lhs: f64 = grads.iter().map(|g| quad_form(&cof, &g[i], &g[i])).sum();
        let r = bundle.x_norm()[i];
        let sn = bundle.sigma_n()[i];
        let cross = bundle.grad_h_dot_grad_x_norm(i);
        let rhs = w.full[i] * bundle.sigma1()[i] * sn
            + 0.25 * alpha * alpha * sn * w.full[i] * r.powf(2.0 * alpha - 1.0) * cross
            - alpha * r.powf(alpha - 1.0) * sn * w.full[i] * cross;
        scale = scale.max(rhs.abs());
        let err = (lhs - rhs).abs();
        if err > max_abs {
            max_abs = err;
            worst = i;
        }
    }
    Ok(PointwiseReport {
        name: "xs".into(),
        resolution: bundle.scheme().resolution(),
        max_abs_error: max_abs,
        max_rel_error: if scale > 0.0 { max_abs / scale } else { max_abs },
        worst_node: worst,
    })
}

/// `∫⟨hX, ∇log(h^{n+2}/κ)⟩ e^{−|X|^α} dV` with `∇σ_n` differentiated numerically.
fn log_curvature_flux(bundle: &CurvatureBundle, full: &[f64]) -> f64 {
    let n = bundle.dim() as f64;
    let grad_sigma = bundle.scheme().grad_values(bundle.sigma_n());
    integrate(bundle, |i| {
        let h = bundle.h()[i];
        let gh = bundle.grad_h()[i];
        let flux = (n + 2.0) * dot2(&gh, &gh) + h * dot2(&gh, &grad_sigma[i]) / bundle.sigma_n()[i];
        flux * full[i] * dv(bundle, i)
    })
}

/// Integration-by-parts identity
///
/// `∫⟨hX, ∇log(h^{n+2}/κ)⟩ e^{−|X|^α} dV
///   = n∫|∇h|²e^{−|X|^α}dV − ∫hΔh e^{−|X|^α}dV + α∫|X|^{α−1}e^{−|X|^α}h⟨∇h,∇|X|⟩dV`.
///
/// The left side differentiates `σ_n` numerically, so this exercises third
/// derivatives of `h`. The natural scale is `∫ h² e^{−|X|^α} dV`.
pub fn check_ibp_identity(bundle: &CurvatureBundle, alpha: f64) -> Result<IdentityReport> {
    check_alpha(bundle, alpha)?;
    let n = bundle.dim() as f64;
    let w = AlphaWeights::new(bundle, alpha);
    let lhs = log_curvature_flux(bundle, &w.full);
    let grad_term = n * integrate(bundle, |i| bundle.grad_h_sq(i) * w.full[i] * dv(bundle, i));
    let lap: Vec<f64> = (0..bundle.len())
        .map(|i| {
            let m = &bundle.hess_h()[i];
            if bundle.dim() == 1 {
                m[0][0]
            } else {
                m[0][0] + m[1][1]
            }
        })
        .collect();
    let lap_term = -integrate(bundle, |i| bundle.h()[i] * lap[i] * w.full[i] * dv(bundle, i));
    let alpha_term = alpha
        * integrate(bundle, |i| {
            bundle.x_norm()[i].powf(alpha - 1.0) * w.full[i] * w.h_cross[i] * dv(bundle, i)
        });
    let natural = integrate(bundle, |i| bundle.h()[i].powi(2) * w.full[i] * dv(bundle, i));
    Ok(IdentityReport::new(
        "ibp",
        bundle,
        vec![
            term("∫⟨hX,∇log(h^{n+2}/κ)⟩e^{-|X|^α}dV", Side::Lhs, lhs),
            term("n∫|∇h|²e^{-|X|^α}dV", Side::Rhs, grad_term),
            term("-∫hΔhe^{-|X|^α}dV", Side::Rhs, lap_term),
            term("α∫|X|^{α-1}e^{-|X|^α}h⟨∇h,∇|X|⟩dV", Side::Rhs, alpha_term),
        ],
        natural,
    ))
}

/// `∫⟨hX, ∇log(h^{n+2}/κ)⟩e^{−|X|^α}dV ≤ n|∫e^{−|X|^α/2}XdV|²/∫dV + (α²/4)∫|X|^{2α−1}e^{−|X|^α}h⟨∇h,∇|X|⟩dV`.
pub fn check_iu(bundle: &CurvatureBundle, alpha: f64, tol: f64) -> Result<InequalityReport> {
    check_alpha(bundle, alpha)?;
    let w = AlphaWeights::new(bundle, alpha);
    let vt = VectorTerms::new(bundle, alpha, &w);
    let lhs = log_curvature_flux(bundle, &w.full);
    Ok(InequalityReport::from_terms(
        "iu",
        bundle,
        vec![
            term("∫⟨hX,∇log(h^{n+2}/κ)⟩e^{-|X|^α}dV", Side::Lhs, lhs),
            term("n|∫e^{-|X|^α/2}XdV|²/∫dV", Side::Rhs, vt.mean),
            term("(α²/4)∫|X|^{2α-1}e^{-|X|^α}h⟨∇h,∇|X|⟩dV", Side::Rhs, vt.quadratic),
        ],
        tol,
        vt.natural,
    )
    .with_diagnostics(vec![diag("alpha", alpha)]))
}

/// Vector identity for solutions of the isotropic equation:
/// `∫e^{−|X|²/2}X dV = ((p+1+n)/n) ∫e^{−|X|²/2}∇h dV`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentIdentity {
    pub x_moment: Vec<f64>,
    pub gradient_moment: Vec<f64>,
    pub abs_error: f64,
}

/// All links of the uniqueness argument evaluated with `α = 2` on a
/// (near-)solution of the isotropic equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub dimension: usize,
    pub resolution: usize,
    pub p: f64,
    pub c: f64,
    pub max_residual: f64,
    pub residual_tolerance: f64,
    pub max_radius: f64,
    /// Direct evaluation against the form obtained by substituting the equation.
    pub substitution: IdentityReport,
    pub reduced: InequalityReport,
    pub moment: MomentIdentity,
    pub cauchy_schwarz: InequalityReport,
    pub final_inequality: InequalityReport,
    /// `∫|∇h|² dV`; zero exactly when the body is a centred ball.
    pub gradient_energy: f64,
}

impl ChainReport {
    pub fn inequality_links(&self) -> [&InequalityReport; 3] {
        [&self.reduced, &self.cauchy_schwarz, &self.final_inequality]
    }

    /// Smallest margin over the inequality links, each relative to its larger side.
    pub fn min_relative_margin(&self) -> f64 {
        self.inequality_links()
            .iter()
            .map(|r| r.relative_margin())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn any_violation(&self) -> bool {
        self.inequality_links().iter().any(|r| r.verdict.is_violation())
    }
}

pub fn check_main_chain(
    bundle: &CurvatureBundle,
    p: f64,
    c: f64,
    residual_tol: f64,
    tol: f64,
) -> Result<ChainReport> {
    let max_residual = isotropic_residual(bundle, p, c).max_abs();
    if !(max_residual <= residual_tol) {
        return Err(Error::NotASolution {
            residual: max_residual,
            tolerance: residual_tol,
        });
    }
    let alpha = CHAIN_ALPHA;
    let dim = bundle.dim();
    let n = dim as f64;
    let w = AlphaWeights::new(bundle, alpha);
    let vt = VectorTerms::new(bundle, alpha, &w);
    let grad_energy_e = integrate(bundle, |i| w.full[i] * bundle.grad_h_sq(i) * dv(bundle, i));
    let half_linear = 0.5 * alpha * vt.linear_base;

    // ∫⟨h^{-n}X, ∇(h^{n+2}σ_n)⟩ e^{−|X|^α} dσ with the gradient taken numerically.
    let u: Vec<f64> = (0..bundle.len())
        .map(|i| bundle.h()[i].powi(dim as i32 + 2) * bundle.sigma_n()[i])
        .collect();
    let grad_u = bundle.scheme().grad_values(&u);
    let direct = integrate(bundle, |i| {
        bundle.h()[i].powi(-(dim as i32)) * dot2(&bundle.grad_h()[i], &grad_u[i]) * w.full[i]
    });
    let natural = integrate(bundle, |i| bundle.h()[i].powi(2) * w.full[i] * dv(bundle, i));
    let substitution = IdentityReport::new(
        "substitution",
        bundle,
        vec![
            term("∫⟨h^{-n}X,∇(h^{n+2}/κ)⟩e^{-|X|^α}dσ", Side::Lhs, direct),
            term("(n+1+p)∫|∇h|²e^{-|X|^α}dV", Side::Rhs, (n + 1.0 + p) * grad_energy_e),
            term("(α/2)∫h⟨∇h,∇|X|⟩|X|^{α-1}e^{-|X|^α}dV", Side::Rhs, half_linear),
        ],
        natural,
    );

    let reduced = InequalityReport::from_terms(
        "reduced",
        bundle,
        vec![
            term("(n+1+p)∫|∇h|²e^{-|X|^α}dV", Side::Lhs, (n + 1.0 + p) * grad_energy_e),
            term("n|∫e^{-|X|^α/2}XdV|²/∫dV", Side::Rhs, vt.mean),
            term("(α²/4)∫|X|^{2α-1}e^{-|X|^α}h⟨∇h,∇|X|⟩dV", Side::Rhs, vt.quadratic),
            term("-(α/2)∫h⟨∇h,∇|X|⟩|X|^{α-1}e^{-|X|^α}dV", Side::Rhs, -half_linear),
        ],
        tol,
        natural,
    );

    let factor = (p + 1.0 + n) / n;
    let mut grad_moment = [0.0; 3];
    for (comp, slot) in grad_moment.iter_mut().enumerate() {
        *slot = factor
            * integrate(bundle, |i| {
                let g = bundle.scheme().to_ambient(i, &bundle.grad_h()[i]);
                w.half[i] * g[comp] * dv(bundle, i)
            });
    }
    let diff = [
        vt.moment[0] - grad_moment[0],
        vt.moment[1] - grad_moment[1],
        vt.moment[2] - grad_moment[2],
    ];
    let amb = dim + 1;
    let moment = MomentIdentity {
        x_moment: vt.moment[..amb].to_vec(),
        gradient_moment: grad_moment[..amb].to_vec(),
        abs_error: dot3(&diff, &diff).sqrt(),
    };

    let grad_abs = integrate(bundle, |i| w.half[i] * bundle.grad_h_sq(i).sqrt() * dv(bundle, i));
    let middle = n * factor * factor * grad_abs * grad_abs / vt.volume;
    let cauchy_schwarz = InequalityReport::from_terms(
        "cauchy-schwarz",
        bundle,
        vec![
            term("n|∫e^{-|X|^α/2}XdV|²/∫dV", Side::Lhs, vt.mean),
            term("((p+1+n)²/n)∫e^{-|X|^α}|∇h|²dV", Side::Rhs, (p + 1.0 + n).powi(2) / n * grad_energy_e),
        ],
        tol,
        natural,
    )
    .with_diagnostics(vec![diag("intermediate", middle)]);

    let final_inequality = InequalityReport::from_terms(
        "final",
        bundle,
        vec![
            term(
                "((n+1+p)(-1-p)/n)∫e^{-|X|^α}|∇h|²dV",
                Side::Lhs,
                (n + 1.0 + p) * (-1.0 - p) / n * grad_energy_e,
            ),
            term("(α²/4)∫|X|^{2α-1}e^{-|X|^α}h⟨∇h,∇|X|⟩dV", Side::Rhs, vt.quadratic),
            term("-(α/2)∫h⟨∇h,∇|X|⟩|X|^{α-1}e^{-|X|^α}dV", Side::Rhs, -half_linear),
        ],
        tol,
        natural,
    );

    Ok(ChainReport {
        dimension: dim,
        resolution: bundle.scheme().resolution(),
        p,
        c,
        max_residual,
        residual_tolerance: residual_tol,
        max_radius: crate::body::max_radius(bundle),
        substitution,
        reduced,
        moment,
        cauchy_schwarz,
        final_inequality,
        gradient_energy: integrate(bundle, |i| bundle.grad_h_sq(i) * dv(bundle, i)),
    })
}

/// Local Ehrhard-type inequality and, when `γ(K) ≥ 1/2`, its variant without
/// the mean term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpgReport {
    pub gaussian_volume: f64,
    pub log_profile_derivative: f64,
    pub full: InequalityReport,
    pub corollary: Option<InequalityReport>,
}

impl SpgReport {
    pub fn reports(&self) -> impl Iterator<Item = &InequalityReport> {
        std::iter::once(&self.full).chain(self.corollary.iter())
    }
}

/// `n∫f²hσ_n e^{−|X|²/2}dσ ≤ ∫h²σ_n^{ij}f_if_j e^{−|X|²/2}dσ + ∫f²h³σ_n e^{−|X|²/2}dσ
///   + ∫σ_n^{ij}h_i ∇_j|X| |X| f² h e^{−|X|²/2}dσ
///   + (log I_γ)'(γ(K)) (2π)^{-(n+1)/2} (∫f hσ_n e^{−|X|²/2}dσ)²`.
pub fn check_spg(bundle: &CurvatureBundle, f: &ScalarField, tol: f64) -> Result<SpgReport> {
    if f.values().len() != bundle.len() {
        return Err(Error::LengthMismatch {
            expected: bundle.len(),
            got: f.values().len(),
        });
    }
    let n = bundle.dim();
    let gamma = gaussian_volume(bundle)?;
    let log_deriv = ogive::log_profile_derivative(gamma);
    let fv = f.values();
    let grad = f.grad();
    let gauss: Vec<f64> = bundle.x_norm().iter().map(|r| (-0.5 * r * r).exp()).collect();

    let lhs = n as f64 * integrate(bundle, |i| fv[i] * fv[i] * dv(bundle, i) * gauss[i]);
    let t_grad = integrate(bundle, |i| {
        let h = bundle.h()[i];
        h * h * quad_form(&bundle.cofactor(n, i), &grad[i], &grad[i]) * gauss[i]
    });
    let t_support = integrate(bundle, |i| {
        let h = bundle.h()[i];
        fv[i] * fv[i] * h * h * gauss[i] * dv(bundle, i)
    });
    let t_radial = integrate(bundle, |i| {
        let q = quad_form(&bundle.cofactor(n, i), &bundle.grad_h()[i], &bundle.grad_x_norm()[i]);
        q * bundle.x_norm()[i] * fv[i] * fv[i] * bundle.h()[i] * gauss[i]
    });
    let inner = integrate(bundle, |i| fv[i] * dv(bundle, i) * gauss[i]);
    let t_mean = log_deriv * gaussian_normalization(n) * inner * inner;

    let base_terms = vec![
        term("n∫f²hσ_n e^{-|X|²/2}dσ", Side::Lhs, lhs),
        term("∫h²σ_n^{ij}f_if_j e^{-|X|²/2}dσ", Side::Rhs, t_grad),
        term("∫f²h²e^{-|X|²/2}hσ_n dσ", Side::Rhs, t_support),
        term("∫σ_n^{ij}h_i|X|_j|X|f²he^{-|X|²/2}dσ", Side::Rhs, t_radial),
    ];
    let mut full_terms = base_terms.clone();
    full_terms.push(term("(log I_γ)'(γ)(2π)^{-(n+1)/2}(∫fhσ_n e^{-|X|²/2}dσ)²", Side::Rhs, t_mean));
    let diagnostics = vec![diag("gamma", gamma), diag("log_profile_derivative", log_deriv)];
    let full = InequalityReport::from_terms("spg", bundle, full_terms, tol, 0.0).with_diagnostics(diagnostics.clone());
    let corollary = (gamma >= 0.5)
        .then(|| InequalityReport::from_terms("spg-corollary", bundle, base_terms, tol, 0.0).with_diagnostics(diagnostics));
    Ok(SpgReport {
        gaussian_volume: gamma,
        log_profile_derivative: log_deriv,
        full,
        corollary,
    })
}
