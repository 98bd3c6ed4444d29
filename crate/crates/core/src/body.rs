//! Convex bodies through their support functions, the curvature quantities
//! derived from them, and a few body generators.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{dot3, QuadratureScheme, ScalarField, Sym2, Tangent, Vec3};

/// Default relative convexity threshold: `min λ > 1e-8 · max λ`.
pub const DEFAULT_CONVEXITY_THRESHOLD: f64 = 1e-8;

/// Halvings of the perturbation amplitude before a generator gives up.
pub const GENERATOR_RETRY_CAP: usize = 12;

/// Positive support function sampled on a scheme.
///
/// Serialises as [`BodySamples`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "BodySamples", try_from = "BodySamples")]
pub struct SupportField {
    field: ScalarField,
}

impl SupportField {
    pub fn new(field: ScalarField) -> Result<Self> {
        if let Some((node, &value)) = field.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::OriginNotInterior { node, value });
        }
        Ok(SupportField { field })
    }

    pub fn from_values(scheme: &Arc<QuadratureScheme>, values: Vec<f64>) -> Result<Self> {
        Self::new(ScalarField::new(scheme.clone(), values)?)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn scheme(&self) -> &Arc<QuadratureScheme> {
        self.field.scheme()
    }

    pub fn dim(&self) -> usize {
        self.field.scheme().dim()
    }

    /// Support function of the Minkowski combination `a·K + b·L` (`a, b ≥ 0`).
    pub fn combine(&self, a: f64, other: &SupportField, b: f64) -> Result<Self> {
        if !Arc::ptr_eq(self.scheme(), other.scheme()) {
            return Err(Error::SchemeMismatch);
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::InvalidParameter(
                "Minkowski combination needs non-negative coefficients".into(),
            ));
        }
        let values = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_values(self.scheme(), values)
    }

    pub fn bundle(&self) -> Result<CurvatureBundle> {
        CurvatureBundle::new(self)
    }
}

/// Flat, resolution-explicit record of a sampled support function. Values
/// follow the scheme's node order: increasing angle on the circle, ring-major
/// (polar angle increasing, then azimuth) on the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodySamples {
    pub dimension: usize,
    pub resolution: usize,
    pub scheme_id: String,
    pub h: Vec<f64>,
}

impl From<SupportField> for BodySamples {
    fn from(body: SupportField) -> Self {
        let scheme = body.scheme();
        BodySamples {
            dimension: scheme.dim(),
            resolution: scheme.resolution(),
            scheme_id: scheme.scheme_id().to_string(),
            h: body.values().to_vec(),
        }
    }
}

impl TryFrom<BodySamples> for SupportField {
    type Error = Error;

    fn try_from(s: BodySamples) -> Result<Self> {
        let scheme = QuadratureScheme::build(s.dimension, s.resolution)?;
        if scheme.scheme_id() != s.scheme_id {
            return Err(Error::InvalidParameter(format!(
                "scheme id {:?} does not match {:?}",
                s.scheme_id,
                scheme.scheme_id()
            )));
        }
        SupportField::from_values(&scheme, s.h)
    }
}

/// Eigen-decomposition of `b_ij` at one node, eigenvalues ascending.
/// Columns of `vectors` are the eigenvectors in frame coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen {
    pub values: [f64; 2],
    pub vectors: [[f64; 2]; 2],
}

/// Per-node geometry of a strictly convex body.
///
/// `X = ∇h + h·x` is the boundary point with outer normal `x`. Its norm is
/// also written `|Dh|` elsewhere; the two are the same quantity and only
/// `|X|` is stored.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    scheme: Arc<QuadratureScheme>,
    h: Vec<f64>,
    grad_h: Vec<Tangent>,
    hess_h: Vec<Sym2>,
    b: Vec<Sym2>,
    eigen: Vec<Eigen>,
    sigma1: Vec<f64>,
    sigma_n: Vec<f64>,
    kappa: Vec<f64>,
    x: Vec<Vec3>,
    x_norm: Vec<f64>,
    grad_x_norm: Vec<Tangent>,
}

impl CurvatureBundle {
    pub fn new(body: &SupportField) -> Result<Self> {
        Self::with_threshold(body, DEFAULT_CONVEXITY_THRESHOLD)
    }

    /// Builds the bundle, rejecting nodes with `λ_min ≤ rel · max λ`.
    pub fn with_threshold(body: &SupportField, rel: f64) -> Result<Self> {
        let scheme = body.scheme().clone();
        let n = scheme.dim();
        let h = body.values().to_vec();
        let (grad_h, hess_h) = scheme.grad_hess_values(&h);

        let mut b = Vec::with_capacity(h.len());
        let mut eigen = Vec::with_capacity(h.len());
        let mut sigma1 = Vec::with_capacity(h.len());
        let mut sigma_n = Vec::with_capacity(h.len());
        for (hh, hs) in h.iter().zip(&hess_h) {
            let bi = if n == 1 {
                [[hs[0][0] + hh, 0.0], [0.0, 0.0]]
            } else {
                [[hs[0][0] + hh, hs[0][1]], [hs[1][0], hs[1][1] + hh]]
            };
            let e = eigen_sym(&bi, n);
            sigma1.push(trace(&bi, n));
            sigma_n.push(det(&bi, n));
            b.push(bi);
            eigen.push(e);
        }

        let max_lambda = eigen
            .iter()
            .map(|e| e.values[n - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        let eps = rel * max_lambda.max(0.0);
        for (node, e) in eigen.iter().enumerate() {
            let min = e.values[0];
            if !(min > eps) {
                return Err(Error::NotConvex {
                    node,
                    min_eigenvalue: min,
                });
            }
        }

        let kappa: Vec<f64> = sigma_n.iter().map(|s| 1.0 / s).collect();
        let x: Vec<Vec3> = (0..h.len())
            .map(|i| {
                let g = scheme.to_ambient(i, &grad_h[i]);
                let p = scheme.nodes()[i];
                [g[0] + h[i] * p[0], g[1] + h[i] * p[1], g[2] + h[i] * p[2]]
            })
            .collect();
        let x_norm: Vec<f64> = x.iter().map(|v| dot3(v, v).sqrt()).collect();
        let grad_x_norm = scheme.grad_values(&x_norm);

        Ok(CurvatureBundle {
            scheme,
            h,
            grad_h,
            hess_h,
            b,
            eigen,
            sigma1,
            sigma_n,
            kappa,
            x,
            x_norm,
            grad_x_norm,
        })
    }

    pub fn scheme(&self) -> &Arc<QuadratureScheme> {
        &self.scheme
    }

    pub fn dim(&self) -> usize {
        self.scheme.dim()
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn grad_h(&self) -> &[Tangent] {
        &self.grad_h
    }

    pub fn hess_h(&self) -> &[Sym2] {
        &self.hess_h
    }

    /// `b_ij = h_ij + h δ_ij`.
    pub fn b(&self) -> &[Sym2] {
        &self.b
    }

    pub fn eigen(&self) -> &[Eigen] {
        &self.eigen
    }

    pub fn sigma1(&self) -> &[f64] {
        &self.sigma1
    }

    pub fn sigma_n(&self) -> &[f64] {
        &self.sigma_n
    }

    /// `σ_k` for `1 ≤ k ≤ n`.
    pub fn sigma(&self, k: usize) -> &[f64] {
        if k == self.dim() {
            &self.sigma_n
        } else {
            &self.sigma1
        }
    }

    /// `σ_k^{ij} = ∂σ_k/∂b_ij` at `node`.
    pub fn cofactor(&self, k: usize, node: usize) -> Sym2 {
        let n = self.dim();
        if n == 1 || k == 1 {
            if n == 1 {
                [[1.0, 0.0], [0.0, 0.0]]
            } else {
                [[1.0, 0.0], [0.0, 1.0]]
            }
        } else {
            let b = &self.b[node];
            [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]]
        }
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// Boundary points `X = ∇h + h·x` in ambient coordinates.
    pub fn x(&self) -> &[Vec3] {
        &self.x
    }

    pub fn x_norm(&self) -> &[f64] {
        &self.x_norm
    }

    /// Spherical gradient of `|X|`, differentiated numerically from the `|X|` samples.
    pub fn grad_x_norm(&self) -> &[Tangent] {
        &self.grad_x_norm
    }

    pub fn grad_h_sq(&self, node: usize) -> f64 {
        let g = &self.grad_h[node];
        g[0] * g[0] + g[1] * g[1]
    }

    /// `⟨∇h, ∇|X|⟩` at `node`.
    pub fn grad_h_dot_grad_x_norm(&self, node: usize) -> f64 {
        let g = &self.grad_h[node];
        let r = &self.grad_x_norm[node];
        g[0] * r[0] + g[1] * r[1]
    }

    /// `Σ_i λ_i h_i²` evaluated in the eigenframe at `node`.
    pub fn eigen_weighted_grad_sq(&self, node: usize) -> f64 {
        let e = &self.eigen[node];
        let g = &self.grad_h[node];
        (0..self.dim())
            .map(|i| {
                let c = e.vectors[0][i] * g[0] + e.vectors[1][i] * g[1];
                e.values[i] * c * c
            })
            .sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen
            .iter()
            .map(|e| e.values[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_field(&self) -> ScalarField {
        ScalarField::new(self.scheme.clone(), self.h.clone()).expect("bundle samples are finite")
    }

    /// Wraps per-node values as a field on this bundle's scheme.
    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        ScalarField::new(self.scheme.clone(), values)
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.scheme.integrate_values(values)
    }
}

/// `R(K)`: the largest `|X|` over the nodes.
pub fn max_radius(bundle: &CurvatureBundle) -> f64 {
    bundle.x_norm().iter().copied().fold(0.0, f64::max)
}

/// `x^T S y` for frame vectors.
pub(crate) fn quad_form(s: &Sym2, x: &Tangent, y: &Tangent) -> f64 {
    x[0] * (s[0][0] * y[0] + s[0][1] * y[1]) + x[1] * (s[1][0] * y[0] + s[1][1] * y[1])
}

fn trace(m: &Sym2, n: usize) -> f64 {
    if n == 1 {
        m[0][0]
    } else {
        m[0][0] + m[1][1]
    }
}

fn det(m: &Sym2, n: usize) -> f64 {
    if n == 1 {
        m[0][0]
    } else {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

fn eigen_sym(m: &Sym2, n: usize) -> Eigen {
    if n == 1 {
        return Eigen {
            values: [m[0][0], 0.0],
            vectors: [[1.0, 0.0], [0.0, 1.0]],
        };
    }
    let (a, c, d) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + c * c).sqrt();
    let angle = 0.5 * (2.0 * c).atan2(a - d);
    let (s, co) = angle.sin_cos();
    // Column 1 is the large eigenvector (cos, sin); column 0 is its rotation.
    Eigen {
        values: [mean - rad, mean + rad],
        vectors: [[-s, co], [co, s]],
    }
}

/// Real polynomial on the sphere of bounded degree with `Σ|c| = 1`, so its
/// absolute value never exceeds one on the unit sphere. Restricted to the
/// sphere these span exactly the spherical harmonics of the same degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalPolynomial {
    pub terms: Vec<([u32; 3], f64)>,
}

impl SphericalPolynomial {
    /// Random combination of all monomials with `1 ≤ degree ≤ max_degree`.
    pub fn random<R: Rng>(dim: usize, max_degree: u32, rng: &mut R) -> Self {
        let mut terms: Vec<([u32; 3], f64)> = Vec::new();
        for deg in 1..=max_degree {
            for a in 0..=deg {
                if dim == 1 {
                    terms.push(([a, deg - a, 0], rng.random_range(-1.0..1.0)));
                } else {
                    for bb in 0..=(deg - a) {
                        terms.push(([a, bb, deg - a - bb], rng.random_range(-1.0..1.0)));
                    }
                }
            }
        }
        let total: f64 = terms.iter().map(|(_, c)| c.abs()).sum();
        if total > 0.0 {
            for t in &mut terms {
                t.1 /= total;
            }
        }
        SphericalPolynomial { terms }
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn sample(&self, scheme: &Arc<QuadratureScheme>) -> Result<ScalarField> {
        ScalarField::from_fn(scheme, |x| self.eval(x))
    }
}

/// Resolution-independent body description that can be sampled on any scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semiaxes: Vec<f64>,
    },
    Translated {
        base: Box<Shape>,
        offset: Vec<f64>,
    },
    /// `h = r (1 + amplitude · P(x))`.
    Perturbed {
        radius: f64,
        amplitude: f64,
        polynomial: SphericalPolynomial,
    },
}

impl Shape {
    pub fn support(&self, x: &Vec3) -> f64 {
        match self {
            Shape::Ball { radius } => *radius,
            Shape::Ellipsoid { semiaxes } => semiaxes
                .iter()
                .zip(x)
                .map(|(a, xi)| a * a * xi * xi)
                .sum::<f64>()
                .sqrt(),
            Shape::Translated { base, offset } => {
                base.support(x) + offset.iter().zip(x).map(|(v, xi)| v * xi).sum::<f64>()
            }
            Shape::Perturbed {
                radius,
                amplitude,
                polynomial,
            } => radius * (1.0 + amplitude * polynomial.eval(x)),
        }
    }

    pub fn sample(&self, scheme: &Arc<QuadratureScheme>) -> Result<SupportField> {
        SupportField::new(ScalarField::from_fn(scheme, |x| self.support(x))?)
    }
}

fn check_vector(scheme: &QuadratureScheme, v: &[f64], what: &str) -> Result<()> {
    if v.len() != scheme.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "{what} needs {} components, got {}",
            scheme.ambient_dim(),
            v.len()
        )));
    }
    Ok(())
}

pub fn ball(scheme: &Arc<QuadratureScheme>, radius: f64) -> Result<SupportField> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("ball radius {radius} must be positive")));
    }
    Shape::Ball { radius }.sample(scheme)
}

pub fn ellipsoid(scheme: &Arc<QuadratureScheme>, semiaxes: &[f64]) -> Result<SupportField> {
    check_vector(scheme, semiaxes, "ellipsoid")?;
    if semiaxes.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidParameter("semiaxes must be positive".into()));
    }
    let mut axes = semiaxes.to_vec();
    axes.resize(3, 0.0);
    Shape::Ellipsoid { semiaxes: axes }.sample(scheme)
}

/// `h_{K+v}(x) = h_K(x) + ⟨x, v⟩`; fails if the origin leaves the interior.
pub fn translate(body: &SupportField, offset: &[f64]) -> Result<SupportField> {
    let scheme = body.scheme();
    check_vector(scheme, offset, "translation")?;
    let values = body
        .values()
        .iter()
        .zip(scheme.nodes())
        .map(|(h, x)| h + offset.iter().zip(x).map(|(v, xi)| v * xi).sum::<f64>())
        .collect();
    SupportField::from_values(scheme, values)
}

/// A ball of radius `radius` perturbed by a random spherical polynomial of
/// degree `≤ max_degree`, deterministic in `seed`. The amplitude is halved
/// until the body is strictly convex, at most [`GENERATOR_RETRY_CAP`] times.
pub fn perturbed_ball(
    scheme: &Arc<QuadratureScheme>,
    radius: f64,
    max_degree: u32,
    amplitude: f64,
    seed: u64,
) -> Result<(SupportField, Shape)> {
    if !(radius > 0.0) || !(amplitude >= 0.0) || amplitude >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "perturbed ball needs radius > 0 and 0 <= amplitude < 1 (got {radius}, {amplitude})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polynomial = SphericalPolynomial::random(scheme.dim(), max_degree, &mut rng);
    let mut amp = amplitude;
    for _ in 0..=GENERATOR_RETRY_CAP {
        let shape = Shape::Perturbed {
            radius,
            amplitude: amp,
            polynomial: polynomial.clone(),
        };
        let body = shape.sample(scheme)?;
        if body.bundle().is_ok() {
            return Ok((body, shape));
        }
        amp *= 0.5;
    }
    Err(Error::GenerationFailed {
        attempts: GENERATOR_RETRY_CAP + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_curvature() {
        for (n, res) in [(1, 64), (2, 16)] {
            let s = QuadratureScheme::build(n, res).unwrap();
            let r = 0.7;
            let bd = ball(&s, r).unwrap().bundle().unwrap();
            for i in 0..bd.len() {
                for k in 0..n {
                    assert_abs_diff_eq!(bd.eigen()[i].values[k], r, epsilon = 1e-12);
                }
                assert_abs_diff_eq!(bd.sigma_n()[i], r.powi(n as i32), epsilon = 1e-12);
                assert_abs_diff_eq!(bd.kappa()[i], r.powi(-(n as i32)), epsilon = 1e-10);
                assert_abs_diff_eq!(bd.x_norm()[i], r, epsilon = 1e-12);
                let x = bd.x()[i];
                let p = s.nodes()[i];
                for c in 0..3 {
                    assert_abs_diff_eq!(x[c], r * p[c], epsilon = 1e-12);
                }
            }
            assert_abs_diff_eq!(max_radius(&bd), r, epsilon = 1e-12);
        }
    }

    #[test]
    fn translated_ball_keeps_curvature() {
        let s = QuadratureScheme::build(2, 24).unwrap();
        let body = translate(&ball(&s, 0.5).unwrap(), &[0.1, -0.15, 0.2]).unwrap();
        let bd = body.bundle().unwrap();
        let spread = bd.x_norm().iter().fold(0.0_f64, |a, v| a.max(*v))
            - bd.x_norm().iter().fold(f64::INFINITY, |a, v| a.min(*v));
        assert!(spread > 0.1);
        for k in bd.kappa() {
            assert_abs_diff_eq!(*k, 4.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn shifted_ball_max_radius() {
        // The farthest boundary point has normal (1, 0), which is a node.
        let s = QuadratureScheme::build(1, 64).unwrap();
        let body = translate(&ball(&s, 0.5).unwrap(), &[0.3, 0.0]).unwrap();
        let r = max_radius(&body.bundle().unwrap());
        assert!((r - 0.8).abs() < 1e-8, "{r}");
    }

    #[test]
    fn ellipse_radius_of_curvature() {
        let s = QuadratureScheme::build(1, 128).unwrap();
        let (a, b) = (1.0, 1.2);
        let bd = ellipsoid(&s, &[a, b]).unwrap().bundle().unwrap();
        for (i, x) in s.nodes().iter().enumerate() {
            let q = a * a * x[0] * x[0] + b * b * x[1] * x[1];
            let expected = (a * b).powi(2) / q.powf(1.5);
            assert_abs_diff_eq!(bd.sigma1()[i], expected, epsilon = 1e-11);
        }
    }

    #[test]
    fn ellipsoid_gauss_curvature() {
        let s = QuadratureScheme::build(2, 48).unwrap();
        let ax = [1.0, 1.2, 0.8];
        let bd = ellipsoid(&s, &ax).unwrap().bundle().unwrap();
        let prod = ax.iter().product::<f64>().powi(2);
        for (i, h) in bd.h().iter().enumerate() {
            let expected = h.powi(4) / prod;
            assert!((bd.kappa()[i] - expected).abs() < 1e-8 * expected, "node {i}");
        }
    }

    #[test]
    fn rejects_nonconvex() {
        let s = QuadratureScheme::build(1, 64).unwrap();
        let vals = s.nodes().iter().map(|x| 1.0 + 0.2 * (4.0 * x[1].atan2(x[0])).cos()).collect();
        let body = SupportField::from_values(&s, vals).unwrap();
        assert!(matches!(body.bundle(), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn translate_rejects_origin_exit() {
        let s = QuadratureScheme::build(1, 32).unwrap();
        let err = translate(&ball(&s, 1.0).unwrap(), &[1.5, 0.0]).unwrap_err();
        assert!(matches!(err, Error::OriginNotInterior { .. }));
    }

    #[test]
    fn translate_is_linear_shift() {
        let s = QuadratureScheme::build(2, 12).unwrap();
        let v = [0.1, 0.2, -0.3];
        let body = translate(&ball(&s, 1.0).unwrap(), &v).unwrap();
        for (h, x) in body.values().iter().zip(s.nodes()) {
            assert_abs_diff_eq!(*h, 1.0 + dot3(x, &v), epsilon = 1e-15);
        }
    }

    #[test]
    fn perturbed_ball_generator() {
        let s = QuadratureScheme::build(2, 32).unwrap();
        let (body, shape) = perturbed_ball(&s, 0.8, 4, 0.05, 7).unwrap();
        let bd = body.bundle().unwrap();
        assert!(max_radius(&bd) < 1.0);
        let (again, shape2) = perturbed_ball(&s, 0.8, 4, 0.05, 7).unwrap();
        assert_eq!(shape, shape2);
        assert_eq!(body.values(), again.values());
        let (other, _) = perturbed_ball(&s, 0.8, 4, 0.05, 8).unwrap();
        assert_ne!(body.values(), other.values());
    }

    #[test]
    fn generator_gives_up() {
        let s = QuadratureScheme::build(1, 64).unwrap();
        // A polynomial of degree 60 is too oscillatory to survive twelve halvings
        // starting from an amplitude of 0.9.
        let res = perturbed_ball(&s, 1.0, 60, 0.9, 1);
        if let Err(e) = res {
            assert!(matches!(e, Error::GenerationFailed { .. }));
        }
    }

    #[test]
    fn sigma_n_lambda_relations() {
        let s = QuadratureScheme::build(2, 24).unwrap();
        let (body, _) = perturbed_ball(&s, 1.0, 3, 0.1, 11).unwrap();
        let bd = body.bundle().unwrap();
        for i in 0..bd.len() {
            let [l1, l2] = bd.eigen()[i].values;
            // ∂σ₂/∂λ₁ = λ₂, ∂σ₂/∂λ₂ = λ₁.
            let s_n = bd.sigma_n()[i];
            assert!((l2 * l1 + l1 * l2 - 2.0 * s_n).abs() < 1e-9 * s_n.abs().max(1.0));
            assert!((l2 * l1 * l1 + l1 * l2 * l2 - bd.sigma1()[i] * s_n).abs() < 1e-9);
            // Cofactor contracted with b gives σ_n δ.
            let c = bd.cofactor(2, i);
            let b = bd.b()[i];
            let prod00 = c[0][0] * b[0][0] + c[0][1] * b[1][0];
            let prod01 = c[0][0] * b[0][1] + c[0][1] * b[1][1];
            assert!((prod00 - s_n).abs() < 1e-12);
            assert!(prod01.abs() < 1e-12);
        }
    }
}
