//! Quadrature and covariant calculus on the unit circle and the unit 2-sphere.
//!
//! Two node layouts are supported:
//!
//! * `n = 1`: `N` equally spaced angles `θ_j = 2πj/N` with uniform weights.
//!   Derivatives are spectral (trigonometric interpolation through an FFT).
//!   Quadrature is exact for trigonometric polynomials of degree `< N`.
//! * `n = 2`: `m` Gauss–Legendre rings in `cos θ` times `2m` uniform
//!   azimuths. The poles are never nodes. Azimuthal derivatives are spectral;
//!   polar derivatives use 13-point finite-difference stencils taken along the
//!   full great circle through both poles (meridian `φ` joined with meridian
//!   `φ + π`), so stencils near the poles do not need one-sided formulas.
//!   On these nearly uniform nodes the first derivative is twelfth order and
//!   the second derivative at least tenth order. Quadrature is exact for
//!   spherical polynomials of degree `≤ 2m − 1`.
//!
//! Covariant derivatives are expressed in the frame `(e_θ, e_φ)` for `n = 2`
//! and `e_1 = (−sin θ, cos θ)` for `n = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest accepted resolution for either dimension.
pub const MIN_RESOLUTION: usize = 8;

/// Half width of the polar finite-difference stencils on `S²`.
const STENCIL_HALF_WIDTH: usize = 6;

/// Ambient vector; the last component is zero when `n = 1`.
pub type Vec3 = [f64; 3];
/// Tangent vector in the local orthonormal frame; the second slot is zero when `n = 1`.
pub type Tangent = [f64; 2];
/// Symmetric matrix in the local orthonormal frame; only `[0][0]` is used when `n = 1`.
pub type Sym2 = [[f64; 2]; 2];

pub(crate) fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub struct QuadratureScheme {
    dim: usize,
    resolution: usize,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    frames: Vec<[Vec3; 2]>,
    ops: Operators,
}

enum Operators {
    Circle(Spectral),
    Sphere(SphereOps),
}

struct Spectral {
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

struct SphereOps {
    rings: usize,
    ring_len: usize,
    sin_theta: Vec<f64>,
    cot_theta: Vec<f64>,
    meridian: Vec<MeridianStencil>,
    azimuth: Spectral,
}

/// Stencil for ring `k`, expressed as positions on the great circle through
/// the poles: position `p < m` is ring `p` on meridian `φ`, position `p ≥ m`
/// is ring `2m − 1 − p` on meridian `φ + π`.
struct MeridianStencil {
    taps: Vec<usize>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl fmt::Debug for QuadratureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadratureScheme")
            .field("dim", &self.dim)
            .field("resolution", &self.resolution)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl QuadratureScheme {
    /// Builds the scheme for `S^n`. For `n = 1` the resolution is the node
    /// count; for `n = 2` it is the number of latitude rings.
    pub fn build(n: usize, resolution: usize) -> Result<Arc<Self>> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooLow {
                got: resolution,
                min: MIN_RESOLUTION,
            });
        }
        match n {
            1 => Ok(Arc::new(Self::circle(resolution))),
            2 => Ok(Arc::new(Self::sphere(resolution))),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    fn circle(count: usize) -> Self {
        let step = 2.0 * PI / count as f64;
        let mut nodes = Vec::with_capacity(count);
        let mut frames = Vec::with_capacity(count);
        for j in 0..count {
            let (s, c) = (step * j as f64).sin_cos();
            nodes.push([c, s, 0.0]);
            frames.push([[-s, c, 0.0], [0.0; 3]]);
        }
        QuadratureScheme {
            dim: 1,
            resolution: count,
            nodes,
            weights: vec![step; count],
            frames,
            ops: Operators::Circle(Spectral::new(count)),
        }
    }

    fn sphere(rings: usize) -> Self {
        let ring_len = 2 * rings;
        let (cos_theta, gl_weights) = gauss_legendre(rings);
        let theta: Vec<f64> = cos_theta.iter().map(|t| t.acos()).collect();
        let dphi = 2.0 * PI / ring_len as f64;

        let mut nodes = Vec::with_capacity(rings * ring_len);
        let mut frames = Vec::with_capacity(rings * ring_len);
        let mut weights = Vec::with_capacity(rings * ring_len);
        for (k, &th) in theta.iter().enumerate() {
            let (st, ct) = th.sin_cos();
            for j in 0..ring_len {
                let (sp, cp) = (dphi * j as f64).sin_cos();
                nodes.push([st * cp, st * sp, ct]);
                frames.push([[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]);
                weights.push(gl_weights[k] * dphi);
            }
        }

        // Great-circle coordinate of each stencil position.
        let psi: Vec<f64> = (0..ring_len)
            .map(|p| {
                if p < rings {
                    theta[p]
                } else {
                    2.0 * PI - theta[ring_len - 1 - p]
                }
            })
            .collect();
        let s = STENCIL_HALF_WIDTH.min(rings - 1);
        let meridian = (0..rings)
            .map(|k| {
                let mut taps = Vec::with_capacity(2 * s + 1);
                let mut offsets = Vec::with_capacity(2 * s + 1);
                for o in 0..=2 * s {
                    let p = (k + ring_len + o - s) % ring_len;
                    let mut d = psi[p] - psi[k];
                    if d > PI {
                        d -= 2.0 * PI;
                    } else if d < -PI {
                        d += 2.0 * PI;
                    }
                    taps.push(p);
                    offsets.push(d);
                }
                let w = fornberg_weights(0.0, &offsets, 2);
                MeridianStencil {
                    taps,
                    first: w[1].clone(),
                    second: w[2].clone(),
                }
            })
            .collect();

        QuadratureScheme {
            dim: 2,
            resolution: rings,
            nodes,
            weights,
            frames,
            ops: Operators::Sphere(SphereOps {
                rings,
                ring_len,
                sin_theta: theta.iter().map(|t| t.sin()).collect(),
                cot_theta: theta.iter().map(|t| t.cos() / t.sin()).collect(),
                meridian,
                azimuth: Spectral::new(ring_len),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Orthonormal tangent frame at each node (`e_2` is zero when `n = 1`).
    pub fn frames(&self) -> &[[Vec3; 2]] {
        &self.frames
    }

    /// Stable identifier of the node layout, used in body files.
    pub fn scheme_id(&self) -> &'static str {
        match self.dim {
            1 => "s1-uniform",
            _ => "s2-gauss-legendre",
        }
    }

    /// `|S^n|`: `2π` or `4π`.
    pub fn area(&self) -> f64 {
        if self.dim == 1 {
            2.0 * PI
        } else {
            4.0 * PI
        }
    }

    /// Highest total degree of spherical polynomials integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        match self.dim {
            1 => self.resolution - 1,
            _ => 2 * self.resolution - 1,
        }
    }

    /// `(rings, ring_len)`: nodes are stored ring-major with `ring_len`
    /// equally spaced azimuths `2πj / ring_len` per ring. The circle is one ring.
    pub fn ring_layout(&self) -> (usize, usize) {
        match &self.ops {
            Operators::Circle(_) => (1, self.nodes.len()),
            Operators::Sphere(ops) => (ops.rings, ops.ring_len),
        }
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Maps frame components to an ambient vector.
    pub fn to_ambient(&self, node: usize, t: &Tangent) -> Vec3 {
        let [e1, e2] = &self.frames[node];
        [
            t[0] * e1[0] + t[1] * e2[0],
            t[0] * e1[1] + t[1] * e2[1],
            t[0] * e1[2] + t[1] * e2[2],
        ]
    }

    /// Projects an ambient vector onto the frame at `node`.
    pub fn to_frame(&self, node: usize, v: &Vec3) -> Tangent {
        let [e1, e2] = &self.frames[node];
        [dot3(v, e1), dot3(v, e2)]
    }

    /// Covariant gradient of sampled values.
    pub fn grad_values(&self, values: &[f64]) -> Vec<Tangent> {
        match &self.ops {
            Operators::Circle(sp) => {
                let (d1, _) = sp.derivatives(values);
                d1.into_iter().map(|d| [d, 0.0]).collect()
            }
            Operators::Sphere(ops) => {
                let d = ops.first_derivatives(values);
                let mut out = Vec::with_capacity(values.len());
                for k in 0..ops.rings {
                    let st = ops.sin_theta[k];
                    for j in 0..ops.ring_len {
                        let i = k * ops.ring_len + j;
                        out.push([d.theta[i], d.phi[i] / st]);
                    }
                }
                out
            }
        }
    }

    /// Covariant Hessian of sampled values.
    pub fn hess_values(&self, values: &[f64]) -> Vec<Sym2> {
        self.grad_hess_values(values).1
    }

    /// Gradient and Hessian sharing one set of transforms.
    pub fn grad_hess_values(&self, values: &[f64]) -> (Vec<Tangent>, Vec<Sym2>) {
        match &self.ops {
            Operators::Circle(sp) => {
                let (d1, d2) = sp.derivatives(values);
                let g = d1.iter().map(|&d| [d, 0.0]).collect();
                let h = d2.iter().map(|&d| [[d, 0.0], [0.0, 0.0]]).collect();
                (g, h)
            }
            Operators::Sphere(ops) => {
                let d = ops.first_derivatives(values);
                let d_tt = ops.meridian_apply(values, |s| &s.second);
                let d_tp = ops.meridian_apply(&d.phi, |s| &s.first);
                let mut g = Vec::with_capacity(values.len());
                let mut h = Vec::with_capacity(values.len());
                for k in 0..ops.rings {
                    let st = ops.sin_theta[k];
                    let cot = ops.cot_theta[k];
                    for j in 0..ops.ring_len {
                        let i = k * ops.ring_len + j;
                        g.push([d.theta[i], d.phi[i] / st]);
                        let h11 = d_tt[i];
                        let h12 = (d_tp[i] - cot * d.phi[i]) / st;
                        let h22 = d.phi_phi[i] / (st * st) + cot * d.theta[i];
                        h.push([[h11, h12], [h12, h22]]);
                    }
                }
                (g, h)
            }
        }
    }
}

struct SphereDerivatives {
    theta: Vec<f64>,
    phi: Vec<f64>,
    phi_phi: Vec<f64>,
}

impl SphereOps {
    fn first_derivatives(&self, values: &[f64]) -> SphereDerivatives {
        let mut phi = Vec::with_capacity(values.len());
        let mut phi_phi = Vec::with_capacity(values.len());
        for ring in values.chunks(self.ring_len) {
            let (d1, d2) = self.azimuth.derivatives(ring);
            phi.extend(d1);
            phi_phi.extend(d2);
        }
        SphereDerivatives {
            theta: self.meridian_apply(values, |s| &s.first),
            phi,
            phi_phi,
        }
    }

    fn meridian_apply<F>(&self, values: &[f64], pick: F) -> Vec<f64>
    where
        F: Fn(&MeridianStencil) -> &Vec<f64>,
    {
        let m = self.rings;
        let len = self.ring_len;
        let mut out = vec![0.0; values.len()];
        for (k, st) in self.meridian.iter().enumerate() {
            let w = pick(st);
            for j in 0..len {
                let mut acc = 0.0;
                for (&p, &wt) in st.taps.iter().zip(w) {
                    let idx = if p < m {
                        p * len + j
                    } else {
                        (2 * m - 1 - p) * len + (j + m) % len
                    };
                    acc += wt * values[idx];
                }
                out[k * len + j] = acc;
            }
        }
        out
    }
}

impl Spectral {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            fft: planner.plan_fft_forward(len),
            ifft: planner.plan_fft_inverse(len),
        }
    }

    /// First and second derivatives of a 2π-periodic sample vector.
    fn derivatives(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = values.len();
        let mut spec: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft.process(&mut spec);
        let mut d1 = spec.clone();
        let mut d2 = spec;
        for k in 0..n {
            let wave = if 2 * k <= n { k as f64 } else { k as f64 - n as f64 };
            if 2 * k == n {
                // The Nyquist mode has no well-defined odd derivative.
                d1[k] = Complex::new(0.0, 0.0);
            } else {
                d1[k] *= Complex::new(0.0, wave);
            }
            d2[k] *= -wave * wave;
        }
        self.ifft.process(&mut d1);
        self.ifft.process(&mut d2);
        let scale = 1.0 / n as f64;
        (
            d1.iter().map(|c| c.re * scale).collect(),
            d2.iter().map(|c| c.re * scale).collect(),
        )
    }
}

/// Gauss–Legendre nodes (descending, so polar angle ascends) and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(m, t);
        nodes.push(t);
        weights.push(2.0 / ((1.0 - t * t) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(m: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Finite-difference weights (Fornberg's recursion) for derivatives
/// `0..=order` at `z` from samples at `x`. Returns `c[d][j]`.
pub(crate) fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One real value per node of a scheme.
#[derive(Clone, Debug)]
pub struct ScalarField {
    scheme: Arc<QuadratureScheme>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(scheme: Arc<QuadratureScheme>, values: Vec<f64>) -> Result<Self> {
        if values.len() != scheme.len() {
            return Err(Error::LengthMismatch {
                expected: scheme.len(),
                got: values.len(),
            });
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { node, value });
        }
        Ok(ScalarField { scheme, values })
    }

    pub fn from_fn<F: Fn(&Vec3) -> f64>(scheme: &Arc<QuadratureScheme>, f: F) -> Result<Self> {
        let values = scheme.nodes().iter().map(f).collect();
        Self::new(scheme.clone(), values)
    }

    pub fn constant(scheme: &Arc<QuadratureScheme>, value: f64) -> Result<Self> {
        Self::new(scheme.clone(), vec![value; scheme.len()])
    }

    pub fn scheme(&self) -> &Arc<QuadratureScheme> {
        &self.scheme
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integrate(&self) -> f64 {
        self.scheme.integrate_values(&self.values)
    }

    pub fn grad(&self) -> Vec<Tangent> {
        self.scheme.grad_values(&self.values)
    }

    pub fn hess(&self) -> Vec<Sym2> {
        self.scheme.hess_values(&self.values)
    }

    /// Spherical Laplacian, the trace of [`hess`](Self::hess).
    pub fn laplacian(&self) -> Vec<f64> {
        let n = self.scheme.dim();
        self.hess()
            .iter()
            .map(|m| if n == 1 { m[0][0] } else { m[0][0] + m[1][1] })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Square root of `∫ f² dσ`.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.scheme.integrate_values(&sq).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(QuadratureScheme::build(3, 16).unwrap_err(), Error::UnsupportedDimension(3));
        assert!(matches!(
            QuadratureScheme::build(1, 4),
            Err(Error::ResolutionTooLow { got: 4, min: 8 })
        ));
    }

    #[test]
    fn scheme_invariants() {
        for (n, res, nodes, tol) in [(1, 256, 256, 1e-12), (2, 48, 48 * 96, 1e-10)] {
            let s = QuadratureScheme::build(n, res).unwrap();
            assert_eq!(s.len(), nodes);
            let total: f64 = s.weights().iter().sum();
            assert_abs_diff_eq!(total, s.area(), epsilon = tol);
            for (x, [e1, e2]) in s.nodes().iter().zip(s.frames()) {
                assert_abs_diff_eq!(dot3(x, x), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(dot3(e1, e1), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(dot3(e1, x), 0.0, epsilon = 1e-12);
                if n == 2 {
                    assert_abs_diff_eq!(dot3(e2, e2), 1.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(dot3(e1, e2), 0.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(dot3(e2, x), 0.0, epsilon = 1e-12);
                    assert!(x[2].abs() < 1.0 - 1e-6, "pole in node set");
                }
            }
            assert!(s.weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn integrate_closed_forms() {
        let s1 = QuadratureScheme::build(1, 64).unwrap();
        assert_abs_diff_eq!(ScalarField::constant(&s1, 1.0).unwrap().integrate(), 2.0 * PI, epsilon = 1e-12);
        let s2 = QuadratureScheme::build(2, 24).unwrap();
        let v = [0.48, -0.6, 0.64];
        let lin = ScalarField::from_fn(&s2, |x| dot3(x, &v)).unwrap();
        assert_abs_diff_eq!(lin.integrate(), 0.0, epsilon = 1e-10);
        let sq = ScalarField::from_fn(&s2, |x| dot3(x, &v).powi(2)).unwrap();
        assert_abs_diff_eq!(sq.integrate(), 4.0 * PI / 3.0, epsilon = 1e-8);
    }

    /// `∫_{S²} x^a y^b z^c dσ = 2 Γ(α)Γ(β)Γ(γ)/Γ(α+β+γ)` with `α = (a+1)/2`, zero for odd exponents.
    fn monomial_integral_s2(e: [i32; 3]) -> f64 {
        if e.iter().any(|k| k % 2 == 1) {
            return 0.0;
        }
        let g = |t: f64| libm::tgamma(t);
        let al: Vec<f64> = e.iter().map(|&k| (k as f64 + 1.0) / 2.0).collect();
        2.0 * g(al[0]) * g(al[1]) * g(al[2]) / g(al[0] + al[1] + al[2])
    }

    #[test]
    fn exactness_degree_s2() {
        let s = QuadratureScheme::build(2, 8).unwrap();
        let deg = s.exactness_degree() as i32;
        assert_eq!(deg, 15);
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                let c = deg - a - b;
                for e in [[a, b, c], [a, b, 0], [0, b, c]] {
                    let f = ScalarField::from_fn(&s, |x| x[0].powi(e[0]) * x[1].powi(e[1]) * x[2].powi(e[2])).unwrap();
                    assert_abs_diff_eq!(f.integrate(), monomial_integral_s2(e), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn exactness_degree_s1() {
        let s = QuadratureScheme::build(1, 9).unwrap();
        for k in 1..=s.exactness_degree() {
            let f = ScalarField::from_fn(&s, |x| (k as f64 * x[1].atan2(x[0])).cos()).unwrap();
            assert_abs_diff_eq!(f.integrate(), 0.0, epsilon = 1e-13);
        }
        // Degree N aliases onto the constant mode.
        let f = ScalarField::from_fn(&s, |x| (9.0 * x[1].atan2(x[0])).cos()).unwrap();
        assert!((f.integrate() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_linear_function() {
        let v = [0.3, -0.5, 0.81];
        for (n, res, tol) in [(1, 32, 1e-12), (2, 32, 1e-10)] {
            let s = QuadratureScheme::build(n, res).unwrap();
            let v = if n == 1 { [0.3, -0.5, 0.0] } else { v };
            let f = ScalarField::from_fn(&s, |x| dot3(x, &v)).unwrap();
            let g = f.grad();
            for (i, x) in s.nodes().iter().enumerate() {
                let amb = s.to_ambient(i, &g[i]);
                let xv = dot3(x, &v);
                for c in 0..3 {
                    assert_abs_diff_eq!(amb[c], v[c] - xv * x[c], epsilon = tol);
                }
            }
            let hs = f.hess();
            for (i, m) in hs.iter().enumerate() {
                let fv = f.values()[i];
                for a in 0..n {
                    for b in 0..n {
                        let d = if a == b { fv } else { 0.0 };
                        assert_abs_diff_eq!(m[a][b] + d, 0.0, epsilon = tol);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_field_derivatives_vanish() {
        for (n, res) in [(1, 40), (2, 20)] {
            let s = QuadratureScheme::build(n, res).unwrap();
            let f = ScalarField::constant(&s, 1.0).unwrap();
            assert!(f.grad().iter().all(|g| g[0].abs() < 1e-10 && g[1].abs() < 1e-10));
            assert!(f.hess().iter().all(|m| m.iter().flatten().all(|v| v.abs() < 1e-10)));
        }
    }

    #[test]
    fn circle_product_derivatives() {
        // f = <x,v><x,w> = (v·x)(w·x); f' = (v·t)(w·x) + (v·x)(w·t), t = (-sin, cos).
        let s = QuadratureScheme::build(1, 48).unwrap();
        let (v, w) = ([0.7, -0.2, 0.0], [0.1, 0.9, 0.0]);
        let f = ScalarField::from_fn(&s, |x| dot3(x, &v) * dot3(x, &w)).unwrap();
        let g = f.grad();
        let hs = f.hess();
        for (i, x) in s.nodes().iter().enumerate() {
            let t = [-x[1], x[0], 0.0];
            let d1 = dot3(&v, &t) * dot3(&w, x) + dot3(&v, x) * dot3(&w, &t);
            let d2 = 2.0 * dot3(&v, &t) * dot3(&w, &t) - 2.0 * dot3(&v, x) * dot3(&w, x);
            assert_abs_diff_eq!(g[i][0], d1, epsilon = 1e-12);
            assert_abs_diff_eq!(hs[i][0][0], d2, epsilon = 1e-12);
        }
    }

    #[test]
    fn circle_hessian_of_quadratic_perturbation() {
        let s = QuadratureScheme::build(1, 64).unwrap();
        let eps = 0.05;
        let v = [0.6, 0.8, 0.0];
        let f = ScalarField::from_fn(&s, |x| 1.0 + eps * dot3(x, &v).powi(2)).unwrap();
        let hs = f.hess();
        for (i, x) in s.nodes().iter().enumerate() {
            let th = x[1].atan2(x[0]) - v[1].atan2(v[0]);
            // h = 1 + ε cos²θ, h'' + h = 1 + ε(cos²θ − 2cos 2θ).
            let expected = 1.0 + eps * (th.cos().powi(2) - 2.0 * (2.0 * th).cos());
            assert_abs_diff_eq!(hs[i][0][0] + f.values()[i], expected, epsilon = 1e-12);
        }
    }

    fn sphere_test_function(x: &Vec3) -> f64 {
        (0.7 * x[0] - 0.3 * x[1] + 0.5 * x[2]).exp() + x[0] * x[1] * x[2]
    }

    /// Ambient gradient of the test function projected to the tangent plane.
    fn sphere_test_gradient(x: &Vec3) -> Vec3 {
        let e = (0.7 * x[0] - 0.3 * x[1] + 0.5 * x[2]).exp();
        let d = [0.7 * e + x[1] * x[2], -0.3 * e + x[0] * x[2], 0.5 * e + x[0] * x[1]];
        let r = dot3(&d, x);
        [d[0] - r * x[0], d[1] - r * x[1], d[2] - r * x[2]]
    }

    fn gradient_error(res: usize) -> f64 {
        let s = QuadratureScheme::build(2, res).unwrap();
        let f = ScalarField::from_fn(&s, sphere_test_function).unwrap();
        let g = f.grad();
        let mut err = 0.0_f64;
        for (i, x) in s.nodes().iter().enumerate() {
            let amb = s.to_ambient(i, &g[i]);
            let ex = sphere_test_gradient(x);
            for c in 0..3 {
                err = err.max((amb[c] - ex[c]).abs());
            }
        }
        err
    }

    #[test]
    fn sphere_gradient_converges() {
        let e8 = gradient_error(8);
        let e16 = gradient_error(16);
        let e32 = gradient_error(32);
        assert!(e16 < e8 * 0.01, "{e8} {e16}");
        assert!(e32 < 1e-9, "{e32}");
    }

    #[test]
    fn laplacian_of_harmonics() {
        // Degree-ℓ harmonics satisfy Δf = −ℓ(ℓ+1) f.
        let s = QuadratureScheme::build(2, 32).unwrap();
        let fs: [(fn(&Vec3) -> f64, f64); 3] = [
            (|x| x[0] * x[1], 6.0),
            (|x| 3.0 * x[2] * x[2] - 1.0, 6.0),
            (|x| x[0] * (x[0] * x[0] - 3.0 * x[1] * x[1]), 12.0),
        ];
        for (f, eig) in fs {
            let fld = ScalarField::from_fn(&s, f).unwrap();
            let lap = fld.laplacian();
            let ex: Vec<f64> = fld.values().iter().map(|v| -eig * v).collect();
            assert!(max_err(&lap, &ex) < 1e-9, "{}", max_err(&lap, &ex));
        }
    }

    #[test]
    fn divergence_identity() {
        // ∫⟨∇f, ∇g⟩ = −∫ f Δg.
        let g_fn = |x: &Vec3| (x[0] + 0.5 * x[2]).sin() + x[1] * x[1];
        let mut errs = Vec::new();
        for res in [8, 16, 32] {
            let s = QuadratureScheme::build(2, res).unwrap();
            let f = ScalarField::from_fn(&s, sphere_test_function).unwrap();
            let g = ScalarField::from_fn(&s, g_fn).unwrap();
            let gf = f.grad();
            let gg = g.grad();
            let lhs: Vec<f64> = gf.iter().zip(&gg).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).collect();
            let rhs: Vec<f64> = f.values().iter().zip(g.laplacian()).map(|(a, l)| -a * l).collect();
            errs.push((s.integrate_values(&lhs) - s.integrate_values(&rhs)).abs());
        }
        assert!(errs[1] < errs[0] * 0.1 && errs[2] < 1e-11, "{errs:?}");
    }

    #[test]
    fn gradient_commutes_with_rotation() {
        // Rotation about the x axis by 0.4 rad.
        let (sn, cs) = 0.4_f64.sin_cos();
        let rot = |x: &Vec3| [x[0], cs * x[1] - sn * x[2], sn * x[1] + cs * x[2]];
        let rot_t = |x: &Vec3| [x[0], cs * x[1] + sn * x[2], -sn * x[1] + cs * x[2]];
        let s = QuadratureScheme::build(2, 32).unwrap();
        let f = ScalarField::from_fn(&s, |x| sphere_test_function(&rot(x))).unwrap();
        let (g, hs) = s.grad_hess_values(f.values());
        for (i, x) in s.nodes().iter().enumerate() {
            let amb = s.to_ambient(i, &g[i]);
            let ex = rot_t(&sphere_test_gradient(&rot(x)));
            for c in 0..3 {
                assert_abs_diff_eq!(amb[c], ex[c], epsilon = 1e-9);
            }
            assert_eq!(hs[i][0][1], hs[i][1][0]);
        }
    }

    #[test]
    fn fornberg_reproduces_central_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(w[1][0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1][2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2][1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_legendre_weights() {
        let (t, w) = gauss_legendre(20);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // ∫ t^38 dt = 2/39 is integrated exactly by 20 points.
        let q: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(38)).sum();
        assert_abs_diff_eq!(q, 2.0 / 39.0, epsilon = 1e-14);
    }
}
