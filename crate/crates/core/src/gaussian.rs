//! Gaussian volume, Gaussian and `L_p` Gaussian surface-area densities, and
//! the Gaussian ogive functions.

use std::f64::consts::PI;

use libm::{erf, erfc};

use crate::body::CurvatureBundle;
use crate::error::{Error, Result};
use crate::sphere::{dot3, ScalarField};

/// `(√(2π))^{-(n+1)}`.
pub fn gaussian_normalization(n: usize) -> f64 {
    (2.0 * PI).powf(-0.5 * (n as f64 + 1.0))
}

/// Standard normal density, distribution function, quantile and the
/// Gaussian isoperimetric profile `I_γ = φ ∘ Φ⁻¹`.
pub mod ogive {
    use super::*;

    pub fn density(t: f64) -> f64 {
        (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
    }

    pub fn cdf(t: f64) -> f64 {
        0.5 * erfc(-t / std::f64::consts::SQRT_2)
    }

    /// `1 − Φ(t)` without cancellation.
    pub fn upper_tail(t: f64) -> f64 {
        0.5 * erfc(t / std::f64::consts::SQRT_2)
    }

    /// `Φ⁻¹(v)` for `v ∈ (0, 1)`: Acklam's rational approximation followed by
    /// two Newton steps on `Φ`. Returns `±∞` at the endpoints and NaN outside.
    pub fn quantile(v: f64) -> f64 {
        if !(0.0..=1.0).contains(&v) {
            return f64::NAN;
        }
        if v == 0.0 {
            return f64::NEG_INFINITY;
        }
        if v == 1.0 {
            return f64::INFINITY;
        }
        let mut t = acklam(v);
        for _ in 0..2 {
            let d = density(t);
            if d == 0.0 {
                break;
            }
            if v > 0.5 {
                t += (upper_tail(t) - (1.0 - v)) / d;
            } else {
                t -= (cdf(t) - v) / d;
            }
        }
        t
    }

    fn acklam(p: f64) -> f64 {
        const A: [f64; 6] = [
            -3.969683028665376e+01,
            2.209460984245205e+02,
            -2.759285104469687e+02,
            1.383_577_518_672_69e2,
            -3.066479806614716e+01,
            2.506628277459239e+00,
        ];
        const B: [f64; 5] = [
            -5.447609879822406e+01,
            1.615858368580409e+02,
            -1.556989798598866e+02,
            6.680131188771972e+01,
            -1.328068155288572e+01,
        ];
        const C: [f64; 6] = [
            -7.784894002430293e-03,
            -3.223964580411365e-01,
            -2.400758277161838e+00,
            -2.549732539343734e+00,
            4.374664141464968e+00,
            2.938163982698783e+00,
        ];
        const D: [f64; 4] = [
            7.784695709041462e-03,
            3.224671290700398e-01,
            2.445134137142996e+00,
            3.754408661907416e+00,
        ];
        const LOW: f64 = 0.02425;
        if p < LOW {
            let q = (-2.0 * p.ln()).sqrt();
            (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        } else if p <= 1.0 - LOW {
            let q = p - 0.5;
            let r = q * q;
            (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
                / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
        } else {
            let q = (-2.0 * (1.0 - p).ln()).sqrt();
            -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        }
    }

    /// `I_γ(v) = φ(Φ⁻¹(v))`, zero at the endpoints.
    pub fn isoperimetric_profile(v: f64) -> f64 {
        if v <= 0.0 || v >= 1.0 {
            return 0.0;
        }
        density(quantile(v))
    }

    /// `(log I_γ)'(v) = −Φ⁻¹(v) / I_γ(v)`.
    pub fn log_profile_derivative(v: f64) -> f64 {
        let t = quantile(v);
        -t / density(t)
    }
}

/// `∫₀^ρ e^{−r²/2} rⁿ dr` in closed form.
pub fn radial_mass(n: usize, rho: f64) -> f64 {
    match n {
        1 => -(-0.5 * rho * rho).exp_m1(),
        _ => {
            (PI / 2.0).sqrt() * erf(rho / std::f64::consts::SQRT_2) - rho * (-0.5 * rho * rho).exp()
        }
    }
}

fn require_origin_interior(bundle: &CurvatureBundle) -> Result<()> {
    if let Some((node, &value)) = bundle.h().iter().enumerate().find(|(_, h)| **h <= 0.0) {
        return Err(Error::OriginNotInterior { node, value });
    }
    Ok(())
}

/// Gaussian volume `γ(K)` by polar integration.
///
/// The radial map `x ↦ X(x)/|X(x)|` is a diffeomorphism of the sphere for
/// origin-interior bodies, with solid-angle Jacobian `h σ_n / |X|^{n+1}`, so
///
/// `γ(K) = (2π)^{-(n+1)/2} ∫ M_n(|X|) h σ_n |X|^{-(n+1)} dσ`
///
/// with `M_n` the closed-form [`radial_mass`]. This keeps the spectral accuracy
/// of the node quadrature.
pub fn gaussian_volume(bundle: &CurvatureBundle) -> Result<f64> {
    require_origin_interior(bundle)?;
    let n = bundle.dim();
    let vals: Vec<f64> = (0..bundle.len())
        .map(|i| {
            let r = bundle.x_norm()[i];
            radial_mass(n, r) * bundle.h()[i] * bundle.sigma_n()[i] / r.powi(n as i32 + 1)
        })
        .collect();
    Ok(gaussian_normalization(n) * bundle.integrate(&vals))
}

/// Radial function at direction `u` from the polar-dual formula
/// `ρ(u) = min { h(x)/⟨x, u⟩ : ⟨x, u⟩ > δ }` over the nodes.
pub fn radial_function(bundle: &CurvatureBundle, u: &[f64; 3], delta: f64) -> f64 {
    bundle
        .scheme()
        .nodes()
        .iter()
        .zip(bundle.h())
        .filter_map(|(x, h)| {
            let c = dot3(x, u);
            (c > delta).then(|| h / c)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Gaussian volume through the polar-dual radial function sampled at the
/// nodes. Independent of the curvature data; first-order accurate in the
/// node spacing for bodies other than centred balls and `O(N²)` in cost.
pub fn gaussian_volume_polar_dual(bundle: &CurvatureBundle) -> Result<f64> {
    require_origin_interior(bundle)?;
    let n = bundle.dim();
    let vals: Vec<f64> = bundle
        .scheme()
        .nodes()
        .iter()
        .map(|u| radial_mass(n, radial_function(bundle, u, 1e-6)))
        .collect();
    Ok(gaussian_normalization(n) * bundle.integrate(&vals))
}

/// Density of `S_p(K, ·)` with respect to `dσ`:
/// `(2π)^{-(n+1)/2} h^{1−p} σ_n e^{−|X|²/2}`.
pub fn lp_gaussian_surface_density(bundle: &CurvatureBundle, p: f64) -> ScalarField {
    let norm = gaussian_normalization(bundle.dim());
    let vals = (0..bundle.len())
        .map(|i| {
            let r = bundle.x_norm()[i];
            norm * bundle.h()[i].powf(1.0 - p) * bundle.sigma_n()[i] * (-0.5 * r * r).exp()
        })
        .collect();
    bundle.field(vals).expect("density of a valid bundle is finite")
}

/// Density of `S(K, ·)`; identical to the `p = 1` case.
pub fn gaussian_surface_density(bundle: &CurvatureBundle) -> ScalarField {
    lp_gaussian_surface_density(bundle, 1.0)
}

/// `h^{1−p} σ_n e^{−|X|²/2} − c`, without the Gaussian normalisation.
pub fn isotropic_residual(bundle: &CurvatureBundle, p: f64, c: f64) -> ScalarField {
    let vals = (0..bundle.len())
        .map(|i| {
            let r = bundle.x_norm()[i];
            bundle.h()[i].powf(1.0 - p) * bundle.sigma_n()[i] * (-0.5 * r * r).exp() - c
        })
        .collect();
    bundle.field(vals).expect("residual of a valid bundle is finite")
}

#[cfg(test)]
mod tests {
    use super::ogive::*;
    use super::*;
    use crate::body::{ball, perturbed_ball, translate};
    use crate::sphere::QuadratureScheme;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ogive_fixed_points() {
        assert_eq!(quantile(0.5), 0.0);
        assert_abs_diff_eq!(isoperimetric_profile(0.5), 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-15);
        assert_eq!(log_profile_derivative(0.5), 0.0);
        assert!(log_profile_derivative(0.7) < 0.0);
        assert!(log_profile_derivative(0.3) > 0.0);
        assert!(quantile(-0.1).is_nan());
        assert_eq!(quantile(1.0), f64::INFINITY);
    }

    #[test]
    fn quantile_round_trip_dense_grid() {
        let mut v = 1e-8;
        while v < 1.0 - 1e-8 {
            let t = quantile(v);
            assert!((cdf(t) - v).abs() <= 1e-12, "v = {v}");
            v += 0.000_731;
        }
        for v in [1e-8, 1e-6, 1e-3, 1.0 - 1e-3, 1.0 - 1e-6, 1.0 - 1e-8] {
            assert!((cdf(quantile(v)) - v).abs() <= 1e-12, "v = {v}");
        }
    }

    #[test]
    fn quantile_known_values() {
        assert_abs_diff_eq!(quantile(0.975), 1.959963984540054, epsilon = 1e-13);
        assert_abs_diff_eq!(quantile(0.841344746068543), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn radial_mass_matches_quadrature() {
        for n in [1, 2] {
            let rho = 1.7;
            let steps = 20_000;
            let h = rho / steps as f64;
            // Simpson's rule.
            let f = |r: f64| (-0.5 * r * r).exp() * r.powi(n as i32);
            let mut s = f(0.0) + f(rho);
            for k in 1..steps {
                s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            assert_abs_diff_eq!(radial_mass(n, rho), s * h / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ball_volumes() {
        let s1 = QuadratureScheme::build(1, 64).unwrap();
        let g = gaussian_volume(&ball(&s1, 1.0).unwrap().bundle().unwrap()).unwrap();
        assert_abs_diff_eq!(g, 1.0 - (-0.5_f64).exp(), epsilon = 1e-12);
        let s2 = QuadratureScheme::build(2, 16).unwrap();
        let g = gaussian_volume(&ball(&s2, 2.0).unwrap().bundle().unwrap()).unwrap();
        let expected = erf(2.0_f64.sqrt()) - (2.0 / PI).sqrt() * 2.0 * (-2.0_f64).exp();
        assert_abs_diff_eq!(g, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(g, 0.738536, epsilon = 1e-6);
        let g = gaussian_volume(&ball(&s2, 40.0).unwrap().bundle().unwrap()).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn volume_monotone_in_radius() {
        let s = QuadratureScheme::build(2, 12).unwrap();
        let mut prev = 0.0;
        for k in 1..40 {
            let g = gaussian_volume(&ball(&s, 0.1 * k as f64).unwrap().bundle().unwrap()).unwrap();
            assert!(g > prev);
            prev = g;
        }
    }

    #[test]
    fn two_volume_routes_agree() {
        let s = QuadratureScheme::build(2, 24).unwrap();
        let body = translate(&perturbed_ball(&s, 0.9, 3, 0.08, 5).unwrap().0, &[0.1, 0.0, -0.05]).unwrap();
        let bd = body.bundle().unwrap();
        let a = gaussian_volume(&bd).unwrap();
        let b = gaussian_volume_polar_dual(&bd).unwrap();
        assert!((a - b).abs() < 5e-3, "{a} {b}");
    }

    #[test]
    fn surface_density_of_balls() {
        let s1 = QuadratureScheme::build(1, 32).unwrap();
        let d = gaussian_surface_density(&ball(&s1, 1.0).unwrap().bundle().unwrap());
        for v in d.values() {
            assert_abs_diff_eq!(*v, (-0.5_f64).exp() / (2.0 * PI), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(d.integrate(), (-0.5_f64).exp(), epsilon = 1e-12);

        let s2 = QuadratureScheme::build(2, 16).unwrap();
        let r: f64 = 0.5;
        let d = gaussian_surface_density(&ball(&s2, r).unwrap().bundle().unwrap());
        let expected = 4.0 * PI / (2.0 * PI).powf(1.5) * r * r * (-0.5 * r * r).exp();
        assert_abs_diff_eq!(d.integrate(), expected, epsilon = 1e-12);
    }

    #[test]
    fn lp_density_reduces_at_p_one() {
        let s = QuadratureScheme::build(2, 16).unwrap();
        let bd = perturbed_ball(&s, 1.0, 4, 0.05, 3).unwrap().0.bundle().unwrap();
        let a = gaussian_surface_density(&bd);
        let b = lp_gaussian_surface_density(&bd, 1.0);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn lp_density_of_ball() {
        let s = QuadratureScheme::build(2, 12).unwrap();
        let (r, p) = (0.8_f64, -2.0);
        let d = lp_gaussian_surface_density(&ball(&s, r).unwrap().bundle().unwrap(), p);
        let expected = gaussian_normalization(2) * (-0.5 * r * r).exp() * r.powf(3.0 - p);
        for v in d.values() {
            assert_abs_diff_eq!(*v, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn lp_density_recomposes() {
        let s = QuadratureScheme::build(2, 16).unwrap();
        let bd = perturbed_ball(&s, 0.9, 4, 0.05, 21).unwrap().0.bundle().unwrap();
        let d = lp_gaussian_surface_density(&bd, -2.0);
        for i in 0..bd.len() {
            let h = bd.h()[i];
            let x2 = bd.h()[i].powi(2) + bd.grad_h_sq(i);
            let sn = bd.b()[i][0][0] * bd.b()[i][1][1] - bd.b()[i][0][1].powi(2);
            let expected = gaussian_normalization(2) * h.powi(3) * sn * (-0.5 * x2).exp();
            assert!((d.values()[i] - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn residual_of_constant_solutions() {
        let s = QuadratureScheme::build(2, 12).unwrap();
        let bd = ball(&s, 1.0).unwrap().bundle().unwrap();
        let res = isotropic_residual(&bd, -2.0, (-0.5_f64).exp());
        assert!(res.max_abs() < 1e-10);
        let res = isotropic_residual(&bd, -2.0, 0.7);
        for v in res.values() {
            assert_abs_diff_eq!(*v, (-0.5_f64).exp() - 0.7, epsilon = 1e-12);
        }
        let r: f64 = 0.6;
        let bd = ball(&s, r).unwrap().bundle().unwrap();
        let c = r.powf(5.0) * (-0.5 * r * r).exp();
        assert!(isotropic_residual(&bd, -2.0, c).max_abs() < 1e-10);
    }
}
