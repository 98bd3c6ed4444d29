//! Checks against routes that share no code with the library: Monte Carlo
//! sampling, parametrised boundary integrals and analytic boundary maps.

use std::f64::consts::PI;

use gaussmink_core::body::{ellipsoid, max_radius, translate, ball, Shape};
use gaussmink_core::gaussian::{gaussian_surface_density, gaussian_volume, gaussian_volume_polar_dual};
use gaussmink_core::sphere::QuadratureScheme;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn monte_carlo(dim: usize, samples: usize, seed: u64, inside: impl Fn(&[f64; 3]) -> bool) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut y = [0.0; 3];
        for c in y.iter_mut().take(dim + 1) {
            *c = rng.sample(StandardNormal);
        }
        if inside(&y) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

#[test]
fn gaussian_volume_matches_monte_carlo() {
    let cases: Vec<(usize, usize, Shape, Box<dyn Fn(&[f64; 3]) -> bool>)> = vec![
        (
            1,
            128,
            Shape::Ellipsoid { semiaxes: vec![1.5, 0.7, 0.0] },
            Box::new(|y| (y[0] / 1.5).powi(2) + (y[1] / 0.7).powi(2) <= 1.0),
        ),
        (
            2,
            32,
            Shape::Ellipsoid { semiaxes: vec![1.2, 0.8, 1.6] },
            Box::new(|y| (y[0] / 1.2).powi(2) + (y[1] / 0.8).powi(2) + (y[2] / 1.6).powi(2) <= 1.0),
        ),
        (
            2,
            32,
            Shape::Translated {
                base: Box::new(Shape::Ball { radius: 1.0 }),
                offset: vec![0.3, -0.2, 0.4],
            },
            Box::new(|y| (y[0] - 0.3).powi(2) + (y[1] + 0.2).powi(2) + (y[2] - 0.4).powi(2) <= 1.0),
        ),
    ];
    for (i, (n, res, shape, inside)) in cases.into_iter().enumerate() {
        let s = QuadratureScheme::build(n, res).unwrap();
        let bd = shape.sample(&s).unwrap().bundle().unwrap();
        let gamma = gaussian_volume(&bd).unwrap();
        let (mc, se) = monte_carlo(n, 400_000, 17 + i as u64, inside);
        assert!((gamma - mc).abs() < 5.0 * se, "{shape:?}: {gamma} vs {mc} ± {se}");
        let dual = gaussian_volume_polar_dual(&bd).unwrap();
        assert!((gamma - dual).abs() < 5e-3, "{gamma} vs {dual}");
    }
}

/// `∫_{∂K} φ dH^n` for an ellipse/ellipsoid by parametrising the boundary.
fn ellipsoid_surface_mass(axes: &[f64]) -> f64 {
    if axes.len() == 2 {
        let m = 20_000;
        let (a, b) = (axes[0], axes[1]);
        (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                let (st, ct) = t.sin_cos();
                let y2 = (a * ct).powi(2) + (b * st).powi(2);
                let speed = ((a * st).powi(2) + (b * ct).powi(2)).sqrt();
                (-0.5 * y2).exp() / (2.0 * PI) * speed
            })
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64
    } else {
        // Midpoint rule in (θ, φ) on y = (a sinθ cosφ, b sinθ sinφ, c cosθ).
        let (a, b, c) = (axes[0], axes[1], axes[2]);
        let (mt, mp) = (1500, 3000);
        let (dt, dp) = (PI / mt as f64, 2.0 * PI / mp as f64);
        let mut total = 0.0;
        for i in 0..mt {
            let t = (i as f64 + 0.5) * dt;
            let (st, ct) = t.sin_cos();
            for j in 0..mp {
                let p = j as f64 * dp;
                let (sp, cp) = p.sin_cos();
                let y = [a * st * cp, b * st * sp, c * ct];
                let yt = [a * ct * cp, b * ct * sp, -c * st];
                let yp = [-a * st * sp, b * st * cp, 0.0];
                let cross = [
                    yt[1] * yp[2] - yt[2] * yp[1],
                    yt[2] * yp[0] - yt[0] * yp[2],
                    yt[0] * yp[1] - yt[1] * yp[0],
                ];
                let area = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
                let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                total += (-0.5 * r2).exp() * area;
            }
        }
        total * dt * dp / (2.0 * PI).powf(1.5)
    }
}

#[test]
fn gaussian_surface_measure_matches_boundary_integral() {
    let s = QuadratureScheme::build(1, 128).unwrap();
    let bd = ellipsoid(&s, &[1.4, 0.6]).unwrap().bundle().unwrap();
    let total = gaussian_surface_density(&bd).integrate();
    let oracle = ellipsoid_surface_mass(&[1.4, 0.6]);
    assert!((total - oracle).abs() < 1e-10, "{total} vs {oracle}");

    let s = QuadratureScheme::build(2, 48).unwrap();
    let axes = [1.1, 0.7, 1.3];
    let bd = ellipsoid(&s, &axes).unwrap().bundle().unwrap();
    let total = gaussian_surface_density(&bd).integrate();
    let oracle = ellipsoid_surface_mass(&axes);
    assert!((total - oracle).abs() < 1e-6 * oracle, "{total} vs {oracle}");
}

#[test]
fn closed_form_ball_values() {
    let s = QuadratureScheme::build(1, 64).unwrap();
    let bd = ball(&s, 1.0).unwrap().bundle().unwrap();
    assert!((gaussian_surface_density(&bd).integrate() - (-0.5_f64).exp()).abs() < 1e-12);
    assert!((gaussian_volume(&bd).unwrap() - (1.0 - (-0.5_f64).exp())).abs() < 1e-12);
}

#[test]
fn max_radius_matches_analytic_boundary_map() {
    // For an ellipsoid X(u) = A²u / |Au|, so |X| is known at every node.
    let s = QuadratureScheme::build(2, 40).unwrap();
    let axes = [1.3, 0.6, 0.9];
    let bd = ellipsoid(&s, &axes).unwrap().bundle().unwrap();
    let analytic = s
        .nodes()
        .iter()
        .map(|u| {
            let au: f64 = (0..3).map(|i| (axes[i] * u[i]).powi(2)).sum::<f64>().sqrt();
            (0..3).map(|i| (axes[i] * axes[i] * u[i] / au).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    assert!((max_radius(&bd) - analytic).abs() < 1e-8);
    assert!(max_radius(&bd) <= 1.3 + 1e-12 && max_radius(&bd) > 1.29);

    // Dense directional sampling of a translated circle: R = r + |v|.
    let s = QuadratureScheme::build(1, 720).unwrap();
    let body = translate(&ball(&s, 0.4).unwrap(), &[0.2, 0.1]).unwrap();
    let expected = 0.4 + (0.2_f64 * 0.2 + 0.1 * 0.1).sqrt();
    let got = max_radius(&body.bundle().unwrap());
    assert!(got <= expected + 1e-12 && expected - got < 1e-5, "{got} vs {expected}");
}
