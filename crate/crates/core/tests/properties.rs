use std::sync::Arc;

use gaussmink_core::body::{perturbed_ball, Shape, SupportField};
use gaussmink_core::gaussian::ogive;
use gaussmink_core::solver::{constant_solutions, g_profile, Branch};
use gaussmink_core::spectral::{
    check_hilbert_spectral, check_iu, check_spg, check_vector_inequality, Orthogonality,
};
use gaussmink_core::sphere::{QuadratureScheme, ScalarField, Vec3};
use proptest::prelude::*;

fn rotation(angles: [f64; 3]) -> [[f64; 3]; 3] {
    let (a, b, c) = (angles[0], angles[1], angles[2]);
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
        let mut z = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                z[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        z
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

/// `Rᵀ x`.
fn pull(r: &[[f64; 3]; 3], x: &Vec3) -> Vec3 {
    [0, 1, 2].map(|j| (0..3).map(|i| r[i][j] * x[i]).sum())
}

fn sample_rotated(s: &Arc<QuadratureScheme>, shape: &Shape, r: &[[f64; 3]; 3]) -> SupportField {
    SupportField::new(ScalarField::from_fn(s, |x| shape.support(&pull(r, x))).unwrap()).unwrap()
}

fn rel_gap(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minkowski_combination_is_linear_in_b(seed in 0u64..1000, a in 0.1f64..2.0, w in 0.1f64..2.0) {
        let s = QuadratureScheme::build(2, 12).unwrap();
        let (k, _) = perturbed_ball(&s, 0.8, 3, 0.1, seed).unwrap();
        let (l, _) = perturbed_ball(&s, 1.2, 3, 0.1, seed + 1).unwrap();
        let sum = k.combine(a, &l, w).unwrap();
        let (bk, bl, bs) = (k.bundle().unwrap(), l.bundle().unwrap(), sum.bundle().unwrap());
        for i in 0..bs.len() {
            for p in 0..2 {
                for q in 0..2 {
                    let expect = a * bk.b()[i][p][q] + w * bl.b()[i][p][q];
                    prop_assert!((bs.b()[i][p][q] - expect).abs() < 1e-11 * (1.0 + expect.abs()));
                }
            }
        }
    }

    #[test]
    fn ogive_round_trip(t in -8.0f64..=0.0) {
        // The lower tail keeps full relative precision; near 1 the probability itself has lost the digits.
        let v = ogive::cdf(t);
        let back = ogive::quantile(v);
        prop_assert!((back - t).abs() < 1e-9 * (1.0 + t.abs()));
        prop_assert!((ogive::upper_tail(-t) - v).abs() <= 1e-14 * v);
        prop_assert!((ogive::isoperimetric_profile(v) - ogive::isoperimetric_profile(1.0 - v)).abs() < 1e-12);
    }

    #[test]
    fn constant_solution_invariants(n in 1usize..=2, q in 0.0f64..1.0, c in 1e-3f64..6.0) {
        let p = -1.0 - q * n as f64;
        let g = g_profile(n, p).unwrap();
        let roots = constant_solutions(n, p, c).unwrap();
        prop_assert!(roots.windows(2).all(|w| w[0].radius < w[1].radius));
        for r in &roots {
            prop_assert!((g.g(r.radius) - c).abs() <= 1e-12 * c.max(1.0));
            match r.branch {
                Branch::Increasing => prop_assert!(r.radius <= g.t_star),
                Branch::Decreasing => prop_assert!(r.radius > g.t_star),
                Branch::Peak => prop_assert!(r.radius == g.t_star),
            }
        }
        let admissible = roots.iter().filter(|r| r.admissible).count();
        prop_assert_eq!(admissible, usize::from(c <= (-0.5f64).exp()));
        prop_assert!(g.g_max > (-0.5f64).exp());
    }

    #[test]
    fn inequalities_hold_on_random_bodies(n in 1usize..=2, seed in 0u64..10_000, r in 0.4f64..1.6, alpha in 0.5f64..3.0) {
        let s = QuadratureScheme::build(n, if n == 1 { 96 } else { 20 }).unwrap();
        let (body, _) = perturbed_ball(&s, r, 4, 0.15, seed).unwrap();
        let bd = body.bundle().unwrap();
        let f = ScalarField::from_fn(&s, |x| x[0] * x[1] - 0.3 * x[0] + x[n] * x[n]).unwrap();
        let reports = [
            check_hilbert_spectral(&bd, &f, n, 1e-7, Orthogonality::Project).unwrap(),
            check_vector_inequality(&bd, alpha, 1e-7).unwrap(),
            check_iu(&bd, alpha, 1e-7).unwrap(),
            check_spg(&bd, &f, 1e-7).unwrap().full,
        ];
        for rep in &reports {
            prop_assert!(rep.margin >= -1e-7 * rep.rhs.abs(), "{} {:e} {:e}", rep.name, rep.margin, rep.rhs);
        }
    }

    #[test]
    fn radial_gradient_identity(n in 1usize..=2, seed in 0u64..10_000, r in 0.5f64..1.5) {
        // |X| ⟨∇h, ∇|X|⟩ = Σ λ_i h_i², with ∇|X| differentiated numerically.
        let s = QuadratureScheme::build(n, if n == 1 { 128 } else { 32 }).unwrap();
        let (body, _) = perturbed_ball(&s, r, 4, 0.15, seed).unwrap();
        let bd = body.bundle().unwrap();
        let rhs: Vec<f64> = (0..bd.len()).map(|i| bd.eigen_weighted_grad_sq(i)).collect();
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        for (i, want) in rhs.iter().enumerate() {
            let got = bd.x_norm()[i] * bd.grad_h_dot_grad_x_norm(i);
            prop_assert!((got - want).abs() <= 1e-6 * scale, "node {}: {:e} vs {:e}", i, got, want);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn margins_are_rotation_invariant(seed in 0u64..1000, a in 0.0f64..6.3, b in 0.0f64..3.1, c in 0.0f64..6.3) {
        let s = QuadratureScheme::build(2, 40).unwrap();
        let (_, shape) = perturbed_ball(&s, 0.9, 3, 0.1, seed).unwrap();
        let id = rotation([0.0; 3]);
        let rot = rotation([a, b, c]);
        let test_fn = |x: &Vec3| x[0] * x[2] + 0.5 * x[1];
        let run = |r: &[[f64; 3]; 3]| {
            let bd = sample_rotated(&s, &shape, r).bundle().unwrap();
            let f = ScalarField::from_fn(&s, |x| test_fn(&pull(r, x))).unwrap();
            let h = check_hilbert_spectral(&bd, &f, 2, 1e-7, Orthogonality::Project).unwrap();
            let v = check_vector_inequality(&bd, 2.0, 1e-7).unwrap();
            let i = check_iu(&bd, 2.0, 1e-7).unwrap();
            let g = check_spg(&bd, &f, 1e-7).unwrap().full;
            [h, v, i, g]
        };
        for (x, y) in run(&id).iter().zip(run(&rot).iter()) {
            let scale = x.lhs.abs().max(x.rhs.abs());
            prop_assert!(rel_gap(x.margin, y.margin, scale) < 1e-9, "{}: {:e} vs {:e}", x.name, x.margin, y.margin);
        }
    }

    #[test]
    fn circle_margins_are_rotation_invariant(seed in 0u64..1000, a in 0.0f64..6.3) {
        let s = QuadratureScheme::build(1, 128).unwrap();
        let (_, shape) = perturbed_ball(&s, 1.1, 4, 0.1, seed).unwrap();
        let run = |r: &[[f64; 3]; 3]| {
            let bd = sample_rotated(&s, &shape, r).bundle().unwrap();
            let f = ScalarField::from_fn(&s, |x| { let y = pull(r, x); y[0] * y[1] + 0.2 * y[0] }).unwrap();
            [
                check_vector_inequality(&bd, 1.0, 1e-7).unwrap(),
                check_spg(&bd, &f, 1e-7).unwrap().full,
            ]
        };
        for (x, y) in run(&rotation([0.0; 3])).iter().zip(run(&rotation([a, 0.0, 0.0])).iter()) {
            let scale = x.lhs.abs().max(x.rhs.abs());
            prop_assert!(rel_gap(x.margin, y.margin, scale) < 1e-9);
        }
    }
}

#[test]
fn support_field_json_round_trip() {
    let s = QuadratureScheme::build(2, 10).unwrap();
    let (body, _) = perturbed_ball(&s, 0.9, 3, 0.1, 7).unwrap();
    let text = serde_json_like(&body);
    assert!(text.contains("s2-gauss-legendre"));
}

fn serde_json_like(body: &SupportField) -> String {
    // The core crate has no JSON dependency; the samples' Debug output is
    // enough to see the scheme id travels with them.
    let samples: gaussmink_core::body::BodySamples = body.clone().into();
    let back = SupportField::try_from(samples.clone()).unwrap();
    assert_eq!(back.values(), body.values());
    format!("{samples:?}")
}
