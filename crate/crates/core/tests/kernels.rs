use std::f64::consts::{PI, TAU};

use hfbem::geometry::{ParametricBoundary, make_circle, make_ellipse};
use hfbem::kernels::{DoubleLayerSplit, KernelSplit, TAYLOR_BRANCH_WIDTH, periodic_log};
use hfbem::nystrom::{PeriodicGrid, assemble};
use hfbem::specfun::hankel1;
use hfbem_testkit::{bessel_j, bessel_y, integrate};
use num_complex::Complex64;
use proptest::prelude::*;

fn hankel_kernel(curve: &ParametricBoundary, k: f64, t: f64, s: f64) -> Complex64 {
    let c = curve.chord(t, s);
    let r = c.norm();
    let q = c.dot(curve.normal(s));
    Complex64::new(0.0, 0.25 * k) * hankel1(1, k * r).unwrap() * (q / r)
}

fn reconstructed(split: &DoubleLayerSplit, half: f64, t: f64, s: f64) -> Complex64 {
    let (k1, k2) = split.split(t, s);
    k1 * periodic_log(t - s, half) + k2
}

#[test]
fn reconstruction_at_reference_point() {
    let c = make_circle(1.0).unwrap();
    let split = DoubleLayerSplit::new(&c, 10.0).unwrap();
    let want = hankel_kernel(&c, 10.0, 0.3, 1.7);
    let got = reconstructed(&split, PI, 0.3, 1.7);
    assert!(
        (got - want).norm() <= 1e-10 * want.norm(),
        "{got} vs {want}"
    );
    assert!((split.direct(0.3, 1.7) - want).norm() <= 1e-12 * want.norm());
}

#[test]
fn reconstruction_on_grid_of_pairs() {
    let curves = [
        make_circle(1.0).unwrap(),
        make_ellipse(1.3, 0.7, 0.4).unwrap(),
    ];
    for curve in &curves {
        let half = curve.half_period();
        for k in [1.0, 50.0, 400.0] {
            let split = DoubleLayerSplit::new(curve, k).unwrap();
            for a in 0..50 {
                for b in 0..50 {
                    // irrational offsets keep the pairs off the diagonal
                    let t = (a as f64 + 0.318) * 2.0 * half / 50.0;
                    let s = (b as f64 + 0.751) * 2.0 * half / 50.0;
                    let want = hankel_kernel(curve, k, t, s);
                    let got = reconstructed(&split, half, t, s);
                    assert!(
                        (got - want).norm() <= 1e-10 * want.norm(),
                        "k={k} t={t} s={s}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reconstruction_random_pairs(t in 0.0..TAU, s in 0.0..TAU, ki in 0usize..3) {
        let k = [1.0, 50.0, 400.0][ki];
        let curve = make_ellipse(1.0, 0.6, 0.0).unwrap();
        let half = curve.half_period();
        let (t, s) = (t * half / PI, s * half / PI);
        prop_assume!((t - s).abs() > 1e-3 && (t - s).abs() < 2.0 * half - 1e-3);
        let split = DoubleLayerSplit::new(&curve, k).unwrap();
        let want = hankel_kernel(&curve, k, t, s);
        let got = reconstructed(&split, half, t, s);
        prop_assert!((got - want).norm() <= 1e-10 * want.norm());
    }

    #[test]
    fn smooth_part_continuous_across_taylor_switch(s in 0.0..TAU, sign in prop::bool::ANY, ki in 0usize..3) {
        let k = [1.0, 50.0, 400.0][ki];
        let curve = make_ellipse(1.5, 0.5, 0.2).unwrap();
        let split = DoubleLayerSplit::new(&curve, k).unwrap();
        let dir = if sign { 1.0 } else { -1.0 };
        let inside = split.split(s + dir * TAYLOR_BRANCH_WIDTH * (1.0 - 1e-9), s);
        let outside = split.split(s + dir * TAYLOR_BRANCH_WIDTH * (1.0 + 1e-9), s);
        prop_assert!((inside.0 - outside.0).norm() < 1e-9);
        prop_assert!((inside.1 - outside.1).norm() < 1e-9);
    }
}

#[test]
fn smooth_part_tends_to_diagonal_limit() {
    let curve = make_ellipse(1.5, 0.5, 0.2).unwrap();
    let split = DoubleLayerSplit::new(&curve, 50.0).unwrap();
    for s in [0.0, 1.0, 2.5] {
        let d = split.split(s, s).1;
        let near = split.split(s + 1e-7, s).1;
        assert!((d - near).norm() < 1e-7, "{d} vs {near}");
    }
}

/// `∫₀^{2π} K(0, s) cos(ms) ds` on the unit circle, where
/// `K(0, s) = −(ik/8) R H⁽¹⁾₁(kR)` with `R = 2|sin(s/2)|`.
fn circle_eigenvalue_oracle(k: f64, m: i32) -> Complex64 {
    let mut acc = Complex64::default();
    let panels = 16;
    for p in 0..panels {
        let a = p as f64 * PI / panels as f64;
        let b = a + PI / panels as f64;
        let re = integrate(
            |s| {
                let r = 2.0 * (0.5 * s).sin();
                k / 8.0 * r * bessel_y(1, k * r) * (m as f64 * s).cos()
            },
            a,
            b,
            1e-14,
        );
        let im = integrate(
            |s| {
                let r = 2.0 * (0.5 * s).sin();
                -k / 8.0 * r * bessel_j(1, k * r) * (m as f64 * s).cos()
            },
            a,
            b,
            1e-14,
        );
        acc += Complex64::new(re, im);
    }
    2.0 * acc
}

#[test]
fn circle_operator_eigenvalues_match_quadrature_oracle() {
    let k = 10.0;
    let curve = make_circle(1.0).unwrap();
    let grid = PeriodicGrid::new(160, PI).unwrap();
    let wave = hfbem::geometry::IncidentWave::new(hfbem::geometry::Vec2::new(1.0, 0.0), k).unwrap();
    let split = DoubleLayerSplit::new(&curve, k).unwrap();
    let sys = assemble(&curve, &wave, &grid, &split).unwrap();
    let n = grid.len();
    for m in [0i32, 1, 5] {
        let oracle = circle_eigenvalue_oracle(k, m);
        let v: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, m as f64 * grid.node(j)))
            .collect();
        let av = sys.apply(&v);
        for i in (0..n).step_by(17) {
            // K v = (v − A v)/2
            let mu = (v[i] - av[i]) * 0.5 / v[i];
            assert!(
                (mu - oracle).norm() <= 1e-8 * oracle.norm(),
                "m={m} i={i}: {mu} vs {oracle}"
            );
        }
    }
}

#[test]
fn split_prepared_nodes_agree_with_pointwise_split() {
    let curve = make_ellipse(1.2, 0.8, 0.0).unwrap().shifted(0.3);
    let split = DoubleLayerSplit::new(&curve, 20.0).unwrap();
    let nodes: Vec<f64> = (0..12).map(|j| j as f64 * curve.length() / 12.0).collect();
    let prepared = split.prepare(&nodes);
    for i in 0..12 {
        for j in 0..12 {
            let a = split.split_nodes(&prepared, i, j);
            let b = split.split(nodes[i], nodes[j]);
            assert!((a.0 - b.0).norm() < 1e-13 && (a.1 - b.1).norm() < 1e-12);
        }
    }
}
