use std::f64::consts::{PI, TAU};

use hfbem::analytic::{CircleSeriesSpec, circle_density_on_grid};
use hfbem::geometry::{IncidentWave, ParametricBoundary, Vec2, make_circle, make_ellipse};
use hfbem::kernels::{DoubleLayerSplit, ZeroKernel};
use hfbem::nystrom::{
    DensityKind, DiscreteDensity, GridOptions, PeriodicGrid, assemble, build_grid,
    log_quadrature_weights, log_weight_profile, remodulate, slow_envelope, solve_reference,
};
use hfbem_testkit::integrate;
use num_complex::Complex64;
use proptest::prelude::*;

fn rel_l2(a: &DiscreteDensity, b: &DiscreteDensity) -> f64 {
    let num: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let den: f64 = b.values.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn x_wave(k: f64) -> IncidentWave {
    IncidentWave::new(Vec2::new(1.0, 0.0), k).unwrap()
}

#[test]
fn grid_sizes() {
    let c = make_circle(1.0).unwrap();
    assert_eq!(
        build_grid(&c, 50.0, &GridOptions::default()).unwrap().len(),
        600
    );
    assert_eq!(
        build_grid(&c, 50.0, &GridOptions::with_ppw(10.1))
            .unwrap()
            .len(),
        506
    );
    let e = make_ellipse(1.0, 0.5, 0.0).unwrap();
    let n = build_grid(&e, 100.0, &GridOptions::default())
        .unwrap()
        .len();
    let target = 12.0 * 100.0 * e.length() / TAU;
    assert_eq!(n % 2, 0);
    assert!(n as f64 >= target && (n as f64) < target + 2.0);
}

#[test]
fn grid_nodes_uniform() {
    let g = PeriodicGrid::new(600, PI).unwrap();
    let nodes = g.nodes();
    for w in nodes.windows(2) {
        assert!((w[1] - w[0] - g.spacing()).abs() < 1e-14);
    }
}

#[test]
fn log_weights_sum_to_zero_and_are_circulant() {
    for (n, half) in [(64, PI), (100, 2.7), (506, 1.3)] {
        let g = PeriodicGrid::new(n, half).unwrap();
        let profile = log_weight_profile(&g);
        let scale: f64 = profile.iter().map(|w| w.abs()).sum();
        assert!(profile.iter().sum::<f64>().abs() < 1e-13 * scale);
        let w3 = log_quadrature_weights(&g, 3);
        for j in 0..n {
            assert_eq!(w3[j], profile[(j + n - 3) % n]);
        }
    }
}

#[test]
fn log_rule_matches_adaptive_oracle() {
    let half = 2.3;
    let g = PeriodicGrid::new(40, half).unwrap();
    let nodes = g.nodes();
    for i in [0usize, 7, 31] {
        let ti = nodes[i];
        let w = log_quadrature_weights(&g, i);
        for m in [1.0, 3.0] {
            let f = |s: f64| (m * PI * (s - ti) / half).cos();
            let rule: f64 = w.iter().zip(&nodes).map(|(w, &s)| w * f(s)).sum();
            // symmetric about the singularity: integrate u = s − t_i over (0, P]
            let oracle = 2.0
                * integrate(
                    |u| f(ti + u) * (4.0 * (0.5 * PI * u / half).sin().powi(2)).ln(),
                    0.0,
                    half,
                    1e-14,
                );
            assert!((rule - oracle).abs() < 1e-12, "m={m}: {rule} vs {oracle}");
            assert!((rule + 2.0 * half / m).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_kernel_gives_identity() {
    let c = make_circle(1.0).unwrap();
    let g = PeriodicGrid::new(32, PI).unwrap();
    let sys = assemble(&c, &x_wave(5.0), &g, &ZeroKernel).unwrap();
    for i in 0..32 {
        for j in 0..32 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_eq!(sys.matrix[(i, j)], Complex64::new(want, 0.0));
        }
    }
}

#[test]
fn double_layer_of_constant_matches_oracle() {
    let k = 10.0;
    let c = make_circle(1.0).unwrap();
    let g = PeriodicGrid::new(128, PI).unwrap();
    let split = DoubleLayerSplit::new(&c, k).unwrap();
    let sys = assemble(&c, &x_wave(k), &g, &split).unwrap();
    let ones = vec![Complex64::new(1.0, 0.0); 128];
    let a1 = sys.apply(&ones);
    // (K1)(t) = ∫ −(ik/8) R H1(kR) ds with R = 2|sin(s/2)|
    let re = integrate(
        |s| {
            let r = 2.0 * (0.5 * s).sin();
            k / 8.0 * r * hfbem_testkit::bessel_y(1, k * r)
        },
        0.0,
        TAU,
        1e-13,
    );
    let im = integrate(
        |s| {
            let r = 2.0 * (0.5 * s).sin();
            -k / 8.0 * r * hfbem_testkit::bessel_j(1, k * r)
        },
        0.0,
        TAU,
        1e-13,
    );
    let oracle = Complex64::new(re, im);
    for i in 0..128 {
        let k_row = (1.0 - a1[i]) * 0.5;
        assert!((k_row - oracle).norm() < 1e-8, "{k_row} vs {oracle}");
    }
}

#[test]
fn circle_matrix_is_circulant() {
    let c = make_circle(1.0).unwrap();
    let g = PeriodicGrid::new(96, PI).unwrap();
    let split = DoubleLayerSplit::new(&c, 7.0).unwrap();
    let sys = assemble(&c, &x_wave(7.0), &g, &split).unwrap();
    for i in 0..95 {
        for j in [0usize, 5, 40, 94] {
            let a = sys.matrix[(i, j)];
            let b = sys.matrix[(i + 1, (j + 1) % 96)];
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn circle_reference_matches_analytic_at_k50() {
    let c = make_circle(1.0).unwrap();
    let wave = x_wave(50.0);
    let (eta, report) = solve_reference(&c, &wave, &GridOptions::default()).unwrap();
    assert!(report.residual <= 1e-10, "residual {}", report.residual);
    let spec = CircleSeriesSpec::new(1.0, 50.0).unwrap();
    let exact = circle_density_on_grid(&spec, &eta.grid, Vec2::new(1.0, 0.0)).unwrap();
    let err = rel_l2(&eta, &exact);
    assert!(err <= 1e-6, "relative L2 error {err:e}");
}

#[test]
fn spectral_self_convergence_circle_k100() {
    let c = make_circle(1.0).unwrap();
    let wave = x_wave(100.0);
    let (coarse, _) = solve_reference(&c, &wave, &GridOptions::with_ppw(10.0)).unwrap();
    let (fine, _) = solve_reference(&c, &wave, &GridOptions::with_ppw(20.0)).unwrap();
    let up = coarse.resample(fine.grid.len()).unwrap();
    let diff = rel_l2(&up, &fine);
    assert!(diff <= 1e-8, "{diff:e}");
}

fn self_convergence(curve: &ParametricBoundary, k: f64) -> f64 {
    let wave = x_wave(k);
    let (a, _) = solve_reference(curve, &wave, &GridOptions::with_ppw(12.0)).unwrap();
    let (b, _) = solve_reference(curve, &wave, &GridOptions::with_ppw(16.0)).unwrap();
    rel_l2(&a.resample(b.grid.len()).unwrap(), &b)
}

#[test]
fn spectral_self_convergence_ppw12_vs_16() {
    let curves = [
        make_circle(1.0).unwrap(),
        make_ellipse(1.0, 0.5, 0.0).unwrap(),
    ];
    for curve in &curves {
        for k in [50.0, 100.0] {
            let d = self_convergence(curve, k);
            assert!(d <= 1e-7, "k={k}: {d:e}");
        }
    }
}

#[test]
fn zero_incident_field_gives_zero_density() {
    let c = make_ellipse(1.0, 0.7, 0.0).unwrap();
    let wave = x_wave(10.0);
    let g = build_grid(&c, 10.0, &GridOptions::default()).unwrap();
    let split = DoubleLayerSplit::new(&c, 10.0).unwrap();
    let mut sys = assemble(&c, &wave, &g, &split).unwrap();
    sys.rhs.iter_mut().for_each(|v| *v = Complex64::default());
    let (eta, _) = sys.solve().unwrap();
    assert!(eta.values.iter().all(|v| *v == Complex64::default()));
}

#[test]
fn envelope_round_trip_and_kind_checks() {
    let c = make_ellipse(1.0, 0.7, 0.3).unwrap();
    let wave = x_wave(20.0);
    let (eta, _) = solve_reference(&c, &wave, &GridOptions::default()).unwrap();
    let slow = slow_envelope(&eta, &c, &wave).unwrap();
    assert_eq!(slow.kind, DensityKind::SlowEnvelope);
    for (a, b) in slow.values.iter().zip(&eta.values) {
        assert!((a.norm() - b.norm()).abs() < 1e-15 * (1.0 + b.norm()));
    }
    let back = remodulate(&slow, &c, &wave).unwrap();
    for (a, b) in back.values.iter().zip(&eta.values) {
        assert!((a - b).norm() < 1e-15 * (1.0 + b.norm()) * 4.0);
    }
    assert!(slow_envelope(&slow, &c, &wave).is_err());
    assert!(remodulate(&eta, &c, &wave).is_err());
    assert!(slow_envelope(&eta, &c, &x_wave(21.0)).is_err());
}

fn deep_shadow_max(k: f64) -> f64 {
    let c = make_circle(1.0).unwrap();
    let wave = x_wave(k);
    let (eta, _) = solve_reference(&c, &wave, &GridOptions::default()).unwrap();
    let slow = slow_envelope(&eta, &c, &wave).unwrap();
    // deep shadow for α = (1, 0): polar angle within π/4 of 0
    (0..slow.grid.len())
        .filter(|&j| {
            let t = slow.grid.node(j);
            t <= PI / 4.0 || t >= 7.0 * PI / 4.0
        })
        .map(|j| slow.values[j].norm())
        .fold(0.0, f64::max)
}

#[test]
fn shadow_envelope_decays_with_wavenumber() {
    assert!(deep_shadow_max(200.0) < deep_shadow_max(50.0));
}

#[test]
fn rotating_incidence_permutes_circle_solution() {
    let c = make_circle(1.0).unwrap();
    let k = 30.0;
    let g = build_grid(&c, k, &GridOptions::default()).unwrap();
    let n = g.len();
    let shift = 5;
    let (a, _) = solve_reference(&c, &x_wave(k), &GridOptions::default()).unwrap();
    let dir = Vec2::new(1.0, 0.0).rotated(shift as f64 * g.spacing());
    let (b, _) = solve_reference(
        &c,
        &IncidentWave::new(dir, k).unwrap(),
        &GridOptions::default(),
    )
    .unwrap();
    for j in 0..n {
        assert!((b.values[(j + shift) % n] - a.values[j]).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn build_grid_is_smallest_even_cover(k in 1.0f64..300.0, ppw in 8.0f64..16.0, r in 0.2f64..3.0) {
        let c = make_circle(r).unwrap();
        let n = build_grid(&c, k, &GridOptions::with_ppw(ppw)).unwrap().len();
        let target = ppw * k * r;
        prop_assert_eq!(n % 2, 0);
        prop_assert!(n as f64 >= target * (1.0 - 1e-12));
        prop_assert!((n as f64) < target + 2.0);
    }
}
