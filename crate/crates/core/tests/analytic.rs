use std::f64::consts::PI;

use hfbem::analytic::{CircleSeriesSpec, circle_density_on_grid, circle_total_field};
use hfbem::geometry::{IncidentWave, Vec2, make_circle};
use hfbem::nystrom::{GridOptions, PeriodicGrid, build_grid, solve_reference};
use proptest::prelude::*;

fn rel_l2(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn default_truncation_and_tail() {
    let spec = CircleSeriesSpec::new(1.0, 400.0).unwrap();
    let x: f64 = 400.0;
    assert!(spec.truncation() as f64 >= (x + 10.0 * x.cbrt() + 20.0).ceil());
    for m in spec.truncation() - 5..=spec.truncation() {
        assert!(spec.coefficient_modulus(m) < 1e-14);
    }
}

#[test]
fn truncation_robustness_at_kr_400() {
    let a = CircleSeriesSpec::new(1.0, 400.0).unwrap();
    let b = CircleSeriesSpec::with_truncation(1.0, 400.0, a.truncation() + 50).unwrap();
    for i in 0..64 {
        let th = i as f64 * 2.0 * PI / 64.0;
        let (u, v) = (circle_total_field(&a, th), circle_total_field(&b, th));
        assert!((u - v).norm() <= 1e-12, "θ = {th}");
    }
}

#[test]
fn illuminated_pole_doubling() {
    let spec = CircleSeriesSpec::new(1.0, 50.0).unwrap();
    let v = circle_total_field(&spec, PI).norm();
    assert!((v - 2.0).abs() <= 0.4, "|η(π)| = {v}");
}

proptest! {
    #[test]
    fn mirror_symmetry(th in 0.0..PI, k in 1.0f64..300.0) {
        let spec = CircleSeriesSpec::new(1.0, k).unwrap();
        let (a, b) = (circle_total_field(&spec, th), circle_total_field(&spec, -th));
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }
}

#[test]
fn grid_sampling_matches_pointwise_values() {
    let spec = CircleSeriesSpec::new(1.0, 20.0).unwrap();
    let g = PeriodicGrid::new(64, PI).unwrap();
    let eta = circle_density_on_grid(&spec, &g, Vec2::new(1.0, 0.0)).unwrap();
    for j in 0..64 {
        assert_eq!(eta.values[j], circle_total_field(&spec, g.node(j)));
    }
}

#[test]
fn rotating_incidence_and_grid_together_is_invariant() {
    let spec = CircleSeriesSpec::new(1.0, 30.0).unwrap();
    let n = 120;
    let g = PeriodicGrid::new(n, PI).unwrap();
    let base = circle_density_on_grid(&spec, &g, Vec2::new(1.0, 0.0)).unwrap();
    let shift = 7;
    let rotated = circle_density_on_grid(
        &spec,
        &g,
        Vec2::new(1.0, 0.0).rotated(shift as f64 * g.spacing()),
    )
    .unwrap();
    for j in 0..n {
        assert!((rotated.values[(j + shift) % n] - base.values[j]).norm() <= 1e-12);
    }
}

#[test]
fn agrees_with_nystrom_reference() {
    let c = make_circle(1.0).unwrap();
    for k in [50.0, 100.0, 200.0] {
        let wave = IncidentWave::new(Vec2::new(1.0, 0.0), k).unwrap();
        let grid = build_grid(&c, k, &GridOptions::default()).unwrap();
        let spec = CircleSeriesSpec::new(1.0, k).unwrap();
        let exact = circle_density_on_grid(&spec, &grid, Vec2::new(1.0, 0.0)).unwrap();
        let (eta, _) = solve_reference(&c, &wave, &GridOptions::default()).unwrap();
        let err = rel_l2(&eta.values, &exact.values);
        assert!(err <= 1e-6, "k = {k}: {err:e}");
    }
}
