//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the test fails at the end if any criterion did.
//!
//! Run with `cargo test -p hfbem --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use hfbem::analytic::{CircleSeriesSpec, circle_density_on_grid};
use hfbem::experiments::{
    GeometrySpec, Method, SweepConfig, boundary_layer_diagnostic, deep_shadow_max, run_sweep,
};
use hfbem::galerkin::relative_l2_error;
use hfbem::geometry::{IncidentWave, Vec2, make_circle, shadow_geometry};
use hfbem::nystrom::{GridOptions, solve_reference};
use hfbem::spaces::{
    CovParams, RegionScales, cov_partition, default_region_levels, freq_adapted_partition,
    invert_cov, optimal_epsilons,
};
use hfbem::specfun::{bessel_table, series_truncation};
use num_complex::Complex64;

const ALPHA: Vec2 = Vec2 { x: 1.0, y: 0.0 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hfbem-acceptance-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn wronskian() -> Outcome {
    let mut worst = 0.0f64;
    for &x in &[0.1f64, 1.0, 10.0, 100.0, 1000.0, 2000.0] {
        let max_order = (1.3 * x + 50.0).floor() as usize;
        let t = bessel_table(x, max_order).unwrap();
        if t.y_overflow_from.is_some() {
            return outcome(false, format!("Y_m overflows at x = {x}"));
        }
        let exact = 2.0 / (PI * x);
        for m in 0..=max_order {
            let w = t.j[m] * t.dy[m] - t.dj[m] * t.y[m];
            worst = worst.max((w - exact).abs() / exact);
        }
    }
    outcome(
        worst <= 1e-11,
        format!("worst relative error {worst:.2e} (limit 1e-11)"),
    )
}

fn jacobi_anger() -> Outcome {
    let mut worst = 0.0f64;
    for &kr in &[0.5, 1.0, 10.0, 100.0, 400.0, 800.0] {
        let m_max = series_truncation(kr);
        let t = bessel_table(kr, m_max).unwrap();
        for i in 0..100 {
            let theta = 2.0 * PI * i as f64 / 100.0;
            let mut sum = Complex64::new(t.j[0], 0.0);
            for m in 1..=m_max {
                sum += Complex64::i().powu(m as u32) * t.j[m] * 2.0 * (m as f64 * theta).cos();
            }
            worst = worst.max((sum - Complex64::from_polar(1.0, kr * theta.cos())).norm());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("worst error {worst:.2e} (limit 1e-10)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let c = make_circle(1.0).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for k in [50.0, 100.0, 200.0] {
        let wave = IncidentWave::new(ALPHA, k).unwrap();
        let (eta, report) = solve_reference(&c, &wave, &GridOptions::with_ppw(12.0)).unwrap();
        let spec = CircleSeriesSpec::new(1.0, k).unwrap();
        let exact = circle_density_on_grid(&spec, &eta.grid, ALPHA).unwrap();
        let err = relative_l2_error(&eta, &exact).unwrap();
        pass &= err <= 1e-6 && report.residual <= 1e-10;
        parts.push(format!("k={k}: {err:.2e} (res {:.1e})", report.residual));
    }
    outcome(pass, parts.join(", "))
}

fn space_identities() -> Outcome {
    let mut ladder = 0.0f64;
    for m in 1..=6 {
        let e = optimal_epsilons(m).unwrap();
        let e = e.as_slice();
        ladder = ladder.max(((1.0 - 3.0 * e[0]) / 6.0 - e[m - 1]).abs());
        for j in 0..m - 1 {
            ladder = ladder.max(((e[j] - e[j + 1]) / 2.0 - e[m - 1]).abs());
        }
    }
    let (mut measure, mut endpoint, mut inverse) = (0.0f64, 0.0f64, 0.0f64);
    for geometry in [
        GeometrySpec::Circle { radius: 1.0 },
        GeometrySpec::reference_ellipse(),
    ] {
        let c = geometry.build().unwrap();
        let (sg, _) = shadow_geometry(&c, ALPHA).unwrap();
        for k in [50.0, 800.0] {
            let l = optimal_epsilons(default_region_levels(k)).unwrap();
            let p = freq_adapted_partition(&sg, k, &RegionScales::default(), &l).unwrap();
            measure = measure.max((p.total_length() - 2.0 * sg.half_period).abs());
            let (q, ch) = cov_partition(&sg, k, &CovParams::default()).unwrap();
            measure = measure.max((q.total_length() - 2.0 * sg.half_period).abs());
            for j in 1..=6 {
                let r = q.regions()[j - 1];
                endpoint = endpoint.max((ch.phi(j, r.a) - r.a).abs());
                endpoint = endpoint.max((ch.phi(j, r.b) - r.b).abs());
                for i in 0..=200 {
                    let y = r.a + (r.b - r.a) * i as f64 / 200.0;
                    let s = invert_cov(&ch, &q, j, y).unwrap();
                    inverse = inverse.max((ch.phi(j, s) - y).abs());
                }
            }
        }
    }
    let pass = ladder <= 1e-14 && measure <= 1e-10 && endpoint <= 1e-12 && inverse <= 1e-11;
    outcome(
        pass,
        format!(
            "ladder {ladder:.1e}, measure {measure:.1e}, endpoints {endpoint:.1e}, inverse {inverse:.1e}"
        ),
    )
}

fn error_figure() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, geometry) in [
        ("circle", GeometrySpec::Circle { radius: 1.0 }),
        ("ellipse", GeometrySpec::reference_ellipse()),
    ] {
        let dir = scratch_dir(name);
        let cfg = SweepConfig {
            geometry,
            wavenumbers: vec![50.0, 100.0, 200.0, 400.0],
            methods: vec![Method::FreqAdapted, Method::Cov],
            output_dir: dir.clone(),
            ..SweepConfig::default()
        };
        let out = run_sweep(&cfg).unwrap();
        let _ = fs::remove_dir_all(dir);
        if !out.failures.is_empty() {
            pass = false;
            notes.push(format!("{name}: {} failed cells", out.failures.len()));
            continue;
        }
        for method in &cfg.methods {
            let err = |k: f64, d: usize| {
                out.records
                    .iter()
                    .find(|r| r.k == k && r.d == d && r.method == *method)
                    .map(|r| r.rel_l2_error)
                    .unwrap_or(f64::NAN)
            };
            let (mut a, mut b, mut c) = (true, true, true);
            let mut worst_gain = f64::INFINITY;
            for &k in &cfg.wavenumbers {
                for w in cfg.degrees.windows(2) {
                    a &= err(k, w[1]) <= 2.0 * err(k, w[0]);
                }
                let gain = err(k, 4) / err(k, 20);
                worst_gain = worst_gain.min(gain);
                b &= err(k, 20) <= 1e-2 * err(k, 4);
            }
            let mut spread = 0.0f64;
            for &d in &cfg.degrees {
                let e: Vec<f64> = cfg.wavenumbers.iter().map(|&k| err(k, d)).collect();
                let hi = e.iter().cloned().fold(0.0, f64::max);
                let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
                spread = spread.max(hi / lo);
                c &= hi <= 30.0 * lo;
            }
            let flag = |x: bool| if x { "ok" } else { "FAIL" };
            notes.push(format!(
                "{name}/{method}: (a) {} (b) {} [min d4/d20 gain {worst_gain:.1}] (c) {} [spread {spread:.1}]",
                flag(a),
                flag(b),
                flag(c)
            ));
            pass &= a && b && c;
        }
    }
    outcome(pass, notes.join("; "))
}

fn layer_scaling() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, geometry) in [
        ("circle", GeometrySpec::Circle { radius: 1.0 }),
        ("ellipse", GeometrySpec::reference_ellipse()),
    ] {
        let c = geometry.build().unwrap();
        let wave = IncidentWave::new(ALPHA, 50.0).unwrap();
        match boundary_layer_diagnostic(&c, &wave, &GridOptions::default()) {
            Ok(r) => {
                pass &= (1.6..=2.6).contains(&r.ratio);
                notes.push(format!("{name}: ratio {:.3}", r.ratio));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(pass, format!("{} (band [1.6, 2.6])", notes.join(", ")))
}

fn shadow_decay() -> Outcome {
    let c = make_circle(1.0).unwrap();
    let m: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&k| {
            let w = IncidentWave::new(ALPHA, k).unwrap();
            deep_shadow_max(&c, &w, &GridOptions::default()).unwrap()
        })
        .collect();
    outcome(
        m[0] > m[1] && m[1] > m[2],
        format!("max |η^slow| = {:.3e}, {:.3e}, {:.3e}", m[0], m[1], m[2]),
    )
}

fn determinism() -> Outcome {
    let dirs = [scratch_dir("det-a"), scratch_dir("det-b")];
    let bytes: Vec<Vec<u8>> = dirs
        .iter()
        .map(|dir| {
            let cfg = SweepConfig {
                wavenumbers: vec![50.0, 100.0],
                degrees: vec![4, 8, 12],
                methods: vec![Method::FreqAdapted, Method::Cov],
                output_dir: dir.clone(),
                ..SweepConfig::default()
            };
            run_sweep(&cfg).unwrap();
            let b = fs::read(dir.join("sweep.csv")).unwrap();
            let _ = fs::remove_dir_all(dir);
            b
        })
        .collect();
    outcome(
        bytes[0] == bytes[1],
        format!("{} bytes each", bytes[0].len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 Wronskian", wronskian),
        ("2 Jacobi-Anger", jacobi_anger),
        ("3 circle oracle", oracle_equivalence),
        ("4 space identities", space_identities),
        ("5 error vs degree", error_figure),
        ("6 boundary layer", layer_scaling),
        ("7 shadow decay", shadow_decay),
        ("8 determinism", determinism),
    ];
    let mut failed = Vec::new();
    // libtest prints `test acceptance ... ` without a newline
    println!();
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {name} [{secs:.1} s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
