//! Degree/wavenumber sweeps, boundary-layer and shadow diagnostics, and the
//! plain-text outputs consumed by gnuplot.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::Deserialize;

use crate::analytic::{CircleSeriesSpec, circle_density_on_boundary};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinOptions, galerkin_solve, l2_error, reconstruct, relative_l2_error};
use crate::geometry::{
    IncidentWave, ParametricBoundary, ShadowGeometry, Vec2, make_circle, make_ellipse,
    shadow_geometry, wrap_symmetric,
};
use crate::kernels::DoubleLayerSplit;
use crate::nystrom::{
    DiscreteDensity, GridOptions, NystromSystem, assemble, build_grid, slow_envelope,
    solve_reference,
};
use crate::spaces::{
    BasisSpec, CovParams, RegionScales, cov_partition, default_region_levels,
    freq_adapted_partition, optimal_epsilons,
};

/// Wavenumbers above this need `allow_large` (dense matrices beyond ~1 GB).
pub const LARGE_K_THRESHOLD: f64 = 400.0;
pub const DEFAULT_REFERENCE_PPW: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeometrySpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        semi_a: f64,
        semi_b: f64,
        rotation: f64,
    },
}

impl GeometrySpec {
    /// The rotated ellipse `(3/2, 1/2)` at `π/6`.
    pub fn reference_ellipse() -> Self {
        GeometrySpec::Ellipse {
            semi_a: 1.5,
            semi_b: 0.5,
            rotation: std::f64::consts::PI / 6.0,
        }
    }

    pub fn build(&self) -> Result<ParametricBoundary> {
        match *self {
            GeometrySpec::Circle { radius } => make_circle(radius),
            GeometrySpec::Ellipse {
                semi_a,
                semi_b,
                rotation,
            } => make_ellipse(semi_a, semi_b, rotation),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeometrySpec::Circle { .. } => "circle",
            GeometrySpec::Ellipse { .. } => "ellipse",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    FreqAdapted,
    Cov,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FreqAdapted => "freq_adapted",
            Method::Cov => "cov",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "freq_adapted" => Ok(Method::FreqAdapted),
            "cov" => Ok(Method::Cov),
            other => Err(Error::Config(format!(
                "unknown method {other:?}; expected \"freq_adapted\" or \"cov\""
            ))),
        }
    }
}

/// Space construction parameters shared by all cells of a sweep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MethodParams {
    /// Number of ε levels; `None` uses `max(1, ⌈log k^{1/6}⌉)` per wavenumber.
    pub m: Option<usize>,
    pub scales: RegionScales,
    pub xi_prime: Option<[f64; 2]>,
    pub zeta_prime: Option<[f64; 2]>,
}

/// Builds the basis of `method` at degree `d` on the shadow-aligned curve.
pub fn build_basis(
    method: Method,
    params: &MethodParams,
    shadow: &ShadowGeometry,
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    d: usize,
) -> Result<BasisSpec> {
    let k = wave.wavenumber();
    match method {
        Method::FreqAdapted => {
            let m = params.m.unwrap_or_else(|| default_region_levels(k));
            let ladder = optimal_epsilons(m)?;
            let part = freq_adapted_partition(shadow, k, &params.scales, &ladder)?;
            BasisSpec::uniform(curve, wave, part, None, d)
        }
        Method::Cov => {
            let cov = CovParams {
                scales: params.scales,
                xi_prime: params.xi_prime,
                zeta_prime: params.zeta_prime,
            };
            let (part, change) = cov_partition(shadow, k, &cov)?;
            BasisSpec::uniform(curve, wave, part, Some(change), d)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub geometry: GeometrySpec,
    pub incidence: Vec2,
    pub wavenumbers: Vec<f64>,
    pub degrees: Vec<usize>,
    pub methods: Vec<Method>,
    pub params: MethodParams,
    pub ppw: f64,
    /// Grid density of the Nyström reference for non-circular geometries.
    pub reference_ppw: f64,
    pub output_dir: PathBuf,
    pub allow_large: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySpec::Circle { radius: 1.0 },
            incidence: Vec2::new(1.0, 0.0),
            wavenumbers: vec![50.0, 100.0, 200.0, 400.0, 800.0],
            degrees: vec![4, 8, 12, 16, 20],
            methods: vec![Method::Cov],
            params: MethodParams::default(),
            ppw: crate::nystrom::DEFAULT_PPW,
            reference_ppw: DEFAULT_REFERENCE_PPW,
            output_dir: PathBuf::from("out"),
            allow_large: false,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarOrPair {
    Scalar(f64),
    Pair([f64; 2]),
}

impl ScalarOrPair {
    fn pair(self) -> [f64; 2] {
        match self {
            ScalarOrPair::Scalar(x) => [x, x],
            ScalarOrPair::Pair(p) => p,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: Option<String>,
    radius: Option<f64>,
    semi_a: Option<f64>,
    semi_b: Option<f64>,
    rotation_rad: Option<f64>,
    incidence: Option<[f64; 2]>,
    k: Option<OneOrMany<f64>>,
    d: Option<OneOrMany<usize>>,
    method: Option<OneOrMany<String>>,
    m: Option<usize>,
    xi: Option<ScalarOrPair>,
    zeta: Option<ScalarOrPair>,
    xi_prime: Option<ScalarOrPair>,
    zeta_prime: Option<ScalarOrPair>,
    ppw: Option<f64>,
    reference_ppw: Option<f64>,
    output_dir: Option<String>,
    allow_large: Option<bool>,
}

impl SweepConfig {
    /// Parses the `key = value` configuration format (a TOML subset).
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        let mut cfg = SweepConfig::default();
        let geometry = raw.geometry.as_deref().unwrap_or("circle");
        cfg.geometry = match geometry {
            "circle" => {
                if raw.semi_a.is_some() || raw.semi_b.is_some() || raw.rotation_rad.is_some() {
                    return Err(Error::Config("ellipse keys given for a circle".into()));
                }
                GeometrySpec::Circle {
                    radius: raw.radius.unwrap_or(1.0),
                }
            }
            "ellipse" => {
                if raw.radius.is_some() {
                    return Err(Error::Config("`radius` given for an ellipse".into()));
                }
                let GeometrySpec::Ellipse {
                    semi_a,
                    semi_b,
                    rotation,
                } = GeometrySpec::reference_ellipse()
                else {
                    unreachable!()
                };
                GeometrySpec::Ellipse {
                    semi_a: raw.semi_a.unwrap_or(semi_a),
                    semi_b: raw.semi_b.unwrap_or(semi_b),
                    rotation: raw.rotation_rad.unwrap_or(rotation),
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown geometry {other:?}; expected \"circle\" or \"ellipse\""
                )));
            }
        };
        if let Some([x, y]) = raw.incidence {
            cfg.incidence = Vec2::new(x, y);
        }
        if let Some(k) = raw.k {
            cfg.wavenumbers = k.into_vec();
        }
        if let Some(d) = raw.d {
            cfg.degrees = d.into_vec();
        }
        if let Some(m) = raw.method {
            cfg.methods = m
                .into_vec()
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()?;
        }
        cfg.params.m = raw.m;
        if let Some(xi) = raw.xi {
            cfg.params.scales.xi = xi.pair();
        }
        if let Some(zeta) = raw.zeta {
            cfg.params.scales.zeta = zeta.pair();
        }
        cfg.params.xi_prime = raw.xi_prime.map(ScalarOrPair::pair);
        cfg.params.zeta_prime = raw.zeta_prime.map(ScalarOrPair::pair);
        if let Some(p) = raw.ppw {
            cfg.ppw = p;
        }
        if let Some(p) = raw.reference_ppw {
            cfg.reference_ppw = p;
        }
        if let Some(dir) = raw.output_dir {
            cfg.output_dir = PathBuf::from(dir);
        }
        cfg.allow_large = raw.allow_large.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.wavenumbers.is_empty() || self.degrees.is_empty() || self.methods.is_empty() {
            return Err(Error::Config(
                "k, d and method lists must be non-empty".into(),
            ));
        }
        if let Some(k) = self
            .wavenumbers
            .iter()
            .find(|k| !(**k >= 1.0 && k.is_finite()))
        {
            return Err(Error::Config(format!("wavenumber {k} is below 1")));
        }
        if self.degrees.contains(&0) {
            return Err(Error::Config("degrees must be at least 1".into()));
        }
        if !(self.ppw > 0.0) || !(self.reference_ppw > 0.0) {
            return Err(Error::Config(
                "points per wavelength must be positive".into(),
            ));
        }
        if !(self.incidence.norm() > 0.0) {
            return Err(Error::Config("incidence direction is zero".into()));
        }
        if !self.allow_large {
            if let Some(k) = self.wavenumbers.iter().find(|&&k| k > LARGE_K_THRESHOLD) {
                return Err(Error::Resource(format!(
                    "k = {k} exceeds {LARGE_K_THRESHOLD}; pass --allow-large to run it"
                )));
            }
        }
        Ok(())
    }

    fn grid_options(&self, ppw: f64) -> GridOptions {
        GridOptions {
            allow_large: self.allow_large,
            ..GridOptions::with_ppw(ppw)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub k: f64,
    pub d: usize,
    pub method: Method,
    pub dim: usize,
    pub rel_l2_error: f64,
    /// `log₁₀` of the absolute `L²` error.
    pub log10_error: f64,
    pub wall_time_seconds: f64,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub k: f64,
    pub d: usize,
    pub method: Method,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<CellFailure>,
}

/// Round-trip formatting: 17 significant digits.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn k_label(k: f64) -> String {
    format!("{k}")
}

struct RunLog {
    file: fs::File,
}

impl RunLog {
    fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            file: fs::File::create(path)?,
        })
    }

    fn line(&mut self, msg: &str) -> Result<()> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        writeln!(self.file, "[{stamp:.3}] {msg}")?;
        Ok(())
    }
}

/// Everything that is shared by the cells of one wavenumber.
struct Stage {
    shadow: ShadowGeometry,
    curve: ParametricBoundary,
    wave: IncidentWave,
    nys: NystromSystem,
    reference: DiscreteDensity,
}

fn prepare_stage(cfg: &SweepConfig, base: &ParametricBoundary, k: f64) -> Result<Stage> {
    let (shadow, curve) = shadow_geometry(base, cfg.incidence)?;
    let wave = IncidentWave::new(cfg.incidence, k)?;
    let grid = build_grid(&curve, k, &cfg.grid_options(cfg.ppw))?;
    let split = DoubleLayerSplit::new(&curve, k)?;
    let nys = assemble(&curve, &wave, &grid, &split)?;
    let reference = match cfg.geometry {
        GeometrySpec::Circle { radius } => {
            let spec = CircleSeriesSpec::new(radius, k)?;
            circle_density_on_boundary(&spec, &curve, &grid, wave.direction())?
        }
        GeometrySpec::Ellipse { .. } => {
            solve_reference(&curve, &wave, &cfg.grid_options(cfg.reference_ppw))?.0
        }
    };
    Ok(Stage {
        shadow,
        curve,
        wave,
        nys,
        reference,
    })
}

struct CellResult {
    record: ErrorRecord,
    pointwise: Vec<f64>,
}

fn run_cell(cfg: &SweepConfig, stage: &Stage, method: Method, d: usize) -> Result<CellResult> {
    let start = Instant::now();
    let basis = build_basis(
        method,
        &cfg.params,
        &stage.shadow,
        &stage.curve,
        &stage.wave,
        d,
    )?;
    let sol = galerkin_solve(&basis, &stage.nys, &GalerkinOptions::default())?;
    let approx = reconstruct(&sol, &stage.reference.grid)?;
    let abs = l2_error(&approx, &stage.reference)?;
    let rel = relative_l2_error(&approx, &stage.reference)?;
    let pointwise = approx
        .values
        .iter()
        .zip(&stage.reference.values)
        .map(|(a, b)| (a - b).norm().log10())
        .collect();
    Ok(CellResult {
        record: ErrorRecord {
            k: stage.wave.wavenumber(),
            d,
            method,
            dim: basis.dimension(),
            rel_l2_error: rel,
            log10_error: abs.log10(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            condition: sol.condition,
        },
        pointwise,
    })
}

fn write_pointwise(path: &Path, stage: &Stage, columns: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = String::from("t");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for j in 0..stage.reference.grid.len() {
        out.push_str(&fmt17(stage.reference.grid.node(j)));
        for (_, v) in columns {
            out.push(',');
            out.push_str(&fmt17(v[j]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes `records` as `sweep.csv` (no timings, so identical inputs give
/// identical bytes).
pub fn write_sweep_csv(path: &Path, records: &[ErrorRecord]) -> Result<()> {
    let mut out = String::from("k,d,method,dim,rel_l2_error,log10_error,condition\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt17(r.k),
            r.d,
            r.method,
            r.dim,
            fmt17(r.rel_l2_error),
            fmt17(r.log10_error),
            fmt17(r.condition)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Runs every `(k, method, d)` cell. Failures are recorded per cell and do
/// not stop the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut log = RunLog::create(&cfg.output_dir.join("run.log"))?;
    log.line(&format!("sweep start: {} {:?}", cfg.geometry.name(), cfg))?;
    let base = cfg.geometry.build()?;
    let mut outcome = SweepOutcome::default();
    for &k in &cfg.wavenumbers {
        let t0 = Instant::now();
        let stage = match prepare_stage(cfg, &base, k) {
            Ok(s) => s,
            Err(e) => {
                log.line(&format!("k = {k}: setup failed: {e}"))?;
                for &method in &cfg.methods {
                    for &d in &cfg.degrees {
                        outcome.failures.push(CellFailure {
                            k,
                            d,
                            method,
                            message: e.to_string(),
                        });
                    }
                }
                continue;
            }
        };
        log.line(&format!(
            "k = {k}: n = {}, setup {:.3} s",
            stage.nys.grid.len(),
            t0.elapsed().as_secs_f64()
        ))?;
        let mut columns = Vec::new();
        for &method in &cfg.methods {
            for &d in &cfg.degrees {
                match run_cell(cfg, &stage, method, d) {
                    Ok(cell) => {
                        log.line(&format!(
                            "k = {k}, {method}, d = {d}: rel {:.3e}, cond {:.3e}, {:.3} s",
                            cell.record.rel_l2_error,
                            cell.record.condition,
                            cell.record.wall_time_seconds
                        ))?;
                        columns.push((format!("{method}_d{d}"), cell.pointwise));
                        outcome.records.push(cell.record);
                    }
                    Err(e) => {
                        log.line(&format!("k = {k}, {method}, d = {d}: failed: {e}"))?;
                        outcome.failures.push(CellFailure {
                            k,
                            d,
                            method,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
        if !columns.is_empty() {
            let name = format!("pointwise_error_k{}.csv", k_label(k));
            write_pointwise(&cfg.output_dir.join(name), &stage, &columns)?;
        }
    }
    write_sweep_csv(&cfg.output_dir.join("sweep.csv"), &outcome.records)?;
    if !outcome.records.is_empty() {
        emit_plots(&outcome.records, &cfg.output_dir)?;
    }
    log.line(&format!(
        "sweep done: {} records, {} failures",
        outcome.records.len(),
        outcome.failures.len()
    ))?;
    Ok(outcome)
}

/// Writes `error_vs_degree.dat` (one gnuplot index block per method; rows
/// are degrees, columns `log₁₀` errors per wavenumber) and plot scripts.
pub fn emit_plots(records: &[ErrorRecord], dir: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to plot".into()));
    }
    let mut ks: Vec<f64> = records.iter().map(|r| r.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut ds: Vec<usize> = records.iter().map(|r| r.d).collect();
    ds.sort_unstable();
    ds.dedup();
    let mut table: BTreeMap<(usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    let mut methods: Vec<Method> = records.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    for r in records {
        let mi = methods.iter().position(|m| *m == r.method).unwrap_or(0);
        let ki = ks.iter().position(|k| *k == r.k).unwrap_or(0);
        table
            .entry((mi, r.d))
            .or_default()
            .insert(ki, r.log10_error);
    }
    let mut dat = String::new();
    for (mi, method) in methods.iter().enumerate() {
        if mi > 0 {
            dat.push_str("\n\n");
        }
        dat.push_str(&format!("# method = {method}\n# d"));
        for k in &ks {
            dat.push_str(&format!(" k={}", k_label(*k)));
        }
        dat.push('\n');
        for d in &ds {
            dat.push_str(&d.to_string());
            let row = table.get(&(mi, *d));
            for ki in 0..ks.len() {
                match row.and_then(|r| r.get(&ki)) {
                    Some(v) => dat.push_str(&format!(" {}", fmt17(*v))),
                    None => dat.push_str(" nan"),
                }
            }
            dat.push('\n');
        }
    }
    let mut gp = String::from(
        "set xlabel 'local polynomial degree d'\nset ylabel 'log10(L2 error)'\nset key outside\n",
    );
    for (mi, method) in methods.iter().enumerate() {
        gp.push_str(&format!(
            "set title '{method}'\nset terminal pngcairo size 800,600\nset output 'error_vs_degree_{method}.png'\nplot "
        ));
        let parts: Vec<String> = ks
            .iter()
            .enumerate()
            .map(|(ki, k)| {
                format!(
                    "'error_vs_degree.dat' index {mi} using 1:{} with linespoints title 'k={}'",
                    ki + 2,
                    k_label(*k)
                )
            })
            .collect();
        gp.push_str(&parts.join(", \\\n     "));
        gp.push('\n');
    }
    let mut pw = String::from(
        "set datafile separator ','\nset xlabel 't'\nset ylabel 'log10|eta - eta_hat|'\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n",
    );
    for k in &ks {
        let name = format!("pointwise_error_k{}", k_label(*k));
        pw.push_str(&format!(
            "set output '{name}.png'\nplot for [c=2:*] '{name}.csv' using 1:c with lines\n"
        ));
    }
    fs::create_dir_all(dir)?;
    fs::write(dir.join("error_vs_degree.dat"), dat)?;
    fs::write(dir.join("error_vs_degree.gp"), gp)?;
    fs::write(dir.join("pointwise_error.gp"), pw)?;
    Ok(())
}

/// Half-maximum width of `|∂_s η^slow|` around the first shadow boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerWidth {
    pub width: f64,
    /// Location of the local maximum, relative to `t1`.
    pub peak_offset: f64,
    pub peak_value: f64,
}

/// Measures the shadow-boundary layer of the Nyström reference solution
/// for `wave` on `curve`.
///
/// Central differences give `|∂_s η^slow|` on the grid; starting at the node
/// nearest `t1` the profile is climbed to its local maximum, and the width
/// is the extent of the contiguous run of nodes at or above half of it.
/// Only the window `|t − t1| ≤ P/2` is searched.
pub fn layer_width(
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    opts: &GridOptions,
) -> Result<LayerWidth> {
    let (shadow, curve) = shadow_geometry(curve, wave.direction())?;
    let (eta, _) = solve_reference(&curve, wave, opts)?;
    let slow = slow_envelope(&eta, &curve, wave)?;
    let n = slow.grid.len();
    let h = slow.grid.spacing();
    let period = slow.grid.period();
    let window = 0.5 * shadow.half_period;
    let mut idx: Vec<(f64, usize)> = (0..n)
        .map(|j| (wrap_symmetric(slow.grid.node(j) - shadow.t1, period), j))
        .filter(|(off, _)| off.abs() <= window)
        .collect();
    idx.sort_by(|a, b| a.0.total_cmp(&b.0));
    let offsets: Vec<f64> = idx.iter().map(|p| p.0).collect();
    let der: Vec<f64> = idx
        .iter()
        .map(|&(_, j)| {
            let fwd = slow.values[(j + 1) % n];
            let bwd = slow.values[(j + n - 1) % n];
            ((fwd - bwd) / (2.0 * h)).norm()
        })
        .collect();
    if der.len() < 3 {
        return Err(Error::Diagnostic(
            "window around t1 holds fewer than 3 nodes".into(),
        ));
    }
    let mut i = (0..offsets.len())
        .min_by(|&a, &b| offsets[a].abs().total_cmp(&offsets[b].abs()))
        .unwrap_or(0);
    loop {
        let left = if i > 0 { der[i - 1] } else { f64::NEG_INFINITY };
        let right = der.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if left > der[i] && left >= right {
            i -= 1;
        } else if right > der[i] {
            i += 1;
        } else {
            break;
        }
    }
    let peak = der[i];
    let floor = der.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(peak > 0.0) || !(peak > 2.0 * floor) {
        return Err(Error::Diagnostic(format!(
            "no boundary layer detected near t1 (peak {peak:e}, floor {floor:e})"
        )));
    }
    let half = 0.5 * peak;
    let (mut a, mut b) = (i, i);
    while a > 0 && der[a - 1] >= half {
        a -= 1;
    }
    while b + 1 < der.len() && der[b + 1] >= half {
        b += 1;
    }
    if a == 0 || b + 1 == der.len() {
        return Err(Error::Diagnostic(
            "boundary layer extends past the search window".into(),
        ));
    }
    Ok(LayerWidth {
        width: offsets[b] - offsets[a],
        peak_offset: offsets[i],
        peak_value: peak,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerReport {
    pub k: f64,
    pub k_other: f64,
    pub width: LayerWidth,
    pub width_other: LayerWidth,
    /// `width(k) / width(k_other)`.
    pub ratio: f64,
}

/// Compares the layer widths for two incident waves on the same curve.
pub fn layer_width_ratio(
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    other: &IncidentWave,
    opts: &GridOptions,
) -> Result<LayerReport> {
    let a = layer_width(curve, wave, opts)?;
    let b = layer_width(curve, other, opts)?;
    Ok(LayerReport {
        k: wave.wavenumber(),
        k_other: other.wavenumber(),
        width: a,
        width_other: b,
        ratio: a.width / b.width,
    })
}

/// Layer width ratio between `k` and `8k`; the `k^{-1/3}` law predicts 2.
pub fn boundary_layer_diagnostic(
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    opts: &GridOptions,
) -> Result<LayerReport> {
    let other = wave.with_wavenumber(8.0 * wave.wavenumber())?;
    layer_width_ratio(curve, wave, &other, opts)
}

/// `max |η^slow|` over the quarter of the boundary centred on the point
/// opposite the illuminated arc.
pub fn deep_shadow_max(
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    opts: &GridOptions,
) -> Result<f64> {
    // t1 + t2 = 2P puts the middle of the shadow arc at t = 0
    let (_, curve) = shadow_geometry(curve, wave.direction())?;
    let (eta, _) = solve_reference(&curve, wave, opts)?;
    let slow = slow_envelope(&eta, &curve, wave)?;
    let period = slow.grid.period();
    Ok((0..slow.grid.len())
        .filter(|&j| wrap_symmetric(slow.grid.node(j), period).abs() <= period / 8.0)
        .map(|j| slow.values[j].norm())
        .fold(0.0, f64::max))
}

/// Writes `t, Re η, Im η, Re η^slow, Im η^slow` on the density's grid.
pub fn write_density_csv(
    path: &Path,
    eta: &DiscreteDensity,
    curve: &ParametricBoundary,
    wave: &IncidentWave,
) -> Result<()> {
    let slow = slow_envelope(eta, curve, wave)?;
    let mut out = String::from("t,re_eta,im_eta,re_eta_slow,im_eta_slow\n");
    for j in 0..eta.grid.len() {
        let (v, s): (Complex64, Complex64) = (eta.values[j], slow.values[j]);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(eta.grid.node(j)),
            fmt17(v.re),
            fmt17(v.im),
            fmt17(s.re),
            fmt17(s.im)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
