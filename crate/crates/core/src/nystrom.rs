//! Nyström discretization of `(I − 2K_k)η = 2u^inc` on a uniform periodic
//! grid, with the classical trigonometric weights for the periodic
//! logarithmic singularity, and a dense LU reference solve.

use faer::Mat;
use faer::linalg::solvers::Solve;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{IncidentWave, ParametricBoundary};
use crate::kernels::{DoubleLayerSplit, KernelSplit};

pub const DEFAULT_PPW: f64 = 12.0;
pub const DEFAULT_MAX_NODES: usize = 20_000;
/// LU pivot ratio below which the system is reported as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Nodes `t_j = j·2P/n`, `j = 0..n`, with `n` even.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    half_period: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, half_period: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "grid size must be even and at least 2, got {n}"
            )));
        }
        if !(half_period > 0.0) || !half_period.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "half period must be positive, got {half_period}"
            )));
        }
        Ok(Self { n, half_period })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    /// `h = 2P/n`
    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.period() / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// Grid density and size limits.
#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// Points per wavelength.
    pub ppw: f64,
    pub max_nodes: usize,
    /// Permit grids above `max_nodes`.
    pub allow_large: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            ppw: DEFAULT_PPW,
            max_nodes: DEFAULT_MAX_NODES,
            allow_large: false,
        }
    }
}

impl GridOptions {
    pub fn with_ppw(ppw: f64) -> Self {
        Self {
            ppw,
            ..Self::default()
        }
    }
}

/// Smallest even `n ≥ ppw·k·2P/(2π)`.
pub fn build_grid(curve: &ParametricBoundary, k: f64, opts: &GridOptions) -> Result<PeriodicGrid> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be positive, got {k}"
        )));
    }
    if !(opts.ppw > 0.0) || !opts.ppw.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "points per wavelength must be positive, got {}",
            opts.ppw
        )));
    }
    let target = opts.ppw * k * curve.length() / std::f64::consts::TAU;
    // guard against round-up from representation error in the product
    let mut n = (target * (1.0 - 1e-12)).ceil().max(2.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    if n > opts.max_nodes && !opts.allow_large {
        return Err(Error::Resource(format!(
            "grid needs {n} nodes (cap {}); reduce k or ppw, or allow large grids",
            opts.max_nodes
        )));
    }
    PeriodicGrid::new(n, curve.half_period())
}

/// Weights `R(d)`, `d = (j − i) mod n`, of the rule
/// `∫₀^{2P} ln(4 sin²(π(t_i − s)/(2P))) f(s) ds ≈ Σ_j R(d) f(t_j)`,
/// exact for trigonometric polynomials of degree below `n/2`.
pub fn log_weight_profile(grid: &PeriodicGrid) -> Vec<f64> {
    let n = grid.len();
    let half = n / 2;
    let p = grid.half_period();
    let mut coeffs = vec![Complex64::default(); n];
    for m in 1..half {
        let c = -p / (half as f64 * m as f64);
        coeffs[m] = Complex64::new(c, 0.0);
        coeffs[n - m] = Complex64::new(c, 0.0);
    }
    coeffs[half] = Complex64::new(-p / (half * half) as f64, 0.0);
    FftPlanner::new().plan_fft_inverse(n).process(&mut coeffs);
    coeffs.into_iter().map(|c| c.re).collect()
}

/// The weights `R_j(t_i)` for one target node.
pub fn log_quadrature_weights(grid: &PeriodicGrid, i: usize) -> Vec<f64> {
    let profile = log_weight_profile(grid);
    let n = grid.len();
    (0..n).map(|j| profile[(j + n - i % n) % n]).collect()
}

/// Whether a density holds the total field or its slowly varying envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    TotalField,
    SlowEnvelope,
}

/// Complex boundary values on a periodic grid.
#[derive(Clone, Debug)]
pub struct DiscreteDensity {
    pub grid: PeriodicGrid,
    pub values: Vec<Complex64>,
    pub k: f64,
    pub kind: DensityKind,
}

impl DiscreteDensity {
    pub fn new(
        grid: PeriodicGrid,
        values: Vec<Complex64>,
        k: f64,
        kind: DensityKind,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            k,
            kind,
        })
    }

    /// Trigonometric interpolant sampled on `n_new` equispaced nodes.
    pub fn resample(&self, n_new: usize) -> Result<DiscreteDensity> {
        let grid = PeriodicGrid::new(n_new, self.grid.half_period())?;
        let n = self.grid.len();
        if n_new == n {
            return Ok(self.clone());
        }
        let mut planner = FftPlanner::new();
        let mut spec = self.values.clone();
        planner.plan_fft_forward(n).process(&mut spec);
        let mut out = vec![Complex64::default(); n_new];
        let half = n.min(n_new) / 2;
        for f in 0..half {
            out[f] = spec[f];
        }
        for f in 1..half {
            out[n_new - f] = spec[n - f];
        }
        if n < n_new {
            out[half] += 0.5 * spec[half];
            out[n_new - half] += 0.5 * spec[half];
        } else {
            out[half] = spec[half] + spec[n - half];
        }
        planner.plan_fft_inverse(n_new).process(&mut out);
        let scale = 1.0 / n as f64;
        for v in &mut out {
            *v *= scale;
        }
        DiscreteDensity::new(grid, out, self.k, self.kind)
    }
}

/// Dense system `A η = f` with `A = I − 2K_h`.
#[derive(Clone, Debug)]
pub struct NystromSystem {
    pub grid: PeriodicGrid,
    pub matrix: Mat<Complex64>,
    pub rhs: Vec<Complex64>,
    pub k: f64,
}

/// Diagnostics from a dense solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    /// `‖Aη − f‖∞ / ‖f‖∞` (zero for `f = 0`).
    pub residual: f64,
    /// `min |U_ii| / max |U_ii|` of the LU factor.
    pub pivot_ratio: f64,
}

const ASSEMBLY_CHUNK: usize = 16;

/// `A_ij = δ_ij − 2(R_{j}(t_i) K₁(t_i, t_j) + h K₂(t_i, t_j))`,
/// `f_i = 2 e^{ik α·γ(t_i)}`.
pub fn assemble<S: KernelSplit>(
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    grid: &PeriodicGrid,
    split: &S,
) -> Result<NystromSystem> {
    if (curve.half_period() - grid.half_period()).abs() > 1e-12 * curve.half_period() {
        return Err(Error::InvalidArgument(
            "grid period does not match the curve".into(),
        ));
    }
    let n = grid.len();
    let h = grid.spacing();
    let nodes = grid.nodes();
    let profile = log_weight_profile(grid);
    let prepared = split.prepare(&nodes);
    let mut matrix = Mat::<Complex64>::zeros(n, n);
    matrix
        .par_col_chunks_mut(ASSEMBLY_CHUNK)
        .enumerate()
        .try_for_each(|(chunk, mut cols)| {
            for jj in 0..cols.ncols() {
                let j = chunk * ASSEMBLY_CHUNK + jj;
                for i in 0..n {
                    let (k1, k2) = split.split_nodes(&prepared, i, j);
                    let w = profile[(j + n - i) % n];
                    let mut v = -2.0 * (k1 * w + k2 * h);
                    if i == j {
                        v += 1.0;
                    }
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::Assembly { row: i, col: j });
                    }
                    cols[(i, jj)] = v;
                }
            }
            Ok(())
        })?;
    let rhs = nodes
        .par_iter()
        .map(|&t| 2.0 * wave.value_at(curve.position(t)))
        .collect();
    Ok(NystromSystem {
        grid: *grid,
        matrix,
        rhs,
        k: wave.wavenumber(),
    })
}

impl NystromSystem {
    /// Dense LU solve with partial pivoting.
    pub fn solve(&self) -> Result<(DiscreteDensity, SolveReport)> {
        let n = self.grid.len();
        let lu = self.matrix.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(pivot_ratio >= SINGULAR_PIVOT_RATIO) {
            return Err(Error::Solver(format!(
                "matrix is numerically singular (pivot ratio {pivot_ratio:e}); \
                 k = {} may be close to an interior resonance",
                self.k
            )));
        }
        let b = Mat::from_fn(n, 1, |i, _| self.rhs[i]);
        let x = lu.solve(&b);
        let values: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Solver("non-finite solution".into()));
        }
        let residual = self.relative_residual(&values);
        let density = DiscreteDensity::new(self.grid, values, self.k, DensityKind::TotalField)?;
        Ok((
            density,
            SolveReport {
                residual,
                pivot_ratio,
            },
        ))
    }

    /// `‖A x − f‖∞ / ‖f‖∞`, or `‖A x‖∞` when `f = 0`.
    pub fn relative_residual(&self, x: &[Complex64]) -> f64 {
        let ax = self.apply(x);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (a, f) in ax.iter().zip(&self.rhs) {
            num = num.max((a - f).norm());
            den = den.max(f.norm());
        }
        if den > 0.0 { num / den } else { num }
    }

    /// `A x`
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let col = Mat::from_fn(n, 1, |i, _| x[i]);
        let y = &self.matrix * &col;
        (0..n).map(|i| y[(i, 0)]).collect()
    }
}

/// Reference total field: grid, assembly and dense solve in one call.
pub fn solve_reference(
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    opts: &GridOptions,
) -> Result<(DiscreteDensity, SolveReport)> {
    let grid = build_grid(curve, wave.wavenumber(), opts)?;
    let split = DoubleLayerSplit::new(curve, wave.wavenumber())?;
    assemble(curve, wave, &grid, &split)?.solve()
}

fn modulate(
    density: &DiscreteDensity,
    curve: &ParametricBoundary,
    wave: &IncidentWave,
    from: DensityKind,
    to: DensityKind,
    sign: f64,
) -> Result<DiscreteDensity> {
    if density.kind != from {
        return Err(Error::InvalidArgument(format!(
            "expected a {from:?} density, got {:?}",
            density.kind
        )));
    }
    if density.k != wave.wavenumber() {
        return Err(Error::InvalidArgument(format!(
            "density wavenumber {} differs from wave wavenumber {}",
            density.k,
            wave.wavenumber()
        )));
    }
    let values = density
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let phase = wave.value_at(curve.position(density.grid.node(j)));
            if sign > 0.0 {
                v * phase
            } else {
                v * phase.conj()
            }
        })
        .collect();
    DiscreteDensity::new(density.grid, values, density.k, to)
}

/// `η^slow = e^{−ik α·γ} η`
pub fn slow_envelope(
    density: &DiscreteDensity,
    curve: &ParametricBoundary,
    wave: &IncidentWave,
) -> Result<DiscreteDensity> {
    modulate(
        density,
        curve,
        wave,
        DensityKind::TotalField,
        DensityKind::SlowEnvelope,
        -1.0,
    )
}

/// `η = e^{ik α·γ} η^slow`
pub fn remodulate(
    density: &DiscreteDensity,
    curve: &ParametricBoundary,
    wave: &IncidentWave,
) -> Result<DiscreteDensity> {
    modulate(
        density,
        curve,
        wave,
        DensityKind::SlowEnvelope,
        DensityKind::TotalField,
        1.0,
    )
}
