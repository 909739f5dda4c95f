//! Discrete Galerkin projection of the Nyström operator onto a
//! phase-extracted basis, using the Nyström grid as quadrature.

use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::{Mat, Scale};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nystrom::{DensityKind, DiscreteDensity, NystromSystem, PeriodicGrid};
use crate::spaces::{BasisSpec, RegionLabel, legendre_all};

pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

/// Known slowly varying part `σ^slow(t)` of the envelope; the unknown is
/// `η − e^{ik α·γ} σ^slow`.
pub type Envelope = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct GalerkinOptions {
    /// Condition estimate above which the system is re-solved in the least
    /// squares sense and flagged.
    pub condition_limit: f64,
    pub sigma: Option<Envelope>,
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        Self {
            condition_limit: DEFAULT_CONDITION_LIMIT,
            sigma: None,
        }
    }
}

impl fmt::Debug for GalerkinOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GalerkinOptions")
            .field("condition_limit", &self.condition_limit)
            .field("sigma", &self.sigma.is_some())
            .finish()
    }
}

/// Coefficients in the unit-normalized basis, with solve diagnostics.
#[derive(Clone)]
pub struct GalerkinSolution {
    pub basis: BasisSpec,
    pub coefficients: Vec<Complex64>,
    /// Factor applied to each raw basis function to give unit discrete norm.
    pub column_scales: Vec<f64>,
    pub k: f64,
    /// 2-norm condition number of the Galerkin matrix.
    pub condition: f64,
    /// `‖A_G c − g‖ / ‖g‖`.
    pub projected_residual: f64,
    /// `‖A η̂ − f‖_{L²_h} / ‖f‖_{L²_h}` on the quadrature grid.
    pub residual: f64,
    pub ill_conditioned: bool,
    pub least_squares: bool,
    sigma: Option<Envelope>,
}

impl fmt::Debug for GalerkinSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GalerkinSolution")
            .field("dimension", &self.coefficients.len())
            .field("k", &self.k)
            .field("condition", &self.condition)
            .field("projected_residual", &self.projected_residual)
            .field("residual", &self.residual)
            .field("ill_conditioned", &self.ill_conditioned)
            .field("least_squares", &self.least_squares)
            .finish()
    }
}

/// Raw (unscaled) basis values at one parameter: region index and the
/// values of its `d + 1` functions.
fn raw_row(basis: &BasisSpec, t: f64) -> Result<(usize, Vec<Complex64>)> {
    let (j, lifted) = basis.partition().locate(t);
    let u = basis.local_coordinate(j, lifted)?;
    let phase = basis.phase(t);
    let vals = legendre_all(u, basis.degrees()[j])
        .into_iter()
        .map(|p| phase * p)
        .collect();
    Ok((j, vals))
}

fn sample_basis(basis: &BasisSpec, grid: &PeriodicGrid) -> Result<Mat<Complex64>> {
    let rows: Vec<(usize, Vec<Complex64>)> = (0..grid.len())
        .into_par_iter()
        .map(|i| raw_row(basis, grid.node(i)))
        .collect::<Result<_>>()?;
    let mut b = Mat::<Complex64>::zeros(grid.len(), basis.dimension());
    for (i, (j, vals)) in rows.into_iter().enumerate() {
        let off = basis.offset(j);
        for (n, v) in vals.into_iter().enumerate() {
            b[(i, off + n)] = v;
        }
    }
    Ok(b)
}

fn col_vec(v: &[Complex64]) -> Mat<Complex64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `h B* A B c = h B* f_β`, `f_β = f − A σ`, where the columns of `B`
/// are the basis functions sampled on the Nyström grid and scaled to unit
/// discrete `L²` norm.
pub fn galerkin_solve(
    basis: &BasisSpec,
    nys: &NystromSystem,
    opts: &GalerkinOptions,
) -> Result<GalerkinSolution> {
    let grid = nys.grid;
    let n = grid.len();
    let dim = basis.dimension();
    if dim >= n {
        return Err(Error::InvalidArgument(format!(
            "basis dimension {dim} is not below the quadrature size {n}"
        )));
    }
    if (grid.period() - basis.curve().length()).abs() > 1e-12 * grid.period() {
        return Err(Error::InvalidArgument(
            "quadrature grid does not match the basis curve".into(),
        ));
    }
    let h = grid.spacing();
    let mut b = sample_basis(basis, &grid)?;
    let mut scales = Vec::with_capacity(dim);
    for c in 0..dim {
        let norm2: f64 = (0..n).map(|i| b[(i, c)].norm_sqr()).sum::<f64>() * h;
        if !(norm2 > 0.0) {
            let region = basis
                .partition()
                .regions()
                .iter()
                .enumerate()
                .rev()
                .find(|(j, _)| basis.offset(*j) <= c)
                .map(|(_, r)| r.label)
                .unwrap_or(RegionLabel::Illuminated);
            return Err(Error::InvalidArgument(format!(
                "region {region} contains no quadrature nodes"
            )));
        }
        let s = 1.0 / norm2.sqrt();
        for i in 0..n {
            b[(i, c)] *= s;
        }
        scales.push(s);
    }
    let mut f = nys.rhs.clone();
    if let Some(sigma) = &opts.sigma {
        let s: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = grid.node(i);
                basis.phase(t) * sigma(t)
            })
            .collect();
        let as_ = nys.apply(&s);
        for (fi, ai) in f.iter_mut().zip(as_) {
            *fi -= ai;
        }
    }
    let ab = &nys.matrix * &b;
    let gal = Scale(Complex64::new(h, 0.0)) * (b.adjoint() * &ab);
    let fcol = col_vec(&f);
    let g = Scale(Complex64::new(h, 0.0)) * (b.adjoint() * &fcol);
    let sv = gal
        .singular_values()
        .map_err(|e| Error::Solver(format!("SVD failed: {e:?}")))?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let ill_conditioned = !(condition <= opts.condition_limit);
    let x = if ill_conditioned {
        let w = Complex64::new(h.sqrt(), 0.0);
        let lhs = Scale(w) * &ab;
        let rhs = Scale(w) * &fcol;
        lhs.qr().solve_lstsq(&rhs)
    } else {
        gal.col_piv_qr().solve(&g)
    };
    let coefficients: Vec<Complex64> = (0..dim).map(|i| x[(i, 0)]).collect();
    if coefficients
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(Error::Solver("non-finite Galerkin coefficients".into()));
    }
    let gr = &gal * &x - &g;
    let gcol: Vec<Complex64> = (0..dim).map(|i| g[(i, 0)]).collect();
    let grv: Vec<Complex64> = (0..dim).map(|i| gr[(i, 0)]).collect();
    let gnorm = vec_norm(&gcol);
    let projected_residual = if gnorm > 0.0 {
        vec_norm(&grv) / gnorm
    } else {
        vec_norm(&grv)
    };
    let r = &ab * &x - &fcol;
    let rv: Vec<Complex64> = (0..n).map(|i| r[(i, 0)]).collect();
    let fnorm = vec_norm(&f);
    let residual = if fnorm > 0.0 {
        vec_norm(&rv) / fnorm
    } else {
        vec_norm(&rv)
    };
    Ok(GalerkinSolution {
        basis: basis.clone(),
        coefficients,
        column_scales: scales,
        k: nys.k,
        condition,
        projected_residual,
        residual,
        ill_conditioned,
        least_squares: ill_conditioned,
        sigma: opts.sigma.clone(),
    })
}

impl GalerkinSolution {
    /// `η̂(t)` at any parameter.
    pub fn evaluate(&self, t: f64) -> Result<Complex64> {
        let (j, vals) = raw_row(&self.basis, t)?;
        let off = self.basis.offset(j);
        let mut acc = Complex64::default();
        for (n, v) in vals.iter().enumerate() {
            acc += self.coefficients[off + n] * self.column_scales[off + n] * v;
        }
        if let Some(sigma) = &self.sigma {
            acc += self.basis.phase(t) * sigma(t);
        }
        Ok(acc)
    }

    /// Value at parameter `t` of the polynomial piece of region `j`,
    /// extended to the closed region.
    fn evaluate_piece(&self, j: usize, lifted: f64, t: f64) -> Result<Complex64> {
        let u = self.basis.local_coordinate(j, lifted)?;
        let phase = self.basis.phase(t);
        let off = self.basis.offset(j);
        let p = legendre_all(u, self.basis.degrees()[j]);
        let mut acc = Complex64::default();
        for (n, pn) in p.iter().enumerate() {
            acc += self.coefficients[off + n] * self.column_scales[off + n] * pn;
        }
        Ok(acc * phase)
    }

    /// Jump `η̂(b_j⁺) − η̂(b_j⁻)` at the right end of every region.
    pub fn region_jumps(&self) -> Result<Vec<RegionJump>> {
        let part = self.basis.partition();
        let period = part.period();
        let mut out = Vec::with_capacity(part.len());
        for (j, r) in part.regions().iter().enumerate() {
            let left = self.evaluate_piece(j, r.b, r.b)?;
            let t = r.b.rem_euclid(period);
            let (next, lifted) = part.locate(t);
            let right = self.evaluate_piece(next, lifted, t)?;
            out.push(RegionJump {
                label: r.label,
                at: t,
                jump: (right - left).norm(),
            });
        }
        Ok(out)
    }
}

/// Discontinuity of the piecewise approximation at a region end.
#[derive(Clone, Copy, Debug)]
pub struct RegionJump {
    pub label: RegionLabel,
    pub at: f64,
    pub jump: f64,
}

/// `η̂` at the nodes of `grid` (any grid over the same period).
pub fn reconstruct(sol: &GalerkinSolution, grid: &PeriodicGrid) -> Result<DiscreteDensity> {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| sol.evaluate(grid.node(i)))
        .collect::<Result<Vec<_>>>()?;
    DiscreteDensity::new(*grid, values, sol.k, DensityKind::TotalField)
}

fn check_comparable(a: &DiscreteDensity, b: &DiscreteDensity) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::InvalidArgument(
            "densities live on different grids".into(),
        ));
    }
    if a.kind != b.kind {
        return Err(Error::InvalidArgument(
            "densities have different kinds".into(),
        ));
    }
    Ok(())
}

/// `sqrt(h Σ|v_j|²)`
pub fn l2_norm(a: &DiscreteDensity) -> f64 {
    (a.grid.spacing() * a.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// `‖a − b‖₂` by the trapezoidal rule.
pub fn l2_error(a: &DiscreteDensity, b: &DiscreteDensity) -> Result<f64> {
    check_comparable(a, b)?;
    let s: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((a.grid.spacing() * s).sqrt())
}

/// `‖a − b‖₂ / ‖b‖₂`
pub fn relative_l2_error(a: &DiscreteDensity, b: &DiscreteDensity) -> Result<f64> {
    let e = l2_error(a, b)?;
    let nb = l2_norm(b);
    if !(nb > 0.0) {
        return Err(Error::InvalidArgument("reference density is zero".into()));
    }
    Ok(e / nb)
}

/// `log₁₀ ‖a − b‖₂`
pub fn log10_l2_error(a: &DiscreteDensity, b: &DiscreteDensity) -> Result<f64> {
    Ok(l2_error(a, b)?.log10())
}
