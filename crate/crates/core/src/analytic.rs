//! Exact boundary trace of the total field for plane-wave scattering by a
//! sound-hard circle.
//!
//! For incidence along `(1, 0)` on a circle of radius `r`,
//! `η(θ) = Σ_{m≥0} ε_m i^m (J_m H′_m − J′_m H_m)/H′_m cos mθ`, with `ε₀ = 1`,
//! `ε_m = 2`. The Wronskian reduces the numerator to `2i/(πkr)`, which
//! avoids cancellation between incident and scattered parts.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ParametricBoundary, Vec2};
use crate::nystrom::{DensityKind, DiscreteDensity, PeriodicGrid};
use crate::specfun::{bessel_table, series_truncation};

/// Truncated cylindrical-harmonic series for the circle.
#[derive(Clone, Debug)]
pub struct CircleSeriesSpec {
    radius: f64,
    k: f64,
    truncation: usize,
    /// `ε_m i^m (2i/(πkr)) / H′_m(kr)`, `m = 0..=M`.
    coeffs: Vec<Complex64>,
}

impl CircleSeriesSpec {
    /// Series with the default truncation `⌈kr + 10(kr)^{1/3} + 20⌉`.
    pub fn new(radius: f64, k: f64) -> Result<Self> {
        if !(radius > 0.0) || !(k > 0.0) || !radius.is_finite() || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius and wavenumber must be positive, got r = {radius}, k = {k}"
            )));
        }
        Self::with_truncation(radius, k, series_truncation(k * radius))
    }

    pub fn with_truncation(radius: f64, k: f64, truncation: usize) -> Result<Self> {
        if !(radius > 0.0) || !(k > 0.0) || !radius.is_finite() || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius and wavenumber must be positive, got r = {radius}, k = {k}"
            )));
        }
        let x = k * radius;
        let table = bessel_table(x, truncation)?;
        let wronskian = Complex64::new(0.0, 2.0 / (PI * x));
        let mut ipow = Complex64::new(1.0, 0.0);
        let coeffs = (0..=truncation)
            .map(|m| {
                let eps = if m == 0 { 1.0 } else { 2.0 };
                let dh = table.hankel1_deriv(m);
                // saturated Y′_m means the term is below double precision
                let term = if dh.im.is_finite() {
                    ipow * wronskian * eps / dh
                } else {
                    Complex64::default()
                };
                ipow *= Complex64::i();
                term
            })
            .collect();
        Ok(Self {
            radius,
            k,
            truncation,
            coeffs,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Modulus of the coefficient of `cos mθ` (zero beyond the truncation).
    pub fn coefficient_modulus(&self, m: usize) -> f64 {
        self.coeffs.get(m).map_or(0.0, |c| c.norm())
    }
}

/// `η(θ)`, with `θ` the polar angle measured from the incidence direction.
pub fn circle_total_field(spec: &CircleSeriesSpec, theta: f64) -> Complex64 {
    let mut acc = Complex64::default();
    for (m, c) in spec.coeffs.iter().enumerate().rev() {
        acc += c * (m as f64 * theta).cos();
    }
    acc
}

/// Samples of `η` at the nodes of `grid` on the unshifted circle
/// `γ(t) = r(cos(t/r), sin(t/r))` for incidence `alpha`.
pub fn circle_density_on_grid(
    spec: &CircleSeriesSpec,
    grid: &PeriodicGrid,
    alpha: Vec2,
) -> Result<DiscreteDensity> {
    check_period(spec, grid)?;
    let offset = alpha.y.atan2(alpha.x);
    let values = (0..grid.len())
        .map(|j| circle_total_field(spec, grid.node(j) / spec.radius - offset))
        .collect();
    DiscreteDensity::new(*grid, values, spec.k, DensityKind::TotalField)
}

/// Samples of `η` at the nodes of `grid` on `curve`, which must be the
/// centred circle of the series (possibly with a shifted parameter origin).
pub fn circle_density_on_boundary(
    spec: &CircleSeriesSpec,
    curve: &ParametricBoundary,
    grid: &PeriodicGrid,
    alpha: Vec2,
) -> Result<DiscreteDensity> {
    check_period(spec, grid)?;
    let offset = alpha.y.atan2(alpha.x);
    let values = (0..grid.len())
        .map(|j| {
            let p = curve.position(grid.node(j));
            circle_total_field(spec, p.y.atan2(p.x) - offset)
        })
        .collect();
    DiscreteDensity::new(*grid, values, spec.k, DensityKind::TotalField)
}

fn check_period(spec: &CircleSeriesSpec, grid: &PeriodicGrid) -> Result<()> {
    if (grid.half_period() - PI * spec.radius).abs() > 1e-12 * spec.radius {
        return Err(Error::InvalidArgument(format!(
            "grid period {} does not match circle circumference {}",
            grid.period(),
            2.0 * PI * spec.radius
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_symmetry() {
        let spec = CircleSeriesSpec::new(1.0, 30.0).unwrap();
        for i in 0..40 {
            let th = 0.17 * i as f64;
            assert!(
                (circle_total_field(&spec, th) - circle_total_field(&spec, -th)).norm() < 1e-12
            );
        }
    }

    #[test]
    fn tail_coefficients_negligible() {
        for kr in [10.0, 100.0, 400.0] {
            let spec = CircleSeriesSpec::new(1.0, kr).unwrap();
            let m = spec.truncation();
            assert!(spec.coefficient_modulus(m) < 1e-14, "kr = {kr}");
        }
    }

    #[test]
    fn period_mismatch_rejected() {
        let spec = CircleSeriesSpec::new(2.0, 10.0).unwrap();
        let grid = PeriodicGrid::new(64, PI).unwrap();
        assert!(circle_density_on_grid(&spec, &grid, Vec2::new(1.0, 0.0)).is_err());
    }
}
