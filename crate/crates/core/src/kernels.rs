//! Double-layer Helmholtz kernel split into a part multiplying the periodic
//! logarithm `ln(4 sin²(π(t−s)/(2P)))` and a smooth remainder, plus incident
//! traces.
//!
//! With `R = |γ(t) − γ(s)|` and `q = ⟨γ(t) − γ(s), ν(s)⟩` the kernel is
//! `(ik/4) H⁽¹⁾₁(kR) q/R`. Writing `Y₁ = (2/π) J₁ ln(z/2) − 2/(πz) + Ŷ₁`
//! gives the log coefficient `−(k/4π) J₁(kR) q/R`; everything else is smooth
//! and tends to `−κ/(4π)` on the diagonal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, IncidentWave, ParametricBoundary, wrap_symmetric};
use crate::specfun::{bessel1, j1_and_y1_regular};

/// Below this parameter separation the smooth part is evaluated from its
/// Taylor expansion about the diagonal.
pub const TAYLOR_BRANCH_WIDTH: f64 = 1e-4;

/// A kernel `K(t, s) = K₁(t, s)·ln(4 sin²(π(t−s)/(2P))) + K₂(t, s)`.
pub trait KernelSplit: Sync {
    /// Per-node data cached once per grid.
    type Nodes: Sync;

    fn prepare(&self, nodes: &[f64]) -> Self::Nodes;

    /// `(K₁, K₂)` between target node `i` and source node `j`.
    fn split_nodes(&self, nodes: &Self::Nodes, i: usize, j: usize) -> (Complex64, Complex64);

    /// `(K₁(t, s), K₂(t, s))` at arbitrary parameters.
    fn split(&self, t: f64, s: f64) -> (Complex64, Complex64);
}

/// `ln(4 sin²(π h/(2P)))`
pub fn periodic_log(h: f64, half_period: f64) -> f64 {
    let s = (0.5 * PI * h / half_period).sin();
    (4.0 * s * s).ln()
}

/// Splitting of the double-layer kernel on an arc-length boundary.
#[derive(Clone, Debug)]
pub struct DoubleLayerSplit {
    curve: ParametricBoundary,
    k: f64,
}

impl DoubleLayerSplit {
    pub fn new(curve: &ParametricBoundary, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        Ok(Self {
            curve: curve.clone(),
            k,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// The unsplit kernel `(ik/4) H⁽¹⁾₁(kR) q/R` for `t ≠ s`.
    pub fn direct(&self, t: f64, s: f64) -> Complex64 {
        let c = self.curve.chord(t, s);
        let r = c.norm();
        let q = c.dot(self.curve.normal(s));
        let (j1, y1) = bessel1(self.k * r);
        Complex64::new(-y1, j1) * (0.25 * self.k * q / r)
    }

    /// `K₂(t, t) = −κ(t)/(4π)`.
    pub fn diagonal(&self, t: f64) -> Complex64 {
        Complex64::new(-self.curve.curvature(t) / (4.0 * PI), 0.0)
    }

    fn eval(&self, t: &BoundaryPoint, s: &BoundaryPoint) -> (Complex64, Complex64) {
        let half = self.curve.half_period();
        let h = wrap_symmetric(t.t - s.t, 2.0 * half);
        let kappa = s.frame.curvature;
        if h == 0.0 {
            return (
                Complex64::default(),
                Complex64::new(-kappa / (4.0 * PI), 0.0),
            );
        }
        if h.abs() < TAYLOR_BRANCH_WIDTH {
            let (dk, ddk) = self.curve.curvature_derivatives(s.t);
            let h2 = h * h;
            let q_r2 = -0.5 * kappa - dk * h / 6.0 - ddk * h2 / 24.0;
            let r = h.abs() * (1.0 - kappa * kappa * h2 / 24.0);
            let scale = PI / half;
            let ln_rs = 2.0 * (half / PI).ln() + h2 * (scale * scale - kappa * kappa) / 12.0;
            return self.combine(r, q_r2 * r, q_r2, ln_rs);
        }
        let c = self.curve.chord_points(t, s);
        let r = c.norm();
        let q = c.dot(s.frame.normal);
        let ln_rs = 2.0 * r.ln() - periodic_log(h, half);
        self.combine(r, q / r, q / (r * r), ln_rs)
    }

    /// `(K₁, K₂)` from `R`, `q/R`, `q/R²` and `ln(R²/S)`.
    fn combine(&self, r: f64, q_r: f64, q_r2: f64, ln_rs: f64) -> (Complex64, Complex64) {
        let k = self.k;
        let (j1, y1_reg) = j1_and_y1_regular(k * r);
        let k1 = -k / (4.0 * PI) * j1 * q_r;
        let re = -k / (2.0 * PI) * j1 * q_r * ((0.5 * k).ln() + 0.5 * ln_rs) + q_r2 / (2.0 * PI)
            - 0.25 * k * y1_reg * q_r;
        let im = 0.25 * k * j1 * q_r;
        (Complex64::new(k1, 0.0), Complex64::new(re, im))
    }
}

impl KernelSplit for DoubleLayerSplit {
    type Nodes = Vec<BoundaryPoint>;

    fn prepare(&self, nodes: &[f64]) -> Vec<BoundaryPoint> {
        nodes.par_iter().map(|&t| self.curve.sample(t)).collect()
    }

    fn split_nodes(
        &self,
        nodes: &Vec<BoundaryPoint>,
        i: usize,
        j: usize,
    ) -> (Complex64, Complex64) {
        self.eval(&nodes[i], &nodes[j])
    }

    fn split(&self, t: f64, s: f64) -> (Complex64, Complex64) {
        self.eval(&self.curve.sample(t), &self.curve.sample(s))
    }
}

/// The identically zero kernel.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroKernel;

impl KernelSplit for ZeroKernel {
    type Nodes = ();

    fn prepare(&self, _nodes: &[f64]) {}

    fn split_nodes(&self, _nodes: &(), _i: usize, _j: usize) -> (Complex64, Complex64) {
        (Complex64::default(), Complex64::default())
    }

    fn split(&self, _t: f64, _s: f64) -> (Complex64, Complex64) {
        (Complex64::default(), Complex64::default())
    }
}

/// `u^inc(γ(t)) = e^{ik α·γ(t)}`
pub fn incident_trace(curve: &ParametricBoundary, wave: &IncidentWave, t: f64) -> Complex64 {
    wave.value_at(curve.position(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Vec2, make_circle};

    #[test]
    fn log_coefficient_vanishes_on_diagonal() {
        let c = make_circle(1.0).unwrap();
        let split = DoubleLayerSplit::new(&c, 10.0).unwrap();
        for t in [0.0, 1.0, 4.0] {
            let (k1, k2) = split.split(t, t);
            assert_eq!(k1, Complex64::default());
            assert_eq!(k2, split.diagonal(t));
        }
    }

    #[test]
    fn circle_diagonal_is_constant() {
        let c = make_circle(1.0).unwrap();
        let split = DoubleLayerSplit::new(&c, 10.0).unwrap();
        let d0 = split.split(0.0, 0.0).1;
        for i in 1..50 {
            let t = i as f64 * 0.1234;
            assert!((split.split(t, t).1 - d0).norm() < 1e-12);
        }
        assert!((d0.re + 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_wavenumber() {
        let c = make_circle(1.0).unwrap();
        assert!(DoubleLayerSplit::new(&c, 0.0).is_err());
        assert!(DoubleLayerSplit::new(&c, f64::NAN).is_err());
    }

    #[test]
    fn incident_trace_substitution() {
        let c = make_circle(1.0).unwrap();
        let w = IncidentWave::new(Vec2::new(1.0, 0.0), 50.0).unwrap();
        let v = incident_trace(&c, &w, 0.0);
        assert!((v - Complex64::from_polar(1.0, 50.0)).norm() < 1e-13);
        let v = incident_trace(&c, &w, PI);
        assert!((v - Complex64::from_polar(1.0, -50.0)).norm() < 1e-12);
        for i in 0..20 {
            assert!((incident_trace(&c, &w, i as f64 * 0.37).norm() - 1.0).abs() < 1e-15);
        }
    }
}
