//! Integer-order Bessel functions of real positive argument.
//!
//! `J_m` comes from Miller's backward recurrence normalized by
//! `J₀ + 2ΣJ_{2m} = 1`; `Y₀`, `Y₁` come from their power series for small
//! arguments, a Neumann series over the Miller `J` values in the middle
//! range, and Hankel's asymptotic expansion for large arguments. Higher
//! orders of `Y` follow by forward recurrence.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper end of the power-series branch for `Y₀`, `Y₁`.
pub const SERIES_MAX_ARG: f64 = 8.0;
/// Lower end of the asymptotic branch for `Y₀`, `Y₁` (and the scalar `J₀`, `J₁`).
pub const ASYMPTOTIC_MIN_ARG: f64 = 20.0;

const RESCALE_THRESHOLD: f64 = 1e250;
const Y_OVERFLOW: f64 = 1e300;

/// Cylinder functions `J_m, J′_m, Y_m, Y′_m` for `m = 0..=M` at one argument.
#[derive(Clone, Debug)]
pub struct BesselTable {
    pub x: f64,
    pub j: Vec<f64>,
    pub dj: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    /// First order at which `Y_m` (or `Y′_m`) exceeded the representable
    /// range; entries from there on are saturated at `−∞`.
    pub y_overflow_from: Option<usize>,
}

impl BesselTable {
    pub fn max_order(&self) -> usize {
        self.j.len() - 1
    }

    /// `H⁽¹⁾_m(x)`
    pub fn hankel1(&self, m: usize) -> Complex64 {
        Complex64::new(self.j[m], self.y[m])
    }

    /// `H⁽¹⁾′_m(x)`
    pub fn hankel1_deriv(&self, m: usize) -> Complex64 {
        Complex64::new(self.dj[m], self.dy[m])
    }
}

/// Start order for Miller's recurrence when `J_0..=J_M` is wanted at `x`.
fn miller_start(x: f64, max_order: usize) -> usize {
    let top = (max_order as f64).max(x.ceil());
    top as usize + (10.0 * (top + x).sqrt()).ceil() as usize + 20
}

/// `J_0..=J_n` by Miller's backward recurrence; `n` is at least `M`, and
/// includes all orders where `J` is non-negligible.
fn miller_j(x: f64, max_order: usize) -> Vec<f64> {
    let start = miller_start(x, max_order);
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-30;
    let mut norm = 0.0;
    for m in (1..=start).rev() {
        let next = 2.0 * m as f64 / x * vals[m] - vals[m + 1];
        vals[m - 1] = next;
        if (m - 1) % 2 == 0 && m - 1 > 0 {
            norm += 2.0 * next;
        }
        if next.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            for v in vals[m - 1..].iter_mut() {
                *v *= s;
            }
            norm *= s;
        }
    }
    norm += vals[0];
    let inv = 1.0 / norm;
    vals.truncate(start + 1);
    for v in vals.iter_mut() {
        *v *= inv;
    }
    vals
}

/// Power series for `J₀, J₁, Y₀, Y₁` (accurate for `x ≤ 8`).
fn series01(x: f64) -> [f64; 4] {
    let half = 0.5 * x;
    let q = -half * half;
    let log_term = (half).ln() + EULER_GAMMA;
    // J0 and Y0 regular part
    let mut t0 = 1.0;
    let mut j0 = 1.0;
    let mut y0_reg = 0.0;
    let mut harmonic = 0.0;
    // J1 and Y1 regular part
    let mut t1 = half;
    let mut j1 = half;
    let mut y1_reg = (2.0 * EULER_GAMMA - 1.0) * half; // −(ψ(1)+ψ(2))·(x/2)
    let mut h_m = 0.0;
    for m in 1..80 {
        let mf = m as f64;
        harmonic += 1.0 / mf;
        t0 *= q / (mf * mf);
        j0 += t0;
        y0_reg -= harmonic * t0;
        t1 *= q / (mf * (mf + 1.0));
        j1 += t1;
        h_m += 1.0 / mf;
        let h_m1 = h_m + 1.0 / (mf + 1.0);
        y1_reg -= (h_m + h_m1 - 2.0 * EULER_GAMMA) * t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    let y0 = FRAC_2_PI * (log_term * j0 + y0_reg);
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * half.ln() * j1 + y1_reg / PI;
    [j0, j1, y0, y1]
}

/// Regular part of `Y₁`: `Y₁(z) − (2/π)J₁(z) ln(z/2) + 2/(πz)`, an odd
/// entire function of `z`.
pub fn y1_regular(z: f64) -> f64 {
    if z <= SERIES_MAX_ARG {
        let half = 0.5 * z;
        let q = -half * half;
        let mut t1 = half;
        let mut sum = (2.0 * EULER_GAMMA - 1.0) * half;
        let mut h_m = 0.0;
        for m in 1..80 {
            let mf = m as f64;
            t1 *= q / (mf * (mf + 1.0));
            h_m += 1.0 / mf;
            let h_m1 = h_m + 1.0 / (mf + 1.0);
            sum -= (h_m + h_m1 - 2.0 * EULER_GAMMA) * t1;
            if t1.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum / PI
    } else {
        let [_, j1, _, y1] = bessel01(z);
        y1 - FRAC_2_PI * j1 * (0.5 * z).ln() + FRAC_2_PI / z
    }
}

/// Neumann series for `Y₀`, `Y₁` in terms of Miller `J` values.
fn neumann01(x: f64) -> [f64; 4] {
    let j = miller_j(x, 1);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * j[0] / x + FRAC_2_PI * log_term * j[1] + FRAC_2_PI * s1;
    [j[0], j[1], y0, y1]
}

/// Hankel asymptotic expansion for `J_ν, Y_ν`, ν ∈ {0, 1}.
fn asymptotic(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev: f64 = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) * inv8x / k as f64;
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        // k odd contributes to Q, k even to P, with alternating signs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    // χ = x − (ν/2 + 1/4)π; cos χ and sin χ from cos x, sin x
    let (sx, cx) = x.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (cos_chi, sin_chi) = if nu == 0 {
        ((cx + sx) * r, (sx - cx) * r)
    } else {
        ((sx - cx) * r, -(cx + sx) * r)
    };
    let amp = (FRAC_2_PI / x).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// `[J₀(x), J₁(x), Y₀(x), Y₁(x)]` for `x > 0`.
pub fn bessel01(x: f64) -> [f64; 4] {
    if x <= SERIES_MAX_ARG {
        series01(x)
    } else if x < ASYMPTOTIC_MIN_ARG {
        neumann01(x)
    } else {
        let (j0, y0) = asymptotic(0, x);
        let (j1, y1) = asymptotic(1, x);
        [j0, j1, y0, y1]
    }
}

/// `(J₁(x), Y₁(x))` for `x > 0`.
pub fn bessel1(x: f64) -> (f64, f64) {
    if x < ASYMPTOTIC_MIN_ARG {
        let v = bessel01(x);
        (v[1], v[3])
    } else {
        asymptotic(1, x)
    }
}

/// `(J₁(z), y1_regular(z))` for `z > 0`, sharing work between the two.
pub fn j1_and_y1_regular(z: f64) -> (f64, f64) {
    if z <= SERIES_MAX_ARG {
        (series01(z)[1], y1_regular(z))
    } else {
        let (j1, y1) = bessel1(z);
        (j1, y1 - FRAC_2_PI * j1 * (0.5 * z).ln() + FRAC_2_PI / z)
    }
}

/// Table of `J_m, J′_m, Y_m, Y′_m`, `m = 0..=max_order`, at `x > 0`.
pub fn bessel_table(x: f64, max_order: usize) -> Result<BesselTable> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument must be positive and finite, got {x}"
        )));
    }
    let n = max_order + 1;
    let mut j = miller_j(x, max_order + 1);
    j.truncate(n + 1);
    j.resize(n + 1, 0.0);
    let [_, _, y0, y1] = bessel01(x);
    let mut y = Vec::with_capacity(n + 1);
    y.push(y0);
    y.push(y1);
    let mut overflow = None;
    for m in 1..n {
        let next = 2.0 * m as f64 / x * y[m] - y[m - 1];
        y.push(next);
    }
    let mut dj = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    dj.push(-j[1]);
    dy.push(-y[1]);
    for m in 1..n {
        let mf = m as f64;
        dj.push(j[m - 1] - mf / x * j[m]);
        dy.push(y[m - 1] - mf / x * y[m]);
    }
    j.truncate(n);
    y.truncate(n);
    for m in 0..n {
        if !(y[m].abs() < Y_OVERFLOW) || !(dy[m].abs() < Y_OVERFLOW) {
            overflow = Some(m);
            for i in m..n {
                y[i] = f64::NEG_INFINITY;
                dy[i] = f64::INFINITY;
            }
            break;
        }
    }
    Ok(BesselTable {
        x,
        j,
        dj,
        y,
        dy,
        y_overflow_from: overflow,
    })
}

/// `H⁽¹⁾_m(x) = J_m(x) + iY_m(x)`.
pub fn hankel1(m: usize, x: f64) -> Result<Complex64> {
    let t = bessel_table(x, m)?;
    saturated(&t, m)?;
    Ok(t.hankel1(m))
}

/// `H⁽¹⁾′_m(x)`.
pub fn hankel1_deriv(m: usize, x: f64) -> Result<Complex64> {
    let t = bessel_table(x, m)?;
    saturated(&t, m)?;
    Ok(t.hankel1_deriv(m))
}

fn saturated(t: &BesselTable, m: usize) -> Result<()> {
    match t.y_overflow_from {
        Some(first) if first <= m => Err(Error::Numeric(format!(
            "Y_{m}({}) overflows double precision",
            t.x
        ))),
        _ => Ok(()),
    }
}

/// Truncation order `⌈x + 10 x^{1/3} + 20⌉` for cylindrical-harmonic series
/// at argument `x = kr`.
pub fn series_truncation(x: f64) -> usize {
    (x + 10.0 * x.cbrt() + 20.0).ceil() as usize
}
