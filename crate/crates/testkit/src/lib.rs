//! Independent numerical oracles for the `hfbem` test suites.
//!
//! Nothing in here shares code with the solver crate: quadrature is adaptive
//! Gauss–Legendre, Bessel functions come from their integral representations,
//! and root location is plain bisection on dense scans. Tests use these to
//! freeze expected values that the production code paths must reproduce.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Adaptive Gauss–Legendre quadrature of a real function.
///
/// Each panel is integrated with 15 and 30 points; panels are bisected
/// until the two agree to `tol` (scaled by the panel share of the interval).
/// Integrable endpoint singularities (logarithmic, algebraic) are handled
/// by the geometric refinement this produces.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let lo = gauss_legendre(15);
    let hi = gauss_legendre(30);
    // (integral, integral of |f|)
    let rule = |rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64| -> (f64, f64) {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let (mut v, mut m) = (0.0, 0.0);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let y = w * f(c + r * x);
            v += y;
            m += y.abs();
        }
        (v * r, m * r.abs())
    };
    let total = (b - a).abs();
    let mut stack = vec![(a, b, 0usize)];
    let mut sum = 0.0;
    while let Some((a, b, depth)) = stack.pop() {
        let (coarse, _) = rule(&lo, a, b);
        let (fine, magnitude) = rule(&hi, a, b);
        let share = ((b - a).abs() / total).max(1e-3);
        // roundoff floor of the panel sum
        let floor = 64.0 * f64::EPSILON * magnitude;
        if (coarse - fine).abs() <= (tol * share).max(floor) || depth > 48 {
            sum += fine;
        } else {
            let m = 0.5 * (a + b);
            stack.push((a, m, depth + 1));
            stack.push((m, b, depth + 1));
        }
    }
    sum
}

/// Complex-valued variant of [`integrate`], integrating real and imaginary
/// parts separately. Returns `(re, im)`.
pub fn integrate_complex<F: Fn(f64) -> (f64, f64)>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let re = integrate(|x| f(x).0, a, b, tol);
    let im = integrate(|x| f(x).1, a, b, tol);
    (re, im)
}

/// J_n(x) from Bessel's integral (1/π)∫₀^π cos(nτ − x sin τ) dτ.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let nf = n as f64;
    let panels = ((x.abs() + nf.abs()) / 2.0).ceil().max(4.0) as usize;
    let h = PI / panels as f64;
    (0..panels)
        .map(|p| {
            let a = p as f64 * h;
            integrate(|t| (nf * t - x * t.sin()).cos(), a, a + h, 1e-16)
        })
        .sum::<f64>()
        / PI
}

/// Y_n(x) from the Schläfli-type integral representation
/// Y_n(x) = (1/π)∫₀^π sin(x sin τ − nτ) dτ − (1/π)∫₀^∞ (e^{nt} + (−1)^n e^{−nt}) e^{−x sinh t} dt.
pub fn bessel_y(n: i32, x: f64) -> f64 {
    let nf = n as f64;
    let panels = ((x + nf.abs()) / 2.0).ceil().max(4.0) as usize;
    let h = PI / panels as f64;
    let first: f64 = (0..panels)
        .map(|p| {
            let a = p as f64 * h;
            integrate(|t| (x * t.sin() - nf * t).sin(), a, a + h, 1e-16)
        })
        .sum();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let g = |t: f64| ((nf * t - x * t.sinh()).exp()) + sign * (-(nf * t) - x * t.sinh()).exp();
    // the integrand is negligible once x sinh t − n t exceeds ~750
    let mut upper = 1.0;
    while x * f64::sinh(upper) - nf * upper < 750.0 {
        upper += 0.5;
    }
    let mut second = 0.0;
    let steps = 64;
    let dh = upper / steps as f64;
    for i in 0..steps {
        let a = i as f64 * dh;
        second += integrate(g, a, a + dh, 1e-17);
    }
    (first - second) / PI
}

/// Locates every sign change of `f` on a uniform scan of `[a, b)` with
/// `samples` points and refines each by bisection. Returns the roots in
/// increasing order.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let h = (b - a) / samples as f64;
    let mut roots = Vec::new();
    let mut prev = f(a);
    for i in 1..=samples {
        let x = a + i as f64 * h;
        let cur = f(x);
        if prev == 0.0 {
            roots.push(x - h);
        } else if prev * cur < 0.0 {
            roots.push(bisect(&f, x - h, x));
        }
        prev = cur;
    }
    roots
}

/// Plain bisection to full double precision.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Series J₀(x) = Σ (−1)^m (x/2)^{2m}/(m!)², summed until terms vanish.
pub fn j0_series(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= q / (m as f64 * m as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}
