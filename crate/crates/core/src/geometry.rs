//! Smooth strictly convex boundary curves in arc-length form, plane-wave
//! incidence, and shadow-boundary location.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A vector (or point) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation by `angle` radians counterclockwise.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// A smooth closed curve in an arbitrary (not necessarily arc-length)
/// counterclockwise parameterization, with two derivatives.
pub trait ClosedCurve: Send + Sync + fmt::Debug {
    /// Period of the raw parameter.
    fn period(&self) -> f64 {
        TAU
    }
    fn point(&self, theta: f64) -> Vec2;
    fn d1(&self, theta: f64) -> Vec2;
    fn d2(&self, theta: f64) -> Vec2;
    /// `point(theta1) - point(theta2)`. Implementations with a closed form
    /// should override this to avoid cancellation for nearby parameters.
    fn chord(&self, theta1: f64, theta2: f64) -> Vec2 {
        self.point(theta1) - self.point(theta2)
    }
}

/// Ellipse `R(rotation)·(a cos θ, b sin θ)`.
#[derive(Clone, Copy, Debug)]
pub struct RawEllipse {
    pub semi_a: f64,
    pub semi_b: f64,
    pub rotation: f64,
}

impl ClosedCurve for RawEllipse {
    fn point(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(self.semi_a * c, self.semi_b * s).rotated(self.rotation)
    }

    fn d1(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(-self.semi_a * s, self.semi_b * c).rotated(self.rotation)
    }

    fn d2(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(-self.semi_a * c, -self.semi_b * s).rotated(self.rotation)
    }

    fn chord(&self, theta1: f64, theta2: f64) -> Vec2 {
        let half_sum = 0.5 * (theta1 + theta2);
        let half_diff = (0.5 * (theta1 - theta2)).sin();
        let (s, c) = half_sum.sin_cos();
        Vec2::new(
            -2.0 * self.semi_a * s * half_diff,
            2.0 * self.semi_b * c * half_diff,
        )
        .rotated(self.rotation)
    }
}

/// Spectral arc-length map of a raw closed curve: the speed |γ̃′| is
/// expanded in a Fourier series by the periodic trapezoidal rule and
/// integrated term by term.
#[derive(Clone, Debug)]
struct ArcLengthMap {
    raw_period: f64,
    mean_speed: f64,
    /// `c_m / (i m ω)` for m = 1, 2, …
    integrated: Vec<Complex64>,
}

impl ArcLengthMap {
    fn build(raw: &dyn ClosedCurve, n_quad: usize) -> Result<Self> {
        if n_quad < 8 {
            return Err(Error::InvalidArgument(format!(
                "n_quad must be at least 8, got {n_quad}"
            )));
        }
        let period = raw.period();
        let omega = TAU / period;
        let nodes: Vec<f64> = (0..n_quad)
            .map(|j| j as f64 * period / n_quad as f64)
            .collect();
        let mut speed = Vec::with_capacity(n_quad);
        for &theta in &nodes {
            let d1 = raw.d1(theta);
            let d2 = raw.d2(theta);
            let sp = d1.norm();
            let kappa = d1.cross(d2) / (sp * sp * sp);
            if !(kappa > 0.0) {
                return Err(Error::NotConvex {
                    parameter: theta,
                    curvature: kappa,
                });
            }
            speed.push(sp);
        }
        let mean_speed = speed.iter().sum::<f64>() / n_quad as f64;
        let mut integrated = Vec::new();
        for m in 1..n_quad / 2 {
            let mut c = Complex64::new(0.0, 0.0);
            for (theta, sp) in nodes.iter().zip(&speed) {
                c += Complex64::from_polar(*sp, -(m as f64) * omega * theta);
            }
            c /= n_quad as f64;
            integrated.push(c / Complex64::new(0.0, m as f64 * omega));
        }
        // drop the numerically zero tail
        let cutoff = 1e-18 * mean_speed;
        while integrated.last().is_some_and(|c| c.norm() < cutoff) {
            integrated.pop();
        }
        Ok(Self {
            raw_period: period,
            mean_speed,
            integrated,
        })
    }

    fn length(&self) -> f64 {
        self.mean_speed * self.raw_period
    }

    /// Arc length from raw parameter 0 to `theta` (theta in [0, raw_period]).
    fn arc_length(&self, theta: f64) -> f64 {
        let omega = TAU / self.raw_period;
        let step = Complex64::from_polar(1.0, omega * theta);
        let mut z = step;
        let mut acc = 0.0;
        for c in &self.integrated {
            acc += (c * (z - 1.0)).re;
            z *= step;
        }
        self.mean_speed * theta + 2.0 * acc
    }

    /// Raw parameter with arc length `s` (s reduced to [0, length)).
    fn raw_parameter(&self, raw: &dyn ClosedCurve, s: f64) -> Result<f64> {
        let length = self.length();
        let s = s.rem_euclid(length);
        let (mut lo, mut hi): (f64, f64) = (0.0, self.raw_period);
        let mut theta = s / self.mean_speed;
        for _ in 0..50 {
            let g = self.arc_length(theta) - s;
            if g == 0.0 {
                return Ok(theta);
            }
            if g > 0.0 {
                hi = hi.min(theta);
            } else {
                lo = lo.max(theta);
            }
            let step = g / raw.d1(theta).norm();
            let mut next = theta - step;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - theta).abs() <= 2e-16 * (1.0 + theta.abs()) || hi - lo < 1e-15 {
                return Ok(next);
            }
            theta = next;
        }
        // Newton may cycle at the roundoff level of the arc-length sum
        if (self.arc_length(theta) - s).abs() <= 1e-13 * length {
            return Ok(theta);
        }
        Err(Error::Numeric(format!(
            "arc-length inversion did not converge for s = {s}"
        )))
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Circle {
        radius: f64,
    },
    Mapped {
        raw: Arc<dyn ClosedCurve>,
        map: Arc<ArcLengthMap>,
    },
}

/// Position, derivatives, outward normal and curvature at one parameter.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub position: Vec2,
    /// γ′, unit length.
    pub tangent: Vec2,
    /// γ″ (equals −κν in arc length).
    pub second: Vec2,
    /// Outward unit normal.
    pub normal: Vec2,
    pub curvature: f64,
}

/// A smooth strictly convex closed curve parameterized counterclockwise by
/// arc length, with period 2P = |∂K|.
///
/// Cloning is cheap; the underlying curve data is shared.
#[derive(Clone, Debug)]
pub struct ParametricBoundary {
    repr: Repr,
    half_period: f64,
    /// Parameter origin shift δ: `γ(t) = base(t − δ)`.
    shift: f64,
}

/// Circle of the given radius centered at the origin, γ(t) = r(cos(t/r), sin(t/r)).
pub fn make_circle(radius: f64) -> Result<ParametricBoundary> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    Ok(ParametricBoundary {
        repr: Repr::Circle { radius },
        half_period: PI * radius,
        shift: 0.0,
    })
}

/// Default number of trapezoidal nodes for the arc-length map.
pub const DEFAULT_ARC_LENGTH_NODES: usize = 1024;

/// Ellipse with semi-axes `semi_a` (along x before rotation) and `semi_b`,
/// rotated counterclockwise by `rotation` radians, in arc-length form.
pub fn make_ellipse(semi_a: f64, semi_b: f64, rotation: f64) -> Result<ParametricBoundary> {
    if !(semi_a > 0.0 && semi_b > 0.0) || !semi_a.is_finite() || !semi_b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ellipse semi-axes must be positive, got ({semi_a}, {semi_b})"
        )));
    }
    if !rotation.is_finite() {
        return Err(Error::InvalidArgument(
            "ellipse rotation must be finite".into(),
        ));
    }
    arc_length_form(
        Arc::new(RawEllipse {
            semi_a,
            semi_b,
            rotation,
        }),
        DEFAULT_ARC_LENGTH_NODES,
    )
}

/// Reparameterizes a raw closed curve by arc length.
///
/// Arc length is obtained from `n_quad`-point periodic trapezoidal
/// quadrature of the speed (exact for the resulting trigonometric
/// interpolant) and inverted per query by Newton iteration with a
/// bisection safeguard.
pub fn arc_length_form(raw: Arc<dyn ClosedCurve>, n_quad: usize) -> Result<ParametricBoundary> {
    let map = ArcLengthMap::build(raw.as_ref(), n_quad)?;
    let half_period = 0.5 * map.length();
    Ok(ParametricBoundary {
        repr: Repr::Mapped {
            raw,
            map: Arc::new(map),
        },
        half_period,
        shift: 0.0,
    })
}

const CURVATURE_FD_STEP: f64 = 1e-3;

impl ParametricBoundary {
    /// P, half the perimeter.
    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    /// 2P, the perimeter.
    pub fn length(&self) -> f64 {
        2.0 * self.half_period
    }

    /// Current parameter origin shift.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Same curve with the parameter origin moved so that `γ_new(t) = γ(t − delta)`.
    pub fn shifted(&self, delta: f64) -> ParametricBoundary {
        let mut out = self.clone();
        out.shift = (self.shift + delta).rem_euclid(self.length());
        out
    }

    /// Arc length of the raw curve between raw parameters 0 and `theta`.
    /// For a circle this is `radius·theta`.
    pub fn raw_arc_length(&self, theta: f64) -> f64 {
        match &self.repr {
            Repr::Circle { radius } => radius * theta,
            Repr::Mapped { map, .. } => {
                let turns = (theta / map.raw_period).floor();
                turns * map.length() + map.arc_length(theta - turns * map.raw_period)
            }
        }
    }

    fn raw_parameter(&self, t: f64) -> f64 {
        let u = t - self.shift;
        match &self.repr {
            Repr::Circle { radius } => u / radius,
            Repr::Mapped { raw, map } => map
                .raw_parameter(raw.as_ref(), u)
                .expect("arc-length inversion is safeguarded by bisection"),
        }
    }

    pub fn frame(&self, t: f64) -> Frame {
        match &self.repr {
            Repr::Circle { radius } => {
                let theta = (t - self.shift) / radius;
                let (s, c) = theta.sin_cos();
                let normal = Vec2::new(c, s);
                Frame {
                    position: normal * *radius,
                    tangent: Vec2::new(-s, c),
                    second: normal * (-1.0 / radius),
                    normal,
                    curvature: 1.0 / radius,
                }
            }
            Repr::Mapped { raw, .. } => Self::mapped_frame(raw.as_ref(), self.raw_parameter(t)),
        }
    }

    fn mapped_frame(raw: &dyn ClosedCurve, theta: f64) -> Frame {
        let d1 = raw.d1(theta);
        let d2 = raw.d2(theta);
        let speed = d1.norm();
        let tangent = d1 * (1.0 / speed);
        let second = (d2 - tangent * d2.dot(tangent)) * (1.0 / (speed * speed));
        Frame {
            position: raw.point(theta),
            tangent,
            second,
            normal: Vec2::new(tangent.y, -tangent.x),
            curvature: d1.cross(d2) / (speed * speed * speed),
        }
    }

    /// γ(t)
    pub fn position(&self, t: f64) -> Vec2 {
        self.frame(t).position
    }

    /// γ′(t)
    pub fn tangent(&self, t: f64) -> Vec2 {
        self.frame(t).tangent
    }

    /// γ″(t)
    pub fn second_derivative(&self, t: f64) -> Vec2 {
        self.frame(t).second
    }

    /// Outward unit normal ν(t).
    pub fn normal(&self, t: f64) -> Vec2 {
        self.frame(t).normal
    }

    /// κ(t) > 0.
    pub fn curvature(&self, t: f64) -> f64 {
        self.frame(t).curvature
    }

    /// (κ′(t), κ″(t)) by fourth-order central differences.
    pub fn curvature_derivatives(&self, t: f64) -> (f64, f64) {
        if let Repr::Circle { .. } = self.repr {
            return (0.0, 0.0);
        }
        let h = CURVATURE_FD_STEP;
        let k = |d: f64| self.curvature(t + d * h);
        let (km2, km1, k0, kp1, kp2) = (k(-2.0), k(-1.0), k(0.0), k(1.0), k(2.0));
        let d1 = (km2 - 8.0 * km1 + 8.0 * kp1 - kp2) / (12.0 * h);
        let d2 = (-km2 + 16.0 * km1 - 30.0 * k0 + 16.0 * kp1 - kp2) / (12.0 * h * h);
        (d1, d2)
    }

    /// γ(t) − γ(s), evaluated without cancellation for nearby parameters.
    pub fn chord(&self, t: f64, s: f64) -> Vec2 {
        match &self.repr {
            Repr::Circle { .. } => self.chord_points(&self.sample(t), &self.sample(s)),
            Repr::Mapped { .. } => {
                // the raw parameters must follow the wrapped arc-length difference
                let h = wrap_symmetric(t - s, self.length());
                self.chord_points(&self.sample(s + h), &self.sample(s))
            }
        }
    }

    /// Frame at `t` together with the underlying raw parameter, for
    /// repeated chord evaluation between fixed nodes.
    pub fn sample(&self, t: f64) -> BoundaryPoint {
        let raw_t = self.raw_parameter(t);
        let frame = match &self.repr {
            Repr::Circle { .. } => self.frame(t),
            Repr::Mapped { raw, .. } => Self::mapped_frame(raw.as_ref(), raw_t),
        };
        BoundaryPoint {
            t,
            frame,
            raw: raw_t,
        }
    }

    /// `a.position − b.position` without cancellation for nearby points.
    pub fn chord_points(&self, a: &BoundaryPoint, b: &BoundaryPoint) -> Vec2 {
        match &self.repr {
            Repr::Circle { radius } => {
                let half_diff = (0.5 * (a.raw - b.raw)).sin();
                let (hs, hc) = (0.5 * (a.raw + b.raw)).sin_cos();
                Vec2::new(
                    -2.0 * radius * hs * half_diff,
                    2.0 * radius * hc * half_diff,
                )
            }
            Repr::Mapped { raw, .. } => {
                let h = wrap_symmetric(a.t - b.t, self.length());
                let (x, mut y) = (a.raw, b.raw);
                let period = raw.period();
                if h > 0.0 && x < y {
                    y -= period;
                } else if h < 0.0 && x > y {
                    y += period;
                }
                raw.chord(x, y)
            }
        }
    }
}

/// A boundary point with cached frame, produced by
/// [`ParametricBoundary::sample`].
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint {
    pub t: f64,
    pub frame: Frame,
    raw: f64,
}

/// Reduces `x` into (−period/2, period/2].
pub fn wrap_symmetric(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r > 0.5 * period { r - period } else { r }
}

/// Lower bound k₀ on admissible wavenumbers used by [`IncidentWave::new`].
pub const DEFAULT_MIN_WAVENUMBER: f64 = 1.0;

/// Plane wave `e^{ik α·x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncidentWave {
    direction: Vec2,
    k: f64,
}

impl IncidentWave {
    /// Plane wave with the given direction (normalized) and wavenumber `k ≥ 1`.
    pub fn new(direction: Vec2, k: f64) -> Result<Self> {
        Self::with_min_wavenumber(direction, k, DEFAULT_MIN_WAVENUMBER)
    }

    pub fn with_min_wavenumber(direction: Vec2, k: f64, k_min: f64) -> Result<Self> {
        let len = direction.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidArgument(
                "incidence direction must be a nonzero finite vector".into(),
            ));
        }
        if !(k_min > 0.0) || !(k >= k_min) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavenumber {k} below the admissible minimum {k_min}"
            )));
        }
        Ok(Self {
            direction: direction * (1.0 / len),
            k,
        })
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Same direction, different wavenumber.
    pub fn with_wavenumber(&self, k: f64) -> Result<Self> {
        Self::new(self.direction, k)
    }

    /// `e^{ik α·x}`
    pub fn value_at(&self, x: Vec2) -> Complex64 {
        Complex64::from_polar(1.0, self.k * self.direction.dot(x))
    }
}

/// Shadow-boundary parameters `0 < t1 < t2 < 2P` with `t1 + t2 = 2P`; the
/// illuminated arc is `(t1, t2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShadowGeometry {
    pub t1: f64,
    pub t2: f64,
    pub half_period: f64,
}

impl ShadowGeometry {
    /// True when `t` (mod 2P) lies on the open illuminated arc.
    pub fn is_illuminated(&self, t: f64) -> bool {
        let t = t.rem_euclid(2.0 * self.half_period);
        t > self.t1 && t < self.t2
    }
}

const SHADOW_SCAN_SAMPLES: usize = 4096;

/// Finds the two shadow boundaries of `curve` for incidence direction
/// `alpha` and returns them together with the curve re-parameterized so
/// that `t1 + t2 = 2P`.
pub fn shadow_geometry(
    curve: &ParametricBoundary,
    alpha: Vec2,
) -> Result<(ShadowGeometry, ParametricBoundary)> {
    let len = alpha.norm();
    if !(len > 0.0) {
        return Err(Error::InvalidArgument("zero incidence direction".into()));
    }
    let alpha = alpha * (1.0 / len);
    let period = curve.length();
    let f = |t: f64| alpha.dot(curve.normal(t));
    let h = period / SHADOW_SCAN_SAMPLES as f64;
    let values: Vec<f64> = (0..SHADOW_SCAN_SAMPLES).map(|i| f(i as f64 * h)).collect();
    // (left node index, entering illuminated?)
    let mut crossings = Vec::new();
    for i in 0..SHADOW_SCAN_SAMPLES {
        let a = values[i];
        let b = values[(i + 1) % SHADOW_SCAN_SAMPLES];
        if a == 0.0 || a * b < 0.0 {
            crossings.push((i, a > 0.0 || (a == 0.0 && b < 0.0)));
        }
    }
    if crossings.len() != 2 || crossings[0].1 == crossings[1].1 {
        return Err(Error::Geometry(format!(
            "expected exactly two sign changes of α·ν, found {}",
            crossings.len()
        )));
    }
    let refine = |i: usize| -> f64 {
        let (mut lo, mut hi) = (i as f64 * h, (i + 1) as f64 * h);
        let mut flo = f(lo);
        if flo == 0.0 {
            return lo;
        }
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        // Newton polish; d/dt (α·ν) = κ α·γ′
        let mut t = 0.5 * (lo + hi);
        for _ in 0..8 {
            let fr = curve.frame(t);
            let step = alpha.dot(fr.normal) / (fr.curvature * alpha.dot(fr.tangent));
            let next = t - step;
            if !(next >= lo && next <= hi) {
                break;
            }
            t = next;
            if step.abs() < 1e-16 {
                break;
            }
        }
        t
    };
    let (enter, leave) = if crossings[0].1 {
        (refine(crossings[0].0), refine(crossings[1].0))
    } else {
        (refine(crossings[1].0), refine(crossings[0].0))
    };
    let lit = (leave - enter).rem_euclid(period);
    let half = curve.half_period();
    let t1 = half - 0.5 * lit;
    let t2 = half + 0.5 * lit;
    let shifted = curve.shifted(t1 - enter);
    Ok((
        ShadowGeometry {
            t1,
            t2,
            half_period: half,
        },
        shifted,
    ))
}
