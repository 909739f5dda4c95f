//! Phase-extracted piecewise-polynomial approximation spaces.
//!
//! Two families of parameter partitions are built around the shadow
//! boundaries `t1 < t2`:
//!
//! * the frequency-adapted partition into `4m` regions whose widths scale
//!   like `k^{−1/3+ε_j}`, and
//! * the change-of-variables partition into six intervals, where the four
//!   transition intervals carry maps `φ_j` that grade the polynomial
//!   resolution toward the shadow boundaries.
//!
//! Regions are half-open `[a, b)` with `a ∈ [0, 2P)`; a region may extend
//! past `2P`, in which case parameters are lifted by `2P` before testing
//! membership.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{IncidentWave, ParametricBoundary, ShadowGeometry};

/// Exponents `1/3 > ε₁ > … > ε_m > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonLadder {
    eps: Vec<f64>,
}

impl EpsilonLadder {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidArgument("empty epsilon ladder".into()));
        }
        let ordered = eps.windows(2).all(|w| w[0] > w[1]);
        if !ordered || !(eps[0] < 1.0 / 3.0) || !(eps[eps.len() - 1] > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilons must decrease strictly inside (0, 1/3), got {eps:?}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn m(&self) -> usize {
        self.eps.len()
    }

    /// `ε_j` for `j = 1..=m`.
    pub fn get(&self, j: usize) -> f64 {
        self.eps[j - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eps
    }
}

/// `ε_j = (1/3)(2m − 2j + 1)/(2m + 1)`, which balances
/// `(1 − 3ε₁)/6 = ε_m = (ε_j − ε_{j+1})/2`.
pub fn optimal_epsilons(m: usize) -> Result<EpsilonLadder> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let denom = (3 * (2 * m + 1)) as f64;
    EpsilonLadder::new(
        (1..=m)
            .map(|j| (2 * m - 2 * j + 1) as f64 / denom)
            .collect(),
    )
}

/// `max(1, ⌈ln k^{1/6}⌉)`
pub fn default_region_levels(k: f64) -> usize {
    ((k.ln() / 6.0).ceil() as i64).max(1) as usize
}

/// Region names. Transition subregions carry their level `j`; `Cov(j)` is
/// interval `I_j` of the change-of-variables partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Illuminated,
    IllumTransition1(usize),
    IllumTransition2(usize),
    ShadowTransition1(usize),
    ShadowTransition2(usize),
    ShadowBoundary1,
    ShadowBoundary2,
    Shadow,
    Cov(usize),
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Illuminated => write!(f, "IL"),
            Self::IllumTransition1(j) => write!(f, "IT1_{j}"),
            Self::IllumTransition2(j) => write!(f, "IT2_{j}"),
            Self::ShadowTransition1(j) => write!(f, "ST1_{j}"),
            Self::ShadowTransition2(j) => write!(f, "ST2_{j}"),
            Self::ShadowBoundary1 => write!(f, "SB1"),
            Self::ShadowBoundary2 => write!(f, "SB2"),
            Self::Shadow => write!(f, "SR"),
            Self::Cov(j) => write!(f, "I{j}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub label: RegionLabel,
    pub a: f64,
    pub b: f64,
}

impl Region {
    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

const MEASURE_TOL: f64 = 1e-10;

/// Labeled regions covering one period exactly once.
#[derive(Clone, Debug)]
pub struct RegionPartition {
    regions: Vec<Region>,
    half_period: f64,
    k: f64,
}

impl RegionPartition {
    /// Normalizes each region so that `a ∈ [0, 2P)` and checks that the
    /// regions tile the period.
    pub fn new(regions: Vec<Region>, half_period: f64, k: f64) -> Result<Self> {
        let period = 2.0 * half_period;
        let mut out = Vec::with_capacity(regions.len());
        for r in regions {
            if !(r.a < r.b) {
                return Err(Error::Config(format!(
                    "region {} is empty or reversed: [{}, {}]",
                    r.label, r.a, r.b
                )));
            }
            let mut a = r.a.rem_euclid(period);
            // snap roundoff at the period seam
            if period - a < 1e-13 * period {
                a = 0.0;
            }
            out.push(Region {
                label: r.label,
                a,
                b: a + (r.b - r.a),
            });
        }
        let total: f64 = out.iter().map(Region::width).sum();
        if (total - period).abs() > MEASURE_TOL {
            return Err(Error::Config(format!(
                "regions cover {total} instead of the period {period}"
            )));
        }
        let mut sorted = out.clone();
        sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
        for i in 0..sorted.len() {
            let next_a = if i + 1 < sorted.len() {
                sorted[i + 1].a
            } else {
                sorted[0].a + period
            };
            if sorted[i].b > next_a + MEASURE_TOL {
                return Err(Error::Config(format!(
                    "regions {} and its successor overlap",
                    sorted[i].label
                )));
            }
        }
        Ok(Self {
            regions: out,
            half_period,
            k,
        })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn total_length(&self) -> f64 {
        self.regions.iter().map(Region::width).sum()
    }

    /// `t` lifted into region `j`'s coordinates, if it lies in `[a_j, b_j)`
    /// modulo the period.
    pub fn lift(&self, j: usize, t: f64) -> Option<f64> {
        let r = &self.regions[j];
        let lifted = r.a + (t - r.a).rem_euclid(self.period());
        (lifted < r.b).then_some(lifted)
    }

    /// Index of the region containing `t` and the lifted parameter.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY, t);
        for j in 0..self.regions.len() {
            let r = &self.regions[j];
            let lifted = r.a + (t - r.a).rem_euclid(self.period());
            if lifted < r.b {
                return (j, lifted);
            }
            // roundoff at a seam can leave a point just past every region end
            let miss = lifted - r.b;
            if miss < best.1 {
                best = (j, miss, lifted.min(r.b));
            }
        }
        (best.0, best.2)
    }
}

/// Scale factors `ξ₁, ξ₂` (illuminated side) and `ζ₁, ζ₂` (shadow side).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionScales {
    pub xi: [f64; 2],
    pub zeta: [f64; 2],
}

impl Default for RegionScales {
    fn default() -> Self {
        Self {
            xi: [1.0, 1.0],
            zeta: [1.0, 1.0],
        }
    }
}

fn check_scales(s: &RegionScales) -> Result<()> {
    if s.xi
        .iter()
        .chain(&s.zeta)
        .any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return Err(Error::Config(format!(
            "region scales must be positive, got xi = {:?}, zeta = {:?}",
            s.xi, s.zeta
        )));
    }
    Ok(())
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(format!("violated: {what}")))
    }
}

/// The `4m`-region frequency-adapted partition, `m = ladder.m()`.
///
/// Order: `IT1^1..IT1^{m−1}, IL, IT2^1..IT2^{m−1}, SR, ST1^1..ST1^{m−1},
/// SB1, ST2^1..ST2^{m−1}, SB2`.
pub fn freq_adapted_partition(
    shadow: &ShadowGeometry,
    k: f64,
    scales: &RegionScales,
    ladder: &EpsilonLadder,
) -> Result<RegionPartition> {
    check_scales(scales)?;
    if !(k > 1.0) {
        return Err(Error::Config(format!("wavenumber must exceed 1, got {k}")));
    }
    let (t1, t2) = (shadow.t1, shadow.t2);
    let period = 2.0 * shadow.half_period;
    let [xi1, xi2] = scales.xi;
    let [z1, z2] = scales.zeta;
    let m = ladder.m();
    let w: Vec<f64> = (1..=m)
        .map(|j| k.powf(-1.0 / 3.0 + ladder.get(j)))
        .collect();
    let (w1, wm) = (w[0], w[m - 1]);
    require(
        t1 + xi1 * w1 < t2 - xi2 * w1,
        "t1 + xi1 k^(-1/3+eps1) < t2 - xi2 k^(-1/3+eps1)",
    )?;
    require(
        t2 + z2 * w1 < period + t1 - z1 * w1,
        "t2 + zeta2 k^(-1/3+eps1) < 2P + t1 - zeta1 k^(-1/3+eps1)",
    )?;
    require(t1 - z1 * w1 >= 0.0, "t1 - zeta1 k^(-1/3+eps1) >= 0")?;
    use RegionLabel::*;
    let mut regions = Vec::with_capacity(4 * m);
    let reg = |label, a, b| Region { label, a, b };
    for j in 1..m {
        regions.push(reg(
            IllumTransition1(j),
            t1 + xi1 * w[j],
            t1 + xi1 * w[j - 1],
        ));
    }
    regions.push(reg(Illuminated, t1 + xi1 * w1, t2 - xi2 * w1));
    for j in 1..m {
        regions.push(reg(
            IllumTransition2(j),
            t2 - xi2 * w[j - 1],
            t2 - xi2 * w[j],
        ));
    }
    regions.push(reg(Shadow, t2 + z2 * w1, period + t1 - z1 * w1));
    for j in 1..m {
        regions.push(reg(
            ShadowTransition1(j),
            t1 - z1 * w[j - 1],
            t1 - z1 * w[j],
        ));
    }
    regions.push(reg(ShadowBoundary1, t1 - z1 * wm, t1 + xi1 * wm));
    for j in 1..m {
        regions.push(reg(
            ShadowTransition2(j),
            t2 + z2 * w[j],
            t2 + z2 * w[j - 1],
        ));
    }
    regions.push(reg(ShadowBoundary2, t2 - xi2 * wm, t2 + z2 * wm));
    RegionPartition::new(regions, shadow.half_period, k)
}

/// Parameters of the change-of-variables partition. `None` primes take the
/// values that satisfy the equality constraints with equal halves.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CovParams {
    pub scales: RegionScales,
    pub xi_prime: Option<[f64; 2]>,
    pub zeta_prime: Option<[f64; 2]>,
}

/// Map on one transition interval:
/// `φ(s) = anchor + sign·ϕ(s)·k^{ψ(s)}`, with `ϕ`, `ψ` affine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionMap {
    pub a: f64,
    pub b: f64,
    pub anchor: f64,
    pub sign: f64,
    /// `(ϕ(a), ϕ(b))`
    pub coeff: (f64, f64),
    /// `(ψ(a), ψ(b))`
    pub exponent: (f64, f64),
    ln_k: f64,
}

impl TransitionMap {
    fn frac(&self, s: f64) -> f64 {
        (s - self.a) / (self.b - self.a)
    }

    /// `ψ(s)`
    pub fn psi(&self, s: f64) -> f64 {
        let x = self.frac(s);
        self.exponent.0 + (self.exponent.1 - self.exponent.0) * x
    }

    /// `ϕ(s)`
    pub fn varphi(&self, s: f64) -> f64 {
        let x = self.frac(s);
        self.coeff.0 + (self.coeff.1 - self.coeff.0) * x
    }

    pub fn phi(&self, s: f64) -> f64 {
        self.anchor + self.sign * self.varphi(s) * (self.psi(s) * self.ln_k).exp()
    }

    /// `φ′(s) = sign·k^ψ (ϕ′ + ϕ ψ′ ln k)`
    pub fn dphi(&self, s: f64) -> f64 {
        let len = self.b - self.a;
        let dvarphi = (self.coeff.1 - self.coeff.0) / len;
        let dpsi = (self.exponent.1 - self.exponent.0) / len;
        self.sign * (self.psi(s) * self.ln_k).exp() * (dvarphi + self.varphi(s) * dpsi * self.ln_k)
    }

    /// `φ⁻¹(y)` by Newton iteration safeguarded with bisection.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let tol = 1e-12 * (self.b - self.a);
        if !(y >= self.a - tol && y <= self.b + tol) {
            return Err(Error::InvalidArgument(format!(
                "{y} lies outside [{}, {}]",
                self.a, self.b
            )));
        }
        let y = y.clamp(self.a, self.b);
        let (mut lo, mut hi) = (self.a, self.b);
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.phi(s) - y;
            if g.abs() <= 1e-14 * (1.0 + y.abs()) {
                return Ok(s);
            }
            if g > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - g / self.dphi(s);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if hi - lo <= 1e-16 * (1.0 + y.abs()) {
                return Ok(next);
            }
            s = next;
        }
        Err(Error::Numeric(format!(
            "inverse map did not converge at {y}"
        )))
    }
}

/// Maps `φ₁..φ₄` of the transition intervals; `φ₅`, `φ₆` are the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableChange {
    maps: [TransitionMap; 4],
}

impl VariableChange {
    /// Map of interval `I_j`, `j = 1..=4`.
    pub fn map(&self, j: usize) -> &TransitionMap {
        &self.maps[j - 1]
    }

    pub fn phi(&self, j: usize, s: f64) -> f64 {
        if j <= 4 { self.maps[j - 1].phi(s) } else { s }
    }

    pub fn dphi(&self, j: usize, s: f64) -> f64 {
        if j <= 4 {
            self.maps[j - 1].dphi(s)
        } else {
            1.0
        }
    }
}

/// `φ_j⁻¹(y)` for `j = 1..=6` on the intervals of `partition`.
pub fn invert_cov(
    change: &VariableChange,
    partition: &RegionPartition,
    j: usize,
    y: f64,
) -> Result<f64> {
    if !(1..=6).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "interval index {j} out of 1..=6"
        )));
    }
    if j <= 4 {
        return change.map(j).invert(y);
    }
    let r = partition.regions()[j - 1];
    if !(y >= r.a && y <= r.b) {
        return Err(Error::InvalidArgument(format!(
            "{y} lies outside [{}, {}]",
            r.a, r.b
        )));
    }
    Ok(y)
}

/// The six-interval partition and its maps.
pub fn cov_partition(
    shadow: &ShadowGeometry,
    k: f64,
    params: &CovParams,
) -> Result<(RegionPartition, VariableChange)> {
    check_scales(&params.scales)?;
    if !(k > 1.0) {
        return Err(Error::Config(format!("wavenumber must exceed 1, got {k}")));
    }
    let (t1, t2) = (shadow.t1, shadow.t2);
    let period = 2.0 * shadow.half_period;
    let [xi1, xi2] = params.scales.xi;
    let [z1, z2] = params.scales.zeta;
    let lit = t2 - t1;
    let [xp1, xp2] = params.xi_prime.unwrap_or([0.5 * lit; 2]);
    let [zp1, zp2] = params.zeta_prime.unwrap_or([0.5 * (period - lit); 2]);
    let c = k.powf(-1.0 / 3.0);
    let tol = 1e-12 * period;
    require(xi1 <= xp1 && xi2 <= xp2, "xi <= xi'")?;
    require(z1 <= zp1 && z2 <= zp2, "zeta <= zeta'")?;
    require(
        ((t1 + xp1) - (t2 - xp2)).abs() <= tol,
        "t1 + xi1' = t2 - xi2'",
    )?;
    require(
        ((t2 + zp2) - (period + t1 - zp1)).abs() <= tol,
        "t2 + zeta2' = 2P + t1 - zeta1'",
    )?;
    let mid_lit = t1 + xp1;
    let mid_shadow = t2 + zp2;
    use RegionLabel::Cov;
    let regions = vec![
        Region {
            label: Cov(1),
            a: t1 + xi1 * c,
            b: mid_lit,
        },
        Region {
            label: Cov(2),
            a: mid_lit,
            b: t2 - xi2 * c,
        },
        Region {
            label: Cov(3),
            a: mid_shadow - period,
            b: t1 - z1 * c,
        },
        Region {
            label: Cov(4),
            a: t2 + z2 * c,
            b: mid_shadow,
        },
        Region {
            label: Cov(5),
            a: t1 - z1 * c,
            b: t1 + xi1 * c,
        },
        Region {
            label: Cov(6),
            a: t2 - xi2 * c,
            b: t2 + z2 * c,
        },
    ];
    let partition = RegionPartition::new(regions, shadow.half_period, k)?;
    let ln_k = k.ln();
    let third = -1.0 / 3.0;
    let r = partition.regions();
    // anchors move with any 2P normalization of their interval
    let anchor = |j: usize, base: f64, orig_a: f64| base + (r[j].a - orig_a);
    let maps = [
        TransitionMap {
            a: r[0].a,
            b: r[0].b,
            anchor: anchor(0, t1, t1 + xi1 * c),
            sign: 1.0,
            coeff: (xi1, xp1),
            exponent: (third, 0.0),
            ln_k,
        },
        TransitionMap {
            a: r[1].a,
            b: r[1].b,
            anchor: anchor(1, t2, mid_lit),
            sign: -1.0,
            coeff: (xp2, xi2),
            exponent: (0.0, third),
            ln_k,
        },
        TransitionMap {
            a: r[2].a,
            b: r[2].b,
            anchor: anchor(2, t1, mid_shadow - period),
            sign: -1.0,
            coeff: (zp1, z1),
            exponent: (0.0, third),
            ln_k,
        },
        TransitionMap {
            a: r[3].a,
            b: r[3].b,
            anchor: anchor(3, t2, t2 + z2 * c),
            sign: 1.0,
            coeff: (z2, zp2),
            exponent: (third, 0.0),
            ln_k,
        },
    ];
    Ok((partition, VariableChange { maps }))
}

/// Legendre polynomials `P_0(u)..=P_d(u)`.
pub fn legendre_all(u: f64, d: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(d + 1);
    p.push(1.0);
    if d >= 1 {
        p.push(u);
    }
    for n in 2..=d {
        let nf = n as f64;
        let next = ((2.0 * nf - 1.0) * u * p[n - 1] - (nf - 1.0) * p[n - 2]) / nf;
        p.push(next);
    }
    p
}

/// The space `e^{ik α·γ} ⊕_j 1_{R_j} P_{d_j}(∘ φ_j⁻¹)`.
#[derive(Clone, Debug)]
pub struct BasisSpec {
    curve: ParametricBoundary,
    wave: IncidentWave,
    partition: RegionPartition,
    change: Option<Arc<VariableChange>>,
    degrees: Vec<usize>,
    offsets: Vec<usize>,
}

impl BasisSpec {
    pub fn new(
        curve: &ParametricBoundary,
        wave: &IncidentWave,
        partition: RegionPartition,
        change: Option<VariableChange>,
        degrees: Vec<usize>,
    ) -> Result<Self> {
        if degrees.len() != partition.len() {
            return Err(Error::InvalidArgument(format!(
                "{} degrees for {} regions",
                degrees.len(),
                partition.len()
            )));
        }
        if change.is_some() && partition.len() != 6 {
            return Err(Error::InvalidArgument(
                "a variable change requires the six-interval partition".into(),
            ));
        }
        if (partition.period() - curve.length()).abs() > 1e-12 * curve.length() {
            return Err(Error::InvalidArgument(
                "partition period differs from curve".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        let mut acc = 0;
        for d in &degrees {
            offsets.push(acc);
            acc += d + 1;
        }
        offsets.push(acc);
        Ok(Self {
            curve: curve.clone(),
            wave: *wave,
            partition,
            change: change.map(Arc::new),
            degrees,
            offsets,
        })
    }

    /// Same degree on every region.
    pub fn uniform(
        curve: &ParametricBoundary,
        wave: &IncidentWave,
        partition: RegionPartition,
        change: Option<VariableChange>,
        degree: usize,
    ) -> Result<Self> {
        let degrees = vec![degree; partition.len()];
        Self::new(curve, wave, partition, change, degrees)
    }

    pub fn dimension(&self) -> usize {
        self.offsets[self.degrees.len()]
    }

    pub fn partition(&self) -> &RegionPartition {
        &self.partition
    }

    pub fn change(&self) -> Option<&VariableChange> {
        self.change.as_deref()
    }

    pub fn curve(&self) -> &ParametricBoundary {
        &self.curve
    }

    pub fn wave(&self) -> &IncidentWave {
        &self.wave
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Global index of the first basis function on region `j`.
    pub fn offset(&self, j: usize) -> usize {
        self.offsets[j]
    }

    /// `e^{ik α·γ(t)}`
    pub fn phase(&self, t: f64) -> Complex64 {
        self.wave.value_at(self.curve.position(t))
    }

    /// Local coordinate in `[−1, 1]` of a lifted parameter in region `j`.
    pub fn local_coordinate(&self, j: usize, lifted: f64) -> Result<f64> {
        let r = self.partition.regions()[j];
        let s = match &self.change {
            Some(ch) => invert_cov(ch, &self.partition, j + 1, lifted)?,
            None => lifted,
        };
        Ok(2.0 * (s - r.a) / (r.b - r.a) - 1.0)
    }
}

/// Basis function `n` of region `j` (0-based) at parameter `t`.
pub fn eval_basis(basis: &BasisSpec, j: usize, n: usize, t: f64) -> Result<Complex64> {
    if j >= basis.partition.len() {
        return Err(Error::InvalidArgument(format!(
            "region index {j} out of range"
        )));
    }
    if n > basis.degrees[j] {
        return Err(Error::InvalidArgument(format!(
            "degree {n} exceeds {} on region {j}",
            basis.degrees[j]
        )));
    }
    let Some(lifted) = basis.partition.lift(j, t) else {
        return Ok(Complex64::default());
    };
    let u = basis.local_coordinate(j, lifted)?;
    Ok(basis.phase(t) * legendre_all(u, n)[n])
}
