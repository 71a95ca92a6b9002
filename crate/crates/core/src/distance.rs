//! One-dimensional laws and the distances between them: Kolmogorov ρ,
//! L² distance ω and Kantorovich W. Covers the per-direction laws F_θ of
//! ⟨X,θ⟩, the typical law F, Φ, and averages of distances over θ.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::moments::Estimate;
use crate::quadrature::{gauss_legendre_5, integrate, integrate_with_breaks, QuadConfig};
use crate::rng::{chunks, path, substream, Executor};
use crate::special::{bisect_increasing, normal_cdf, normal_cdf_integral, normal_cdf_sq_integral, normal_pdf};
use crate::sphere::{sample_unit_sphere, SphereLaw, UnitVector};
use crate::systems::{System, SystemKind};

/// Segments narrower than this use the fixed five-point rule.
const NARROW_SEGMENT: f64 = 0.05;
/// Target width of the continuous sup enclosure.
pub const KOLMOGOROV_TOL: f64 = 1e-8;
/// Range beyond which Φ is treated as 0 or 1 by the continuous sup search.
const NORMAL_RANGE: f64 = 12.0;

/// A discrete law: sorted distinct atoms with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    // cumulative[i] = F(atoms[i]); the last entry is exactly 1.
    cumulative: Vec<f64>,
}

impl EmpiricalCdf {
    /// Equal-weight law of the samples; duplicates are merged.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self::from_sorted(&sorted))
    }

    /// Equal-weight law of samples that are already sorted ascending.
    pub fn from_sorted(sorted: &[f64]) -> Self {
        let total = sorted.len() as f64;
        let mut atoms = Vec::with_capacity(sorted.len());
        let mut counts: Vec<usize> = Vec::with_capacity(sorted.len());
        for &s in sorted {
            match atoms.last() {
                Some(&last) if last == s => *counts.last_mut().unwrap() += 1,
                _ => {
                    atoms.push(s);
                    counts.push(1);
                }
            }
        }
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut running = 0usize;
        for c in &counts {
            running += c;
            cumulative.push(running as f64 / total);
        }
        let weights = counts.iter().map(|&c| c as f64 / total).collect();
        Self { atoms, weights, cumulative }
    }

    /// Law with supplied weights, which must be nonnegative and sum to 1
    /// within 1e−12.
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty);
        }
        if pairs.iter().any(|(a, w)| !a.is_finite() || !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("atoms must be finite and weights nonnegative".into()));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
        }
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            if w == 0.0 {
                continue;
            }
            match atoms.last() {
                Some(&last) if last == a => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(a);
                    weights.push(w);
                }
            }
        }
        let mut cumulative = Vec::with_capacity(atoms.len());
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for w in &weights {
            let t = sum + w;
            comp += if libm::fabs(sum) >= libm::fabs(*w) { (sum - t) + w } else { (w - t) + sum };
            sum = t;
            cumulative.push((sum + comp).min(1.0));
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self { atoms, weights, cumulative })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// F(x) = P{S ≤ x}.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| *a <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// F(x−) = P{S < x}.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| *a < x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// Equal-weight law of the samples.
pub fn ecdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_samples(samples)
}

/// Continuous reference laws.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticCdf {
    /// Φ.
    StandardNormal,
    /// The law of scale·θ₁.
    SphereMarginal { law: SphereLaw, scale: f64 },
    /// The average over `radii` of the laws of r·θ₁ (a zero radius is a
    /// point mass at 0).
    SphereMixture { law: SphereLaw, radii: Vec<f64> },
}

impl AnalyticCdf {
    pub fn sphere_marginal(n: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        Ok(AnalyticCdf::SphereMarginal { law: SphereLaw::new(n)?, scale })
    }

    pub fn sphere_mixture(n: usize, mut radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Empty);
        }
        if radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("radii must be finite and nonnegative".into()));
        }
        radii.sort_unstable_by(f64::total_cmp);
        Ok(AnalyticCdf::SphereMixture { law: SphereLaw::new(n)?, radii })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            AnalyticCdf::StandardNormal => normal_cdf(x),
            AnalyticCdf::SphereMarginal { law, scale } => law.cdf(x / scale),
            AnalyticCdf::SphereMixture { law, radii } => {
                let mut acc = 0.0;
                for &r in radii {
                    acc += if r > 0.0 {
                        law.cdf(x / r)
                    } else if x >= 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                }
                acc / radii.len() as f64
            }
        }
    }

    /// Smallest closed interval carrying all the mass, if bounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            AnalyticCdf::StandardNormal => None,
            AnalyticCdf::SphereMarginal { scale, .. } => Some((-scale, *scale)),
            AnalyticCdf::SphereMixture { radii, .. } => {
                let r = *radii.last().unwrap();
                Some((-r, r))
            }
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, AnalyticCdf::StandardNormal)
    }

    /// The characteristic function, for the symmetric laws represented here.
    pub fn cf(&self, t: f64) -> Result<f64> {
        match self {
            AnalyticCdf::StandardNormal => Ok(libm::exp(-0.5 * t * t)),
            AnalyticCdf::SphereMarginal { law, scale } => law.cf(t * scale),
            AnalyticCdf::SphereMixture { law, radii } => {
                let mut acc = 0.0;
                for &r in radii {
                    acc += law.cf(t * r)?;
                }
                Ok(acc / radii.len() as f64)
            }
        }
    }
}

/// Either kind of law, for the distance functions.
#[derive(Debug, Clone, Copy)]
pub enum Dist<'a> {
    Discrete(&'a EmpiricalCdf),
    Continuous(&'a AnalyticCdf),
}

impl<'a> From<&'a EmpiricalCdf> for Dist<'a> {
    fn from(e: &'a EmpiricalCdf) -> Self {
        Dist::Discrete(e)
    }
}

impl<'a> From<&'a AnalyticCdf> for Dist<'a> {
    fn from(a: &'a AnalyticCdf) -> Self {
        Dist::Continuous(a)
    }
}

/// A computed value with a bound on its numerical error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified {
    pub value: f64,
    pub error: f64,
}

/// ρ = sup|A − B|.
pub fn kolmogorov<'a, 'b>(a: impl Into<Dist<'a>>, b: impl Into<Dist<'b>>) -> Result<f64> {
    Ok(kolmogorov_certified(a, b)?.value)
}

/// ρ with an error bound: exact (error 0) when a law is discrete, a
/// monotone branch-and-bound enclosure otherwise.
pub fn kolmogorov_certified<'a, 'b>(a: impl Into<Dist<'a>>, b: impl Into<Dist<'b>>) -> Result<Certified> {
    let (a, b) = (a.into(), b.into());
    match (a, b) {
        (Dist::Discrete(e), Dist::Continuous(g)) | (Dist::Continuous(g), Dist::Discrete(e)) => {
            Ok(Certified { value: kolmogorov_discrete_continuous(e, g), error: 0.0 })
        }
        (Dist::Discrete(e1), Dist::Discrete(e2)) => Ok(Certified { value: kolmogorov_discrete(e1, e2), error: 0.0 }),
        (Dist::Continuous(g1), Dist::Continuous(g2)) => kolmogorov_continuous(g1, g2, KOLMOGOROV_TOL),
    }
}

fn kolmogorov_discrete_continuous(e: &EmpiricalCdf, g: &AnalyticCdf) -> f64 {
    let mut sup = 0.0f64;
    let mut below = 0.0;
    for (a, &above) in e.atoms.iter().zip(&e.cumulative) {
        let ga = g.cdf(*a);
        sup = sup.max(libm::fabs(below - ga)).max(libm::fabs(above - ga));
        below = above;
    }
    sup
}

fn kolmogorov_discrete(e1: &EmpiricalCdf, e2: &EmpiricalCdf) -> f64 {
    let mut sup = 0.0f64;
    for &x in e1.atoms.iter().chain(&e2.atoms) {
        sup = sup.max(libm::fabs(e1.cdf(x) - e2.cdf(x)));
    }
    sup
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: f64,
    hi: f64,
    a_lo: f64,
    a_hi: f64,
    b_lo: f64,
    b_hi: f64,
    bound: f64,
}

impl Cell {
    fn new(lo: f64, hi: f64, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Self {
        // For nondecreasing A, B on [lo, hi]: |A − B| ≤ max(A(hi) − B(lo), B(hi) − A(lo)).
        let bound = (a_hi - b_lo).max(b_hi - a_lo);
        Self { lo, hi, a_lo, a_hi, b_lo, b_hi, bound }
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kolmogorov_continuous(a: &AnalyticCdf, b: &AnalyticCdf, tol: f64) -> Result<Certified> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for g in [a, b] {
        let (l, h) = g.support().unwrap_or((-NORMAL_RANGE, NORMAL_RANGE));
        lo = lo.min(l);
        hi = hi.max(h);
    }
    // Outside [lo, hi] both laws are within these masses of 0 or 1.
    let outside = a.cdf(lo).max(b.cdf(lo)).max(1.0 - a.cdf(hi)).max(1.0 - b.cdf(hi));
    let grid = 2048;
    let xs: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    let av: Vec<f64> = xs.iter().map(|&x| a.cdf(x)).collect();
    let bv: Vec<f64> = xs.iter().map(|&x| b.cdf(x)).collect();
    let mut best = 0.0f64;
    for i in 0..=grid {
        best = best.max(libm::fabs(av[i] - bv[i]));
    }
    let mut heap = BinaryHeap::with_capacity(2 * grid);
    for i in 0..grid {
        heap.push(Cell::new(xs[i], xs[i + 1], av[i], av[i + 1], bv[i], bv[i + 1]));
    }
    let mut steps = 0usize;
    loop {
        let top = *heap.peek().unwrap();
        let upper = top.bound.max(best).max(outside);
        if upper - best <= tol || steps >= 400_000 {
            return Ok(Certified { value: best, error: upper - best });
        }
        heap.pop();
        let mid = 0.5 * (top.lo + top.hi);
        if mid <= top.lo || mid >= top.hi {
            // Cannot refine further; keep the bound as stated.
            return Ok(Certified { value: best, error: upper - best });
        }
        let (am, bm) = (a.cdf(mid), b.cdf(mid));
        best = best.max(libm::fabs(am - bm));
        heap.push(Cell::new(top.lo, mid, top.a_lo, am, top.b_lo, bm));
        heap.push(Cell::new(mid, top.hi, am, top.a_hi, bm, top.b_hi));
        steps += 1;
    }
}

/// ω² = ∫(A − B)².
pub fn l2_dist_sq<'a, 'b>(a: impl Into<Dist<'a>>, b: impl Into<Dist<'b>>) -> Result<f64> {
    integrated_power(a.into(), b.into(), 2).map(|v| v.max(0.0))
}

/// ω = (∫(A − B)²)^{1/2}.
pub fn l2_dist<'a, 'b>(a: impl Into<Dist<'a>>, b: impl Into<Dist<'b>>) -> Result<f64> {
    l2_dist_sq(a, b).map(libm::sqrt)
}

/// W = ∫|A − B|.
pub fn kantorovich<'a, 'b>(a: impl Into<Dist<'a>>, b: impl Into<Dist<'b>>) -> Result<f64> {
    integrated_power(a.into(), b.into(), 1).map(|v| v.max(0.0))
}

fn integrated_power(a: Dist<'_>, b: Dist<'_>, power: u32) -> Result<f64> {
    match (a, b) {
        (Dist::Discrete(e), Dist::Continuous(g)) | (Dist::Continuous(g), Dist::Discrete(e)) => {
            discrete_continuous_power(e, g, power)
        }
        (Dist::Discrete(e1), Dist::Discrete(e2)) => Ok(discrete_power(e1, e2, power)),
        (Dist::Continuous(g1), Dist::Continuous(g2)) => continuous_power(g1, g2, power),
    }
}

fn discrete_power(e1: &EmpiricalCdf, e2: &EmpiricalCdf, power: u32) -> f64 {
    let mut points: Vec<f64> = e1.atoms.iter().chain(&e2.atoms).copied().collect();
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();
    let mut total = 0.0;
    for w in points.windows(2) {
        let d = libm::fabs(e1.cdf(w[0]) - e2.cdf(w[0]));
        total += (w[1] - w[0]) * if power == 1 { d } else { d * d };
    }
    total
}

// Integrals of Φ and of 1 − Φ over half-lines and segments.
fn normal_lower(x: f64, power: u32) -> f64 {
    if power == 1 {
        normal_cdf_integral(x)
    } else {
        normal_cdf_sq_integral(x)
    }
}

fn normal_upper(x: f64, power: u32) -> f64 {
    normal_lower(-x, power)
}

/// ∫_a^b |c − Φ|^p for constant c, in closed form.
fn normal_segment(c: f64, a: f64, b: f64, power: u32) -> f64 {
    if power == 1 {
        let (pa, pb) = (normal_cdf(a), normal_cdf(b));
        if (c - pa) * (c - pb) < 0.0 {
            let x = bisect_increasing(normal_cdf, c, a, b);
            return normal_piece(c, a, x) + normal_piece(c, x, b);
        }
        return normal_piece(c, a, b);
    }
    let v = if a + b <= 0.0 {
        c * c * (b - a) - 2.0 * c * (normal_lower(b, 1) - normal_lower(a, 1))
            + (normal_lower(b, 2) - normal_lower(a, 2))
    } else {
        let d = 1.0 - c;
        d * d * (b - a) - 2.0 * d * (normal_upper(a, 1) - normal_upper(b, 1))
            + (normal_upper(a, 2) - normal_upper(b, 2))
    };
    v.max(0.0)
}

/// |∫_a^b (c − Φ)| for a segment on which c − Φ keeps its sign.
fn normal_piece(c: f64, a: f64, b: f64) -> f64 {
    let signed = if a + b <= 0.0 {
        c * (b - a) - (normal_lower(b, 1) - normal_lower(a, 1))
    } else {
        (normal_upper(a, 1) - normal_upper(b, 1)) - (1.0 - c) * (b - a)
    };
    libm::fabs(signed)
}

/// ∫_a^b |c − G|^p for a monotone continuous G.
fn general_segment(c: f64, a: f64, b: f64, g: &AnalyticCdf, power: u32, adaptive: bool) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    if power == 1 {
        let (ga, gb) = (g.cdf(a), g.cdf(b));
        if (c - ga) * (c - gb) < 0.0 {
            let x = bisect_increasing(|t| g.cdf(t), c, a, b);
            return Ok(general_piece(c, a, x, g, 1, adaptive)? + general_piece(c, x, b, g, 1, adaptive)?);
        }
    }
    general_piece(c, a, b, g, power, adaptive)
}

fn general_piece(c: f64, a: f64, b: f64, g: &AnalyticCdf, power: u32, adaptive: bool) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let f = |x: f64| {
        let d = libm::fabs(c - g.cdf(x));
        if power == 1 {
            d
        } else {
            d * d
        }
    };
    if !adaptive && b - a <= NARROW_SEGMENT {
        let mut f = f;
        return Ok(gauss_legendre_5(&mut f, a, b));
    }
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-12).with_max_intervals(2000);
    Ok(integrate(f, a, b, &cfg)?.value)
}

fn discrete_continuous_power(e: &EmpiricalCdf, g: &AnalyticCdf, power: u32) -> Result<f64> {
    let mut breaks: Vec<f64> = e.atoms.clone();
    let support = g.support();
    if let Some((lo, hi)) = support {
        breaks.push(lo);
        breaks.push(hi);
        breaks.sort_unstable_by(f64::total_cmp);
        breaks.dedup();
    }
    let first = breaks[0];
    let last = *breaks.last().unwrap();
    let mut total = if g.is_normal() { normal_lower(first, power) + normal_upper(last, power) } else { 0.0 };
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = e.cdf(a);
        total += if g.is_normal() {
            normal_segment(c, a, b, power)
        } else {
            let touches_edge = support.is_some_and(|(lo, hi)| a <= lo || b >= hi);
            general_segment(c, a, b, g, power, touches_edge)?
        };
    }
    Ok(total)
}

fn continuous_power(a: &AnalyticCdf, b: &AnalyticCdf, power: u32) -> Result<f64> {
    if a.is_normal() && b.is_normal() {
        return Ok(0.0);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for g in [a, b] {
        if let Some((l, h)) = g.support() {
            lo = lo.min(l);
            hi = hi.max(h);
        }
    }
    // At most one of the laws is Φ here; outside [lo, hi] the other is 0 or 1.
    let mut total = 0.0;
    if a.is_normal() || b.is_normal() {
        total += normal_lower(lo, power) + normal_upper(hi, power);
    }
    let mut breaks = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        breaks.insert(1, 0.0);
    }
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-12).with_panels(16).with_max_intervals(20_000);
    let r = integrate_with_breaks(
        |x| {
            let d = libm::fabs(a.cdf(x) - b.cdf(x));
            if power == 1 {
                d
            } else {
                d * d
            }
        },
        &breaks,
        &cfg,
    )?;
    Ok(total + r.value)
}

/// Reference law for a distance: Φ or the typical law F = E_θ F_θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Normal,
    Typical,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Normal => "normal",
            Target::Typical => "typical",
        }
    }
}

/// Distance functional averaged over θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rho,
    RhoSq,
    Omega,
    OmegaSq,
    Kantorovich,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Rho => "rho",
            Metric::RhoSq => "rho_sq",
            Metric::Omega => "omega",
            Metric::OmegaSq => "omega_sq",
            Metric::Kantorovich => "kantorovich",
        }
    }
}

/// Budget for the |X| mixture behind the typical law of a system whose
/// norm is not fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixtureBudget {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MixtureBudget {
    fn default() -> Self {
        Self { samples: 256, seed: 0 }
    }
}

/// The typical law of a system: exact for fixed-norm systems, otherwise a
/// frozen mixture over sampled |X|.
pub fn typical_law(system: &System, budget: MixtureBudget) -> Result<AnalyticCdf> {
    let n = system.n();
    if system.flags().fixed_norm {
        return AnalyticCdf::sphere_marginal(n, libm::sqrt(n as f64));
    }
    if budget.samples == 0 {
        return Err(Error::InvalidParameter("typical mixture needs at least one sample".into()));
    }
    AnalyticCdf::sphere_mixture(n, sample_norms(system, budget.samples, budget.seed))
}

fn sample_norms(system: &System, samples: usize, seed: u64) -> Vec<f64> {
    let n = system.n();
    let mut out = Vec::with_capacity(samples);
    let mut x = vec![0.0; n];
    for (c, (_, len)) in chunks(samples).into_iter().enumerate() {
        let mut rng = substream(seed, path::MIXTURE, c as u64);
        for _ in 0..len {
            system.sample_into(&mut rng, &mut x);
            out.push(libm::sqrt(x.iter().map(|v| v * v).sum::<f64>()));
        }
    }
    out
}

/// F(x) for the typical law, with the mixture's standard error.
pub fn typical_cdf(system: &System, x: f64, budget: MixtureBudget) -> Result<Estimate> {
    let n = system.n();
    let law = SphereLaw::new(n)?;
    if system.flags().fixed_norm {
        return Ok(Estimate::exact(law.cdf(x / libm::sqrt(n as f64))));
    }
    if budget.samples < 2 {
        return Err(Error::InvalidParameter("typical_cdf needs at least two mixture samples".into()));
    }
    let values: Vec<f64> = sample_norms(system, budget.samples, budget.seed)
        .into_iter()
        .map(|r| {
            if r > 0.0 {
                law.cdf(x / r)
            } else if x >= 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    Ok(Estimate { value: mean, stderr: libm::sqrt(var / m) })
}

/// ∫(1+x²)|f_F(x) − φ(x)|dx for the typical law of a fixed-norm system.
pub fn weighted_tv_typical(system: &System) -> Result<f64> {
    if !system.flags().fixed_norm {
        return Err(Error::Unsupported(format!(
            "weighted total variation needs a fixed-norm system; {} is not",
            system.name()
        )));
    }
    weighted_tv_sphere(system.n())
}

/// ∫(1+x²)|f(x) − φ(x)|dx where f is the density of √n·θ₁.
pub fn weighted_tv_sphere(n: usize) -> Result<f64> {
    let law = SphereLaw::new(n)?;
    let root = libm::sqrt(n as f64);
    let c = law.normalizer();
    let power = n as f64 - 2.0;
    // x = √n sin v maps [0, √n] to [0, π/2] and removes the edge singularity.
    let cfg = QuadConfig::default().with_abs_tol(1e-12).with_rel_tol(1e-12).with_panels(8).with_max_intervals(20_000);
    let inner = integrate(
        |v| {
            let (s, co) = (libm::sin(v), libm::cos(v));
            let x = root * s;
            let dens = c * if power == 0.0 { 1.0 } else { libm::pow(co, power) };
            (1.0 + x * x) * libm::fabs(dens - root * co * normal_pdf(x))
        },
        0.0,
        PI / 2.0,
        &cfg,
    )?
    .value;
    // ∫_{√n}^∞ (1+x²)φ = 2(1 − Φ(√n)) + √n φ(√n).
    let tail = 2.0 * normal_cdf(-root) + root * normal_pdf(root);
    Ok(2.0 * (inner + tail))
}

/// Inner-evaluation budget for interval-type Ω: the grid size, and an
/// optional ceiling on the certified error of the requested metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerBudget {
    pub grid: usize,
    pub max_error: Option<f64>,
}

impl Default for InnerBudget {
    fn default() -> Self {
        Self { grid: 1 << 16, max_error: None }
    }
}

/// The law F_θ of ⟨X,θ⟩ with certified bounds on its distance to the exact
/// law (zero for finite Ω).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaLaw {
    pub cdf: EmpiricalCdf,
    pub kantorovich_error: Option<f64>,
    pub kolmogorov_error: Option<f64>,
}

/// Builds F_θ: exactly over the atoms of a finite Ω, or from the grid
/// projection of an interval-type Ω.
pub fn theta_law(system: &System, theta: &UnitVector, inner: &InnerBudget) -> Result<ThetaLaw> {
    if theta.dim() != system.n() {
        return Err(Error::LengthMismatch { left: theta.dim(), right: system.n() });
    }
    let th = theta.coords();
    match system.kind() {
        SystemKind::Empirical => {
            let root = libm::sqrt(system.n() as f64);
            let values: Vec<f64> = th.iter().map(|c| root * c).collect();
            Ok(ThetaLaw {
                cdf: EmpiricalCdf::from_samples(&values)?,
                kantorovich_error: Some(0.0),
                kolmogorov_error: Some(0.0),
            })
        }
        SystemKind::Walsh { d } => {
            let values = walsh_projection(*d, th);
            Ok(ThetaLaw {
                cdf: EmpiricalCdf::from_samples(&values)?,
                kantorovich_error: Some(0.0),
                kolmogorov_error: Some(0.0),
            })
        }
        _ => {
            let g = system.project_on_grid(th, inner.grid)?;
            let mut values = g.values;
            values.sort_unstable_by(f64::total_cmp);
            Ok(ThetaLaw {
                cdf: EmpiricalCdf::from_sorted(&values),
                kantorovich_error: g.kantorovich_error,
                kolmogorov_error: g.kolmogorov_error,
            })
        }
    }
}

// ⟨X(s),θ⟩ for every sign pattern s, by a fast Walsh–Hadamard transform.
fn walsh_projection(d: u32, theta: &[f64]) -> Vec<f64> {
    let size = 1usize << d;
    let mut v = vec![0.0; size];
    v[1..].copy_from_slice(theta);
    let mut h = 1;
    while h < size {
        for i in (0..size).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
    v
}

/// ρ, ω² and W between F_θ and a target, with certified error bounds
/// inherited from the inner evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaDistances {
    pub rho: f64,
    pub omega_sq: f64,
    pub kantorovich: f64,
    pub rho_error: Option<f64>,
    pub omega_sq_error: Option<f64>,
    pub kantorovich_error: Option<f64>,
}

impl ThetaDistances {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Rho => self.rho,
            Metric::RhoSq => self.rho * self.rho,
            Metric::Omega => libm::sqrt(self.omega_sq),
            Metric::OmegaSq => self.omega_sq,
            Metric::Kantorovich => self.kantorovich,
        }
    }

    /// Certified error of the metric, when a certificate exists.
    pub fn metric_error(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Rho => self.rho_error,
            Metric::RhoSq => self.rho_error.map(|e| 2.0 * self.rho * e + e * e),
            Metric::Omega => self.omega_sq_error.map(libm::sqrt),
            Metric::OmegaSq => self.omega_sq_error,
            Metric::Kantorovich => self.kantorovich_error,
        }
    }
}

/// Distances from F_θ to `target`.
pub fn theta_distances(law: &ThetaLaw, target: &AnalyticCdf) -> Result<ThetaDistances> {
    let rho = kolmogorov(&law.cdf, target)?;
    let omega_sq = l2_dist_sq(&law.cdf, target)?;
    let w = kantorovich(&law.cdf, target)?;
    // |ω²(A,G) − ω²(B,G)| ≤ W(A,B)·(ρ(A,G) + ρ(B,G)).
    let omega_sq_error =
        law.kantorovich_error.map(|we| we * (2.0 * rho + law.kolmogorov_error.unwrap_or(1.0)).min(2.0));
    Ok(ThetaDistances {
        rho,
        omega_sq,
        kantorovich: w,
        rho_error: law.kolmogorov_error,
        omega_sq_error,
        kantorovich_error: law.kantorovich_error,
    })
}

/// The reference law for a target.
pub fn target_law(system: &System, target: Target, mixture: MixtureBudget) -> Result<AnalyticCdf> {
    match target {
        Target::Normal => Ok(AnalyticCdf::StandardNormal),
        Target::Typical => typical_law(system, mixture),
    }
}

/// The direction used for the `index`-th θ of a run seeded with `seed`.
pub fn theta_for(n: usize, seed: u64, index: usize) -> Result<UnitVector> {
    sample_unit_sphere(n, &mut substream(seed, path::THETA, index as u64))
}

/// Per-θ distances for `n_theta` directions drawn from `seed`.
pub fn sphere_samples<E: Executor>(
    system: &System,
    target: &AnalyticCdf,
    n_theta: usize,
    inner: &InnerBudget,
    seed: u64,
    exec: &E,
) -> Result<Vec<ThetaDistances>> {
    if n_theta == 0 {
        return Err(Error::InvalidParameter("n_theta must be at least 1".into()));
    }
    let results = exec.map(n_theta, |i| {
        let theta = theta_for(system.n(), seed, i)?;
        let law = theta_law(system, &theta, inner)?;
        theta_distances(&law, target)
    });
    results.into_iter().collect()
}

/// Monte Carlo estimate of E_θ d(F_θ, target).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereAverage {
    pub metric: Metric,
    pub target: Target,
    pub mean: f64,
    pub stderr: f64,
    pub n_theta: usize,
    pub inner_budget: InnerBudget,
    pub seed: u64,
    /// Largest certified per-θ error of the metric, if every θ has one.
    pub max_inner_error: Option<f64>,
}

/// Mean and standard error of a metric over per-θ results.
pub fn summarize(samples: &[ThetaDistances], metric: Metric) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().map(|s| s.metric(metric)).sum::<f64>() / m;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s.metric(metric) - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, libm::sqrt(var / m))
}

/// Builds a [`SphereAverage`] from per-θ results, enforcing the budget's
/// error ceiling.
pub fn average_from_samples(
    samples: &[ThetaDistances],
    metric: Metric,
    target: Target,
    inner: &InnerBudget,
    seed: u64,
) -> Result<SphereAverage> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let mut max_err: Option<f64> = Some(0.0);
    for s in samples {
        max_err = match (max_err, s.metric_error(metric)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    if let Some(limit) = inner.max_error {
        match max_err {
            Some(err) if err > limit => {
                let required = libm::ceil(inner.grid as f64 * err / limit) as usize;
                return Err(Error::BudgetTooSmall { grid: inner.grid, error: err, max_error: limit, required });
            }
            None => {
                return Err(Error::Unsupported(format!(
                    "no certified inner error is available for metric {}",
                    metric.name()
                )))
            }
            _ => {}
        }
    }
    let (mean, stderr) = summarize(samples, metric);
    Ok(SphereAverage {
        metric,
        target,
        mean,
        stderr,
        n_theta: samples.len(),
        inner_budget: *inner,
        seed,
        max_inner_error: max_err,
    })
}

/// E_θ d(F_θ, target) over `n_theta` random directions.
#[allow(clippy::too_many_arguments)]
pub fn sphere_average_distance<E: Executor>(
    system: &System,
    metric: Metric,
    target: Target,
    n_theta: usize,
    inner: &InnerBudget,
    mixture: MixtureBudget,
    seed: u64,
    exec: &E,
) -> Result<SphereAverage> {
    let law = target_law(system, target, mixture)?;
    let samples = sphere_samples(system, &law, n_theta, inner, seed, exec)?;
    average_from_samples(&samples, metric, target, inner, seed)
}

/// (Re, Im) of f_θ(t) = E e^{it⟨X,θ⟩} by the periodic midpoint rule over
/// grid values of ⟨X,θ⟩.
pub fn grid_cf(values: &[f64], t: f64) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for v in values {
        let a = t * v;
        re += libm::cos(a);
        im += libm::sin(a);
    }
    let k = values.len() as f64;
    (re / k, im / k)
}

/// ω²(F_θ, G) = (1/π)∫₀^∞ |f_θ(t) − g(t)|²/t² dt, with f_θ from grid values
/// and g the characteristic function of a symmetric target. The range is
/// cut at `t_max`; the omitted tail is reported as the error bound
/// 4/(π t_max).
pub fn omega_sq_by_plancherel(values: &[f64], target: &AnalyticCdf, t_max: f64) -> Result<Certified> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let spread = values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let panels = 8 + (t_max * spread / PI) as usize;
    let cfg =
        QuadConfig::default().with_abs_tol(1e-9).with_rel_tol(1e-9).with_panels(panels).with_max_intervals(50 * panels);
    let mut failure = None;
    let r = integrate(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            let (re, im) = grid_cf(values, t);
            let g = match target.cf(t) {
                Ok(g) => g,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            ((re - g) * (re - g) + im * im) / (t * t)
        },
        0.0,
        t_max,
        &cfg,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Certified { value: r.value / PI, error: 4.0 / (PI * t_max) + r.error / PI })
}
