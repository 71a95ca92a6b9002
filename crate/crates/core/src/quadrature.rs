//! Adaptive Gauss–Kronrod (10/21) quadrature with a global error heap,
//! a semi-infinite transform, and a fixed five-point Gauss–Legendre rule.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_296,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

const GL5_X: [f64; 3] = [0.0, 0.538_469_310_105_683_091_036_314_420_700, 0.906_179_845_938_663_992_797_626_878_299];
const GL5_W: [f64; 3] = [
    0.568_888_888_888_888_888_888_888_888_889,
    0.478_628_670_499_366_468_041_291_514_836,
    0.236_926_885_056_189_087_514_264_040_720,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of live subintervals.
    pub max_intervals: usize,
    /// Number of equal panels the range is cut into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000, initial_panels: 1 }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    pub fn with_max_intervals(mut self, max: usize) -> Self {
        self.max_intervals = max;
        self
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One Gauss–Kronrod 21-point pass with the QUADPACK error heuristic.
/// Returns the estimate and its error bound.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (value, error, _) = gk21_full(f, a, b);
    (value, error)
}

// Also returns the integral of |f|, which sets the roundoff floor.
fn gk21_full<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = libm::fabs(res_k);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (libm::fabs(f1) + libm::fabs(f2));
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * libm::fabs(fc - mean);
    for j in 0..10 {
        res_asc += WGK[j] * (libm::fabs(fv1[j] - mean) + libm::fabs(fv2[j] - mean));
    }
    let scale = libm::fabs(half);
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = libm::fabs((res_k - res_g) * half);
    if res_asc != 0.0 && err != 0.0 {
        let r = libm::pow(200.0 * err / res_asc, 1.5);
        err = res_asc * if r < 1.0 { r } else { 1.0 };
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > err {
        err = floor;
    }
    (value, err, res_abs)
}

/// Fixed five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre_5<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = GL5_W[0] * f(center);
    for j in 1..3 {
        let dx = half * GL5_X[j];
        sum += GL5_W[j] * (f(center - dx) + f(center + dx));
    }
    sum * half
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("integration limits must be finite, got [{a}, {b}]")));
    }
    let panels = cfg.initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(panels * 2);
    let mut settled: Vec<Piece> = Vec::new();
    let mut evaluations = 0usize;
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (value, error, magnitude) = gk21_full(&mut f, lo, hi);
        evaluations += 21;
        heap.push(Piece { a: lo, b: hi, value, error, magnitude });
    }
    let (mut value, mut error, mut magnitude) = totals(heap.iter());
    loop {
        // Below 100ε·∫|f| the error estimate is dominated by rounding.
        let tol = cfg.abs_tol.max(cfg.rel_tol * libm::fabs(value)).max(100.0 * f64::EPSILON * magnitude);
        if error <= tol {
            let (value, error, _) = totals(heap.iter().chain(settled.iter()));
            return Ok(Integral { value, error, evaluations });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                let (value, error, _) = totals(settled.iter());
                return Err(Error::Quadrature { a, b, estimate: value, error, evaluations });
            }
        };
        if heap.len() + settled.len() + 1 >= cfg.max_intervals {
            heap.push(worst);
            let (value, error, _) = totals(heap.iter().chain(settled.iter()));
            return Err(Error::Quadrature { a, b, estimate: value, error, evaluations });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let tiny = 1e3 * f64::EPSILON * (libm::fabs(worst.a) + libm::fabs(worst.b)).max(f64::MIN_POSITIVE);
        if worst.b - worst.a <= tiny || mid <= worst.a || mid >= worst.b {
            settled.push(worst);
            if heap.is_empty() {
                let (value, error, _) = totals(settled.iter());
                return Err(Error::Quadrature { a, b, estimate: value, error, evaluations });
            }
            continue;
        }
        let (v1, e1, m1) = gk21_full(&mut f, worst.a, mid);
        let (v2, e2, m2) = gk21_full(&mut f, mid, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        magnitude += m1 + m2 - worst.magnitude;
        // Keep the running error from drifting below the true sum.
        if error < 0.0 {
            let t = totals(heap.iter().chain(settled.iter()));
            error = t.1 + e1 + e2;
        }
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1, magnitude: m1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2, magnitude: m2 });
    }
}

fn totals<'a, I: Iterator<Item = &'a Piece>>(pieces: I) -> (f64, f64, f64) {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut magnitude = 0.0;
    for p in pieces {
        value += p.value;
        error += p.error;
        magnitude += p.magnitude;
    }
    (value, error, magnitude)
}

/// Integrates `f` over `[a, ∞)` through the map `x = a + u/(1-u)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, cfg: &QuadConfig) -> Result<Integral> {
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        if one_minus <= 0.0 {
            return 0.0;
        }
        let x = a + u / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

/// Integrates `f` piecewise over consecutive points of `breaks`, splitting
/// the absolute tolerance evenly across the pieces.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<Integral> {
    if breaks.len() < 2 {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let pieces = breaks.len() - 1;
    let local = QuadConfig { abs_tol: cfg.abs_tol / pieces as f64, ..*cfg };
    let mut total = Integral { value: 0.0, error: 0.0, evaluations: 0 };
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], &local)?;
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}
