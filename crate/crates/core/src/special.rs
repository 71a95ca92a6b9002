//! Special functions: log-gamma, the standard normal law and its integrated
//! distribution functions, and the regularized incomplete beta function.

use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;
const INV_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_561;

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal density φ.
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Standard normal distribution function Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate for large positive x.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// ∫_{−∞}^{a} Φ(x) dx = aΦ(a) + φ(a).
pub fn normal_cdf_integral(a: f64) -> f64 {
    a * normal_cdf(a) + normal_pdf(a)
}

/// ∫_{−∞}^{a} Φ(x)² dx = aΦ(a)² + 2φ(a)Φ(a) − Φ(√2·a)/√π.
pub fn normal_cdf_sq_integral(a: f64) -> f64 {
    let p = normal_cdf(a);
    a * p * p + 2.0 * normal_pdf(a) * p - normal_cdf(SQRT_2 * a) * INV_SQRT_PI
}

/// Regularized incomplete beta I_x(a, b) together with its complement
/// 1 − I_x(a, b), each computed without subtractive cancellation.
pub fn inc_beta_pair(x: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        let v = front * beta_cf(a, b, x) / a;
        (v, 1.0 - v)
    } else {
        let w = front * beta_cf(b, a, 1.0 - x) / b;
        (1.0 - w, w)
    }
}

/// Regularized incomplete beta I_x(a, b).
pub fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    inc_beta_pair(x, a, b).0
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Smallest x in `[lo, hi]` with `f(x) >= target` for nondecreasing `f`,
/// located by bisection to the resolution of the floating-point grid.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// √π, used by several closed forms.
pub fn sqrt_pi() -> f64 {
    libm::sqrt(PI)
}
