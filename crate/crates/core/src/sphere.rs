//! The uniform measure on the unit sphere S^{n−1}: sampling, the law of the
//! first coordinate θ₁, its characteristic function J_n and the second-order
//! Edgeworth approximant of J_n(t√n).

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::special::{inc_beta_pair, ln_gamma};

// Landau's uniform bound |J_ν(x)| ≤ c·x^{−1/3} for ν ≥ 0, rounded up.
const LANDAU_C: f64 = 0.7858;
const JN_ABS_TOL: f64 = 1e-13;
const JN_CUTOFF: f64 = 1e-12;

/// A point of S^{n−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Wraps coordinates that already have unit norm (within 1e−12).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dimension(coords.len())?;
        let norm_sq: f64 = coords.iter().map(|c| c * c).sum();
        if libm::fabs(norm_sq - 1.0) > 1e-12 {
            return Err(Error::InvalidParameter(alloc::format!("coordinates have squared norm {norm_sq}, expected 1")));
        }
        Ok(Self { coords })
    }

    /// Normalizes a nonzero vector onto the sphere.
    pub fn from_direction(mut coords: Vec<f64>) -> Result<Self> {
        check_dimension(coords.len())?;
        let norm = libm::sqrt(coords.iter().map(|c| c * c).sum::<f64>());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        for c in &mut coords {
            *c /= norm;
        }
        Ok(Self { coords })
    }

    /// The `k`-th standard basis vector of R^n.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        check_dimension(n)?;
        if k >= n {
            return Err(Error::InvalidParameter(alloc::format!("basis index {k} out of range for n={n}")));
        }
        let mut coords = alloc::vec![0.0; n];
        coords[k] = 1.0;
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidDimension { n, reason: "sphere dimension must be at least 2" })
    } else {
        Ok(())
    }
}

/// Draws θ uniformly from S^{n−1} by normalizing a standard Gaussian vector.
pub fn sample_unit_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitVector> {
    check_dimension(n)?;
    loop {
        let coords: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm_sq: f64 = coords.iter().map(|c| c * c).sum();
        if norm_sq > 1e-300 {
            return UnitVector::from_direction(coords);
        }
    }
}

/// The law of θ₁ under the uniform measure on S^{n−1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereLaw {
    n: usize,
    normalizer: f64,
}

impl SphereLaw {
    pub fn new(n: usize) -> Result<Self> {
        check_dimension(n)?;
        let half = n as f64 / 2.0;
        let normalizer = libm::exp(ln_gamma(half) - ln_gamma(half - 0.5)) / libm::sqrt(PI);
        Ok(Self { n, normalizer })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// c_n = Γ(n/2) / (√π Γ((n−1)/2)).
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Density c_n (1−x²)^{(n−3)/2} on [−1, 1], zero outside.
    pub fn density(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        if self.n == 3 {
            return self.normalizer;
        }
        let exponent = (self.n as f64 - 3.0) / 2.0;
        self.normalizer * libm::pow((1.0 - x) * (1.0 + x), exponent)
    }

    /// P{θ₁ ≤ x} through the incomplete beta function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let (i, c) = inc_beta_pair(x * x, 0.5, (self.n as f64 - 1.0) / 2.0);
        if x < 0.0 {
            0.5 * c
        } else {
            0.5 + 0.5 * i
        }
    }

    /// Upper bound on |J_n(s)| from Landau's Bessel estimate.
    pub fn cf_envelope(&self, s: f64) -> f64 {
        let s = libm::fabs(s);
        if s <= 1.0 {
            return 1.0;
        }
        let nu = self.n as f64 / 2.0 - 1.0;
        let ln_bound = ln_gamma(nu + 1.0) + nu * libm::log(2.0 / s) + libm::log(LANDAU_C) - libm::log(s) / 3.0;
        libm::exp(ln_bound).min(1.0)
    }

    /// J_n(s) = E cos(s θ₁), by adaptive quadrature after the substitution
    /// θ₁ = sin v. Returns 0 where the envelope is below 1e−12.
    pub fn cf(&self, s: f64) -> Result<f64> {
        let s = libm::fabs(s);
        if s == 0.0 {
            return Ok(1.0);
        }
        if self.cf_envelope(s) <= JN_CUTOFF {
            return Ok(0.0);
        }
        let power = self.n as f64 - 2.0;
        let v_max = self.effective_half_width();
        let scale = 2.0 * self.normalizer;
        let panels = 1 + (s * libm::sin(v_max) / PI) as usize;
        let cfg = QuadConfig::default()
            .with_abs_tol(JN_ABS_TOL / scale)
            .with_rel_tol(0.0)
            .with_panels(panels)
            .with_max_intervals(4 * panels + 4000);
        let r = integrate(
            |v| {
                let c = libm::cos(v);
                let w = if power == 0.0 { 1.0 } else { libm::pow(c, power) };
                libm::cos(s * libm::sin(v)) * w
            },
            0.0,
            v_max,
            &cfg,
        )?;
        Ok((scale * r.value).clamp(-1.0, 1.0))
    }

    // Beyond this angle cos^{n−2} v is below 1e−17.
    fn effective_half_width(&self) -> f64 {
        if self.n <= 3 {
            return FRAC_PI_2;
        }
        let power = self.n as f64 - 2.0;
        libm::acos(libm::exp(-39.2 / power)).min(FRAC_PI_2)
    }

    /// E|θ₁|^p by quadrature.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("moment order must be positive, got {p}")));
        }
        let power = self.n as f64 - 2.0;
        let cfg = QuadConfig::default().with_abs_tol(1e-15).with_rel_tol(1e-14).with_panels(4);
        let r = integrate(
            |v| {
                let w = if power == 0.0 { 1.0 } else { libm::pow(libm::cos(v), power) };
                libm::pow(libm::sin(v), p) * w
            },
            0.0,
            self.effective_half_width(),
            &cfg,
        )?;
        Ok(2.0 * self.normalizer * r.value)
    }
}

/// Density of θ₁ on S^{n−1}.
pub fn theta1_density(n: usize, x: f64) -> Result<f64> {
    Ok(SphereLaw::new(n)?.density(x))
}

/// Distribution function of θ₁ on S^{n−1}.
pub fn theta1_cdf(n: usize, x: f64) -> Result<f64> {
    Ok(SphereLaw::new(n)?.cdf(x))
}

/// The characteristic function J_n(s) of θ₁.
pub fn jn(n: usize, s: f64) -> Result<f64> {
    SphereLaw::new(n)?.cf(s)
}

/// Second-order approximant (1 − t⁴/(4n)) e^{−t²/2} of J_n(t√n).
pub fn jn_edgeworth(n: usize, t: f64) -> f64 {
    let t2 = t * t;
    (1.0 - t2 * t2 / (4.0 * n as f64)) * libm::exp(-0.5 * t2)
}

/// E|θ₁|^p on S^{n−1}.
pub fn theta1_abs_moment(n: usize, p: f64) -> Result<f64> {
    SphereLaw::new(n)?.abs_moment(p)
}
