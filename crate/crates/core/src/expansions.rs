//! Closed-form predictors for E_θ ω² and the bound functionals built from
//! characteristic functions, moments and closeness probabilities.

use alloc::format;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::PI;

use crate::distance::ThetaDistances;
use crate::error::{Error, Result};
use crate::moments::{sigma_2p_family, sqrt_gap, Budget, Estimate, MomentReport, PairLaw, PairRecord, XiMoments};
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig};
use crate::rng::Executor;
use crate::special::sqrt_pi;
use crate::sphere::{jn, jn_edgeworth, SphereLaw};
use crate::systems::System;

/// Default slack multiplying the 1/n² error scale of the fixed-norm
/// L² expansion.
pub const COR51_SLACK: f64 = 2.0;
/// Default slack multiplying the Eξ⁴ error scale of the cubic expansion.
pub const THM11_SLACK: f64 = 5.0;
/// Default constants of the general lower bound.
pub const THM12_C1: f64 = 1.0 / 32.0;
pub const THM12_C2: f64 = 1.0;

/// ψ_r(α) = 1 − (α^{1/2} + rα^{−3/2}); ψ₀(0) = 1.
pub fn psi_r(alpha: f64, r: f64) -> Result<f64> {
    if alpha < 0.0 || alpha.is_nan() {
        return Err(Error::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    if alpha == 0.0 {
        return if r == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::InvalidParameter("alpha = 0 is only defined for r = 0".into()))
        };
    }
    Ok(1.0 - (libm::sqrt(alpha) + r / (alpha * libm::sqrt(alpha))))
}

/// ψ_r(α) from its defining integral
/// (2π)^{−1/2}∫((1 − rt⁴)e^{−αt²/2} − e^{−t²/2})/t² dt.
pub fn psi_r_quadrature(alpha: f64, r: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let f = |t: f64| {
        let t2 = t * t;
        if t2 == 0.0 {
            return 0.5 * (1.0 - alpha);
        }
        let x = 0.5 * (1.0 - alpha) * t2;
        let diff = if x < 1.0 {
            libm::exp(-0.5 * t2) * libm::expm1(x)
        } else {
            libm::exp(-0.5 * alpha * t2) - libm::exp(-0.5 * t2)
        };
        (diff - r * t2 * t2 * libm::exp(-0.5 * alpha * t2)) / t2
    };
    let cfg = QuadConfig::default().with_abs_tol(1e-12).with_rel_tol(1e-12).with_panels(4);
    let half = integrate_to_infinity(f, 0.0, &cfg)?;
    Ok(2.0 * half.value / libm::sqrt(2.0 * PI))
}

/// ∫ min{1, t²η²}/t² dt over the real line by quadrature; equals 4η.
pub fn min_square_integral(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-13);
    let knee = 1.0 / eta;
    let inner = integrate(|_| eta * eta, 0.0, knee, &cfg)?.value;
    let tail = integrate_to_infinity(|t| 1.0 / (t * t), knee, &cfg)?.value;
    Ok(2.0 * (inner + tail))
}

/// Which form of the R statistic to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RForm {
    /// Correction factor 1 + 1/(8n) on the first term.
    Simplified,
    /// Correction factor 1 + (|X|⁴+|Y|⁴)/(4n(|X|²+|Y|²)²) on the first term.
    Full,
}

/// R from |X|², |Y|², |X−Y|² and n.
pub fn r_from_norms(norm_x_sq: f64, norm_y_sq: f64, dist_sq: f64, n: usize, form: RForm) -> f64 {
    let nf = n as f64;
    let s = norm_x_sq + norm_y_sq;
    if s == 0.0 {
        return 0.0;
    }
    let first_corr = match form {
        RForm::Simplified => 1.0 / (8.0 * nf),
        RForm::Full => (norm_x_sq * norm_x_sq + norm_y_sq * norm_y_sq) / (4.0 * nf * s * s),
    };
    let root = libm::sqrt(nf);
    libm::sqrt(s) / root * (1.0 + first_corr) - libm::sqrt(dist_sq.max(0.0)) / root * (1.0 + 1.0 / (4.0 * nf))
}

/// R(x, y) with n the common length.
pub fn r_statistic(x: &[f64], y: &[f64], form: RForm) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let (mut nx, mut ny, mut d) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        nx += a * a;
        ny += b * b;
        d += (a - b) * (a - b);
    }
    Ok(r_from_norms(nx, ny, d, x.len(), form))
}

fn record_r(r: &PairRecord, n: usize, form: RForm) -> f64 {
    r_from_norms(r.norm_x_sq, r.norm_y_sq, r.dist_sq, n, form)
}

/// Which expansion a prediction comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionKind {
    /// (1/√(2π))E R, against the typical law.
    Prop42,
    /// [(1+1/(4n))E(1−√(1−ξ)) − 1/(8n)]/√π, against the typical law.
    Cor51,
    /// Eξ³/(16√π), against Φ.
    Thm11,
    /// (½Eξ + Eξ³/16)/√π, against the typical law.
    Remark53,
}

impl PredictionKind {
    pub fn name(self) -> &'static str {
        match self {
            PredictionKind::Prop42 => "prop42",
            PredictionKind::Cor51 => "cor51",
            PredictionKind::Thm11 => "thm11",
            PredictionKind::Remark53 => "remark53",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "prop42" => Some(PredictionKind::Prop42),
            "cor51" => Some(PredictionKind::Cor51),
            "thm11" => Some(PredictionKind::Thm11),
            "remark53" => Some(PredictionKind::Remark53),
            _ => None,
        }
    }
}

/// A predicted E_θ ω² with the size of its remainder term. The claim is
/// |measured − main_value| ≲ slack·error_scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionPrediction {
    pub kind: PredictionKind,
    pub n: usize,
    pub main_value: f64,
    pub main_stderr: f64,
    pub error_scale: f64,
    pub slack: f64,
    /// False when the system violates the expansion's hypotheses.
    pub applicable: bool,
    pub note: Option<alloc::string::String>,
}

impl ExpansionPrediction {
    /// Whether `measured ± 3·stderr` is compatible with the prediction.
    pub fn agrees_with(&self, measured: f64, measured_stderr: f64) -> bool {
        libm::fabs(measured - self.main_value)
            <= 3.0 * libm::hypot(measured_stderr, self.main_stderr) + self.slack * self.error_scale
    }

    /// Smallest slack for which `agrees_with` would hold.
    pub fn required_slack(&self, measured: f64, measured_stderr: f64) -> f64 {
        let gap = libm::fabs(measured - self.main_value) - 3.0 * libm::hypot(measured_stderr, self.main_stderr);
        if gap <= 0.0 {
            0.0
        } else if self.error_scale > 0.0 {
            gap / self.error_scale
        } else {
            f64::INFINITY
        }
    }
}

/// (1/√(2π))E R with error scale (1 + σ₄²)/n².
pub fn prop42_prediction<E: Executor>(
    system: &System,
    budget: Budget,
    norm_samples: usize,
    seed: u64,
    exec: &E,
) -> Result<ExpansionPrediction> {
    let law = PairLaw::build(system, budget, exec)?;
    let sigma4 = sigma_2p_family(system, &[2.0], norm_samples.max(2), seed, exec)?[0].value;
    Ok(prop42_from(&law, sigma4))
}

/// [`prop42_prediction`] from a prepared pair law and σ₄.
pub fn prop42_from(law: &PairLaw, sigma4: f64) -> ExpansionPrediction {
    let n = law.n();
    let er = law.expect(|r| record_r(r, n, RForm::Simplified));
    let scale = 1.0 / libm::sqrt(2.0 * PI);
    let nf = n as f64;
    ExpansionPrediction {
        kind: PredictionKind::Prop42,
        n,
        main_value: scale * er.value,
        main_stderr: scale * er.stderr,
        error_scale: (1.0 + sigma4 * sigma4) / (nf * nf),
        slack: 1.0,
        applicable: true,
        note: None,
    }
}

/// The fixed-norm expansion in E(1 − √(1−ξ)).
pub fn cor51_prediction(system: &System, xi: &XiMoments) -> Result<ExpansionPrediction> {
    if !system.flags().fixed_norm {
        return Err(Error::Unsupported(format!(
            "this expansion needs |X|² = n almost surely; {} does not satisfy it",
            system.name()
        )));
    }
    cor51_from(system.n(), xi)
}

/// [`cor51_prediction`] from n and the ξ-moments alone.
pub fn cor51_from(n: usize, xi: &XiMoments) -> Result<ExpansionPrediction> {
    let gap = xi
        .sqrt_gap
        .ok_or_else(|| Error::NumericInconsistency("E(1-sqrt(1-xi)) is undefined because xi > 1 occurs".into()))?;
    let nf = n as f64;
    let main = ((1.0 + 1.0 / (4.0 * nf)) * gap.value - 1.0 / (8.0 * nf)) / sqrt_pi();
    let scale = 1.0 / (nf * nf);
    let note = if main < COR51_SLACK * scale { Some("prediction below the error floor".into()) } else { None };
    Ok(ExpansionPrediction {
        kind: PredictionKind::Cor51,
        n,
        main_value: main,
        main_stderr: (1.0 + 1.0 / (4.0 * nf)) * gap.stderr / sqrt_pi(),
        error_scale: scale,
        slack: COR51_SLACK,
        applicable: true,
        note,
    })
}

/// The cubic expansion Eξ³/(16√π) = m₃³/(16√π n^{3/2}) with error scale
/// Eξ⁴ = m₄⁴/n². Marked inapplicable unless the system is isotropic, mean
/// zero and of fixed norm.
pub fn thm11_prediction(system: &System, moments: &MomentReport) -> ExpansionPrediction {
    let f = system.flags();
    let applicable = f.isotropic && f.mean_zero && f.fixed_norm;
    let note = if applicable {
        None
    } else if f.isotropic && f.fixed_norm {
        Some("mean is not zero; use remark53".into())
    } else {
        Some("requires an isotropic, mean-zero, fixed-norm system".into())
    };
    let xi = &moments.xi;
    let c = 1.0 / (16.0 * sqrt_pi());
    ExpansionPrediction {
        kind: PredictionKind::Thm11,
        n: moments.n,
        main_value: c * xi.third.value,
        main_stderr: c * xi.third.stderr,
        error_scale: xi.fourth.value.max(0.0),
        slack: THM11_SLACK,
        applicable,
        note,
    }
}

/// (½Eξ + Eξ³/16)/√π for isotropic fixed-norm systems without the mean-zero
/// hypothesis; error scale Eξ⁴ + 1/n².
pub fn remark53_prediction(system: &System, moments: &MomentReport) -> ExpansionPrediction {
    let f = system.flags();
    let xi = &moments.xi;
    let nf = moments.n as f64;
    let sp = sqrt_pi();
    ExpansionPrediction {
        kind: PredictionKind::Remark53,
        n: moments.n,
        main_value: (0.5 * xi.mean.value + xi.third.value / 16.0) / sp,
        main_stderr: libm::hypot(0.5 * xi.mean.stderr, xi.third.stderr / 16.0) / sp,
        error_scale: xi.fourth.value.max(0.0) + 1.0 / (nf * nf),
        slack: THM11_SLACK,
        applicable: f.isotropic && f.fixed_norm,
        note: None,
    }
}

/// Which bound a [`BoundEvaluation`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// c₁P{|X−Y|² ≤ n/4} − c₂(1+σ₄⁴)/n².
    Thm12Lower,
    /// ∫₀ᵀ|a−b|/t dt + (1/T)∫₀ᵀ|b| dt.
    Eq81Smoothing,
    /// (1/(3T))|∫₀ᵀ(f − e^{−t²/2})(1 − t/T)dt|.
    Eq211Lower,
    /// sup_t n²|J_n(t√n) − (1 − t⁴/(4n))e^{−t²/2}|/min(1,t⁴).
    Lemma23Bound,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Thm12Lower => "thm12_lower",
            BoundKind::Eq81Smoothing => "eq81_smoothing",
            BoundKind::Eq211Lower => "eq211_lower",
            BoundKind::Lemma23Bound => "lemma23_bound",
        }
    }
}

/// A bound functional with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEvaluation {
    pub kind: BoundKind,
    pub value: f64,
    pub stderr: f64,
    pub params: Vec<(&'static str, f64)>,
}

/// c₁P{|X−Y|² ≤ n/4} − c₂(1+σ₄⁴)/n².
pub fn thm12_lower_bound<E: Executor>(
    system: &System,
    budget: Budget,
    norm_samples: usize,
    seed: u64,
    c1: f64,
    c2: f64,
    exec: &E,
) -> Result<BoundEvaluation> {
    let law = PairLaw::build(system, budget, exec)?;
    let sigma4 = sigma_2p_family(system, &[2.0], norm_samples.max(2), seed, exec)?[0].value;
    Ok(thm12_from(&law, sigma4, c1, c2))
}

/// [`thm12_lower_bound`] from a prepared pair law and σ₄.
pub fn thm12_from(law: &PairLaw, sigma4: f64, c1: f64, c2: f64) -> BoundEvaluation {
    let p = law.closeness(0.25);
    let nf = law.n() as f64;
    let penalty = (1.0 + sigma4.powi(4)) / (nf * nf);
    BoundEvaluation {
        kind: BoundKind::Thm12Lower,
        value: c1 * p.value - c2 * penalty,
        stderr: c1 * p.stderr,
        params: alloc::vec![("c1", c1), ("c2", c2), ("lambda", 0.25), ("closeness", p.value), ("sigma4", sigma4)],
    }
}

/// √λ/(6n√Var L): the closeness lower bound for a Lipschitz system with
/// parameter function L.
pub fn lipschitz_closeness_bound(n: usize, lambda: f64, var_l: f64) -> Result<f64> {
    if !(var_l > 0.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("need lambda >= 0 and Var L > 0, got {lambda}, {var_l}")));
    }
    let nf = n as f64;
    if lambda > nf * nf * var_l {
        return Err(Error::InvalidParameter(format!("lambda must not exceed n² Var L = {}", nf * nf * var_l)));
    }
    Ok(libm::sqrt(lambda) / (6.0 * nf * libm::sqrt(var_l)))
}

/// Var L for the trigonometric system, where L(t) = t/√2 with t uniform
/// on (−π, π).
pub const TRIG_LIPSCHITZ_VARIANCE: f64 = PI * PI / 6.0;

fn quad_cfg(t_max: f64, oscillation: f64) -> QuadConfig {
    let panels = 8 + (t_max * oscillation / PI) as usize;
    QuadConfig::default()
        .with_abs_tol(1e-12)
        .with_rel_tol(1e-10)
        .with_panels(panels)
        .with_max_intervals(20 * panels + 4000)
}

fn cf_integral<F: FnMut(f64) -> Result<f64>>(mut f: F, t_max: f64, oscillation: f64) -> Result<f64> {
    let mut failure = None;
    let r = integrate(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t_max,
        &quad_cfg(t_max, oscillation),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// ∫₀ᵀ|a(t) − b(t)|/t dt + (1/T)∫₀ᵀ|b(t)| dt for real characteristic
/// functions a, b; `oscillation` bounds the frequency of the integrands
/// and sets the initial panel count.
pub fn smoothing_functional<A, B>(mut cf_a: A, mut cf_b: B, t_max: f64, oscillation: f64) -> Result<BoundEvaluation>
where
    A: FnMut(f64) -> Result<f64>,
    B: FnMut(f64) -> Result<f64>,
{
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_max}")));
    }
    let first = cf_integral(
        |t| {
            if t == 0.0 {
                return Ok(0.0);
            }
            Ok(libm::fabs(cf_a(t)? - cf_b(t)?) / t)
        },
        t_max,
        oscillation,
    )?;
    let second = cf_integral(|t| Ok(libm::fabs(cf_b(t)?)), t_max, oscillation)? / t_max;
    Ok(BoundEvaluation {
        kind: BoundKind::Eq81Smoothing,
        value: first + second,
        stderr: 0.0,
        params: alloc::vec![("T", t_max), ("difference_term", first), ("tail_term", second)],
    })
}

/// (1/(3T))|∫₀ᵀ(f(t) − e^{−t²/2})(1 − t/T)dt|, a lower bound for ρ(F,Φ) up
/// to an absolute factor.
pub fn rho_lower_functional<F: FnMut(f64) -> Result<f64>>(mut cf: F, t_max: f64) -> Result<BoundEvaluation> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_max}")));
    }
    let v = cf_integral(|t| Ok((cf(t)? - libm::exp(-0.5 * t * t)) * (1.0 - t / t_max)), t_max, 1.0)?;
    Ok(BoundEvaluation {
        kind: BoundKind::Eq211Lower,
        value: libm::fabs(v) / (3.0 * t_max),
        stderr: 0.0,
        params: alloc::vec![("T", t_max)],
    })
}

/// [`rho_lower_functional`] for the law of √n θ₁.
pub fn rho_lower_sphere(n: usize, t_max: f64) -> Result<BoundEvaluation> {
    let law = SphereLaw::new(n)?;
    let root = libm::sqrt(n as f64);
    rho_lower_functional(|t| law.cf(t * root), t_max)
}

/// sup over the grid of |J_n(t√n) − (1 − t⁴/(4n))e^{−t²/2}|.
pub fn edgeworth_gap(n: usize, t_max: f64, points: usize) -> Result<f64> {
    let law = SphereLaw::new(n)?;
    let root = libm::sqrt(n as f64);
    let mut sup = 0.0f64;
    for i in 0..=points {
        let t = t_max * i as f64 / points as f64;
        sup = sup.max(libm::fabs(law.cf(t * root)? - jn_edgeworth(n, t)));
    }
    Ok(sup)
}

/// The implied constant sup_t n²|J_n(t√n) − (1 − t⁴/(4n))e^{−t²/2}|/min(1,t⁴)
/// over a grid of (0, t_max].
pub fn lemma23_bound(n: usize, t_max: f64, points: usize) -> Result<BoundEvaluation> {
    let law = SphereLaw::new(n)?;
    let nf = n as f64;
    let root = libm::sqrt(nf);
    let mut sup = 0.0f64;
    for i in 1..=points {
        let t = t_max * i as f64 / points as f64;
        let t4 = (t * t * t * t).min(1.0);
        sup = sup.max(nf * nf * libm::fabs(law.cf(t * root)? - jn_edgeworth(n, t)) / t4);
    }
    Ok(BoundEvaluation {
        kind: BoundKind::Lemma23Bound,
        value: sup,
        stderr: 0.0,
        params: alloc::vec![("n", nf), ("T", t_max), ("points", points as f64)],
    })
}

/// Δ_n(t) = E J_n(t|X−Y|) − J_n(t√n)² for fixed-norm systems.
pub fn delta_n<E: Executor>(system: &System, t: f64, budget: Budget, exec: &E) -> Result<Estimate> {
    if !system.flags().fixed_norm {
        return Err(Error::Unsupported(format!(
            "delta_n needs |X|² = n almost surely; {} does not satisfy it",
            system.name()
        )));
    }
    let law = PairLaw::build(system, budget, exec)?;
    delta_n_from(&law, t)
}

/// Δ_n(t) from a prepared pair law.
pub fn delta_n_from(law: &PairLaw, t: f64) -> Result<Estimate> {
    let n = law.n();
    let sl = SphereLaw::new(n)?;
    if t == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let base = sl.cf(t * libm::sqrt(n as f64))?;
    let failure = RefCell::new(None);
    let e = law.expect(|r| match sl.cf(t * libm::sqrt(r.dist_sq.max(0.0))) {
        Ok(v) => v,
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            0.0
        }
    });
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(Estimate { value: e.value - base * base, stderr: e.stderr })
}

/// ½ε + ε²/8 + ε³/16 + cε⁴.
pub fn sqrt_gap_polynomial(eps: f64, quartic: f64) -> f64 {
    eps * (0.5 + eps * (0.125 + eps * (0.0625 + eps * quartic)))
}

/// Lower and upper polynomial bounds on 1 − √(1−ε), |ε| ≤ 1.
pub fn sqrt_gap_sandwich(eps: f64) -> (f64, f64) {
    (sqrt_gap_polynomial(eps, 0.01), sqrt_gap_polynomial(eps, 3.0))
}

/// Checks lower ≤ 1 − √(1−ε) ≤ upper on `points` equally spaced ε in
/// [−1, 1]; returns the first violating ε, if any.
pub fn sandwich_violation(points: usize) -> Option<f64> {
    (0..points).map(|i| -1.0 + 2.0 * i as f64 / (points - 1).max(1) as f64).find(|&eps| {
        let (lo, hi) = sqrt_gap_sandwich(eps);
        let w = sqrt_gap(eps);
        let slop = 1e-15 * (1.0 + libm::fabs(w));
        lo > w + slop || w > hi + slop
    })
}

/// Outcome of an inequality audit lhs ≤ rhs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl AuditOutcome {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, satisfied: lhs <= rhs }
    }
}

/// E ω² ≤ b(14√(log n)E ρ² + 8/n⁴), the α = 2 case of the ω-ρ comparison
/// for |X| ≤ b√n, from per-θ distances to the typical law.
pub fn omega_rho_audit(samples: &[ThetaDistances], n: usize, b: f64) -> Result<AuditOutcome> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let m = samples.len() as f64;
    let lhs = samples.iter().map(|s| s.omega_sq).sum::<f64>() / m;
    let rho_sq = samples.iter().map(|s| s.rho * s.rho).sum::<f64>() / m;
    let nf = n as f64;
    let rhs = b * (14.0 * libm::sqrt(libm::log(nf)) * rho_sq + 8.0 / nf.powi(4));
    Ok(AuditOutcome::new(lhs, rhs))
}

/// E W ≤ 14b√(log n)E ρ + 8b/n⁴ for |X| ≤ b√n.
pub fn kantorovich_rho_audit(samples: &[ThetaDistances], n: usize, b: f64) -> Result<AuditOutcome> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let m = samples.len() as f64;
    let lhs = samples.iter().map(|s| s.kantorovich).sum::<f64>() / m;
    let rho = samples.iter().map(|s| s.rho).sum::<f64>() / m;
    let nf = n as f64;
    let rhs = 14.0 * b * libm::sqrt(libm::log(nf)) * rho + 8.0 * b / nf.powi(4);
    Ok(AuditOutcome::new(lhs, rhs))
}

/// ω² ≤ ρ·W for every θ; returns the worst excess of ω² over ρW, which is
/// at most `tol` when the chain holds.
pub fn chain_audit(samples: &[ThetaDistances], tol: f64) -> AuditOutcome {
    let worst = samples.iter().map(|s| s.omega_sq - s.rho * s.kantorovich).fold(f64::NEG_INFINITY, f64::max);
    AuditOutcome::new(worst, tol)
}

/// Mean of J_n over a grid of t, used by the characteristic-function
/// helpers.
pub fn jn_scaled(n: usize, t: f64) -> Result<f64> {
    jn(n, t * libm::sqrt(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{moment_report, xi_functionals};
    use crate::rng::Sequential;

    #[test]
    fn psi_examples() {
        for r in [-0.3, 0.0, 0.7] {
            assert!((psi_r(1.0, r).unwrap() + r).abs() < 1e-15);
        }
        assert_eq!(psi_r(4.0, 0.0).unwrap(), -1.0);
        assert!((psi_r(0.25, 0.1).unwrap() + 0.3).abs() < 1e-15);
        assert_eq!(psi_r(0.0, 0.0).unwrap(), 1.0);
        assert!(psi_r(-1.0, 0.0).is_err());
    }

    #[test]
    fn psi_quadrature_agrees() {
        for i in 0..=6 {
            let alpha = 0.1 + 1.9 * i as f64 / 6.0;
            for j in 0..=4 {
                let r = -0.2 + 0.1 * j as f64;
                let q = psi_r_quadrature(alpha, r).unwrap();
                assert!((q - psi_r(alpha, r).unwrap()).abs() < 1e-8, "{alpha} {r}");
            }
        }
    }

    #[test]
    fn min_square_identity() {
        for (eta, v) in [(1.0, 4.0), (0.25, 1.0), (7.0, 28.0), (0.1, 0.4)] {
            assert!((min_square_integral(eta).unwrap() - v).abs() < 1e-8);
        }
    }

    #[test]
    fn r_examples() {
        assert_eq!(r_statistic(&[0.0; 4], &[0.0; 4], RForm::Simplified).unwrap(), 0.0);
        let n = 5;
        let x = [1.0; 5];
        let r = r_statistic(&x, &x, RForm::Simplified).unwrap();
        assert!((r - core::f64::consts::SQRT_2 * (1.0 + 1.0 / (8.0 * n as f64))).abs() < 1e-14);
        // With |X| = |Y| the two forms agree.
        assert!((r - r_statistic(&x, &x, RForm::Full).unwrap()).abs() < 1e-14);
        assert!(r_statistic(&[1.0], &[1.0, 2.0], RForm::Simplified).is_err());
        // Orthogonal pairs with |X−Y|² = 2n.
        let nf = 10.0;
        let r = r_from_norms(nf, nf, 2.0 * nf, 10, RForm::Simplified);
        assert!((r + core::f64::consts::SQRT_2 / (8.0 * nf)).abs() < 1e-14);
    }

    #[test]
    fn cor51_examples() {
        let e = System::empirical(12).unwrap();
        let xi = xi_functionals(&e, Budget::Exact, &Sequential).unwrap();
        let p = cor51_prediction(&e, &xi).unwrap();
        let nf = 12.0;
        assert!((p.main_value - (7.0 / 8.0 + 1.0 / (4.0 * nf)) / (nf * sqrt_pi())).abs() < 1e-12, "{p:?}");
        let w = System::walsh(3).unwrap();
        let xi = xi_functionals(&w, Budget::Exact, &Sequential).unwrap();
        let expected_gap = (1.0 / 8.0) * 1.0 + (7.0 / 8.0) * (1.0 - libm::sqrt(8.0 / 7.0));
        assert!((xi.sqrt_gap.unwrap().value - expected_gap).abs() < 1e-14);
        let zero = Estimate::exact(0.0);
        let xi0 = XiMoments { mean: zero, second: zero, third: zero, fourth: zero, sqrt_gap: Some(zero) };
        let p = cor51_from(8, &xi0).unwrap();
        assert!((p.main_value + 1.0 / (8.0 * 8.0 * sqrt_pi())).abs() < 1e-15);
        assert!(p.note.is_some());
        assert!(cor51_prediction(&System::cosine(8).unwrap(), &xi).is_err());
    }

    #[test]
    fn thm11_examples() {
        let w = System::walsh(3).unwrap();
        let rep = moment_report(&w, Budget::Exact, 16, &Sequential).unwrap();
        let p = thm11_prediction(&w, &rep);
        assert!(p.applicable);
        assert!((rep.xi.third.value - 42.0 / 343.0).abs() < 1e-14);
        assert!((p.main_value - 4.318e-3).abs() < 1e-6);
        let e = System::empirical(10).unwrap();
        let rep = moment_report(&e, Budget::Exact, 16, &Sequential).unwrap();
        assert!(!thm11_prediction(&e, &rep).applicable);
        let r = remark53_prediction(&e, &rep);
        // ξ ∈ {0, 1} for the empirical system, so Eξ = Eξ³ = 1/n.
        let expected = (0.5 / 10.0 + 1.0 / 16.0 / 10.0) / sqrt_pi();
        assert!((r.main_value - expected).abs() < 1e-15, "{} {expected}", r.main_value);
    }

    #[test]
    fn prop42_on_empirical() {
        let n = 40;
        let e = System::empirical(n).unwrap();
        let p = prop42_prediction(&e, Budget::Exact, 4, 0, &Sequential).unwrap();
        let nf = n as f64;
        let lead = 7.0 / 8.0 / (nf * sqrt_pi());
        assert!((p.main_value - lead).abs() < 3.0 / (nf * nf), "{} {}", p.main_value, lead);
        assert_eq!(p.error_scale, 1.0 / (nf * nf));
    }

    #[test]
    fn thm12_on_empirical() {
        let e = System::empirical(20).unwrap();
        let b = thm12_lower_bound(&e, Budget::Exact, 4, 0, 1.0, 1.0, &Sequential).unwrap();
        assert!((b.value - (1.0 / 20.0 - 1.0 / 400.0)).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_closeness_example() {
        let t = System::trig(8).unwrap();
        let p = crate::moments::closeness_probability(
            &t,
            0.25,
            Budget::MonteCarlo { samples: 100_000, seed: 5 },
            &Sequential,
        )
        .unwrap();
        let bound = lipschitz_closeness_bound(8, 0.25, TRIG_LIPSCHITZ_VARIANCE).unwrap();
        assert!(p.value > bound, "{p:?} {bound}");
        assert!(lipschitz_closeness_bound(2, 100.0, 1.0).is_err());
    }

    #[test]
    fn smoothing_examples() {
        let gauss = |t: f64| Ok(libm::exp(-0.5 * t * t));
        let s = smoothing_functional(gauss, gauss, 50.0, 1.0).unwrap();
        assert!((s.value - libm::sqrt(PI / 2.0) / 50.0).abs() < 1e-10);
        let mut prev = None;
        for n in [20usize, 40, 80] {
            let v =
                smoothing_functional(|t| jn_scaled(n, t), gauss, 4.0 * n as f64, libm::sqrt(n as f64)).unwrap().value;
            // The Gaussian tail term is √(π/2)/T = O(1/n) as well.
            if let Some(p) = prev {
                let ratio: f64 = v / p;
                assert!((0.35..=0.65).contains(&ratio), "{n}: {ratio}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn rho_lower_examples() {
        let v = rho_lower_functional(|t| Ok(libm::exp(-0.5 * t * t)), 1.0).unwrap();
        assert_eq!(v.value, 0.0);
        let v = rho_lower_functional(|_| Ok(1.0), 1.0).unwrap().value;
        let cfg = QuadConfig::default();
        let direct = integrate(|t| (1.0 - libm::exp(-0.5 * t * t)) * (1.0 - t), 0.0, 1.0, &cfg).unwrap().value / 3.0;
        assert!((v - direct).abs() < 1e-14);
        let scaled: Vec<f64> =
            [20usize, 40, 80, 160].iter().map(|&n| n as f64 * rho_lower_sphere(n, 1.0).unwrap().value).collect();
        let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(lo > 0.0 && hi / lo <= 2.0, "{scaled:?}");
    }

    #[test]
    fn delta_examples() {
        let e = System::empirical(9).unwrap();
        assert_eq!(delta_n(&e, 0.0, Budget::Exact, &Sequential).unwrap().value, 0.0);
        let t = 0.7;
        let nf = 9.0f64;
        let j2 = jn(9, t * libm::sqrt(2.0 * nf)).unwrap();
        let j1 = jn(9, t * libm::sqrt(nf)).unwrap();
        let expected = (1.0 - j2) / nf + j2 - j1 * j1;
        assert!((delta_n(&e, t, Budget::Exact, &Sequential).unwrap().value - expected).abs() < 1e-13);
        let w = System::walsh(3).unwrap();
        for t in [0.1, 0.3, 0.5] {
            assert!(delta_n(&w, t, Budget::Exact, &Sequential).unwrap().value >= -1e-14);
        }
        assert!(delta_n(&System::cosine(4).unwrap(), 0.5, Budget::Exact, &Sequential).is_err());
    }

    #[test]
    fn sandwich_holds() {
        assert_eq!(sandwich_violation(10_001), None);
    }

    #[test]
    fn edgeworth_rate() {
        let e: Vec<f64> = [50usize, 100, 200, 400].iter().map(|&n| edgeworth_gap(n, 3.0, 300).unwrap()).collect();
        for w in e.windows(2) {
            let r = w[1] / w[0];
            assert!((0.15..=0.40).contains(&r), "{e:?}");
        }
        let c: Vec<f64> = [50usize, 100, 200].iter().map(|&n| lemma23_bound(n, 3.0, 300).unwrap().value).collect();
        assert!(c.iter().all(|v| *v > 0.0 && *v < 10.0), "{c:?}");
    }
}
