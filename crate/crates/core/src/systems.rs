//! Concrete orthonormal systems X = (X₁,…,X_n) on a probability space Ω,
//! with samplers, exact atom enumeration for finite Ω, and dense-grid
//! evaluation of ⟨X(ω),θ⟩ for interval-type Ω.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const TAU: f64 = 2.0 * PI;

/// Largest Walsh order whose atoms are enumerated explicitly.
pub const MAX_EXACT_WALSH_D: u32 = 12;

/// Built-in 1-periodic profiles for the shifted periodic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiShape {
    /// √2·cos(2πx).
    Cosine,
    /// √3·(1 − 4|x − ½|).
    Triangle,
    /// √3·(2x − 1); discontinuous at integers.
    Sawtooth,
    /// +1 on [0, ½), −1 on [½, 1).
    Square,
}

impl PsiShape {
    pub fn name(self) -> &'static str {
        match self {
            PsiShape::Cosine => "cosine",
            PsiShape::Triangle => "triangle",
            PsiShape::Sawtooth => "sawtooth",
            PsiShape::Square => "square",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cosine" => Some(PsiShape::Cosine),
            "triangle" => Some(PsiShape::Triangle),
            "sawtooth" => Some(PsiShape::Sawtooth),
            "square" => Some(PsiShape::Square),
            _ => None,
        }
    }
}

type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum PsiSource {
    Preset(PsiShape),
    Custom(PsiFn),
}

/// A 1-periodic profile Ψ with ∫₀¹Ψ = 0 and ∫₀¹Ψ² = 1.
#[derive(Clone)]
pub struct Psi {
    name: String,
    source: PsiSource,
    lipschitz: Option<f64>,
    sup_abs: f64,
    fourth_moment: Option<f64>,
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Psi")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("sup_abs", &self.sup_abs)
            .field("fourth_moment", &self.fourth_moment)
            .finish()
    }
}

impl Psi {
    pub fn preset(shape: PsiShape) -> Self {
        let (lipschitz, sup_abs, fourth) = match shape {
            PsiShape::Cosine => (Some(2.0 * SQRT_2 * PI), SQRT_2, 1.5),
            PsiShape::Triangle => (Some(4.0 * SQRT_3), SQRT_3, 1.8),
            PsiShape::Sawtooth => (None, SQRT_3, 1.8),
            PsiShape::Square => (None, 1.0, 1.0),
        };
        Self {
            name: shape.name().into(),
            source: PsiSource::Preset(shape),
            lipschitz,
            sup_abs,
            fourth_moment: Some(fourth),
        }
    }

    /// A user-supplied profile. The mean and second moment over one period
    /// are checked by quadrature and must equal 0 and 1 within 1e−6.
    pub fn custom<F>(name: &str, f: F, lipschitz: Option<f64>, sup_abs: f64, fourth_moment: Option<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let psi = Self { name: name.into(), source: PsiSource::Custom(Arc::new(f)), lipschitz, sup_abs, fourth_moment };
        let cfg =
            QuadConfig::default().with_abs_tol(1e-9).with_rel_tol(1e-9).with_panels(64).with_max_intervals(20_000);
        let mean = integrate(|x| psi.eval(x), 0.0, 1.0, &cfg)?.value;
        let second = integrate(|x| psi.eval(x).powi(2), 0.0, 1.0, &cfg)?.value;
        if libm::fabs(mean) > 1e-6 || libm::fabs(second - 1.0) > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "profile '{name}' has mean {mean:e} and second moment {second}; expected 0 and 1"
            )));
        }
        Ok(psi)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ψ(x), reducing x modulo 1.
    pub fn eval(&self, x: f64) -> f64 {
        let y = x - libm::floor(x);
        match &self.source {
            PsiSource::Preset(PsiShape::Cosine) => SQRT_2 * libm::cos(TAU * y),
            PsiSource::Preset(PsiShape::Triangle) => SQRT_3 * (1.0 - 4.0 * libm::fabs(y - 0.5)),
            PsiSource::Preset(PsiShape::Sawtooth) => SQRT_3 * (2.0 * y - 1.0),
            PsiSource::Preset(PsiShape::Square) => {
                if y < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            PsiSource::Custom(f) => f(y),
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    /// ∫₀¹Ψ⁴ when declared.
    pub fn fourth_moment(&self) -> Option<f64> {
        self.fourth_moment
    }
}

/// The family a system belongs to, with its kind-specific parameters.
#[derive(Debug, Clone)]
pub enum SystemKind {
    /// √2cos(kt), √2sin(kt) on (−π, π).
    Trig,
    /// √2cos(kt), k = 1..n, on (0, π).
    Cosine,
    /// √2·T_k(t) on (−1, 1) under the arcsine law.
    Chebyshev,
    /// Ψ(kt + s) on the unit square.
    ShiftedPeriodic(Psi),
    /// Products ∏_{k∈τ} t_k over nonempty τ ⊂ {1..d}, binary-counter order.
    Walsh { d: u32 },
    /// √n·e_k with probability 1/n each.
    Empirical,
    /// √2cos(m_k t), √2sin(m_k t) on (−π, π).
    LacunaryTrig { frequencies: Vec<u64>, q: f64 },
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Trig => "trig",
            SystemKind::Cosine => "cosine",
            SystemKind::Chebyshev => "chebyshev",
            SystemKind::ShiftedPeriodic(_) => "shifted_periodic",
            SystemKind::Walsh { .. } => "walsh",
            SystemKind::Empirical => "empirical",
            SystemKind::LacunaryTrig { .. } => "lacunary_trig",
        }
    }
}

/// Metadata that decides which statements apply to a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flags {
    pub isotropic: bool,
    /// |X|² = n almost surely.
    pub fixed_norm: bool,
    pub mean_zero: bool,
    /// sup over ω and k of |X_k(ω)|.
    pub sup_norm_bound: f64,
    /// The constant b in |X| ≤ b√n.
    pub norm_bound: f64,
}

/// The sample point ω behind a draw of X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    /// t in the system's interval: (−π, π), (0, π) or (−1, 1).
    Point(f64),
    /// (t, s) in the unit square.
    Square(f64, f64),
    /// Walsh signs: bit k−1 set means t_k = −1.
    Signs(u32),
    /// Zero-based atom index.
    Index(usize),
}

/// One draw of X together with the point it was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSample {
    pub x: Vec<f64>,
    pub omega: Omega,
}

/// Values of t ↦ ⟨X(t),θ⟩ on a uniform midpoint grid of Ω, with certified
/// bounds on the Kantorovich and Kolmogorov distance between the grid law
/// and the exact law of ⟨X,θ⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProjection {
    pub values: Vec<f64>,
    pub kantorovich_error: Option<f64>,
    pub kolmogorov_error: Option<f64>,
}

/// An orthonormal system of length n.
#[derive(Debug, Clone)]
pub struct System {
    kind: SystemKind,
    n: usize,
    flags: Flags,
}

fn dimension_error(n: usize, reason: &'static str) -> Error {
    Error::InvalidDimension { n, reason }
}

impl System {
    /// Trigonometric system; n must be even.
    pub fn trig(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(dimension_error(n, "trig system needs an even n >= 2"));
        }
        Ok(Self { kind: SystemKind::Trig, n, flags: fixed_norm_flags(SQRT_2) })
    }

    pub fn cosine(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(dimension_error(n, "cosine system needs n >= 2"));
        }
        Ok(Self { kind: SystemKind::Cosine, n, flags: bounded_flags(SQRT_2, SQRT_2) })
    }

    pub fn chebyshev(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(dimension_error(n, "Chebyshev system needs n >= 2"));
        }
        Ok(Self { kind: SystemKind::Chebyshev, n, flags: bounded_flags(SQRT_2, SQRT_2) })
    }

    pub fn shifted_periodic(n: usize, psi: Psi) -> Result<Self> {
        if n < 2 {
            return Err(dimension_error(n, "shifted periodic system needs n >= 2"));
        }
        let b = psi.sup_abs();
        Ok(Self { kind: SystemKind::ShiftedPeriodic(psi), n, flags: bounded_flags(b, b) })
    }

    /// Walsh system of order d, with n = 2^d − 1.
    pub fn walsh(d: u32) -> Result<Self> {
        if !(1..=20).contains(&d) {
            return Err(dimension_error((1usize << d.min(31)) - 1, "Walsh order d must be in 1..=20"));
        }
        let n = (1usize << d) - 1;
        if n < 2 {
            return Err(dimension_error(n, "Walsh system needs d >= 2"));
        }
        Ok(Self { kind: SystemKind::Walsh { d }, n, flags: fixed_norm_flags(1.0) })
    }

    /// Walsh system addressed by its length, which must be 2^d − 1.
    pub fn walsh_n(n: usize) -> Result<Self> {
        let m = n + 1;
        if m < 4 || !m.is_power_of_two() {
            return Err(dimension_error(n, "Walsh system needs n = 2^d - 1 with d >= 2"));
        }
        Self::walsh(m.trailing_zeros())
    }

    pub fn empirical(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(dimension_error(n, "empirical system needs n >= 2"));
        }
        let flags = Flags {
            isotropic: true,
            fixed_norm: true,
            mean_zero: false,
            sup_norm_bound: libm::sqrt(n as f64),
            norm_bound: 1.0,
        };
        Ok(Self { kind: SystemKind::Empirical, n, flags })
    }

    /// Lacunary trigonometric system from an explicit frequency list with
    /// m_{k+1}/m_k ≥ q > 1; n = 2·len.
    pub fn lacunary(frequencies: Vec<u64>, q: f64) -> Result<Self> {
        if !(q > 1.0) {
            return Err(Error::InvalidParameter(format!("lacunary ratio q must exceed 1, got {q}")));
        }
        if frequencies.is_empty() {
            return Err(Error::Empty);
        }
        if frequencies[0] == 0 {
            return Err(Error::InvalidParameter("frequencies must be positive".into()));
        }
        for w in frequencies.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter(format!(
                    "frequencies must be strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
            if (w[1] as f64) < q * w[0] as f64 * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!("ratio {}/{} is below q = {q}", w[1], w[0])));
            }
        }
        let n = 2 * frequencies.len();
        Ok(Self { kind: SystemKind::LacunaryTrig { frequencies, q }, n, flags: fixed_norm_flags(SQRT_2) })
    }

    /// Lacunary system with m₁ given and m_{k+1} = ⌈q·m_k⌉.
    pub fn lacunary_geometric(m1: u64, q: f64, count: usize) -> Result<Self> {
        Self::lacunary(geometric_frequencies(m1, q, count)?, q)
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// True when Ω is finite and its atoms can be enumerated.
    pub fn is_finite(&self) -> bool {
        match self.kind {
            SystemKind::Empirical => true,
            SystemKind::Walsh { d } => d <= MAX_EXACT_WALSH_D,
            _ => false,
        }
    }

    /// Analytic σ₄² = Var(|X|²)/n where known.
    pub fn exact_sigma4_sq(&self) -> Option<f64> {
        if self.flags.fixed_norm {
            return Some(0.0);
        }
        match &self.kind {
            SystemKind::Cosine | SystemKind::Chebyshev => Some(0.5),
            SystemKind::ShiftedPeriodic(psi) => psi.fourth_moment().map(|m| m - 1.0),
            _ => None,
        }
    }

    /// Evaluates X(ω) into `out`.
    pub fn eval_into(&self, omega: &Omega, out: &mut [f64]) -> Result<()> {
        if out.len() != self.n {
            return Err(Error::LengthMismatch { left: out.len(), right: self.n });
        }
        match (&self.kind, *omega) {
            (SystemKind::Trig, Omega::Point(t)) => fill_trig(t, out),
            (SystemKind::LacunaryTrig { frequencies, .. }, Omega::Point(t)) => fill_lacunary(frequencies, t, out),
            (SystemKind::Cosine, Omega::Point(t)) => fill_cosine(t, out),
            (SystemKind::Chebyshev, Omega::Point(t)) => {
                if !(-1.0..=1.0).contains(&t) {
                    return Err(Error::InvalidParameter(format!("Chebyshev point {t} outside [-1, 1]")));
                }
                fill_cosine(libm::acos(t), out)
            }
            (SystemKind::ShiftedPeriodic(psi), Omega::Square(t, s)) => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = psi.eval((k + 1) as f64 * t + s);
                }
            }
            (SystemKind::Walsh { d }, Omega::Signs(bits)) => fill_walsh(*d, bits, out),
            (SystemKind::Empirical, Omega::Index(k)) => {
                if k >= self.n {
                    return Err(Error::InvalidParameter(format!("atom index {k} out of range")));
                }
                out.fill(0.0);
                out[k] = libm::sqrt(self.n as f64);
            }
            (kind, omega) => {
                return Err(Error::InvalidParameter(format!(
                    "sample point {omega:?} does not belong to a {} system",
                    kind.name()
                )))
            }
        }
        Ok(())
    }

    /// X(ω) as a new vector.
    pub fn eval(&self, omega: &Omega) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.eval_into(omega, &mut out)?;
        Ok(out)
    }

    /// Draws ω from ℙ, writes X(ω) into `out` and returns ω.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Omega {
        debug_assert_eq!(out.len(), self.n);
        match &self.kind {
            SystemKind::Trig => {
                let t = -PI + TAU * rng.random::<f64>();
                fill_trig(t, out);
                Omega::Point(t)
            }
            SystemKind::LacunaryTrig { frequencies, .. } => {
                let t = -PI + TAU * rng.random::<f64>();
                fill_lacunary(frequencies, t, out);
                Omega::Point(t)
            }
            SystemKind::Cosine => {
                let t = PI * rng.random::<f64>();
                fill_cosine(t, out);
                Omega::Point(t)
            }
            SystemKind::Chebyshev => {
                let angle = PI * rng.random::<f64>();
                fill_cosine(angle, out);
                Omega::Point(libm::cos(angle))
            }
            SystemKind::ShiftedPeriodic(psi) => {
                let t = rng.random::<f64>();
                let s = rng.random::<f64>();
                for (k, o) in out.iter_mut().enumerate() {
                    *o = psi.eval((k + 1) as f64 * t + s);
                }
                Omega::Square(t, s)
            }
            SystemKind::Walsh { d } => {
                let bits = rng.random::<u32>() & ((1u32 << d) - 1);
                fill_walsh(*d, bits, out);
                Omega::Signs(bits)
            }
            SystemKind::Empirical => {
                let k = rng.random_range(0..self.n);
                out.fill(0.0);
                out[k] = libm::sqrt(self.n as f64);
                Omega::Index(k)
            }
        }
    }

    /// Draws one sample of X.
    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> SystemSample {
        let mut x = vec![0.0; self.n];
        let omega = self.sample_into(rng, &mut x);
        SystemSample { x, omega }
    }

    /// The atoms of a finite Ω with their probabilities.
    pub fn atoms(&self) -> Result<Vec<(Omega, f64)>> {
        match self.kind {
            SystemKind::Empirical => {
                let w = 1.0 / self.n as f64;
                Ok((0..self.n).map(|k| (Omega::Index(k), w)).collect())
            }
            SystemKind::Walsh { d } if d <= MAX_EXACT_WALSH_D => {
                let count = 1u32 << d;
                let w = 1.0 / count as f64;
                Ok((0..count).map(|b| (Omega::Signs(b), w)).collect())
            }
            _ => Err(Error::Unsupported(format!(
                "exact enumeration needs a finite sample space; {} is continuous or too large",
                self.name()
            ))),
        }
    }

    /// Number of interval coordinates of Ω (0 for finite systems).
    pub fn interval_dims(&self) -> usize {
        match self.kind {
            SystemKind::ShiftedPeriodic(_) => 2,
            SystemKind::Walsh { .. } | SystemKind::Empirical => 0,
            _ => 1,
        }
    }

    /// Evaluates ⟨X,θ⟩ on a uniform midpoint grid of about `grid` points of Ω
    /// (a √grid × √grid lattice for two-dimensional Ω).
    pub fn project_on_grid(&self, theta: &[f64], grid: usize) -> Result<GridProjection> {
        if theta.len() != self.n {
            return Err(Error::LengthMismatch { left: theta.len(), right: self.n });
        }
        if grid < 2 {
            return Err(Error::InvalidParameter(format!("grid size {grid} is below 2")));
        }
        let h = 1.0 / grid as f64;
        let mid = |j: usize| (j as f64 + 0.5) * h;
        match &self.kind {
            SystemKind::Trig | SystemKind::LacunaryTrig { .. } => {
                let freqs: Vec<u64> = match &self.kind {
                    SystemKind::LacunaryTrig { frequencies, .. } => frequencies.clone(),
                    _ => (1..=(self.n / 2) as u64).collect(),
                };
                let lacunary = matches!(self.kind, SystemKind::LacunaryTrig { .. });
                let mut values = Vec::with_capacity(grid);
                for j in 0..grid {
                    let t = -PI + TAU * mid(j);
                    values.push(if lacunary { dot_lacunary(&freqs, theta, t) } else { dot_trig(theta, t) });
                }
                let mut slope = 0.0;
                for (k, &m) in freqs.iter().enumerate() {
                    slope += m as f64 * libm::hypot(theta[2 * k], theta[2 * k + 1]);
                }
                let lipschitz = TAU * SQRT_2 * slope;
                let roots = 2.0 * *freqs.last().unwrap_or(&1) as f64;
                Ok(GridProjection {
                    values,
                    kantorovich_error: Some(lipschitz * h / 4.0),
                    kolmogorov_error: Some((roots * h).min(1.0)),
                })
            }
            SystemKind::Cosine | SystemKind::Chebyshev => {
                let mut values = Vec::with_capacity(grid);
                for j in 0..grid {
                    values.push(dot_cosine(theta, PI * mid(j)));
                }
                let slope: f64 = theta.iter().enumerate().map(|(k, c)| (k + 1) as f64 * libm::fabs(*c)).sum();
                Ok(GridProjection {
                    values,
                    kantorovich_error: Some(PI * SQRT_2 * slope * h / 4.0),
                    kolmogorov_error: Some((self.n as f64 * h).min(1.0)),
                })
            }
            SystemKind::ShiftedPeriodic(psi) => {
                let side = (libm::ceil(libm::sqrt(grid as f64)) as usize).max(2);
                let hs = 1.0 / side as f64;
                let mut values = Vec::with_capacity(side * side);
                for i in 0..side {
                    let t = (i as f64 + 0.5) * hs;
                    for l in 0..side {
                        let s = (l as f64 + 0.5) * hs;
                        let mut acc = 0.0;
                        for (k, c) in theta.iter().enumerate() {
                            acc += c * psi.eval((k + 1) as f64 * t + s);
                        }
                        values.push(acc);
                    }
                }
                let kantorovich_error = psi.lipschitz().map(|lip| {
                    let weighted: f64 = theta.iter().enumerate().map(|(k, c)| (k + 1) as f64 * libm::fabs(*c)).sum();
                    let plain: f64 = theta.iter().map(|c| libm::fabs(*c)).sum();
                    lip * (weighted + plain) * hs / 4.0
                });
                Ok(GridProjection { values, kantorovich_error, kolmogorov_error: None })
            }
            SystemKind::Walsh { .. } | SystemKind::Empirical => Err(Error::Unsupported(format!(
                "{} has a finite sample space; use its atoms instead of a grid",
                self.name()
            ))),
        }
    }
}

fn fixed_norm_flags(sup: f64) -> Flags {
    Flags { isotropic: true, fixed_norm: true, mean_zero: true, sup_norm_bound: sup, norm_bound: 1.0 }
}

fn bounded_flags(sup: f64, norm_bound: f64) -> Flags {
    Flags { isotropic: true, fixed_norm: false, mean_zero: true, sup_norm_bound: sup, norm_bound }
}

/// Frequencies m₁, ⌈q·m₁⌉, ⌈q·m₂⌉, … (count terms); every ratio is ≥ q.
pub fn geometric_frequencies(m1: u64, q: f64, count: usize) -> Result<Vec<u64>> {
    if m1 == 0 || !(q > 1.0) {
        return Err(Error::InvalidParameter(format!("need m1 >= 1 and q > 1, got m1={m1}, q={q}")));
    }
    let mut out = Vec::with_capacity(count);
    let mut m = m1;
    for _ in 0..count {
        out.push(m);
        let next = libm::ceil(q * m as f64);
        if next >= u64::MAX as f64 / 4.0 {
            return Err(Error::InvalidParameter("frequencies overflow".into()));
        }
        m = (next as u64).max(m + 1);
    }
    Ok(out)
}

fn fill_trig(t: f64, out: &mut [f64]) {
    let (s1, c1) = (libm::sin(t), libm::cos(t));
    let (mut c, mut s) = (c1, s1);
    for pair in out.chunks_exact_mut(2) {
        pair[0] = SQRT_2 * c;
        pair[1] = SQRT_2 * s;
        let next_c = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = next_c;
    }
}

fn fill_lacunary(freqs: &[u64], t: f64, out: &mut [f64]) {
    for (pair, &m) in out.chunks_exact_mut(2).zip(freqs) {
        let a = m as f64 * t;
        pair[0] = SQRT_2 * libm::cos(a);
        pair[1] = SQRT_2 * libm::sin(a);
    }
}

fn fill_cosine(t: f64, out: &mut [f64]) {
    let (s1, c1) = (libm::sin(t), libm::cos(t));
    let (mut c, mut s) = (c1, s1);
    for o in out.iter_mut() {
        *o = SQRT_2 * c;
        let next_c = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = next_c;
    }
}

fn fill_walsh(d: u32, bits: u32, out: &mut [f64]) {
    let _ = d;
    for (i, o) in out.iter_mut().enumerate() {
        let tau = (i + 1) as u32;
        *o = if (tau & bits).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    }
}

fn dot_trig(theta: &[f64], t: f64) -> f64 {
    let (s1, c1) = (libm::sin(t), libm::cos(t));
    let (mut c, mut s) = (c1, s1);
    let mut acc = 0.0;
    for pair in theta.chunks_exact(2) {
        acc += pair[0] * c + pair[1] * s;
        let next_c = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = next_c;
    }
    SQRT_2 * acc
}

fn dot_lacunary(freqs: &[u64], theta: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (pair, &m) in theta.chunks_exact(2).zip(freqs) {
        let a = m as f64 * t;
        acc += pair[0] * libm::cos(a) + pair[1] * libm::sin(a);
    }
    SQRT_2 * acc
}

fn dot_cosine(theta: &[f64], t: f64) -> f64 {
    let (s1, c1) = (libm::sin(t), libm::cos(t));
    let (mut c, mut s) = (c1, s1);
    let mut acc = 0.0;
    for th in theta {
        acc += th * c;
        let next_c = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = next_c;
    }
    SQRT_2 * acc
}
