//! Moment functionals of a system: E⟨X,Y⟩^p, m_p, σ_{2p}, moments of
//! ξ = ⟨X,Y⟩/n, closeness probabilities, and the lacunary triple counts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::{chunks, path, substream, Executor};
use crate::systems::{System, SystemKind};

/// How an expectation over (X, Y) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Enumerate all pairs of atoms (finite Ω only).
    Exact,
    /// Average over `samples` independent pairs drawn from `seed`.
    MonteCarlo { samples: usize, seed: u64 },
}

/// A value with its standard error (zero for exact evaluations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }
}

/// Summary of one pair (X, Y) or of a group of identical atom pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub weight: f64,
    pub inner: f64,
    pub norm_x_sq: f64,
    pub norm_y_sq: f64,
    pub dist_sq: f64,
}

/// The joint law of (⟨X,Y⟩, |X|², |Y|², |X−Y|²), exact or sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLaw {
    n: usize,
    records: Vec<PairRecord>,
    budget: Budget,
}

impl PairLaw {
    pub fn build<E: Executor>(system: &System, budget: Budget, exec: &E) -> Result<Self> {
        let n = system.n();
        let records = match budget {
            Budget::Exact => exact_pairs(system)?,
            Budget::MonteCarlo { samples, seed } => {
                if samples < 1 {
                    return Err(Error::InvalidParameter("Monte Carlo budget needs at least one sample".into()));
                }
                let parts = chunks(samples);
                let weight = 1.0 / samples as f64;
                let blocks = exec.map(parts.len(), |c| {
                    let (_, len) = parts[c];
                    let mut rng = substream(seed, path::PAIRS, c as u64);
                    let mut x = vec![0.0; n];
                    let mut y = vec![0.0; n];
                    let mut out = Vec::with_capacity(len);
                    for _ in 0..len {
                        system.sample_into(&mut rng, &mut x);
                        system.sample_into(&mut rng, &mut y);
                        out.push(pair_record(&x, &y, weight));
                    }
                    out
                });
                blocks.into_iter().flatten().collect()
            }
        };
        Ok(Self { n, records, budget })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn is_exact(&self) -> bool {
        self.budget == Budget::Exact
    }

    /// E f(pair), with the sample standard error in Monte Carlo mode.
    pub fn expect<F: Fn(&PairRecord) -> f64>(&self, f: F) -> Estimate {
        let mut mean = 0.0;
        for r in &self.records {
            mean += r.weight * f(r);
        }
        match self.budget {
            Budget::Exact => Estimate::exact(mean),
            Budget::MonteCarlo { samples, .. } => {
                if samples < 2 {
                    return Estimate::exact(mean);
                }
                let mut ss = 0.0;
                for r in &self.records {
                    let d = f(r) - mean;
                    ss += d * d;
                }
                let var = ss / (samples as f64 - 1.0);
                Estimate { value: mean, stderr: libm::sqrt(var / samples as f64) }
            }
        }
    }

    /// E⟨X,Y⟩^p.
    pub fn inner_moment(&self, p: u32) -> Estimate {
        self.expect(|r| ipow(r.inner, p))
    }

    /// Moments of ξ = ⟨X,Y⟩/n.
    pub fn xi_moments(&self) -> XiMoments {
        let n = self.n as f64;
        let sqrt_available = self.records.iter().all(|r| r.inner <= n * (1.0 + 1e-12));
        XiMoments {
            mean: self.expect(|r| r.inner / n),
            second: self.expect(|r| ipow(r.inner / n, 2)),
            third: self.expect(|r| ipow(r.inner / n, 3)),
            fourth: self.expect(|r| ipow(r.inner / n, 4)),
            sqrt_gap: if sqrt_available { Some(self.expect(|r| record_sqrt_gap(r, n))) } else { None },
        }
    }

    /// P{|X−Y|² ≤ λn}.
    pub fn closeness(&self, lambda: f64) -> Estimate {
        let threshold = lambda * self.n as f64;
        self.expect(|r| if r.dist_sq <= threshold { 1.0 } else { 0.0 })
    }
}

/// 1 − √(1−ε) evaluated as ε/(1+√(1−ε)).
pub fn sqrt_gap(eps: f64) -> f64 {
    eps / (1.0 + libm::sqrt(1.0 - eps))
}

// 1 − √(1−ξ) with 1 − ξ = (|X−Y|² + (n − |X|²) + (n − |Y|²))/(2n). Norm
// deviations at rounding level are dropped, so coincident atoms give 1 − ξ = 0
// rather than a rounding residue that the square root would amplify.
fn record_sqrt_gap(r: &PairRecord, n: f64) -> f64 {
    let snap = |v: f64| if libm::fabs(v) <= 1e-12 * n { 0.0 } else { v };
    let one_minus = ((r.dist_sq + snap(n - r.norm_x_sq) + snap(n - r.norm_y_sq)) / (2.0 * n)).max(0.0);
    (r.inner / n) / (1.0 + libm::sqrt(one_minus))
}

fn ipow(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..p {
        acc *= x;
    }
    acc
}

fn pair_record(x: &[f64], y: &[f64], weight: f64) -> PairRecord {
    let mut inner = 0.0;
    let mut nx = 0.0;
    let mut ny = 0.0;
    let mut dist = 0.0;
    for (a, b) in x.iter().zip(y) {
        inner += a * b;
        nx += a * a;
        ny += b * b;
        dist += (a - b) * (a - b);
    }
    PairRecord { weight, inner, norm_x_sq: nx, norm_y_sq: ny, dist_sq: dist }
}

fn record_key_cmp(a: &PairRecord, b: &PairRecord) -> Ordering {
    a.inner
        .total_cmp(&b.inner)
        .then(a.norm_x_sq.total_cmp(&b.norm_x_sq))
        .then(a.norm_y_sq.total_cmp(&b.norm_y_sq))
        .then(a.dist_sq.total_cmp(&b.dist_sq))
}

// Enumerates every ordered pair of atoms and merges identical summaries.
fn exact_pairs(system: &System) -> Result<Vec<PairRecord>> {
    if let SystemKind::Walsh { d } = system.kind() {
        if *d > 10 {
            return Err(Error::Unsupported(format!("exact pair enumeration is limited to d <= 10, got d = {d}")));
        }
    }
    let atoms = system.atoms()?;
    let values: Vec<Vec<f64>> = atoms.iter().map(|(w, _)| system.eval(w)).collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(atoms.len() * atoms.len());
    for (i, (_, pi)) in atoms.iter().enumerate() {
        for (j, (_, pj)) in atoms.iter().enumerate() {
            records.push(pair_record(&values[i], &values[j], pi * pj));
        }
    }
    records.sort_by(record_key_cmp);
    let mut merged: Vec<PairRecord> = Vec::new();
    for r in records {
        match merged.last_mut() {
            Some(last) if record_key_cmp(last, &r) == Ordering::Equal => last.weight += r.weight,
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// Moments of ξ = ⟨X,Y⟩/n; `sqrt_gap` is E(1 − √(1−ξ)), absent when ξ > 1
/// has positive probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiMoments {
    pub mean: Estimate,
    pub second: Estimate,
    pub third: Estimate,
    pub fourth: Estimate,
    pub sqrt_gap: Option<Estimate>,
}

/// E⟨X,Y⟩^p.
pub fn inner_moment<E: Executor>(system: &System, p: u32, budget: Budget, exec: &E) -> Result<Estimate> {
    if p == 0 {
        return Err(Error::InvalidParameter("moment order p must be at least 1".into()));
    }
    Ok(PairLaw::build(system, budget, exec)?.inner_moment(p))
}

/// Outcome of m_p: a value, or the signed inner moment when it is not
/// positive at this budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MpValue {
    Value(Estimate),
    NotEstimable { signed: Estimate },
}

impl MpValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            MpValue::Value(e) => Some(e.value),
            MpValue::NotEstimable { .. } => None,
        }
    }
}

/// m_p = (1/√n)(E⟨X,Y⟩^p)^{1/p} from a prepared pair law.
pub fn m_p_from(law: &PairLaw, p: u32) -> Result<MpValue> {
    if p == 0 {
        return Err(Error::InvalidParameter("moment order p must be at least 1".into()));
    }
    let e = law.inner_moment(p);
    let scale = 1.0 / libm::sqrt(law.n() as f64);
    if e.value > 0.0 {
        let root = libm::pow(e.value, 1.0 / p as f64);
        let stderr = scale * root / (p as f64 * e.value) * e.stderr;
        return Ok(MpValue::Value(Estimate { value: scale * root, stderr }));
    }
    if e.value == 0.0 {
        return Ok(MpValue::Value(Estimate { value: 0.0, stderr: f64::NAN }));
    }
    if p % 2 == 0 {
        return Err(Error::NumericInconsistency(format!(
            "estimate of E<X,Y>^{p} is negative ({:e} ± {:e})",
            e.value, e.stderr
        )));
    }
    Ok(MpValue::NotEstimable { signed: e })
}

/// m_p for a system at the given budget.
pub fn m_p<E: Executor>(system: &System, p: u32, budget: Budget, exec: &E) -> Result<MpValue> {
    m_p_from(&PairLaw::build(system, budget, exec)?, p)
}

/// σ_{2p} = √n (E|(|X|²/n) − 1|^p)^{1/p} for each p in `ps`, all from the
/// same `samples` draws of X. Fixed-norm systems return exact zeros.
pub fn sigma_2p_family<E: Executor>(
    system: &System,
    ps: &[f64],
    samples: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<Estimate>> {
    for &p in ps {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("sigma_2p needs p >= 1, got {p}")));
        }
    }
    if system.flags().fixed_norm {
        return Ok(ps.iter().map(|_| Estimate::exact(0.0)).collect());
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("sigma_2p needs at least two samples".into()));
    }
    let n = system.n();
    let parts = chunks(samples);
    let blocks = exec.map(parts.len(), |c| {
        let (_, len) = parts[c];
        let mut rng = substream(seed, path::NORMS, c as u64);
        let mut x = vec![0.0; n];
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            system.sample_into(&mut rng, &mut x);
            let nsq: f64 = x.iter().map(|v| v * v).sum();
            out.push(libm::fabs(nsq / n as f64 - 1.0));
        }
        out
    });
    let devs: Vec<f64> = blocks.into_iter().flatten().collect();
    let count = devs.len() as f64;
    let root_n = libm::sqrt(n as f64);
    Ok(ps
        .iter()
        .map(|&p| {
            let mut mean = 0.0;
            for d in &devs {
                mean += libm::pow(*d, p);
            }
            mean /= count;
            let mut ss = 0.0;
            for d in &devs {
                let v = libm::pow(*d, p) - mean;
                ss += v * v;
            }
            let se_mean = libm::sqrt(ss / (count - 1.0) / count);
            if mean <= 0.0 {
                return Estimate::exact(0.0);
            }
            let value = root_n * libm::pow(mean, 1.0 / p);
            Estimate { value, stderr: value / (p * mean) * se_mean }
        })
        .collect())
}

/// σ_{2p} for a single p.
pub fn sigma_2p<E: Executor>(system: &System, p: f64, samples: usize, seed: u64, exec: &E) -> Result<Estimate> {
    Ok(sigma_2p_family(system, &[p], samples, seed, exec)?[0])
}

/// Moments of ξ for a system.
pub fn xi_functionals<E: Executor>(system: &System, budget: Budget, exec: &E) -> Result<XiMoments> {
    Ok(PairLaw::build(system, budget, exec)?.xi_moments())
}

/// P{|X−Y|² ≤ λn}.
pub fn closeness_probability<E: Executor>(system: &System, lambda: f64, budget: Budget, exec: &E) -> Result<Estimate> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    Ok(PairLaw::build(system, budget, exec)?.closeness(lambda))
}

/// The functionals a system's statements are phrased in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub m2: MpValue,
    pub m3: MpValue,
    pub m4: MpValue,
    pub sigma2: Estimate,
    pub sigma4: Estimate,
    pub xi: XiMoments,
    pub budget: Budget,
}

/// Builds a [`MomentReport`]; σ-functionals use `norm_samples` draws of X
/// (ignored for fixed-norm systems) from the budget's seed, or seed 0.
pub fn moment_report<E: Executor>(
    system: &System,
    budget: Budget,
    norm_samples: usize,
    exec: &E,
) -> Result<MomentReport> {
    let law = PairLaw::build(system, budget, exec)?;
    let seed = match budget {
        Budget::MonteCarlo { seed, .. } => seed,
        Budget::Exact => 0,
    };
    let sig = sigma_2p_family(system, &[1.0, 2.0], norm_samples.max(2), seed, exec)?;
    Ok(MomentReport {
        n: system.n(),
        m2: m_p_from(&law, 2)?,
        m3: m_p_from(&law, 3)?,
        m4: m_p_from(&law, 4)?,
        sigma2: sig[0],
        sigma4: sig[1],
        xi: law.xi_moments(),
        budget,
    })
}

/// Index convention for the triple count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleConvention {
    /// i₁ ≤ i₂ < i₃.
    AllowEqual,
    /// i₁ < i₂ < i₃.
    Strict,
}

fn check_frequencies(freqs: &[u64]) -> Result<()> {
    if freqs.first() == Some(&0) {
        return Err(Error::InvalidParameter("frequencies must be positive".into()));
    }
    for w in freqs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter("frequencies must be strictly increasing".into()));
        }
    }
    Ok(())
}

/// Number of index triples with m_{i₁} + m_{i₂} = m_{i₃} under the given
/// convention, by binary search over the later indices.
pub fn triple_count(freqs: &[u64], convention: TripleConvention) -> Result<u64> {
    check_frequencies(freqs)?;
    let mut count = 0u64;
    for i1 in 0..freqs.len() {
        let start = match convention {
            TripleConvention::AllowEqual => i1,
            TripleConvention::Strict => i1 + 1,
        };
        for i2 in start..freqs.len() {
            let target = freqs[i1] + freqs[i2];
            if freqs[i2 + 1..].binary_search(&target).is_ok() {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// T₃: triples i₁ ≤ i₂ < i₃ with m_{i₁} + m_{i₂} = m_{i₃}.
pub fn sigma3_lacunary_count(freqs: &[u64]) -> Result<u64> {
    triple_count(freqs, TripleConvention::AllowEqual)
}

/// Σ₃ = E⟨X,Y⟩³ = Σ_{a,b,c} (E X_a X_b X_c)² for the lacunary trigonometric
/// system with these frequencies, evaluated exactly by expanding each factor
/// into exponentials e^{±i m t}.
pub fn sigma3_lacunary_exact(freqs: &[u64]) -> Result<f64> {
    check_frequencies(freqs)?;
    let n = 2 * freqs.len();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let e = triple_product_mean(freqs, [a, b, c]);
                total += e * e;
            }
        }
    }
    Ok(total)
}

// E X_a X_b X_c where X_{2k} = √2 cos(m_k t), X_{2k+1} = √2 sin(m_k t).
fn triple_product_mean(freqs: &[u64], idx: [usize; 3]) -> f64 {
    let m = [freqs[idx[0] / 2] as i64, freqs[idx[1] / 2] as i64, freqs[idx[2] / 2] as i64];
    let is_sin = [idx[0] % 2 == 1, idx[1] % 2 == 1, idx[2] % 2 == 1];
    let sines = is_sin.iter().filter(|s| **s).count();
    if sines % 2 == 1 {
        return 0.0;
    }
    // cos = ½Σ_ε e^{iεmt}, sin = (1/2i)Σ_ε ε e^{iεmt}; i^{−2} = −1.
    let mut sum = 0.0;
    for signs in 0..8u32 {
        let eps = [
            if signs & 1 == 0 { 1i64 } else { -1 },
            if signs & 2 == 0 { 1i64 } else { -1 },
            if signs & 4 == 0 { 1i64 } else { -1 },
        ];
        if eps[0] * m[0] + eps[1] * m[1] + eps[2] * m[2] != 0 {
            continue;
        }
        let mut coef = 1.0;
        for j in 0..3 {
            if is_sin[j] {
                coef *= eps[j] as f64;
            }
        }
        sum += coef;
    }
    if sines == 2 {
        sum = -sum;
    }
    core::f64::consts::SQRT_2 / 4.0 * sum
}

/// Both sides of E[(ξ−η)²/(ξ+η)^{3/2}] ≤ 12 Var(ξ)/(Eξ)^{3/2} for the
/// empirical measure of nonnegative `samples`, η an independent copy.
pub fn pair_variance_sides(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    if samples.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("samples must be nonnegative".into()));
    }
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    if !(mean > 0.0) {
        return Err(Error::InvalidParameter("samples must have a positive mean".into()));
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / count;
    let mut lhs = 0.0;
    for a in samples {
        for b in samples {
            let s = a + b;
            if s > 0.0 {
                lhs += (a - b) * (a - b) / (s * libm::sqrt(s));
            }
        }
    }
    lhs /= count * count;
    Ok((lhs, 12.0 * var / (mean * libm::sqrt(mean))))
}

/// Both sides of Eξ ≥ (Eξ²)²/Eξ³ for the empirical measure of nonnegative
/// `samples`.
pub fn moment_ratio_sides(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    if samples.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("samples must be nonnegative".into()));
    }
    let count = samples.len() as f64;
    let m1 = samples.iter().sum::<f64>() / count;
    let m2 = samples.iter().map(|s| s * s).sum::<f64>() / count;
    let m3 = samples.iter().map(|s| s * s * s).sum::<f64>() / count;
    let rhs = if m3 > 0.0 { m2 * m2 / m3 } else { 0.0 };
    Ok((m1, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Sequential;
    use crate::systems::System;

    const EXEC: Sequential = Sequential;

    #[test]
    fn empirical_exact_moments() {
        let s = System::empirical(5).unwrap();
        let e2 = inner_moment(&s, 2, Budget::Exact, &EXEC).unwrap();
        assert!((e2.value - 5.0).abs() < 1e-12);
        let xi = xi_functionals(&s, Budget::Exact, &EXEC).unwrap();
        assert!((xi.third.value - 0.2).abs() < 1e-15);
        assert!((xi.sqrt_gap.unwrap().value - 0.2).abs() < 1e-15);
        let p = closeness_probability(&s, 0.3, Budget::Exact, &EXEC).unwrap();
        assert!((p.value - 0.2).abs() < 1e-15);
        assert!(
            matches!(m_p(&s, 2, Budget::Exact, &EXEC).unwrap(), MpValue::Value(e) if (e.value - 1.0).abs() < 1e-12)
        );
    }

    #[test]
    fn walsh_exact_moments() {
        let s = System::walsh(3).unwrap();
        let law = PairLaw::build(&s, Budget::Exact, &EXEC).unwrap();
        assert_eq!(law.records().len(), 2);
        assert!((law.inner_moment(3).value - 42.0).abs() < 1e-10);
        assert!((law.inner_moment(4).value - 301.0).abs() < 1e-10);
        let m3 = m_p_from(&law, 3).unwrap().value().unwrap();
        assert!((m3 - libm::cbrt(42.0) / libm::sqrt(7.0)).abs() < 1e-12);
        assert!((m3 - 1.3138).abs() < 1e-4);
        let xi = law.xi_moments();
        assert!(xi.mean.value.abs() < 1e-15);
        assert!((law.closeness(0.25).value - 0.125).abs() < 1e-15);
        let expected_gap = 0.125 + 0.875 * (1.0 - libm::sqrt(8.0 / 7.0));
        assert!((xi.sqrt_gap.unwrap().value - expected_gap).abs() < 1e-14);
    }

    #[test]
    fn walsh_brute_force_over_signs() {
        // Independent oracle: loop over sign vectors directly.
        for d in 2..=5u32 {
            let count = 1u32 << d;
            let n = count - 1;
            let (mut e3, mut e4) = (0.0, 0.0);
            for sx in 0..count {
                for sy in 0..count {
                    let mut ip = 0i64;
                    for tau in 1..=n {
                        let px = if (tau & sx).count_ones() % 2 == 0 { 1 } else { -1 };
                        let py = if (tau & sy).count_ones() % 2 == 0 { 1 } else { -1 };
                        ip += px * py;
                    }
                    let ip = ip as f64;
                    e3 += ip * ip * ip;
                    e4 += ip * ip * ip * ip;
                }
            }
            let w = 1.0 / (count as f64 * count as f64);
            let law = PairLaw::build(&System::walsh(d).unwrap(), Budget::Exact, &EXEC).unwrap();
            assert!((law.inner_moment(3).value - e3 * w).abs() < 1e-9);
            assert!((law.inner_moment(4).value - e4 * w).abs() < 1e-9);
        }
    }

    #[test]
    fn trig_moments() {
        let s = System::trig(8).unwrap();
        let xi = xi_functionals(&s, Budget::MonteCarlo { samples: 50_000, seed: 3 }, &EXEC).unwrap();
        assert!((xi.second.value - 0.125).abs() < 4.0 * xi.second.stderr);
        // Trig is the lacunary system with frequencies 1..n/2; it is not
        // symmetric, and its third moment is the exact Σ₃.
        let e3 = inner_moment(&s, 3, Budget::MonteCarlo { samples: 50_000, seed: 4 }, &EXEC).unwrap();
        let exact = sigma3_lacunary_exact(&[1, 2, 3, 4]).unwrap();
        assert!(exact > 1.0);
        assert!((e3.value - exact).abs() < 4.0 * e3.stderr, "{e3:?} vs {exact}");
        // Odd frequencies give X(t+π) = −X(t): a symmetric law, so m₃ = 0.
        let odd = System::lacunary(vec![1, 3, 9, 27], 3.0).unwrap();
        assert_eq!(sigma3_lacunary_exact(&[1, 3, 9, 27]).unwrap(), 0.0);
        let e3 = inner_moment(&odd, 3, Budget::MonteCarlo { samples: 50_000, seed: 4 }, &EXEC).unwrap();
        assert!(e3.value.abs() < 4.0 * e3.stderr);
        assert!(inner_moment(&s, 2, Budget::Exact, &EXEC).is_err());
        assert_eq!(sigma_2p(&s, 2.0, 10, 1, &EXEC).unwrap(), Estimate::exact(0.0));
    }

    #[test]
    fn sigma4_of_cosine_systems() {
        for s in [System::cosine(16).unwrap(), System::chebyshev(16).unwrap()] {
            let e = sigma_2p(&s, 2.0, 100_000, 17, &EXEC).unwrap();
            assert!((e.value - libm::sqrt(0.5)).abs() < 3.0 * e.stderr, "{}: {:?}", s.name(), e);
        }
    }

    #[test]
    fn sigma_family_is_monotone() {
        let s = System::cosine(9).unwrap();
        let ps = [1.0, 1.5, 2.0, 3.0, 4.0];
        let v = sigma_2p_family(&s, &ps, 5000, 2, &EXEC).unwrap();
        for w in v.windows(2) {
            assert!(w[1].value >= w[0].value);
        }
    }

    #[test]
    fn triple_counts() {
        // 1+1=2 and 1+2=3.
        assert_eq!(sigma3_lacunary_count(&[1, 2, 3]).unwrap(), 2);
        assert_eq!(triple_count(&[1, 2, 3], TripleConvention::Strict).unwrap(), 1);
        let fib = [1, 2, 3, 5, 8, 13, 21, 34];
        assert_eq!(triple_count(&fib, TripleConvention::Strict).unwrap(), 6);
        // 1 + 1 = 2 also counts when i₁ = i₂ is allowed.
        assert_eq!(sigma3_lacunary_count(&fib).unwrap(), 7);
        let pow3: Vec<u64> = (0..15).map(|k| 3u64.pow(k)).collect();
        assert_eq!(sigma3_lacunary_count(&pow3).unwrap(), 0);
        let pow2: Vec<u64> = (1..=20).map(|k| 1u64 << k).collect();
        assert_eq!(triple_count(&pow2, TripleConvention::Strict).unwrap(), 0);
        assert_eq!(sigma3_lacunary_count(&pow2).unwrap(), 19);
        assert!(sigma3_lacunary_count(&[3, 2]).is_err());
    }

    // Oracle: E X_a X_b X_c by the trapezoid rule on a periodic grid, exact for
    // trigonometric polynomials of degree below the grid size.
    fn sigma3_by_grid(freqs: &[u64]) -> f64 {
        let n = 2 * freqs.len();
        let grid = 4 * (*freqs.last().unwrap() as usize) + 8;
        let s = System::lacunary(freqs.to_vec(), 1.0 + 1e-9).unwrap();
        let xs: Vec<Vec<f64>> = (0..grid)
            .map(|j| {
                let t = -core::f64::consts::PI + 2.0 * core::f64::consts::PI * j as f64 / grid as f64;
                s.eval(&crate::systems::Omega::Point(t)).unwrap()
            })
            .collect();
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let e: f64 = xs.iter().map(|x| x[a] * x[b] * x[c]).sum::<f64>() / grid as f64;
                    total += e * e;
                }
            }
        }
        total
    }

    #[test]
    fn sigma3_matches_grid_oracle() {
        for freqs in [vec![1u64, 2, 3, 5], vec![1, 2, 4, 8, 16], vec![1, 3, 9, 27], vec![2, 5, 7]] {
            let exact = sigma3_lacunary_exact(&freqs).unwrap();
            let oracle = sigma3_by_grid(&freqs);
            assert!((exact - oracle).abs() < 1e-10, "{freqs:?}: {exact} vs {oracle}");
        }
        assert_eq!(sigma3_lacunary_exact(&[1, 3, 9, 27, 81]).unwrap(), 0.0);
    }

    #[test]
    fn sigma3_matches_monte_carlo() {
        let freqs = vec![1u64, 2, 3];
        let s = System::lacunary(freqs.clone(), 1.5).unwrap();
        let e3 = inner_moment(&s, 3, Budget::MonteCarlo { samples: 200_000, seed: 8 }, &EXEC).unwrap();
        let exact = sigma3_lacunary_exact(&freqs).unwrap();
        assert!((e3.value - exact).abs() < 4.0 * e3.stderr, "{e3:?} vs {exact}");
    }

    #[test]
    fn ratio_and_variance_sides() {
        let (l, r) = moment_ratio_sides(&[0.0, 1.0, 2.0, 0.5]).unwrap();
        assert!(l >= r);
        let (l, r) = pair_variance_sides(&[0.1, 0.2, 0.3]).unwrap();
        assert!(l <= r);
        assert!(pair_variance_sides(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn monte_carlo_is_chunk_deterministic() {
        let s = System::cosine(6).unwrap();
        let b = Budget::MonteCarlo { samples: 9000, seed: 5 };
        let a = PairLaw::build(&s, b, &EXEC).unwrap();
        let c = PairLaw::build(&s, b, &EXEC).unwrap();
        assert_eq!(a, c);
    }
}
