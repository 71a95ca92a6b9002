//! Runs experiments: sphere-averaged distances over a list of dimensions,
//! with predictions, bounds and audits attached. Also the table presets.

use std::collections::{BTreeMap, BTreeSet};

use randclt_core::distance::{
    average_from_samples, sphere_samples, target_law, InnerBudget, Metric, MixtureBudget, Target, ThetaDistances,
};
use randclt_core::expansions::{
    chain_audit, cor51_from, kantorovich_rho_audit, lemma23_bound, omega_rho_audit, prop42_from, remark53_prediction,
    rho_lower_functional, smoothing_functional, thm11_prediction, thm12_from, AuditOutcome, BoundEvaluation,
    ExpansionPrediction, PredictionKind, THM12_C1, THM12_C2,
};
use randclt_core::moments::{
    m_p_from, moment_ratio_sides, sigma3_lacunary_exact, sigma_2p_family, triple_count, Budget, Estimate, MomentReport,
    PairLaw, TripleConvention,
};
use randclt_core::rng::Executor;
use randclt_core::systems::{geometric_frequencies, System, SystemKind};

use crate::config::{ExperimentConfig, MetricName, TargetName};
use crate::descriptor::SystemDescriptor;
use crate::error::{config, Result};
use crate::report::{AuditRow, BoundRow, DistanceRow, ExperimentReport, PredictionRow};

/// Largest max/min ratio of an implied constant across n that counts as
/// stable.
pub const BAND_LIMIT: f64 = 3.0;
/// Absolute slack for the per-θ check ω² ≤ ρW.
pub const CHAIN_TOL: f64 = 1e-10;

/// Label used in the `system` column.
pub fn system_label(system: &System) -> String {
    match system.kind() {
        SystemKind::ShiftedPeriodic(psi) => format!("shifted_periodic[{}]", psi.name()),
        SystemKind::Walsh { d } => format!("walsh[d={d}]"),
        SystemKind::LacunaryTrig { q, .. } => format!("lacunary_trig[q={q}]"),
        _ => system.name().to_string(),
    }
}

/// Exact enumeration where Ω is small enough, Monte Carlo otherwise.
pub fn pair_budget(system: &System, samples: usize, seed: u64) -> Budget {
    let small = match system.kind() {
        SystemKind::Walsh { d } => *d <= 10,
        _ => system.is_finite(),
    };
    if small {
        Budget::Exact
    } else {
        Budget::MonteCarlo { samples, seed }
    }
}

/// Moment functionals of one system, computed once and shared.
pub struct MomentContext {
    pub law: PairLaw,
    pub sigma2: Estimate,
    pub sigma4: Estimate,
}

impl MomentContext {
    pub fn build<E: Executor>(system: &System, pair_samples: usize, seed: u64, exec: &E) -> Result<Self> {
        let law = PairLaw::build(system, pair_budget(system, pair_samples, seed), exec)?;
        let s = sigma_2p_family(system, &[1.0, 2.0], pair_samples.max(2), seed, exec)?;
        Ok(Self { law, sigma2: s[0], sigma4: s[1] })
    }

    pub fn report(&self) -> Result<MomentReport> {
        Ok(MomentReport {
            n: self.law.n(),
            m2: m_p_from(&self.law, 2)?,
            m3: m_p_from(&self.law, 3)?,
            m4: m_p_from(&self.law, 4)?,
            sigma2: self.sigma2,
            sigma4: self.sigma4,
            xi: self.law.xi_moments(),
            budget: self.law.budget(),
        })
    }
}

/// The prediction of the given kind; `Ok(None)` marks a kind whose
/// hypotheses exclude the system.
pub fn prediction(system: &System, ctx: &MomentContext, kind: PredictionKind) -> Result<Option<ExpansionPrediction>> {
    Ok(match kind {
        PredictionKind::Prop42 => Some(prop42_from(&ctx.law, ctx.sigma4.value)),
        PredictionKind::Cor51 => {
            if system.flags().fixed_norm {
                Some(cor51_from(system.n(), &ctx.law.xi_moments())?)
            } else {
                None
            }
        }
        PredictionKind::Thm11 => Some(thm11_prediction(system, &ctx.report()?)),
        PredictionKind::Remark53 => Some(remark53_prediction(system, &ctx.report()?)),
    })
}

/// Target against which a prediction is stated.
pub fn prediction_target(kind: PredictionKind) -> TargetName {
    match kind {
        PredictionKind::Thm11 => TargetName::Normal,
        _ => TargetName::Typical,
    }
}

/// The named bound for a system.
pub fn bound(
    system: &System,
    ctx: Option<&MomentContext>,
    name: &str,
    mixture: MixtureBudget,
) -> Result<BoundEvaluation> {
    let n = system.n();
    Ok(match name {
        "thm12" => {
            let Some(ctx) = ctx else { return config("thm12 needs moment functionals") };
            thm12_from(&ctx.law, ctx.sigma4.value, THM12_C1, THM12_C2)
        }
        "eq211" => {
            let law = target_law(system, Target::Typical, mixture)?;
            rho_lower_functional(|t| law.cf(t), 1.0)?
        }
        "eq81" => {
            let law = target_law(system, Target::Typical, mixture)?;
            let reach = law.support().map(|s| s.1).unwrap_or(1.0);
            smoothing_functional(|t| law.cf(t), |t| Ok((-0.5 * t * t).exp()), 4.0 * n as f64, reach)?
        }
        "lemma23" => lemma23_bound(n, 3.0, 300)?,
        other => return config(format!("unknown bound {other:?}")),
    })
}

fn bound_row(b: &BoundEvaluation, n: usize, seed: u64) -> BoundRow {
    BoundRow {
        kind: b.kind.name().to_string(),
        n,
        value: b.value,
        stderr: b.stderr,
        params: b.params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        seed,
    }
}

fn audit_row(name: &str, n: Option<usize>, target: Option<TargetName>, o: AuditOutcome, detail: String) -> AuditRow {
    AuditRow {
        name: name.to_string(),
        n,
        target: target.map(|t| Target::from(t).name().to_string()),
        lhs: o.lhs,
        rhs: Some(o.rhs),
        satisfied: Some(o.satisfied),
        detail,
    }
}

fn mean_of(samples: &[ThetaDistances], metric: Metric) -> f64 {
    samples.iter().map(|s| s.metric(metric)).sum::<f64>() / samples.len() as f64
}

// Implied constants of audits whose constants are unnamed, collected across n.
#[derive(Default)]
struct Bands {
    values: BTreeMap<&'static str, Vec<(usize, f64)>>,
}

impl Bands {
    fn push(&mut self, name: &'static str, n: usize, c: f64) {
        self.values.entry(name).or_default().push((n, c));
    }
}

fn needed_targets(cfg: &ExperimentConfig) -> BTreeSet<TargetName> {
    let mut t: BTreeSet<TargetName> = cfg.targets.iter().copied().collect();
    for a in &cfg.audits {
        match a.as_str() {
            "prop_3_1" | "prop_11_1" | "prop_11_2" => {
                t.insert(TargetName::Typical);
            }
            "prop_9_1" | "two_sided_13_1" => {
                t.insert(TargetName::Normal);
            }
            _ => {}
        }
    }
    if t.is_empty() {
        t.insert(TargetName::Normal);
    }
    t
}

/// Runs an experiment. The output depends only on the configuration.
pub fn run<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new(cfg.seed);
    let inner = InnerBudget { grid: cfg.inner_budget, max_error: cfg.max_inner_error };
    let mixture = MixtureBudget { samples: cfg.mixture_samples, seed: cfg.seed };
    let mut bands = Bands::default();
    let needs_moments = !cfg.predictions.is_empty()
        || cfg.bounds.iter().any(|b| b == "thm12")
        || cfg.audits.iter().any(|a| a == "prop_3_1" || a == "prop_9_1");
    for n in cfg.dimensions()? {
        let system = if cfg.n_list.is_empty() { cfg.system.build()? } else { cfg.system.build_with_n(n)? };
        let n = system.n();
        let label = system_label(&system);
        let mut samples: BTreeMap<TargetName, Vec<ThetaDistances>> = BTreeMap::new();
        for t in needed_targets(cfg) {
            let law = target_law(&system, t.into(), mixture)?;
            samples.insert(t, sphere_samples(&system, &law, cfg.n_theta, &inner, cfg.seed, exec)?);
        }
        for &t in &cfg.targets {
            for &m in &cfg.metrics {
                let avg = average_from_samples(&samples[&t], m.into(), t.into(), &inner, cfg.seed)?;
                report.rows.push(DistanceRow {
                    system: label.clone(),
                    kind: system.name().to_string(),
                    n,
                    metric: Metric::from(m).name().to_string(),
                    target: Target::from(t).name().to_string(),
                    mean: avg.mean,
                    stderr: avg.stderr,
                    n_theta: avg.n_theta,
                    inner_budget: cfg.inner_budget,
                    seed: cfg.seed,
                });
            }
        }
        let ctx =
            if needs_moments { Some(MomentContext::build(&system, cfg.pair_samples, cfg.seed, exec)?) } else { None };
        for name in &cfg.predictions {
            let kind = PredictionKind::from_name(name).expect("validated");
            let ctx = ctx.as_ref().expect("moments are built when predictions are requested");
            let target = prediction_target(kind);
            let measured = samples.get(&target).map(|s| {
                let (mean, se) = randclt_core::distance::summarize(s, Metric::OmegaSq);
                (mean, se)
            });
            report.predictions.push(prediction_row(
                kind,
                n,
                target,
                prediction(&system, ctx, kind)?,
                measured,
                cfg.seed,
            ));
        }
        for name in &cfg.bounds {
            let b = bound(&system, ctx.as_ref(), name, mixture)?;
            report.bounds.push(bound_row(&b, n, cfg.seed));
        }
        let b = system.flags().norm_bound;
        for name in &cfg.audits {
            match name.as_str() {
                "prop_11_1" => {
                    let o = omega_rho_audit(&samples[&TargetName::Typical], n, b)?;
                    report.audits.push(audit_row(
                        name,
                        Some(n),
                        Some(TargetName::Typical),
                        o,
                        format!("b = {b}, alpha = 2"),
                    ));
                }
                "prop_11_2" => {
                    let o = kantorovich_rho_audit(&samples[&TargetName::Typical], n, b)?;
                    report.audits.push(audit_row(name, Some(n), Some(TargetName::Typical), o, format!("b = {b}")));
                }
                "lemma_12_3" => {
                    for (t, s) in &samples {
                        let w: Vec<f64> = s.iter().map(|d| d.omega_sq).collect();
                        let (mean, ratio) = moment_ratio_sides(&w)?;
                        let o = AuditOutcome { lhs: ratio, rhs: mean, satisfied: ratio <= mean * (1.0 + 1e-12) };
                        report.audits.push(audit_row(name, Some(n), Some(*t), o, "samples: per-theta omega_sq".into()));
                    }
                }
                "chain" => {
                    for (t, s) in &samples {
                        let o = chain_audit(s, CHAIN_TOL);
                        report.audits.push(audit_row(
                            name,
                            Some(n),
                            Some(*t),
                            o,
                            "lhs: max over theta of omega_sq - rho*W".into(),
                        ));
                    }
                }
                "prop_3_1" => {
                    let ctx = ctx.as_ref().expect("moments are built for prop_3_1");
                    let a_sq = ctx.law.inner_moment(1).value;
                    let m2_sq = ctx.law.inner_moment(2).value / n as f64;
                    let a = 1.0 + a_sq + m2_sq + ctx.sigma4.value * ctx.sigma4.value;
                    let c = n as f64 * mean_of(&samples[&TargetName::Typical], Metric::OmegaSq) / a;
                    bands.push("prop_3_1", n, c);
                    report.audits.push(implied_row(name, n, TargetName::Typical, c, format!("A = {a}")));
                }
                "prop_9_1" => {
                    let ctx = ctx.as_ref().expect("moments are built for prop_9_1");
                    let nf = n as f64;
                    let scale = (1.0 + ctx.sigma2.value * ctx.sigma2.value) * nf.ln().powi(2) / nf;
                    let c = mean_of(&samples[&TargetName::Normal], Metric::RhoSq) / scale;
                    bands.push("prop_9_1", n, c);
                    report.audits.push(implied_row(
                        name,
                        n,
                        TargetName::Normal,
                        c,
                        format!("sigma2 = {}", ctx.sigma2.value),
                    ));
                }
                "two_sided_13_1" => {
                    let c = n as f64 * mean_of(&samples[&TargetName::Normal], Metric::OmegaSq);
                    bands.push("two_sided_13_1", n, c);
                    report.audits.push(implied_row(name, n, TargetName::Normal, c, "n * E omega_sq".into()));
                }
                other => return config(format!("unknown audit {other:?}")),
            }
        }
    }
    for (name, values) in bands.values {
        let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let band = hi / lo;
        let satisfied = if values.len() >= 2 { Some(lo > 0.0 && band <= BAND_LIMIT) } else { None };
        report.audits.push(AuditRow {
            name: name.to_string(),
            n: None,
            target: None,
            lhs: band,
            rhs: Some(BAND_LIMIT),
            satisfied,
            detail: format!("max/min of the implied constant over n: min {lo}, max {hi}"),
        });
    }
    Ok(report)
}

fn implied_row(name: &str, n: usize, target: TargetName, c: f64, detail: String) -> AuditRow {
    AuditRow {
        name: name.to_string(),
        n: Some(n),
        target: Some(Target::from(target).name().to_string()),
        lhs: c,
        rhs: None,
        satisfied: None,
        detail: format!("implied constant; {detail}"),
    }
}

/// A prediction row, compared with a measurement when one is supplied.
pub fn prediction_row(
    kind: PredictionKind,
    n: usize,
    target: TargetName,
    p: Option<ExpansionPrediction>,
    measured: Option<(f64, f64)>,
    seed: u64,
) -> PredictionRow {
    let target_name = Target::from(target).name().to_string();
    match p {
        None => PredictionRow {
            kind: kind.name().to_string(),
            n,
            target: target_name,
            applicable: false,
            main: None,
            main_stderr: None,
            error_scale: None,
            slack: None,
            measured: measured.map(|m| m.0),
            measured_stderr: measured.map(|m| m.1),
            agrees: None,
            required_slack: None,
            note: Some("hypotheses not met by this system".into()),
            seed,
        },
        Some(p) => PredictionRow {
            kind: kind.name().to_string(),
            n,
            target: target_name,
            applicable: p.applicable,
            main: Some(p.main_value),
            main_stderr: Some(p.main_stderr),
            error_scale: Some(p.error_scale),
            slack: Some(p.slack),
            measured: measured.map(|m| m.0),
            measured_stderr: measured.map(|m| m.1),
            agrees: measured.map(|(m, s)| p.agrees_with(m, s)),
            required_slack: measured.map(|(m, s)| p.required_slack(m, s)),
            note: p.note.clone(),
            seed,
        },
    }
}

/// Table presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    TwoSided,
    Lacunary,
    Walsh,
}

impl Preset {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "two_sided" => Some(Preset::TwoSided),
            "lacunary" => Some(Preset::Lacunary),
            "walsh" => Some(Preset::Walsh),
            _ => None,
        }
    }
}

/// The experiment behind a distance preset (`two_sided` or `walsh`).
pub fn preset_config(preset: Preset, seed: u64, n_theta: Option<usize>) -> Result<ExperimentConfig> {
    let mut c = match preset {
        Preset::TwoSided => {
            let mut c = ExperimentConfig::new(SystemDescriptor::new("trig", None), vec![8, 16, 32, 64], seed);
            c.audits = vec!["two_sided_13_1".into(), "chain".into(), "lemma_12_3".into()];
            c
        }
        Preset::Walsh => {
            let mut c = ExperimentConfig::new(SystemDescriptor::new("walsh", None), vec![3, 7, 15, 31], seed);
            c.metrics = vec![MetricName::OmegaSq, MetricName::Rho, MetricName::Kantorovich];
            c.targets = vec![TargetName::Typical, TargetName::Normal];
            c.n_theta = 1000;
            c.predictions = vec!["cor51".into(), "thm11".into(), "prop42".into()];
            c.audits = vec!["prop_11_1".into(), "prop_11_2".into(), "chain".into(), "lemma_12_3".into()];
            c
        }
        Preset::Lacunary => return config("the lacunary preset is a counting table, not a distance experiment"),
    };
    if let Some(t) = n_theta {
        c.n_theta = t;
    }
    Ok(c)
}

/// Frequency sequences for the lacunary table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sequence {
    /// m₁ given, m_{k+1} = ⌈q·m_k⌉.
    Geometric { m1: u64, q: f64 },
    /// 1, 2, 3, 5, 8, …
    Fibonacci,
}

pub fn sequence_frequencies(seq: Sequence, count: usize) -> Result<Vec<u64>> {
    match seq {
        Sequence::Geometric { m1, q } => Ok(geometric_frequencies(m1, q, count)?),
        Sequence::Fibonacci => {
            let mut f: Vec<u64> = Vec::with_capacity(count);
            let (mut a, mut b) = (1u64, 2u64);
            for _ in 0..count {
                f.push(a);
                let c =
                    a.checked_add(b).ok_or_else(|| crate::error::HarnessError::Config("Fibonacci overflow".into()))?;
                a = b;
                b = c;
            }
            Ok(f)
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LacunaryRow {
    pub sequence: String,
    pub count: usize,
    pub n: usize,
    pub last_frequency: u64,
    /// Triples i₁ ≤ i₂ < i₃ with m_{i₁} + m_{i₂} = m_{i₃}.
    pub t3: u64,
    /// Triples i₁ < i₂ < i₃.
    pub t3_strict: u64,
    pub t3_per_count: f64,
    /// E⟨X,Y⟩³, exact.
    pub sigma3: f64,
}

/// Counting table for `count = 1..=n_max` frequencies.
pub fn lacunary_table(seq: Sequence, n_max: usize) -> Result<Vec<LacunaryRow>> {
    let name = match seq {
        Sequence::Geometric { m1, q } => format!("geometric[m1={m1},q={q}]"),
        Sequence::Fibonacci => "fibonacci".to_string(),
    };
    (1..=n_max)
        .map(|count| {
            let f = sequence_frequencies(seq, count)?;
            let t3 = triple_count(&f, TripleConvention::AllowEqual)?;
            Ok(LacunaryRow {
                sequence: name.clone(),
                count,
                n: 2 * count,
                last_frequency: *f.last().unwrap(),
                t3,
                t3_strict: triple_count(&f, TripleConvention::Strict)?,
                t3_per_count: t3 as f64 / count as f64,
                sigma3: sigma3_lacunary_exact(&f)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use randclt_core::rng::Sequential;

    #[test]
    fn small_run_has_all_parts() {
        let mut c = ExperimentConfig::new(SystemDescriptor::new("walsh", None), vec![7, 15], 3);
        c.n_theta = 50;
        c.targets = vec![TargetName::Typical, TargetName::Normal];
        c.metrics = vec![MetricName::OmegaSq, MetricName::Rho];
        c.predictions = vec!["cor51".into(), "thm11".into(), "prop42".into(), "remark53".into()];
        c.bounds = vec!["thm12".into(), "eq211".into(), "eq81".into(), "lemma23".into()];
        c.audits = crate::config::AUDITS.iter().map(|s| s.to_string()).collect();
        let r = run(&c, &Sequential).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert_eq!(r.predictions.len(), 8);
        assert_eq!(r.bounds.len(), 8);
        for a in &r.audits {
            if ["prop_11_1", "prop_11_2", "lemma_12_3", "chain"].contains(&a.name.as_str()) {
                assert_eq!(a.satisfied, Some(true), "{a:?}");
            }
        }
        assert!(r.audits.iter().any(|a| a.name == "two_sided_13_1" && a.n.is_none()));
    }

    #[test]
    fn non_fixed_norm_prediction_is_inapplicable() {
        let mut c = ExperimentConfig::new(SystemDescriptor::new("cosine", Some(8)), vec![], 1);
        c.n_theta = 4;
        c.inner_budget = 1 << 10;
        c.mixture_samples = 16;
        c.pair_samples = 2000;
        c.targets = vec![TargetName::Typical];
        c.predictions = vec!["cor51".into()];
        let r = run(&c, &Sequential).unwrap();
        assert!(!r.predictions[0].applicable);
    }

    #[test]
    fn lacunary_counts() {
        let rows = lacunary_table(Sequence::Geometric { m1: 1, q: 2.0 }, 6).unwrap();
        for r in &rows {
            assert_eq!(r.t3_strict, 0);
            assert_eq!(r.t3, r.count as u64 - 1);
        }
        let fib = lacunary_table(Sequence::Fibonacci, 10).unwrap();
        assert_eq!(sequence_frequencies(Sequence::Fibonacci, 5).unwrap(), vec![1, 2, 3, 5, 8]);
        assert!(fib.iter().all(|r| r.t3_per_count <= 2.0));
    }
}
