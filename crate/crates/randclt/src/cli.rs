//! The `randclt` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use randclt_core::distance::{sphere_samples, summarize, target_law, InnerBudget, Metric, MixtureBudget};
use randclt_core::expansions::{rho_lower_functional, smoothing_functional, thm12_from};
use randclt_core::expansions::{PredictionKind, THM12_C1, THM12_C2};
use randclt_core::moments::{Budget, Estimate, MpValue, XiMoments};
use randclt_core::sphere::jn;
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, MetricName, TargetName, AUDITS};
use crate::descriptor::{Params, SystemDescriptor, KINDS};
use crate::error::{config, HarnessError, Result};
use crate::exec::Parallel;
use crate::experiment::{
    bound, lacunary_table, pair_budget, prediction, prediction_row, prediction_target, preset_config, run,
    system_label, MomentContext, Preset, Sequence,
};
use crate::report::{write_csv_rows, BoundRow, ExperimentReport};

#[derive(Debug, Parser)]
#[command(
    name = "randclt",
    version,
    about = "Distances between one-dimensional projections of orthonormal systems and the normal law"
)]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads; defaults to RANDCLT_THREADS, then to the core count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Record the generation time in JSON reports.
    #[arg(long, global = true)]
    pub timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// System kind (see `systems list`).
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Walsh order.
    #[arg(long)]
    pub d: Option<u32>,
    /// Profile for shifted periodic systems.
    #[arg(long)]
    pub psi: Option<String>,
    /// Lacunary ratio.
    #[arg(long)]
    pub q: Option<f64>,
    /// First lacunary frequency.
    #[arg(long)]
    pub m1: Option<u64>,
    /// Explicit lacunary frequencies.
    #[arg(long, value_delimiter = ',')]
    pub frequencies: Option<Vec<u64>>,
}

impl SystemArgs {
    pub fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            kind: self.system.clone(),
            n: self.n,
            params: Params {
                d: self.d,
                psi: self.psi.clone(),
                frequencies: self.frequencies.clone(),
                q: self.q,
                m1: self.m1,
            },
            flags: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct SphereArgs {
    #[arg(long, default_value_t = 2000)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 1 << 16)]
    pub inner_budget: usize,
    #[arg(long)]
    pub max_inner_error: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub mixture_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictArg {
    Thm11,
    Cor51,
    Prop42,
    Remark53,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Thm12,
    Eq211,
    Eq81,
    Lemma23,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PresetArg {
    TwoSided,
    Lacunary,
    Walsh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceArg {
    Geometric,
    Fibonacci,
}

#[derive(Debug, Subcommand)]
pub enum SystemsAction {
    /// List system kinds and their parameters.
    List,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information about system kinds.
    Systems {
        #[command(subcommand)]
        action: SystemsAction,
    },
    /// The characteristic function J_n of θ₁ on a grid of s.
    Jn {
        #[arg(long)]
        n: usize,
        /// start:step:end, or a comma-separated list.
        #[arg(long)]
        t_grid: String,
    },
    /// Moment functionals of a system.
    Moments {
        #[command(flatten)]
        system: SystemArgs,
        /// Monte Carlo pairs (and norm draws) for infinite Ω.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Sphere-averaged distance between F_θ and a target.
    Distance {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        metric: MetricName,
        #[arg(long, value_enum)]
        target: TargetName,
        #[command(flatten)]
        sphere: SphereArgs,
    },
    /// An expansion's prediction for E_θ ω²; with --n-theta > 0 also the
    /// measured value.
    Predict {
        #[arg(long, value_enum)]
        kind: PredictArg,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        n_theta: usize,
        #[arg(long, default_value_t = 1 << 16)]
        inner_budget: usize,
        #[arg(long, default_value_t = 256)]
        mixture_samples: usize,
    },
    /// A bound functional.
    Bounds {
        #[arg(long, value_enum)]
        kind: BoundArg,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Integration range T (defaults: 1 for eq211, 4n for eq81).
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = THM12_C1)]
        c1: f64,
        #[arg(long, default_value_t = THM12_C2)]
        c2: f64,
        #[arg(long, default_value_t = 256)]
        mixture_samples: usize,
    },
    /// A named inequality audit over one or more dimensions.
    Audit {
        #[arg(long)]
        name: String,
        #[command(flatten)]
        system: SystemArgs,
        /// Dimensions, comma separated (defaults to --n or --d).
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[command(flatten)]
        sphere: SphereArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Reproduce a preset table.
    Table {
        #[arg(long, value_enum)]
        preset: PresetArg,
        #[arg(long)]
        n_theta: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        m1: u64,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = SequenceArg::Geometric)]
        sequence: SequenceArg,
    },
    /// Run an experiment from a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { crate::error::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("randclt: {e}");
            e.exit_code()
        }
    }
}

struct Sink {
    out: Box<dyn Write>,
    label: String,
}

fn sink(cli: &Cli) -> Result<Sink> {
    match &cli.out {
        None => Ok(Sink { out: Box::new(BufWriter::new(std::io::stdout())), label: "<stdout>".into() }),
        Some(p) => {
            let f = File::create(p).map_err(|e| HarnessError::Io { path: p.display().to_string(), source: e })?;
            Ok(Sink { out: Box::new(BufWriter::new(f)), label: p.display().to_string() })
        }
    }
}

impl Sink {
    fn write_str(mut self, s: &str) -> Result<()> {
        let label = self.label.clone();
        let io = |e| HarnessError::Io { path: label.clone(), source: e };
        self.out.write_all(s.as_bytes()).map_err(io)?;
        self.out.flush().map_err(io)
    }

    fn json<T: Serialize>(self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write_str(&text)
    }

    fn csv<T: Serialize>(self, rows: &[T]) -> Result<()> {
        let mut buf = Vec::new();
        write_csv_rows(&mut buf, rows)?;
        self.write_str(&String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn format_or(cli: &Cli, default: Format) -> Format {
    match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => default,
    }
}

fn emit_report(cli: &Cli, mut report: ExperimentReport, format: Format) -> Result<()> {
    if cli.timestamp {
        report.provenance.generated_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    match format {
        Format::Json => sink(cli)?.json(&report),
        Format::Csv => {
            for a in &report.audits {
                let verdict = match a.satisfied {
                    Some(true) => "satisfied",
                    Some(false) => "VIOLATED",
                    None => "reported",
                };
                let n = a.n.map(|n| n.to_string()).unwrap_or_else(|| "all".into());
                eprintln!("audit {} n={n}: lhs={} rhs={:?} {verdict}", a.name, a.lhs, a.rhs);
            }
            match &cli.out {
                Some(path) => report.write_csv_files(path).map(|_| ()),
                None => {
                    if !report.predictions.is_empty() || !report.bounds.is_empty() {
                        eprintln!("note: predictions and bounds are written as CSV only with --out; use --format json for stdout");
                    }
                    sink(cli)?.csv(&report.rows)
                }
            }
        }
    }
}

#[derive(Serialize)]
struct JnRow {
    n: usize,
    s: f64,
    jn: f64,
}

#[derive(Serialize)]
struct EstimateOut {
    value: f64,
    stderr: f64,
}

impl From<Estimate> for EstimateOut {
    fn from(e: Estimate) -> Self {
        Self { value: e.value, stderr: e.stderr }
    }
}

#[derive(Serialize)]
struct MpOut {
    value: Option<f64>,
    stderr: Option<f64>,
    /// The signed estimate of E⟨X,Y⟩^p when it is not positive.
    not_estimable_signed: Option<EstimateOut>,
}

impl From<MpValue> for MpOut {
    fn from(m: MpValue) -> Self {
        match m {
            MpValue::Value(e) => Self {
                value: Some(e.value),
                stderr: e.stderr.is_finite().then_some(e.stderr),
                not_estimable_signed: None,
            },
            MpValue::NotEstimable { signed } => {
                Self { value: None, stderr: None, not_estimable_signed: Some(signed.into()) }
            }
        }
    }
}

#[derive(Serialize)]
struct XiOut {
    mean: EstimateOut,
    second: EstimateOut,
    third: EstimateOut,
    fourth: EstimateOut,
    sqrt_gap: Option<EstimateOut>,
}

impl From<XiMoments> for XiOut {
    fn from(x: XiMoments) -> Self {
        Self {
            mean: x.mean.into(),
            second: x.second.into(),
            third: x.third.into(),
            fourth: x.fourth.into(),
            sqrt_gap: x.sqrt_gap.map(Into::into),
        }
    }
}

#[derive(Serialize)]
struct MomentsOut {
    system: SystemDescriptor,
    n: usize,
    mode: &'static str,
    samples: Option<usize>,
    seed: u64,
    m2: MpOut,
    m3: MpOut,
    m4: MpOut,
    sigma2: EstimateOut,
    sigma4: EstimateOut,
    xi: XiOut,
}

#[derive(Serialize)]
struct PredictionOut {
    system: SystemDescriptor,
    prediction: crate::report::PredictionRow,
}

#[derive(Serialize)]
struct BoundOut {
    system: SystemDescriptor,
    bound: BoundRow,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || HarnessError::Config(format!("cannot parse grid {spec:?}; use start:step:end or a comma list"));
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let [a, step, b] = parts[..] else { return Err(bad()) };
        if step.is_nan() || step <= 0.0 || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| a + step * i as f64).collect())
    } else {
        spec.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
    }
}

fn json_only(cli: &Cli, command: &str) -> Result<()> {
    match format_or(cli, Format::Json) {
        Format::Json => Ok(()),
        Format::Csv => config(format!("`{command}` writes nested records and supports only --format json")),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let exec = || Parallel::new(cli.threads);
    match &cli.command {
        Command::Systems { action: SystemsAction::List } => {
            let text: String = KINDS.iter().map(|(k, p)| format!("{k}\t{p}\n")).collect();
            sink(cli)?.write_str(&text)
        }
        Command::Jn { n, t_grid } => {
            let rows: Vec<JnRow> = parse_grid(t_grid)?
                .into_iter()
                .map(|s| Ok(JnRow { n: *n, s, jn: jn(*n, s)? }))
                .collect::<Result<_>>()?;
            match format_or(cli, Format::Csv) {
                Format::Csv => sink(cli)?.csv(&rows),
                Format::Json => sink(cli)?.json(&rows),
            }
        }
        Command::Moments { system, samples } => {
            json_only(cli, "moments")?;
            let d = system.descriptor();
            let s = d.build()?;
            let ctx = MomentContext::build(&s, *samples, cli.seed, &exec()?)?;
            let r = ctx.report()?;
            let (mode, count) = match pair_budget(&s, *samples, cli.seed) {
                Budget::Exact => ("exact", None),
                Budget::MonteCarlo { samples, .. } => ("monte_carlo", Some(samples)),
            };
            let out = MomentsOut {
                system: SystemDescriptor::from_system(&s),
                n: r.n,
                mode,
                samples: count,
                seed: cli.seed,
                m2: r.m2.into(),
                m3: r.m3.into(),
                m4: r.m4.into(),
                sigma2: r.sigma2.into(),
                sigma4: r.sigma4.into(),
                xi: r.xi.into(),
            };
            sink(cli)?.json(&out)
        }
        Command::Distance { system, metric, target, sphere } => {
            let d = system.descriptor();
            let mut c = ExperimentConfig::new(d, vec![], cli.seed);
            c.metrics = vec![*metric];
            c.targets = vec![*target];
            apply_sphere(&mut c, sphere);
            let report = run(&c, &exec()?)?;
            emit_report(cli, report, format_or(cli, Format::Csv))
        }
        Command::Predict { kind, system, samples, n_theta, inner_budget, mixture_samples } => {
            json_only(cli, "predict")?;
            let kind = match kind {
                PredictArg::Thm11 => PredictionKind::Thm11,
                PredictArg::Cor51 => PredictionKind::Cor51,
                PredictArg::Prop42 => PredictionKind::Prop42,
                PredictArg::Remark53 => PredictionKind::Remark53,
            };
            let s = system.descriptor().build()?;
            let ex = exec()?;
            let ctx = MomentContext::build(&s, *samples, cli.seed, &ex)?;
            let target = prediction_target(kind);
            let measured = if *n_theta > 0 {
                let law = target_law(&s, target.into(), MixtureBudget { samples: *mixture_samples, seed: cli.seed })?;
                let inner = InnerBudget { grid: *inner_budget, max_error: None };
                let th = sphere_samples(&s, &law, *n_theta, &inner, cli.seed, &ex)?;
                Some(summarize(&th, Metric::OmegaSq))
            } else {
                None
            };
            let row = prediction_row(kind, s.n(), target, prediction(&s, &ctx, kind)?, measured, cli.seed);
            sink(cli)?.json(&PredictionOut { system: SystemDescriptor::from_system(&s), prediction: row })
        }
        Command::Bounds { kind, system, samples, t_max, c1, c2, mixture_samples } => {
            json_only(cli, "bounds")?;
            let s = system.descriptor().build()?;
            let mixture = MixtureBudget { samples: *mixture_samples, seed: cli.seed };
            let n = s.n();
            let b = match kind {
                BoundArg::Thm12 => {
                    let ctx = MomentContext::build(&s, *samples, cli.seed, &exec()?)?;
                    thm12_from(&ctx.law, ctx.sigma4.value, *c1, *c2)
                }
                BoundArg::Eq211 => {
                    let law = target_law(&s, randclt_core::distance::Target::Typical, mixture)?;
                    rho_lower_functional(|t| law.cf(t), t_max.unwrap_or(1.0))?
                }
                BoundArg::Eq81 => {
                    let law = target_law(&s, randclt_core::distance::Target::Typical, mixture)?;
                    let reach = law.support().map(|r| r.1).unwrap_or(1.0);
                    smoothing_functional(
                        |t| law.cf(t),
                        |t| Ok((-0.5 * t * t).exp()),
                        t_max.unwrap_or(4.0 * n as f64),
                        reach,
                    )?
                }
                BoundArg::Lemma23 => bound(&s, None, "lemma23", mixture)?,
            };
            let row = BoundRow {
                kind: b.kind.name().to_string(),
                n,
                value: b.value,
                stderr: b.stderr,
                params: b.params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                seed: cli.seed,
            };
            sink(cli)?.json(&BoundOut { system: SystemDescriptor::from_system(&s), bound: row })
        }
        Command::Audit { name, system, n_list, sphere, samples } => {
            if !AUDITS.contains(&name.as_str()) {
                return config(format!("unknown audit {name:?}; expected one of {AUDITS:?}"));
            }
            let mut c = ExperimentConfig::new(system.descriptor(), n_list.clone(), cli.seed);
            c.metrics = vec![];
            c.targets = vec![];
            c.audits = vec![name.clone()];
            c.pair_samples = *samples;
            apply_sphere(&mut c, sphere);
            let report = run(&c, &exec()?)?;
            match format_or(cli, Format::Json) {
                Format::Json => emit_report(cli, report, Format::Json),
                Format::Csv => sink(cli)?.csv(&report.audits),
            }
        }
        Command::Table { preset, n_theta, q, m1, n_max, sequence } => {
            let p = match preset {
                PresetArg::TwoSided => Preset::TwoSided,
                PresetArg::Lacunary => Preset::Lacunary,
                PresetArg::Walsh => Preset::Walsh,
            };
            if p == Preset::Lacunary {
                let seq = match sequence {
                    SequenceArg::Geometric => Sequence::Geometric { m1: *m1, q: *q },
                    SequenceArg::Fibonacci => Sequence::Fibonacci,
                };
                let rows = lacunary_table(seq, *n_max)?;
                return match format_or(cli, Format::Csv) {
                    Format::Csv => sink(cli)?.csv(&rows),
                    Format::Json => sink(cli)?.json(&rows),
                };
            }
            let c = preset_config(p, cli.seed, *n_theta)?;
            let report = run(&c, &exec()?)?;
            emit_report(cli, report, format_or(cli, Format::Csv))
        }
        Command::Run { config: path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })?;
            let c = ExperimentConfig::from_json(&text)?;
            let report = run(&c, &exec()?)?;
            match &c.output {
                Some(o) if cli.out.is_none() => match o.format {
                    Format::Csv => report.write_csv_files(Path::new(&o.path)).map(|_| ()),
                    Format::Json => std::fs::write(&o.path, report.to_json()?)
                        .map_err(|e| HarnessError::Io { path: o.path.clone(), source: e }),
                },
                _ => emit_report(cli, report, format_or(cli, Format::Json)),
            }
        }
    }
}

fn apply_sphere(c: &mut ExperimentConfig, s: &SphereArgs) {
    c.n_theta = s.n_theta;
    c.inner_budget = s.inner_budget;
    c.max_inner_error = s.max_inner_error;
    c.mixture_samples = s.mixture_samples;
}

/// The label used for a system in distance rows.
pub fn label_for(d: &SystemDescriptor) -> Result<String> {
    Ok(system_label(&d.build()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:0.5:2").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with_args(["randclt", "frobnicate"]), 2);
        assert_eq!(main_with_args(["randclt", "jn", "--n", "3"]), 2);
        assert_eq!(
            main_with_args([
                "randclt", "distance", "--system", "trig", "--n", "7", "--metric", "rho", "--target", "normal"
            ]),
            2
        );
    }
}
