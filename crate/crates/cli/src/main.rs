use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qihsi_core::engine::{run_config, Algorithm, RunConfig};
use qihsi_core::frontio::{read_front, FrontFormat};
use qihsi_core::harness::{compare, export_front, run_suite, BatchReport, Suite, SuiteReport};
use qihsi_core::metrics::MetricReport;
use qihsi_core::{ExpertScenario, ReferenceFront};

mod serve;

const SEED_ENV: &str = "QIHSI_SEED";

#[derive(Parser)]
#[command(name = "qihsi", version, about = "Quantum-inspired salp swarm multi-objective optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and write its record.
    Run(RunArgs),
    /// Multi-seed campaign over a benchmark suite.
    Bench(BenchArgs),
    /// Quality metrics of a front against a reference front.
    Metrics(MetricsArgs),
    /// Rank-sum comparison of two batch reports.
    Compare(CompareArgs),
    /// Start the interactive session service.
    Serve(serve::ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

/// Settings shared by `run` and `bench`; each overrides the config file.
#[derive(Args)]
struct EngineArgs {
    /// JSON file mirroring the run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    archive: Option<usize>,
    /// Expert scenario JSON; enables decision-maker feedback.
    #[arg(long)]
    dmil: Option<PathBuf>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    sign_flip: Option<OnOff>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rot_sigma: Option<f64>,
    /// Skip per-iteration IGD/HV traces.
    #[arg(long)]
    no_trace: bool,
}

impl EngineArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.pop {
            cfg.population = v;
        }
        if let Some(v) = self.iters {
            cfg.iterations = v;
        }
        if let Some(v) = self.archive {
            cfg.archive = v;
        }
        if let Some(path) = &self.dmil {
            cfg.dmil.scenario = Some(ExpertScenario::load(path).with_context(|| format!("loading {}", path.display()))?);
            cfg.dmil.enabled = true;
        }
        if let Some(v) = self.tau {
            cfg.dmil.tau = v;
        }
        if let Some(v) = self.gamma {
            cfg.dmil.gamma = v;
        }
        if let Some(v) = self.sign_flip {
            cfg.quantum.sign_flip = matches!(v, OnOff::On);
        }
        if let Some(v) = self.beta {
            cfg.quantum.beta = v;
        }
        if let Some(v) = self.rot_sigma {
            cfg.quantum.rot_sigma = v;
        }
        if self.no_trace {
            cfg.trace_metrics = false;
        }
        Ok(cfg)
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not a seed"))?)),
        Err(_) => Ok(None),
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    algo: Option<Algorithm>,
    /// Overridden by the QIHSI_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Where to write the run record (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the final front; format from the extension (.csv, .json, else text).
    #[arg(long)]
    front: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "zdt")]
    suite: Suite,
    #[arg(long, value_delimiter = ',', default_value = "qihsi,mssa")]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Overridden by the QIHSI_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    front: PathBuf,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Comma-separated hypervolume reference point; defaults to the reference nadir + 10%.
    #[arg(long)]
    ref_point: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value = "igd")]
    metric: String,
    /// Picks a batch from a multi-batch report in `--a`, e.g. `ZDT4/qihsi`.
    #[arg(long)]
    label_a: Option<String>,
    #[arg(long)]
    label_b: Option<String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |v| format!("{v:.6e}"))
}

fn write_json(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = args.engine.config()?;
    if let Some(p) = args.problem {
        cfg.problem = p;
    }
    if let Some(a) = args.algo {
        cfg.algorithm = a;
    }
    if let Some(s) = env_seed()?.or(args.seed) {
        cfg.seed = s;
    }
    let rec = run_config(cfg)?;
    if let Some(path) = &args.out {
        write_json(path, &rec.to_json()?)?;
    }
    if let Some(path) = &args.front {
        export_front(&rec, FrontFormat::from_path(path), path)?;
    }
    let m = &rec.metrics;
    let mut line = format!(
        "run problem={} algo={} seed={} iters={} points={} igd={} hv={:.6e} psp={} spacing={} seconds={:.3}",
        rec.config.problem,
        rec.config.algorithm,
        rec.config.seed,
        rec.config.iterations,
        m.n_points,
        fmt_opt(m.igd),
        m.hv,
        fmt_opt(m.psp),
        fmt_opt(m.spacing),
        rec.wall_clock_seconds
    );
    if let Some(ind) = &rec.adas_indicators {
        line += &format!(
            " si={:.6} eem={:.6} cps={:.6} sr={:.6} dc={:.2} efa={:.2}",
            ind.si, ind.eem, ind.cps, ind.sr, ind.dc, ind.efa
        );
    }
    println!("{line}");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let base = args.engine.config()?;
    let seed_base = env_seed()?.unwrap_or(args.seed_base);
    let report = run_suite(&base, args.suite, &args.algos, args.runs, seed_base)?;
    if let Some(path) = &args.out {
        write_json(path, &report.to_json()?)?;
    }
    for r in &report.reports {
        let igd = r.aggregates.get("igd").map(|a| a.median);
        let hv = r.metric("hv")?.median;
        eprintln!("{:<14} median igd={} hv={:.6e}", r.label, fmt_opt(igd), hv);
    }
    for c in &report.comparisons {
        eprintln!(
            "{} vs {} on {}: better={} p={:.4}",
            c.a,
            c.b,
            c.metric,
            c.better.as_deref().unwrap_or("none"),
            c.p_value
        );
    }
    println!(
        "bench suite={} runs={} batches={} comparisons={} seconds={:.3}",
        report.suite,
        args.runs,
        report.reports.len(),
        report.comparisons.len(),
        report.total_wall_clock_seconds
    );
    Ok(())
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad coordinate `{v}`")))
        .collect()
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let front = read_front(&args.front, FrontFormat::from_path(&args.front))?;
    if front.is_empty() {
        bail!("{} holds no points", args.front.display());
    }
    let reference = match &args.reference {
        Some(p) => Some(ReferenceFront::from_points(read_front(p, FrontFormat::from_path(p))?)),
        None => None,
    };
    let ref_point = match (&args.ref_point, &reference) {
        (Some(s), _) => parse_point(s)?,
        (None, Some(r)) => r.hv_reference_point().context("reference front is empty")?,
        (None, None) => bail!("need --reference or --ref-point"),
    };
    let m = MetricReport::compute(&front, reference.as_ref(), &ref_point)?;
    println!(
        "metrics n={} igd={} hv={:.6e} psp={} spacing={}",
        m.n_points,
        fmt_opt(m.igd),
        m.hv,
        fmt_opt(m.psp),
        fmt_opt(m.spacing)
    );
    Ok(())
}

/// Loads a batch report, or one batch of a suite report.
fn load_batch(path: &Path, label: Option<&str>) -> Result<BatchReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(b) = BatchReport::from_json(&text) {
        return Ok(b);
    }
    let suite: SuiteReport = serde_json::from_str(&text).with_context(|| format!("{} is not a report", path.display()))?;
    match (label, suite.reports.len()) {
        (Some(l), _) => suite
            .reports
            .into_iter()
            .find(|r| r.label.eq_ignore_ascii_case(l))
            .with_context(|| format!("no batch labelled `{l}` in {}", path.display())),
        (None, 1) => Ok(suite.reports.into_iter().next().expect("one report")),
        (None, n) => bail!("{} holds {n} batches; pick one with a label option", path.display()),
    }
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let a = load_batch(&args.a, args.label_a.as_deref())?;
    let b = load_batch(&args.b, args.label_b.as_deref())?;
    let c = compare(&a, &b, &args.metric)?;
    println!(
        "compare metric={} a={} b={} median_a={:.6e} median_b={:.6e} better={} statistic={} p={:.6}",
        c.metric,
        c.a,
        c.b,
        c.median_a,
        c.median_b,
        c.better.as_deref().unwrap_or("none"),
        c.statistic,
        c.p_value
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Serve(a) => serve::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
