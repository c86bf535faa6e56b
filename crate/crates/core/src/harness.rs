//! Multi-seed campaigns, aggregate statistics and pairwise significance tests.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run, Algorithm, RunConfig, RunRecord};
use crate::error::{Error, Result};
use crate::frontio::{self, FrontFormat};
use crate::metrics::wilcoxon_rank_sum;
use crate::problems::{problem_by_id, BenchmarkId};

/// Metric names a batch aggregates.
pub const METRICS: [&str; 5] = ["igd", "hv", "psp", "spacing", "runtime"];

/// Whether smaller values of `metric` are better.
pub fn lower_is_better(metric: &str) -> Result<bool> {
    match metric {
        "igd" | "spacing" | "runtime" => Ok(true),
        "hv" | "psp" => Ok(false),
        other => Err(Error::InvalidParameter(format!("unknown metric `{other}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl Aggregate {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("samples"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() > 1 {
            (samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            median: median(&samples),
            mean,
            std,
            samples,
        })
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One pairwise significance row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: String,
    pub a: String,
    pub b: String,
    pub median_a: f64,
    pub median_b: f64,
    /// Label of the side with the better median; `None` on a tie.
    pub better: Option<String>,
    /// Mann-Whitney U of `a`.
    pub statistic: f64,
    pub p_value: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub label: String,
    pub config: RunConfig,
    pub n_runs: usize,
    pub seed_base: u64,
    pub records: Vec<RunRecord>,
    /// Keyed by metric name; metrics a problem cannot provide are absent.
    pub aggregates: BTreeMap<String, Aggregate>,
    pub total_wall_clock_seconds: f64,
}

impl BatchReport {
    fn from_records(config: RunConfig, n_runs: usize, seed_base: u64, records: Vec<RunRecord>, total: f64) -> Result<Self> {
        let mut aggregates = BTreeMap::new();
        let columns: [(&str, fn(&RunRecord) -> Option<f64>); 5] = [
            ("igd", |r| r.metrics.igd),
            ("hv", |r| Some(r.metrics.hv)),
            ("psp", |r| r.metrics.psp),
            ("spacing", |r| r.metrics.spacing),
            ("runtime", |r| Some(r.wall_clock_seconds)),
        ];
        for (name, get) in columns {
            let samples: Option<Vec<f64>> = records.iter().map(get).collect();
            if let Some(samples) = samples {
                aggregates.insert(name.to_string(), Aggregate::new(samples)?);
            }
        }
        Ok(Self {
            label: format!("{}/{}", config.problem, config.algorithm),
            config,
            n_runs,
            seed_base,
            records,
            aggregates,
            total_wall_clock_seconds: total,
        })
    }

    pub fn metric(&self, metric: &str) -> Result<&Aggregate> {
        self.aggregates
            .get(metric)
            .ok_or_else(|| Error::InvalidParameter(format!("report `{}` has no `{metric}` samples", self.label)))
    }

    /// Copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.records = self.records.iter().map(RunRecord::without_timing).collect();
        out.total_wall_clock_seconds = 0.0;
        if let Some(a) = out.aggregates.get_mut("runtime") {
            *a = Aggregate::new(vec![0.0; a.samples.len()]).expect("non-empty");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn batch(config: &RunConfig, n_runs: usize, seed_base: u64, parallel: bool) -> Result<BatchReport> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be >= 1".into()));
    }
    let config = config.clone().validated()?;
    let problem = problem_by_id(&config.problem)?;
    let started = Instant::now();
    let one = |i: usize| run(config.clone().with_seed(seed_base.wrapping_add(i as u64)), problem.clone());
    let records: Result<Vec<RunRecord>> = if parallel {
        (0..n_runs).into_par_iter().map(one).collect()
    } else {
        (0..n_runs).map(one).collect()
    };
    BatchReport::from_records(config, n_runs, seed_base, records?, started.elapsed().as_secs_f64())
}

/// Runs `n_runs` seeds `seed_base + i` concurrently.
pub fn run_batch(config: &RunConfig, n_runs: usize, seed_base: u64) -> Result<BatchReport> {
    batch(config, n_runs, seed_base, true)
}

/// [`run_batch`] on the calling thread.
pub fn run_batch_sequential(config: &RunConfig, n_runs: usize, seed_base: u64) -> Result<BatchReport> {
    batch(config, n_runs, seed_base, false)
}

/// Rank-sum comparison of one metric between two batches.
pub fn compare(a: &BatchReport, b: &BatchReport, metric: &str) -> Result<Comparison> {
    let lower = lower_is_better(metric)?;
    let (sa, sb) = (a.metric(metric)?, b.metric(metric)?);
    let test = wilcoxon_rank_sum(&sa.samples, &sb.samples)?;
    let better = if sa.median == sb.median {
        None
    } else if (sa.median < sb.median) == lower {
        Some(a.label.clone())
    } else {
        Some(b.label.clone())
    };
    Ok(Comparison {
        metric: metric.to_string(),
        a: a.label.clone(),
        b: b.label.clone(),
        median_a: sa.median,
        median_b: sb.median,
        better,
        statistic: test.statistic,
        p_value: test.p_value,
        exact: test.exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Zdt,
    Uf,
    Adas,
    All,
}

impl Suite {
    pub fn problems(self) -> Vec<String> {
        let names = |ids: &[BenchmarkId]| ids.iter().map(|id| id.name().to_string()).collect::<Vec<_>>();
        match self {
            Self::Zdt => names(&BenchmarkId::ZDT),
            Self::Uf => names(&BenchmarkId::UF),
            Self::Adas => vec!["adas8".to_string()],
            Self::All => {
                let mut all = names(&BenchmarkId::ALL);
                all.push("adas8".to_string());
                all
            }
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zdt => "zdt",
            Self::Uf => "uf",
            Self::Adas => "adas",
            Self::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zdt" => Ok(Self::Zdt),
            "uf" => Ok(Self::Uf),
            "adas" => Ok(Self::Adas),
            "all" => Ok(Self::All),
            other => Err(Error::Parse(format!("unknown suite `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub reports: Vec<BatchReport>,
    /// First algorithm against each other one, per problem: IGD when a
    /// reference front exists, HV otherwise.
    pub comparisons: Vec<Comparison>,
    pub total_wall_clock_seconds: f64,
}

impl SuiteReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs every problem of `suite` with every algorithm, using `base` for the
/// remaining settings.
pub fn run_suite(base: &RunConfig, suite: Suite, algorithms: &[Algorithm], n_runs: usize, seed_base: u64) -> Result<SuiteReport> {
    if algorithms.is_empty() {
        return Err(Error::Empty("algorithms"));
    }
    let started = Instant::now();
    let mut reports = Vec::new();
    let mut comparisons = Vec::new();
    for problem in suite.problems() {
        let mut per_problem = Vec::new();
        for &algo in algorithms {
            let cfg = RunConfig {
                problem: problem.clone(),
                algorithm: algo,
                ..base.clone()
            };
            per_problem.push(run_batch(&cfg, n_runs, seed_base)?);
        }
        if n_runs >= 3 {
            let metric = if per_problem[0].aggregates.contains_key("igd") { "igd" } else { "hv" };
            for other in &per_problem[1..] {
                comparisons.push(compare(&per_problem[0], other, metric)?);
            }
        }
        reports.extend(per_problem);
    }
    Ok(SuiteReport {
        suite,
        reports,
        comparisons,
        total_wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Writes the objective vectors of a run's final archive.
pub fn export_front(record: &RunRecord, format: FrontFormat, path: &Path) -> Result<()> {
    frontio::write_front(path, &record.objective_front(), record.problem.objectives, format)
}

pub fn import_front(path: &Path, format: FrontFormat) -> Result<Vec<Vec<f64>>> {
    frontio::read_front(path, format)
}
