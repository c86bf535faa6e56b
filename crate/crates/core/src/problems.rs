//! Analytic two-objective benchmarks: ZDT1-4 (Zitzler, Deb and Thiele) and
//! UF1-4 from the CEC 2009 competition suite.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adas::AdasProblem;
use crate::error::{Error, Result};
use crate::frontio::{self, FrontFormat};
use crate::types::{Bounds, ObjectiveVector, ProblemSpec};

/// A box-constrained multi-objective problem.
pub trait Problem: Send + Sync {
    fn spec(&self) -> &ProblemSpec;

    /// Evaluates `x`, which must have the right dimension and lie inside the bounds.
    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector>;

    /// `n` samples of the true Pareto front, when one is known analytically.
    fn reference_front(&self, _n: usize) -> Result<Option<ReferenceFront>> {
        Ok(None)
    }

    /// Fixed hypervolume reference point, for problems without a reference front.
    fn hv_reference_point(&self) -> Option<Vec<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BenchmarkId {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Uf1,
    Uf2,
    Uf3,
    Uf4,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 8] = [
        Self::Zdt1,
        Self::Zdt2,
        Self::Zdt3,
        Self::Zdt4,
        Self::Uf1,
        Self::Uf2,
        Self::Uf3,
        Self::Uf4,
    ];
    pub const ZDT: [BenchmarkId; 4] = [Self::Zdt1, Self::Zdt2, Self::Zdt3, Self::Zdt4];
    pub const UF: [BenchmarkId; 4] = [Self::Uf1, Self::Uf2, Self::Uf3, Self::Uf4];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zdt1 => "ZDT1",
            Self::Zdt2 => "ZDT2",
            Self::Zdt3 => "ZDT3",
            Self::Zdt4 => "ZDT4",
            Self::Uf1 => "UF1",
            Self::Uf2 => "UF2",
            Self::Uf3 => "UF3",
            Self::Uf4 => "UF4",
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontSource {
    Analytic,
    File,
}

/// Points sampled from a true Pareto front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFront {
    pub points: Vec<Vec<f64>>,
    pub source: FrontSource,
}

impl ReferenceFront {
    pub fn from_points(points: Vec<Vec<f64>>) -> Self {
        Self {
            points,
            source: FrontSource::File,
        }
    }

    /// Worst value per objective.
    pub fn nadir(&self) -> Option<Vec<f64>> {
        let first = self.points.first()?;
        let mut nadir = first.clone();
        for p in &self.points {
            for (n, v) in nadir.iter_mut().zip(p) {
                *n = n.max(*v);
            }
        }
        Some(nadir)
    }

    /// Hypervolume reference point: the nadir pushed out by 10% per objective.
    pub fn hv_reference_point(&self) -> Option<Vec<f64>> {
        self.nadir()
            .map(|n| n.into_iter().map(|v| v + 0.1 * v.abs()).collect())
    }

    pub fn read_text(path: &Path) -> Result<Self> {
        let points = frontio::read_front(path, FrontFormat::Text)?;
        if points.is_empty() {
            return Err(Error::Empty("reference front file"));
        }
        Ok(Self::from_points(points))
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let m = self.points.first().map_or(2, Vec::len);
        frontio::write_front(path, &self.points, m, FrontFormat::Text)
    }
}

/// One of the eight analytic benchmarks, with its standard dimension.
#[derive(Debug, Clone)]
pub struct Benchmark {
    id: BenchmarkId,
    spec: ProblemSpec,
}

impl Benchmark {
    pub fn new(id: BenchmarkId) -> Self {
        Self {
            id,
            spec: problem_spec(id),
        }
    }

    pub fn id(&self) -> BenchmarkId {
        self.id
    }
}

impl Problem for Benchmark {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.spec.bounds.check(x)?;
        let (f1, f2) = match self.id {
            BenchmarkId::Zdt1 => zdt(x, zdt_linear_g(x), |r| 1.0 - r.sqrt()),
            BenchmarkId::Zdt2 => zdt(x, zdt_linear_g(x), |r| 1.0 - r * r),
            BenchmarkId::Zdt3 => zdt(x, zdt_linear_g(x), |r| {
                1.0 - r.sqrt() - r * (10.0 * PI * x[0]).sin()
            }),
            BenchmarkId::Zdt4 => {
                let g = 1.0
                    + 10.0 * (x.len() - 1) as f64
                    + x[1..]
                        .iter()
                        .map(|v| v * v - 10.0 * (4.0 * PI * v).cos())
                        .sum::<f64>();
                zdt(x, g, |r| 1.0 - r.sqrt())
            }
            BenchmarkId::Uf1 => uf1(x),
            BenchmarkId::Uf2 => uf2(x),
            BenchmarkId::Uf3 => uf3(x),
            BenchmarkId::Uf4 => uf4(x),
        };
        ObjectiveVector::new(vec![f1, f2])
    }

    fn reference_front(&self, n: usize) -> Result<Option<ReferenceFront>> {
        true_front_sample(self.id, n).map(Some)
    }
}

pub fn problem_spec(id: BenchmarkId) -> ProblemSpec {
    let (dimension, tail) = match id {
        BenchmarkId::Zdt1 | BenchmarkId::Zdt2 | BenchmarkId::Zdt3 => (30, (0.0, 1.0)),
        BenchmarkId::Zdt4 => (10, (-5.0, 5.0)),
        BenchmarkId::Uf1 | BenchmarkId::Uf2 => (30, (-1.0, 1.0)),
        BenchmarkId::Uf3 => (30, (0.0, 1.0)),
        BenchmarkId::Uf4 => (30, (-2.0, 2.0)),
    };
    let mut lower = vec![tail.0; dimension];
    let mut upper = vec![tail.1; dimension];
    lower[0] = 0.0;
    upper[0] = 1.0;
    ProblemSpec {
        id: id.name().to_string(),
        dimension,
        objectives: 2,
        bounds: Bounds::new(lower, upper).expect("static bounds are valid"),
        has_reference_front: true,
    }
}

pub fn evaluate(id: BenchmarkId, x: &[f64]) -> Result<ObjectiveVector> {
    Benchmark::new(id).evaluate(x)
}

fn zdt_linear_g(x: &[f64]) -> f64 {
    1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64
}

fn zdt(x: &[f64], g: f64, h: impl Fn(f64) -> f64) -> (f64, f64) {
    let f1 = x[0];
    (f1, g * h(f1 / g))
}

/// Mean of `term(j, x_j)` over the odd (J1) and even (J2) 1-based indices `j >= 2`,
/// each scaled by 2 as in the CEC 2009 definitions.
fn uf_sums(x: &[f64], term: impl Fn(usize, f64) -> f64) -> (f64, f64) {
    let (mut odd, mut even) = (0.0, 0.0);
    let (mut n_odd, mut n_even) = (0usize, 0usize);
    for (i, &v) in x.iter().enumerate().skip(1) {
        let j = i + 1;
        let t = term(j, v);
        if j % 2 == 1 {
            odd += t;
            n_odd += 1;
        } else {
            even += t;
            n_even += 1;
        }
    }
    (2.0 * odd / n_odd as f64, 2.0 * even / n_even as f64)
}

fn uf1(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let x1 = x[0];
    let (s1, s2) = uf_sums(x, |j, v| {
        let y = v - (6.0 * PI * x1 + j as f64 * PI / n).sin();
        y * y
    });
    (x1 + s1, 1.0 - x1.sqrt() + s2)
}

fn uf2(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let x1 = x[0];
    let (s1, s2) = uf_sums(x, |j, v| {
        let jf = j as f64;
        let amp = 0.3 * x1 * x1 * (24.0 * PI * x1 + 4.0 * jf * PI / n).cos() + 0.6 * x1;
        let phase = 6.0 * PI * x1 + jf * PI / n;
        let y = if j % 2 == 1 {
            v - amp * phase.cos()
        } else {
            v - amp * phase.sin()
        };
        y * y
    });
    (x1 + s1, 1.0 - x1.sqrt() + s2)
}

fn uf3(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let x1 = x[0];
    let (mut sum, mut prod) = ([0.0f64; 2], [1.0f64; 2]);
    let mut count = [0usize; 2];
    for (i, &v) in x.iter().enumerate().skip(1) {
        let j = i + 1;
        let exponent = 0.5 * (1.0 + 3.0 * (j as f64 - 2.0) / (n as f64 - 2.0));
        let y = v - x1.powf(exponent);
        let set = (j + 1) % 2; // 0 for odd j, 1 for even j
        sum[set] += y * y;
        prod[set] *= (20.0 * y * PI / (j as f64).sqrt()).cos();
        count[set] += 1;
    }
    let term = |k: usize| 2.0 / count[k] as f64 * (4.0 * sum[k] - 2.0 * prod[k] + 2.0);
    (x1 + term(0), 1.0 - x1.sqrt() + term(1))
}

fn uf4(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let x1 = x[0];
    let (s1, s2) = uf_sums(x, |j, v| {
        let y = (v - (6.0 * PI * x1 + j as f64 * PI / n).sin()).abs();
        y / (1.0 + (2.0 * y).exp())
    });
    (x1 + s1, 1.0 - x1 * x1 + s2)
}

/// Samples `n` points of the analytic Pareto front of `id`.
pub fn true_front_sample(id: BenchmarkId, n: usize) -> Result<ReferenceFront> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "front sample needs at least 2 points, got {n}"
        )));
    }
    let grid = |count: usize| (0..count).map(move |i| i as f64 / (count - 1) as f64);
    let points = match id {
        BenchmarkId::Zdt2 | BenchmarkId::Uf4 => grid(n).map(|f| vec![f, 1.0 - f * f]).collect(),
        BenchmarkId::Zdt3 => {
            let dense = 10_000.max(10 * n);
            let curve: Vec<Vec<f64>> = grid(dense)
                .map(|f| vec![f, 1.0 - f.sqrt() - f * (10.0 * PI * f).sin()])
                .collect();
            thin(nondominated_2d(curve), n)
        }
        _ => grid(n).map(|f| vec![f, 1.0 - f.sqrt()]).collect(),
    };
    Ok(ReferenceFront {
        points,
        source: FrontSource::Analytic,
    })
}

/// Keeps the non-dominated subset of a curve already sorted by strictly increasing f1.
fn nondominated_2d(sorted: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut best = f64::INFINITY;
    sorted
        .into_iter()
        .filter(|p| {
            if p[1] < best {
                best = p[1];
                true
            } else {
                false
            }
        })
        .collect()
}

fn thin(points: Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    if points.len() <= n {
        return points;
    }
    let last = points.len() - 1;
    (0..n)
        .map(|i| points[(i * last + (n - 1) / 2) / (n - 1)].clone())
        .collect()
}

/// Resolves a problem id (`ZDT1`..`UF4` or `adas8`).
pub fn problem_by_id(id: &str) -> Result<Arc<dyn Problem>> {
    if id.eq_ignore_ascii_case(AdasProblem::ID) {
        return Ok(Arc::new(AdasProblem::new()));
    }
    Ok(Arc::new(Benchmark::new(id.parse()?)))
}
