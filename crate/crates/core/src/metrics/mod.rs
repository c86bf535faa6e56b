//! Front quality indicators and significance testing.

mod wilcoxon;

pub use wilcoxon::{wilcoxon_rank_sum, RankSumTest, EXACT_MAX_N};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::problems::ReferenceFront;

/// Guard added to the spacing denominator of [`psp`].
pub const PSP_EPSILON: f64 = 1e-9;

fn check_front<V: AsRef<[f64]>>(front: &[V], what: &'static str) -> Result<usize> {
    let m = front.first().ok_or(Error::Empty(what))?.as_ref().len();
    for v in front {
        ensure_len(m, v.as_ref().len())?;
    }
    Ok(m)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Inverted generational distance: mean distance from each reference point to
/// its nearest obtained point.
pub fn igd<V: AsRef<[f64]>, R: AsRef<[f64]>>(obtained: &[V], reference: &[R]) -> Result<f64> {
    let m = check_front(obtained, "obtained front")?;
    ensure_len(m, check_front(reference, "reference front")?)?;
    let total: f64 = reference
        .iter()
        .map(|r| {
            obtained
                .iter()
                .map(|o| euclidean(r.as_ref(), o.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Exact hypervolume dominated by `front` and bounded by `ref_point`.
///
/// Points not weakly dominating the reference point are ignored. Supports two
/// objectives (sort and sweep) and three (slicing along the third objective).
pub fn hypervolume<V: AsRef<[f64]>>(front: &[V], ref_point: &[f64]) -> Result<f64> {
    let m = ref_point.len();
    if !(2..=3).contains(&m) {
        return Err(Error::Unsupported(format!(
            "hypervolume for {m} objectives (only 2 or 3)"
        )));
    }
    let mut pts: Vec<&[f64]> = Vec::with_capacity(front.len());
    for v in front {
        let v = v.as_ref();
        ensure_len(m, v.len())?;
        if v.iter().zip(ref_point).all(|(a, r)| a <= r) {
            pts.push(v);
        }
    }
    Ok(if m == 2 {
        hv2d(pts, ref_point[0], ref_point[1])
    } else {
        hv3d(pts, ref_point)
    })
}

fn hv2d(mut pts: Vec<&[f64]>, r0: f64, r1: f64) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut floor = r1;
    for p in pts {
        if p[1] < floor {
            volume += (r0 - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    volume
}

fn hv3d(mut pts: Vec<&[f64]>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut i = 0;
    while i < pts.len() {
        let z = pts[i][2];
        let mut j = i;
        while j < pts.len() && pts[j][2] == z {
            j += 1;
        }
        let top = if j < pts.len() { pts[j][2] } else { r[2] };
        if top > z {
            let slice: Vec<&[f64]> = pts[..j].to_vec();
            volume += hv2d(slice, r[0], r[1]) * (top - z);
        }
        i = j;
    }
    volume
}

/// Schott spacing: sample standard deviation of nearest-neighbour L1 distances.
pub fn spacing<V: AsRef<[f64]>>(front: &[V]) -> Result<f64> {
    check_front(front, "front")?;
    let n = front.len();
    if n < 2 {
        return Err(Error::InvalidParameter("spacing needs at least 2 points".into()));
    }
    let nearest: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| manhattan(front[i].as_ref(), front[j].as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nearest.iter().sum::<f64>() / n as f64;
    let ss: f64 = nearest.iter().map(|d| (d - mean) * (d - mean)).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}

/// Pareto spread: obtained-to-reference extent ratio over spacing.
/// Higher means broader and more even coverage.
pub fn psp<V: AsRef<[f64]>, R: AsRef<[f64]>>(obtained: &[V], reference: &[R]) -> Result<f64> {
    if obtained.len() < 2 {
        return Err(Error::InvalidParameter("PSP needs at least 2 points".into()));
    }
    let m = check_front(obtained, "obtained front")?;
    ensure_len(m, check_front(reference, "reference front")?)?;
    let extent = |set: &[&[f64]]| -> f64 {
        (0..m)
            .map(|k| {
                let (lo, hi) = set.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[k]), hi.max(p[k]))
                });
                hi - lo
            })
            .sum()
    };
    let obt: Vec<&[f64]> = obtained.iter().map(AsRef::as_ref).collect();
    let refs: Vec<&[f64]> = reference.iter().map(AsRef::as_ref).collect();
    let ref_extent = extent(&refs);
    if ref_extent <= 0.0 {
        return Err(Error::InvalidParameter("reference front has zero extent".into()));
    }
    Ok(extent(&obt) / ref_extent / (spacing(obtained)? + PSP_EPSILON))
}

/// Final quality summary of a front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Absent when no reference front is known.
    pub igd: Option<f64>,
    pub hv: f64,
    /// Absent without a reference front or with fewer than 2 points.
    pub psp: Option<f64>,
    /// Absent with fewer than 2 points.
    pub spacing: Option<f64>,
    pub ref_point: Vec<f64>,
    pub n_points: usize,
}

impl MetricReport {
    pub fn compute(
        front: &[Vec<f64>],
        reference: Option<&ReferenceFront>,
        ref_point: &[f64],
    ) -> Result<Self> {
        check_front(front, "front")?;
        let many = front.len() >= 2;
        Ok(Self {
            igd: reference.map(|r| igd(front, &r.points)).transpose()?,
            hv: hypervolume(front, ref_point)?,
            psp: match reference {
                Some(r) if many => Some(psp(front, &r.points)?),
                _ => None,
            },
            spacing: if many { Some(spacing(front)?) } else { None },
            ref_point: ref_point.to_vec(),
            n_points: front.len(),
        })
    }
}
