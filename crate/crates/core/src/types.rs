//! Shared domain types, Pareto dominance and bounds handling.
//!
//! Every objective is minimized.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};

/// A point in decision space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(Vec<f64>);

/// A point in objective space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

macro_rules! vector_newtype {
    ($name:ident) => {
        impl $name {
            /// Wraps `values`, rejecting NaN and infinities.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                ensure_finite(&values)?;
                Ok(Self(values))
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<$name> for Vec<f64> {
            fn from(v: $name) -> Vec<f64> {
                v.0
            }
        }
    };
}

vector_newtype!(DecisionVector);
vector_newtype!(ObjectiveVector);

impl ObjectiveVector {
    /// Bitwise equality, used for duplicate detection in the archive.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// An evaluated decision vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: DecisionVector,
    pub f: ObjectiveVector,
}

impl Solution {
    pub fn new(x: DecisionVector, f: ObjectiveVector) -> Self {
        Self { x, f }
    }
}

/// Box constraints of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        ensure_len(lower.len(), upper.len())?;
        ensure_finite(&lower)?;
        ensure_finite(&upper)?;
        if lower.is_empty() {
            return Err(Error::Empty("bounds"));
        }
        if let Some(j) = (0..lower.len()).find(|&j| lower[j] >= upper[j]) {
            return Err(Error::InvalidParameter(format!(
                "bounds at {j}: lower {} must be below upper {}",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lower, upper]` in every one of `dim` coordinates.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    /// Maps a raw coordinate into `[0, 1]` (unclamped).
    pub fn to_unit(&self, j: usize, value: f64) -> f64 {
        (value - self.lower[j]) / self.range(j)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(j, &v)| v >= self.lower[j] && v <= self.upper[j])
    }

    /// Errors unless `x` has the right length and lies inside the box.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        ensure_len(self.dim(), x.len())?;
        ensure_finite(x)?;
        for (j, &v) in x.iter().enumerate() {
            if v < self.lower[j] || v > self.upper[j] {
                return Err(Error::OutOfBounds {
                    index: j,
                    value: v,
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        Ok(())
    }
}

/// Static description of an optimization problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: String,
    pub dimension: usize,
    pub objectives: usize,
    pub bounds: Bounds,
    pub has_reference_front: bool,
}

/// Pareto dominance under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    ensure_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

pub fn clamp_to_bounds(x: &[f64], bounds: &Bounds) -> Result<DecisionVector> {
    ensure_len(bounds.dim(), x.len())?;
    ensure_finite(x)?;
    Ok(DecisionVector(
        x.iter()
            .enumerate()
            .map(|(j, &v)| v.max(bounds.lower[j]).min(bounds.upper[j]))
            .collect(),
    ))
}

/// Per-objective min-max rescaling to `[0, 1]`. Constant objectives map to 0.
pub fn normalize_front<V: AsRef<[f64]>>(front: &[V]) -> Result<Vec<Vec<f64>>> {
    let first = front.first().ok_or(Error::Empty("front"))?.as_ref();
    let m = first.len();
    let mut lo = first.to_vec();
    let mut hi = first.to_vec();
    for v in front {
        let v = v.as_ref();
        ensure_len(m, v.len())?;
        for k in 0..m {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    Ok(front
        .iter()
        .map(|v| {
            v.as_ref()
                .iter()
                .enumerate()
                .map(|(k, &f)| {
                    let span = hi[k] - lo[k];
                    if span > 0.0 {
                        ((f - lo[k]) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for DecisionVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
