//! Bounded repository of mutually non-dominated solutions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::rng::RngStream;
use crate::types::{dominates_unchecked, Solution};

pub const DEFAULT_CAPACITY: usize = 100;

/// Result of offering a solution to the archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Added; `evicted` members it dominated were removed, `pruned` by crowding.
    Added { evicted: usize, pruned: usize },
    /// An existing member dominates it or has the identical objective vector.
    Rejected,
}

/// The repository.
///
/// Invariants, re-established after every public mutation: members are
/// mutually non-dominated, no two share a bit-identical objective vector,
/// `len() <= capacity`, and `crowding()` is aligned with `members()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    members: Vec<Solution>,
    capacity: usize,
    crowding: Vec<f64>,
}

impl ParetoArchive {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter("archive capacity must be >= 1".into()));
        }
        Ok(Self {
            members: Vec::new(),
            capacity,
            crowding: Vec::new(),
        })
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn crowding(&self) -> &[f64] {
        &self.crowding
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Objective vectors of all members, in member order.
    pub fn front(&self) -> Vec<Vec<f64>> {
        self.members.iter().map(|s| s.f.to_vec()).collect()
    }

    pub fn insert(&mut self, s: Solution) -> Result<InsertOutcome> {
        if let Some(first) = self.members.first() {
            ensure_len(first.f.len(), s.f.len())?;
        }
        for m in &self.members {
            if m.f.bit_eq(&s.f) || dominates_unchecked(&m.f, &s.f) {
                return Ok(InsertOutcome::Rejected);
            }
        }
        let before = self.members.len();
        self.members.retain(|m| !dominates_unchecked(&s.f, &m.f));
        let evicted = before - self.members.len();
        self.members.push(s);
        self.refresh_crowding();
        let pruned = self.prune();
        Ok(InsertOutcome::Added { evicted, pruned })
    }

    /// Removes the most crowded member, one at a time, until within capacity.
    /// Returns the number removed.
    pub fn prune(&mut self) -> usize {
        let mut removed = 0;
        while self.members.len() > self.capacity {
            let victim = argmin_first(&self.crowding);
            self.members.remove(victim);
            self.refresh_crowding();
            removed += 1;
        }
        removed
    }

    fn refresh_crowding(&mut self) {
        self.crowding = if self.members.is_empty() {
            Vec::new()
        } else {
            let objs: Vec<&[f64]> = self.members.iter().map(|s| s.f.as_slice()).collect();
            crowding_distances(&objs).expect("non-empty front")
        };
    }

    /// Draws a member index with probability proportional to `scores`.
    pub fn roulette_select(&self, scores: &[f64], rng: &mut RngStream) -> Result<usize> {
        roulette_select(self.members.len(), scores, rng)
    }
}

fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// NSGA-II crowding distance with a finite sentinel for boundary members.
///
/// Boundary members (extremes of any objective) receive twice the largest
/// finite distance in the set, or 1.0 when no positive finite distance exists.
pub fn crowding_distances<V: AsRef<[f64]>>(front: &[V]) -> Result<Vec<f64>> {
    let n = front.len();
    if n == 0 {
        return Err(Error::Empty("front"));
    }
    let m = front[0].as_ref().len();
    for v in front {
        ensure_len(m, v.as_ref().len())?;
    }
    let mut dist = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let val = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(a.cmp(&b)));
        let (lo, hi) = (val(order[0]), val(order[n - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span > 0.0 {
            for w in order.windows(3) {
                dist[w[1]] += (val(w[2]) - val(w[0])) / span;
            }
        }
    }
    let max_finite = dist
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let sentinel = if max_finite > 0.0 { 2.0 * max_finite } else { 1.0 };
    for d in &mut dist {
        if d.is_infinite() {
            *d = sentinel;
        }
    }
    Ok(dist)
}

/// Roulette-wheel draw over `n` candidates. All-zero scores fall back to uniform.
pub fn roulette_select(n: usize, scores: &[f64], rng: &mut RngStream) -> Result<usize> {
    if n == 0 {
        return Err(Error::Empty("archive"));
    }
    ensure_len(n, scores.len())?;
    if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidParameter(
            "roulette scores must be finite and non-negative".into(),
        ));
    }
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Ok(rng.random_range(0..n));
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > 0.0 {
            acc += s;
            last_positive = i;
            if target < acc {
                return Ok(i);
            }
        }
    }
    Ok(last_positive)
}
