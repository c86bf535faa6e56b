//! The salp-chain update rules and their quantum-inspired leader operators.

use rand::Rng;

use crate::error::{ensure_len, Error, Result};
use crate::rng::RngStream;
use crate::types::{clamp_to_bounds, Bounds, DecisionVector};

/// Exploration coefficient `2 exp(-(4t/T)^2)`.
pub fn c1_schedule(t: usize, max_iterations: usize) -> Result<f64> {
    if max_iterations == 0 {
        return Err(Error::InvalidParameter("iteration budget must be >= 1".into()));
    }
    if t > max_iterations {
        return Err(Error::InvalidParameter(format!(
            "iteration {t} beyond budget {max_iterations}"
        )));
    }
    let r = 4.0 * t as f64 / max_iterations as f64;
    Ok(2.0 * (-r * r).exp())
}

/// Superposition: convex blend of the food-source coordinate and the leader's own.
pub fn superpose(best: f64, own: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")));
    }
    if alpha == 1.0 {
        return Ok(best);
    }
    Ok(alpha * best + (1.0 - alpha) * own)
}

/// Entanglement: rotation-style perturbation `q cos(phi) - beta sin(theta)`.
#[inline]
pub fn entangle(q: f64, phi: f64, theta: f64, beta: f64) -> f64 {
    q * phi.cos() - beta * theta.sin()
}

/// Leader move around food source `food`:
/// `food_j ± c1 * ((upper_j - lower_j) * q_j + lower_j)`, clamped to the bounds.
///
/// With `sign_flip` the sign is negative with probability 1/2, one draw per
/// coordinate; otherwise the offset is always added.
pub fn leader_update(
    food: &[f64],
    q: &[f64],
    c1: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
    sign_flip: bool,
) -> Result<DecisionVector> {
    ensure_len(bounds.dim(), food.len())?;
    ensure_len(bounds.dim(), q.len())?;
    if !(c1 > 0.0) {
        return Err(Error::InvalidParameter(format!("c1 must be positive, got {c1}")));
    }
    let raw: Vec<f64> = (0..food.len())
        .map(|j| {
            let mut offset = c1 * (bounds.range(j) * q[j] + bounds.lower()[j]);
            if sign_flip && rng.random::<bool>() {
                offset = -offset;
            }
            food[j] + offset
        })
        .collect();
    clamp_to_bounds(&raw, bounds)
}

/// Follower move: midpoint of its old position and its updated predecessor.
pub fn follower_update(old: &[f64], predecessor: &[f64]) -> Result<DecisionVector> {
    ensure_len(old.len(), predecessor.len())?;
    DecisionVector::new(
        old.iter()
            .zip(predecessor)
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
    )
}
