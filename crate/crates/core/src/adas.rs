//! Synthetic eight-parameter ADAS calibration problem (safety, energy, comfort)
//! and the decision indicators reported for it.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::problems::Problem;
use crate::types::{normalize_front, Bounds, ObjectiveVector, ProblemSpec, Solution};

/// Calibration parameters, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdasParams {
    pub radar_sensitivity: f64,
    pub camera_exposure: f64,
    pub controller_gain: f64,
    pub brake_threshold: f64,
    pub throttle_smoothing: f64,
    pub suspension_damping: f64,
    pub sensor_duty_cycle: f64,
    pub steering_gain: f64,
}

impl AdasParams {
    pub const DIM: usize = 8;

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Bounds::uniform(Self::DIM, 0.0, 1.0)?.check(x)?;
        Ok(Self {
            radar_sensitivity: x[0],
            camera_exposure: x[1],
            controller_gain: x[2],
            brake_threshold: x[3],
            throttle_smoothing: x[4],
            suspension_damping: x[5],
            sensor_duty_cycle: x[6],
            steering_gain: x[7],
        })
    }

    pub fn splat(v: f64) -> Self {
        Self::from_slice(&[v; Self::DIM]).expect("splat value must be in [0, 1]")
    }
}

/// Safety index, energy efficiency metric and comfort performance score, all minimized.
pub fn adas_evaluate(p: &AdasParams) -> ObjectiveVector {
    let sq = |v: f64| v * v;
    let si = 0.5 * sq(1.0 - p.radar_sensitivity * p.sensor_duty_cycle)
        + 0.3 * sq(1.0 - p.brake_threshold)
        + 0.2 * sq(1.0 - p.controller_gain * p.steering_gain);
    let eem = 0.4 * sq(p.radar_sensitivity)
        + 0.3 * sq(p.sensor_duty_cycle)
        + 0.2 * sq(p.controller_gain)
        + 0.1 * sq(1.0 - p.throttle_smoothing);
    let cps = 0.4 * sq(p.controller_gain) * sq(1.0 - p.suspension_damping)
        + 0.3 * sq(p.brake_threshold) * sq(1.0 - p.throttle_smoothing)
        + 0.2 * sq(p.steering_gain) * sq(1.0 - p.suspension_damping)
        + 0.1 * (1.0 - p.camera_exposure) * p.camera_exposure;
    ObjectiveVector::new(vec![si, eem, cps]).expect("finite on the unit cube")
}

/// Response latency proxy. Reported, never optimized.
pub fn system_responsiveness(p: &AdasParams) -> f64 {
    0.5 * (1.0 - p.controller_gain) + 0.3 * p.throttle_smoothing + 0.2 * (1.0 - p.sensor_duty_cycle)
}

#[derive(Debug, Clone)]
pub struct AdasProblem {
    spec: ProblemSpec,
}

impl AdasProblem {
    pub const ID: &'static str = "adas8";

    pub fn new() -> Self {
        Self {
            spec: ProblemSpec {
                id: Self::ID.to_string(),
                dimension: AdasParams::DIM,
                objectives: 3,
                bounds: Bounds::uniform(AdasParams::DIM, 0.0, 1.0).expect("unit cube"),
                has_reference_front: false,
            },
        }
    }
}

impl Default for AdasProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl Problem for AdasProblem {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        Ok(adas_evaluate(&AdasParams::from_slice(x)?))
    }

    /// Every objective stays below 1.2 on the unit cube.
    fn hv_reference_point(&self) -> Option<Vec<f64>> {
        Some(vec![1.2; 3])
    }
}

fn check_weights(w: &[f64], m: usize) -> Result<()> {
    ensure_len(m, w.len())?;
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter(
            "weights must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

fn weighted_sum(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// Index of the member minimizing `max_m w_m * f̃_m` over the normalized front.
///
/// Ties go to the lower weighted sum, then to the lower index.
pub fn knee_point(front: &[Solution], w: &[f64]) -> Result<usize> {
    if front.is_empty() {
        return Err(Error::Empty("archive"));
    }
    let objs: Vec<&[f64]> = front.iter().map(|s| s.f.as_slice()).collect();
    check_weights(w, objs[0].len())?;
    let norm = normalize_front(&objs)?;
    let key = |f: &[f64]| {
        let cheb = w.iter().zip(f).map(|(a, b)| a * b).fold(0.0, f64::max);
        (cheb, weighted_sum(w, f))
    };
    let mut best = 0;
    let mut best_key = key(&norm[0]);
    for (i, f) in norm.iter().enumerate().skip(1) {
        let k = key(f);
        if k.0 < best_key.0 || (k.0 == best_key.0 && k.1 < best_key.1) {
            best = i;
            best_key = k;
        }
    }
    Ok(best)
}

/// Stability of the chosen operating point across feedback events, in percent.
///
/// `history` holds knee objective vectors already normalized to `[0, 1]^M`.
pub fn decision_convergence(history: &[Vec<f64>]) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::InvalidParameter(
            "decision convergence needs at least two knee samples".into(),
        ));
    }
    let m = history[0].len();
    let scale = (m as f64).sqrt();
    let mut total = 0.0;
    for pair in history.windows(2) {
        ensure_len(m, pair[1].len())?;
        let d: f64 = pair[0]
            .iter()
            .zip(&pair[1])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        total += d / scale;
    }
    let mean = total / (history.len() - 1) as f64;
    Ok((100.0 * (1.0 - mean)).clamp(0.0, 100.0))
}

/// How highly the expert's own weighted-sum ranking places `chosen`, in percent.
pub fn expert_alignment(front: &[Solution], chosen: &Solution, w_expert: &[f64]) -> Result<f64> {
    let pos = front
        .iter()
        .position(|s| s.f.bit_eq(&chosen.f) && s.x == chosen.x)
        .ok_or(Error::NotInArchive)?;
    let objs: Vec<&[f64]> = front.iter().map(|s| s.f.as_slice()).collect();
    check_weights(w_expert, objs[0].len())?;
    let scores: Vec<f64> = normalize_front(&objs)?
        .iter()
        .map(|f| weighted_sum(w_expert, f))
        .collect();
    let better = scores.iter().filter(|&&s| s < scores[pos]).count();
    let denom = (front.len() as f64 - 1.0).max(1.0);
    Ok(100.0 * (1.0 - better as f64 / denom))
}

/// Final-run indicators for an ADAS calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdasIndicators {
    pub si: f64,
    pub eem: f64,
    pub cps: f64,
    pub sr: f64,
    pub dc: f64,
    pub efa: f64,
    /// The knee solution the indicators describe.
    pub knee: Solution,
}

impl AdasIndicators {
    /// `knee_history` holds normalized knee vectors sampled at each feedback boundary;
    /// with fewer than two samples DC is reported as 100.
    pub fn compute(
        front: &[Solution],
        weights: &[f64],
        w_expert: &[f64],
        knee_history: &[Vec<f64>],
    ) -> Result<Self> {
        let knee = front[knee_point(front, weights)?].clone();
        let params = AdasParams::from_slice(&knee.x)?;
        let dc = if knee_history.len() >= 2 {
            decision_convergence(knee_history)?
        } else {
            100.0
        };
        Ok(Self {
            si: knee.f[0],
            eem: knee.f[1],
            cps: knee.f[2],
            sr: system_responsiveness(&params),
            dc,
            efa: expert_alignment(front, &knee, w_expert)?,
            knee,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{dominates, DecisionVector};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn sol(f: &[f64]) -> Solution {
        Solution::new(
            DecisionVector::new(vec![0.5; 8]).unwrap(),
            ObjectiveVector::new(f.to_vec()).unwrap(),
        )
    }

    fn sol_x(f: &[f64], tag: f64) -> Solution {
        Solution::new(
            DecisionVector::new(vec![tag; 8]).unwrap(),
            ObjectiveVector::new(f.to_vec()).unwrap(),
        )
    }

    #[test]
    fn evaluate_corners() {
        let f = adas_evaluate(&AdasParams::splat(1.0));
        assert_abs_diff_eq!(f[0], 0.0);
        assert_abs_diff_eq!(f[1], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 0.0);
        let f = adas_evaluate(&AdasParams::splat(0.0));
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 0.0);
    }

    #[test]
    fn out_of_cube_rejected() {
        let p = AdasProblem::new();
        assert!(p.evaluate(&[1.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(p.evaluate(&[0.5; 7]).is_err());
    }

    #[test]
    fn responsiveness_examples() {
        let mut p = AdasParams::splat(0.0);
        p.controller_gain = 1.0;
        p.sensor_duty_cycle = 1.0;
        assert_abs_diff_eq!(system_responsiveness(&p), 0.0);
        let mut p = AdasParams::splat(0.0);
        p.throttle_smoothing = 1.0;
        assert_abs_diff_eq!(system_responsiveness(&p), 1.0, epsilon = 1e-15);

        let a = AdasParams::from_slice(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]).unwrap();
        let b = AdasParams::from_slice(&[0.9, 0.7, 0.5, 0.3, 0.1, 0.0, 1.0, 0.2]).unwrap();
        let mid: Vec<f64> = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
            .iter()
            .zip([0.9, 0.7, 0.5, 0.3, 0.1, 0.0, 1.0, 0.2])
            .map(|(x, y)| (x + y) / 2.0)
            .collect();
        let m = AdasParams::from_slice(&mid).unwrap();
        assert_abs_diff_eq!(
            system_responsiveness(&m),
            (system_responsiveness(&a) + system_responsiveness(&b)) / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn objectives_bounded_and_conflicting() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut best_si = (f64::INFINITY, vec![]);
        let mut best_eem = (f64::INFINITY, vec![]);
        for _ in 0..200_000 {
            let x: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
            let f = adas_evaluate(&AdasParams::from_slice(&x).unwrap());
            assert!(f.iter().all(|v| (0.0..=1.2).contains(v)));
            if f[0] < best_si.0 {
                best_si = (f[0], f.to_vec());
            }
            if f[1] < best_eem.0 {
                best_eem = (f[1], f.to_vec());
            }
        }
        // neither extreme dominates the other, so no point is best at everything
        assert!(!dominates(&best_si.1, &best_eem.1).unwrap());
        assert!(!dominates(&best_eem.1, &best_si.1).unwrap());
    }

    #[test]
    fn knee_examples() {
        let front = vec![sol(&[0.0, 1.0]), sol(&[1.0, 0.0]), sol(&[0.4, 0.4])];
        assert_eq!(knee_point(&front, &[0.5, 0.5]).unwrap(), 2);
        assert_eq!(knee_point(&front, &[1.0, 0.0]).unwrap(), 0);
        assert_eq!(knee_point(&front[2..], &[0.5, 0.5]).unwrap(), 0);
        assert!(knee_point(&[], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn knee_invariant_under_objective_rescale() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let front: Vec<Solution> = (0..20)
                .map(|_| {
                    let a: f64 = rng.random();
                    sol(&[a, 1.0 - a * a + 0.1 * rng.random::<f64>(), rng.random()])
                })
                .collect();
            let w = [0.2, 0.5, 0.3];
            let scaled: Vec<Solution> = front
                .iter()
                .map(|s| sol(&[s.f[0], s.f[1] * 37.5, s.f[2]]))
                .collect();
            assert_eq!(knee_point(&front, &w).unwrap(), knee_point(&scaled, &w).unwrap());
        }
    }

    #[test]
    fn dc_examples() {
        let c = vec![vec![0.3, 0.3]; 4];
        assert_eq!(decision_convergence(&c).unwrap(), 100.0);
        let alt: Vec<Vec<f64>> = (0..6).map(|i| vec![(i % 2) as f64; 3]).collect();
        assert_abs_diff_eq!(decision_convergence(&alt).unwrap(), 0.0, epsilon = 1e-12);
        let h = vec![vec![0.0, 0.0], vec![0.1, 0.1], vec![0.1, 0.1]];
        assert_abs_diff_eq!(decision_convergence(&h).unwrap(), 95.0, epsilon = 1e-12);
        assert!(decision_convergence(&h[..1]).is_err());
    }

    #[test]
    fn efa_examples() {
        let front: Vec<Solution> = (0..11)
            .map(|i| {
                let a = i as f64 / 10.0;
                sol_x(&[a, 1.0 - a], a)
            })
            .collect();
        // expert cares only about f1, so member i has rank i + 1
        let w = [1.0, 0.0];
        assert_eq!(expert_alignment(&front, &front[0], &w).unwrap(), 100.0);
        assert_eq!(expert_alignment(&front, &front[10], &w).unwrap(), 0.0);
        assert_abs_diff_eq!(expert_alignment(&front, &front[5], &w).unwrap(), 50.0);
        let outsider = sol_x(&[0.05, 0.95], 0.05);
        assert!(matches!(
            expert_alignment(&front, &outsider, &w),
            Err(Error::NotInArchive)
        ));
    }

    #[test]
    fn efa_ignores_order_of_other_members() {
        let mut front: Vec<Solution> = (0..9)
            .map(|i| {
                let a = i as f64 / 8.0;
                sol_x(&[a, 1.0 - a.sqrt()], a)
            })
            .collect();
        let chosen = front[3].clone();
        let w = [0.7, 0.3];
        let before = expert_alignment(&front, &chosen, &w).unwrap();
        front.reverse();
        front.swap(0, 7);
        assert_eq!(expert_alignment(&front, &chosen, &w).unwrap(), before);
    }
}
