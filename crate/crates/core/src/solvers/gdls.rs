use alloc::vec;


use super::SolveResult;
use num_traits::Float;
use crate::error::{Error, Result};
use crate::model::{FrequencyVector, Snapshot};
use crate::objective::{evaluate, ObjectiveEval};

/// Offset applied to colliding frequencies before giving up on a manifold.
pub const COLLISION_NUDGE: f64 = 1e-9;

/// Gradient norm treated as a stationary point.
const STATIONARY_GRADIENT: f64 = 1e-14;

/// Normalized gradient descent with reject-and-decay step control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdlsConfig {
    /// First step length, in cycles per sample.
    pub initial_step: f64,
    pub step_decay: f64,
    pub min_step: f64,
    pub max_iterations: usize,
    pub sparsity: usize,
    pub record_trajectory: bool,
}

impl GdlsConfig {
    /// `initial_step = 0.1 / N`, halving on rejection down to `1e-9`,
    /// at most 5000 iterations.
    pub fn for_samples(n: usize, sparsity: usize) -> Self {
        Self {
            initial_step: 0.1 / n as f64,
            step_decay: 0.5,
            min_step: 1e-9,
            max_iterations: 5000,
            sparsity,
            record_trajectory: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::InvalidConfig("sparsity must be at least 1"));
        }
        if self.sparsity + 1 > n {
            return Err(Error::SparsityBound {
                sparsity: self.sparsity,
                samples: n,
            });
        }
        if !(self.min_step > 0.0 && self.min_step < self.initial_step && self.initial_step.is_finite()) {
            return Err(Error::InvalidConfig("steps must satisfy 0 < min_step < initial_step"));
        }
        if !(self.step_decay > 0.0 && self.step_decay < 1.0) {
            return Err(Error::InvalidConfig("step decay must lie in (0, 1)"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

/// Evaluates the cost, separating coincident frequencies once if the
/// manifold is singular.
fn evaluate_guarded(y: &Snapshot, f: FrequencyVector) -> Result<(FrequencyVector, ObjectiveEval)> {
    match evaluate(y, &f) {
        Ok(e) => Ok((f, e)),
        Err(Error::IllConditionedManifold { .. }) => {
            let mut v = f.into_vec();
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    if crate::model::circular_distance(v[i], v[j]) < 1e-7 {
                        v[j] += COLLISION_NUDGE;
                    }
                }
            }
            let f = FrequencyVector::new(v)?;
            let e = evaluate(y, &f)?;
            Ok((f, e))
        }
        Err(e) => Err(e),
    }
}

/// Refines `f_init` by descending the least-squares cost along the
/// normalized negative gradient. A step is kept only if it strictly lowers
/// the cost; otherwise the step length shrinks by `step_decay`.
pub fn gdls(y: &Snapshot, f_init: &FrequencyVector, cfg: &GdlsConfig) -> Result<SolveResult> {
    let n = y.len();
    cfg.validate(n)?;
    if f_init.len() != cfg.sparsity {
        return Err(Error::LengthMismatch {
            expected: cfg.sparsity,
            found: f_init.len(),
        });
    }
    let (mut f, mut eval) = evaluate_guarded(y, f_init.clone())?;
    let mut trajectory = cfg.record_trajectory.then(|| vec![(0, eval.cost)]);
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let norm = Float::sqrt(eval.gradient.iter().map(|g| g * g).sum::<f64>());
        if norm.is_nan() || norm < STATIONARY_GRADIENT {
            break;
        }
        iterations += 1;
        let candidate = FrequencyVector::new(
            f.as_slice()
                .iter()
                .zip(&eval.gradient)
                .map(|(fl, g)| fl - step * g / norm)
                .collect(),
        )?;
        let (cand_f, cand_eval) = evaluate_guarded(y, candidate)?;
        if cand_eval.cost < eval.cost {
            f = cand_f;
            eval = cand_eval;
            if let Some(t) = trajectory.as_mut() {
                t.push((iterations, eval.cost));
            }
        } else {
            step *= cfg.step_decay;
            if step < cfg.min_step {
                break;
            }
        }
    }
    Ok(SolveResult {
        frequencies: f,
        amplitudes: eval.amplitudes,
        final_cost: eval.cost,
        iterations,
        trajectory,
    })
}
