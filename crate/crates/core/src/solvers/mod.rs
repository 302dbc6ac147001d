//! Gridded initialization, gradient refinement and estimate scoring.

mod gdls;
mod matching;
mod omp;

pub use gdls::{gdls, GdlsConfig, COLLISION_NUDGE};
pub use matching::{match_frequencies, min_cost_assignment, FrequencyMatch};
pub use omp::{omp, OmpConfig};

use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{ComplexAmplitudes, FrequencyVector, Snapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub frequencies: FrequencyVector,
    pub amplitudes: ComplexAmplitudes,
    pub final_cost: f64,
    pub iterations: usize,
    /// `(iteration, cost)` after every accepted step, when recorded.
    pub trajectory: Option<Vec<(usize, f64)>>,
}

/// OMP on the grid followed by gradient refinement; `sparsity` overrides the
/// value carried by either config.
pub fn estimate(
    y: &Snapshot,
    sparsity: usize,
    omp_cfg: &OmpConfig,
    gdls_cfg: &GdlsConfig,
) -> Result<SolveResult> {
    let init = omp(
        y,
        &OmpConfig {
            sparsity,
            ..*omp_cfg
        },
    )?;
    gdls(
        y,
        &init.frequencies,
        &GdlsConfig {
            sparsity,
            ..*gdls_cfg
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{steering_vector, C64};

    fn defaults(n: usize) -> (OmpConfig, GdlsConfig) {
        (OmpConfig::new(1024, 1), GdlsConfig::for_samples(n, 1))
    }

    #[test]
    fn on_grid_source_matches_omp() {
        let y = Snapshot::new(steering_vector(0.25, 16).iter().map(|v| v * 3.0).collect()).unwrap();
        let (o, g) = defaults(16);
        let init = omp(&y, &o).unwrap();
        let est = estimate(&y, 1, &o, &g).unwrap();
        assert_eq!(est.frequencies, init.frequencies);
    }

    #[test]
    fn off_grid_source_beats_the_grid() {
        let y = Snapshot::new(
            steering_vector(0.2505, 16)
                .iter()
                .map(|v| v * C64::new(0.3, -0.8))
                .collect(),
        )
        .unwrap();
        let (o, g) = defaults(16);
        let init = omp(&y, &o).unwrap();
        let est = estimate(&y, 1, &o, &g).unwrap();
        let err = (est.frequencies.as_slice()[0] - 0.2505).abs();
        assert!(err < 1e-6, "{err}");
        assert!((init.frequencies.as_slice()[0] - 0.2505).abs() >= 4e-4);
        assert!(est.final_cost <= init.final_cost);
    }

    #[test]
    fn deterministic() {
        let y = Snapshot::new(
            steering_vector(0.41, 16)
                .iter()
                .zip(steering_vector(0.77, 16))
                .map(|(a, b)| a * 2.0 + b)
                .collect(),
        )
        .unwrap();
        let (o, g) = defaults(16);
        assert_eq!(estimate(&y, 2, &o, &g).unwrap(), estimate(&y, 2, &o, &g).unwrap());
    }
}
