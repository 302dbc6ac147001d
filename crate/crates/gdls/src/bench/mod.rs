//! Monte-Carlo experiment harnesses: MSE against SNR, resolution, amplitude
//! diversity and runtime scaling. Every sweep point runs its trials in
//! parallel; each trial owns a seed derived from the master seed, the point
//! index and the trial index, so results do not depend on scheduling.

mod csv;

pub use self::csv::{format_float, write_series_csv};

use std::f64::consts::PI;
use std::time::Instant;

use gdls_core::crb::crb_frequencies;
use gdls_core::model::{
    add_noise, circular_distance, synthesize, ComplexAmplitudes, FrequencyVector, Snapshot, C64,
};
use gdls_core::objective::evaluate;
use gdls_core::solvers::{gdls, match_frequencies, omp, GdlsConfig, OmpConfig, SolveResult};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeds::trial_seed;

pub const OMP: &str = "omp";
pub const GDLS: &str = "gdls";
pub const CRB: &str = "crb";
pub const OMP_FAILURES: &str = "omp_failures";
pub const GDLS_FAILURES: &str = "gdls_failures";
pub const GDLS_GRADIENT: &str = "gdls_gradient";
pub const GDLS_ITERATIONS: &str = "gdls_iterations";

/// Signal used where a sweep does not override a parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frequencies: FrequencyVector,
    pub amplitudes: ComplexAmplitudes,
    pub samples: usize,
    pub snr_db: f64,
}

impl Scenario {
    /// Four sources at `[0.35, 0.1, 0.67, 0.92]` with real amplitudes
    /// `[12, 8, 10, 11]`, `N = 16`, 20 dB.
    pub fn reference() -> Self {
        Self {
            frequencies: FrequencyVector::new(vec![0.35, 0.1, 0.67, 0.92]).expect("valid"),
            amplitudes: ComplexAmplitudes::from_real(&[12.0, 8.0, 10.0, 11.0]),
            samples: 16,
            snr_db: 20.0,
        }
    }

    pub fn sparsity(&self) -> usize {
        self.frequencies.len()
    }

    fn mean_magnitude(&self) -> f64 {
        let a = self.amplitudes.as_slice();
        a.iter().map(|c| c.norm()).sum::<f64>() / a.len() as f64
    }
}

/// Solver parameters shared by every trial of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub grid_size: usize,
    /// `None` selects `0.1 / N`.
    pub initial_step: Option<f64>,
    pub step_decay: f64,
    pub min_step: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_size: 1024,
            initial_step: None,
            step_decay: 0.5,
            min_step: 1e-9,
            max_iterations: 5000,
        }
    }
}

impl SolverSettings {
    pub fn omp_config(&self, sparsity: usize) -> OmpConfig {
        OmpConfig::new(self.grid_size, sparsity)
    }

    pub fn gdls_config(&self, samples: usize, sparsity: usize) -> GdlsConfig {
        let mut cfg = GdlsConfig::for_samples(samples, sparsity);
        if let Some(step) = self.initial_step {
            cfg.initial_step = step;
        }
        cfg.step_decay = self.step_decay;
        cfg.min_step = self.min_step;
        cfg.max_iterations = self.max_iterations;
        cfg
    }

    /// OMP followed by refinement; returns both stages.
    pub fn solve(&self, y: &Snapshot, sparsity: usize) -> (Option<SolveResult>, Option<SolveResult>) {
        let Ok(init) = omp(y, &self.omp_config(sparsity)) else {
            return (None, None);
        };
        let refined = gdls(y, &init.frequencies, &self.gdls_config(y.len(), sparsity)).ok();
        (Some(init), refined)
    }
}

/// One swept parameter over a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub variable: String,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base: Scenario,
    pub master_seed: u64,
    pub solver: SolverSettings,
    /// Success when every matched error is below this threshold.
    pub success_threshold: f64,
}

impl ExperimentGrid {
    pub fn new(variable: &str, values: Vec<f64>, trials: usize, base: Scenario, master_seed: u64) -> Self {
        Self {
            variable: variable.to_string(),
            values,
            trials,
            base,
            master_seed,
            solver: SolverSettings::default(),
            success_threshold: 0.005,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::Config("swept values must not be empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("swept values must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord {
    pub swept_value: f64,
    pub method: String,
    pub metric: f64,
    pub trials: usize,
    pub stderr: f64,
}

/// Per-point, per-method metrics of one sweep, plus free-form notes that end
/// up in the CSV metadata header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesResult {
    pub variable: String,
    pub records: Vec<SeriesRecord>,
    pub notes: Vec<(String, String)>,
}

impl SeriesResult {
    fn push(&mut self, swept_value: f64, method: &str, metric: f64, trials: usize, stderr: f64) {
        self.records.push(SeriesRecord {
            swept_value,
            method: method.to_string(),
            metric,
            trials,
            stderr,
        });
    }

    /// Records of one method in sweep order.
    pub fn series(&self, method: &str) -> Vec<&SeriesRecord> {
        self.records.iter().filter(|r| r.method == method).collect()
    }

    pub fn get(&self, method: &str, swept_value: f64) -> Option<&SeriesRecord> {
        self.records
            .iter()
            .find(|r| r.method == method && r.swept_value == swept_value)
    }

    pub fn note(&self, key: &str) -> Option<&str> {
        self.notes
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Mean and standard error of the mean.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn rate_stderr(successes: usize, trials: usize) -> (f64, f64) {
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

fn random_phase(rng: &mut ChaCha8Rng) -> C64 {
    let ph = rng.random::<f64>() * 2.0 * PI;
    C64::new(ph.cos(), ph.sin())
}

/// Per-trial outcome: matched MSE (or success flag) per method, `None` when
/// the solver failed.
struct TrialOutcome {
    omp: Option<(f64, f64)>,
    gdls: Option<(f64, f64)>,
}

fn score(y: &Snapshot, truth: &FrequencyVector, solver: &SolverSettings) -> TrialOutcome {
    let (init, refined) = solver.solve(y, truth.len());
    let summarize = |r: &SolveResult| {
        let m = match_frequencies(&r.frequencies, truth);
        (m.mse, m.max_error)
    };
    TrialOutcome {
        omp: init.as_ref().map(summarize),
        gdls: refined.as_ref().map(summarize),
    }
}

fn push_success_rows(
    out: &mut SeriesResult,
    value: f64,
    outcomes: &[TrialOutcome],
    eps: f64,
) {
    let trials = outcomes.len();
    for (method, failures, pick) in [
        (OMP, OMP_FAILURES, 0usize),
        (GDLS, GDLS_FAILURES, 1usize),
    ] {
        let results: Vec<Option<(f64, f64)>> = outcomes
            .iter()
            .map(|o| if pick == 0 { o.omp } else { o.gdls })
            .collect();
        let ok = results
            .iter()
            .filter(|r| r.is_some_and(|(_, max)| max < eps))
            .count();
        let failed = results.iter().filter(|r| r.is_none()).count();
        let (p, se) = rate_stderr(ok, trials);
        out.push(value, method, p, trials, se);
        let (fp, fse) = rate_stderr(failed, trials);
        out.push(value, failures, fp, trials, fse);
    }
}

/// Matched per-frequency MSE of OMP and the refined estimate against SNR,
/// with the mean per-frequency CRB alongside. Solver errors are excluded
/// from the MSE and counted in the `*_failures` rows.
pub fn mse_vs_snr(grid: &ExperimentGrid) -> Result<SeriesResult> {
    grid.validate()?;
    let base = &grid.base;
    let x = synthesize(&base.frequencies, &base.amplitudes, base.samples)?;
    let mut out = SeriesResult {
        variable: grid.variable.clone(),
        ..Default::default()
    };
    for (p, &snr) in grid.values.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..grid.trials)
            .into_par_iter()
            .map(|t| {
                let y = add_noise(&x, snr, trial_seed(grid.master_seed, p, t))
                    .expect("reference signal is nonzero");
                score(&y, &base.frequencies, &grid.solver)
            })
            .collect();
        for (method, failures, pick) in [(OMP, OMP_FAILURES, 0), (GDLS, GDLS_FAILURES, 1)] {
            let mses: Vec<f64> = outcomes
                .iter()
                .filter_map(|o| if pick == 0 { o.omp } else { o.gdls })
                .map(|(mse, _)| mse)
                .collect();
            let (m, se) = mean_stderr(&mses);
            out.push(snr, method, m, mses.len(), se);
            let (fp, fse) = rate_stderr(grid.trials - mses.len(), grid.trials);
            out.push(snr, failures, fp, grid.trials, fse);
        }
        let crb = crb_frequencies(&base.frequencies, &base.amplitudes, base.samples, snr)?;
        out.push(snr, CRB, crb.iter().sum::<f64>() / crb.len() as f64, grid.trials, 0.0);
    }
    out.notes.push(("mse".into(), "per-frequency mean of matched squared circular errors".into()));
    Ok(out)
}

/// Success rate of two equal-magnitude, random-phase sources against their
/// frequency separation. The first source is uniform on the circle.
pub fn resolution_sweep(grid: &ExperimentGrid) -> Result<SeriesResult> {
    grid.validate()?;
    let base = &grid.base;
    let magnitude = base.mean_magnitude();
    let mut out = SeriesResult {
        variable: grid.variable.clone(),
        ..Default::default()
    };
    for (p, &sep) in grid.values.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..grid.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(grid.master_seed, p, t));
                let f1: f64 = rng.random();
                let truth = FrequencyVector::new(vec![f1, f1 + sep]).expect("finite");
                let amps = ComplexAmplitudes::new(vec![
                    random_phase(&mut rng) * magnitude,
                    random_phase(&mut rng) * magnitude,
                ]);
                let noise_seed = rng.next_u64();
                let x = synthesize(&truth, &amps, base.samples).expect("lengths match");
                match add_noise(&x, base.snr_db, noise_seed) {
                    Ok(y) => score(&y, &truth, &grid.solver),
                    // exact cancellation of the two sources
                    Err(_) => TrialOutcome { omp: None, gdls: None },
                }
            })
            .collect();
        push_success_rows(&mut out, sep, &outcomes, grid.success_threshold);
    }
    out.notes.push(("sources".into(), format!("2, magnitude {magnitude}, uniform phase")));
    Ok(out)
}

/// How amplitudes are phased in [`amplitude_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Zero,
    Random,
}

impl PhaseMode {
    pub fn name(self) -> &'static str {
        match self {
            PhaseMode::Zero => "zero",
            PhaseMode::Random => "random",
        }
    }
}

/// Floor applied to drawn magnitudes, as a fraction of the mean.
pub const MAGNITUDE_FLOOR: f64 = 0.05;

/// Success rate against the spread of source magnitudes. Magnitudes are
/// `mean + std * z`, `z ~ N(0, 1)`, floored at `MAGNITUDE_FLOOR * mean`;
/// frequencies come from the base scenario.
pub fn amplitude_sweep(grid: &ExperimentGrid, mean: f64, phase: PhaseMode) -> Result<SeriesResult> {
    grid.validate()?;
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::Config("amplitude mean must be positive".into()));
    }
    let base = &grid.base;
    let l = base.sparsity();
    let mut out = SeriesResult {
        variable: grid.variable.clone(),
        ..Default::default()
    };
    for (p, &std) in grid.values.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..grid.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(grid.master_seed, p, t));
                let amps: Vec<C64> = (0..l)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        let mag = (mean + std * z).max(MAGNITUDE_FLOOR * mean);
                        match phase {
                            PhaseMode::Zero => C64::new(mag, 0.0),
                            PhaseMode::Random => random_phase(&mut rng) * mag,
                        }
                    })
                    .collect();
                let noise_seed = rng.next_u64();
                let x = synthesize(&base.frequencies, &ComplexAmplitudes::new(amps), base.samples)
                    .expect("lengths match");
                match add_noise(&x, base.snr_db, noise_seed) {
                    Ok(y) => score(&y, &base.frequencies, &grid.solver),
                    Err(_) => TrialOutcome { omp: None, gdls: None },
                }
            })
            .collect();
        push_success_rows(&mut out, std, &outcomes, grid.success_threshold);
    }
    out.notes.push(("amplitude_mean".into(), format!("{mean}")));
    out.notes.push((
        "amplitude_law".into(),
        format!("max(mean + std * N(0,1), {MAGNITUDE_FLOOR} * mean)"),
    ));
    out.notes.push(("phase_mode".into(), phase.name().into()));
    Ok(out)
}

/// Draws `l` frequencies uniformly on the circle with pairwise separation
/// of at least `min_sep`.
pub fn draw_separated(rng: &mut ChaCha8Rng, l: usize, min_sep: f64) -> FrequencyVector {
    loop {
        let mut f: Vec<f64> = Vec::with_capacity(l);
        let mut tries = 0;
        while f.len() < l && tries < 1000 {
            tries += 1;
            let c: f64 = rng.random();
            if f.iter().all(|&o| circular_distance(o, c) >= min_sep) {
                f.push(c);
            }
        }
        if f.len() == l {
            return FrequencyVector::new(f).expect("finite");
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Wall-clock of `f`, repeated until at least `min_total` seconds elapse;
/// returns seconds per call.
fn time_per_call(mut f: impl FnMut(), min_total: f64) -> f64 {
    let mut reps = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            f();
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= min_total || reps >= 1 << 20 {
            return elapsed / reps as f64;
        }
        reps *= 2;
    }
}

/// Wall-clock cost against the number of samples `N`. Each trial draws a
/// fresh signal (base magnitudes, random phases, separation at least
/// `2 / (N - 1)`), then times OMP, OMP plus refinement, and one cost and
/// gradient evaluation. Slopes of the log-log curves go in the notes.
pub fn runtime_sweep(grid: &ExperimentGrid) -> Result<SeriesResult> {
    grid.validate()?;
    let base = &grid.base;
    let l = base.sparsity();
    let mut out = SeriesResult {
        variable: grid.variable.clone(),
        ..Default::default()
    };
    let mut sizes = Vec::new();
    for &v in &grid.values {
        let n = v as usize;
        if n as f64 != v || n < l + 1 {
            return Err(Error::Config(format!("invalid sample count {v} for L = {l}")));
        }
        sizes.push(n);
    }
    let mut means: [Vec<f64>; 3] = Default::default();
    for (p, &n) in sizes.iter().enumerate() {
        let timings: Vec<Option<(f64, f64, f64, usize)>> = (0..grid.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(grid.master_seed, p, t));
                let truth = draw_separated(&mut rng, l, 2.0 / (n as f64 - 1.0));
                let amps = ComplexAmplitudes::new(
                    base.amplitudes
                        .as_slice()
                        .iter()
                        .map(|c| random_phase(&mut rng) * c.norm())
                        .collect(),
                );
                let noise_seed = rng.next_u64();
                let x = synthesize(&truth, &amps, n).ok()?;
                let y = add_noise(&x, base.snr_db, noise_seed).ok()?;
                let ocfg = grid.solver.omp_config(l);
                let gcfg = grid.solver.gdls_config(n, l);

                let start = Instant::now();
                let init = omp(&y, &ocfg).ok()?;
                let t_omp = start.elapsed().as_secs_f64();
                let start = Instant::now();
                let refined = gdls(&y, &init.frequencies, &gcfg).ok()?;
                let t_total = t_omp + start.elapsed().as_secs_f64();
                let f = refined.frequencies.clone();
                let t_grad = time_per_call(
                    || {
                        std::hint::black_box(evaluate(&y, &f).ok());
                    },
                    2e-3,
                );
                Some((t_omp, t_total, t_grad, refined.iterations))
            })
            .collect();
        let ok: Vec<(f64, f64, f64, usize)> = timings.iter().flatten().copied().collect();
        let cols = [
            ok.iter().map(|t| t.0).collect::<Vec<_>>(),
            ok.iter().map(|t| t.1).collect::<Vec<_>>(),
            ok.iter().map(|t| t.2).collect::<Vec<_>>(),
        ];
        for (i, method) in [OMP, GDLS, GDLS_GRADIENT].into_iter().enumerate() {
            let (m, se) = mean_stderr(&cols[i]);
            out.push(n as f64, method, m, ok.len(), se);
            means[i].push(m);
        }
        let iters: Vec<f64> = ok.iter().map(|t| t.3 as f64).collect();
        let (m, se) = mean_stderr(&iters);
        out.push(n as f64, GDLS_ITERATIONS, m, ok.len(), se);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    if xs.len() >= 2 {
        for (i, key) in ["slope_omp", "slope_gdls", "slope_gdls_gradient"].iter().enumerate() {
            out.notes.push((key.to_string(), format_float(log_log_slope(&xs, &means[i]))));
        }
    }
    out.notes.push(("timing".into(), "wall-clock seconds; not reproducible byte for byte".into()));
    Ok(out)
}
