//! Elevation inversion over a multi-baseline stack.
//!
//! The simulated scene is a rectangular building on flat ground seen in
//! side-looking geometry. In the range/height plane a point at ground range
//! `y` and height `z` lands at slant-range offset `rho = y sin(theta) -
//! z cos(theta)`. The facade sits at `y = 0` facing the sensor and the roof
//! spans `y` in `[0, width]` at the building height, so cells with
//! `rho` in `[-H cos(theta), 0)` mix ground, facade and roof returns. A
//! scatterer's elevation is its height above ground.

use std::f64::consts::PI;

use gdls_core::model::{
    add_noise, elevation_to_frequency, frequency_to_elevation, synthesize, ComplexAmplitudes,
    FrequencyVector, Snapshot, TomoGeometry, C64,
};
use gdls_core::solvers::{gdls, min_cost_assignment, omp, SolveResult};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bench::SolverSettings;
use crate::error::{Error, Result};
use crate::seeds::trial_seed;

/// Rectangular building; `height_m = 0` means bare ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildingSpec {
    pub height_m: f64,
    /// Roof depth along ground range.
    pub width_m: f64,
    /// Azimuth interval `[azimuth_start_m, azimuth_start_m + length_m)`.
    pub azimuth_start_m: f64,
    pub length_m: f64,
}

impl BuildingSpec {
    pub fn reference() -> Self {
        Self {
            height_m: 50.0,
            width_m: 60.0,
            azimuth_start_m: 0.0,
            length_m: 20.0,
        }
    }

    pub fn bare_ground() -> Self {
        Self {
            height_m: 0.0,
            ..Self::reference()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(self.height_m) && ok(self.width_m) && ok(self.length_m) && self.azimuth_start_m.is_finite()) {
            return Err(Error::Config("building dimensions must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Rectangular range/azimuth raster; cell `(row, col)` is centered at
/// slant-range offset `range_start_m + (row + 1/2) range_spacing_m` and
/// azimuth `azimuth_start_m + (col + 1/2) azimuth_spacing_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid {
    pub rows: usize,
    pub cols: usize,
    pub range_start_m: f64,
    pub range_spacing_m: f64,
    pub azimuth_start_m: f64,
    pub azimuth_spacing_m: f64,
}

impl CellGrid {
    /// `rows x cols` cells spanning about 5 m of bare ground before the
    /// layover to the far roof edge, 1 m azimuth spacing. Cell edges fall on
    /// the facade foot and top, so the layover band holds a whole number of
    /// cells and facade samples sit at half-cell heights.
    pub fn covering(building: &BuildingSpec, geometry: &TomoGeometry, rows: usize, cols: usize) -> Self {
        let (sin, cos) = geometry.incident_angle_rad.sin_cos();
        let layover = building.height_m * cos;
        let end = (building.width_m * sin - layover).max(1.0);
        let nominal = (layover + 5.0 + end) / rows.max(1) as f64;
        let (start, spacing) = if layover > 0.0 && rows >= 3 {
            let k = ((layover / nominal).round() as usize).clamp(1, rows - 2);
            let spacing = layover / k as f64;
            let ground = ((5.0 / spacing).ceil() as usize).clamp(1, rows - k - 1);
            (-layover - ground as f64 * spacing, spacing)
        } else {
            (-layover - 5.0, nominal)
        };
        Self {
            rows,
            cols,
            range_start_m: start,
            range_spacing_m: spacing,
            azimuth_start_m: building.azimuth_start_m,
            azimuth_spacing_m: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range_m(&self, row: usize) -> f64 {
        self.range_start_m + (row as f64 + 0.5) * self.range_spacing_m
    }

    pub fn azimuth_m(&self, col: usize) -> f64 {
        self.azimuth_start_m + (col as f64 + 0.5) * self.azimuth_spacing_m
    }

    /// `(row, col)` of a row-major cell index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config("cell grid must have at least one row and column".into()));
        }
        if !(self.range_spacing_m > 0.0 && self.azimuth_spacing_m > 0.0) {
            return Err(Error::Config("cell spacing must be positive".into()));
        }
        if !(self.range_start_m.is_finite() && self.azimuth_start_m.is_finite()) {
            return Err(Error::Config("cell grid origin must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScattererKind {
    Ground,
    Facade,
    Roof,
}

impl ScattererKind {
    pub fn name(self) -> &'static str {
        match self {
            ScattererKind::Ground => "ground",
            ScattererKind::Facade => "facade",
            ScattererKind::Roof => "roof",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ground" => Some(ScattererKind::Ground),
            "facade" => Some(ScattererKind::Facade),
            "roof" => Some(ScattererKind::Roof),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub elevation_m: f64,
    pub reflectivity: C64,
    pub kind: ScattererKind,
}

/// Ground truth: scatterers of every cell in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct TomoScene {
    pub geometry: TomoGeometry,
    pub grid: CellGrid,
    pub building: BuildingSpec,
    pub cells: Vec<Vec<Scatterer>>,
}

impl TomoScene {
    pub fn cell(&self, row: usize, col: usize) -> &[Scatterer] {
        &self.cells[row * self.grid.cols + col]
    }

    /// Number of scatterers in each cell, row-major.
    pub fn sparsity(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// Cells holding more than one scatterer.
    pub fn layover_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.len() > 1).count()
    }
}

/// One snapshot per cell, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TomoStack {
    pub geometry: TomoGeometry,
    pub grid: CellGrid,
    /// `None` for a noiseless stack.
    pub snr_db: Option<f64>,
    pub cells: Vec<Snapshot>,
}

impl TomoStack {
    pub fn validate(&self) -> Result<()> {
        if self.cells.len() != self.grid.len() {
            return Err(Error::Config(format!(
                "stack holds {} cells, grid expects {}",
                self.cells.len(),
                self.grid.len()
            )));
        }
        let n = self.geometry.num_baselines;
        if let Some(bad) = self.cells.iter().find(|s| s.len() != n) {
            return Err(Error::Config(format!(
                "cell snapshot has {} samples, geometry has {n} baselines",
                bad.len()
            )));
        }
        Ok(())
    }

    /// Every snapshot multiplied by `k`.
    pub fn scaled(&self, k: C64) -> Self {
        Self {
            cells: self.cells.iter().map(|s| s.scaled(k)).collect(),
            ..self.clone()
        }
    }
}

/// Layover contributors of a cell centered at slant-range offset `rho`.
fn contributors(rho: f64, azimuth: f64, b: &BuildingSpec, g: &TomoGeometry) -> Vec<(ScattererKind, f64)> {
    let (sin, cos) = g.incident_angle_rad.sin_cos();
    let inside = azimuth >= b.azimuth_start_m && azimuth < b.azimuth_start_m + b.length_m;
    if b.height_m == 0.0 || !inside {
        return vec![(ScattererKind::Ground, 0.0)];
    }
    let h = b.height_m;
    let mut out = Vec::with_capacity(3);
    if rho < 0.0 {
        out.push((ScattererKind::Ground, 0.0));
    }
    let facade = -rho / cos;
    if (0.0..=h).contains(&facade) {
        out.push((ScattererKind::Facade, facade));
    }
    let roof_y = (rho + h * cos) / sin;
    if (0.0..=b.width_m).contains(&roof_y) {
        out.push((ScattererKind::Roof, h));
    }
    if out.is_empty() {
        // past the roof edge; shadowing is not modeled
        out.push((ScattererKind::Ground, 0.0));
    }
    out
}

/// Generates the building scene and its per-cell stack.
///
/// Every scatterer has unit magnitude and a uniform random phase; each cell
/// draws phases and noise from its own seed. `snr_db = None` produces a
/// noiseless stack. Fails before any synthesis if the building does not fit
/// in one ambiguity span or a cell would exceed `N - 1` scatterers.
pub fn simulate_scene(
    geometry: &TomoGeometry,
    building: &BuildingSpec,
    grid: &CellGrid,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<(TomoScene, TomoStack)> {
    let geometry = TomoGeometry::new(
        geometry.wavelength_m,
        geometry.baseline_spacing_m,
        geometry.range_m,
        geometry.num_baselines,
        geometry.incident_angle_rad,
    )?;
    building.validate()?;
    grid.validate()?;
    let span = geometry.ambiguity_span();
    if building.height_m >= span {
        return Err(Error::Config(format!(
            "building height {} m is not below the ambiguity span {span:.4} m",
            building.height_m
        )));
    }
    if geometry.num_baselines < 4 && building.height_m > 0.0 {
        return Err(Error::Config(format!(
            "{} baselines cannot resolve three layover contributors",
            geometry.num_baselines
        )));
    }
    if let Some(s) = snr_db {
        if s.is_nan() {
            return Err(Error::Config("snr_db must be a number".into()));
        }
    }
    let n = geometry.num_baselines;
    let cells: Vec<(Vec<Scatterer>, Snapshot)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (row, col) = grid.position(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, row, col));
            let scatterers: Vec<Scatterer> = contributors(grid.range_m(row), grid.azimuth_m(col), building, &geometry)
                .into_iter()
                .map(|(kind, s)| {
                    let ph = rng.random::<f64>() * 2.0 * PI;
                    Scatterer {
                        elevation_m: frequency_to_elevation(elevation_to_frequency(s, &geometry), &geometry),
                        reflectivity: C64::new(ph.cos(), ph.sin()),
                        kind,
                    }
                })
                .collect();
            let noise_seed = rng.next_u64();
            let f = FrequencyVector::new(
                scatterers
                    .iter()
                    .map(|s| elevation_to_frequency(s.elevation_m, &geometry))
                    .collect(),
            )?;
            let c = ComplexAmplitudes::new(scatterers.iter().map(|s| s.reflectivity).collect());
            let x = synthesize(&f, &c, n)?;
            let y = match snr_db {
                Some(snr) => add_noise(&x, snr, noise_seed)?,
                None => x,
            };
            Ok((scatterers, y))
        })
        .collect::<Result<_>>()?;
    let (truth, snapshots): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    Ok((
        TomoScene {
            geometry,
            grid: *grid,
            building: *building,
            cells: truth,
        },
        TomoStack {
            geometry,
            grid: *grid,
            snr_db,
            cells: snapshots,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Omp,
    Gdls,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Omp => "omp",
            Method::Gdls => "gdls",
        }
    }
}

/// Number of scatterers sought in each cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Sparsity {
    Uniform(usize),
    /// Row-major, one entry per cell.
    PerCell(Vec<usize>),
}

impl Sparsity {
    fn at(&self, index: usize) -> usize {
        match self {
            Sparsity::Uniform(l) => *l,
            Sparsity::PerCell(v) => v[index],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub range_m: f64,
    pub azimuth_m: f64,
    pub elevation_m: f64,
    pub amplitude: C64,
    pub row: usize,
    pub col: usize,
}

/// Estimated scatterers, ordered by cell (row-major) then ascending
/// elevation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
}

impl PointCloud {
    /// Elevations of each cell, row-major.
    pub fn elevations_by_cell(&self, grid: &CellGrid) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); grid.len()];
        for p in &self.points {
            out[p.row * grid.cols + p.col].push(p.elevation_m);
        }
        out
    }

    fn canonicalize(&mut self) {
        self.points.sort_by(|a, b| {
            (a.row, a.col)
                .cmp(&(b.row, b.col))
                .then(a.elevation_m.total_cmp(&b.elevation_m))
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedCell {
    pub row: usize,
    pub col: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InversionReport {
    pub cells: usize,
    pub dropped: Vec<DroppedCell>,
}

fn solve_cell(y: &Snapshot, l: usize, method: Method, settings: &SolverSettings) -> gdls_core::Result<SolveResult> {
    let init = omp(y, &settings.omp_config(l))?;
    match method {
        Method::Omp => Ok(init),
        Method::Gdls => gdls(y, &init.frequencies, &settings.gdls_config(y.len(), l)),
    }
}

/// Inverts every cell of `stack` in parallel. Per-cell solver failures are
/// listed in the report and contribute no points.
pub fn invert_stack(
    stack: &TomoStack,
    method: Method,
    sparsity: &Sparsity,
    settings: &SolverSettings,
) -> Result<(PointCloud, InversionReport)> {
    let order: Vec<usize> = (0..stack.grid.len()).collect();
    invert_stack_in_order(stack, method, sparsity, settings, &order)
}

/// [`invert_stack`] scheduling cells in the given order; the result is
/// independent of `order`.
pub fn invert_stack_in_order(
    stack: &TomoStack,
    method: Method,
    sparsity: &Sparsity,
    settings: &SolverSettings,
    order: &[usize],
) -> Result<(PointCloud, InversionReport)> {
    stack.validate()?;
    let grid = &stack.grid;
    let n = stack.geometry.num_baselines;
    if let Sparsity::PerCell(v) = sparsity {
        if v.len() != grid.len() {
            return Err(Error::Config(format!(
                "per-cell sparsity lists {} cells, stack has {}",
                v.len(),
                grid.len()
            )));
        }
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..grid.len()).collect::<Vec<_>>() {
        return Err(Error::Config("cell order must be a permutation of the stack cells".into()));
    }
    let max_l = (0..grid.len()).map(|i| sparsity.at(i)).max().unwrap_or(0);
    if max_l > n - 1 {
        return Err(gdls_core::Error::SparsityBound {
            sparsity: max_l,
            samples: n,
        }
        .into());
    }
    settings.omp_config(max_l.max(1)).validate(n)?;
    settings.gdls_config(n, max_l.max(1)).validate(n)?;

    type CellOutcome = std::result::Result<Vec<CloudPoint>, DroppedCell>;
    let outcomes: Vec<(usize, CellOutcome)> = order
        .par_iter()
        .map(|&idx| {
            let (row, col) = grid.position(idx);
            let l = sparsity.at(idx);
            if l == 0 {
                return (idx, Ok(Vec::new()));
            }
            let outcome = solve_cell(&stack.cells[idx], l, method, settings)
                .map(|r| {
                    r.frequencies
                        .as_slice()
                        .iter()
                        .zip(r.amplitudes.as_slice())
                        .map(|(&f, &c)| CloudPoint {
                            range_m: grid.range_m(row),
                            azimuth_m: grid.azimuth_m(col),
                            elevation_m: frequency_to_elevation(f, &stack.geometry),
                            amplitude: c,
                            row,
                            col,
                        })
                        .collect()
                })
                .map_err(|e| DroppedCell {
                    row,
                    col,
                    reason: e.to_string(),
                });
            (idx, outcome)
        })
        .collect();

    let mut cloud = PointCloud::default();
    let mut report = InversionReport {
        cells: grid.len(),
        dropped: Vec::new(),
    };
    for (_, outcome) in outcomes {
        match outcome {
            Ok(points) => cloud.points.extend(points),
            Err(d) => report.dropped.push(d),
        }
    }
    cloud.canonicalize();
    report.dropped.sort_by_key(|d| (d.row, d.col));
    Ok((cloud, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellScore {
    pub row: usize,
    pub col: usize,
    /// Signed-free circular elevation errors of the matched pairs, meters.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub rmse_m: f64,
    pub matched_pairs: usize,
    pub cells: Vec<CellScore>,
    /// Cells with true scatterers but no estimate.
    pub dropped_cells: usize,
}

impl ScoreReport {
    /// Fraction of scored cells whose largest matched error is below `tol`.
    pub fn fraction_within(&self, tol: f64) -> f64 {
        let scored: Vec<&CellScore> = self.cells.iter().filter(|c| !c.errors.is_empty()).collect();
        let ok = scored
            .iter()
            .filter(|c| c.errors.iter().all(|&e| e < tol))
            .count();
        ok as f64 / scored.len().max(1) as f64
    }
}

/// Circular distance on `[0, span)`.
fn wrapped_distance(a: f64, b: f64, span: f64) -> f64 {
    let d = (a - b).rem_euclid(span);
    d.min(span - d)
}

/// Pairs estimates with true scatterers in every cell (minimum total squared
/// circular elevation error) and pools the RMSE over all matched pairs.
/// Surplus estimates or truths in a cell stay unmatched.
pub fn score_cloud(est: &PointCloud, truth: &TomoScene) -> Result<ScoreReport> {
    let grid = &truth.grid;
    if let Some(p) = est.points.iter().find(|p| p.row >= grid.rows || p.col >= grid.cols) {
        return Err(Error::Config(format!(
            "point cell ({}, {}) lies outside the {}x{} scene grid",
            p.row, p.col, grid.rows, grid.cols
        )));
    }
    let span = truth.geometry.ambiguity_span();
    let by_cell = est.elevations_by_cell(grid);
    let mut cells = Vec::with_capacity(grid.len());
    let mut dropped = 0;
    let mut sum_sq = 0.0;
    let mut pairs = 0;
    for (idx, (e, t)) in by_cell.iter().zip(&truth.cells).enumerate() {
        let (row, col) = grid.position(idx);
        if e.is_empty() && !t.is_empty() {
            dropped += 1;
        }
        let k = e.len().max(t.len());
        let mut cost = vec![0.0; k * k];
        for (i, tv) in t.iter().enumerate() {
            for (j, ev) in e.iter().enumerate() {
                cost[i * k + j] = wrapped_distance(tv.elevation_m, *ev, span).powi(2);
            }
        }
        let assign = if k > 0 { min_cost_assignment(&cost, k) } else { Vec::new() };
        let errors: Vec<f64> = (0..t.len())
            .filter(|&i| assign[i] < e.len())
            .map(|i| wrapped_distance(t[i].elevation_m, e[assign[i]], span))
            .collect();
        sum_sq += errors.iter().map(|x| x * x).sum::<f64>();
        pairs += errors.len();
        cells.push(CellScore { row, col, errors });
    }
    let rmse_m = if pairs == 0 { 0.0 } else { (sum_sq / pairs as f64).sqrt() };
    Ok(ScoreReport {
        rmse_m,
        matched_pairs: pairs,
        cells,
        dropped_cells: dropped,
    })
}
