//! Signal model: frequencies on the unit torus, steering vectors, the array
//! manifold, snapshot synthesis with complex Gaussian noise, and the mappings
//! from physical quantities (arrival angle, elevation) to normalized frequency.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Euclid, Float};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Reduces `f` to `[0, 1)`.
pub fn wrap_unit(f: f64) -> f64 {
    let r = Euclid::rem_euclid(&f, &1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two normalized frequencies on the unit circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (wrap_unit(a) - wrap_unit(b)).abs();
    d.min(1.0 - d)
}

/// Normalized frequencies `f_1..f_L`, each stored wrapped to `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyFrequencies);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frequency vector"));
        }
        Ok(Self(values.into_iter().map(wrap_unit).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Smallest pairwise circular distance, `None` for a single frequency.
    pub fn min_separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, &a) in self.0.iter().enumerate() {
            for &b in &self.0[i + 1..] {
                let d = circular_distance(a, b);
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
        best
    }
}

/// Complex amplitudes `c_1..c_L` paired with a [`FrequencyVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAmplitudes(Vec<C64>);

impl ComplexAmplitudes {
    pub fn new(values: Vec<C64>) -> Self {
        Self(values)
    }

    /// Real, zero-phase amplitudes.
    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }
}

/// One measurement vector `y` of `N >= 2` complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot(Vec<C64>);

impl Snapshot {
    pub fn new(samples: Vec<C64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::SnapshotTooShort(samples.len()));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::NonFinite("snapshot"));
        }
        Ok(Self(samples))
    }

    pub fn samples(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    /// `||y||^2`
    pub fn energy(&self) -> f64 {
        self.0.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Multiplies every sample by `k`.
    pub fn scaled(&self, k: C64) -> Self {
        Self(self.0.iter().map(|&s| s * k).collect())
    }
}

/// `N x L` matrix of steering vectors, `A = [a(f_1) ... a(f_L)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    columns: DMatrix<C64>,
    source_freqs: FrequencyVector,
}

impl Manifold {
    pub fn columns(&self) -> &DMatrix<C64> {
        &self.columns
    }

    pub fn source_freqs(&self) -> &FrequencyVector {
        &self.source_freqs
    }

    pub fn num_samples(&self) -> usize {
        self.columns.nrows()
    }

    pub fn num_sources(&self) -> usize {
        self.columns.ncols()
    }

    /// `A^H A`
    pub fn gram(&self) -> DMatrix<C64> {
        self.columns.adjoint() * &self.columns
    }
}

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaGeometry {
    pub element_spacing_m: f64,
    pub wavelength_m: f64,
    pub num_elements: usize,
}

impl UlaGeometry {
    pub fn new(element_spacing_m: f64, wavelength_m: f64, num_elements: usize) -> Result<Self> {
        if !(element_spacing_m > 0.0 && element_spacing_m.is_finite()) {
            return Err(Error::InvalidGeometry("element spacing must be positive"));
        }
        if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
            return Err(Error::InvalidGeometry("wavelength must be positive"));
        }
        Ok(Self {
            element_spacing_m,
            wavelength_m,
            num_elements,
        })
    }
}

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Multi-baseline acquisition geometry with evenly spaced baselines
/// `b_n = n * b`, `n = 0..N-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomoGeometry {
    pub wavelength_m: f64,
    pub baseline_spacing_m: f64,
    pub range_m: f64,
    pub num_baselines: usize,
    pub incident_angle_rad: f64,
}

impl TomoGeometry {
    pub fn new(
        wavelength_m: f64,
        baseline_spacing_m: f64,
        range_m: f64,
        num_baselines: usize,
        incident_angle_rad: f64,
    ) -> Result<Self> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(wavelength_m) {
            return Err(Error::InvalidGeometry("wavelength must be positive"));
        }
        if !positive(baseline_spacing_m) {
            return Err(Error::InvalidGeometry("baseline spacing must be positive"));
        }
        if !positive(range_m) {
            return Err(Error::InvalidGeometry("range must be positive"));
        }
        if num_baselines < 2 {
            return Err(Error::InvalidGeometry("at least two baselines are required"));
        }
        if !(positive(incident_angle_rad) && incident_angle_rad < PI / 2.0) {
            return Err(Error::InvalidGeometry("incident angle must lie in (0, pi/2)"));
        }
        Ok(Self {
            wavelength_m,
            baseline_spacing_m,
            range_m,
            num_baselines,
            incident_angle_rad,
        })
    }

    /// Ku-band airborne array: 14.25 GHz carrier, 8 baselines spaced 0.084 m,
    /// 500 m range, 45 degree incidence.
    pub fn ku_band_reference() -> Self {
        Self {
            wavelength_m: SPEED_OF_LIGHT / 14.25e9,
            baseline_spacing_m: 0.084,
            range_m: 500.0,
            num_baselines: 8,
            incident_angle_rad: PI / 4.0,
        }
    }

    /// Unambiguous elevation extent `lambda * R0 / (2 b)` in meters.
    pub fn ambiguity_span(&self) -> f64 {
        self.wavelength_m * self.range_m / (2.0 * self.baseline_spacing_m)
    }
}

#[inline]
fn unit_phasor(cycles: f64) -> C64 {
    let phase = 2.0 * PI * wrap_unit(cycles);
    C64::new(Float::cos(phase), Float::sin(phase))
}

/// `a(f) = [1, e^{j2 pi f}, ..., e^{j2 pi (n-1) f}]`.
pub fn steering_vector(f: f64, n: usize) -> Vec<C64> {
    let f = wrap_unit(f);
    (0..n).map(|k| unit_phasor(k as f64 * f)).collect()
}

/// `da(f)/df`, entry `k` equal to `j 2 pi k e^{j 2 pi k f}`.
pub fn steering_derivative(f: f64, n: usize) -> Vec<C64> {
    let f = wrap_unit(f);
    (0..n)
        .map(|k| {
            let scale = 2.0 * PI * k as f64;
            unit_phasor(k as f64 * f) * C64::new(0.0, scale)
        })
        .collect()
}

pub fn build_manifold(f: &FrequencyVector, n: usize) -> Manifold {
    let mut columns = DMatrix::zeros(n, f.len());
    for (l, &fl) in f.as_slice().iter().enumerate() {
        for (k, v) in steering_vector(fl, n).into_iter().enumerate() {
            columns[(k, l)] = v;
        }
    }
    Manifold {
        columns,
        source_freqs: f.clone(),
    }
}

/// Noiseless mixture `x = A c`.
pub fn synthesize(f: &FrequencyVector, c: &ComplexAmplitudes, n: usize) -> Result<Snapshot> {
    if f.len() != c.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            found: c.len(),
        });
    }
    let mut x = alloc::vec![C64::new(0.0, 0.0); n];
    for (&fl, &cl) in f.as_slice().iter().zip(c.as_slice()) {
        for (xk, ak) in x.iter_mut().zip(steering_vector(fl, n)) {
            *xk += cl * ak;
        }
    }
    Snapshot::new(x)
}

/// Per-element noise variance `||x||^2 / (N 10^{snr/10})`.
pub fn noise_variance(signal_energy: f64, n: usize, snr_db: f64) -> f64 {
    signal_energy / (n as f64 * Float::powf(10f64, snr_db / 10.0))
}

/// Adds circularly-symmetric complex white Gaussian noise at `snr_db`.
///
/// Real and imaginary parts each carry half the per-element variance. The
/// noise stream is a pure function of `rng_seed`. `snr_db = +inf` returns
/// `x` unchanged.
pub fn add_noise(x: &Snapshot, snr_db: f64, rng_seed: u64) -> Result<Snapshot> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::NonFinite("snr_db"));
    }
    let energy = x.energy();
    if energy == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let sigma2 = noise_variance(energy, x.len(), snr_db);
    let scale = Float::sqrt(sigma2 / 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let y = x
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + C64::new(re, im) * scale
        })
        .collect();
    Snapshot::new(y)
}

/// `(d / lambda) cos(theta)`, wrapped to `[0, 1)`.
pub fn doa_to_frequency(theta_rad: f64, g: &UlaGeometry) -> f64 {
    wrap_unit(g.element_spacing_m / g.wavelength_m * Float::cos(theta_rad))
}

/// `2 b s / (lambda R0)`, wrapped to `[0, 1)`.
pub fn elevation_to_frequency(s_m: f64, g: &TomoGeometry) -> f64 {
    wrap_unit(s_m / g.ambiguity_span())
}

/// Inverse of [`elevation_to_frequency`] onto `[0, ambiguity span)`.
pub fn frequency_to_elevation(f: f64, g: &TomoGeometry) -> f64 {
    let span = g.ambiguity_span();
    let s = wrap_unit(f) * span;
    if s >= span {
        0.0
    } else {
        s
    }
}
