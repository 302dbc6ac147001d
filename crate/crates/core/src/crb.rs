//! Deterministic (conditional) Cramér–Rao bound for the frequencies of a
//! sum of complex exponentials in circular white Gaussian noise.
//!
//! With `y ~ CN(A(f) c, s2 I)` and the real parameter vector
//! `[f; Re c; Im c]`, the Fisher information is `(2 / s2) Re(D^H D)`, where
//! the columns of `D` are `c_l da(f_l)/df_l`, `a(f_l)` and `j a(f_l)`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{
    noise_variance, steering_derivative, steering_vector, synthesize, ComplexAmplitudes,
    FrequencyVector, C64,
};

/// Jacobian of the noiseless mean with respect to `[f; Re c; Im c]`.
pub fn mean_jacobian(f: &FrequencyVector, c: &ComplexAmplitudes, n: usize) -> DMatrix<C64> {
    let l = f.len();
    let mut d = DMatrix::zeros(n, 3 * l);
    for (i, (&fl, &cl)) in f.as_slice().iter().zip(c.as_slice()).enumerate() {
        let a = steering_vector(fl, n);
        let da = steering_derivative(fl, n);
        for k in 0..n {
            d[(k, i)] = cl * da[k];
            d[(k, l + i)] = a[k];
            d[(k, 2 * l + i)] = C64::new(0.0, 1.0) * a[k];
        }
    }
    d
}

/// Fisher information from a mean Jacobian at noise variance `sigma2`.
pub fn fisher_from_jacobian(d: &DMatrix<C64>, sigma2: f64) -> DMatrix<f64> {
    (d.adjoint() * d).map(|v| 2.0 * v.re / sigma2)
}

/// Frequency variance bounds at an explicit per-element noise variance.
pub fn crb_with_noise_variance(
    f: &FrequencyVector,
    c: &ComplexAmplitudes,
    n: usize,
    sigma2: f64,
) -> Result<Vec<f64>> {
    if f.len() != c.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            found: c.len(),
        });
    }
    let fisher = fisher_from_jacobian(&mean_jacobian(f, c, n), sigma2);
    let inv = fisher
        .cholesky()
        .ok_or(Error::SingularFisher)?
        .inverse();
    let bounds: Vec<f64> = (0..f.len()).map(|i| inv[(i, i)]).collect();
    if bounds.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::SingularFisher);
    }
    Ok(bounds)
}

/// Per-frequency variance bounds at `snr_db`, with the noise variance set
/// from the noiseless signal energy as in [`crate::model::add_noise`].
pub fn crb_frequencies(
    f: &FrequencyVector,
    c: &ComplexAmplitudes,
    n: usize,
    snr_db: f64,
) -> Result<Vec<f64>> {
    let x = synthesize(f, c, n)?;
    let energy = x.energy();
    if energy == 0.0 {
        return Err(Error::ZeroSignal);
    }
    crb_with_noise_variance(f, c, n, noise_variance(energy, n, snr_db))
}
