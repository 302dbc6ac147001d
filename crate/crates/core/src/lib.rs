//! Gridless single-snapshot line-spectrum estimation.
//!
//! A snapshot `y = sum_l c_l a(f_l) + w` is fitted by eliminating the
//! amplitudes through least squares and descending the remaining cost
//! `||y - A A^+ y||^2` over the frequencies, starting from a gridded OMP
//! estimate. The crate is `no_std` and needs only `alloc`.
//!
//! ```
//! use gdls_core::model::{synthesize, ComplexAmplitudes, FrequencyVector};
//! use gdls_core::solvers::{estimate, GdlsConfig, OmpConfig};
//!
//! let truth = FrequencyVector::new(vec![0.2505]).unwrap();
//! let y = synthesize(&truth, &ComplexAmplitudes::from_real(&[1.0]), 16).unwrap();
//! let est = estimate(&y, 1, &OmpConfig::new(1024, 1), &GdlsConfig::for_samples(16, 1)).unwrap();
//! assert!((est.frequencies.as_slice()[0] - 0.2505).abs() < 1e-6);
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod crb;
mod error;
pub mod model;
pub mod objective;
pub mod solvers;

pub use error::{Error, Result};
