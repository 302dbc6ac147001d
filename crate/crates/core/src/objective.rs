//! Least-squares cost over frequencies with the amplitudes eliminated:
//! `T(f) = ||y - A A^+ y||^2 = ||y||^2 - y^H P_A y`, and its analytic gradient.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{
    build_manifold, ComplexAmplitudes, FrequencyVector, Manifold, Snapshot,
    C64,
};

/// Smallest admissible ratio of extreme singular values of the manifold.
pub const CONDITION_THRESHOLD: f64 = 1e-10;

/// Value, gradient and least-squares byproducts of the cost at one `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEval {
    pub cost: f64,
    pub gradient: Vec<f64>,
    pub amplitudes: ComplexAmplitudes,
    pub residual: Snapshot,
}

/// Thin factorization `A = Q R` with orthonormal `Q`. The singular values of
/// the small triangle `R` equal those of `A` and drive the conditioning test.
pub(crate) struct Factored {
    u: DMatrix<C64>,
    r: DMatrix<C64>,
}

impl Factored {
    pub(crate) fn new(a: &Manifold) -> Result<Self> {
        let qr = a.columns().clone().qr();
        let (u, r) = (qr.q(), qr.r());
        let singular = r.singular_values();
        let max = singular.iter().cloned().fold(0.0, f64::max);
        let min = singular.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        if ratio.is_nan() || ratio < CONDITION_THRESHOLD {
            return Err(Error::IllConditionedManifold { ratio });
        }
        Ok(Self { u, r })
    }

    /// `A^+ y = R^{-1} Q^H y`
    pub(crate) fn pinv_apply(&self, y: &DVector<C64>) -> DVector<C64> {
        let w = self.u.adjoint() * y;
        self.r
            .solve_upper_triangular(&w)
            .expect("conditioning checked at construction")
    }

    /// `A^+ = R^{-1} Q^H` as an `L x N` matrix.
    pub(crate) fn pinv(&self) -> DMatrix<C64> {
        self.r
            .solve_upper_triangular(&self.u.adjoint())
            .expect("conditioning checked at construction")
    }

    /// `P_A = U U^H`
    pub(crate) fn projector(&self) -> DMatrix<C64> {
        &self.u * self.u.adjoint()
    }

    /// `(I - P_A) y` without forming the projector.
    pub(crate) fn reject(&self, y: &DVector<C64>) -> DVector<C64> {
        y - &self.u * (self.u.adjoint() * y)
    }
}

fn check_dimensions(y: &Snapshot, f: &FrequencyVector) -> Result<()> {
    let (n, l) = (y.len(), f.len());
    if l + 1 > n {
        return Err(Error::SparsityBound {
            sparsity: l,
            samples: n,
        });
    }
    Ok(())
}

fn as_column(y: &Snapshot) -> DVector<C64> {
    DVector::from_column_slice(y.samples())
}

/// Least-squares amplitudes `c = A^+ y`, computed through a QR factorization of `A`.
pub fn ls_amplitudes(y: &Snapshot, a: &Manifold) -> Result<ComplexAmplitudes> {
    if a.num_samples() != y.len() {
        return Err(Error::LengthMismatch {
            expected: a.num_samples(),
            found: y.len(),
        });
    }
    if a.num_sources() + 1 > y.len() {
        return Err(Error::SparsityBound {
            sparsity: a.num_sources(),
            samples: y.len(),
        });
    }
    let fac = Factored::new(a)?;
    Ok(ComplexAmplitudes::new(
        fac.pinv_apply(&as_column(y)).iter().copied().collect(),
    ))
}

/// Amplitudes, residual and cost without the gradient. Cost is `O(N L^2)`.
pub(crate) fn fit(y: &Snapshot, f: &FrequencyVector) -> Result<(ComplexAmplitudes, Snapshot, f64)> {
    check_dimensions(y, f)?;
    let a = build_manifold(f, y.len());
    let fac = Factored::new(&a)?;
    let yv = as_column(y);
    let c = fac.pinv_apply(&yv);
    let r = fac.reject(&yv);
    let cost = r.norm_squared();
    Ok((
        ComplexAmplitudes::new(c.iter().copied().collect()),
        Snapshot::new(r.iter().copied().collect())?,
        cost,
    ))
}

/// Projection energy `y^H P_A y`.
pub fn projection_energy(y: &Snapshot, f: &FrequencyVector) -> Result<f64> {
    check_dimensions(y, f)?;
    let fac = Factored::new(&build_manifold(f, y.len()))?;
    let yv = as_column(y);
    let py = fac.projector() * &yv;
    Ok(yv.dotc(&py).re)
}

/// Cost `T(f)` and its gradient with respect to every frequency.
///
/// The projector `P_A` and every `Q_l = (I - P_A) dA/df_l A^+` are formed as
/// `N x N` matrices and each partial derivative is the quadratic form
/// `-y^H (Q_l + Q_l^H) y`, so one call costs `O(N^2 L)`.
pub fn evaluate(y: &Snapshot, f: &FrequencyVector) -> Result<ObjectiveEval> {
    check_dimensions(y, f)?;
    let n = y.len();
    let a = build_manifold(f, n);
    let fac = Factored::new(&a)?;
    let yv = as_column(y);
    let pinv = fac.pinv();
    let c = &pinv * &yv;
    let p = fac.projector();

    let r = fac.reject(&yv);
    let cost = r.norm_squared();
    let y_energy = yv.norm_squared();
    let proj_energy = yv.dotc(&(&p * &yv)).re;
    debug_assert!(
        ((y_energy - proj_energy) - cost).abs() <= 1e-10 * y_energy.max(f64::MIN_POSITIVE),
        "cost identity violated: {} vs {}",
        y_energy - proj_energy,
        cost
    );

    let gradient = f
        .as_slice()
        .iter()
        .enumerate()
        .map(|(l, _)| {
            // da/df_l reuses the manifold column: d_k = j 2 pi k a_k
            let d = DVector::from_iterator(
                n,
                a.columns()
                    .column(l)
                    .iter()
                    .enumerate()
                    .map(|(k, &ak)| ak * C64::new(0.0, 2.0 * PI * k as f64)),
            );
            // (I - P_A) da/df_l
            let v = &d - &p * &d;
            // dA/df_l has a single nonzero column, so Q_l = v (row l of A^+)
            let q_l = &v * pinv.row(l);
            let qy = &q_l * &yv;
            let yq = yv.dotc(&qy); // y^H Q_l y
            let yqh = qy.dotc(&yv); // y^H Q_l^H y
            let q = yq + yqh;
            debug_assert!(
                q.im.abs() <= 1e-9 * q.re.abs() + 1e-12 * (1.0 + yq.norm()),
                "quadratic form not real: {q}"
            );
            -q.re
        })
        .collect();

    Ok(ObjectiveEval {
        cost,
        gradient,
        amplitudes: ComplexAmplitudes::new(c.iter().copied().collect()),
        residual: Snapshot::new(r.iter().copied().collect())?,
    })
}

/// `sin(n x) / sin(x)`, with the removable singularities at multiples of
/// `pi` filled by their limit `n (-1)^{k (n - 1)}`.
pub fn sad(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = Float::sin(x);
    if s.abs() < 1e-12 {
        let k = Float::round(x / PI);
        let odd = (k as i64).rem_euclid(2) == 1 && n.is_multiple_of(2);
        return if odd { -nf } else { nf };
    }
    Float::sin(nf * x) / s
}

/// Radius of the neighbourhood around each true frequency where the
/// correlation kernel stays convex: `1 / (n - 1)`.
pub fn basin_radius(n: usize) -> f64 {
    assert!(n >= 2, "basin radius needs at least two samples");
    1.0 / (n as f64 - 1.0)
}
