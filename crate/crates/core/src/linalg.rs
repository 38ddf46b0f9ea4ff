//! Small dense complex linear-algebra helpers shared by the other modules.
//!
//! Storage is `nalgebra`; the general (non-Hermitian) eigenproblem is handed
//! to `faer`, which returns eigenvectors for complex input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |H - H†|` entrywise.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U†U - I|` entrywise.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    max_abs(&(prod - CMatrix::identity(n, n)))
}

/// Kronecker product `a ⊗ b` with row-major pair indexing `(i, k) -> i * nb + k`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    CMatrix::from_fn(ra * rb, ca * cb, |r, c| a[(r / rb, c / cb)] * b[(r % rb, c % cb)])
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues and (unnormalised) right eigenvectors of a general square matrix.
///
/// The solver runs single-threaded so results do not depend on the size of
/// any surrounding thread pool.
pub(crate) fn eig_general(m: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver {
            dim: n,
            norm: f64::NAN,
            reason: "matrix has non-finite entries".into(),
        });
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let fm = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm.eigen().map_err(|e| Error::Eigensolver {
        dim: n,
        norm: frobenius(m),
        reason: format!("{e:?}"),
    })?;
    let s = evd.S();
    let u = evd.U();
    let values: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver {
            dim: n,
            norm: frobenius(m),
            reason: "non-finite eigenvalue returned".into(),
        });
    }
    Ok((values, vectors))
}

/// 2-norm condition number `σ_max / σ_min` (infinite for singular input).
pub(crate) fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Rescales `v` to unit 2-norm with its largest-magnitude entry real and positive.
///
/// Entries within a relative `1e-9` of the maximum count as ties; the lowest
/// index wins so the choice is deterministic.
pub fn normalize_phase(v: &CVector) -> Option<CVector> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let max = v.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9))?;
    let phase = v[pivot] / v[pivot].norm();
    Some(v.map(|z| z / (phase * norm)))
}

/// `|<a|b>| / (|a| |b|)`.
pub fn normalized_overlap(a: &CVector, b: &CVector) -> Option<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(a.dotc(b).norm() / (na * nb))
}

/// Distance between two vectors allowing for a global phase: `min_θ |a - e^{iθ} b|`.
pub fn phase_distance(a: &CVector, b: &CVector) -> f64 {
    let ip = b.dotc(a);
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    (a - b.map(|z| z * phase)).norm()
}
