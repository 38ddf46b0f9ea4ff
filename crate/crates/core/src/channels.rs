//! One-step evolution objects: the unitary propagator, the dephasing channel,
//! its classical limit and the full Liouvillian superoperator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_residual, CMatrix, CVector, ZERO};
use crate::models::{HermitianMatrix, UnitaryMatrix};

pub const TRACE_TOL: f64 = 1e-12;
pub const STOCHASTIC_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let trace = m.trace();
        if !((trace - Complex64::new(1.0, 0.0)).norm() <= TRACE_TOL) {
            return Err(Error::InvalidDensity {
                reason: format!("trace {trace} differs from 1"),
            });
        }
        let herm = hermiticity_residual(&m);
        if !(herm <= 1e-12) {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (residual {herm:.3e})"),
            });
        }
        let min = min_eigenvalue(&m);
        if !(min >= -POSITIVITY_TOL) {
            return Err(Error::InvalidDensity {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(Self(m))
    }

    /// `|k⟩⟨k|`.
    pub fn basis_state(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::param(
                "initial_site",
                format!("index {k} out of range for dimension {n}"),
            ));
        }
        let mut m = CMatrix::zeros(n, n);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self(m))
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(p.len(), p.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag))
    }

    /// Pure state `|ψ⟩⟨ψ|` for a normalised `ψ`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroNorm { index: 0 });
        }
        let psi = psi.unscale(norm);
        Self::new(&psi * psi.adjoint())
    }

    /// Row-major inverse of [`DensityMatrix::vectorize`].
    pub fn from_vectorized(v: &CVector) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: v.len(),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| v[i * n + j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Row-major: `(n, m) -> n·N + m`.
    pub fn vectorize(&self) -> CVector {
        let n = self.dim();
        CVector::from_fn(n * n, |k, _| self.0[(k / n, k % n)])
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    /// Largest off-diagonal magnitude.
    pub fn coherence_norm(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    // symmetrise first so round-off asymmetry cannot leak into the solver
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Real doubly stochastic matrix acting on column probability vectors
/// (`P' = Q P`).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    q: DMatrix<f64>,
    residual: f64,
}

impl StochasticMatrix {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::DimensionMismatch {
                expected: q.nrows(),
                actual: q.ncols(),
            });
        }
        if let Some(bad) = q.iter().find(|&&x| !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x)) {
            return Err(Error::NotStochastic {
                reason: format!("entry {bad} outside [0, 1]"),
            });
        }
        let q = q.map(|x| x.clamp(0.0, 1.0));
        let residual = stochastic_residual(&q);
        if !(residual <= STOCHASTIC_TOL) {
            return Err(Error::NotStochastic {
                reason: format!("row/column sums deviate from 1 by {residual:.3e}"),
            });
        }
        Ok(Self { q, residual })
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn to_complex(&self) -> CMatrix {
        self.q.map(|x| Complex64::new(x, 0.0))
    }
}

fn stochastic_residual(q: &DMatrix<f64>) -> f64 {
    let rows = q.row_iter().map(|r| (r.sum() - 1.0).abs());
    let cols = q.column_iter().map(|c| (c.sum() - 1.0).abs());
    rows.chain(cols).fold(0.0_f64, f64::max)
}

/// One full step `ρ -> (1-q) UρU† + q diag(UρU†)` as an `N² × N²` matrix on
/// row-major vectorised density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorMatrix {
    m: CMatrix,
    n: usize,
    q: f64,
}

impl SuperoperatorMatrix {
    pub fn new(m: CMatrix, q: f64) -> Result<Self> {
        check_q(q)?;
        let big = m.nrows();
        let n = (big as f64).sqrt().round() as usize;
        if !m.is_square() || n * n != big {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: m.ncols(),
            });
        }
        // trace of the image of each basis operator |l⟩⟨r|
        let mut residual = 0.0_f64;
        for l in 0..n {
            for r in 0..n {
                let col = l * n + r;
                let tr: Complex64 = (0..n).map(|k| m[(k * n + k, col)]).sum();
                let want = if l == r { 1.0 } else { 0.0 };
                residual = residual.max((tr - Complex64::new(want, 0.0)).norm());
            }
        }
        if !(residual <= TRACE_TOL) {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { m, n, q })
    }

    /// Side of the density matrices it acts on.
    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: rho.dim(),
            });
        }
        DensityMatrix::from_vectorized(&(&self.m * rho.vectorize()))
    }

    /// Block acting on populations only: `M[(n,n),(l,l)]`.
    pub fn diagonal_block(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| self.m[(i * n + i, j * n + j)].re)
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param(
            "q",
            format!("dephasing probability must lie in [0, 1], got {q}"),
        ));
    }
    Ok(())
}

/// `exp(-iHτ)` from the Hermitian eigendecomposition.
pub fn propagator(h: &HermitianMatrix, tau: f64) -> Result<UnitaryMatrix> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::param(
            "tau",
            format!("step duration must be finite and >= 0, got {tau}"),
        ));
    }
    let n = h.dim();
    if tau == 0.0 {
        return Ok(UnitaryMatrix::identity(n));
    }
    let eig = h.matrix().clone().symmetric_eigen();
    let phases = CVector::from_iterator(n, eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * tau)));
    let v = &eig.eigenvectors;
    UnitaryMatrix::new(v * CMatrix::from_diagonal(&phases) * v.adjoint())
}

pub fn dephase_step(rho: &DensityMatrix, u: &UnitaryMatrix, q: f64) -> Result<DensityMatrix> {
    check_q(q)?;
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: rho.dim(),
        });
    }
    let u = u.matrix();
    let evolved = u * rho.matrix() * u.adjoint();
    let n = rho.dim();
    let out = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            evolved[(i, j)]
        } else {
            evolved[(i, j)].scale(1.0 - q)
        }
    });
    DensityMatrix::new(out)
}

/// `Q_{n,m} = |U_{n,m}|²`, clamped to `[0, 1]`.
///
/// The stochasticity residual is recorded rather than enforced, since it is
/// bounded by the unitarity residual of the input.
pub fn classical_markov(u: &UnitaryMatrix) -> StochasticMatrix {
    let q = u.matrix().map(|z| z.norm_sqr().clamp(0.0, 1.0));
    let residual = stochastic_residual(&q);
    StochasticMatrix { q, residual }
}

pub fn liouvillian(u: &UnitaryMatrix, q: f64) -> Result<SuperoperatorMatrix> {
    check_q(q)?;
    let u = u.matrix();
    let n = u.nrows();
    let mut m = CMatrix::from_element(n * n, n * n, ZERO);
    for a in 0..n {
        for b in 0..n {
            for l in 0..n {
                for r in 0..n {
                    let term = u[(a, l)] * u[(b, r)].conj();
                    let weight = if a == b { 1.0 } else { 1.0 - q };
                    m[(a * n + b, l * n + r)] = term.scale(weight);
                }
            }
        }
    }
    SuperoperatorMatrix::new(m, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs};
    use crate::models::{ring_hamiltonian, RingModel};

    /// Scaling and squaring with a truncated Taylor series.
    fn expm_oracle(a: &CMatrix) -> CMatrix {
        let n = a.nrows();
        let norm: f64 = a.iter().map(|z| z.norm()).sum();
        let mut s = 0;
        while norm / 2f64.powi(s) > 0.25 {
            s += 1;
        }
        let b = a.unscale(2f64.powi(s));
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &b / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    fn fig2_h() -> HermitianMatrix {
        ring_hamiltonian(&RingModel::new(1.0, 1.0, 0.5, 0.0).unwrap())
    }

    fn mixed_state() -> DensityMatrix {
        let psi = CVector::from_vec(vec![
            Complex64::new(0.6, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.3, -0.4),
        ]);
        let pure = DensityMatrix::pure(&psi).unwrap();
        let mixed = pure.matrix().scale(0.7) + CMatrix::identity(3, 3).scale(0.1);
        DensityMatrix::new(mixed).unwrap()
    }

    #[test]
    fn zero_time_propagator_is_identity() {
        let u = propagator(&fig2_h(), 0.0).unwrap();
        assert_eq!(u.matrix(), &CMatrix::identity(3, 3));
    }

    #[test]
    fn propagator_matches_series_oracle() {
        let h = ring_hamiltonian(&RingModel::new(1.0, 1.0, 0.5, 0.9).unwrap());
        for h in [fig2_h(), h] {
            let u = propagator(&h, 1.0).unwrap();
            let oracle = expm_oracle(&h.matrix().map(|z| z * Complex64::new(0.0, -1.0)));
            assert!(max_abs(&(u.matrix() - oracle)) <= 1e-10);
        }
    }

    #[test]
    fn propagator_rejects_negative_time() {
        assert!(propagator(&fig2_h(), -0.1).is_err());
    }

    #[test]
    fn markov_columns_sum_to_one() {
        let q = classical_markov(&propagator(&fig2_h(), 0.8127).unwrap());
        for c in q.matrix().column_iter() {
            assert!((c.sum() - 1.0).abs() <= 1e-12);
        }
        assert!(q.residual() <= 1e-12);
    }

    #[test]
    fn identity_unitary_gives_identity_markov() {
        let q = classical_markov(&UnitaryMatrix::identity(4));
        assert_eq!(q.matrix(), &DMatrix::identity(4, 4));
    }

    #[test]
    fn time_reversal_symmetric_ring_has_symmetric_markov() {
        for beta in [0.1, 0.5, 0.79, 1.1] {
            let q = classical_markov(&propagator(&fig2_h(), beta).unwrap());
            assert!((q.matrix() - q.matrix().transpose()).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn ring_markov_converges_to_uniform() {
        let q = classical_markov(&propagator(&fig2_h(), 0.79).unwrap());
        let mut p = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let mut steps = 0;
        while (p.add_scalar(-1.0 / 3.0)).amax() > 1e-8 {
            p = q.matrix() * p;
            steps += 1;
            assert!(steps < 1000);
        }
    }

    #[test]
    fn stochastic_matrix_rejects_bad_sums() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.6]);
        assert!(StochasticMatrix::new(m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[-1e-15, 1.0, 1.0, 0.0]);
        let q = StochasticMatrix::new(m).unwrap();
        assert_eq!(q.matrix()[(0, 0)], 0.0);
    }

    #[test]
    fn full_dephasing_removes_coherences() {
        let u = propagator(&fig2_h(), 0.7).unwrap();
        let out = dephase_step(&mixed_state(), &u, 1.0).unwrap();
        assert_eq!(out.coherence_norm(), 0.0);
    }

    #[test]
    fn zero_dephasing_is_unitary_conjugation() {
        let u = propagator(&fig2_h(), 0.7).unwrap();
        let rho = mixed_state();
        let out = dephase_step(&rho, &u, 0.0).unwrap();
        let direct = u.matrix() * rho.matrix() * u.matrix().adjoint();
        assert_eq!(out.matrix(), &direct);
    }

    #[test]
    fn dephasing_preserves_trace() {
        let u = propagator(&fig2_h(), 0.7).unwrap();
        for q in [0.0, 0.25, 0.5, 1.0] {
            let out = dephase_step(&mixed_state(), &u, q).unwrap();
            assert!((out.trace() - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn liouvillian_at_full_dephasing_contains_markov() {
        let u = propagator(&fig2_h(), 0.6).unwrap();
        let l = liouvillian(&u, 1.0).unwrap();
        let q = classical_markov(&u);
        assert!((l.diagonal_block() - q.matrix()).abs().max() <= 1e-12);
    }

    #[test]
    fn liouvillian_without_dephasing_is_kronecker_conjugation() {
        let u = propagator(&fig2_h(), 0.6).unwrap();
        let l = liouvillian(&u, 0.0).unwrap();
        let k = kron(u.matrix(), &u.matrix().map(|z| z.conj()));
        assert!(max_abs(&(l.matrix() - k)) <= 1e-15);
    }

    #[test]
    fn uniform_state_is_fixed_point() {
        let u = propagator(&ring_hamiltonian(&RingModel::new(1.0, 1.0, 0.5, 1.0).unwrap()), 0.6).unwrap();
        let rho = DensityMatrix::from_populations(&[1.0 / 3.0; 3]).unwrap();
        for q in [0.0, 0.4, 1.0] {
            let out = liouvillian(&u, q).unwrap().apply(&rho).unwrap();
            assert!(max_abs(&(out.matrix() - rho.matrix())) <= 1e-12);
        }
    }

    #[test]
    fn liouvillian_matches_dephase_step() {
        let u = propagator(&fig2_h(), 0.9).unwrap();
        let rho = mixed_state();
        for q in [0.0, 0.3, 0.7, 1.0] {
            let via_map = liouvillian(&u, q).unwrap().apply(&rho).unwrap();
            let direct = dephase_step(&rho, &u, q).unwrap();
            assert!(max_abs(&(via_map.matrix() - direct.matrix())) <= 1e-12);
        }
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let mut negative = CMatrix::zeros(2, 2);
        negative[(0, 0)] = Complex64::new(1.5, 0.0);
        negative[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(negative).is_err());
        assert!(DensityMatrix::basis_state(3, 3).is_err());
    }

    #[test]
    fn q_outside_unit_interval_is_rejected() {
        let u = UnitaryMatrix::identity(2);
        assert!(liouvillian(&u, 1.5).is_err());
        assert!(dephase_step(&DensityMatrix::basis_state(2, 0).unwrap(), &u, -0.1).is_err());
    }
}
