//! Coherent generators of the two walk geometries: the three-site ring threaded
//! by a gauge flux, and the coined two-state walk on a line with reflecting
//! ends.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::StochasticMatrix;
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_residual, unitarity_residual, CMatrix, ONE};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Three sites with hoppings `j1` (1-2), `j2` (2-3) and `j3·e^{iφ}` (1-3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingModel {
    j1: f64,
    j2: f64,
    j3: f64,
    phi: f64,
}

impl RingModel {
    pub fn new(j1: f64, j2: f64, j3: f64, phi: f64) -> Result<Self> {
        for (name, value) in [("j1", j1), ("j2", j2), ("j3", j3)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::param(
                    name,
                    format!("hopping must be finite and >= 0, got {value}"),
                ));
            }
        }
        if !phi.is_finite() {
            return Err(Error::param("phi", "gauge phase must be finite"));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { j1, j2, j3, phi })
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }
    pub fn j2(&self) -> f64 {
        self.j2
    }
    pub fn j3(&self) -> f64 {
        self.j3
    }
    /// Gauge phase in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Coined walk on sites `1..=L` with two internal states `H`, `V`.
///
/// Interior coin angles are uniform; the coins at `n = 0` and `n = L` are
/// fixed at `π/2`, which makes both ends reflecting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinedWalkModel {
    length: usize,
    beta: f64,
}

impl CoinedWalkModel {
    pub fn new(length: usize, beta: f64) -> Result<Self> {
        if length < 2 {
            return Err(Error::param("L", format!("need at least 2 sites, got {length}")));
        }
        if !beta.is_finite() {
            return Err(Error::param("beta", "coin angle must be finite"));
        }
        Ok(Self { length, beta })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// State-space dimension `2L`.
    pub fn dim(&self) -> usize {
        2 * self.length
    }

    /// `(cos β_n, sin β_n)` for coin position `n ∈ 0..=L`.
    fn coin(&self, n: usize) -> (f64, f64) {
        if n == 0 || n == self.length {
            // cos(π/2) is not exactly zero in floating point
            (0.0, 1.0)
        } else {
            (self.beta.cos(), self.beta.sin())
        }
    }

    /// Basis index of `(n, H)`, `n` 1-based.
    pub fn h_index(&self, n: usize) -> usize {
        n - 1
    }

    /// Basis index of `(n, V)`, `n` 1-based.
    pub fn v_index(&self, n: usize) -> usize {
        self.length + n - 1
    }
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let residual = hermiticity_residual(&m);
        if !(residual <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let residual = unitarity_residual(&m);
        if !(residual <= UNITARY_TOL) {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

pub fn ring_hamiltonian(model: &RingModel) -> HermitianMatrix {
    let mut h = CMatrix::zeros(3, 3);
    let flux = Complex64::from_polar(model.j3, model.phi);
    h[(0, 1)] = Complex64::new(model.j1, 0.0);
    h[(1, 2)] = Complex64::new(model.j2, 0.0);
    h[(0, 2)] = flux;
    h[(1, 0)] = h[(0, 1)].conj();
    h[(2, 1)] = h[(1, 2)].conj();
    h[(2, 0)] = flux.conj();
    HermitianMatrix(h)
}

/// One step `U = S_V · C · S_H` restricted to the physical sites.
///
/// The operators are built on an auxiliary ring of positions `0..=L` so that
/// both shifts are permutations. Position 0 only ever holds the `H` amplitude
/// leaving site 1, which the `π/2` coin at 0 turns into `V` and the right shift
/// returns to site 1; the `π/2` coin at `L` sends `V` back into `H` before it
/// can leave. The physical block is therefore invariant and unitary.
pub fn coined_step_unitary(model: &CoinedWalkModel) -> Result<UnitaryMatrix> {
    let l = model.length;
    let m = l + 1;
    let h = |p: usize| p;
    let v = |p: usize| m + p;

    let mut shift_h = CMatrix::zeros(2 * m, 2 * m);
    let mut shift_v = CMatrix::zeros(2 * m, 2 * m);
    let mut coin = CMatrix::zeros(2 * m, 2 * m);
    for p in 0..m {
        shift_h[(h((p + m - 1) % m), h(p))] = ONE;
        shift_h[(v(p), v(p))] = ONE;
        shift_v[(h(p), h(p))] = ONE;
        shift_v[(v((p + 1) % m), v(p))] = ONE;

        let (c, s) = model.coin(p);
        coin[(h(p), h(p))] = Complex64::new(c, 0.0);
        coin[(h(p), v(p))] = Complex64::new(-s, 0.0);
        coin[(v(p), h(p))] = Complex64::new(s, 0.0);
        coin[(v(p), v(p))] = Complex64::new(c, 0.0);
    }
    let extended = shift_v * coin * shift_h;

    let physical: Vec<usize> = (1..=l).map(h).chain((1..=l).map(v)).collect();
    let u = CMatrix::from_fn(2 * l, 2 * l, |i, j| extended[(physical[i], physical[j])]);
    UnitaryMatrix::new(u)
}

/// Classical transition matrix of the fully dephased coined walk, built
/// directly from the master equation for `(X_1..X_L, Y_1..Y_L)`.
pub fn coined_markov_direct(model: &CoinedWalkModel) -> StochasticMatrix {
    let l = model.length;
    let mut q = DMatrix::<f64>::zeros(2 * l, 2 * l);
    for n in 1..=l {
        let (c, s) = model.coin(n);
        if n < l {
            q[(model.h_index(n), model.h_index(n + 1))] += c * c;
        }
        q[(model.h_index(n), model.v_index(n))] += s * s;

        let (c, s) = model.coin(n - 1);
        q[(model.v_index(n), model.h_index(n))] += s * s;
        if n > 1 {
            q[(model.v_index(n), model.v_index(n - 1))] += c * c;
        }
    }
    StochasticMatrix::new(q).expect("coined transition matrix is doubly stochastic by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::classical_markov;
    use crate::linalg::ZERO;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fig2() -> RingModel {
        RingModel::new(1.0, 1.0, 0.5, 0.0).unwrap()
    }

    #[test]
    fn ring_without_flux_is_real_symmetric() {
        let h = ring_hamiltonian(&fig2());
        let m = h.matrix();
        assert_eq!(m[(0, 2)], Complex64::new(0.5, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.0));
        for i in 0..3 {
            assert_eq!(m[(i, i)], ZERO);
            for j in 0..3 {
                assert_eq!(m[(i, j)], m[(j, i)]);
                assert!(m[(i, j)].im.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn flux_pi_flips_sign_of_closing_bond() {
        let h = ring_hamiltonian(&RingModel::new(1.0, 1.0, 0.5, PI).unwrap());
        let m = h.matrix();
        assert!((m[(0, 2)].re + 0.5).abs() < 1e-15);
        assert!(m.iter().all(|z| z.im.abs() <= 1e-14));
    }

    #[test]
    fn generic_flux_is_complex() {
        let h = ring_hamiltonian(&RingModel::new(1.0, 1.0, 0.5, PI / 3.0).unwrap());
        assert!(h.matrix().iter().any(|z| z.im.abs() > 1e-3));
        assert!(hermiticity_residual(h.matrix()) <= HERMITIAN_TOL);
    }

    #[test]
    fn ring_rejects_negative_hopping() {
        assert!(RingModel::new(-1.0, 1.0, 0.5, 0.0).is_err());
        assert!(RingModel::new(1.0, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn phase_is_reduced() {
        let m = RingModel::new(1.0, 1.0, 1.0, -PI / 2.0).unwrap();
        assert!((m.phi() - 1.5 * PI).abs() < 1e-12);
        let m = RingModel::new(1.0, 1.0, 1.0, 5.0 * PI).unwrap();
        assert!((m.phi() - PI).abs() < 1e-12);
        assert!(RingModel::new(1.0, 1.0, 1.0, -1e-18).unwrap().phi() < TAU);
    }

    #[test]
    fn coined_rejects_short_line() {
        assert!(CoinedWalkModel::new(1, 0.3).is_err());
        assert!(CoinedWalkModel::new(2, 0.3).is_ok());
    }

    #[test]
    fn coined_unitary_has_dimension_two_l() {
        for l in 2..7 {
            let u = coined_step_unitary(&CoinedWalkModel::new(l, 0.37).unwrap()).unwrap();
            assert_eq!(u.dim(), 2 * l);
        }
    }

    #[test]
    fn direct_markov_at_quarter_turn_is_a_permutation() {
        let q = coined_markov_direct(&CoinedWalkModel::new(3, FRAC_PI_2).unwrap());
        assert!(q.matrix().iter().all(|&x| x.abs() <= 1e-15 || (x - 1.0).abs() <= 1e-15));
    }

    #[test]
    fn quarter_turn_swaps_internal_states_on_site() {
        // cos β = 0: X_n <- Y_n and Y_n <- X_n
        let model = CoinedWalkModel::new(3, FRAC_PI_2).unwrap();
        let q = classical_markov(&coined_step_unitary(&model).unwrap());
        for n in 1..=3 {
            assert!((q.matrix()[(model.h_index(n), model.v_index(n))] - 1.0).abs() < 1e-12);
            assert!((q.matrix()[(model.v_index(n), model.h_index(n))] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_and_direct_constructions_agree() {
        for (l, frac) in [(3, 0.4771), (3, 0.3), (2, 0.8), (5, 0.61), (4, 0.05)] {
            let model = CoinedWalkModel::new(l, frac * FRAC_PI_2).unwrap();
            let from_u = classical_markov(&coined_step_unitary(&model).unwrap());
            let direct = coined_markov_direct(&model);
            let diff = (from_u.matrix() - direct.matrix()).abs().max();
            assert!(diff <= 1e-12, "L={l} β={frac}·π/2: {diff:e}");
        }
    }

    #[test]
    fn direct_markov_is_not_symmetric_inside() {
        let q = coined_markov_direct(&CoinedWalkModel::new(3, 0.3 * FRAC_PI_2).unwrap());
        let m = q.matrix();
        assert!((m - m.transpose()).abs().max() > 0.1);
    }
}
