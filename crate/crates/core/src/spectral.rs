//! Biorthogonal eigendecomposition of one-step maps, Floquet exponents and the
//! diagnostics built on them: detailed balance, eigenvector overlap, the
//! `μ -> -μ` pairing of the coined walk and branch tracking across a grid.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{StochasticMatrix, SuperoperatorMatrix};
use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, eig_general, frobenius, normalize_phase, normalized_overlap, phase_distance, CMatrix, CVector,
};

/// Above this eigenvector-matrix condition number the decomposition is
/// treated as sitting on (or next to) an exceptional point.
pub const NEAR_EP_CONDITION: f64 = 1e8;
/// `Re λ` above this counts as a decaying mode.
pub const DECAY_THRESHOLD: f64 = 1e-9;
const ORDER_TIE: f64 = 1e-9;
const MATCH_AMBIGUITY: f64 = 1e-6;

/// Anything that can be decomposed: a real Markov matrix or a superoperator.
pub trait StepMap {
    fn step_matrix(&self) -> CMatrix;
}

impl StepMap for StochasticMatrix {
    fn step_matrix(&self) -> CMatrix {
        self.to_complex()
    }
}

impl StepMap for SuperoperatorMatrix {
    fn step_matrix(&self) -> CMatrix {
        self.matrix().clone()
    }
}

impl StepMap for CMatrix {
    fn step_matrix(&self) -> CMatrix {
        self.clone()
    }
}

/// `λ = -Log μ` with `Im λ ∈ (-π, π]`; `μ = 0` maps to `+∞`.
pub fn floquet_exponent(mu: Complex64) -> Complex64 {
    if mu == Complex64::new(0.0, 0.0) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    let mut im = -mu.arg();
    if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(-mu.norm().ln(), im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub mu: Complex64,
    pub lambda: Complex64,
    /// Unit norm, largest entry real positive.
    pub right: CVector,
    /// `⟨l|r⟩ = 1` when the decomposition is biorthonormal, unit norm otherwise.
    pub left: CVector,
}

impl Mode {
    pub fn is_decaying(&self) -> bool {
        self.lambda.re > DECAY_THRESHOLD
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    matrix: CMatrix,
    modes: Vec<Mode>,
    biorthonormal: bool,
    condition: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Modes ordered by ascending `Re λ`; near-ties by `|Im λ|`, then `Im λ`.
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &Mode {
        &self.modes[i]
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.mu).collect()
    }

    pub fn exponents(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// The decomposed matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_biorthonormal(&self) -> bool {
        self.biorthonormal
    }

    pub fn is_near_ep(&self) -> bool {
        !self.biorthonormal
    }

    /// 2-norm condition number of the right-eigenvector matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Indices of decaying modes, in spectral order.
    pub fn decay_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.modes[i].is_decaying()).collect()
    }

    /// `max |⟨l_s|r_t⟩ - δ_st|`.
    pub fn biorthonormality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (s, ms) in self.modes.iter().enumerate() {
            for (t, mt) in self.modes.iter().enumerate() {
                let want = if s == t { 1.0 } else { 0.0 };
                worst = worst.max((ms.left.dotc(&mt.right) - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    /// `max_n ‖M r_n - μ_n r_n‖ / ‖M‖_F`.
    pub fn eigen_residual(&self) -> f64 {
        let norm = frobenius(&self.matrix).max(f64::MIN_POSITIVE);
        self.modes
            .iter()
            .map(|m| (&self.matrix * &m.right - m.right.map(|z| z * m.mu)).norm() / norm)
            .fold(0.0_f64, f64::max)
    }
}

/// Full eigendecomposition with right and left eigenvectors.
///
/// Left vectors come from the inverse of the right-eigenvector matrix. When
/// that matrix is too ill-conditioned they are taken from the adjoint problem
/// instead and the decomposition is flagged as not biorthonormal.
pub fn full_spectrum<M: StepMap + ?Sized>(m: &M) -> Result<SpectralDecomposition> {
    let matrix = m.step_matrix();
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            actual: matrix.ncols(),
        });
    }
    let n = matrix.nrows();
    let (values, vectors) = eig_general(&matrix)?;

    let mut rights = Vec::with_capacity(n);
    for k in 0..n {
        let r = normalize_phase(&vectors.column(k).into_owned()).ok_or(Error::ZeroNorm { index: k })?;
        rights.push(r);
    }
    let lambdas: Vec<Complex64> = values.iter().map(|&mu| floquet_exponent(mu)).collect();
    let order = spectral_order(&lambdas);

    let r_mat = CMatrix::from_fn(n, n, |i, j| rights[order[j]][i]);
    let condition = condition_number(&r_mat);
    let inverse = if condition <= NEAR_EP_CONDITION {
        r_mat.clone().try_inverse()
    } else {
        None
    };

    let (lefts, biorthonormal) = match inverse {
        Some(inv) => {
            let lefts: Vec<CVector> = (0..n).map(|s| CVector::from_fn(n, |i, _| inv[(s, i)].conj())).collect();
            (lefts, true)
        }
        None => (adjoint_left_vectors(&matrix, &order, &values)?, false),
    };

    let modes = order
        .iter()
        .zip(lefts)
        .map(|(&k, left)| Mode {
            mu: values[k],
            lambda: lambdas[k],
            right: rights[k].clone(),
            left,
        })
        .collect();

    Ok(SpectralDecomposition {
        matrix,
        modes,
        biorthonormal,
        condition,
    })
}

/// Permutation sorting exponents by `Re λ`, grouping near-equal real parts.
fn spectral_order(lambdas: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..lambdas.len()).collect();
    idx.sort_by(|&a, &b| lambdas[a].re.total_cmp(&lambdas[b].re).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(idx.len());
    for mut group in tie_groups(&idx, |i| lambdas[i].re) {
        group.sort_by(|&a, &b| lambdas[a].im.abs().total_cmp(&lambdas[b].im.abs()).then(a.cmp(&b)));
        for mut sub in tie_groups(&group, |i| lambdas[i].im.abs()) {
            sub.sort_by(|&a, &b| lambdas[a].im.total_cmp(&lambdas[b].im).then(a.cmp(&b)));
            out.extend(sub);
        }
    }
    out
}

/// Splits an already sorted index list into runs whose key stays within a
/// relative tolerance of the run's first element.
fn tie_groups(sorted: &[usize], key: impl Fn(usize) -> f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut head = f64::NAN;
    for &i in sorted {
        let k = key(i);
        let tied = match groups.last() {
            None => false,
            Some(_) if head.is_infinite() => k == head,
            Some(_) => (k - head).abs() <= ORDER_TIE * head.abs().max(1.0),
        };
        if tied {
            groups.last_mut().expect("group exists").push(i);
        } else {
            head = k;
            groups.push(vec![i]);
        }
    }
    groups
}

/// Left eigenvectors from the eigenproblem of `M†`, matched to `conj μ`.
fn adjoint_left_vectors(matrix: &CMatrix, order: &[usize], values: &[Complex64]) -> Result<Vec<CVector>> {
    let (adj_values, adj_vectors) = eig_general(&matrix.adjoint())?;
    let mut used = vec![false; adj_values.len()];
    let mut lefts = Vec::with_capacity(order.len());
    for &k in order {
        let target = values[k].conj();
        let best = (0..adj_values.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (adj_values[a] - target)
                    .norm()
                    .total_cmp(&(adj_values[b] - target).norm())
                    .then(a.cmp(&b))
            })
            .expect("adjoint spectrum has the same size");
        used[best] = true;
        let v = normalize_phase(&adj_vectors.column(best).into_owned()).ok_or(Error::ZeroNorm { index: best })?;
        lefts.push(v);
    }
    Ok(lefts)
}

/// `max_{n,l} |Q_nl - Q_ln|`; zero exactly when detailed balance holds with
/// the uniform stationary state.
pub fn detailed_balance_residual(q: &StochasticMatrix) -> f64 {
    let m = q.matrix();
    (m - m.transpose()).abs().max()
}

/// Normalised eigenvector overlap `g ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct OverlapValue(f64);

impl OverlapValue {
    pub fn between(a: &CVector, b: &CVector) -> Result<Self> {
        if a.norm() == 0.0 {
            return Err(Error::ZeroNorm { index: 0 });
        }
        let g = normalized_overlap(a, b).ok_or(Error::ZeroNorm { index: 1 })?;
        Ok(Self(g.min(1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Overlap of the right eigenvectors of modes 2 and 3.
pub fn overlap_g(d: &SpectralDecomposition) -> Result<OverlapValue> {
    overlap_between_modes(d, 1, 2)
}

pub fn overlap_between_modes(d: &SpectralDecomposition, a: usize, b: usize) -> Result<OverlapValue> {
    if a.max(b) >= d.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.max(b) + 1,
            actual: d.dim(),
        });
    }
    OverlapValue::between(&d.mode(a).right, &d.mode(b).right)
}

/// Residual of the coined-walk symmetry `μ -> -μ`, `x_l -> (-1)^l x_l`,
/// `y_l -> (-1)^{l+1} y_l`.
///
/// For each mode the partner is the eigenvalue nearest `-μ`. The vector
/// relation is checked against the partner eigenvector up to phase when the
/// partner eigenvalue is simple, and as an eigenvector equation otherwise.
pub fn pairing_check(d: &SpectralDecomposition, length: usize) -> Result<f64> {
    let n = d.dim();
    if n != 2 * length {
        return Err(Error::DimensionMismatch {
            expected: 2 * length,
            actual: n,
        });
    }
    let sign = CVector::from_fn(n, |k, _| {
        let (l, is_y) = if k < length {
            (k + 1, false)
        } else {
            (k - length + 1, true)
        };
        let odd = (l + usize::from(is_y)) % 2 == 1;
        Complex64::new(if odd { -1.0 } else { 1.0 }, 0.0)
    });
    let scale = frobenius(d.matrix()).max(f64::MIN_POSITIVE);

    let mut worst = 0.0_f64;
    for mode in d.modes() {
        let target = -mode.mu;
        let (partner, dist) = d
            .modes()
            .iter()
            .enumerate()
            .map(|(i, m)| (i, (m.mu - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("non-empty spectrum");
        worst = worst.max(dist);

        let mapped = mode.right.component_mul(&sign);
        let simple = d
            .modes()
            .iter()
            .enumerate()
            .filter(|&(i, m)| i != partner && (m.mu - d.mode(partner).mu).norm() <= 1e-6)
            .count()
            == 0;
        let mismatch = if simple {
            phase_distance(&mapped, &d.mode(partner).right)
        } else {
            (d.matrix() * &mapped - mapped.map(|z| z * target)).norm() / scale
        };
        worst = worst.max(mismatch);
    }
    Ok(worst)
}

/// Result of matching modes between two neighbouring grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `assignment[i]` is the index in `next` continuing `prev[i]`.
    pub assignment: Vec<usize>,
    pub ambiguous: bool,
}

/// Greedy bipartite matching by eigenvector overlap.
///
/// At each round the best remaining overlap wins. Candidates within `1e-6` of
/// it are considered equivalent; the closest eigenvalue pair among them is
/// taken, and the step is flagged if two of them compete for the same mode.
pub fn match_modes(prev: &[(Complex64, &CVector)], next: &[(Complex64, &CVector)]) -> Result<Matching> {
    if prev.len() != next.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            actual: next.len(),
        });
    }
    let n = prev.len();
    let overlap = DMatrix::from_fn(n, n, |i, j| normalized_overlap(prev[i].1, next[j].1).unwrap_or(0.0));
    let mut assignment = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut ambiguous = false;
    for _ in 0..n {
        let mut best = f64::NEG_INFINITY;
        for i in (0..n).filter(|&i| assignment[i] == usize::MAX) {
            for j in (0..n).filter(|&j| !taken[j]) {
                best = best.max(overlap[(i, j)]);
            }
        }
        let candidates: Vec<(usize, usize)> = (0..n)
            .filter(|&i| assignment[i] == usize::MAX)
            .flat_map(|i| (0..n).filter(|&j| !taken[j]).map(move |j| (i, j)))
            .filter(|&(i, j)| overlap[(i, j)] >= best - MATCH_AMBIGUITY)
            .collect();
        let conflict = candidates
            .iter()
            .enumerate()
            .any(|(x, &(a, b))| candidates[x + 1..].iter().any(|&(c, d)| a == c || b == d));
        ambiguous |= conflict;
        let &(i, j) = candidates
            .iter()
            .min_by(|&&(a, b), &&(c, d)| {
                (prev[a].0 - next[b].0)
                    .norm()
                    .total_cmp(&(prev[c].0 - next[d].0).norm())
                    .then((a, b).cmp(&(c, d)))
            })
            .expect("at least one unmatched pair");
        assignment[i] = j;
        taken[j] = true;
    }
    Ok(Matching { assignment, ambiguous })
}

/// Branch labels along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedBranches {
    /// `indices[k][b]` is the mode index of branch `b` at grid point `k`.
    /// Branch `b` starts as mode `b` at the first point.
    pub indices: Vec<Vec<usize>>,
    /// Grid steps `k -> k+1` whose matching was ambiguous.
    pub ambiguous_steps: Vec<usize>,
}

impl TrackedBranches {
    pub fn branch(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().map(move |row| row[b])
    }
}

pub fn track_modes(grid: &[(f64, SpectralDecomposition)]) -> Result<TrackedBranches> {
    if grid.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::param("grid", "control values must be strictly increasing"));
    }
    let Some((_, first)) = grid.first() else {
        return Ok(TrackedBranches {
            indices: Vec::new(),
            ambiguous_steps: Vec::new(),
        });
    };
    let n = first.dim();
    let mut indices = vec![(0..n).collect::<Vec<_>>()];
    let mut ambiguous_steps = Vec::new();
    for (k, pair) in grid.windows(2).enumerate() {
        let (a, b) = (&pair[0].1, &pair[1].1);
        let prev: Vec<_> = a.modes().iter().map(|m| (m.mu, &m.right)).collect();
        let next: Vec<_> = b.modes().iter().map(|m| (m.mu, &m.right)).collect();
        let matching = match_modes(&prev, &next)?;
        if matching.ambiguous {
            ambiguous_steps.push(k);
        }
        let row = indices[k].iter().map(|&i| matching.assignment[i]).collect();
        indices.push(row);
    }
    Ok(TrackedBranches {
        indices,
        ambiguous_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{classical_markov, propagator};
    use crate::models::{coined_markov_direct, ring_hamiltonian, CoinedWalkModel, RingModel};
    use std::f64::consts::FRAC_PI_2;

    fn ring_q(phi: f64, beta: f64) -> StochasticMatrix {
        let h = ring_hamiltonian(&RingModel::new(1.0, 1.0, 0.5, phi).unwrap());
        classical_markov(&propagator(&h, beta).unwrap())
    }

    #[test]
    fn principal_branch() {
        assert_eq!(floquet_exponent(Complex64::new(1.0, 0.0)), Complex64::new(0.0, 0.0));
        let l = floquet_exponent(Complex64::new(-0.5, -0.0));
        assert!((l.im - PI).abs() < 1e-15);
        assert!((l.re - 2f64.ln()).abs() < 1e-15);
        assert!(floquet_exponent(Complex64::new(0.0, 0.0)).re.is_infinite());
    }

    #[test]
    fn identity_spectrum() {
        let d = full_spectrum(&CMatrix::identity(4, 4)).unwrap();
        for m in d.modes() {
            assert!((m.mu - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            assert!(m.lambda.norm() < 1e-14);
        }
        assert!(d.is_biorthonormal());
    }

    #[test]
    fn ring_stationary_mode_is_uniform() {
        let d = full_spectrum(&ring_q(0.0, 0.6)).unwrap();
        let uniform = CVector::from_element(3, Complex64::new(1.0 / 3f64.sqrt(), 0.0));
        assert!((d.mode(0).mu - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(phase_distance(&d.mode(0).right, &uniform) < 1e-10);
        assert!(normalized_overlap(&d.mode(0).left, &uniform).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn coined_walk_has_companion_non_decaying_mode() {
        let q = coined_markov_direct(&CoinedWalkModel::new(3, 0.3 * FRAC_PI_2).unwrap());
        let d = full_spectrum(&q).unwrap();
        assert!((d.mode(0).mu - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((d.mode(1).mu + Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(d.mode(0).lambda.re.abs() <= 1e-10 && d.mode(1).lambda.re.abs() <= 1e-10);
        assert_eq!(d.decay_indices(), (2..6).collect::<Vec<_>>());
    }

    #[test]
    fn conjugate_pairs_are_ordered_negative_imaginary_first() {
        let d = full_spectrum(&ring_q(PI / 3.0, 0.9)).unwrap();
        let (a, b) = (d.mode(1).lambda, d.mode(2).lambda);
        assert!((a.re - b.re).abs() < 1e-12);
        assert!(a.im < 0.0 && (a.im + b.im).abs() < 1e-10);
    }

    #[test]
    fn decomposition_residuals() {
        for (phi, beta) in [(0.0, 0.5), (PI / 3.0, 0.6), (PI / 3.0, 1.0), (1.0, 0.3)] {
            let d = full_spectrum(&ring_q(phi, beta)).unwrap();
            assert!(d.is_biorthonormal());
            assert!(d.biorthonormality_residual() <= 1e-8);
            assert!(d.eigen_residual() <= 1e-8);
        }
    }

    #[test]
    fn detailed_balance_tracks_time_reversal() {
        assert!(detailed_balance_residual(&ring_q(0.0, 0.7)) <= 1e-12);
        assert!(detailed_balance_residual(&ring_q(PI / 3.0, 0.74)) > 1e-3);
        let sym = StochasticMatrix::new(DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.7, 0.3])).unwrap();
        assert_eq!(detailed_balance_residual(&sym), 0.0);
    }

    #[test]
    fn real_spectrum_under_detailed_balance() {
        let d = full_spectrum(&ring_q(0.0, 1.1)).unwrap();
        assert!(d.modes().iter().all(|m| m.mu.im.abs() <= 1e-10));
    }

    #[test]
    fn overlap_limits() {
        let a = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let b = CVector::from_vec(vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]);
        assert!((OverlapValue::between(&a, &a).unwrap().value() - 1.0).abs() < 1e-15);
        assert!(OverlapValue::between(&a, &b).unwrap().value() < 1e-15);
        assert!(OverlapValue::between(&CVector::zeros(2), &a).is_err());
    }

    #[test]
    fn pairing_holds_for_coined_walk() {
        for (l, frac) in [(3, 0.3), (3, 0.7), (4, 0.5), (5, 0.2)] {
            let q = coined_markov_direct(&CoinedWalkModel::new(l, frac * FRAC_PI_2).unwrap());
            let d = full_spectrum(&q).unwrap();
            let r = pairing_check(&d, l).unwrap();
            assert!(r <= 1e-8, "L={l} β={frac}: {r:e}");
        }
    }

    #[test]
    fn pairing_rejects_wrong_size() {
        let d = full_spectrum(&ring_q(0.0, 0.5)).unwrap();
        assert!(pairing_check(&d, 2).is_err());
    }

    #[test]
    fn pairing_fails_for_ring() {
        let d = full_spectrum(&CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ])))
        .unwrap();
        assert!(pairing_check(&d, 1).unwrap() > 0.1);
    }

    #[test]
    fn constant_grid_tracks_identically() {
        let d = full_spectrum(&ring_q(PI / 3.0, 0.5)).unwrap();
        let grid: Vec<_> = (0..4).map(|k| (k as f64, d.clone())).collect();
        let t = track_modes(&grid).unwrap();
        for row in &t.indices {
            assert_eq!(row, &vec![0, 1, 2]);
        }
        assert!(t.ambiguous_steps.is_empty());
    }

    #[test]
    fn first_order_crossing_swaps_sorted_labels() {
        let betas: Vec<f64> = (0..21).map(|k| 0.7 + 0.01 * k as f64).collect();
        let grid: Vec<_> = betas
            .iter()
            .map(|&b| (b, full_spectrum(&ring_q(0.0, b)).unwrap()))
            .collect();
        let t = track_modes(&grid).unwrap();
        assert_eq!(t.indices[0], vec![0, 1, 2]);
        assert_eq!(t.indices.last().unwrap(), &vec![0, 2, 1]);
    }

    #[test]
    fn exceptional_point_splits_into_conjugate_pair() {
        let betas: Vec<f64> = (0..21).map(|k| 0.64 + 0.01 * k as f64).collect();
        let grid: Vec<_> = betas
            .iter()
            .map(|&b| (b, full_spectrum(&ring_q(PI / 3.0, b)).unwrap()))
            .collect();
        let t = track_modes(&grid).unwrap();
        let last = &grid.last().unwrap().1;
        let row = t.indices.last().unwrap();
        let (l2, l3) = (last.mode(row[1]).lambda, last.mode(row[2]).lambda);
        assert!(l2.im.abs() > 1e-3);
        assert!((l2.im + l3.im).abs() < 1e-8);
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        let d = full_spectrum(&ring_q(0.0, 0.5)).unwrap();
        assert!(track_modes(&[(1.0, d.clone()), (0.5, d)]).is_err());
    }
}
