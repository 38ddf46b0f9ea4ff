//! Relaxation trajectories in the classical and dephased-quantum regimes, the
//! spectral expansion of a classical trajectory, and simple late-time
//! diagnostics (decay rate, monotone vs oscillatory approach).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channels::{DensityMatrix, StochasticMatrix, SuperoperatorMatrix};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::spectral::SpectralDecomposition;

pub const DEFAULT_MAX_STEPS: usize = 500;
const SUM_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(DVector<f64>);

impl ProbabilityVector {
    /// Clamps round-off negatives (down to `-1e-14`) and checks normalisation.
    pub fn new(p: DVector<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability {
                reason: "empty vector".into(),
            });
        }
        if let Some(bad) = p.iter().find(|&&x| !(x >= -CLAMP_TOL) || !x.is_finite()) {
            return Err(Error::InvalidProbability {
                reason: format!("entry {bad} is negative"),
            });
        }
        let p = p.map(|x| x.max(0.0));
        let sum = p.sum();
        if !((sum - 1.0).abs() <= SUM_TOL) {
            return Err(Error::InvalidProbability {
                reason: format!("entries sum to {sum}"),
            });
        }
        Ok(Self(p))
    }

    pub fn from_slice(p: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::param(
                "initial_site",
                format!("index {k} out of range for dimension {n}"),
            ));
        }
        let mut p = DVector::zeros(n);
        p[k] = 1.0;
        Ok(Self(p))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Snapshots at step indices `0, 1, 2, ...` of duration `tau` each.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    tau: f64,
    snapshots: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of snapshots (steps + 1).
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Snapshot after `k` steps.
    pub fn state(&self, k: usize) -> &S {
        &self.snapshots[k]
    }

    pub fn states(&self) -> &[S] {
        &self.snapshots
    }

    pub fn last(&self) -> &S {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

impl Trajectory<ProbabilityVector> {
    /// `P^(k) - target` for every step.
    pub fn residuals(&self, target: &[f64]) -> Vec<DVector<f64>> {
        let target = DVector::from_column_slice(target);
        self.snapshots.iter().map(|p| p.vector() - &target).collect()
    }
}

impl Trajectory<DensityMatrix> {
    pub fn populations(&self) -> Result<Trajectory<ProbabilityVector>> {
        let snapshots = self
            .snapshots
            .iter()
            .map(|rho| ProbabilityVector::from_slice(&rho.populations()))
            .collect::<Result<_>>()?;
        Ok(Trajectory {
            tau: self.tau,
            snapshots,
        })
    }
}

/// `P^(k) = Q^k P^(0)` for `k = 0..=steps`.
pub fn relax_classical(
    q: &StochasticMatrix,
    p0: &ProbabilityVector,
    steps: usize,
) -> Result<Trajectory<ProbabilityVector>> {
    if q.dim() != p0.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            actual: p0.dim(),
        });
    }
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(p0.clone());
    for _ in 0..steps {
        let next = q.matrix() * snapshots.last().expect("non-empty").vector();
        snapshots.push(ProbabilityVector::new(next)?);
    }
    Ok(Trajectory { tau: 1.0, snapshots })
}

pub fn relax_quantum(m: &SuperoperatorMatrix, rho0: &DensityMatrix, steps: usize) -> Result<Trajectory<DensityMatrix>> {
    if m.state_dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.state_dim(),
            actual: rho0.dim(),
        });
    }
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(rho0.clone());
    for _ in 0..steps {
        let next = m.apply(snapshots.last().expect("non-empty"))?;
        snapshots.push(next);
    }
    Ok(Trajectory { tau: 1.0, snapshots })
}

/// Amplitudes `C_s = ⟨l_s|P(0)⟩` of an initial state in a biorthonormal
/// eigenbasis, with the data needed to rebuild `P(k)`.
#[derive(Debug, Clone)]
pub struct SpectralAmplitudes {
    stationary: CVector,
    coefficients: Vec<Complex64>,
    eigenvalues: Vec<Complex64>,
    rights: Vec<CVector>,
}

impl SpectralAmplitudes {
    /// `C_s` for `s = 2..N`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `C_1 r_1`, the stationary component.
    pub fn stationary(&self) -> &CVector {
        &self.stationary
    }

    /// `π + Σ_s C_s r_s μ_s^k`, real part.
    ///
    /// Powers of `μ` are used rather than `e^{-λk}` so that modes with
    /// `μ = 0` contribute exactly nothing after the first step.
    pub fn reconstruct(&self, k: i32) -> DVector<f64> {
        let mut acc = self.stationary.clone();
        for ((c, mu), r) in self.coefficients.iter().zip(&self.eigenvalues).zip(&self.rights) {
            let weight = c * mu.powi(k);
            acc += r.map(|z| z * weight);
        }
        acc.map(|z| z.re)
    }
}

pub fn spectral_expansion(d: &SpectralDecomposition, p0: &ProbabilityVector) -> Result<SpectralAmplitudes> {
    if !d.is_biorthonormal() {
        return Err(Error::DefectiveSpectrum {
            condition: d.condition(),
        });
    }
    if d.dim() != p0.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            actual: p0.dim(),
        });
    }
    let p = p0.vector().map(|x| Complex64::new(x, 0.0));
    let first = d.mode(0);
    let c1 = first.left.dotc(&p);
    let rest = &d.modes()[1..];
    Ok(SpectralAmplitudes {
        stationary: first.right.map(|z| z * c1),
        coefficients: rest.iter().map(|m| m.left.dotc(&p)).collect(),
        eigenvalues: rest.iter().map(|m| m.mu).collect(),
        rights: rest.iter().map(|m| m.right.clone()).collect(),
    })
}

/// Site marginals `p_l = X_l + Y_l` of a coined-walk distribution.
pub fn marginals(p: &ProbabilityVector, length: usize) -> Result<ProbabilityVector> {
    if p.dim() != 2 * length {
        return Err(Error::DimensionMismatch {
            expected: 2 * length,
            actual: p.dim(),
        });
    }
    let v = p.vector();
    ProbabilityVector::new(DVector::from_fn(length, |l, _| v[l] + v[length + l]))
}

/// Decay rate per step from a least-squares fit of `ln r(k)` over the last
/// third of the series. Zero or non-finite samples are skipped.
pub fn late_time_rate(residuals: &[f64]) -> Option<f64> {
    let start = residuals.len() - residuals.len() / 3;
    let points: Vec<(f64, f64)> = residuals[start..]
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0.0 && r.is_finite())
        .map(|(i, &r)| ((start + i) as f64, r.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxationPattern {
    Monotone,
    Oscillatory,
}

/// Classifies the late-time approach to equilibrium from residual vectors
/// `e(k) = P(k) - π`.
///
/// Only even steps are inspected, which hides the harmless period-2 flip of
/// modes with real negative `μ`. Among samples still above round-off, the late
/// half is scanned and each component that carries a non-negligible share of
/// `‖e‖` is checked for sign changes. A slow complex rotation makes some
/// component change sign repeatedly; a real slowest mode never does.
pub fn relaxation_pattern(residuals: &[DVector<f64>]) -> RelaxationPattern {
    let live: Vec<&DVector<f64>> = residuals.iter().step_by(2).filter(|e| e.norm() > 1e-12).collect();
    let late = &live[live.len() / 2..];
    let Some(first) = late.first() else {
        return RelaxationPattern::Monotone;
    };
    for c in 0..first.len() {
        let mut last_sign = 0.0;
        let mut changes = 0;
        for e in late {
            let x = e[c];
            if x.abs() <= 1e-3 * e.norm() {
                continue;
            }
            let sign = x.signum();
            if last_sign != 0.0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
        if changes >= 2 {
            return RelaxationPattern::Oscillatory;
        }
    }
    RelaxationPattern::Monotone
}
