//! Parameter sweeps over the control angle, location and classification of
//! dynamical transitions in the relaxation spectrum, and scans over the
//! dephasing strength and the system size.
//!
//! A transition is signalled by an *event* between a reference point and a
//! probe point: either the slowest decaying mode changes between real and
//! complex `μ`, or the two slowest distinct decay rates swap order when the
//! modes are followed by eigenvector overlap. Windows are scanned on a uniform
//! grid and the first bracketed event is refined by bisection.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{classical_markov, liouvillian, propagator};
use crate::error::{Error, Result};
use crate::linalg::{normalized_overlap, CVector};
use crate::models::{coined_step_unitary, ring_hamiltonian, CoinedWalkModel, RingModel, UnitaryMatrix};
use crate::spectral::{detailed_balance_residual, full_spectrum, match_modes, OverlapValue, SpectralDecomposition};

pub const DEFAULT_GRID: usize = 201;
/// `g` at or above this marks an exceptional point.
pub const EP_OVERLAP: f64 = 0.999;
/// Offsets from `β_c` at which `g` is evaluated, on both sides. The
/// square-root splitting at an exceptional point leaves `1 - g` proportional
/// to the offset with a model-dependent prefactor, so the smaller offsets
/// catch points where `1e-4` alone falls just short.
pub const OVERLAP_OFFSETS: [f64; 3] = [1e-4, 1e-5, 1e-6];
/// Critical eigenvectors are read this far below `β_c`, on the side the
/// bisection approached from.
pub const VECTOR_OFFSET: f64 = 1e-9;
pub const BISECTION_WIDTH: f64 = 1e-12;
pub const QC_WIDTH: f64 = 5e-3;
pub const QC_RANGE: (f64, f64) = (0.05, 1.0);
const COMPLEX_MU: f64 = 1e-8;
const RATE_SPLIT: f64 = 1e-10;
const CROSSING_TOL: f64 = 1e-6;

/// A one-parameter family of walks indexed by the control angle `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum WalkFamily {
    /// Ring with fixed hoppings; `β = J_1 τ`.
    Ring { j1: f64, j2: f64, j3: f64, phi: f64 },
    /// Coined walk with `β` the interior coin angle.
    Coined { length: usize },
}

impl WalkFamily {
    pub fn ring(j1: f64, j2: f64, j3: f64, phi: f64) -> Result<Self> {
        RingModel::new(j1, j2, j3, phi)?;
        if j1 == 0.0 {
            return Err(Error::param(
                "j1",
                "the control angle is measured in units of j1, which must be positive",
            ));
        }
        Ok(WalkFamily::Ring { j1, j2, j3, phi })
    }

    pub fn coined(length: usize) -> Result<Self> {
        CoinedWalkModel::new(length, 0.0)?;
        Ok(WalkFamily::Coined { length })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        match *self {
            WalkFamily::Ring { .. } => 3,
            WalkFamily::Coined { length } => 2 * length,
        }
    }

    pub fn unitary(&self, beta: f64) -> Result<UnitaryMatrix> {
        match *self {
            WalkFamily::Ring { j1, j2, j3, phi } => {
                let model = RingModel::new(j1, j2, j3, phi)?;
                if !(j1 > 0.0) {
                    return Err(Error::param("j1", "must be positive to convert β into a step duration"));
                }
                propagator(&ring_hamiltonian(&model), beta / j1)
            }
            WalkFamily::Coined { length } => coined_step_unitary(&CoinedWalkModel::new(length, beta)?),
        }
    }

    /// Decomposes the one-step map at `(β, q)`: the Markov matrix when
    /// `q = 1`, the Liouvillian otherwise.
    pub fn spectrum(&self, beta: f64, q: f64) -> Result<PointSpectrum> {
        check_q(q)?;
        let u = self.unitary(beta)?;
        let markov = classical_markov(&u);
        let db_residual = detailed_balance_residual(&markov);
        let decomposition = if q == 1.0 {
            full_spectrum(&markov)?
        } else {
            full_spectrum(&liouvillian(&u, q)?)?
        };
        Ok(PointSpectrum {
            beta,
            decomposition,
            db_residual,
        })
    }

    /// The pair of decay modes whose coalescence is monitored.
    ///
    /// On the ring these are the two slowest decay modes. On the coined walk
    /// the slowest decay mode is paired with the decay mode nearest to its
    /// conjugate `μ*`: the partner itself while `μ` is complex, the closest
    /// real neighbour once it is not.
    pub fn monitored_pair(&self, d: &SpectralDecomposition) -> Option<(usize, usize)> {
        let decay = d.decay_indices();
        if decay.len() < 2 {
            return None;
        }
        let a = decay[0];
        match self {
            WalkFamily::Ring { .. } => Some((a, decay[1])),
            WalkFamily::Coined { .. } => {
                let mu = d.mode(a).mu.conj();
                let b = decay[1..]
                    .iter()
                    .copied()
                    .min_by(|&x, &y| {
                        (d.mode(x).mu - mu)
                            .norm()
                            .total_cmp(&(d.mode(y).mu - mu).norm())
                            .then(x.cmp(&y))
                    })
                    .expect("at least one other decay mode");
                Some((a, b))
            }
        }
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

#[derive(Debug, Clone)]
pub struct PointSpectrum {
    pub beta: f64,
    pub decomposition: SpectralDecomposition,
    /// Symmetry residual of `|U|²`.
    pub db_residual: f64,
}

/// Uniform grid with `n ≥ 2` points including both ends.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::param("grid", format!("need at least 2 points, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::param("window", format!("need finite lo < hi, got ({lo}, {hi})")));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub beta: f64,
    pub lambda2: Complex64,
    pub lambda3: Complex64,
    pub g: f64,
    pub db_residual: f64,
    pub near_ep: bool,
    /// Set when the decomposition failed at this point.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub q: f64,
    pub records: Vec<SweepRecord>,
    /// Exponents of every mode per grid point, columns following tracked
    /// branches (labelled by spectral order at the anchor point).
    pub branches: Vec<Vec<Complex64>>,
    /// Index of the first point at which two decay modes exist; the
    /// `lambda2`/`lambda3` columns follow the monitored pair from there.
    pub anchor: Option<usize>,
    pub ambiguous_steps: Vec<usize>,
}

/// Spectra over a `β` grid with branch continuity.
///
/// Points are decomposed in parallel; tracking runs sequentially afterwards,
/// forward and backward from the anchor point.
pub fn sweep(family: &WalkFamily, grid: &[f64], q: f64) -> Result<SweepTable> {
    check_q(q)?;
    if grid.is_empty() {
        return Err(Error::param("grid", "empty grid"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("grid", "control values must be strictly increasing"));
    }
    let points: Vec<Result<PointSpectrum>> = grid.par_iter().map(|&b| family.spectrum(b, q)).collect();

    let good: Vec<usize> = (0..points.len()).filter(|&k| points[k].is_ok()).collect();
    let spectrum = |k: usize| &points[k].as_ref().expect("filtered").decomposition;

    let anchor = good
        .iter()
        .copied()
        .find(|&k| family.monitored_pair(spectrum(k)).is_some());
    let n = family.dim().pow(if q == 1.0 { 1 } else { 2 });
    let mut labels: Vec<Option<Vec<usize>>> = vec![None; points.len()];
    let mut ambiguous_steps = Vec::new();
    let start = anchor.or(good.first().copied());
    if let Some(start) = start {
        labels[start] = Some((0..n).collect());
        let pos = good.iter().position(|&k| k == start).expect("anchor is good");
        let mut follow = |from: usize, to: usize| -> Result<()> {
            let (a, b) = (spectrum(from), spectrum(to));
            let prev: Vec<_> = a.modes().iter().map(|m| (m.mu, &m.right)).collect();
            let next: Vec<_> = b.modes().iter().map(|m| (m.mu, &m.right)).collect();
            let matching = match_modes(&prev, &next)?;
            if matching.ambiguous {
                ambiguous_steps.push(from.min(to));
            }
            let row = labels[from]
                .as_ref()
                .expect("source labelled")
                .iter()
                .map(|&i| matching.assignment[i])
                .collect();
            labels[to] = Some(row);
            Ok(())
        };
        for w in good[pos..].windows(2) {
            follow(w[0], w[1])?;
        }
        for w in good[..=pos].windows(2).rev() {
            follow(w[1], w[0])?;
        }
    }
    ambiguous_steps.sort_unstable();

    let pair = match anchor {
        Some(k) => family.monitored_pair(spectrum(k)),
        None if n >= 3 => Some((1, 2)),
        None => None,
    };

    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut records = Vec::with_capacity(points.len());
    let mut branches = Vec::with_capacity(points.len());
    for (k, point) in points.iter().enumerate() {
        match point {
            Ok(p) => {
                let d = &p.decomposition;
                let row = labels[k].as_ref().expect("every good point is labelled");
                let (lambda2, lambda3, g) = match pair {
                    Some((a, b)) => {
                        let (ma, mb) = (d.mode(row[a]), d.mode(row[b]));
                        let g = OverlapValue::between(&ma.right, &mb.right)?.value();
                        (ma.lambda, mb.lambda, g)
                    }
                    None => (nan, nan, f64::NAN),
                };
                records.push(SweepRecord {
                    beta: p.beta,
                    lambda2,
                    lambda3,
                    g,
                    db_residual: p.db_residual,
                    near_ep: d.is_near_ep(),
                    error: None,
                });
                branches.push(row.iter().map(|&i| d.mode(i).lambda).collect());
            }
            Err(e) => {
                records.push(SweepRecord {
                    beta: grid[k],
                    lambda2: nan,
                    lambda3: nan,
                    g: f64::NAN,
                    db_residual: f64::NAN,
                    near_ep: false,
                    error: Some(e.to_string()),
                });
                branches.push(vec![nan; n]);
            }
        }
    }
    Ok(SweepTable {
        parameter: "beta".into(),
        q,
        records,
        branches,
        anchor,
        ambiguous_steps,
    })
}

/// State at a reference point used to detect an event at a later point.
struct Probe {
    slow_complex: bool,
    tracked: Option<(CVector, CVector)>,
}

impl Probe {
    fn at(d: &SpectralDecomposition) -> Option<Self> {
        let decay = d.decay_indices();
        let &a = decay.first()?;
        let ra = d.mode(a).lambda.re;
        let b = decay[1..]
            .iter()
            .copied()
            .find(|&i| d.mode(i).lambda.re - ra > RATE_SPLIT * ra.abs().max(1.0));
        Some(Self {
            slow_complex: d.mode(a).mu.im.abs() > COMPLEX_MU,
            tracked: b.map(|b| (d.mode(a).right.clone(), d.mode(b).right.clone())),
        })
    }

    /// True if `d` lies on the other side of a transition.
    fn event(&self, d: &SpectralDecomposition) -> bool {
        let Some(now) = Probe::at(d) else {
            return false;
        };
        if now.slow_complex != self.slow_complex {
            return true;
        }
        let Some((va, vb)) = &self.tracked else {
            return false;
        };
        let decay = d.decay_indices();
        if decay.len() < 2 {
            return false;
        }
        let best = |v: &CVector, skip: Option<usize>| {
            decay
                .iter()
                .copied()
                .filter(|&i| Some(i) != skip)
                .max_by(|&x, &y| {
                    let ox = normalized_overlap(v, &d.mode(x).right).unwrap_or(0.0);
                    let oy = normalized_overlap(v, &d.mode(y).right).unwrap_or(0.0);
                    ox.total_cmp(&oy).then(y.cmp(&x))
                })
                .expect("two decay modes")
        };
        let a = best(va, None);
        let b = best(vb, Some(a));
        d.mode(a).lambda.re > d.mode(b).lambda.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionOrder {
    FirstOrder,
    SecondOrder,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub beta_c: Option<f64>,
    pub q: f64,
    pub order: TransitionOrder,
    /// Largest `g` of the monitored pair over [`OVERLAP_OFFSETS`].
    pub g_at_critical: Option<f64>,
    /// `|λ_a - λ_b|` of the monitored pair at `β_c`.
    pub gap_at_critical: Option<f64>,
    /// `|Re λ_a - Re λ_b|` of the monitored pair at `β_c`.
    pub rate_gap_at_critical: Option<f64>,
    /// Monitored eigenvectors just below `β_c`.
    pub r2: Option<Vec<Complex64>>,
    pub r3: Option<Vec<Complex64>>,
    pub bracket_width: Option<f64>,
    pub explanation: Option<String>,
}

impl TransitionReport {
    fn none(q: f64, explanation: impl Into<String>) -> Self {
        Self {
            beta_c: None,
            q,
            order: TransitionOrder::None,
            g_at_critical: None,
            gap_at_critical: None,
            rate_gap_at_critical: None,
            r2: None,
            r3: None,
            bracket_width: None,
            explanation: Some(explanation.into()),
        }
    }
}

/// First grid cell of the window containing an event.
fn find_bracket(family: &WalkFamily, window: (f64, f64), q: f64, points: usize) -> Result<Option<(f64, f64)>> {
    let grid = uniform_grid(window.0, window.1, points)?;
    let spectra: Vec<SpectralDecomposition> = grid
        .par_iter()
        .map(|&b| family.spectrum(b, q).map(|p| p.decomposition))
        .collect::<Result<_>>()?;
    for k in 1..grid.len() {
        if let Some(probe) = Probe::at(&spectra[k - 1]) {
            if probe.event(&spectra[k]) {
                return Ok(Some((grid[k - 1], grid[k])));
            }
        }
    }
    Ok(None)
}

/// Bisects an event bracket down to [`BISECTION_WIDTH`].
fn bisect(family: &WalkFamily, mut lo: f64, mut hi: f64, q: f64) -> Result<(f64, f64)> {
    let mut reference = Probe::at(&family.spectrum(lo, q)?.decomposition)
        .ok_or_else(|| Error::param("bracket", "no decaying mode at the lower end"))?;
    for _ in 0..200 {
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = family.spectrum(mid, q)?.decomposition;
        if reference.event(&d) {
            hi = mid;
        } else if let Some(mut p) = Probe::at(&d) {
            // keep following the old pair once the rates get too close to tell apart
            if p.tracked.is_none() {
                p.tracked = reference.tracked.take();
            }
            lo = mid;
            reference = p;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Locates the first transition inside `bracket` and classifies it.
pub fn locate_crossing(family: &WalkFamily, bracket: (f64, f64), q: f64) -> Result<TransitionReport> {
    check_q(q)?;
    let Some((lo, hi)) = find_bracket(family, bracket, q, DEFAULT_GRID)? else {
        return Ok(TransitionReport::none(
            q,
            format!(
                "no change in the slowest decay mode between beta = {} and {}",
                bracket.0, bracket.1
            ),
        ));
    };
    let (lo, hi) = bisect(family, lo, hi, q)?;
    let mut report = classify_transition(family, 0.5 * (lo + hi), q)?;
    report.bracket_width = Some(hi - lo);
    Ok(report)
}

/// Decides between an exceptional point and a plain crossing at `β_c`.
pub fn classify_transition(family: &WalkFamily, beta_c: f64, q: f64) -> Result<TransitionReport> {
    let pair_overlap = |beta: f64| -> Result<Option<f64>> {
        let d = family.spectrum(beta, q)?.decomposition;
        Ok(match family.monitored_pair(&d) {
            Some((a, b)) => Some(OverlapValue::between(&d.mode(a).right, &d.mode(b).right)?.value()),
            None => None,
        })
    };
    let mut g: Option<f64> = None;
    for offset in OVERLAP_OFFSETS {
        for beta in [beta_c - offset, beta_c + offset] {
            if let Some(x) = pair_overlap(beta)? {
                g = Some(g.map_or(x, |y| y.max(x)));
            }
        }
    }

    let at = family.spectrum(beta_c, q)?.decomposition;
    let (gap, rate_gap) = match family.monitored_pair(&at) {
        Some((a, b)) => {
            let (la, lb) = (at.mode(a).lambda, at.mode(b).lambda);
            (Some((la - lb).norm()), Some((la.re - lb.re).abs()))
        }
        None => (None, None),
    };

    let below = family.spectrum(beta_c - VECTOR_OFFSET, q)?.decomposition;
    let (r2, r3) = match family.monitored_pair(&below) {
        Some((a, b)) => (
            Some(below.mode(a).right.iter().copied().collect()),
            Some(below.mode(b).right.iter().copied().collect()),
        ),
        None => (None, None),
    };

    let (order, explanation) = match (g, rate_gap) {
        (Some(g), _) if g >= EP_OVERLAP => (TransitionOrder::SecondOrder, None),
        (Some(_), Some(gap)) if gap <= CROSSING_TOL => (TransitionOrder::FirstOrder, None),
        (Some(_), Some(gap)) => (
            TransitionOrder::None,
            Some(format!(
                "eigenvectors stay distinct but decay rates differ by {gap:.3e}"
            )),
        ),
        _ => (TransitionOrder::None, Some("fewer than two decaying modes".to_string())),
    };
    Ok(TransitionReport {
        beta_c: Some(beta_c),
        q,
        order,
        g_at_critical: g,
        gap_at_critical: gap,
        rate_gap_at_critical: rate_gap,
        r2,
        r3,
        bracket_width: None,
        explanation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QcReport {
    pub q_c: Option<f64>,
    /// Final `(q_lo, q_hi)` with no transition at `q_lo` and one at `q_hi`.
    pub q_bracket: Option<(f64, f64)>,
    pub beta_window: (f64, f64),
    /// `(q, β_c)` on a five-point grid from `q_hi` to 1.
    pub drift: Vec<(f64, f64)>,
    pub explanation: Option<String>,
}

/// Whether the window opens on the slow side of a transition it contains.
fn has_transition(family: &WalkFamily, window: (f64, f64), q: f64) -> Result<bool> {
    let start = family.spectrum(window.0, q)?.decomposition;
    let Some(probe) = Probe::at(&start) else {
        return Ok(false);
    };
    if probe.slow_complex {
        return Ok(false);
    }
    Ok(find_bracket(family, window, q, DEFAULT_GRID)?.is_some())
}

/// Smallest dephasing probability for which a transition appears inside
/// `beta_window`, by bisection over `q ∈ [0.05, 1]`.
pub fn locate_qc(family: &WalkFamily, beta_window: (f64, f64)) -> Result<QcReport> {
    let (mut lo, mut hi) = QC_RANGE;
    let at_lo = has_transition(family, beta_window, lo)?;
    let at_hi = has_transition(family, beta_window, hi)?;
    if at_lo || !at_hi {
        let why = if at_lo {
            format!("transition present already at q = {lo}; no threshold in range")
        } else {
            format!("no transition at q = {hi} inside the window")
        };
        return Ok(QcReport {
            q_c: None,
            q_bracket: None,
            beta_window,
            drift: Vec::new(),
            explanation: Some(why),
        });
    }
    while hi - lo > QC_WIDTH {
        let mid = 0.5 * (lo + hi);
        if has_transition(family, beta_window, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let qs: Vec<f64> = (0..5).map(|k| hi + (1.0 - hi) * k as f64 / 4.0).collect();
    let drift = qs
        .par_iter()
        .map(|&q| {
            let r = locate_crossing(family, beta_window, q)?;
            Ok((q, r.beta_c.unwrap_or(f64::NAN)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QcReport {
        q_c: Some(0.5 * (lo + hi)),
        q_bracket: Some((lo, hi)),
        beta_window,
        drift,
        explanation: None,
    })
}

/// Default `β` window for the coined walk: `(0.05, 0.95)·π/2`.
pub const COINED_WINDOW: (f64, f64) = (0.05 * FRAC_PI_2, 0.95 * FRAC_PI_2);

/// `β_c` of the coined walk for each length, located in [`COINED_WINDOW`].
pub fn size_scan(lengths: &[usize]) -> Result<Vec<(usize, TransitionReport)>> {
    if let Some(&bad) = lengths.iter().find(|&&l| l < 3) {
        return Err(Error::param("L", format!("size scan needs L >= 3, got {bad}")));
    }
    lengths
        .par_iter()
        .map(|&l| Ok((l, locate_crossing(&WalkFamily::coined(l)?, COINED_WINDOW, 1.0)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ring(phi: f64) -> WalkFamily {
        WalkFamily::ring(1.0, 1.0, 0.5, phi).unwrap()
    }

    #[test]
    fn ring_crossing_without_flux() {
        let r = locate_crossing(&ring(0.0), (0.7, 0.9), 1.0).unwrap();
        assert!((r.beta_c.unwrap() - 0.8127).abs() < 1e-3, "{r:?}");
        assert_eq!(r.order, TransitionOrder::FirstOrder);
        assert!(r.bracket_width.unwrap() <= 1e-6);
    }

    #[test]
    fn ring_exceptional_point_with_flux() {
        let r = locate_crossing(&ring(PI / 3.0), (0.6, 0.9), 1.0).unwrap();
        assert!((r.beta_c.unwrap() - 0.7412).abs() < 1e-3, "{r:?}");
        assert_eq!(r.order, TransitionOrder::SecondOrder);
    }

    #[test]
    fn empty_bracket_reports_none() {
        let r = locate_crossing(&ring(0.0), (0.3, 0.5), 1.0).unwrap();
        assert_eq!(r.order, TransitionOrder::None);
        assert!(r.explanation.is_some());
    }

    #[test]
    fn ring_family_requires_positive_j1() {
        assert!(WalkFamily::ring(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(uniform_grid(1.0, 1.0, 10).is_err());
        assert!(uniform_grid(0.0, 1.0, 1).is_err());
        assert!(sweep(&ring(0.0), &[0.5, 0.4], 1.0).is_err());
    }

    #[test]
    fn sweep_below_crossing_is_real() {
        let grid = uniform_grid(0.5, 0.8, 31).unwrap();
        let t = sweep(&ring(0.0), &grid, 1.0).unwrap();
        for r in &t.records {
            assert!(r.lambda2.im.abs() < 1e-10 || (r.lambda2.im.abs() - PI).abs() < 1e-10);
            assert!(r.lambda3.im.abs() < 1e-10 || (r.lambda3.im.abs() - PI).abs() < 1e-10);
            assert!(r.db_residual <= 1e-12);
        }
    }
}
