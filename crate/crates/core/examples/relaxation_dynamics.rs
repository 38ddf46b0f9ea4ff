//! Relaxation towards the uniform state on either side of a transition.
//!
//! Prints the residual `p_n(k) - 1/3` of each site, then classifies the
//! approach as monotone or oscillatory.

use std::f64::consts::PI;

use oqw::channels::classical_markov;
use oqw::dynamics::{late_time_rate, relax_classical, relaxation_pattern, ProbabilityVector};
use oqw::transitions::WalkFamily;

fn main() -> oqw::Result<()> {
    let ring = WalkFamily::ring(1.0, 1.0, 0.5, PI / 3.0)?;
    let start = ProbabilityVector::basis(3, 0)?;

    for beta in [0.70, 0.80] {
        let q = classical_markov(&ring.unitary(beta)?);
        let t = relax_classical(&q, &start, 300)?;
        let residuals = t.residuals(&[1.0 / 3.0; 3]);

        println!("beta = {beta}");
        for k in (0..=20).step_by(4) {
            let e = &residuals[k];
            println!("  k = {k:>2}  {:+.3e} {:+.3e} {:+.3e}", e[0], e[1], e[2]);
        }
        let norms: Vec<f64> = residuals.iter().take(12).map(|e| e.norm()).collect();
        let slow = ring.spectrum(beta, 1.0)?.decomposition.mode(1).lambda.re;
        println!(
            "  fitted rate {:.4}  (Re lambda_2 = {slow:.4})",
            late_time_rate(&norms).unwrap_or(f64::NAN)
        );
        println!("  pattern: {:?}", relaxation_pattern(&residuals));
    }
    Ok(())
}
