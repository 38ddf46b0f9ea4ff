//! Quantum trajectory of the coined walk under dephasing: populations,
//! coherence and the approach to the maximally mixed state.

use std::f64::consts::FRAC_PI_2;

use oqw::channels::{liouvillian, DensityMatrix};
use oqw::dynamics::{marginals, relax_quantum, ProbabilityVector};
use oqw::models::{coined_step_unitary, CoinedWalkModel};

fn main() -> oqw::Result<()> {
    let model = CoinedWalkModel::new(3, 0.3 * FRAC_PI_2)?;
    let u = coined_step_unitary(&model)?;
    let rho0 = DensityMatrix::basis_state(6, 0)?;

    for q in [0.0, 0.2, 1.0] {
        let t = relax_quantum(&liouvillian(&u, q)?, &rho0, 60)?;
        println!("q = {q}");
        for k in [0, 1, 5, 20, 60] {
            let rho = t.state(k);
            let sites = marginals(&ProbabilityVector::from_slice(&rho.populations())?, 3)?;
            let p = sites.as_slice();
            println!(
                "  k = {k:>2}  sites ({:.4}, {:.4}, {:.4})  coherence {:.3e}  min eig {:+.1e}",
                p[0],
                p[1],
                p[2],
                rho.coherence_norm(),
                rho.min_eigenvalue()
            );
        }
    }
    Ok(())
}
