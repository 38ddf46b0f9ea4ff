//! Expanding an initial distribution in the biorthogonal eigenbasis of the
//! Markov matrix and rebuilding the trajectory from it.

use oqw::channels::classical_markov;
use oqw::dynamics::{relax_classical, spectral_expansion, ProbabilityVector};
use oqw::spectral::full_spectrum;
use oqw::transitions::WalkFamily;

fn main() -> oqw::Result<()> {
    let ring = WalkFamily::ring(1.0, 1.0, 0.5, 0.0)?;
    let q = classical_markov(&ring.unitary(0.79)?);
    let d = full_spectrum(&q)?;
    let p0 = ProbabilityVector::basis(3, 0)?;
    let amps = spectral_expansion(&d, &p0)?;

    println!("biorthonormality residual {:.1e}", d.biorthonormality_residual());
    for (s, (c, m)) in amps.coefficients().iter().zip(&d.modes()[1..]).enumerate() {
        println!(
            "C_{} = {:+.6}   lambda = {:.6}{:+.6}i",
            s + 2,
            c.re,
            m.lambda.re,
            m.lambda.im
        );
    }

    let t = relax_classical(&q, &p0, 12)?;
    let worst = t
        .states()
        .iter()
        .enumerate()
        .map(|(k, p)| (amps.reconstruct(k as i32) - p.vector()).amax())
        .fold(0.0, f64::max);
    println!("max |expansion - iteration| over 12 steps: {worst:.1e}");
    Ok(())
}
