//! Exceptional point of the ring threaded by flux `π/3`.
//!
//! Two real eigenvalues of the Markov matrix coalesce together with their
//! eigenvectors and leave as a complex-conjugate pair.

use std::f64::consts::PI;

use oqw::spectral::overlap_between_modes;
use oqw::transitions::{locate_crossing, WalkFamily};

fn main() -> oqw::Result<()> {
    let ring = WalkFamily::ring(1.0, 1.0, 0.5, PI / 3.0)?;
    let report = locate_crossing(&ring, (0.6, 0.9), 1.0)?;
    let beta_c = report.beta_c.expect("exceptional point inside the bracket");

    println!("beta_c = {beta_c:.7}  order = {:?}", report.order);
    println!("g      = {:.6}", report.g_at_critical.unwrap_or(f64::NAN));
    if let Some(r) = &report.r2 {
        let re: Vec<String> = r.iter().map(|z| format!("{:+.5}", z.re)).collect();
        println!("merged eigenvector ~ ({})", re.join(", "));
    }

    println!("\n{:>8} {:>12} {:>12} {:>10} {:>10}", "beta", "mu2", "mu3", "g", "cond");
    for k in -4..=4 {
        let beta = beta_c + 0.01 * k as f64;
        let d = ring.spectrum(beta, 1.0)?.decomposition;
        let g = overlap_between_modes(&d, 1, 2)?.value();
        println!(
            "{beta:>8.4} {:>12} {:>12} {g:>10.6} {:>10.2e}",
            format!("{:.4}{:+.4}i", d.mode(1).mu.re, d.mode(1).mu.im),
            format!("{:.4}{:+.4}i", d.mode(2).mu.re, d.mode(2).mu.im),
            d.condition()
        );
    }
    Ok(())
}
