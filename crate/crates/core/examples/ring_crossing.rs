//! Level crossing of the two slow relaxation rates on the flux-free ring.
//!
//! Below the crossing the slowest decay is along `(1, 0, -1)`, above it along
//! `(1, -2, 1)`; the two rates meet without mixing.

use oqw::transitions::{locate_crossing, WalkFamily};

fn main() -> oqw::Result<()> {
    let ring = WalkFamily::ring(1.0, 1.0, 0.5, 0.0)?;
    let report = locate_crossing(&ring, (0.7, 0.9), 1.0)?;

    let beta_c = report.beta_c.expect("crossing inside the bracket");
    println!("beta_c      = {beta_c:.7}");
    println!("order       = {:?}", report.order);
    println!("overlap g   = {:.3e}", report.g_at_critical.unwrap_or(f64::NAN));

    for (name, v) in [("r2", &report.r2), ("r3", &report.r3)] {
        let v = v.as_ref().expect("vectors reported with beta_c");
        let re: Vec<String> = v.iter().map(|z| format!("{:+.5}", z.re)).collect();
        println!("{name}          = ({})", re.join(", "));
    }

    for beta in [beta_c - 0.01, beta_c + 0.01] {
        let d = ring.spectrum(beta, 1.0)?.decomposition;
        println!(
            "beta = {beta:.4}: Re lambda = {:.5}, {:.5}",
            d.mode(1).lambda.re,
            d.mode(2).lambda.re
        );
    }
    Ok(())
}
