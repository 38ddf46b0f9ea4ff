//! Partially dephased ring: tracked slow exponents of the Liouvillian over a
//! window of `β`, written as CSV to stdout.

use std::f64::consts::PI;

use oqw::transitions::{sweep, uniform_grid, WalkFamily};

fn main() -> oqw::Result<()> {
    let q: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.5), |s| s.parse())
        .expect("q must be a number");
    let ring = WalkFamily::ring(1.0, 1.0, 0.5, PI / 3.0)?;
    let grid = uniform_grid(0.1, 0.4, 31)?;
    let table = sweep(&ring, &grid, q)?;

    eprintln!("q = {q}, ambiguous tracking steps: {}", table.ambiguous_steps.len());
    println!("beta,re_l2,im_l2,re_l3,im_l3,g,near_ep");
    for r in &table.records {
        println!(
            "{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            r.beta, r.lambda2.re, r.lambda2.im, r.lambda3.re, r.lambda3.im, r.g, r.near_ep
        );
    }
    Ok(())
}
