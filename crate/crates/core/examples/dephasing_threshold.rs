//! Dephasing threshold: below `q_c` the ring relaxes without any transition
//! in the scanned window; above it the transition point drifts with `q`.

use std::f64::consts::PI;

use oqw::transitions::{locate_crossing, locate_qc, WalkFamily};

fn main() -> oqw::Result<()> {
    for (label, phi) in [("phi = 0", 0.0), ("phi = pi/3", PI / 3.0)] {
        let ring = WalkFamily::ring(1.0, 1.0, 0.5, phi)?;
        let report = locate_qc(&ring, (0.1, 1.2))?;
        println!("{label}");
        match report.q_c {
            Some(qc) => println!("  q_c ~ {qc:.4}  bracket {:?}", report.q_bracket.unwrap()),
            None => println!("  no threshold: {}", report.explanation.unwrap_or_default()),
        }
        for (q, beta_c) in &report.drift {
            let order = locate_crossing(&ring, (0.1, 1.2), *q)?.order;
            println!("  q = {q:.4}  beta_c = {beta_c:.5}  {order:?}");
        }
    }
    Ok(())
}
