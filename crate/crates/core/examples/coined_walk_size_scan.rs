//! Exceptional point of the coined walk on a line of `L` sites, and how it
//! moves as the line grows.

use std::f64::consts::FRAC_PI_2;

use oqw::models::{coined_markov_direct, CoinedWalkModel};
use oqw::spectral::{full_spectrum, pairing_check};
use oqw::transitions::size_scan;

fn main() -> oqw::Result<()> {
    let lengths = [3, 4, 5, 6, 7];
    println!("{:>3} {:>14} {:>12} {:>10}", "L", "beta_c/(pi/2)", "order", "g");
    for (l, r) in size_scan(&lengths)? {
        match r.beta_c {
            Some(b) => println!(
                "{l:>3} {:>14.9} {:>12} {:>10.6}",
                b / FRAC_PI_2,
                format!("{:?}", r.order),
                r.g_at_critical.unwrap_or(f64::NAN)
            ),
            None => println!("{l:>3} {:>14} {:>12}", "-", "none"),
        }
    }

    // every eigenvalue comes with its negative
    let q = coined_markov_direct(&CoinedWalkModel::new(4, 0.6 * FRAC_PI_2)?);
    let d = full_spectrum(&q)?;
    println!(
        "\nL = 4 spectrum at 0.6 pi/2 (pairing residual {:.1e}):",
        pairing_check(&d, 4)?
    );
    for m in d.modes() {
        println!("  mu = {:+.6} {:+.6}i", m.mu.re, m.mu.im);
    }
    Ok(())
}
