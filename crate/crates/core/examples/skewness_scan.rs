//! Skewness of the position distribution as a function of the coupling.
//! Complex next-nearest hopping makes the spreading chiral; the skewness is
//! time independent and largest at g = 1/(2 sqrt 2).
//!
//! cargo run --release --example skewness_scan

use std::f64::consts::FRAC_PI_2;

use chiral_walk::evolve::{evolve, probability_density, skewness, Lattice};
use chiral_walk::{WalkError, WalkParams};

fn main() -> Result<(), WalkError> {
    let t = 20.0;
    let mut best = (0.0, f64::MIN);
    println!("{:>6} {:>10} {:>10}", "g", "gamma", "closed");
    for i in 0..=20 {
        let g = 0.05 * f64::from(i);
        let p = WalkParams::new(g, FRAC_PI_2)?;
        let gamma = skewness(&probability_density(&evolve(&p, t, Lattice::Auto)?))?;
        let closed = 3.0 * 2f64.sqrt() * g / (1.0 + 4.0 * g * g).powf(1.5);
        println!("{g:>6.2} {gamma:>10.6} {closed:>10.6}");
        if gamma > best.1 {
            best = (g, gamma);
        }
    }
    println!(
        "largest on this grid at g = {:.2}; analytic maximum at g = {:.4}",
        best.0,
        1.0 / (2.0 * 2f64.sqrt())
    );
    Ok(())
}
