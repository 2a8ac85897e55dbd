//! Generalized Airy functions A_1 (the ordinary Airy function) and A_3, and
//! the integrated squares that give the edge profiles.
//!
//! cargo run --release --example generalized_airy

use chiral_walk::airy::{airy_ode_residual, generalized_airy};
use chiral_walk::numerics::integrate;
use chiral_walk::WalkError;

fn main() -> Result<(), WalkError> {
    println!("{:>6} {:>12} {:>12} {:>10}", "xi", "A_1", "A_3", "resid_3");
    for i in -8..=4 {
        let xi = f64::from(i);
        println!(
            "{xi:>6.1} {:>12.8} {:>12.8} {:>10.1e}",
            generalized_airy(1, xi)?,
            generalized_airy(3, xi)?,
            airy_ode_residual(3, xi)?
        );
    }

    println!("\nint_0^xi A_k(-x)^2 dx");
    for xi in [1.0, 2.0, 4.0, 6.0] {
        let mut row = format!("{xi:>4.1}");
        for k in [1, 3] {
            let f = |x: f64| generalized_airy(k, -x).map(|a| a * a).unwrap_or(f64::NAN);
            row += &format!(" {:>10.6}", integrate(f, 0.0, xi, 1e-10, 1e-10)?);
        }
        println!("{row}");
    }
    Ok(())
}
