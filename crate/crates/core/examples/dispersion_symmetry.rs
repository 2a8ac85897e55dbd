//! Dispersion, group velocity and the reduction of the hopping phase to
//! [0, pi/2].
//!
//! cargo run --example dispersion_symmetry

use std::f64::consts::{FRAC_PI_2, PI};

use chiral_walk::{canonicalize, WalkError, WalkParams};

fn main() -> Result<(), WalkError> {
    let p = WalkParams::new(0.25, FRAC_PI_2)?;
    println!("g = 0.25, phi = pi/2");
    println!("{:>8} {:>10} {:>10} {:>10}", "q", "omega", "v", "omega''");
    for i in -4..4 {
        let q = f64::from(i) * PI / 4.0;
        println!(
            "{q:>8.4} {:>10.5} {:>10.5} {:>10.5}",
            p.omega(q),
            p.velocity(q),
            p.omega_deriv(q, 2)?
        );
    }

    // Every raw phase maps onto a canonical one; the raw dispersion is
    // recovered through the recorded wave-vector map and energy sign.
    println!("\nraw phi -> canonical phi, map, max |omega_raw - s omega_c|");
    for phi_raw in [0.3, 2.0, 3.6, 5.5, -1.0, 2.0 * PI + 0.4] {
        let raw = WalkParams::new(0.2, phi_raw)?;
        let c = canonicalize(raw);
        let err = (0..256)
            .map(|i| {
                let q = -PI + 2.0 * PI * f64::from(i) / 256.0;
                (raw.omega(c.map.raw_wave_vector(q)) - c.map.energy_sign() * c.params.omega(q)).abs()
            })
            .fold(0.0, f64::max);
        println!(
            "{phi_raw:>8.4} -> {:.4}  {:?}  {err:.1e}",
            c.params.phi(),
            c.map.wave_vector
        );
    }
    Ok(())
}
