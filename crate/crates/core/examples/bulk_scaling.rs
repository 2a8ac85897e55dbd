//! Hydrodynamic collapse of the cumulative distributions onto functions of
//! nu = n / t, away from the fronts.
//!
//! cargo run --release --example bulk_scaling

use std::f64::consts::FRAC_PI_2;

use chiral_walk::hydro::{compare_bulk, VelocityProfile};
use chiral_walk::{WalkError, WalkParams};

fn main() -> Result<(), WalkError> {
    let t = 2000.0;
    for g in [0.0, 0.0625, 0.125, 0.25] {
        let p = WalkParams::new(g, FRAC_PI_2)?;
        let r = compare_bulk(&p, t, 8.0)?;
        let vp = VelocityProfile::new(&p)?;
        println!("g = {g}, t = {t}");
        println!(
            "  Phi: sup outside windows {:.2e}, inside {:.2e}",
            r.phi.sup_outside, r.phi.sup_inside
        );
        println!(
            "  J:   sup outside windows {:.2e}, inside {:.2e}",
            r.j.sup_outside, r.j.sup_inside
        );
        println!("  |M1/t - J| outside windows {:.2e}", r.m1_vs_j_outside);
        println!("  Phi = 1/2 at nu = {:.4}", vp.half_probability_velocity());
        for k in &r.kinks {
            println!(
                "  kink at nu = {:.3}: slope jump {:.4} (hydro {:.4})",
                k.nu, k.numeric_slope_jump, k.predicted_slope_jump
            );
        }
    }
    Ok(())
}
