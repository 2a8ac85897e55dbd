//! Extremal fronts, causal-cone topology and the critical coupling at which
//! the front count changes from 2 to 4.
//!
//! cargo run --release --example front_diagram

use std::f64::consts::PI;

use chiral_walk::fronts::quartic_crosscheck;
use chiral_walk::{critical_coupling, find_extremal_fronts, WalkError, WalkParams};

fn main() -> Result<(), WalkError> {
    let phi = PI / 2.0;
    for g in [0.0625, 0.125, 0.25, 0.5] {
        let p = WalkParams::new(g, phi)?;
        let d = find_extremal_fronts(&p)?;
        println!("g = {g}: {} (v_lm = {:.4}, v_rm = {:.4})", d.topology.name(), d.v_lm, d.v_rm);
        for f in &d.fronts {
            println!(
                "  q* = {:>8.5}  v = {:>8.5}  order {}  kappa = {:>9.5}  {:?}",
                f.q_star, f.velocity, f.order, f.kappa, f.chirality
            );
        }
        println!("  quartic cross-check consistent: {}", quartic_crosscheck(&p)?.is_consistent());
    }

    println!("\ncritical coupling g_c(phi)");
    for (label, phi) in [
        ("0", 0.0),
        ("pi/6", PI / 6.0),
        ("pi/4", PI / 4.0),
        ("pi/3", PI / 3.0),
        ("5pi/12", 5.0 * PI / 12.0),
        ("pi/2", PI / 2.0),
    ] {
        println!("  phi = {label:<7} g_c = {:.6}", critical_coupling(phi, 1e-10)?);
    }
    Ok(())
}
