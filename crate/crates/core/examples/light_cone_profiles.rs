//! Density and current profiles from a single initial site, with the
//! position moments compared to their closed forms.
//!
//! cargo run --release --example light_cone_profiles

use std::f64::consts::FRAC_PI_2;

use chiral_walk::evolve::{current_density, evolve, position_moment, probability_density, Lattice};
use chiral_walk::{find_extremal_fronts, WalkError, WalkParams};

fn main() -> Result<(), WalkError> {
    let t = 50.0;
    for g in [0.0, 0.25] {
        let p = WalkParams::new(g, FRAC_PI_2)?;
        let wf = evolve(&p, t, Lattice::Auto)?;
        let rho = probability_density(&wf);
        let j = current_density(&wf)?;
        let d = find_extremal_fronts(&p)?;
        println!("g = {g}, t = {t}, {} sites, {}", wf.len(), d.topology.name());
        for f in &d.fronts {
            println!("  front at n = {:.1} (v = {:.3})", f.velocity * t, f.velocity);
        }
        println!("  {:>6} {:>12} {:>12}", "n", "p", "j");
        for n in (-160..=160).step_by(20) {
            println!(
                "  {n:>6} {:>12.4e} {:>12.4e}",
                rho.value_at(n).unwrap_or(0.0),
                j.value_at(n).unwrap_or(0.0)
            );
        }
        let mu2 = position_moment(&rho, 2)?;
        let mu3 = position_moment(&rho, 3)?;
        println!(
            "  mu2 = {mu2:.6} (closed form {:.6}), mu3 = {mu3:.6} (closed form {:.6})\n",
            2.0 * (1.0 + 4.0 * g * g) * t * t,
            12.0 * g * t.powi(3)
        );
    }
    Ok(())
}
