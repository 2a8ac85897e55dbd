//! Staircase structure of the cumulative distributions near the left front.
//!
//! Measures scaled deviations at t = 10^4 for four couplings at phi = pi/2 and
//! prints step heights, widths and areas for the probability (CPD) and
//! current (CCD) profiles.
//!
//! cargo run --release --example edge_staircase

use std::f64::consts::FRAC_PI_2;

use chiral_walk::airy::{edge_scale, extract_staircase, measure_edge_in};
use chiral_walk::evolve::{evolve, Lattice};
use chiral_walk::{find_extremal_fronts, WalkParams, WalkError};

fn main() -> Result<(), WalkError> {
    let t = 1e4;
    for g in [0.0625, 0.125, 0.25] {
        let p = WalkParams::new(g, FRAC_PI_2)?;
        let d = find_extremal_fronts(&p)?;
        let wf = evolve(&p, t, Lattice::Auto)?;
        let mut fronts: Vec<_> = d.left_fronts().take(1).copied().collect();
        if g == 0.25 {
            fronts.extend(d.internal_fronts().copied());
        }
        if g == 0.125 {
            fronts.extend(d.right_fronts().copied());
        }
        for front in fronts {
            let window = (14.0 * edge_scale(&front, t)).ceil() as usize;
            let profile = measure_edge_in(&wf, &d, &front, window)?;
            let m = profile.multiplicity as f64;
            println!(
                "g = {g}, v = {:.4}, order {}, kappa = {:.4}, multiplicity {}",
                front.velocity, front.order, front.kappa, profile.multiplicity
            );
            for (label, prof) in [("CPD", profile.clone()), ("CCD", profile.current_view())] {
                let s = extract_staircase(&prof);
                let areas: Vec<String> = s
                    .steps
                    .iter()
                    .take(5)
                    .map(|st| format!("{:.4}", st.area / m))
                    .collect();
                println!("  {label} areas: {}", areas.join(" "));
            }
        }
    }
    Ok(())
}
