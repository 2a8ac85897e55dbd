use std::f64::consts::{FRAC_PI_2, PI, TAU};

use chiral_walk::airy::{airy_ode_residual, edge_scale, measure_edge_in};
use chiral_walk::evolve::{
    cumulative, cumulative_moment, current_density, evolve, probability_density, Lattice,
};
use chiral_walk::{canonicalize, find_extremal_fronts, WalkParams};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn evolution_is_unitary(g in 0.0..1.0f64, phi in -TAU..TAU, t in 0.0..30.0f64) {
        let p = WalkParams::new(g, phi).unwrap();
        let wf = evolve(&p, t, Lattice::Auto).unwrap();
        prop_assert!((wf.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_current_vanishes(g in 0.0..1.0f64, phi in -TAU..TAU, t in 0.1..30.0f64) {
        let p = WalkParams::new(g, phi).unwrap();
        let j = current_density(&evolve(&p, t, Lattice::Auto).unwrap()).unwrap();
        let total: f64 = j.values.iter().sum();
        prop_assert!(total.abs() < 1e-8, "sum j = {total:e}");
    }

    #[test]
    fn cumulative_probability_is_monotone(g in 0.0..1.0f64, phi in -TAU..TAU, t in 0.0..30.0f64) {
        let p = WalkParams::new(g, phi).unwrap();
        let phi_n = cumulative(&probability_density(&evolve(&p, t, Lattice::Auto).unwrap())).unwrap();
        prop_assert!(phi_n.values.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((phi_n.values.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_representative_has_same_density(
        g in 0.0..1.0f64,
        phi in -TAU..TAU,
        t in 0.5..20.0f64,
    ) {
        let raw = WalkParams::new(g, phi).unwrap();
        let c = canonicalize(raw);
        prop_assert!(c.params.is_canonical());
        // Same lattice for both so the sites line up.
        let sites = chiral_walk::evolve::auto_lattice_size(&raw, t).unwrap();
        let a = probability_density(&evolve(&raw, t, Lattice::Sites(sites)).unwrap());
        let b = probability_density(&evolve(&c.params, t, Lattice::Sites(sites)).unwrap());
        for n in -(sites as i64) / 2 + 1..(sites as i64) / 2 {
            let pa = a.value_at(c.map.raw_site(n)).unwrap();
            let pb = b.value_at(n).unwrap();
            prop_assert!((pa - pb).abs() < 1e-12, "n = {n}: {pa} vs {pb}");
        }
    }

    #[test]
    fn velocity_is_derivative_of_energy(g in 0.0..2.0f64, phi in -PI..PI, q in -PI..PI) {
        let p = WalkParams::new(g, phi).unwrap();
        let h = 1e-5;
        let fd = (p.omega(q + h) - p.omega(q - h)) / (2.0 * h);
        prop_assert!((fd - p.velocity(q)).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn airy_equations_hold(xi in -8.0..8.0f64) {
        for k in [1, 3] {
            let r = airy_ode_residual(k, xi).unwrap();
            prop_assert!(r.abs() < 1e-5, "k = {k}, xi = {xi}: residual {r:e}");
        }
    }
}

/// Near a front the current deviation is `v_e` times the probability one, and
/// each moment deviation is `v_e^k` times it up to the spread of `(n/t)^k`
/// across the window.
#[test]
fn edge_deviations_are_locked_to_probability() {
    let t = 1e4;
    for g in [0.0, 0.0625, 0.25] {
        let p = WalkParams::new(g, FRAC_PI_2).unwrap();
        let d = find_extremal_fronts(&p).unwrap();
        let wf = evolve(&p, t, Lattice::Auto).unwrap();
        let density = probability_density(&wf);
        let moments: Vec<_> = (1..=3).map(|k| cumulative_moment(&density, k).unwrap()).collect();
        let phi = cumulative(&density).unwrap();
        for front in d.fronts.iter().filter(|f| f.order == 1) {
            let s = edge_scale(front, t);
            let window = (10.0 * s).ceil() as usize;
            // Interference between degenerate fronts is averaged out first.
            let prof = measure_edge_in(&wf, &d, front, window).unwrap().smoothed();
            let v = front.velocity;
            // The current scales with the velocity of the front.
            // The gap grows like xi s / t, so the check stays within |xi| <= 6.
            for ((a, b), x) in prof.djs_scaled.iter().zip(&prof.dphi_scaled).zip(&prof.xi) {
                if x.abs() > 6.0 {
                    continue;
                }
                assert!((a - v * b).abs() < 0.02, "g = {g}, v = {v}: {a} vs {}", v * b);
            }
            let n_e = (v * t).round() as i64;
            let sign = front.kappa.signum();
            for n in n_e - window as i64..=n_e + window as i64 {
                let dphi = sign * s * (phi.value_at(n).unwrap() - phi.value_at(n_e).unwrap());
                for (k, m) in moments.iter().enumerate() {
                    let k = k as i32 + 1;
                    let dm = sign * s * (m.value_at(n).unwrap() - m.value_at(n_e).unwrap()) / t.powi(k);
                    let expected = v.powi(k) * dphi;
                    // p >= 0, so the gap is at most max |(m/t)^k - v^k| over the
                    // sites between n_e and n, times |dphi|.
                    let reach = ((n - n_e).abs() as f64 + 1.0) / t;
                    let bound = f64::from(k) * (v.abs() + reach).powi(k - 1) * reach * dphi.abs();
                    assert!(
                        (dm - expected).abs() <= bound * (1.0 + 1e-9) + 1e-12,
                        "g = {g}, v = {v}, k = {k}, n = {n}: {dm} vs {expected}"
                    );
                }
            }
        }
    }
}
