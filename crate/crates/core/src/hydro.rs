//! Bulk scaling functions on `nu = n / t`.
//!
//! In the long-time limit the cumulative probability is the fraction of the
//! Brillouin zone whose group velocity does not exceed `nu`:
//! `Phi(nu) = |{q : v(q) <= nu}| / 2 pi`. The cumulative current and the
//! scaled cumulative moments are integrals of `v` and `v^k` over the same set.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{wrap_angle, WalkParams};
use crate::error::WalkError;
use crate::evolve::{
    cumulative, cumulative_moment, current_density, evolve, probability_density, Lattice,
};
use crate::fronts::{derivative_zeros, find_extremal_fronts, FrontDiagram};
use crate::numerics::{bisect, integrate};

/// Roots closer than this are the same root.
const MERGE: f64 = 1e-8;
const QUAD_TOL: f64 = 1e-12;

/// Group velocity with its stationary points cached.
#[derive(Debug, Clone)]
pub struct VelocityProfile {
    params: WalkParams,
    critical: Vec<f64>,
    v_min: f64,
    v_max: f64,
}

impl VelocityProfile {
    pub fn new(p: &WalkParams) -> Result<Self, WalkError> {
        let critical = derivative_zeros(p, 2);
        if critical.is_empty() {
            return Err(WalkError::RootIsolation(
                "group velocity has no stationary points".into(),
            ));
        }
        let vs = critical.iter().map(|&q| p.velocity(q));
        let v_min = vs.clone().fold(f64::INFINITY, f64::min);
        let v_max = vs.fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            params: *p,
            critical,
            v_min,
            v_max,
        })
    }

    pub fn params(&self) -> WalkParams {
        self.params
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Solutions of `v(q) = nu` on `[-pi, pi)`.
    ///
    /// `v` is monotone between consecutive stationary points, so each arc
    /// holds at most one root. A stationary point whose velocity lies within
    /// `tol` of `nu` is returned as a single tangential root.
    pub fn invert(&self, nu: f64, tol: f64) -> Vec<f64> {
        let f = |q: f64| self.params.velocity(q) - nu;
        let c = &self.critical;
        let mut roots = Vec::new();
        for i in 0..c.len() {
            let a = c[i];
            let b = if i + 1 < c.len() { c[i + 1] } else { c[0] + TAU };
            let (fa, fb) = (f(a), f(b));
            if fa.abs() <= tol {
                roots.push(a);
            } else if fb.abs() > tol && (fa < 0.0) != (fb < 0.0) {
                roots.push(bisect(f, a, b, fa));
            }
        }
        let mut roots: Vec<f64> = roots.into_iter().map(wrap_angle).collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() < MERGE);
        if roots.len() > 1 && roots[0] + TAU - roots[roots.len() - 1] < MERGE {
            roots.pop();
        }
        roots
    }

    /// Arcs `(a, b)`, `a < b <= a + 2 pi`, on which `v(q) <= nu`.
    pub fn sublevel_set(&self, nu: f64) -> Vec<(f64, f64)> {
        if nu < self.v_min {
            return Vec::new();
        }
        if nu >= self.v_max {
            return vec![(-PI, PI)];
        }
        let r = self.invert(nu, 0.0);
        if r.is_empty() {
            return Vec::new();
        }
        let mut arcs = Vec::new();
        for i in 0..r.len() {
            let a = r[i];
            let b = if i + 1 < r.len() { r[i + 1] } else { r[0] + TAU };
            if self.params.velocity(0.5 * (a + b)) <= nu {
                arcs.push((a, b));
            }
        }
        arcs
    }

    /// Scaled cumulative probability `Phi(nu)`.
    pub fn cpd(&self, nu: f64) -> f64 {
        let m: f64 = self.sublevel_set(nu).iter().map(|(a, b)| b - a).sum();
        (m / TAU).clamp(0.0, 1.0)
    }

    /// Scaled cumulative current `J(nu)`, telescoped through `omega`.
    pub fn ccd(&self, nu: f64) -> f64 {
        if nu >= self.v_max {
            return 0.0;
        }
        let p = &self.params;
        self.sublevel_set(nu)
            .iter()
            .map(|&(a, b)| p.omega(b) - p.omega(a))
            .sum::<f64>()
            / TAU
    }

    /// Scaled cumulative moment `(1/2 pi) int_{v <= nu} v^k dq`.
    pub fn moment(&self, nu: f64, k: u32) -> Result<f64, WalkError> {
        let p = self.params;
        let mut total = 0.0;
        for (a, b) in self.sublevel_set(nu) {
            total += integrate(|q| p.velocity(q).powi(k as i32), a, b, QUAD_TOL, QUAD_TOL)?;
        }
        Ok(total / TAU)
    }

    /// `nu` at which `Phi` crosses one half.
    pub fn half_probability_velocity(&self) -> f64 {
        let (mut lo, mut hi) = (self.v_min, self.v_max);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if self.cpd(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn invert_velocity(p: &WalkParams, nu: f64, tol: f64) -> Result<Vec<f64>, WalkError> {
    if !(tol > 0.0) {
        return Err(WalkError::InvalidParameter {
            field: "tol",
            reason: format!("{tol} must be positive"),
        });
    }
    Ok(VelocityProfile::new(p)?.invert(nu, tol))
}

pub fn scaled_cpd(p: &WalkParams, nu: f64) -> Result<f64, WalkError> {
    Ok(VelocityProfile::new(p)?.cpd(nu))
}

pub fn scaled_ccd(p: &WalkParams, nu: f64) -> Result<f64, WalkError> {
    Ok(VelocityProfile::new(p)?.ccd(nu))
}

pub fn scaled_moment(p: &WalkParams, nu: f64, k: u32) -> Result<f64, WalkError> {
    VelocityProfile::new(p)?.moment(nu, k)
}

/// Hydrodynamic predictions sampled on a `nu` grid.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingCurve {
    pub params: WalkParams,
    pub nu: Vec<f64>,
    pub phi_scaled: Vec<f64>,
    pub j_scaled: Vec<f64>,
    /// `m_scaled[k - 1]` holds the scaled moment of order `k = 1..=3`.
    pub m_scaled: [Vec<f64>; 3],
}

/// Evaluate the scaling functions on `nu`.
pub fn scaling_curve_on(p: &WalkParams, nu: &[f64]) -> Result<ScalingCurve, WalkError> {
    let vp = VelocityProfile::new(p)?;
    let rows = nu
        .par_iter()
        .map(|&x| -> Result<[f64; 5], WalkError> {
            Ok([
                vp.cpd(x),
                vp.ccd(x),
                vp.moment(x, 1)?,
                vp.moment(x, 2)?,
                vp.moment(x, 3)?,
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    Ok(ScalingCurve {
        params: *p,
        nu: nu.to_vec(),
        phi_scaled: col(0),
        j_scaled: col(1),
        m_scaled: [col(2), col(3), col(4)],
    })
}

/// Scaling functions on `points` uniform samples over `[v_lm - margin, v_rm + margin]`.
pub fn scaling_curve(p: &WalkParams, points: usize, margin: f64) -> Result<ScalingCurve, WalkError> {
    if points < 2 {
        return Err(WalkError::InvalidParameter {
            field: "points",
            reason: format!("{points}; need at least 2"),
        });
    }
    let vp = VelocityProfile::new(p)?;
    let (lo, hi) = (vp.v_min() - margin, vp.v_max() + margin);
    let nu: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    scaling_curve_on(p, &nu)
}

/// Exclusion window around a group of fronts sharing a velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontWindow {
    pub velocity: f64,
    pub order: u32,
    /// Centre `v t` in sites.
    pub center: f64,
    /// Half-width `c (|kappa| t)^{1/(k+2)}` in sites.
    pub half_width: f64,
}

impl FrontWindow {
    pub fn contains(&self, n: f64) -> bool {
        (n - self.center).abs() <= self.half_width
    }
}

pub fn front_windows(d: &FrontDiagram, t: f64, c: f64) -> Vec<FrontWindow> {
    let mut windows: Vec<FrontWindow> = Vec::new();
    for f in &d.fronts {
        let half_width = c * (f.kappa.abs() * t).powf(1.0 / (f.order + 2) as f64);
        match windows
            .iter_mut()
            .find(|w| (w.velocity - f.velocity).abs() <= d.tol_degen)
        {
            Some(w) => w.half_width = w.half_width.max(half_width),
            None => windows.push(FrontWindow {
                velocity: f.velocity,
                order: f.order,
                center: f.velocity * t,
                half_width,
            }),
        }
    }
    windows
}

/// Numeric and predicted bulk values at one lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BulkRow {
    pub n: i64,
    pub nu: f64,
    pub phi_num: f64,
    pub phi_hydro: f64,
    pub j_num: f64,
    pub j_hydro: f64,
    pub m_num: [f64; 3],
    pub m_hydro: [f64; 3],
    pub in_window: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub sup_outside: f64,
    /// `int |numeric - hydro| d nu` outside the windows.
    pub l1_outside: f64,
    pub sup_inside: f64,
}

impl Deviation {
    fn accumulate(rows: &[BulkRow], t: f64, pick: impl Fn(&BulkRow) -> f64) -> Self {
        let mut d = Deviation {
            sup_outside: 0.0,
            l1_outside: 0.0,
            sup_inside: 0.0,
        };
        for r in rows {
            let e = pick(r).abs();
            if r.in_window {
                d.sup_inside = d.sup_inside.max(e);
            } else {
                d.sup_outside = d.sup_outside.max(e);
                d.l1_outside += e / t;
            }
        }
        d
    }
}

/// Slope change of `Phi` across an internal front, from one-sided secants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinkCheck {
    pub nu: f64,
    pub predicted_slope_jump: f64,
    pub numeric_slope_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BulkReport {
    pub params: WalkParams,
    pub t: f64,
    pub exclusion_c: f64,
    pub windows: Vec<FrontWindow>,
    pub phi: Deviation,
    pub j: Deviation,
    pub m: [Deviation; 3],
    pub kinks: Vec<KinkCheck>,
    /// `|M_1(n)/t - J(n)|` outside the windows.
    pub m1_vs_j_outside: f64,
}

/// Evolve to `t` and tabulate numeric against predicted bulk observables.
pub fn bulk_rows(p: &WalkParams, t: f64, c: f64) -> Result<(Vec<BulkRow>, FrontDiagram), WalkError> {
    let wf = evolve(p, t, Lattice::Auto)?;
    let density = probability_density(&wf);
    let phi = cumulative(&density)?;
    let j = cumulative(&current_density(&wf)?)?;
    let m: Vec<_> = (1..=3)
        .map(|k| cumulative_moment(&density, k))
        .collect::<Result<_, _>>()?;
    let d = find_extremal_fronts(p)?;
    let windows = front_windows(&d, t, c);
    let vp = VelocityProfile::new(p)?;
    let rows = (0..phi.values.len())
        .into_par_iter()
        .map(|i| -> Result<BulkRow, WalkError> {
            let n = phi.first_site + i as i64;
            let nu = n as f64 / t;
            let scale = |k: i32| t.powi(k);
            Ok(BulkRow {
                n,
                nu,
                phi_num: phi.values[i],
                phi_hydro: vp.cpd(nu),
                j_num: j.values[i],
                j_hydro: vp.ccd(nu),
                m_num: [
                    m[0].values[i] / scale(1),
                    m[1].values[i] / scale(2),
                    m[2].values[i] / scale(3),
                ],
                m_hydro: [vp.moment(nu, 1)?, vp.moment(nu, 2)?, vp.moment(nu, 3)?],
                in_window: windows.iter().any(|w| w.contains(n as f64)),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rows, d))
}

fn kink_checks(rows: &[BulkRow], d: &FrontDiagram, windows: &[FrontWindow], t: f64) -> Vec<KinkCheck> {
    let first = rows[0].n;
    let num_phi = |n: f64| {
        let i = (n.round() as i64 - first).clamp(0, rows.len() as i64 - 1) as usize;
        rows[i].phi_num
    };
    let vp = VelocityProfile::new(&d.params).expect("diagram params are valid");
    d.internal_fronts()
        .filter_map(|f| {
            let w = windows
                .iter()
                .find(|w| (w.velocity - f.velocity).abs() <= d.tol_degen)?;
            let delta = w.half_width / t;
            let jump = |phi: &dyn Fn(f64) -> f64| {
                let right = (phi(f.velocity + 3.0 * delta) - phi(f.velocity + delta)) / (2.0 * delta);
                let left = (phi(f.velocity - delta) - phi(f.velocity - 3.0 * delta)) / (2.0 * delta);
                right - left
            };
            Some(KinkCheck {
                nu: f.velocity,
                predicted_slope_jump: jump(&|nu| vp.cpd(nu)),
                numeric_slope_jump: jump(&|nu| num_phi(nu * t)),
            })
        })
        .collect()
}

/// Deviations between numeric and hydrodynamic bulk observables at time `t`,
/// with windows of half-width `c (|kappa| t)^{1/(k+2)}` around each front.
pub fn compare_bulk(p: &WalkParams, t: f64, c: f64) -> Result<BulkReport, WalkError> {
    let (rows, d) = bulk_rows(p, t, c)?;
    Ok(report_from_rows(p, t, c, &rows, &d))
}

pub fn report_from_rows(p: &WalkParams, t: f64, c: f64, rows: &[BulkRow], d: &FrontDiagram) -> BulkReport {
    let windows = front_windows(d, t, c);
    let m = |k: usize| Deviation::accumulate(rows, t, |r| r.m_num[k] - r.m_hydro[k]);
    BulkReport {
        params: *p,
        t,
        exclusion_c: c,
        phi: Deviation::accumulate(rows, t, |r| r.phi_num - r.phi_hydro),
        j: Deviation::accumulate(rows, t, |r| r.j_num - r.j_hydro),
        m: [m(0), m(1), m(2)],
        kinks: kink_checks(rows, d, &windows, t),
        m1_vs_j_outside: rows
            .iter()
            .filter(|r| !r.in_window)
            .map(|r| (r.m_num[0] - r.j_num).abs())
            .fold(0.0, f64::max),
        windows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn vp(g: f64, phi: f64) -> VelocityProfile {
        VelocityProfile::new(&WalkParams::new(g, phi).unwrap()).unwrap()
    }

    #[test]
    fn free_walk_inversion() {
        let v = vp(0.0, 0.0);
        let r = v.invert(0.0, 1e-12);
        assert_eq!(r.len(), 2);
        assert!(r[0].abs() < 1e-15 || (r[0] + PI).abs() < 1e-15);
        assert!(v.invert(2.5, 1e-12).is_empty());
    }

    #[test]
    fn free_walk_values() {
        let v = vp(0.0, 0.0);
        assert!((v.cpd(0.0) - 0.5).abs() < 1e-14);
        assert!((v.ccd(0.0) + 2.0 / PI).abs() < 1e-14);
        assert_eq!(v.cpd(-2.5), 0.0);
        assert_eq!(v.cpd(2.5), 1.0);
    }

    #[test]
    fn four_roots_near_degenerate_front() {
        let v = vp(0.25, FRAC_PI_2);
        assert_eq!(v.invert(-1.5 + 1e-6, 1e-12).len(), 4);
        assert_eq!(v.invert(-1.5 - 1e-6, 1e-12).len(), 0);
    }

    #[test]
    fn telescoped_current_matches_quadrature() {
        for (g, phi) in [(0.0625, FRAC_PI_2), (0.25, FRAC_PI_2), (0.3, 0.0), (0.2, 0.8)] {
            let v = vp(g, phi);
            for i in 0..=40 {
                let nu = v.v_min() + (v.v_max() - v.v_min()) * i as f64 / 40.0;
                assert!((v.ccd(nu) - v.moment(nu, 1).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_zone_moments() {
        for (g, phi) in [(0.0, 0.0), (0.0625, FRAC_PI_2), (0.25, 0.7)] {
            let v = vp(g, phi);
            let top = v.v_max() + 1.0;
            assert!((v.moment(top, 2).unwrap() - 2.0 * (1.0 + 4.0 * g * g)).abs() < 1e-8);
            assert!((v.moment(top, 3).unwrap() - 12.0 * g * f64::sin(phi)).abs() < 1e-8);
        }
    }

    #[test]
    fn half_probability_shifts_left() {
        let v = vp(0.0625, FRAC_PI_2);
        assert!(v.cpd(0.0) > 0.5);
        let nu = v.half_probability_velocity();
        assert!(nu < 0.0);
        assert!((v.cpd(nu) - 0.5).abs() < 1e-9);
    }
}
