//! Generalized Airy functions and edge scaling near extremal fronts.
//!
//! `A_k(xi) = (1/2 pi) int exp(-i xi eta - i eta^m / m) d eta` with `m = k + 2`.
//! For odd `k` the integrand at `-eta` is the conjugate of the one at `eta`,
//! so `A_k = (1/pi) Re int_0^inf`. Rotating the half-line onto the ray
//! `eta = r e^{-i theta}` turns the oscillation into exponential decay.
//!
//! Edge profiles use the scaled coordinate
//! `xi = sign(kappa) (n - n_e) / (|kappa| t)^{1/(k+2)}`, which is positive
//! inside the light cone for both left and right fronts. The scaled deviation
//! `sign(kappa) (|kappa| t)^{1/(k+2)} (Phi(n) - Phi(n_e))` then approaches
//! `int_0^xi A_k(-x)^2 dx`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{wrap_angle, WalkParams};
use crate::error::{check_finite, WalkError};
use crate::evolve::{cumulative, current_density, evolve, probability_density, Lattice, WaveFunction};
use crate::fronts::{find_extremal_fronts, ExtremalFront, FrontDiagram};
use crate::hydro::VelocityProfile;
use crate::numerics::integrate;

/// Largest `|xi|` accepted by [`generalized_airy`].
pub const XI_LIMIT: f64 = 50.0;
/// `exp(-DECAY)` is where the rotated integrand is truncated.
const DECAY: f64 = 40.0;
/// Allowed growth exponent of the rotated integrand for `xi < 0`.
const GROWTH: f64 = 3.0;

fn check_order(k: u32) -> Result<(), WalkError> {
    if k.is_multiple_of(2) {
        return Err(WalkError::InvalidParameter {
            field: "k",
            reason: format!("{k} is even; only odd orders give a real profile"),
        });
    }
    Ok(())
}

/// `A_k(xi)` for odd `k`, `|xi| <= 50`.
pub fn generalized_airy(k: u32, xi: f64) -> Result<f64, WalkError> {
    check_order(k)?;
    check_finite("xi", xi)?;
    if xi.abs() > XI_LIMIT {
        return Err(WalkError::XiOutOfRange(xi));
    }
    let m = f64::from(k + 2);
    let steepest = PI / (2.0 * m);
    // On the oscillatory side the linear term grows along the ray; a shallower
    // ray keeps that growth bounded by e^GROWTH.
    let theta = if xi >= 0.0 {
        steepest
    } else {
        steepest.min(GROWTH / (-xi).powf(m / (m - 1.0)))
    };
    let (s1, sm) = (theta.sin(), (m * theta).sin());
    let re_h = |r: f64| -xi * r * s1 - r.powf(m) * sm / m;

    let peak = if xi < 0.0 {
        (-xi * s1 / sm).powf(1.0 / (m - 1.0))
    } else {
        0.0
    };
    let mut r_max = peak.max(1.0);
    while re_h(r_max) > -DECAY {
        r_max *= 1.25;
    }

    let dir = Complex64::from_polar(1.0, -theta);
    let integrand = |r: f64| {
        let eta = dir * r;
        let h = Complex64::new(0.0, -1.0) * (xi * eta + eta.powf(m) / m);
        (h.exp() * dir).re
    };
    Ok(integrate(integrand, 0.0, r_max, 1e-14, 1e-14)? / PI)
}

/// Residual of `A_k^{(k+1)}(xi) = (-1)^k i^{k+1} xi A_k(xi)` by central differences.
pub fn airy_ode_residual(k: u32, xi: f64) -> Result<f64, WalkError> {
    let a = |x: f64| generalized_airy(k, x);
    match k {
        1 => {
            const C: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
            let h = 0.05;
            let mut d2 = C[0] * a(xi)?;
            for (j, c) in C.iter().enumerate().skip(1) {
                let s = j as f64 * h;
                d2 += c * (a(xi + s)? + a(xi - s)?);
            }
            Ok(d2 / (h * h) - xi * a(xi)?)
        }
        3 => {
            const C: [f64; 5] = [
                91.0 / 8.0,
                -122.0 / 15.0,
                169.0 / 60.0,
                -2.0 / 5.0,
                7.0 / 240.0,
            ];
            let h = 0.1;
            let mut d4 = C[0] * a(xi)?;
            for (j, c) in C.iter().enumerate().skip(1) {
                let s = j as f64 * h;
                d4 += c * (a(xi + s)? + a(xi - s)?);
            }
            Ok(d4 / h.powi(4) + xi * a(xi)?)
        }
        _ => Err(WalkError::InvalidParameter {
            field: "k",
            reason: format!("{k}; the residual is available for k = 1 and k = 3"),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileSource {
    Numeric,
    Predicted,
}

/// Scaled deviations of the cumulative probability and current near a front.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeProfile {
    pub front: ExtremalFront,
    pub t: f64,
    pub xi: Vec<f64>,
    pub dphi_scaled: Vec<f64>,
    pub djs_scaled: Vec<f64>,
    pub source: ProfileSource,
    /// Number of fronts moving with this velocity.
    pub multiplicity: usize,
    /// Interference period in sites between degenerate fronts.
    pub beat_period: Option<f64>,
}

impl EdgeProfile {
    /// `1 / (k + 2)`.
    pub fn scaling_exponent(&self) -> f64 {
        1.0 / f64::from(self.front.order + 2)
    }

    /// `(|kappa| t)^{1/(k+2)}`: sites per unit of `xi`.
    pub fn length_scale(&self) -> f64 {
        edge_scale(&self.front, self.t)
    }

    /// Linear interpolation of `dphi_scaled`; `None` outside the sampled range.
    pub fn dphi_at(&self, x: f64) -> Option<f64> {
        interpolate(&self.xi, &self.dphi_scaled, x)
    }

    pub fn djs_at(&self, x: f64) -> Option<f64> {
        interpolate(&self.xi, &self.djs_scaled, x)
    }

    /// Both deviations averaged over one beat period; unchanged when there
    /// is no beat or the profile has fewer than two samples.
    pub fn smoothed(&self) -> EdgeProfile {
        let n = self.xi.len();
        match self.beat_period {
            Some(period) if period > 1.5 && n > 1 => {
                let spacing = self.length_scale() * (self.xi[n - 1] - self.xi[0]) / (n - 1) as f64;
                let samples = ((period / spacing.max(1e-12)).round() as usize).max(1);
                EdgeProfile {
                    dphi_scaled: beat_filter(&self.dphi_scaled, samples),
                    djs_scaled: beat_filter(&self.djs_scaled, samples),
                    ..self.clone()
                }
            }
            _ => self.clone(),
        }
    }

    /// The current deviation divided by the front velocity, in place of the
    /// probability deviation. Its staircase is the cumulative-current one.
    pub fn current_view(&self) -> EdgeProfile {
        let v = self.front.velocity;
        EdgeProfile {
            dphi_scaled: self.djs_scaled.iter().map(|j| j / v).collect(),
            ..self.clone()
        }
    }
}

pub fn edge_scale(front: &ExtremalFront, t: f64) -> f64 {
    (front.kappa.abs() * t).powf(1.0 / f64::from(front.order + 2))
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let i = xs.partition_point(|&v| v <= x);
    if i == xs.len() {
        return Some(ys[ys.len() - 1]);
    }
    if i == 0 {
        return Some(ys[0]);
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    Some(ys[i - 1] + w * (ys[i] - ys[i - 1]))
}

/// `int_0^xi A_k(-x)^2 dx` on a sorted grid, scaled as an [`EdgeProfile`].
pub fn predict_edge(front: &ExtremalFront, t: f64, xi_grid: &[f64]) -> Result<EdgeProfile, WalkError> {
    if front.order.is_multiple_of(2) {
        return Err(WalkError::EvenOrderFront(front.order));
    }
    if xi_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(WalkError::InvalidParameter {
            field: "xi_grid",
            reason: "must be strictly increasing".into(),
        });
    }
    let k = front.order;
    let density = |x: f64| generalized_airy(k, -x).map(|a| a * a);
    let split = xi_grid.partition_point(|&x| x < 0.0);
    // Integrate outward from zero over consecutive grid cells.
    let cells = |pts: Vec<f64>| -> Result<Vec<f64>, WalkError> {
        let pieces = pts
            .par_windows(2)
            .map(|w| {
                let err = std::cell::Cell::new(None);
                let v = integrate(
                    |x| match density(x) {
                        Ok(d) => d,
                        Err(e) => {
                            err.set(Some(e));
                            0.0
                        }
                    },
                    w[0],
                    w[1],
                    1e-13,
                    1e-11,
                )?;
                match err.take() {
                    Some(e) => Err(e),
                    None => Ok(v),
                }
            })
            .collect::<Result<Vec<f64>, WalkError>>()?;
        let mut acc = 0.0;
        Ok(pieces
            .into_iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect())
    };
    let mut right = vec![0.0];
    right.extend_from_slice(&xi_grid[split..]);
    let right_vals = cells(right)?;
    let mut left = vec![0.0];
    left.extend(xi_grid[..split].iter().rev());
    let left_vals = cells(left)?;

    let mut dphi: Vec<f64> = left_vals.into_iter().rev().collect();
    dphi.extend(right_vals);
    let djs = dphi.iter().map(|d| front.velocity * d).collect();
    Ok(EdgeProfile {
        front: *front,
        t,
        xi: xi_grid.to_vec(),
        dphi_scaled: dphi,
        djs_scaled: djs,
        source: ProfileSource::Predicted,
        multiplicity: 1,
        beat_period: None,
    })
}

/// Evolve and measure the edge profile of `front` over `n_e +- window` sites.
pub fn measure_edge(
    p: &WalkParams,
    front: &ExtremalFront,
    t: f64,
    window: usize,
) -> Result<EdgeProfile, WalkError> {
    let wf = evolve(p, t, Lattice::Auto)?;
    let d = find_extremal_fronts(p)?;
    measure_edge_in(&wf, &d, front, window)
}

/// Measure the edge profile from an already evolved wave function.
pub fn measure_edge_in(
    wf: &WaveFunction,
    d: &FrontDiagram,
    front: &ExtremalFront,
    window: usize,
) -> Result<EdgeProfile, WalkError> {
    let t = wf.t();
    let n_e = (front.velocity * t).round() as i64;
    let (lo, hi) = (n_e - window as i64, n_e + window as i64);
    for other in &d.fronts {
        if (other.velocity - front.velocity).abs() <= d.tol_degen {
            continue;
        }
        let n_o = (other.velocity * t).round() as i64;
        if (lo..=hi).contains(&n_o) {
            return Err(WalkError::WindowOverlap { lo, hi, other: n_o });
        }
    }
    let phi = cumulative(&probability_density(wf))?;
    let j = cumulative(&current_density(wf)?)?;
    let at = |f: &crate::evolve::ObservableField, n: i64| {
        f.value_at(n).ok_or(WalkError::InvalidParameter {
            field: "window",
            reason: format!("site {n} lies outside the lattice"),
        })
    };
    let (phi_e, j_e) = (at(&phi, n_e)?, at(&j, n_e)?);
    let sign = front.kappa.signum();
    let s = edge_scale(front, t);

    let mut rows = Vec::with_capacity(2 * window + 1);
    for n in lo..=hi {
        rows.push((
            sign * (n - n_e) as f64 / s,
            sign * s * (at(&phi, n)? - phi_e),
            sign * s * (at(&j, n)? - j_e),
        ));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let multiplicity = d
        .fronts
        .iter()
        .filter(|f| (f.velocity - front.velocity).abs() <= d.tol_degen)
        .count();
    let beat_period = beat_period(&wf.params(), front)?;

    Ok(EdgeProfile {
        front: *front,
        t,
        xi: rows.iter().map(|r| r.0).collect(),
        dphi_scaled: rows.iter().map(|r| r.1).collect(),
        djs_scaled: rows.iter().map(|r| r.2).collect(),
        source: ProfileSource::Numeric,
        multiplicity,
        beat_period,
    })
}

/// Shortest interference period, in sites, between the front's wave vector
/// and any other wave vector moving at the same velocity.
///
/// Degenerate partners and, for internal fronts, bulk branches superpose
/// on the edge amplitude and modulate the density at this period.
pub fn beat_period(p: &WalkParams, front: &ExtremalFront) -> Result<Option<f64>, WalkError> {
    let roots = VelocityProfile::new(p)?.invert(front.velocity, 1e-9);
    Ok(roots
        .into_iter()
        .map(|q| wrap_angle(q - front.q_star).abs())
        .filter(|dq| *dq > 1e-6)
        .fold(None, |acc: Option<f64>, dq| Some(acc.map_or(dq, |a| a.min(dq))))
        .map(|dq| TAU / dq))
}

/// One plateau of the edge staircase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseStep {
    pub index: usize,
    /// Scaled deviation at the plateau.
    pub height: f64,
    /// Distance in `xi` between the inflection points bracketing the plateau.
    pub width: f64,
    /// `height * width`.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Staircase {
    pub steps: Vec<StaircaseStep>,
    pub diagnostic: Option<String>,
}

/// Centred running mean over `period` samples. Even periods use half
/// weights at both ends so the window stays centred and still spans exactly
/// one period.
fn beat_filter(y: &[f64], period: usize) -> Vec<f64> {
    let half = period / 2;
    let weight = |j: usize| {
        if period.is_multiple_of(2) && j == half {
            0.5
        } else {
            1.0
        }
    };
    (0..y.len())
        .map(|i| {
            let (mut sum, mut norm) = (0.0, 0.0);
            for j in 0..=half {
                let w = weight(j);
                let mut add = |k: Option<usize>| {
                    if let Some(v) = k.and_then(|k| y.get(k)) {
                        sum += w * v;
                        norm += w;
                    }
                };
                add(Some(i + j));
                if j > 0 {
                    add(i.checked_sub(j));
                }
            }
            sum / norm
        })
        .collect()
}

/// Least-squares slope over five samples (the derivative of a local quadratic fit).
fn local_slope(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![f64::NAN; n];
    for i in 2..n.saturating_sub(2) {
        let xs = &x[i - 2..=i + 2];
        let ys = &y[i - 2..=i + 2];
        let xm = xs.iter().sum::<f64>() / 5.0;
        let ym = ys.iter().sum::<f64>() / 5.0;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (a, b) in xs.iter().zip(ys) {
            sxy += (a - xm) * (b - ym);
            sxx += (a - xm) * (a - xm);
        }
        d[i] = sxy / sxx;
    }
    d
}

/// Vertex of the parabola through three neighbouring samples.
fn refine_extremum(x: &[f64], d: &[f64], i: usize) -> f64 {
    let (a, b, c) = (d[i - 1], d[i], d[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return x[i];
    }
    let offset = (0.5 * (a - c) / curv).clamp(-1.0, 1.0);
    let h = 0.5 * (x[i + 1] - x[i - 1]);
    x[i] + offset * h
}

/// Plateaus of the staircase on the allowed side (`xi > 0`).
///
/// Plateau heights sit at local minima of the slope of the scaled deviation;
/// widths are gaps between the slope maxima (non-stationary inflection
/// points) on either side. For degenerate fronts the profile is first averaged
/// over the interference period.
pub fn extract_staircase(profile: &EdgeProfile) -> Staircase {
    let x = &profile.xi;
    let y = profile.smoothed().dphi_scaled;
    let d = local_slope(x, &y);
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 3..x.len().saturating_sub(3) {
        if x[i] <= 0.0 || !(d[i - 1].is_finite() && d[i + 1].is_finite()) {
            continue;
        }
        if d[i] < d[i - 1] && d[i] <= d[i + 1] {
            minima.push(refine_extremum(x, &d, i));
        } else if d[i] > d[i - 1] && d[i] >= d[i + 1] {
            maxima.push(refine_extremum(x, &d, i));
        }
    }
    let mut steps = Vec::new();
    for &m in &minima {
        let left = maxima.iter().copied().filter(|&v| v < m).fold(None, |a: Option<f64>, v| {
            Some(a.map_or(v, |a| a.max(v)))
        });
        let right = maxima.iter().copied().filter(|&v| v > m).fold(None, |a: Option<f64>, v| {
            Some(a.map_or(v, |a| a.min(v)))
        });
        if let (Some(l), Some(r)) = (left, right) {
            let height = interpolate(x, &y, m).unwrap_or(f64::NAN);
            let width = r - l;
            steps.push(StaircaseStep {
                index: steps.len() + 1,
                height,
                width,
                area: height * width,
            });
        }
    }
    if steps.len() < 2 {
        return Staircase {
            steps: Vec::new(),
            diagnostic: Some(format!(
                "fewer than two steps detected ({} plateau candidates)",
                steps.len()
            )),
        };
    }
    Staircase {
        steps,
        diagnostic: None,
    }
}
