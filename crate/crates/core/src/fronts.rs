//! Extremal fronts: stationary points of the group velocity.
//!
//! Zeros of `omega''` are isolated with a derivative chain. At a derivative
//! order high enough for one harmonic to dominate, the zeros are simple and
//! well separated, so a dense scan finds all of them. Each lower order is then
//! monotone between consecutive zeros of the order above, which makes
//! bisection on those arcs exhaustive. Touching zeros (multiple roots at a
//! critical coupling) show up as arc endpoints where the function vanishes.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use nalgebra::Matrix4;
use serde::Serialize;

use crate::dispersion::{canonicalize, wrap_angle, WalkParams};
use crate::error::{check_finite, WalkError};
use crate::numerics::bisect;

const SCAN_POINTS: usize = 4096;
const MAX_ORDER: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chirality {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalFront {
    pub q_star: f64,
    pub velocity: f64,
    /// `k` such that the first non-vanishing derivative of `v` at `q_star` is `v^(k+1)`.
    pub order: u32,
    /// `omega^(k+2)(q_star) / (k+1)!`.
    pub kappa: f64,
    pub chirality: Chirality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeTopology {
    OneCone,
    TwoNestedCones,
    TwoOverlappingCones,
    CriticalSecondOrder,
    CriticalThirdOrder,
}

impl ConeTopology {
    pub fn name(&self) -> &'static str {
        match self {
            Self::OneCone => "OneCone",
            Self::TwoNestedCones => "TwoNestedCones",
            Self::TwoOverlappingCones => "TwoOverlappingCones",
            Self::CriticalSecondOrder => "CriticalSecondOrder",
            Self::CriticalThirdOrder => "CriticalThirdOrder",
        }
    }
}

/// Tolerances for front detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontOptions {
    /// Maximum `|omega''|` accepted at a refined root.
    pub tol_root: f64,
    /// Derivatives below this magnitude count as vanishing when assigning the order.
    pub tol_order: f64,
    /// Fronts whose velocities differ by less than this are degenerate.
    pub tol_degen: f64,
}

impl Default for FrontOptions {
    fn default() -> Self {
        Self {
            tol_root: 1e-10,
            tol_order: 1e-8,
            tol_degen: 1e-9,
        }
    }
}

/// All extremal fronts of a parameter set, sorted by velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontDiagram {
    pub params: WalkParams,
    pub fronts: Vec<ExtremalFront>,
    pub v_lm: f64,
    pub v_rm: f64,
    pub topology: ConeTopology,
    #[serde(skip)]
    pub tol_degen: f64,
}

impl FrontDiagram {
    /// Number of fronts moving with the same velocity as `front` (including itself).
    pub fn multiplicity(&self, front: &ExtremalFront) -> usize {
        self.fronts
            .iter()
            .filter(|f| (f.velocity - front.velocity).abs() <= self.tol_degen)
            .count()
    }

    /// Fronts strictly inside the light cone `(v_lm, v_rm)`.
    pub fn internal_fronts(&self) -> impl Iterator<Item = &ExtremalFront> {
        self.fronts.iter().filter(move |f| {
            f.velocity > self.v_lm + self.tol_degen && f.velocity < self.v_rm - self.tol_degen
        })
    }

    /// Fronts moving at the maximal left velocity.
    pub fn left_fronts(&self) -> impl Iterator<Item = &ExtremalFront> {
        self.fronts
            .iter()
            .filter(move |f| (f.velocity - self.v_lm).abs() <= self.tol_degen)
    }

    /// Fronts moving at the maximal right velocity.
    pub fn right_fronts(&self) -> impl Iterator<Item = &ExtremalFront> {
        self.fronts
            .iter()
            .filter(move |f| (f.velocity - self.v_rm).abs() <= self.tol_degen)
    }

    /// Largest speed `max(|v_lm|, |v_rm|)`.
    pub fn max_speed(&self) -> f64 {
        self.v_lm.abs().max(self.v_rm.abs())
    }
}

/// Lowest derivative order whose zeros are provably simple and well separated.
fn base_order(p: &WalkParams, order: u32) -> u32 {
    let g = p.g();
    // Harmonic ratio at derivative m is 2^m g.
    let ratio = |m: u32| 2f64.powi(m as i32) * g;
    if g == 0.0 || ratio(order) <= 0.25 {
        return order;
    }
    let mut m = order;
    while ratio(m) < 4.0 {
        m += 1;
    }
    m
}

fn touch_tolerance(p: &WalkParams, m: u32) -> f64 {
    16.0 * f64::EPSILON * p.derivative_scale(m)
}

fn scan_roots(p: &WalkParams, m: u32) -> Vec<f64> {
    let f = |q: f64| p.derivative(q, m);
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| -PI + TAU * i as f64 / SCAN_POINTS as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&q| f(q)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        let j = (i + 1) % SCAN_POINTS;
        let (a, fa, fb) = (grid[i], vals[i], vals[j]);
        let b = a + TAU / SCAN_POINTS as f64;
        if fa == 0.0 {
            roots.push(a);
        } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect(f, a, b, fa));
        }
    }
    roots
}

/// Zeros of `omega^(m)` given the sorted zeros of `omega^(m+1)`.
fn roots_between(p: &WalkParams, m: u32, critical: &[f64]) -> Vec<f64> {
    let f = |q: f64| p.derivative(q, m);
    let tol = touch_tolerance(p, m);
    let mut roots = Vec::new();
    let k = critical.len();
    for i in 0..k {
        let a = critical[i];
        let b = if i + 1 < k {
            critical[i + 1]
        } else {
            critical[0] + TAU
        };
        let (fa, fb) = (f(a), f(b));
        if fa.abs() <= tol {
            roots.push(a);
        } else if fb.abs() > tol && (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect(f, a, b, fa));
        }
    }
    roots
}

fn normalize_roots(mut roots: Vec<f64>) -> Vec<f64> {
    for r in roots.iter_mut() {
        *r = wrap_angle(*r);
    }
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if out.last().is_none_or(|&l| r - l > 1e-12) {
            out.push(r);
        }
    }
    if out.len() > 1 && out[0] + TAU - out[out.len() - 1] <= 1e-12 {
        out.pop();
    }
    out
}

/// Sorted zeros of `omega^(order)` on `[-pi, pi)`.
pub fn derivative_zeros(p: &WalkParams, order: u32) -> Vec<f64> {
    let top = base_order(p, order);
    let mut roots = normalize_roots(scan_roots(p, top));
    for m in (order..top).rev() {
        roots = if roots.is_empty() {
            scan_roots(p, m)
        } else {
            roots_between(p, m, &roots)
        };
        roots = normalize_roots(roots);
    }
    roots
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn classify(p: &WalkParams, q: f64, opts: &FrontOptions) -> Result<ExtremalFront, WalkError> {
    let residual = p.derivative(q, 2).abs();
    if residual > opts.tol_root {
        return Err(WalkError::RootIsolation(format!(
            "|omega''| = {residual:e} at q = {q} exceeds tol_root = {:e}",
            opts.tol_root
        )));
    }
    let mut k = 1;
    while k < MAX_ORDER && p.derivative(q, k + 2).abs() < opts.tol_order {
        k += 1;
    }
    let velocity = p.velocity(q);
    Ok(ExtremalFront {
        q_star: q,
        velocity,
        order: k,
        kappa: p.derivative(q, k + 2) / factorial(k + 1),
        chirality: if velocity < 0.0 {
            Chirality::Left
        } else {
            Chirality::Right
        },
    })
}

/// Topology of the light cone formed by the fronts.
pub fn cone_topology(fronts: &[ExtremalFront], tol_degen: f64) -> Result<ConeTopology, WalkError> {
    let max_order = fronts.iter().map(|f| f.order).max().unwrap_or(1);
    if max_order >= 3 {
        return Ok(ConeTopology::CriticalThirdOrder);
    }
    if max_order == 2 {
        return Ok(ConeTopology::CriticalSecondOrder);
    }
    match fronts.len() {
        2 => Ok(ConeTopology::OneCone),
        4 => {
            let shared = fronts.iter().enumerate().any(|(i, a)| {
                fronts[i + 1..]
                    .iter()
                    .any(|b| (a.velocity - b.velocity).abs() <= tol_degen)
            });
            Ok(if shared {
                ConeTopology::TwoOverlappingCones
            } else {
                ConeTopology::TwoNestedCones
            })
        }
        n => Err(WalkError::RootIsolation(format!(
            "{n} first-order fronts cannot bound a light cone"
        ))),
    }
}

pub fn find_extremal_fronts(p: &WalkParams) -> Result<FrontDiagram, WalkError> {
    find_extremal_fronts_with(p, &FrontOptions::default())
}

pub fn find_extremal_fronts_with(
    p: &WalkParams,
    opts: &FrontOptions,
) -> Result<FrontDiagram, WalkError> {
    let zeros = derivative_zeros(p, 2);
    if zeros.len() < 2 {
        return Err(WalkError::RootIsolation(format!(
            "found {} zeros of omega''; at least two are required",
            zeros.len()
        )));
    }
    let mut fronts = zeros
        .into_iter()
        .map(|q| classify(p, q, opts))
        .collect::<Result<Vec<_>, _>>()?;
    fronts.sort_by(|a, b| {
        a.velocity
            .partial_cmp(&b.velocity)
            .unwrap_or(Ordering::Equal)
            .then(a.q_star.total_cmp(&b.q_star))
    });
    let v_lm = fronts[0].velocity;
    let v_rm = fronts[fronts.len() - 1].velocity;
    let topology = cone_topology(&fronts, opts.tol_degen)?;
    Ok(FrontDiagram {
        params: *p,
        fronts,
        v_lm,
        v_rm,
        topology,
        tol_degen: opts.tol_degen,
    })
}

/// Number of zeros of `omega''`.
pub fn front_count(p: &WalkParams) -> usize {
    derivative_zeros(p, 2).len()
}

/// Coupling at which the number of fronts changes from two to four.
pub fn critical_coupling(phi: f64, tol_g: f64) -> Result<f64, WalkError> {
    check_finite("phi", phi)?;
    if !(tol_g > 0.0) {
        return Err(WalkError::InvalidParameter {
            field: "tol_g",
            reason: format!("{tol_g} must be positive"),
        });
    }
    let phi_c = canonicalize(WalkParams::new(0.0, phi)?).params.phi();
    let count = |g: f64| front_count(&WalkParams::new(g, phi_c).expect("g >= 0 and finite"));
    let (mut lo, mut hi) = (0.0, 4.0);
    if count(hi) <= 2 {
        return Err(WalkError::NoCriticalCoupling { phi, g_max: hi });
    }
    while hi - lo > tol_g {
        let mid = 0.5 * (lo + hi);
        if count(mid) > 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Algebraic cross-check of the front positions through `y = cos q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarticCheck {
    /// Real roots with `|y| <= 1`, sorted and merged.
    pub roots: Vec<f64>,
    /// `cos q*` of fronts without a matching root.
    pub unmatched_fronts: Vec<f64>,
    /// Roots without a matching front.
    pub unmatched_roots: Vec<f64>,
}

impl QuarticCheck {
    pub fn is_consistent(&self) -> bool {
        self.unmatched_fronts.is_empty() && self.unmatched_roots.is_empty()
    }
}

/// Coefficients `[c0, c1, c2, c3, c4]` of the quartic in `y = cos q`
/// obtained by squaring away `sin q` in `omega''(q) = 0`.
pub fn front_quartic(p: &WalkParams) -> [f64; 5] {
    let (g, phi) = (p.g(), p.phi());
    let mu = 8.0 * g * (phi / 2.0).sin().powi(2) - 4.0 * g;
    [
        mu * mu,
        2.0 * mu,
        1.0 + 16.0 * g * mu * phi.cos() - 64.0 * g * g * phi.sin().powi(2),
        16.0 * g * phi.cos(),
        64.0 * g * g,
    ]
}

fn quartic_real_roots(c: [f64; 5]) -> Vec<f64> {
    let mut roots = Vec::new();
    if c[4].abs() < 1e-14 {
        // g = 0: y^2 = 0.
        if c[2] != 0.0 && c[3] == 0.0 {
            let disc = c[1] * c[1] - 4.0 * c[2] * c[0];
            if disc >= 0.0 {
                let s = disc.sqrt();
                roots.push((-c[1] + s) / (2.0 * c[2]));
                roots.push((-c[1] - s) / (2.0 * c[2]));
            }
        }
        return roots;
    }
    let a = [c[0] / c[4], c[1] / c[4], c[2] / c[4], c[3] / c[4]];
    #[rustfmt::skip]
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -a[0],
        1.0, 0.0, 0.0, -a[1],
        0.0, 1.0, 0.0, -a[2],
        0.0, 0.0, 1.0, -a[3],
    );
    // A root of multiplicity m splits into m eigenvalues ~eps^{1/m} apart,
    // some of them off the real axis. Their mean is accurate to ~eps, so
    // nearby eigenvalues are grouped and averaged before testing realness.
    let mut eig: Vec<_> = companion.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut clusters: Vec<Vec<_>> = Vec::new();
    for z in eig {
        match clusters
            .iter_mut()
            .find(|c| c.iter().any(|w: &num_complex::Complex<f64>| (w - z).norm() <= 1e-4))
        {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    for c in clusters {
        let mean = c.iter().sum::<num_complex::Complex<f64>>() / c.len() as f64;
        if mean.im.abs() <= 1e-6 {
            roots.push(mean.re);
        }
    }
    roots
}

pub fn quartic_crosscheck(p: &WalkParams) -> Result<QuarticCheck, WalkError> {
    const MATCH: f64 = 1e-6;
    let mut roots: Vec<f64> = quartic_real_roots(front_quartic(p))
        .into_iter()
        .filter(|y| y.abs() <= 1.0 + 1e-12)
        .map(|y| y.clamp(-1.0, 1.0))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < MATCH);
    let diagram = find_extremal_fronts(p)?;
    let cosines: Vec<f64> = diagram.fronts.iter().map(|f| f.q_star.cos()).collect();
    let unmatched_fronts = cosines
        .iter()
        .copied()
        .filter(|c| roots.iter().all(|r| (r - c).abs() > MATCH))
        .collect();
    let unmatched_roots = roots
        .iter()
        .copied()
        .filter(|r| cosines.iter().all(|c| (r - c).abs() > MATCH))
        .collect();
    Ok(QuarticCheck {
        roots,
        unmatched_fronts,
        unmatched_roots,
    })
}
