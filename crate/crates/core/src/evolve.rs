//! Exact lattice evolution from a site-localized initial state.
//!
//! On a ring of `L` sites the amplitude is the inverse discrete Fourier
//! transform of `exp(-i omega(q_j) t)`; sites are labelled `n = i - L/2`.
//! The ring reproduces the infinite lattice as long as the wave packet has not
//! reached the seam, which [`evolve`] enforces before and after the transform.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::dispersion::WalkParams;
use crate::error::{check_finite, WalkError};
use crate::fronts::find_extremal_fronts;
use crate::numerics::{compensated_prefix, compensated_sum, next_smooth};

/// Width of the band at each end of the ring that must stay empty.
pub const GUARD_SITES: usize = 10;
/// Largest amplitude tolerated inside the guard band.
pub const TAIL_THRESHOLD: f64 = 1e-10;

const PARALLEL_MIN: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    /// Size chosen from the light cone and the front tails.
    Auto,
    Sites(usize),
}

/// Amplitudes `psi(n, t)` on a ring.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    params: WalkParams,
    t: f64,
    amps: Vec<Complex64>,
}

impl WaveFunction {
    pub fn params(&self) -> WalkParams {
        self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Site label of the first stored amplitude.
    pub fn first_site(&self) -> i64 {
        -((self.amps.len() / 2) as i64)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, n: i64) -> Option<Complex64> {
        usize::try_from(n - self.first_site())
            .ok()
            .and_then(|i| self.amps.get(i).copied())
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amps.iter().map(|a| a.norm_sqr()))
    }

    /// Largest `|psi|` within [`GUARD_SITES`] of either end of the ring.
    pub fn edge_amplitude(&self) -> f64 {
        let l = self.amps.len();
        let band = GUARD_SITES.min(l / 2);
        self.amps[..band]
            .iter()
            .chain(&self.amps[l - band..])
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }
}

/// Sites needed so that the packet and its tails fit on the ring.
pub fn required_sites(p: &WalkParams, t: f64) -> Result<usize, WalkError> {
    let d = find_extremal_fronts(p)?;
    let span = (d.v_rm - d.v_lm) * t;
    Ok(span.ceil() as usize + 2 * (GUARD_SITES + 20))
}

/// Ring size used by [`Lattice::Auto`]: twice the largest front excursion plus a
/// tail margin, rounded to a size with small prime factors.
pub fn auto_lattice_size(p: &WalkParams, t: f64) -> Result<usize, WalkError> {
    let d = find_extremal_fronts(p)?;
    let tail = 40.0 + 12.0 * ((1.0 + 8.0 * p.g()) * t).cbrt();
    let half = (d.max_speed() * t + tail).ceil() as usize;
    Ok(2 * next_smooth(half))
}

fn check_time(t: f64) -> Result<f64, WalkError> {
    check_finite("t", t)?;
    if t < 0.0 {
        return Err(WalkError::InvalidParameter {
            field: "t",
            reason: format!("{t} is negative"),
        });
    }
    Ok(t)
}

/// Evolve `delta_{n,0}` to time `t`, guarding against wraparound.
pub fn evolve(p: &WalkParams, t: f64, lattice: Lattice) -> Result<WaveFunction, WalkError> {
    check_time(t)?;
    let sites = match lattice {
        Lattice::Auto => auto_lattice_size(p, t)?,
        Lattice::Sites(l) => {
            let required = required_sites(p, t)?;
            if l < required {
                return Err(WalkError::LatticeTooSmall {
                    sites: l,
                    required,
                    t,
                });
            }
            l
        }
    };
    let wf = evolve_ring(p, t, sites)?;
    let amplitude = wf.edge_amplitude();
    if amplitude >= TAIL_THRESHOLD {
        return Err(WalkError::Wraparound {
            amplitude,
            threshold: TAIL_THRESHOLD,
        });
    }
    Ok(wf)
}

/// Evolve on a ring of `sites` sites without any wraparound check.
pub fn evolve_ring(p: &WalkParams, t: f64, sites: usize) -> Result<WaveFunction, WalkError> {
    check_time(t)?;
    if sites < 4 || !sites.is_multiple_of(2) {
        return Err(WalkError::InvalidParameter {
            field: "lattice",
            reason: format!("{sites} sites; need an even number of at least 4"),
        });
    }
    let l = sites as f64;
    // (-1)^j moves site 0 to index L/2.
    let phase = |j: usize| {
        let q = TAU * j as f64 / l;
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        Complex64::from_polar(sign / l, -p.omega(q) * t)
    };
    let mut amps: Vec<Complex64> = if sites >= PARALLEL_MIN {
        (0..sites).into_par_iter().map(phase).collect()
    } else {
        (0..sites).map(phase).collect()
    };
    FftPlanner::new().plan_fft_inverse(sites).process(&mut amps);
    Ok(WaveFunction {
        params: *p,
        t,
        amps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObservableKind {
    Probability,
    Current,
    CumulativeProbability,
    CumulativeCurrent,
    CumulativeMoment(u32),
}

impl ObservableKind {
    fn label(&self) -> String {
        format!("{self:?}")
    }
}

/// A real field on consecutive lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableField {
    pub kind: ObservableKind,
    pub t: f64,
    pub first_site: i64,
    pub values: Vec<f64>,
}

impl ObservableField {
    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len() as i64).map(move |i| self.first_site + i)
    }

    pub fn value_at(&self, n: i64) -> Option<f64> {
        usize::try_from(n - self.first_site)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.values.len() as i64 - 1
    }

    fn expect(&self, kind: ObservableKind, expected: &'static str) -> Result<(), WalkError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(WalkError::WrongField {
                expected,
                found: self.kind.label(),
            })
        }
    }
}

pub fn probability_density(wf: &WaveFunction) -> ObservableField {
    ObservableField {
        kind: ObservableKind::Probability,
        t: wf.t,
        first_site: wf.first_site(),
        values: wf.amps.iter().map(|a| a.norm_sqr()).collect(),
    }
}

/// Current through the link `(n-1, n)`, so that `dp(n)/dt = j(n) - j(n+1)`.
///
/// Nearest-neighbour hops contribute `-2 Im(conj psi(n-1) psi(n))`; each
/// next-nearest hop crossing the link contributes
/// `-2 g Im(e^{i phi} conj psi(m-2) psi(m))` with `m = n, n+1`.
pub fn current_density(wf: &WaveFunction) -> Result<ObservableField, WalkError> {
    let l = wf.amps.len();
    let psi = |i: isize| wf.amps[i.rem_euclid(l as isize) as usize];
    let hop = Complex64::from_polar(wf.params.g(), wf.params.phi());
    let flux = |a: Complex64, b: Complex64, w: Complex64| {
        // i (w conj(a) b - c.c.)
        let z = w * a.conj() * b;
        Complex64::i() * (z - z.conj())
    };
    let one = Complex64::new(1.0, 0.0);
    let mut residue = 0.0f64;
    let values = (0..l as isize)
        .map(|i| {
            let z = flux(psi(i - 1), psi(i), one)
                + flux(psi(i - 2), psi(i), hop)
                + flux(psi(i - 1), psi(i + 1), hop);
            residue = residue.max(z.im.abs());
            z.re
        })
        .collect();
    if residue > 1e-12 {
        return Err(WalkError::ImaginaryCurrent(residue));
    }
    Ok(ObservableField {
        kind: ObservableKind::Current,
        t: wf.t,
        first_site: wf.first_site(),
        values,
    })
}

/// Inclusive running sum of a density: `Phi(n)` or `J(n)`.
pub fn cumulative(f: &ObservableField) -> Result<ObservableField, WalkError> {
    let kind = match f.kind {
        ObservableKind::Probability => ObservableKind::CumulativeProbability,
        ObservableKind::Current => ObservableKind::CumulativeCurrent,
        other => {
            return Err(WalkError::WrongField {
                expected: "Probability or Current",
                found: other.label(),
            })
        }
    };
    Ok(ObservableField {
        kind,
        t: f.t,
        first_site: f.first_site,
        values: compensated_prefix(&f.values),
    })
}

/// `sum_n n^k p(n)`.
pub fn position_moment(f: &ObservableField, k: u32) -> Result<f64, WalkError> {
    f.expect(ObservableKind::Probability, "Probability")?;
    Ok(compensated_sum(
        f.sites()
            .zip(&f.values)
            .map(|(n, &p)| (n as f64).powi(k as i32) * p),
    ))
}

/// `M_k(n) = sum_{m <= n} m^k p(m)`.
pub fn cumulative_moment(f: &ObservableField, k: u32) -> Result<ObservableField, WalkError> {
    f.expect(ObservableKind::Probability, "Probability")?;
    let weighted: Vec<f64> = f
        .sites()
        .zip(&f.values)
        .map(|(n, &p)| (n as f64).powi(k as i32) * p)
        .collect();
    Ok(ObservableField {
        kind: ObservableKind::CumulativeMoment(k),
        t: f.t,
        first_site: f.first_site,
        values: compensated_prefix(&weighted),
    })
}

/// `mu_3 / mu_2^{3/2}` of the probability distribution.
pub fn skewness(f: &ObservableField) -> Result<f64, WalkError> {
    let mu2 = position_moment(f, 2)?;
    // Above the transform roundoff floor, far below any physical spread.
    if mu2 <= 1e-20 {
        return Err(WalkError::DegenerateMoments(mu2));
    }
    Ok(position_moment(f, 3)? / mu2.powf(1.5))
}
