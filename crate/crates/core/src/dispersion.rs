//! Dispersion relation `omega(q) = 2 cos q + 2 g cos(2q + phi)` and its derivatives.
//!
//! [`WalkParams`] accepts any finite `phi` and any `g >= 0`. The analysis
//! modules work on the canonical sector `0 <= phi <= pi/2`, reached through
//! [`canonicalize`], which also returns the [`GaugeMap`] needed to translate
//! results back to the raw parameters.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{check_finite, WalkError};

/// Coupling `g` of the next-nearest-neighbour hop and its phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkParams {
    g: f64,
    phi: f64,
}

impl WalkParams {
    pub fn new(g: f64, phi: f64) -> Result<Self, WalkError> {
        check_finite("g", g)?;
        check_finite("phi", phi)?;
        if g < 0.0 {
            return Err(WalkError::InvalidParameter {
                field: "g",
                reason: format!("{g} is negative; absorb the sign into phi + pi"),
            });
        }
        Ok(Self { g, phi })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Whether `phi` already lies in the canonical sector `[0, pi/2]`.
    pub fn is_canonical(&self) -> bool {
        (0.0..=FRAC_PI_2).contains(&self.phi)
    }

    pub fn omega(&self, q: f64) -> f64 {
        self.derivative(q, 0)
    }

    /// Group velocity `d omega / dq`.
    pub fn velocity(&self, q: f64) -> f64 {
        self.derivative(q, 1)
    }

    /// The `m`-th derivative of `omega`, `m >= 1`.
    pub fn omega_deriv(&self, q: f64, m: u32) -> Result<f64, WalkError> {
        if m == 0 {
            return Err(WalkError::DerivativeOrder(m));
        }
        Ok(self.derivative(q, m))
    }

    /// `d^m omega / dq^m` for any `m >= 0` (m = 0 gives omega itself).
    pub fn derivative(&self, q: f64, m: u32) -> f64 {
        dispersion_derivative(q, m, self.g, self.phi)
    }

    /// Sum of the magnitudes of the two harmonics of the `m`-th derivative.
    /// Sets the rounding scale of [`Self::derivative`].
    pub fn derivative_scale(&self, m: u32) -> f64 {
        2.0 + 2f64.powi(m as i32 + 1) * self.g
    }
}

/// `cos(x + m pi / 2)` without rounding the phase shift.
fn cos_quarter_shift(x: f64, m: u32) -> f64 {
    match m % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    }
}

/// Raw formula for the `m`-th derivative, valid for any real `g` and `phi`.
pub fn dispersion_derivative(q: f64, m: u32, g: f64, phi: f64) -> f64 {
    2.0 * cos_quarter_shift(q, m)
        + 2f64.powi(m as i32 + 1) * g * cos_quarter_shift(2.0 * q + phi, m)
}

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle(q: f64) -> f64 {
    let r = (q + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// How raw wave vectors relate to canonical ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaveVectorMap {
    /// `q_raw = q`.
    Identity,
    /// `q_raw = -q`, with `omega_raw(q_raw) = omega(q)`.
    Mirror,
    /// `q_raw = pi - q`, with `omega_raw(q_raw) = -omega(q)`.
    Reflect,
    /// `q_raw = q - pi`, with `omega_raw(q_raw) = -omega(q)`.
    Shift,
}

/// Relation between a raw parameter set and its canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaugeMap {
    pub wave_vector: WaveVectorMap,
}

impl GaugeMap {
    /// Probability densities agree up to `n -> -n` when this is true.
    pub fn reflects_space(&self) -> bool {
        matches!(self.wave_vector, WaveVectorMap::Mirror | WaveVectorMap::Shift)
    }

    pub fn energy_sign(&self) -> f64 {
        match self.wave_vector {
            WaveVectorMap::Identity | WaveVectorMap::Mirror => 1.0,
            WaveVectorMap::Reflect | WaveVectorMap::Shift => -1.0,
        }
    }

    pub fn raw_wave_vector(&self, q: f64) -> f64 {
        wrap_angle(match self.wave_vector {
            WaveVectorMap::Identity => q,
            WaveVectorMap::Mirror => -q,
            WaveVectorMap::Reflect => PI - q,
            WaveVectorMap::Shift => q - PI,
        })
    }

    pub fn raw_velocity(&self, v: f64) -> f64 {
        if self.reflects_space() {
            -v
        } else {
            v
        }
    }

    pub fn raw_site(&self, n: i64) -> i64 {
        if self.reflects_space() {
            -n
        } else {
            n
        }
    }
}

/// Canonical parameters together with the map back to the raw ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Canonical {
    pub params: WalkParams,
    pub map: GaugeMap,
}

/// Reduce `phi` to `[0, pi/2]` using the symmetries of the dispersion.
///
/// Every raw `(g, phi)` satisfies
/// `omega_raw(map(q)) = energy_sign * omega_canonical(q)`.
pub fn canonicalize(p: WalkParams) -> Canonical {
    let phi = p.phi.rem_euclid(TAU);
    let (phi_c, wave_vector) = if phi <= FRAC_PI_2 {
        (phi, WaveVectorMap::Identity)
    } else if phi <= PI {
        (PI - phi, WaveVectorMap::Reflect)
    } else if phi <= 3.0 * FRAC_PI_2 {
        (phi - PI, WaveVectorMap::Shift)
    } else {
        (TAU - phi, WaveVectorMap::Mirror)
    };
    Canonical {
        params: WalkParams {
            g: p.g,
            phi: phi_c.clamp(0.0, FRAC_PI_2),
        },
        map: GaugeMap { wave_vector },
    }
}
