use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("derivative order must be at least 1, got {0}")]
    DerivativeOrder(u32),

    #[error("root isolation failed: {0}")]
    RootIsolation(String),

    #[error("no transition to four fronts found for phi = {phi} with g up to {g_max}")]
    NoCriticalCoupling { phi: f64, g_max: f64 },

    #[error("lattice of {sites} sites is too small for t = {t}; need at least {required}")]
    LatticeTooSmall { sites: usize, required: usize, t: f64 },

    #[error("amplitude {amplitude:e} within the edge guard band exceeds {threshold:e}; the walk wrapped around the ring")]
    Wraparound { amplitude: f64, threshold: f64 },

    #[error("current density has imaginary residue {0:e}")]
    ImaginaryCurrent(f64),

    #[error("expected a {expected} field, got {found}")]
    WrongField { expected: &'static str, found: String },

    #[error("moments are degenerate: second moment is {0:e}")]
    DegenerateMoments(f64),

    #[error("front of order {0} has no generalized-Airy staircase (order must be odd)")]
    EvenOrderFront(u32),

    #[error("scaling variable {0} is outside the supported range |xi| <= 50")]
    XiOutOfRange(f64),

    #[error("edge window [{lo}, {hi}] contains the front at n = {other}")]
    WindowOverlap { lo: i64, hi: i64, other: i64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub(crate) fn check_finite(field: &'static str, v: f64) -> Result<f64, WalkError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(WalkError::InvalidParameter {
            field,
            reason: format!("{v} is not finite"),
        })
    }
}
