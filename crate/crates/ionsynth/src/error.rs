//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A requested Fock index lies beyond the simulation truncation.
    #[error("truncation exceeded: (n_x={nx}, n_y={ny}) outside caps ({cap_x}, {cap_y})")]
    TruncationExceeded {
        nx: usize,
        ny: usize,
        cap_x: usize,
        cap_y: usize,
    },

    /// Coefficient table norm too far from 1 to renormalize silently.
    #[error("unnormalized coefficient table: ||C||_2 = {norm} (must be within {tol} of 1)")]
    Unnormalized { norm: f64, tol: f64 },

    /// Non-finite number in an input.
    #[error("non-finite input value in {context}")]
    NonFinite { context: &'static str },

    /// Configuration field outside its allowed domain.
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: &'static str },

    /// An internal consistency check failed.
    #[error("internal invariant violated: {what}")]
    Invariant { what: &'static str },

    /// Two state vectors with different truncations were combined.
    #[error("cap mismatch: ({}, {}) vs ({}, {})", a.0, a.1, b.0, b.1)]
    CapMismatch { a: (usize, usize), b: (usize, usize) },

    /// A coefficient magnitude exceeded the remaining residual amplitude:
    /// non-normalized input slipped through validation.
    #[error(
        "unnormalized-residual at (m={m}, n={n}): |coeff| = {coeff_abs} exceeds residual {residual}"
    )]
    UnnormalizedResidual {
        m: usize,
        n: usize,
        coeff_abs: f64,
        residual: f64,
    },

    /// The sideband coupling magnitude underflowed to zero.
    #[error("zero-coupling on sideband (m={m}, n={n}): cannot set a pulse duration")]
    ZeroCoupling { m: usize, n: usize },

    /// `|g_2>` population found outside `|0,0>`; the analytic pair-rotation
    /// relations only hold when all `|g_2>` amplitude sits in the motional
    /// ground state.
    #[error(
        "protocol-invariant-violation: |g_2> population {population} at (n_x={nx}, n_y={ny})"
    )]
    ProtocolInvariantViolation {
        nx: usize,
        ny: usize,
        population: f64,
    },

    /// Norm drift of the integrated state exceeded the divergence limit.
    #[error("integrator-diverged: norm drift {drift} exceeds {limit}")]
    IntegratorDiverged { drift: f64, limit: f64 },

    /// Step-halving hit the configured step floor before converging.
    #[error("step-floor: required step {step} below configured minimum {min_step}")]
    StepFloor { step: f64, min_step: f64 },

    /// A pulse is inconsistent with the trap configuration it is run under.
    #[error("pulse {index} inconsistent with trap config: {reason}")]
    PulseConfigMismatch { index: usize, reason: String },

    /// Error while executing a specific pulse of a sequence.
    #[error("pulse {index}: {source}")]
    AtPulse {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_pulse(self, index: usize) -> Error {
        Error::AtPulse {
            index,
            source: Box::new(self),
        }
    }
}
