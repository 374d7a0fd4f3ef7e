//! Crate-wide error type.

use crate::fock::FockState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("particle number must be between 1 and {max}, got {got}")]
    ParticleNumberOutOfRange { got: u32, max: u32 },

    #[error("state vector has dimension {got}, basis has dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    #[error("basis was built for N={basis_n} but parameters have N={params_n}")]
    BasisMismatch { basis_n: u32, params_n: u32 },

    #[error("state {0} does not belong to the basis")]
    StateNotInBasis(FockState),

    #[error("state vector is not normalized: |psi| = {norm}")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Bessel order {n} outside supported range |n| <= {max}")]
    BesselOrderOutOfRange { n: i32, max: i32 },

    #[error("Bessel argument {x} outside supported range |x| <= {max}")]
    BesselArgumentOutOfRange { x: f64, max: f64 },

    #[error("Bessel zero index out of range: order {n}, index {s} (both must be <= 16, s >= 1)")]
    BesselZeroOutOfRange { n: i32, s: usize },

    #[error("step size underflow at t = {t} (h = {h}); the problem appears stiff at this tolerance")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("states {a} and {b} are not connected by a single hop")]
    NotAdjacent { a: FockState, b: FockState },

    #[error(
        "link {a} <-> {b} is detuned: gap/omega = {ratio} is not an integer within {tol}; \
         the period-averaged model is only defined on resonance"
    )]
    DetunedLink {
        a: FockState,
        b: FockState,
        ratio: f64,
        tol: f64,
    },

    #[error("averaged coupling has imaginary residue {imag:e} (> 1e-10); averaging convention broken")]
    ImaginaryResidue { imag: f64 },

    #[error("quadrature for link {a} <-> {b} did not converge: refinement changed result by {delta:e}")]
    QuadratureNotConverged { a: FockState, b: FockState, delta: f64 },

    #[error("state pair {a} <-> {b} lies outside the boundary families with a closed-form coupling")]
    OutsideClosedFormFamilies { a: FockState, b: FockState },

    #[error("transport count {count} out of range for N = {n}: {reason}")]
    PlanOutOfRange { count: u32, n: u32, reason: String },

    #[error(
        "no admissible Bessel zero found for order {order} within the first {scanned} zeros \
         (each candidate left the effective model unable to transport the requested count)"
    )]
    NoAdmissibleZero { order: i32, scanned: usize },
}
