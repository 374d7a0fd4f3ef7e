//! Physical parameters and Hamiltonian assembly for the driven trimer.
//!
//! The model is
//!
//!   H(t) = -v sum_{j=1,2} (b_{j+1}^dag b_j + h.c.)
//!        + U0/2 sum_j n_j(n_j - 1) + U1 (n1 n2 + n2 n3) + U2 n1 n3
//!        + (eps0 + eps1 cos(omega t)) (n1 - n3)
//!
//! in natural units hbar = 1, with energies measured against the hopping
//! rate v. Interaction and tilt terms are diagonal in the Fock basis; the
//! hopping connects states that differ by one particle moved across an
//! adjacent bond, with matrix element -v sqrt(n_j (n_i + 1)).
//!
//! Directed transport relies on two resonance conditions: equally spaced
//! interaction scales U0 - U1 = U1 - U2 = omega, and an integer static tilt
//! eps0 = m omega. [`check_resonance`] reports how close a parameter set is
//! to them, together with the interaction energy released when one particle
//! leaves the central well, dE1 = [N(U1 - U2) - (U0 - U1)] + eps0, and its
//! photon count dE1/omega.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{hop_elements, Basis, Bond, FockState};

/// All Hamiltonian and drive constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Hopping rate between adjacent wells (energy scale, > 0).
    pub v: f64,
    /// On-site interaction.
    #[serde(rename = "U0")]
    pub u0: f64,
    /// Nearest-neighbor interaction.
    #[serde(rename = "U1")]
    pub u1: f64,
    /// Next-nearest-neighbor interaction.
    #[serde(rename = "U2")]
    pub u2: f64,
    /// Static tilt between the outer wells.
    pub eps0: f64,
    /// AC drive amplitude.
    pub eps1: f64,
    /// Drive frequency (> 0).
    pub omega: f64,
    /// Total particle number.
    #[serde(rename = "N")]
    pub n: u32,
}

impl ModelParams {
    /// Validate the basic constraints (v > 0, omega > 0, N >= 1). Detuned
    /// interaction values are allowed; resonance is a reported property,
    /// not a construction requirement.
    pub fn validate(&self) -> Result<()> {
        if !self.v.is_finite() || self.v <= 0.0 {
            return Err(Error::InvalidParameter(format!("v must be > 0, got {}", self.v)));
        }
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega must be > 0, got {}",
                self.omega
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be >= 1".into()));
        }
        for (name, x) in [
            ("U0", self.u0),
            ("U1", self.u1),
            ("U2", self.u2),
            ("eps0", self.eps0),
            ("eps1", self.eps1),
        ] {
            if !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")));
            }
        }
        Ok(())
    }

    /// Drive period T = 2 pi / omega.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    /// Instantaneous tilt eps(t) = eps0 + eps1 cos(omega t).
    pub fn drive(&self, t: f64) -> f64 {
        self.eps0 + self.eps1 * (self.omega * t).cos()
    }

    /// Parameters of the mirror-image system: the left-right reflection
    /// maps (eps0, eps1) -> (-eps0, -eps1) and leaves everything else.
    pub fn mirrored(&self) -> Self {
        Self {
            eps0: -self.eps0,
            eps1: -self.eps1,
            ..*self
        }
    }
}

/// How a parameter set relates to the transport resonance conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceReport {
    /// U0 - U1.
    pub delta_a: f64,
    /// U1 - U2.
    pub delta_b: f64,
    /// Detuning beta = (U0 - U1) - (U1 - U2).
    pub beta: f64,
    /// eps0 / omega.
    pub m_ratio: f64,
    /// Nearest integer to eps0 / omega.
    pub m: i64,
    pub is_resonant: bool,
    /// Interaction-plus-tilt energy released when one particle moves from
    /// the central to an outer well out of |N-i, i, 0>.
    pub delta_e1: f64,
    /// delta_e1 / omega: the number of drive quanta bridging that gap.
    pub k_ratio: f64,
}

/// Static interaction energy <s| H_int |s> (no tilt, no drive).
fn interaction_energy(params: &ModelParams, s: FockState) -> f64 {
    let (n1, n2, n3) = (f64::from(s.n1), f64::from(s.n2), f64::from(s.n3));
    0.5 * params.u0 * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0) + n3 * (n3 - 1.0))
        + params.u1 * (n1 * n2 + n2 * n3)
        + params.u2 * n1 * n3
}

/// Diagonal energy of a Fock state at time t:
/// U0/2 sum n_j(n_j-1) + U1(n1 n2 + n2 n3) + U2 n1 n3 + eps(t)(n1 - n3).
pub fn diagonal_energy(params: &ModelParams, s: FockState, t: f64) -> f64 {
    interaction_energy(params, s) + params.drive(t) * drive_coefficient(s) as f64
}

/// Static (time-averaged) diagonal energy, with the eps0 tilt but without
/// the oscillating part. This is the energy whose per-link gaps decide which
/// photon number a transition absorbs.
pub fn static_diagonal_energy(params: &ModelParams, s: FockState) -> f64 {
    interaction_energy(params, s) + params.eps0 * drive_coefficient(s) as f64
}

/// Coupling of a state to the drive: d = n1 - n3.
pub fn drive_coefficient(s: FockState) -> i64 {
    i64::from(s.n1) - i64::from(s.n3)
}

/// Hamiltonian split into its static hopping+interaction part and the
/// diagonal the tilt multiplies; H(t) = static + eps(t) * diag(drive).
///
/// This is the form the propagator consumes: assembling H(t) at every
/// integrator stage would redo the hop bookkeeping.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    /// -v * hops + interaction diagonal.
    pub static_part: DMatrix<f64>,
    /// Per-state drive coefficients n1 - n3.
    pub drive_diag: Vec<f64>,
}

impl HamiltonianParts {
    pub fn new(params: &ModelParams, basis: &Basis) -> Result<Self> {
        params.validate()?;
        if basis.particles() != params.n {
            return Err(Error::BasisMismatch {
                basis_n: basis.particles(),
                params_n: params.n,
            });
        }
        let dim = basis.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for bond in [Bond::LeftCenter, Bond::CenterRight] {
            for (i, j, amp) in hop_elements(basis, bond) {
                m[(i, j)] += -params.v * amp;
            }
        }
        for (i, s) in basis.states().iter().enumerate() {
            m[(i, i)] = interaction_energy(params, *s);
        }
        let drive_diag = basis
            .states()
            .iter()
            .map(|s| drive_coefficient(*s) as f64)
            .collect();
        Ok(Self {
            static_part: m,
            drive_diag,
        })
    }

    /// Dense H(t).
    pub fn at(&self, params: &ModelParams, t: f64) -> DMatrix<f64> {
        let mut m = self.static_part.clone();
        let eps = params.drive(t);
        for (i, d) in self.drive_diag.iter().enumerate() {
            m[(i, i)] += eps * d;
        }
        m
    }
}

/// The full time-dependent Hamiltonian matrix at time t. Real symmetric.
pub fn assemble_hamiltonian(params: &ModelParams, basis: &Basis, t: f64) -> Result<DMatrix<f64>> {
    let parts = HamiltonianParts::new(params, basis)?;
    Ok(parts.at(params, t))
}

/// Report how the parameters relate to the resonance conditions. Never
/// fails: detuned models are first-class inputs for the exact propagator.
///
/// `tol` is a relative tolerance: the interaction conditions are compared
/// against omega as |U0 - U1 - omega| <= tol * omega, and the tilt ratio as
/// |eps0/omega - m| <= tol * max(1, |eps0/omega|).
pub fn check_resonance(params: &ModelParams, tol: f64) -> ResonanceReport {
    let delta_a = params.u0 - params.u1;
    let delta_b = params.u1 - params.u2;
    let beta = delta_a - delta_b;
    let m_ratio = params.eps0 / params.omega;
    let m = m_ratio.round() as i64;
    let scale = params.omega.abs();
    let is_resonant = (delta_a - params.omega).abs() <= tol * scale
        && (delta_b - params.omega).abs() <= tol * scale
        && (m_ratio - m as f64).abs() <= tol * m_ratio.abs().max(1.0);
    let delta_e1 = f64::from(params.n) * delta_b - delta_a + params.eps0;
    ResonanceReport {
        delta_a,
        delta_b,
        beta,
        m_ratio,
        m,
        is_resonant,
        delta_e1,
        k_ratio: delta_e1 / params.omega,
    }
}

/// Default relative tolerance for [`check_resonance`].
pub const RESONANCE_TOL: f64 = 1e-9;
