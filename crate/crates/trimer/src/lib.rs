//! Simulation and drive-parameter planning for dipolar bosons in a shaken
//! triple-well potential.
//!
//! The crate integrates the exact driven three-site Bose-Hubbard dynamics,
//! constructs the high-frequency period-averaged model whose couplings are
//! renormalized by Bessel factors, and computes static-tilt / drive-amplitude
//! pairs that transport a prescribed number of bosons along a chosen pathway
//! and direction.
//!
//! Modules, bottom to top:
//!
//! * [`fock`] - the three-site Fock basis and number observables
//! * [`model`] - parameters, diagonal energies, Hamiltonian assembly,
//!   resonance reporting
//! * [`bessel`] - integer-order Bessel functions and their zeros
//! * [`propagator`] - adaptive integration of the exact dynamics
//! * [`effective`] - the period-averaged model and its decoupled subspaces
//! * [`planner`] - selective-transport plans and their verification
//! * [`figures`] - the benchmark drive configurations and pass criteria
//!
//! ```
//! use trimer::fock::{build_basis, FockState};
//! use trimer::planner::{plan_center_transport, BaseParams, Direction};
//!
//! let base = BaseParams { v: 1.0, u0: 75.0, u1: 40.0, u2: 5.0, omega: 35.0, n: 4 };
//! let plan = plan_center_transport(&base, 1, Direction::Right, 1).unwrap();
//! assert_eq!(plan.m, 1);                       // eps0 = omega
//! assert!((plan.eps1_over_omega - 5.1356).abs() < 5e-5);
//! assert_eq!(plan.initial_state, FockState::new(0, 4, 0));
//! assert_eq!(build_basis(4).unwrap().dim(), 15);
//! ```

pub mod bessel;
pub mod effective;
pub mod error;
pub mod figures;
pub mod fock;
pub mod model;
pub mod planner;
pub mod propagator;

pub use error::{Error, Result};
