//! Superintegrable Hamiltonians on two-dimensional spaces of constant curvature.
//!
//! The Hamiltonian separates in geodesic polar coordinates,
//! `H = p_r²/2 + (p_φ²/2 + c(φ))/s_k²(r) + a^k(r)`, and the crate covers the
//! pieces needed to study it numerically: radial potentials and the isoperiodic
//! angular families linked to them, action variables in closed form and by
//! quadrature, trajectory integration with closure detection, the conserved
//! phase behind the third integral, and pass/fail verification suites.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod model;
pub mod potentials;
pub mod quadrature;
pub mod roots;
pub mod specfun;
pub mod superconstants;
pub mod verify;

pub use actions::{ActionPair, SeparationConstants, TurningPoints};
pub use dynamics::{IntegratorControl, Method, PhaseState, Placement, StepSize, Trajectory};
pub use error::{Error, Result};
pub use geometry::{s_k, s_k_prime, Curvature};
pub use model::{AngularPotential, Model};
pub use potentials::{AngularDomain, AngularFamily, Branch, Frequency, Quadrant, RadialLink, RadialPotential};
pub use specfun::EllipticArgs;
pub use superconstants::{ActionWeight, PhasePath, PhaseValue};
pub use verify::{CheckRecord, VerificationReport};
