//! Radial potentials, the `f(c)` maps and the (α, β) angular families.

pub mod family;
pub mod quadrants;
pub mod radial;

pub use family::{
    validate_family, AngularDomain, AngularFamily, Branch, FamilyViolation, Frequency, RadialLink,
    ValidationReport,
};
pub use quadrants::{poschl_teller_amplitudes, poschl_teller_value, quadrant_value, Quadrant};
pub use radial::{radial_value, RadialPotential};
