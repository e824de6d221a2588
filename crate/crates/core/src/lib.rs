//! Numerical laboratory for kinetic Fokker–Planck equations with rough
//! coefficients: Galilean geometry, the Kolmogorov kernel, a splitting
//! solver and checkers for the De Giorgi–Nash–Moser estimates.

pub mod error;
pub mod estimates;
pub mod geometry;
pub mod kernel;
pub mod solver;
pub mod suite;

pub use error::{Error, Result};
pub use estimates::constants::{paper_constants, PaperConstants};
pub use estimates::report::{EstimateReport, Status};
pub use geometry::{CylinderKind, KineticCylinder, PhasePoint};
pub use solver::coefficients::CoefficientField;
pub use solver::grid::GridFunction;
