pub mod calibration;
pub mod checks;
pub mod constants;
pub mod field;
pub mod norms;
pub mod report;

pub use calibration::Calibration;
pub use constants::{paper_constants, PaperConstants};
pub use field::{ConstantField, Frame, PhaseField, Quadrature, Setting};
pub use report::{EstimateReport, RhsTerm, Status};
