pub mod coefficients;
pub mod convergence;
pub mod fields;
pub mod grid;
pub mod scheme;
pub mod weak;

pub use coefficients::{make_rough_coefficients, CoefficientField, Coefficients};
pub use convergence::{convergence_study, ConvergenceCase, ConvergenceStudy};
pub use fields::{indicator_subsolution, translated_kernel_solution, IndicatorField, KernelSolution};
pub use grid::{Axis, GridFunction, Interpolation};
pub use scheme::{solve, SolveGrid};
pub use weak::{tolerance_grid, weak_subsolution_residual, weak_supersolution_residual, WeakResidual, WeakTestBasis};
