//! Cotangent Laplace–Beltrami assembly, the point-source Green solve and the
//! logarithmic fit.

mod green;
mod laplace;
mod sparse;

pub use green::{
    fit_log_constant, point_source, solve_green, sphere_log_constant, GreenField, LogFit,
    SOLVE_RTOL,
};
pub use laplace::{assemble, LaplaceOperator};
pub use sparse::{CgStats, CsrMatrix};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GreenError {
    #[error("linear solve did not converge after {iterations} iterations (relative residual {relative_residual:e})")]
    NotConverged { iterations: usize, relative_residual: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
