//! Radial-graph machinery: the reduced latitude ODE and shooting, the
//! hemisphere PDE with its Newton solver, moving-plane reflections,
//! asymptotics at the collar and the two algebraic ellipticity lemmas.

mod asymptotics;
mod dual;
mod grid;
mod lemmas;
mod newton;
mod ode;
mod reflect;

pub use asymptotics::{asymptotics_check, AsymptoticsReport, AsymptoticsRow};
pub use grid::{pde_residual, HemisphereGrid, ResidualField, MIN_PHI_COLS, MIN_THETA_ROWS};
pub use lemmas::{
    build_selfadjoint, eigenvalues, ellipticity_constant, field, field_gap, selfadjoint_bounds, FieldGap,
};
pub use newton::{newton_solve, NewtonOutcome, MAX_HALVINGS};
pub use ode::{
    linearized_coeffs, ode_residual, ode_rhs, operator_f, pole_log_amplitude, series_start, shoot,
    uniqueness_probe, AbortRecord, OdeForm, RadialProfile, ShootOutcome, UniquenessReport, BLOWUP_SLOPE,
    POLE_FIT_DISTANCES,
};
pub use reflect::{
    latitude, latitude_ratio, moving_plane_report, plane_normal, point_at, reflect, reflection_gap,
    ReflectionReport, Solution,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadialError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("linear solver failed: {0}")]
    Solver(String),
}
