//! Numerical viscosity-sense machinery for the Hamilton-Jacobi resolvent
//! equation `f(x) - λ H(x, ∇f(x)) - h(x) = 0` on grids over the state
//! space, the resolvent-iteration semigroup, and a dynamic-programming
//! evaluation of the variational semigroup for cross-validation.
//!
//! The rates' tangency at the boundary makes the equation self-contained on
//! the state space: no boundary condition is imposed, one-sided stencils
//! are used at faces.

pub mod grid;
mod nisio;
mod resolvent;
mod scheme;

pub use grid::{Domain, Grid, GridError, GridFunction};
pub use nisio::nisio_value_dp;
pub use resolvent::{
    comparison_experiment, semigroup_via_resolvent, solve_resolvent, solve_resolvent_from,
    ComparisonReport, ResolventOutcome,
};
pub use scheme::{dissipation_bound, numerical_hamiltonian, SchemeParams};

use thiserror::Error;

use crate::hamiltonian::HamiltonianError;
use crate::model::ModelSpec;

#[derive(Debug, Error)]
pub enum HjbError {
    #[error("lambda must be positive, got {0}")]
    BadLambda(f64),
    #[error("time/steps must be positive (t = {t}, steps = {steps})")]
    BadTime { t: f64, steps: usize },
    #[error("grid domain does not match the model's state space")]
    GridModelMismatch,
    #[error("grid functions live on grids with different layouts")]
    GridLayoutMismatch,
    #[error("comparison experiments need at least 2 initializations, got {0}")]
    NeedTwoInits(usize),
    #[error(
        "resolvent iteration did not converge: residual {residual:.3e} after {iterations} sweeps"
    )]
    NotConverged { residual: f64, iterations: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

pub(crate) fn check_grid_model(model: &ModelSpec, grid: &Grid) -> Result<(), HjbError> {
    let ok = match model {
        ModelSpec::Ehrenfest(m) => grid.domain() == Domain::Cube && grid.d() == m.d(),
        ModelSpec::Glauber(m) => grid.domain() == Domain::Simplex && grid.d() == m.d(),
    };
    if ok {
        Ok(())
    } else {
        Err(HjbError::GridModelMismatch)
    }
}
