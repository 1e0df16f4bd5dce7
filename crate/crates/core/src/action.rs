//! The path-space rate functional
//! `I(γ) = I_0(γ(0)) + ∫ L(γ(s), γ̇(s)) ds` on sampled trajectories.
//!
//! Velocities are chord slopes of consecutive samples and the Lagrangian is
//! evaluated at the interval midpoint state (midpoint quadrature). Because
//! `L` is convex in the velocity, chord velocities under-estimate refined
//! costs, so refinement converges stably from below. Any interval with
//! infinite Lagrangian makes the total infinite and is reported with the
//! offending velocity.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::cost::Cost;
use crate::hamiltonian::{self, HamiltonianError};
use crate::model::{GlauberModel, ModelSpec};
use crate::state::{sup_distance, StatePoint};
use crate::trajectory::{PathKind, Trajectory};

/// Tolerance ball around a point-mass initial law.
pub const POINT_MASS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("action needs a piecewise-linear trajectory")]
    NotPiecewiseLinear,
    #[error("action needs at least two samples, got {0}")]
    TooShort(usize),
    #[error("trajectory dimension {traj} does not match model dimension {model}")]
    DimensionMismatch { traj: usize, model: usize },
    #[error("trajectory state kind does not match the model")]
    StateKindMismatch,
    #[error("gibbs initial rate needs a model with a potential")]
    MissingPotential,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Rate function for the initial condition.
#[derive(Clone)]
pub enum InitialRate {
    /// Zero at the given point (within [`POINT_MASS_TOL`] in sup norm),
    /// infinite elsewhere.
    PointMass(StatePoint),
    /// Entropy-plus-potential rate of a Gibbs initial law on the simplex.
    Gibbs(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    /// User-supplied evaluator.
    Custom(Arc<dyn Fn(&StatePoint) -> Cost + Send + Sync>),
}

impl InitialRate {
    pub fn eval(&self, state: &StatePoint) -> Cost {
        match self {
            InitialRate::PointMass(point) => {
                if sup_distance(point.coords(), state.coords()) <= POINT_MASS_TOL {
                    Cost::ZERO
                } else {
                    Cost::Infinite
                }
            }
            InitialRate::Gibbs(f) => Cost::Finite(f(state.coords())),
            InitialRate::Custom(f) => f(state),
        }
    }
}

/// Relative entropy against the uniform measure plus the model potential:
/// `I_0(μ) = Σ_a μ(a) log(d μ(a)) + V(μ)`, with `0 log 0 = 0`.
pub fn gibbs_initial_rate(model: &GlauberModel) -> Result<InitialRate, ActionError> {
    let potential = model.potential().ok_or(ActionError::MissingPotential)?;
    let value = potential.value.clone();
    let d = model.d() as f64;
    Ok(InitialRate::Gibbs(Arc::new(move |mu: &[f64]| {
        relative_entropy_vs_uniform(mu, d) + value(mu)
    })))
}

fn relative_entropy_vs_uniform(mu: &[f64], d: f64) -> f64 {
    mu.iter()
        .map(|&m| if m > 0.0 { m * (d * m).ln() } else { 0.0 })
        .sum()
}

/// Index and chord velocity of the first interval with infinite running
/// cost.
#[derive(Clone, Debug, Serialize)]
pub struct InfiniteInterval {
    pub index: usize,
    pub velocity: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionResult {
    pub total: Cost,
    pub initial_part: Cost,
    /// Per-interval running costs `L(mid_k, v_k) Δt_k`, in order; evaluation
    /// stops at the first infinite interval.
    pub running_part: Vec<f64>,
    pub infinite_interval: Option<InfiniteInterval>,
}

/// Evaluate `I_0(γ(0)) + ∫ L(γ, γ̇) dt` by midpoint quadrature.
pub fn evaluate_action(
    model: &ModelSpec,
    traj: &Trajectory,
    i0: &InitialRate,
) -> Result<ActionResult, ActionError> {
    if traj.kind() != PathKind::PiecewiseLinear {
        return Err(ActionError::NotPiecewiseLinear);
    }
    if traj.len() < 2 {
        return Err(ActionError::TooShort(traj.len()));
    }
    if traj.dim() != model.d() {
        return Err(ActionError::DimensionMismatch { traj: traj.dim(), model: model.d() });
    }
    if !model.accepts(traj.start()) {
        return Err(ActionError::StateKindMismatch);
    }

    let initial_part = i0.eval(traj.start());
    let times = traj.times();
    let states = traj.states();
    let mut running_part = Vec::with_capacity(times.len() - 1);
    let mut infinite_interval = None;

    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        let a = states[k].coords();
        let b = states[k + 1].coords();
        let velocity: Vec<f64> = a.iter().zip(b).map(|(x, y)| (y - x) / dt).collect();
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let mid_state = match model {
            ModelSpec::Ehrenfest(_) => StatePoint::Cube(crate::state::CubePoint::clamped(mid)
                .expect("midpoint of cube states is in the cube")),
            ModelSpec::Glauber(_) => StatePoint::Simplex(
                crate::state::SimplexPoint::projected(mid)
                    .expect("midpoint of simplex states is in the simplex"),
            ),
        };
        let lv = hamiltonian::lagrangian(model, &mid_state, &velocity)?;
        match lv.value {
            Cost::Finite(value) => running_part.push(value * dt),
            Cost::Infinite => {
                infinite_interval = Some(InfiniteInterval { index: k, velocity });
                break;
            }
        }
    }

    let total = if infinite_interval.is_some() {
        Cost::Infinite
    } else {
        initial_part + Cost::Finite(running_part.iter().sum())
    };
    Ok(ActionResult { total, initial_part, running_part, infinite_interval })
}
