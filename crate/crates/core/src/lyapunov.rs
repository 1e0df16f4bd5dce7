//! Monotonicity checks of stationary-measure rate functions along the
//! McKean-Vlasov flow.
//!
//! When the invariant measures of the n-particle dynamics satisfy a large
//! deviation principle with rate function `I_0`, that rate function cannot
//! increase along zero-cost trajectories. For Glauber models constructed
//! from a potential the canonical Gibbs rate `I_0(μ) = S(μ|uniform) + V(μ)`
//! is used; for the cube there is no canonical choice and a user evaluator
//! must be supplied.

use serde::Serialize;
use thiserror::Error;

use crate::action::{gibbs_initial_rate, ActionError, InitialRate};
use crate::cost::Cost;
use crate::flow::{integrate_mkv, FlowConfig, FlowError, Method};
use crate::model::{GlauberModel, ModelSpec};
use crate::state::{SimplexPoint, StatePoint};

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error("rate function evaluated to a non-finite value along the flow")]
    NonFiniteRate,
    #[error("the Gibbs Lyapunov check needs a Glauber model")]
    NotGlauber,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// `I_0` sampled along a flow, with the largest forward increase.
#[derive(Debug, Serialize)]
pub struct LyapunovReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max_k (values[k+1] - values[k])⁺`.
    pub max_increase: f64,
    /// Whether `max_increase` is within the tolerance.
    pub monotone: bool,
    pub tolerance: f64,
}

/// Discretization slack for a monotonicity verdict: the analytic statement
/// is exact, so violations must be attributable to the integrator. Scales
/// like the integrator's global error.
pub fn integrator_tolerance(cfg: &FlowConfig, value_scale: f64) -> f64 {
    let order = match cfg.method {
        Method::Rk4 => 4,
        Method::Euler => 1,
    };
    10.0 * (1.0 + value_scale.abs()) * cfg.dt.powi(order)
}

/// Track a user-supplied `I_0` along the McKean-Vlasov flow from `start`.
pub fn lyapunov_check_with(
    model: &ModelSpec,
    i0: &InitialRate,
    start: &StatePoint,
    cfg: &FlowConfig,
    tolerance: f64,
) -> Result<LyapunovReport, LyapunovError> {
    let out = integrate_mkv(model, start, cfg)?;
    let times = out.trajectory.times().to_vec();
    let mut values = Vec::with_capacity(times.len());
    for state in out.trajectory.states() {
        match i0.eval(state) {
            Cost::Finite(v) if v.is_finite() => values.push(v),
            _ => return Err(LyapunovError::NonFiniteRate),
        }
    }
    let max_increase = values
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max);
    Ok(LyapunovReport {
        times,
        values,
        max_increase,
        monotone: max_increase <= tolerance,
        tolerance,
    })
}

/// Track the Gibbs rate `S(μ|uniform) + V(μ)` of a potential-built Glauber
/// model along its own flow.
pub fn lyapunov_check(
    model: &ModelSpec,
    start: &SimplexPoint,
    cfg: &FlowConfig,
    tolerance: f64,
) -> Result<LyapunovReport, LyapunovError> {
    let glauber: &GlauberModel = match model {
        ModelSpec::Glauber(g) => g,
        ModelSpec::Ehrenfest(_) => return Err(LyapunovError::NotGlauber),
    };
    let i0 = gibbs_initial_rate(glauber)?;
    lyapunov_check_with(model, &i0, &StatePoint::Simplex(start.clone()), cfg, tolerance)
}
