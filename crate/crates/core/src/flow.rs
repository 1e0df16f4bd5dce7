//! Deterministic integrators: the McKean-Vlasov flow `ẋ = F(x) = H_p(x,0)`
//! and characteristic curves `ẋ = H_p(x, ∇g(x))`.
//!
//! Fixed-step explicit integration (RK4 or Euler). The limiting vector
//! fields are tangent at the boundary, but floating-point steps can still
//! poke out of the state space; with boundary projection enabled every
//! accepted step is projected back (cube: clamp; simplex: clamp negatives
//! and renormalise) and the largest projection distance is reported.

use thiserror::Error;

use crate::hamiltonian::{self, HamiltonianError};
use crate::model::{ModelSpec, SmoothFn};
use crate::state::{sup_distance, StateError, StatePoint};
use crate::trajectory::{PathKind, Trajectory, TrajectoryError};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("dt must satisfy 0 < dt <= horizon (dt = {dt}, horizon = {horizon})")]
    BadStep { dt: f64, horizon: f64 },
    #[error("vector field produced a non-finite value at t = {t}, state {state:?}")]
    NonFinite { t: f64, state: Vec<f64> },
    #[error("model is not the branching (non-unique) example")]
    NotNonUnique,
    #[error("branch time must be nonnegative, got {0}")]
    NegativeBranchTime(f64),
    #[error("closed-form branch leaves the state space before the horizon")]
    BranchLeavesDomain,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

#[derive(Clone, Copy, Debug)]
pub struct FlowConfig {
    pub dt: f64,
    pub horizon: f64,
    pub method: Method,
    pub boundary_projection: bool,
}

impl FlowConfig {
    pub fn new(dt: f64, horizon: f64, method: Method) -> Result<Self, FlowError> {
        if !(dt > 0.0 && horizon > 0.0 && dt <= horizon) {
            return Err(FlowError::BadStep { dt, horizon });
        }
        Ok(FlowConfig { dt, horizon, method, boundary_projection: true })
    }

    pub fn without_projection(mut self) -> Self {
        self.boundary_projection = false;
        self
    }
}

/// Integration result: the sampled path plus the largest per-step boundary
/// projection distance (0 when projection never fired).
pub struct FlowOutcome {
    pub trajectory: Trajectory,
    pub max_projection: f64,
}

/// Integrate the McKean-Vlasov equation `ẋ = F(x)` from `start`.
pub fn integrate_mkv(
    model: &ModelSpec,
    start: &StatePoint,
    cfg: &FlowConfig,
) -> Result<FlowOutcome, FlowError> {
    hamiltonian::vector_field(model, start)?; // validates kind and dimension
    let field = |z: &[f64]| hamiltonian::vector_field_raw(model, z);
    integrate_field(&field, model, start, cfg)
}

/// Integrate the characteristic equation `ẋ = H_p(x, ∇g(x))`.
pub fn integrate_characteristics(
    model: &ModelSpec,
    g: &SmoothFn,
    start: &StatePoint,
    cfg: &FlowConfig,
) -> Result<FlowOutcome, FlowError> {
    hamiltonian::vector_field(model, start)?;
    let field = |z: &[f64]| match model {
        ModelSpec::Ehrenfest(m) => hamiltonian::ehrenfest_grad_p(m, z, &(g.grad)(z)),
        ModelSpec::Glauber(m) => hamiltonian::glauber_grad_p(m, z, &(g.grad)(z)),
    };
    integrate_field(&field, model, start, cfg)
}

/// The explicit zero-cost branch family of the non-unique model:
/// `γ_a(t) = 0` for `t ≤ a` and `(t-a)²` for `t ≥ a`, sampled on the step
/// grid. No integration is performed.
pub fn branch_solution(
    model: &ModelSpec,
    a: f64,
    cfg: &FlowConfig,
) -> Result<Trajectory, FlowError> {
    match model {
        ModelSpec::Ehrenfest(m) if m.nonunique_radius().is_some() => {}
        _ => return Err(FlowError::NotNonUnique),
    }
    if a < 0.0 {
        return Err(FlowError::NegativeBranchTime(a));
    }
    if cfg.horizon > a && (cfg.horizon - a) * (cfg.horizon - a) > 1.0 {
        return Err(FlowError::BranchLeavesDomain);
    }
    let grid = time_grid(cfg);
    let mut states = Vec::with_capacity(grid.len());
    for &t in &grid {
        let x = if t <= a { 0.0 } else { (t - a) * (t - a) };
        states.push(StatePoint::cube(vec![x])?);
    }
    Ok(Trajectory::new(grid, states, PathKind::PiecewiseLinear)?)
}

fn time_grid(cfg: &FlowConfig) -> Vec<f64> {
    let mut grid = vec![0.0];
    let mut t = 0.0;
    while t < cfg.horizon - 1e-12 {
        t = (t + cfg.dt).min(cfg.horizon);
        grid.push(t);
    }
    grid
}

fn integrate_field(
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    model: &ModelSpec,
    start: &StatePoint,
    cfg: &FlowConfig,
) -> Result<FlowOutcome, FlowError> {
    let grid = time_grid(cfg);
    let mut z = start.coords().to_vec();
    let mut states = Vec::with_capacity(grid.len());
    states.push(start.clone());
    let mut max_projection: f64 = 0.0;

    for step in 1..grid.len() {
        let h = grid[step] - grid[step - 1];
        let next = match cfg.method {
            Method::Euler => {
                let k1 = eval_field(field, model, &z, cfg)?;
                add_scaled(&z, &[(&k1, h)])
            }
            Method::Rk4 => {
                let k1 = eval_field(field, model, &z, cfg)?;
                let z2 = add_scaled(&z, &[(&k1, 0.5 * h)]);
                let k2 = eval_field(field, model, &z2, cfg)?;
                let z3 = add_scaled(&z, &[(&k2, 0.5 * h)]);
                let k3 = eval_field(field, model, &z3, cfg)?;
                let z4 = add_scaled(&z, &[(&k3, h)]);
                let k4 = eval_field(field, model, &z4, cfg)?;
                add_scaled(
                    &z,
                    &[
                        (&k1, h / 6.0),
                        (&k2, h / 3.0),
                        (&k3, h / 3.0),
                        (&k4, h / 6.0),
                    ],
                )
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::NonFinite { t: grid[step], state: next });
        }
        let state = if cfg.boundary_projection {
            let projected = project(model, &next)?;
            max_projection = max_projection.max(sup_distance(projected.coords(), &next));
            projected
        } else {
            to_state(model, next)?
        };
        z = state.coords().to_vec();
        states.push(state);
    }

    Ok(FlowOutcome {
        trajectory: Trajectory::new(grid, states, PathKind::PiecewiseLinear)?,
        max_projection,
    })
}

fn eval_field(
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    model: &ModelSpec,
    z: &[f64],
    cfg: &FlowConfig,
) -> Result<Vec<f64>, FlowError> {
    // Intermediate stages may sit slightly outside the state space; with
    // projection enabled, evaluate the field on the projected point.
    let v = if cfg.boundary_projection {
        field(project(model, z)?.coords())
    } else {
        field(z)
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(FlowError::NonFinite { t: f64::NAN, state: z.to_vec() });
    }
    Ok(v)
}

fn add_scaled(base: &[f64], terms: &[(&Vec<f64>, f64)]) -> Vec<f64> {
    let mut out = base.to_vec();
    for (vec, scale) in terms {
        for (o, v) in out.iter_mut().zip(vec.iter()) {
            *o += scale * v;
        }
    }
    out
}

fn project(model: &ModelSpec, z: &[f64]) -> Result<StatePoint, FlowError> {
    Ok(match model {
        ModelSpec::Ehrenfest(_) => StatePoint::Cube(crate::state::CubePoint::clamped(z.to_vec())?),
        ModelSpec::Glauber(_) => {
            StatePoint::Simplex(crate::state::SimplexPoint::projected(z.to_vec())?)
        }
    })
}

fn to_state(model: &ModelSpec, z: Vec<f64>) -> Result<StatePoint, FlowError> {
    Ok(match model {
        ModelSpec::Ehrenfest(_) => StatePoint::cube(z)?,
        ModelSpec::Glauber(_) => StatePoint::simplex(z)?,
    })
}
