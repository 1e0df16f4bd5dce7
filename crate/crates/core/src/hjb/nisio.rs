//! Dynamic-programming evaluation of the variational semigroup
//! `V(t)f(x) = sup_γ { f(γ(t)) - ∫ L(γ, γ̇) }` over paths started at `x`.
//!
//! Backward induction over Euler slices: one step replaces the value at a
//! node by the best `value(x + Δt v) - Δt L(x, v)` over a finite control
//! set. The controls are the exact drift `F(x)` (whose running cost is
//! zero), standing still, and a symmetric box of velocities around the
//! drift whose half-width is the momentum-box image of `|H_p|`. On the
//! simplex the box is sampled along the edge directions `δ_b - δ_a`, which
//! over many slices composes into arbitrary tangent moves.

use rayon::prelude::*;

use crate::cost::Cost;
use crate::hamiltonian::{self, lagrangian};
use crate::model::ModelSpec;
use crate::state::StatePoint;

use super::grid::{Domain, GridFunction};
use super::scheme::{dissipation_bound, SchemeParams};
use super::{check_grid_model, HjbError};

/// `V(t) f0` on the grid of `f0` by backward dynamic programming with
/// `time_steps` Euler slices and `2·velocity_samples + 1` velocities per
/// sampled direction.
pub fn nisio_value_dp(
    model: &ModelSpec,
    f0: &GridFunction,
    t: f64,
    time_steps: usize,
    velocity_samples: usize,
    params: &SchemeParams,
) -> Result<GridFunction, HjbError> {
    if !(t > 0.0) || time_steps == 0 {
        return Err(HjbError::BadTime { t, steps: time_steps });
    }
    let grid = f0.grid();
    check_grid_model(model, grid)?;
    let dt = t / time_steps as f64;
    let k = velocity_samples as i64;

    // Per-node data that does not change across slices.
    let states: Vec<StatePoint> = grid
        .nodes()
        .iter()
        .map(|z| match grid.domain() {
            Domain::Cube => StatePoint::cube(z.clone()).expect("grid node in cube"),
            Domain::Simplex => StatePoint::simplex(z.clone()).expect("grid node in simplex"),
        })
        .collect();
    let drifts: Vec<Vec<f64>> = states
        .iter()
        .map(|s| hamiltonian::vector_field(model, s).expect("grid node accepted by model"))
        .collect();
    let stay_costs: Vec<f64> = states
        .iter()
        .map(|s|

            match lagrangian(model, s, &vec![0.0; grid.d()]) {
                Ok(lv) => match lv.value {
                    Cost::Finite(c) => c,
                    Cost::Infinite => f64::INFINITY,
                },
                Err(_) => f64::INFINITY,
            })
        .collect();
    let widths: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|z| dissipation_bound(model, z, params))
        .collect();

    let mut values = f0.values().to_vec();
    for _ in 0..time_steps {
        let next: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|node| {
                let state = &states[node];
                let x = grid.node(node);
                let drift = &drifts[node];
                let mut best = f64::NEG_INFINITY;

                // Standing still: no interpolation error by construction.
                if stay_costs[node].is_finite() {
                    best = best.max(values[node] - dt * stay_costs[node]);
                }
                // Exact drift: zero running cost.
                if let Some(v) = offset_value(grid, &values, x, drift, dt) {
                    best = best.max(v);
                }
                // Velocity box around the drift.
                let w = widths[node];
                match grid.domain() {
                    Domain::Cube => {
                        let d = grid.d();
                        let mut counter = vec![-k; d];
                        loop {
                            let velocity: Vec<f64> = (0..d)
                                .map(|j| drift[j] + w * counter[j] as f64 / k.max(1) as f64)
                                .collect();
                            if let Some(v) =
                                candidate_value(model, grid, &values, state, x, &velocity, dt)
                            {
                                best = best.max(v);
                            }
                            // Mixed-radix increment over the velocity box.
                            let mut j = 0;
                            loop {
                                if j == d {
                                    break;
                                }
                                counter[j] += 1;
                                if counter[j] <= k {
                                    break;
                                }
                                counter[j] = -k;
                                j += 1;
                            }
                            if j == d {
                                break;
                            }
                        }
                    }
                    Domain::Simplex => {
                        let d = grid.d();
                        for a in 0..d {
                            for b in (a + 1)..d {
                                for l in -k..=k {
                                    if l == 0 {
                                        continue; // the drift itself
                                    }
                                    let s = w * l as f64 / k.max(1) as f64;
                                    let mut velocity = drift.clone();
                                    velocity[a] -= s;
                                    velocity[b] += s;
                                    if let Some(v) = candidate_value(
                                        model, grid, &values, state, x, &velocity, dt,
                                    ) {
                                        best = best.max(v);
                                    }
                                }
                            }
                        }
                    }
                }
                best
            })
            .collect();
        values = next;
    }
    Ok(GridFunction::new(grid.clone(), values)?)
}

/// Interpolated continuation value after moving with `velocity` for `dt`,
/// or `None` when the move leaves the state space.
fn offset_value(
    grid: &super::grid::Grid,
    values: &[f64],
    x: &[f64],
    velocity: &[f64],
    dt: f64,
) -> Option<f64> {
    let target: Vec<f64> = x.iter().zip(velocity).map(|(a, v)| a + dt * v).collect();
    match grid.domain() {
        Domain::Cube => {
            if target.iter().any(|&c| !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&c)) {
                return None;
            }
        }
        Domain::Simplex => {
            if target.iter().any(|&c| c < -1e-12) {
                return None;
            }
        }
    }
    grid.interpolate(values, &target).ok()
}

fn candidate_value(
    model: &ModelSpec,
    grid: &super::grid::Grid,
    values: &[f64],
    state: &StatePoint,
    x: &[f64],
    velocity: &[f64],
    dt: f64,
) -> Option<f64> {
    let continuation = offset_value(grid, values, x, velocity, dt)?;
    let cost = lagrangian(model, state, velocity).ok()?;
    match cost.value {
        Cost::Finite(c) => Some(continuation - dt * c),
        Cost::Infinite => None,
    }
}
