//! Resolvent equation `f - λ H(x, ∇f) = h` in the viscosity sense, solved
//! by damped fixed-point iteration on the monotone scheme, plus the
//! resolvent-iteration semigroup and empirical comparison experiments.

use rayon::prelude::*;
use serde::Serialize;

use crate::model::ModelSpec;

use super::grid::{Grid, GridFunction};
use super::scheme::{dissipation_bound, numerical_hamiltonian_raw, SchemeParams};
use super::{check_grid_model, HjbError};

/// Converged resolvent solve.
pub struct ResolventOutcome {
    pub f: GridFunction,
    /// Final sup-norm residual of `f - h - λ Ĥ(f)`.
    pub residual: f64,
    /// Fixed-point sweeps performed.
    pub iterations: usize,
}

fn apply_map(
    model: &ModelSpec,
    grid: &Grid,
    lambda: f64,
    h: &[f64],
    f: &[f64],
    params: &SchemeParams,
) -> Vec<f64> {
    (0..grid.len())
        .into_par_iter()
        .map(|node| h[node] + lambda * numerical_hamiltonian_raw(model, grid, f, node, params))
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solve `f = h + λ Ĥ(f)` starting the iteration from `h` itself.
pub fn solve_resolvent(
    model: &ModelSpec,
    lambda: f64,
    h: &GridFunction,
    params: &SchemeParams,
) -> Result<ResolventOutcome, HjbError> {
    solve_resolvent_from(model, lambda, h, h, params)
}

/// Solve `f = h + λ Ĥ(f)` from a caller-chosen initial iterate.
///
/// The damped update `f ← (1-ω) f + ω (h + λ Ĥ(f))` is accepted only when
/// it does not increase the residual; otherwise ω is halved and the step
/// retried. Divergence of the iteration is therefore impossible; a
/// too-small ω floor or an exhausted iteration budget is reported as
/// [`HjbError::NotConverged`] with the residual reached.
pub fn solve_resolvent_from(
    model: &ModelSpec,
    lambda: f64,
    h: &GridFunction,
    init: &GridFunction,
    params: &SchemeParams,
) -> Result<ResolventOutcome, HjbError> {
    if !(lambda > 0.0) {
        return Err(HjbError::BadLambda(lambda));
    }
    let grid = h.grid();
    check_grid_model(model, grid)?;
    if init.grid().len() != grid.len() {
        return Err(HjbError::GridLayoutMismatch);
    }

    let hv = h.values();
    let mut f = init.values().to_vec();
    let mut tf = apply_map(model, grid, lambda, hv, &f, params);
    let mut residual = sup_diff(&tf, &f);
    let mut omega = params.omega;
    let mut iterations = 0usize;

    // Damping at which the sweep is provably a contraction: the map
    // T = h + λĤ has nonnegative off-diagonal Jacobian entries and zero
    // row sums (the scheme only sees differences), so its spectrum lies in
    // [-2D, 0] with D the largest diagonal magnitude. Below ω* = 1/(1+2D)
    // steps are accepted unconditionally; above it the residual must not
    // increase, otherwise ω is halved.
    let d = grid.d() as f64;
    let couplings = match grid.domain() {
        super::grid::Domain::Cube => d,
        super::grid::Domain::Simplex => d * (d - 1.0) / 2.0 + d,
    };
    let diag_bound = grid
        .nodes()
        .iter()
        .map(|z| lambda * dissipation_bound(model, z, params) * couplings / grid.h())
        .fold(0.0f64, f64::max);
    let omega_stable = 1.0 / (1.0 + 2.0 * diag_bound);

    while residual > params.tol && iterations < params.max_iters {
        let candidate: Vec<f64> = f
            .iter()
            .zip(&tf)
            .map(|(fi, ti)| (1.0 - omega) * fi + omega * ti)
            .collect();
        let tcand = apply_map(model, grid, lambda, hv, &candidate, params);
        let cand_residual = sup_diff(&tcand, &candidate);
        iterations += 1;
        if omega <= omega_stable || cand_residual <= residual {
            f = candidate;
            tf = tcand;
            residual = cand_residual;
            // Creep back up after accepted steps so one early rejection
            // does not pin the damping far below what the data allows.
            omega = (omega * 1.02).min(params.omega);
        } else {
            omega = (omega * 0.5).max(omega_stable);
        }
    }
    if residual > params.tol {
        return Err(HjbError::NotConverged { residual, iterations });
    }
    Ok(ResolventOutcome {
        f: GridFunction::new(grid.clone(), f)?,
        residual,
        iterations,
    })
}

/// `V(t) f0` by iterating the resolvent: `m` solves with `λ = t/m`, feeding
/// each solution back as the next inhomogeneity.
pub fn semigroup_via_resolvent(
    model: &ModelSpec,
    f0: &GridFunction,
    t: f64,
    steps: usize,
    params: &SchemeParams,
) -> Result<GridFunction, HjbError> {
    if !(t > 0.0) || steps == 0 {
        return Err(HjbError::BadTime { t, steps });
    }
    let lambda = t / steps as f64;
    let mut current = f0.clone();
    for _ in 0..steps {
        current = solve_resolvent(model, lambda, &current, params)?.f;
    }
    Ok(current)
}

/// Empirical uniqueness experiment: solve the same resolvent equation from
/// several initializations at several resolutions and report how far the
/// solutions spread.
#[derive(Debug, Serialize)]
pub struct ComparisonReport {
    pub resolutions: Vec<usize>,
    /// Max pairwise sup-difference between solutions at each resolution.
    pub max_pairwise_diff: Vec<f64>,
    /// Residual tolerance used per resolution (`min(params.tol, h²·1e-4)`,
    /// so each grid is solved to its own discretization scale).
    pub tolerances: Vec<f64>,
    /// Whether the spread shrinks monotonically with refinement.
    pub decreasing: bool,
}

type ScalarFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Run the comparison experiment for `h` and the given initializations
/// (both supplied as evaluators so every resolution can sample them).
pub fn comparison_experiment(
    model: &ModelSpec,
    lambda: f64,
    h_fn: ScalarFn,
    resolutions: &[usize],
    inits: &[ScalarFn],
    params: &SchemeParams,
) -> Result<ComparisonReport, HjbError> {
    if inits.len() < 2 {
        return Err(HjbError::NeedTwoInits(inits.len()));
    }
    if resolutions.is_empty() {
        return Err(HjbError::BadTime { t: 0.0, steps: 0 });
    }
    let mut max_pairwise_diff = Vec::with_capacity(resolutions.len());
    let mut tolerances = Vec::with_capacity(resolutions.len());
    for &m in resolutions {
        let grid = match model {
            ModelSpec::Ehrenfest(em) => Grid::cube(em.d(), m)?,
            ModelSpec::Glauber(gm) => Grid::simplex(gm.d(), m)?,
        };
        let tol = params.tol.max(1e-4 * grid.h() * grid.h());
        let local = SchemeParams { tol, ..*params };
        let h = GridFunction::from_fn(&grid, h_fn)?;
        let mut solutions = Vec::with_capacity(inits.len());
        for init_fn in inits {
            let init = GridFunction::from_fn(&grid, init_fn)?;
            solutions.push(solve_resolvent_from(model, lambda, &h, &init, &local)?.f);
        }
        let mut spread: f64 = 0.0;
        for i in 0..solutions.len() {
            for j in 0..i {
                spread = spread.max(solutions[i].sup_diff(&solutions[j]));
            }
        }
        max_pairwise_diff.push(spread);
        tolerances.push(tol);
    }
    let decreasing = max_pairwise_diff.windows(2).all(|w| w[1] < w[0]);
    Ok(ComparisonReport {
        resolutions: resolutions.to_vec(),
        max_pairwise_diff,
        tolerances,
        decreasing,
    })
}
