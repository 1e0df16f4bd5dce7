//! Monotone Lax-Friedrichs discretization of `H(x, ∇f(x))` on a grid.
//!
//! At interior nodes the momentum is the central difference and artificial
//! dissipation `σ(x)/2 · Σ_e (D⁺_e f - D⁻_e f)` is added, with
//! `σ(x)` an upper bound for the momentum-gradient of `H` over a bounded
//! momentum box. One-sided differences (and no dissipation) are used along
//! directions where a neighbor is missing; there the outward rate vanishes
//! by tangency, which makes the one-sided choice the upwind one.
//!
//! With `σ` dominating `|H_p|` over the gradients present in the data, the
//! scheme value is nondecreasing in every neighbor value, which is the
//! monotonicity that yields order preservation and nonexpansiveness of the
//! resolvent iteration built on top of it.
//!
//! On the simplex, differences are taken along edge directions
//! `(δ_b - δ_a)/√2` and the momentum is reconstructed from the available
//! edge slopes by least squares under the gauge `Σp = 0`.

use crate::hamiltonian;
use crate::linalg;
use crate::model::ModelSpec;

use super::grid::{Domain, Grid, GridFunction};

/// Numerical parameters of the Hamilton-Jacobi solver.
#[derive(Clone, Copy, Debug)]
pub struct SchemeParams {
    /// Hard cap on momenta the scheme accounts for. Moves beyond it are
    /// super-exponentially suppressed.
    pub p_max: f64,
    /// Momentum scale of the dissipation box, `min`-ed with `p_max`. The
    /// dissipation coefficient grows like `e^{2·p_diss}`, so this directly
    /// trades monotonicity margin against accuracy.
    pub p_diss: f64,
    /// Initial damping of the resolvent fixed-point iteration.
    pub omega: f64,
    /// Residual stopping tolerance of the resolvent iteration.
    pub tol: f64,
    /// Iteration budget of the resolvent iteration.
    pub max_iters: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            p_max: 8.0,
            p_diss: 2.0,
            omega: 0.5,
            tol: 1e-10,
            max_iters: 100_000,
        }
    }
}

impl SchemeParams {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_p_diss(mut self, p_diss: f64) -> Self {
        self.p_diss = p_diss;
        self
    }

    fn momentum_box(&self) -> f64 {
        self.p_diss.min(self.p_max)
    }
}

/// Upper bound for `max_i |∂H/∂p_i(z, p)|` over the momentum box, from the
/// rate magnitudes at `z`. For the simplex an extra `2√d` accounts for the
/// least-squares gradient reconstruction.
pub fn dissipation_bound(model: &ModelSpec, z: &[f64], params: &SchemeParams) -> f64 {
    let boost = (2.0 * params.momentum_box()).exp();
    match model {
        ModelSpec::Ehrenfest(m) => {
            let mut worst: f64 = 0.0;
            for i in 0..m.d() {
                worst = worst.max(m.v_plus(i, z) + m.v_minus(i, z));
            }
            2.0 * worst * boost
        }
        ModelSpec::Glauber(m) => {
            let mut total = 0.0;
            for a in 0..m.d() {
                for b in 0..m.d() {
                    if a != b {
                        total += m.v(a, b, z);
                    }
                }
            }
            4.0 * (m.d() as f64).sqrt() * total * boost
        }
    }
}

/// Monotone scheme value approximating `H(x, ∇f(x))` at one node.
pub fn numerical_hamiltonian(
    model: &ModelSpec,
    f: &GridFunction,
    node: usize,
    params: &SchemeParams,
) -> f64 {
    numerical_hamiltonian_raw(model, f.grid(), f.values(), node, params)
}

/// As [`numerical_hamiltonian`], on a raw value slice (used by the solver
/// sweeps to avoid re-wrapping the iterate).
pub(crate) fn numerical_hamiltonian_raw(
    model: &ModelSpec,
    grid: &Grid,
    values: &[f64],
    node: usize,
    params: &SchemeParams,
) -> f64 {
    let z = grid.node(node);
    let sigma = dissipation_bound(model, z, params);
    match grid.domain() {
        Domain::Cube => cube_scheme(model, grid, values, node, sigma),
        Domain::Simplex => simplex_scheme(model, grid, values, node, sigma),
    }
}

fn cube_scheme(model: &ModelSpec, grid: &Grid, values: &[f64], node: usize, sigma: f64) -> f64 {
    let d = grid.d();
    let h = grid.h();
    let f0 = values[node];
    let mut momentum = vec![0.0; d];
    let mut dissipation = 0.0;
    for axis in 0..d {
        let plus = grid.cube_neighbor(node, axis, 1);
        let minus = grid.cube_neighbor(node, axis, -1);
        momentum[axis] = match (minus, plus) {
            (Some(lo), Some(hi)) => {
                dissipation += (values[hi] - 2.0 * f0 + values[lo]) / h;
                (values[hi] - values[lo]) / (2.0 * h)
            }
            (None, Some(hi)) => (values[hi] - f0) / h,
            (Some(lo), None) => (f0 - values[lo]) / h,
            (None, None) => 0.0,
        };
    }
    let m = match model {
        ModelSpec::Ehrenfest(m) => m,
        ModelSpec::Glauber(_) => unreachable!("cube grid paired with Glauber model"),
    };
    hamiltonian::ehrenfest_value(m, z_of(grid, node), &momentum)
        + 0.5 * sigma * dissipation
}

fn simplex_scheme(model: &ModelSpec, grid: &Grid, values: &[f64], node: usize, sigma: f64) -> f64 {
    let d = grid.d();
    let h = grid.h(); // edge length sqrt(2)/m
    let f0 = values[node];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    // Least-squares reconstruction of the gauge-fixed momentum from edge
    // slopes: rows (δ_b - δ_a)/√2 · p = g_e.
    let mut normal = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut dissipation = 0.0;
    for a in 0..d {
        for b in (a + 1)..d {
            let plus = grid.simplex_neighbor(node, a, b); // k - e_a + e_b
            let minus = grid.simplex_neighbor(node, b, a); // k - e_b + e_a
            let slope = match (minus, plus) {
                (Some(lo), Some(hi)) => {
                    dissipation += (values[hi] - 2.0 * f0 + values[lo]) / h;
                    (values[hi] - values[lo]) / (2.0 * h)
                }
                (None, Some(hi)) => (values[hi] - f0) / h,
                (Some(lo), None) => (f0 - values[lo]) / h,
                (None, None) => continue,
            };
            // Row q: q_a = -1/√2, q_b = +1/√2.
            normal[a * d + a] += 0.5;
            normal[b * d + b] += 0.5;
            normal[a * d + b] -= 0.5;
            normal[b * d + a] -= 0.5;
            rhs[a] -= inv_sqrt2 * slope;
            rhs[b] += inv_sqrt2 * slope;
        }
    }
    // Gauge term pins the flat all-ones direction.
    let gauge = 1.0 / d as f64;
    for a in 0..d {
        for b in 0..d {
            normal[a * d + b] += gauge;
        }
    }
    let momentum = linalg::solve(normal, rhs).expect("gauged normal equations are nonsingular");
    let m = match model {
        ModelSpec::Glauber(m) => m,
        ModelSpec::Ehrenfest(_) => unreachable!("simplex grid paired with Ehrenfest model"),
    };
    hamiltonian::glauber_value(m, z_of(grid, node), &momentum) + 0.5 * sigma * dissipation
}

fn z_of(grid: &Grid, node: usize) -> &[f64] {
    grid.node(node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EhrenfestModel, GlauberModel, SmoothFn};
    use rand::Rng;

    fn sqrt_model() -> ModelSpec {
        ModelSpec::Ehrenfest(EhrenfestModel::sqrt_diverging())
    }

    fn glauber(d: usize) -> ModelSpec {
        ModelSpec::Glauber(
            GlauberModel::from_potential(vec![vec![1.0; d]; d], SmoothFn::quadratic()).unwrap(),
        )
    }

    #[test]
    fn constant_functions_give_zero() {
        let params = SchemeParams::default();
        let model = sqrt_model();
        let grid = Grid::cube(1, 17).unwrap();
        let f = GridFunction::constant(&grid, 2.5).unwrap();
        for node in 0..grid.len() {
            assert_eq!(numerical_hamiltonian(&model, &f, node, &params), 0.0);
        }
        let model = glauber(3);
        let grid = Grid::simplex(3, 6).unwrap();
        let f = GridFunction::constant(&grid, -1.0).unwrap();
        for node in 0..grid.len() {
            let v = numerical_hamiltonian(&model, &f, node, &params);
            assert!(v.abs() < 1e-12, "node {node}: {v}");
        }
    }

    #[test]
    fn linear_functions_reproduce_h_exactly_at_interior_nodes() {
        let params = SchemeParams::default();
        let model = sqrt_model();
        let grid = Grid::cube(1, 33).unwrap();
        let p = 0.6;
        let f = GridFunction::from_fn(&grid, |z| p * z[0]).unwrap();
        for node in 1..grid.len() - 1 {
            let x = crate::state::StatePoint::cube(grid.node(node).to_vec()).unwrap();
            let exact = hamiltonian::value(&model, &x, &[p]).unwrap();
            let scheme = numerical_hamiltonian(&model, &f, node, &params);
            // Central difference of a linear f is exact and dissipation vanishes.
            assert!(
                (scheme - exact).abs() < 1e-10,
                "node {node}: {scheme} vs {exact}"
            );
        }
    }

    #[test]
    fn simplex_gradient_reconstruction_is_linear_exact() {
        let params = SchemeParams::default();
        let model = glauber(3);
        let grid = Grid::simplex(3, 8).unwrap();
        // Gauge-fixed linear momentum.
        let p = [0.4, -0.1, -0.3];
        let f = GridFunction::from_fn(&grid, |z| {
            z.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>()
        })
        .unwrap();
        for node in 0..grid.len() {
            // Interior nodes only: all six neighbors present.
            let interior = (0..3).all(|a| {
                (0..3).all(|b| a == b || grid.simplex_neighbor(node, a, b).is_some())
            });
            if !interior {
                continue;
            }
            let mu = crate::state::StatePoint::simplex(grid.node(node).to_vec()).unwrap();
            let exact = hamiltonian::value(&model, &mu, &p).unwrap();
            let scheme = numerical_hamiltonian(&model, &f, node, &params);
            assert!(
                (scheme - exact).abs() < 1e-10,
                "node {node}: {scheme} vs {exact}"
            );
        }
    }

    /// Raising any single neighbor value never decreases the scheme value
    /// (monotonicity), for perturbations compatible with the momentum box.
    #[test]
    fn monotone_in_neighbor_values() {
        let params = SchemeParams::default();
        let mut rng = crate::rng::root_rng(77);

        let model = sqrt_model();
        let grid = Grid::cube(1, 21).unwrap();
        let base = GridFunction::from_fn(&grid, |z| 0.4 * (2.1 * z[0]).sin()).unwrap();
        for _ in 0..100 {
            let node = rng.gen_range(0..grid.len());
            let neighbor = if rng.gen_bool(0.5) {
                grid.cube_neighbor(node, 0, 1)
            } else {
                grid.cube_neighbor(node, 0, -1)
            };
            let Some(neighbor) = neighbor else { continue };
            let bump = rng.gen_range(0.0..0.5 * grid.h());
            let mut perturbed = base.values().to_vec();
            perturbed[neighbor] += bump;
            let fp = GridFunction::new(grid.clone(), perturbed).unwrap();
            let before = numerical_hamiltonian(&model, &base, node, &params);
            let after = numerical_hamiltonian(&model, &fp, node, &params);
            assert!(
                after >= before - 1e-12,
                "raising a neighbor decreased the scheme: {before} -> {after}"
            );
        }

        let model = glauber(3);
        let grid = Grid::simplex(3, 10).unwrap();
        let base =
            GridFunction::from_fn(&grid, |z| 0.3 * (z[0] - z[2]) * (z[0] - z[2]) + 0.2 * z[1])
                .unwrap();
        for _ in 0..100 {
            let node = rng.gen_range(0..grid.len());
            let a = rng.gen_range(0..3);
            let b = (a + rng.gen_range(1..3)) % 3;
            let Some(neighbor) = grid.simplex_neighbor(node, a, b) else { continue };
            let bump = rng.gen_range(0.0..0.5 * grid.h());
            let mut perturbed = base.values().to_vec();
            perturbed[neighbor] += bump;
            let fp = GridFunction::new(grid.clone(), perturbed).unwrap();
            let before = numerical_hamiltonian(&model, &base, node, &params);
            let after = numerical_hamiltonian(&model, &fp, node, &params);
            assert!(
                after >= before - 1e-12,
                "simplex monotonicity violated at node {node}: {before} -> {after}"
            );
        }
    }

    #[test]
    fn scheme_error_shrinks_linearly_for_smooth_f() {
        // First-order consistency: for smooth f the sup error is O(h)·(1+σ).
        let model = sqrt_model();
        let params = SchemeParams::default();
        let sup_err = |m: usize| -> f64 {
            let grid = Grid::cube(1, m).unwrap();
            let f = GridFunction::from_fn(&grid, |z| 0.3 * z[0] * z[0]).unwrap();
            let mut worst: f64 = 0.0;
            for node in 1..grid.len() - 1 {
                let z = grid.node(node).to_vec();
                let x = crate::state::StatePoint::cube(z.clone()).unwrap();
                let exact = hamiltonian::value(&model, &x, &[0.6 * z[0]]).unwrap();
                let scheme = numerical_hamiltonian(&model, &f, node, &params);
                worst = worst.max((scheme - exact).abs());
            }
            worst
        };
        let coarse = sup_err(65);
        let fine = sup_err(129);
        let ratio = coarse / fine;
        assert!(
            ratio > 1.5 && ratio < 2.6,
            "expected ~linear decay, got ratio {ratio} ({coarse} -> {fine})"
        );
    }
}
