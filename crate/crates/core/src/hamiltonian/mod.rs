//! Limiting Hamiltonians, their momentum gradients, the discrete generators
//! `H_n`, and Legendre-transform Lagrangians.
//!
//! For the Ehrenfest family
//! `H(x,p) = Σ_i v_+^i(x)[e^{2p_i} - 1] + v_-^i(x)[e^{-2p_i} - 1]`,
//! and for the Glauber family
//! `H(μ,p) = Σ_{a,b} v(a,b,μ)[e^{p_b - p_a} - 1]`.
//!
//! Both are convex in `p` with `H(x,0) = 0`. The Glauber Hamiltonian only
//! sees momentum differences, so it is invariant under `p ↦ p + c·1`; its
//! gradient is tangent to the simplex (components sum to zero).

mod legendre;

pub use legendre::{lagrangian, lagrangian_1d, LagrangianValue};

use thiserror::Error;

use crate::model::{EhrenfestModel, GlauberModel, ModelSpec};
use crate::state::StatePoint;

/// Tolerance for snapping a state onto the n-particle lattice.
pub const LATTICE_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("state has dimension {state}, model has dimension {model}")]
    DimensionMismatch { state: usize, model: usize },
    #[error("state kind does not match the model's state space")]
    StateKindMismatch,
    #[error("momentum has dimension {p}, model has dimension {model}")]
    MomentumDimension { p: usize, model: usize },
    #[error("velocity has dimension {v}, model has dimension {model}")]
    VelocityDimension { v: usize, model: usize },
    #[error("coordinate {index} = {value} is off the n = {n} lattice")]
    OffLattice { index: usize, value: f64, n: u64 },
    #[error("negative rate argument: {0}")]
    NegativeRate(f64),
    #[error(
        "Legendre maximization did not converge after {iterations} iterations \
         (gradient norm {gradient_norm:.3e})"
    )]
    NonConvergence { iterations: usize, gradient_norm: f64 },
}

fn check_state(model: &ModelSpec, state: &StatePoint) -> Result<(), HamiltonianError> {
    let matches_kind = match model {
        ModelSpec::Ehrenfest(_) => state.is_cube(),
        ModelSpec::Glauber(_) => state.is_simplex(),
    };
    if !matches_kind {
        return Err(HamiltonianError::StateKindMismatch);
    }
    if state.dim() != model.d() {
        return Err(HamiltonianError::DimensionMismatch {
            state: state.dim(),
            model: model.d(),
        });
    }
    Ok(())
}

fn check_momentum(model: &ModelSpec, p: &[f64]) -> Result<(), HamiltonianError> {
    if p.len() != model.d() {
        return Err(HamiltonianError::MomentumDimension {
            p: p.len(),
            model: model.d(),
        });
    }
    Ok(())
}

/// `H(x, p)`.
pub fn value(model: &ModelSpec, state: &StatePoint, p: &[f64]) -> Result<f64, HamiltonianError> {
    check_state(model, state)?;
    check_momentum(model, p)?;
    let z = state.coords();
    Ok(match model {
        ModelSpec::Ehrenfest(m) => ehrenfest_value(m, z, p),
        ModelSpec::Glauber(m) => glauber_value(m, z, p),
    })
}

pub(crate) fn ehrenfest_value(m: &EhrenfestModel, x: &[f64], p: &[f64]) -> f64 {
    let mut h = 0.0;
    for i in 0..m.d() {
        h += m.v_plus(i, x) * ((2.0 * p[i]).exp() - 1.0);
        h += m.v_minus(i, x) * ((-2.0 * p[i]).exp() - 1.0);
    }
    h
}

pub(crate) fn glauber_value(m: &GlauberModel, mu: &[f64], p: &[f64]) -> f64 {
    let mut h = 0.0;
    for a in 0..m.d() {
        for b in 0..m.d() {
            if a == b {
                continue;
            }
            h += m.v(a, b, mu) * ((p[b] - p[a]).exp() - 1.0);
        }
    }
    h
}

/// `H_p(x, p)`, the vector of partial derivatives of `H` in `p`.
///
/// Ehrenfest component `i`: `2 v_+^i e^{2p_i} - 2 v_-^i e^{-2p_i}`.
/// Glauber component `c`: `Σ_a v(a,c,μ) e^{p_c - p_a} - Σ_b v(c,b,μ) e^{p_b - p_c}`;
/// the result sums to zero.
pub fn grad_p(
    model: &ModelSpec,
    state: &StatePoint,
    p: &[f64],
) -> Result<Vec<f64>, HamiltonianError> {
    check_state(model, state)?;
    check_momentum(model, p)?;
    let z = state.coords();
    Ok(match model {
        ModelSpec::Ehrenfest(m) => ehrenfest_grad_p(m, z, p),
        ModelSpec::Glauber(m) => glauber_grad_p(m, z, p),
    })
}

pub(crate) fn ehrenfest_grad_p(m: &EhrenfestModel, x: &[f64], p: &[f64]) -> Vec<f64> {
    (0..m.d())
        .map(|i| {
            2.0 * m.v_plus(i, x) * (2.0 * p[i]).exp() - 2.0 * m.v_minus(i, x) * (-2.0 * p[i]).exp()
        })
        .collect()
}

pub(crate) fn glauber_grad_p(m: &GlauberModel, mu: &[f64], p: &[f64]) -> Vec<f64> {
    let d = m.d();
    let mut g = vec![0.0; d];
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            // Mass flow a -> b raises p_b-dependence and lowers p_a-dependence.
            let w = m.v(a, b, mu) * (p[b] - p[a]).exp();
            g[b] += w;
            g[a] -= w;
        }
    }
    g
}

/// The McKean-Vlasov vector field `F(x) = H_p(x, 0)`.
///
/// Computed directly (the exponentials are 1 at `p = 0`):
/// Ehrenfest `F_i = 2[v_+^i - v_-^i]`, Glauber
/// `F_a = Σ_b [v(b,a,μ) - v(a,b,μ)]`.
pub fn vector_field(model: &ModelSpec, state: &StatePoint) -> Result<Vec<f64>, HamiltonianError> {
    check_state(model, state)?;
    Ok(vector_field_raw(model, state.coords()))
}

/// As [`vector_field`] but on raw coordinates, without domain checks. Used
/// by integrators whose intermediate stages may sit slightly off the state
/// space.
pub fn vector_field_raw(model: &ModelSpec, z: &[f64]) -> Vec<f64> {
    match model {
        ModelSpec::Ehrenfest(m) => (0..m.d())
            .map(|i| 2.0 * (m.v_plus(i, z) - m.v_minus(i, z)))
            .collect(),
        ModelSpec::Glauber(m) => {
            let d = m.d();
            let mut f = vec![0.0; d];
            for a in 0..d {
                for b in 0..d {
                    if a == b {
                        continue;
                    }
                    let w = m.v(a, b, z);
                    f[b] += w;
                    f[a] -= w;
                }
            }
            f
        }
    }
}

/// The discrete generator `H_n f = n^{-1} e^{-nf} A_n e^{nf}` evaluated at a
/// lattice state, using the model's finite-n rates:
///
/// Ehrenfest:
/// `Σ_i (1-x_i)/2 · r_{n,+}^i(x) [e^{n(f(x + 2e_i/n) - f(x))} - 1]
///     + (1+x_i)/2 · r_{n,-}^i(x) [e^{n(f(x - 2e_i/n) - f(x))} - 1]`,
///
/// Glauber:
/// `Σ_{a,b} μ(a) r_n(a,b,μ) [e^{n(f(μ - δ_a/n + δ_b/n) - f(μ))} - 1]`.
///
/// Terms whose jump prefactor vanishes are skipped, so `f` is never
/// evaluated outside the state space. The state must sit on the n-lattice
/// up to [`LATTICE_SNAP_TOL`] per coordinate; it is snapped exactly before
/// evaluation.
pub fn hn_value(
    model: &ModelSpec,
    n: u64,
    f: &dyn Fn(&[f64]) -> f64,
    state: &StatePoint,
) -> Result<f64, HamiltonianError> {
    check_state(model, state)?;
    let nf = n as f64;
    match model {
        ModelSpec::Ehrenfest(m) => {
            let counts = cube_lattice_counts(state.coords(), n)?;
            let x: Vec<f64> = counts.iter().map(|&k| (2.0 * k as f64 - nf) / nf).collect();
            let fx = f(&x);
            let mut h = 0.0;
            for i in 0..m.d() {
                let up_weight = (nf - counts[i] as f64) / nf; // (1 - x_i)/2, exact on the lattice
                if up_weight > 0.0 {
                    let mut shifted = x.clone();
                    shifted[i] = (2.0 * (counts[i] + 1) as f64 - nf) / nf;
                    h += up_weight * m.rn_plus(n, i, &x) * ((nf * (f(&shifted) - fx)).exp() - 1.0);
                }
                let down_weight = counts[i] as f64 / nf; // (1 + x_i)/2
                if down_weight > 0.0 {
                    let mut shifted = x.clone();
                    shifted[i] = (2.0 * (counts[i] - 1) as f64 - nf) / nf;
                    h += down_weight * m.rn_minus(n, i, &x) * ((nf * (f(&shifted) - fx)).exp() - 1.0);
                }
            }
            Ok(h)
        }
        ModelSpec::Glauber(m) => {
            let counts = simplex_lattice_counts(state.coords(), n)?;
            let mu: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
            let fmu = f(&mu);
            let mut h = 0.0;
            for a in 0..m.d() {
                if counts[a] == 0 {
                    continue;
                }
                for b in 0..m.d() {
                    if a == b {
                        continue;
                    }
                    let mut shifted = mu.clone();
                    shifted[a] = (counts[a] - 1) as f64 / nf;
                    shifted[b] = (counts[b] + 1) as f64 / nf;
                    h += mu[a] * m.rn(n, a, b, &mu) * ((nf * (f(&shifted) - fmu)).exp() - 1.0);
                }
            }
            Ok(h)
        }
    }
}

/// Integer lattice counts `k_i` with `x_i = (2k_i - n)/n`, or an error when
/// a coordinate is farther than the snap tolerance from the lattice.
pub fn cube_lattice_counts(x: &[f64], n: u64) -> Result<Vec<u64>, HamiltonianError> {
    let nf = n as f64;
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let k = (xi + 1.0) * nf / 2.0;
            let rounded = k.round();
            if (k - rounded).abs() * 2.0 / nf > LATTICE_SNAP_TOL {
                return Err(HamiltonianError::OffLattice { index: i, value: xi, n });
            }
            Ok(rounded.max(0.0).min(nf) as u64)
        })
        .collect()
}

/// Particle counts `c_a` with `μ_a = c_a/n`; total mass must be exactly n.
pub fn simplex_lattice_counts(mu: &[f64], n: u64) -> Result<Vec<u64>, HamiltonianError> {
    let nf = n as f64;
    let counts: Vec<u64> = mu
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let c = m * nf;
            let rounded = c.round();
            if (c - rounded).abs() / nf > LATTICE_SNAP_TOL {
                return Err(HamiltonianError::OffLattice { index: i, value: m, n });
            }
            Ok(rounded.max(0.0) as u64)
        })
        .collect::<Result<_, _>>()?;
    let total: u64 = counts.iter().sum();
    if total != n {
        return Err(HamiltonianError::OffLattice {
            index: 0,
            value: total as f64 / nf,
            n,
        });
    }
    Ok(counts)
}
