//! Numerical toolkit for mean-field Markov jump processes.
//!
//! Two model families are supported:
//!
//! * **Ehrenfest-type** spin flips: the empirical magnetisation lives on the
//!   cube `[-1,1]^d` and moves by `±2/n` steps per coordinate.
//! * **Glauber-type** jumps between `d` states: the empirical distribution
//!   lives on the probability simplex and moves by `(δ_b - δ_a)/n`.
//!
//! On top of the models the crate provides
//!
//! * exact (Gillespie) simulation of the `n`-particle empirical process and
//!   Monte-Carlo estimation of tube probabilities and exponential decay rates,
//! * the limiting Hamiltonians `H(x,p)`, their `p`-gradients, the discrete
//!   generators `H_n`, and Legendre-transform Lagrangians `L(x,v)`,
//! * deterministic integrators for the McKean-Vlasov equation `ẋ = H_p(x,0)`
//!   and for characteristic curves `ẋ = H_p(x,∇g(x))`,
//! * the path action `I(γ) = I_0(γ(0)) + ∫ L(γ,γ̇) dt`,
//! * a monotone finite-difference resolvent solver for
//!   `f - λH(x,∇f) = h`, resolvent-iteration semigroups, and a
//!   dynamic-programming evaluation of the variational semigroup,
//! * Lyapunov monotonicity checks of stationary rate functions along flows.
//!
//! All randomness flows through explicitly seeded ChaCha streams (see
//! [`rng`]), so every computation is reproducible bit-for-bit.

pub mod action;
pub mod cost;
pub mod flow;
pub mod hamiltonian;
pub mod hjb;
pub mod io;
mod linalg;
pub mod lyapunov;
pub mod model;
pub mod rng;
pub mod simulator;
pub mod state;
pub mod trajectory;

pub use cost::Cost;
pub use model::{EhrenfestModel, GlauberModel, ModelConfig, ModelSpec, SmoothFn};
pub use state::{CubePoint, SimplexPoint, StatePoint};
pub use trajectory::{PathKind, Trajectory};
