//! Exact continuous-time simulation of the n-particle empirical processes
//! and Monte-Carlo estimation of path-tube probabilities.
//!
//! The simulator works on integer particle counts (`k_i` up-spins per
//! coordinate on the cube, occupation numbers on the simplex) and derives
//! the empirical state exactly from them, so simulated paths sit on the
//! n-lattice with no floating-point drift. Waiting times are exponential in
//! the total jump rate of the generator at the current state; the jump
//! channel is drawn proportionally to its rate (Gillespie's direct method).
//!
//! Replicas of an ensemble own private RNG streams derived from
//! `(seed, replica index)` and are merged in replica order, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::action::{evaluate_action, ActionError, InitialRate};
use crate::cost::Cost;
use crate::hamiltonian::{cube_lattice_counts, simplex_lattice_counts, HamiltonianError};
use crate::model::{EhrenfestModel, GlauberModel, ModelSpec};
use crate::rng::{exp_waiting_time, replica_rng};
use crate::state::{sup_distance, StatePoint};
use crate::trajectory::{PathKind, Trajectory, TrajectoryError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("tube radius must be positive, got {0}")]
    BadDelta(f64),
    #[error("at least one replica is required")]
    ZeroReplicas,
    #[error("n must be positive")]
    ZeroParticles,
    #[error("n values must be strictly increasing")]
    NValuesNotIncreasing,
    #[error("reference trajectory must be piecewise-linear")]
    ReferenceNotLinear,
    #[error("state kind or dimension does not match the model")]
    StateMismatch,
    #[error(transparent)]
    Lattice(#[from] HamiltonianError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// A simulated path plus run metadata.
#[derive(Debug)]
pub struct SimulatedPath {
    pub trajectory: Trajectory,
    /// The chain hit a state with zero total jump rate and stayed there.
    pub absorbed: bool,
    pub jumps: usize,
}

/// Monte-Carlo tube-probability sweep over a family of particle counts,
/// with the action of the reference path for comparison: the decay
/// estimates `-(1/n) log p̂_n` approximate the path action.
#[derive(Debug, Serialize)]
pub struct RateReport {
    pub n_values: Vec<u64>,
    pub tube_probabilities: Vec<f64>,
    /// `-(1/n) log p̂`; absent where no path stayed in the tube.
    pub decay_estimates: Vec<Option<f64>>,
    pub reference_action: Cost,
    pub delta: f64,
    pub replicas: u64,
}

enum Walker<'m> {
    Ehrenfest {
        model: &'m EhrenfestModel,
        n: u64,
        counts: Vec<u64>,
        x: Vec<f64>,
        rates: Vec<f64>,
    },
    Glauber {
        model: &'m GlauberModel,
        n: u64,
        counts: Vec<u64>,
        mu: Vec<f64>,
        rates: Vec<f64>,
    },
}

enum Step {
    Jumped,
    Absorbed,
    Horizon,
}

impl<'m> Walker<'m> {
    fn new(model: &'m ModelSpec, n: u64, counts: Vec<u64>) -> Self {
        let nf = n as f64;
        match model {
            ModelSpec::Ehrenfest(m) => {
                let x = counts.iter().map(|&k| (2.0 * k as f64 - nf) / nf).collect();
                let rates = vec![0.0; 2 * m.d()];
                Walker::Ehrenfest { model: m, n, counts, x, rates }
            }
            ModelSpec::Glauber(m) => {
                let mu = counts.iter().map(|&c| c as f64 / nf).collect();
                let rates = vec![0.0; m.d() * m.d()];
                Walker::Glauber { model: m, n, counts, mu, rates }
            }
        }
    }

    fn coords(&self) -> &[f64] {
        match self {
            Walker::Ehrenfest { x, .. } => x,
            Walker::Glauber { mu, .. } => mu,
        }
    }

    /// Fill the channel rates of the generator at the current state and
    /// return the total.
    fn fill_rates(&mut self) -> f64 {
        match self {
            Walker::Ehrenfest { model, n, counts, x, rates } => {
                let mut total = 0.0;
                for i in 0..model.d() {
                    // n (1-x_i)/2 = n - k_i spins can still flip up.
                    let up = (*n - counts[i]) as f64 * model.rn_plus(*n, i, x);
                    let down = counts[i] as f64 * model.rn_minus(*n, i, x);
                    rates[2 * i] = up;
                    rates[2 * i + 1] = down;
                    total += up + down;
                }
                total
            }
            Walker::Glauber { model, n, counts, mu, rates } => {
                let d = model.d();
                let mut total = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        let rate = if a == b || counts[a] == 0 {
                            0.0
                        } else {
                            counts[a] as f64 * model.rn(*n, a, b, mu)
                        };
                        rates[a * d + b] = rate;
                        total += rate;
                    }
                }
                total
            }
        }
    }

    fn apply(&mut self, channel: usize) {
        match self {
            Walker::Ehrenfest { n, counts, x, .. } => {
                let i = channel / 2;
                if channel % 2 == 0 {
                    counts[i] += 1;
                } else {
                    counts[i] -= 1;
                }
                x[i] = (2.0 * counts[i] as f64 - *n as f64) / *n as f64;
            }
            Walker::Glauber { model, n, counts, mu, .. } => {
                let d = model.d();
                let a = channel / d;
                let b = channel % d;
                counts[a] -= 1;
                counts[b] += 1;
                mu[a] = counts[a] as f64 / *n as f64;
                mu[b] = counts[b] as f64 / *n as f64;
            }
        }
    }

    /// Advance to the next jump strictly before `horizon - t`.
    fn step(&mut self, rng: &mut impl rand::Rng, t: &mut f64, horizon: f64) -> Step {
        let total = self.fill_rates();
        if total <= 0.0 {
            return Step::Absorbed;
        }
        let tau = exp_waiting_time(rng, total);
        if *t + tau >= horizon {
            *t = horizon;
            return Step::Horizon;
        }
        *t += tau;
        let rates = match self {
            Walker::Ehrenfest { rates, .. } => rates,
            Walker::Glauber { rates, .. } => rates,
        };
        let target: f64 = rng.gen::<f64>() * total;
        let mut cum = 0.0;
        let mut channel = usize::MAX;
        for (c, &r) in rates.iter().enumerate() {
            if r <= 0.0 {
                continue; // zero-rate transitions are never sampled
            }
            cum += r;
            channel = c;
            if target < cum {
                break;
            }
        }
        self.apply(channel);
        Step::Jumped
    }
}

/// Nearest n-lattice point to a state, as integer counts.
fn nearest_counts(model: &ModelSpec, n: u64, state: &StatePoint) -> Result<Vec<u64>, SimError> {
    if !model.accepts(state) {
        return Err(SimError::StateMismatch);
    }
    let nf = n as f64;
    match model {
        ModelSpec::Ehrenfest(_) => Ok(state
            .coords()
            .iter()
            .map(|&x| ((x + 1.0) * nf / 2.0).round().clamp(0.0, nf) as u64)
            .collect()),
        ModelSpec::Glauber(_) => {
            // Largest-remainder rounding keeps the total mass exactly n.
            let mu = state.coords();
            let mut counts: Vec<u64> = mu.iter().map(|&m| (m * nf).floor() as u64).collect();
            let mut leftover: i64 = n as i64 - counts.iter().sum::<u64>() as i64;
            let mut order: Vec<usize> = (0..mu.len()).collect();
            order.sort_by(|&i, &j| {
                let ri = mu[i] * nf - (mu[i] * nf).floor();
                let rj = mu[j] * nf - (mu[j] * nf).floor();
                rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
            });
            let mut cursor = 0;
            while leftover > 0 {
                counts[order[cursor % order.len()]] += 1;
                cursor += 1;
                leftover -= 1;
            }
            Ok(counts)
        }
    }
}

/// One exact realization of the empirical process, as its jump skeleton
/// (piecewise-constant trajectory starting at t = 0).
///
/// `start` must sit on the n-lattice up to the snap tolerance. A state with
/// zero total rate absorbs: the path simply stays there until the horizon
/// and the `absorbed` flag is set.
pub fn simulate_path(
    model: &ModelSpec,
    n: u64,
    start: &StatePoint,
    horizon: f64,
    seed: u64,
) -> Result<SimulatedPath, SimError> {
    if n == 0 {
        return Err(SimError::ZeroParticles);
    }
    if !(horizon > 0.0) {
        return Err(SimError::BadHorizon(horizon));
    }
    if !model.accepts(start) {
        return Err(SimError::StateMismatch);
    }
    let counts = match model {
        ModelSpec::Ehrenfest(_) => cube_lattice_counts(start.coords(), n)?,
        ModelSpec::Glauber(_) => simplex_lattice_counts(start.coords(), n)?,
    };
    let mut walker = Walker::new(model, n, counts);
    let mut rng = replica_rng(seed, 0);
    let mut times = vec![0.0];
    let mut states = vec![match model {
        ModelSpec::Ehrenfest(_) => StatePoint::cube(walker.coords().to_vec()).unwrap(),
        ModelSpec::Glauber(_) => StatePoint::simplex(walker.coords().to_vec()).unwrap(),
    }];
    let mut t = 0.0;
    let mut absorbed = false;
    loop {
        match walker.step(&mut rng, &mut t, horizon) {
            Step::Jumped => {
                times.push(t);
                states.push(match model {
                    ModelSpec::Ehrenfest(_) => {
                        StatePoint::cube(walker.coords().to_vec()).unwrap()
                    }
                    ModelSpec::Glauber(_) => {
                        StatePoint::simplex(walker.coords().to_vec()).unwrap()
                    }
                });
            }
            Step::Absorbed => {
                absorbed = true;
                break;
            }
            Step::Horizon => break,
        }
    }
    let jumps = times.len() - 1;
    Ok(SimulatedPath {
        trajectory: Trajectory::new(times, states, PathKind::PiecewiseConstant)?,
        absorbed,
        jumps,
    })
}

/// Does one replica stay within sup-distance `delta` of the reference for
/// all `t ≤ T`? The piecewise-constant path is compared against the linear
/// interpolation of the reference at jump times and reference breakpoints
/// (the difference is piecewise linear in between, so its sup is attained
/// there).
fn replica_in_tube(
    model: &ModelSpec,
    n: u64,
    counts0: &[u64],
    reference: &Trajectory,
    delta: f64,
    seed: u64,
    replica: u64,
) -> bool {
    let horizon = reference.end_time();
    let ref_times = reference.times();
    let mut walker = Walker::new(model, n, counts0.to_vec());
    let mut rng = replica_rng(seed, replica);
    let mut s = walker.coords().to_vec();
    let mut t = 0.0;
    let mut bp = 0; // first reference breakpoint strictly ahead of t

    if sup_distance(&s, &reference.eval(0.0)) >= delta {
        return false;
    }
    loop {
        let step = walker.step(&mut rng, &mut t, horizon);
        let t_end = match step {
            Step::Jumped => t,
            Step::Absorbed | Step::Horizon => horizon,
        };
        // Constant value `s` over the interval ending at t_end: check at
        // every reference kink inside and at the interval end.
        while bp < ref_times.len() && ref_times[bp] < t_end {
            if sup_distance(&s, reference.states()[bp].coords()) >= delta {
                return false;
            }
            bp += 1;
        }
        if sup_distance(&s, &reference.eval(t_end)) >= delta {
            return false;
        }
        match step {
            Step::Jumped => {
                s.copy_from_slice(walker.coords());
                if sup_distance(&s, &reference.eval(t)) >= delta {
                    return false;
                }
            }
            Step::Absorbed | Step::Horizon => return true,
        }
    }
}

/// Fraction of `replicas` simulated paths (started at `reference(0)` snapped
/// to the n-lattice) that stay within sup-distance `delta` of the reference
/// up to its end time.
pub fn estimate_tube_probability(
    model: &ModelSpec,
    n: u64,
    reference: &Trajectory,
    delta: f64,
    replicas: u64,
    seed: u64,
) -> Result<f64, SimError> {
    if n == 0 {
        return Err(SimError::ZeroParticles);
    }
    if !(delta > 0.0) {
        return Err(SimError::BadDelta(delta));
    }
    if replicas == 0 {
        return Err(SimError::ZeroReplicas);
    }
    if reference.kind() != PathKind::PiecewiseLinear {
        return Err(SimError::ReferenceNotLinear);
    }
    let counts0 = nearest_counts(model, n, reference.start())?;
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| u64::from(replica_in_tube(model, n, &counts0, reference, delta, seed, r)))
        .sum();
    Ok(hits as f64 / replicas as f64)
}

/// Tube-probability sweep over increasing `n` with the reference action for
/// comparison. Each `n` uses an independent family of replica streams.
#[allow(clippy::too_many_arguments)]
pub fn ldp_rate_estimate(
    model: &ModelSpec,
    reference: &Trajectory,
    delta: f64,
    n_values: &[u64],
    replicas: u64,
    seed: u64,
    i0: &InitialRate,
) -> Result<RateReport, SimError> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) || n_values.is_empty() {
        return Err(SimError::NValuesNotIncreasing);
    }
    let reference_action = evaluate_action(model, reference, i0)?.total;
    let mut tube_probabilities = Vec::with_capacity(n_values.len());
    let mut decay_estimates = Vec::with_capacity(n_values.len());
    for (idx, &n) in n_values.iter().enumerate() {
        let sub_seed = crate::rng::derive_seed(seed, idx as u64);
        let p = estimate_tube_probability(model, n, reference, delta, replicas, sub_seed)?;
        tube_probabilities.push(p);
        decay_estimates.push(if p > 0.0 { Some(-p.ln() / n as f64) } else { None });
    }
    Ok(RateReport {
        n_values: n_values.to_vec(),
        tube_probabilities,
        decay_estimates,
        reference_action,
        delta,
        replicas,
    })
}
