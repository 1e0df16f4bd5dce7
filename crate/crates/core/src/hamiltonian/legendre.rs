//! Legendre-Fenchel transform `L(x,v) = sup_p ⟨p,v⟩ - H(x,p)`.
//!
//! The Ehrenfest Hamiltonian separates over coordinates, and each
//! one-coordinate supremum `sup_p pv - a(e^{2p}-1) - b(e^{-2p}-1)` has a
//! closed form through the positive root of `2a u² - v u - 2b = 0` in
//! `u = e^{2p}`. The Glauber dual has no closed form; it is a concave
//! maximization solved by damped Newton on the gauge plane `Σp = 0`
//! (momenta only enter through differences, so the all-ones direction is
//! flat: off the tangent plane `Σv = 0` the supremum is `+∞`).

use crate::cost::Cost;
use crate::hamiltonian::HamiltonianError;
use crate::linalg;
use crate::model::{GlauberModel, ModelSpec};
use crate::state::StatePoint;

/// Velocities whose mass imbalance exceeds this are off the simplex tangent
/// plane and get infinite cost.
pub const GLAUBER_GAUGE_TOL: f64 = 1e-9;

const NEWTON_MAX_ITERS: usize = 200;
const NEWTON_GRAD_TOL: f64 = 1e-12;
const NEWTON_REGULARIZATION: f64 = 1e-10;
const NEWTON_STEP_CAP: f64 = 10.0;
/// Beyond this momentum magnitude a still-improving iterate is classified
/// as an unbounded supremum (the exponentials involved dwarf any finite
/// rate by then).
const NEWTON_UNBOUNDED_NORM: f64 = 80.0;

/// Value of the Lagrangian together with the maximizing momentum when the
/// supremum is attained (gauge-fixed to `Σp = 0` for Glauber).
#[derive(Clone, Debug)]
pub struct LagrangianValue {
    pub value: Cost,
    pub maximizer: Option<Vec<f64>>,
}

impl LagrangianValue {
    fn infinite() -> Self {
        LagrangianValue { value: Cost::Infinite, maximizer: None }
    }
}

/// One-coordinate Ehrenfest dual: `sup_p pv - a(e^{2p}-1) - b(e^{-2p}-1)`
/// for up-rate `a ≥ 0` and down-rate `b ≥ 0`.
pub fn lagrangian_1d(a: f64, b: f64, v: f64) -> Result<LagrangianValue, HamiltonianError> {
    if a < 0.0 {
        return Err(HamiltonianError::NegativeRate(a));
    }
    if b < 0.0 {
        return Err(HamiltonianError::NegativeRate(b));
    }
    if a == 0.0 && b == 0.0 {
        // H ≡ 0: the supremum of pv is 0 iff v = 0.
        return Ok(if v == 0.0 {
            LagrangianValue { value: Cost::ZERO, maximizer: Some(vec![0.0]) }
        } else {
            LagrangianValue::infinite()
        });
    }
    if a == 0.0 {
        // Only downward jumps: positive velocity is unreachable. At v = 0 the
        // supremum b (the cost of suppressing all jumps) is approached as
        // p → ∞ but not attained.
        return Ok(match v.partial_cmp(&0.0).unwrap() {
            std::cmp::Ordering::Greater => LagrangianValue::infinite(),
            std::cmp::Ordering::Equal => {
                LagrangianValue { value: Cost::Finite(b), maximizer: None }
            }
            std::cmp::Ordering::Less => {
                let w = -v;
                let p = 0.5 * (2.0 * b / w).ln();
                let value = p * v + 0.5 * v + b;
                LagrangianValue { value: Cost::Finite(value.max(0.0)), maximizer: Some(vec![p]) }
            }
        });
    }
    if b == 0.0 {
        return Ok(match v.partial_cmp(&0.0).unwrap() {
            std::cmp::Ordering::Less => LagrangianValue::infinite(),
            std::cmp::Ordering::Equal => {
                LagrangianValue { value: Cost::Finite(a), maximizer: None }
            }
            std::cmp::Ordering::Greater => {
                let p = 0.5 * (v / (2.0 * a)).ln();
                let value = p * v - 0.5 * v + a;
                LagrangianValue { value: Cost::Finite(value.max(0.0)), maximizer: Some(vec![p]) }
            }
        });
    }
    // Interior case: the stationarity condition 2a u² - v u - 2b = 0 in
    // u = e^{2p} has one positive root. Pick the cancellation-free branch.
    let disc = (v * v + 16.0 * a * b).sqrt();
    let u = if v >= 0.0 { (v + disc) / (4.0 * a) } else { 4.0 * b / (disc - v) };
    let p = 0.5 * u.ln();
    let value = p * v - a * (u - 1.0) - b * (1.0 / u - 1.0);
    Ok(LagrangianValue { value: Cost::Finite(value.max(0.0)), maximizer: Some(vec![p]) })
}

/// `L(x, v)` for either model.
pub fn lagrangian(
    model: &ModelSpec,
    state: &StatePoint,
    velocity: &[f64],
) -> Result<LagrangianValue, HamiltonianError> {
    if velocity.len() != model.d() {
        return Err(HamiltonianError::VelocityDimension {
            v: velocity.len(),
            model: model.d(),
        });
    }
    match model {
        ModelSpec::Ehrenfest(m) => {
            super::check_state(model, state)?;
            let x = state.coords();
            let mut total = 0.0;
            let mut maximizer = Some(Vec::with_capacity(m.d()));
            for i in 0..m.d() {
                let part = lagrangian_1d(m.v_plus(i, x), m.v_minus(i, x), velocity[i])?;
                match part.value {
                    Cost::Infinite => return Ok(LagrangianValue::infinite()),
                    Cost::Finite(v) => total += v,
                }
                match (&mut maximizer, part.maximizer) {
                    (Some(acc), Some(p)) => acc.push(p[0]),
                    _ => maximizer = None,
                }
            }
            Ok(LagrangianValue { value: Cost::Finite(total), maximizer })
        }
        ModelSpec::Glauber(m) => {
            super::check_state(model, state)?;
            let imbalance: f64 = velocity.iter().sum();
            let scale = velocity.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            if imbalance.abs() > GLAUBER_GAUGE_TOL * scale {
                return Ok(LagrangianValue::infinite());
            }
            glauber_dual(m, state.coords(), velocity)
        }
    }
}

/// Concave maximization of `⟨p,v⟩ - H(μ,p)` over the gauge plane.
fn glauber_dual(
    m: &GlauberModel,
    mu: &[f64],
    velocity: &[f64],
) -> Result<LagrangianValue, HamiltonianError> {
    let d = m.d();
    let mut w = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            if a != b {
                w[a * d + b] = m.v(a, b, mu);
            }
        }
    }
    let objective = |p: &[f64]| -> f64 {
        let mut obj = 0.0;
        for (c, pc) in p.iter().enumerate() {
            obj += pc * velocity[c];
        }
        for a in 0..d {
            for b in 0..d {
                let wab = w[a * d + b];
                if wab > 0.0 {
                    obj -= wab * ((p[b] - p[a]).exp() - 1.0);
                }
            }
        }
        obj
    };

    let mut p = vec![0.0; d];
    let mut obj = objective(&p);
    let mut grad_norm = f64::INFINITY;
    for iteration in 0..NEWTON_MAX_ITERS {
        // Gradient of the objective: v - H_p(μ, p), projected on Σ = 0.
        let mut grad = velocity.to_vec();
        let mut hess = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                let wab = w[a * d + b];
                if wab <= 0.0 {
                    continue;
                }
                let e = wab * (p[b] - p[a]).exp();
                grad[b] -= e;
                grad[a] += e;
                hess[b * d + b] += e;
                hess[a * d + a] += e;
                hess[a * d + b] -= e;
                hess[b * d + a] -= e;
            }
        }
        let mean = grad.iter().sum::<f64>() / d as f64;
        for g in &mut grad {
            *g -= mean;
        }
        grad_norm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if grad_norm < NEWTON_GRAD_TOL {
            return Ok(LagrangianValue {
                value: Cost::Finite(obj.max(0.0)),
                maximizer: Some(p),
            });
        }
        for c in 0..d {
            hess[c * d + c] += NEWTON_REGULARIZATION;
        }
        let mut step = match linalg::solve(hess, grad.clone()) {
            Some(s) => s,
            None => grad.clone(),
        };
        let smean = step.iter().sum::<f64>() / d as f64;
        for s in &mut step {
            *s -= smean;
        }
        let step_norm = step.iter().fold(0.0f64, |acc, s| acc.max(s.abs()));
        if step_norm > NEWTON_STEP_CAP {
            let scale = NEWTON_STEP_CAP / step_norm;
            for s in &mut step {
                *s *= scale;
            }
        }
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        // Near the optimum the predicted increase sinks below f64 rounding
        // of the objective; the slack keeps Armijo from rejecting forever.
        let noise = 1e-14 * (1.0 + obj.abs());
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha >= 1e-12 {
            let trial: Vec<f64> = p.iter().zip(&step).map(|(pc, s)| pc + alpha * s).collect();
            let trial_obj = objective(&trial);
            if trial_obj >= obj + 1e-4 * alpha * slope - noise {
                p = trial;
                obj = trial_obj;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(HamiltonianError::NonConvergence {
                iterations: iteration,
                gradient_norm: grad_norm,
            });
        }
        let p_norm = p.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if p_norm > NEWTON_UNBOUNDED_NORM {
            // Still climbing at enormous momenta: the velocity points
            // outside the cone reachable at this state.
            return Ok(LagrangianValue::infinite());
        }
    }
    Err(HamiltonianError::NonConvergence {
        iterations: NEWTON_MAX_ITERS,
        gradient_norm: grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{grad_p, value, vector_field};
    use crate::model::{EhrenfestModel, GlauberModel, SmoothFn};
    use rand::Rng;

    /// Brute-force 1-D grid maximization of pv - a(e^{2p}-1) - b(e^{-2p}-1)
    /// with iterative zoom; independent oracle for the closed form.
    fn brute_force_1d(a: f64, b: f64, v: f64) -> f64 {
        let mut lo = -12.0;
        let mut hi = 12.0;
        let mut best_p = 0.0;
        for _ in 0..6 {
            let mut best = f64::NEG_INFINITY;
            for k in 0..=4000 {
                let p = lo + (hi - lo) * k as f64 / 4000.0;
                let val = p * v - a * ((2.0 * p).exp() - 1.0) - b * ((-2.0 * p).exp() - 1.0);
                if val > best {
                    best = val;
                    best_p = p;
                }
            }
            let span = (hi - lo) / 4000.0 * 4.0;
            lo = best_p - span;
            hi = best_p + span;
        }
        best_p * v - a * ((2.0 * best_p).exp() - 1.0) - b * ((-2.0 * best_p).exp() - 1.0)
    }

    #[test]
    fn closed_form_matches_quadratic_oracle() {
        // a = b = 1/2, v = 3/2: u = 2 and the value is (3/4)ln2 - 1/4.
        let lv = lagrangian_1d(0.5, 0.5, 1.5).unwrap();
        let expected = 0.75 * 2.0f64.ln() - 0.25;
        assert!((lv.value.expect_finite() - expected).abs() < 1e-12);
        assert!((lv.maximizer.unwrap()[0] - 0.5 * 2.0f64.ln()).abs() < 1e-12);
        assert!((brute_force_1d(0.5, 0.5, 1.5) - expected).abs() < 1e-7);
    }

    #[test]
    fn zero_cost_at_drift_velocity() {
        let mut rng = crate::rng::root_rng(41);
        for _ in 0..50 {
            let a = rng.gen_range(0.01..3.0);
            let b = rng.gen_range(0.01..3.0);
            let lv = lagrangian_1d(a, b, 2.0 * (a - b)).unwrap();
            assert!(lv.value.expect_finite().abs() < 1e-12);
        }
    }

    #[test]
    fn one_sided_cases() {
        assert_eq!(lagrangian_1d(0.0, 1.0, 1.0).unwrap().value, Cost::Infinite);
        assert_eq!(lagrangian_1d(1.0, 0.0, -1.0).unwrap().value, Cost::Infinite);
        // Standing still with only down jumps at rate b costs exactly b.
        assert_eq!(lagrangian_1d(0.0, 2.5, 0.0).unwrap().value, Cost::Finite(2.5));
        assert_eq!(lagrangian_1d(0.0, 0.0, 0.0).unwrap().value, Cost::ZERO);
        assert_eq!(lagrangian_1d(0.0, 0.0, 0.1).unwrap().value, Cost::Infinite);
        // One-sided closed forms against the brute-force oracle.
        let lv = lagrangian_1d(0.0, 1.3, -0.8).unwrap();
        assert!((lv.value.expect_finite() - brute_force_1d(0.0, 1.3, -0.8)).abs() < 1e-7);
        let lv = lagrangian_1d(0.7, 0.0, 0.9).unwrap();
        assert!((lv.value.expect_finite() - brute_force_1d(0.7, 0.0, 0.9)).abs() < 1e-7);
        assert!(lagrangian_1d(-0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn ehrenfest_dual_sums_coordinates() {
        let model =
            ModelSpec::Ehrenfest(EhrenfestModel::from_potential(SmoothFn::zero(), 2).unwrap());
        let state = StatePoint::cube(vec![0.2, -0.4]).unwrap();
        let v = vec![0.3, -0.1];
        let lv = lagrangian(&model, &state, &v).unwrap();
        let x = state.coords();
        let mut expected = 0.0;
        for i in 0..2 {
            expected += lagrangian_1d(
                0.5 * (1.0 - x[i]),
                0.5 * (1.0 + x[i]),
                v[i],
            )
            .unwrap()
            .value
            .expect_finite();
        }
        assert!((lv.value.expect_finite() - expected).abs() < 1e-14);
    }

    #[test]
    fn drift_velocity_costs_nothing() {
        let models = [
            ModelSpec::Ehrenfest(EhrenfestModel::from_potential(SmoothFn::quadratic(), 2).unwrap()),
            ModelSpec::Glauber(
                GlauberModel::from_potential(vec![vec![1.0; 3]; 3], SmoothFn::quadratic()).unwrap(),
            ),
        ];
        let mut rng = crate::rng::root_rng(43);
        for model in &models {
            for _ in 0..20 {
                let state = crate::hamiltonian::tests::random_state(model, &mut rng);
                let f = vector_field(model, &state).unwrap();
                let lv = lagrangian(model, &state, &f).unwrap();
                assert!(lv.value.expect_finite() < 1e-9, "drift cost {:?}", lv.value);
            }
        }
    }

    #[test]
    fn glauber_mass_imbalance_is_infinite() {
        let model = ModelSpec::Glauber(
            GlauberModel::from_potential(vec![vec![1.0; 2]; 2], SmoothFn::zero()).unwrap(),
        );
        let state = StatePoint::simplex(vec![0.5, 0.5]).unwrap();
        let lv = lagrangian(&model, &state, &[0.3, -0.2]).unwrap();
        assert_eq!(lv.value, Cost::Infinite);
    }

    #[test]
    fn glauber_dual_matches_closed_form_d2() {
        // Symmetric two-state model at uniform μ: for v = (w, -w) the dual is
        // w·asinh(w) + 1 - sqrt(1 + w²).
        let model = ModelSpec::Glauber(
            GlauberModel::from_potential(vec![vec![1.0; 2]; 2], SmoothFn::zero()).unwrap(),
        );
        let state = StatePoint::simplex(vec![0.5, 0.5]).unwrap();
        for w in [0.1, 0.3, 1.0, 2.5] {
            let lv = lagrangian(&model, &state, &[w, -w]).unwrap();
            let expected = w * w.asinh() + 1.0 - (1.0 + w * w).sqrt();
            assert!(
                (lv.value.expect_finite() - expected).abs() < 1e-10,
                "w = {w}: {:?} vs {expected}",
                lv.value
            );
            let p = lv.maximizer.unwrap();
            assert!(p.iter().sum::<f64>().abs() < 1e-9, "gauge fixing");
        }
    }

    #[test]
    fn fenchel_young_equality_at_gradient_velocities() {
        let models = [
            ModelSpec::Ehrenfest(EhrenfestModel::from_potential(SmoothFn::quadratic(), 2).unwrap()),
            ModelSpec::Glauber(
                GlauberModel::from_potential(vec![vec![1.0; 3]; 3], SmoothFn::zero()).unwrap(),
            ),
        ];
        let mut rng = crate::rng::root_rng(47);
        for model in &models {
            for _ in 0..50 {
                let state = crate::hamiltonian::tests::random_state(model, &mut rng);
                let p: Vec<f64> = (0..model.d()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = grad_p(model, &state, &p).unwrap();
                let lv = lagrangian(model, &state, &v).unwrap();
                let pv: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
                let expected = pv - value(model, &state, &p).unwrap();
                assert!(
                    (lv.value.expect_finite() - expected).abs() < 1e-8,
                    "L = {:?}, <p,v> - H = {expected}",
                    lv.value
                );
            }
        }
    }
}
