//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with its runtime (run with `--nocapture` to see them on success).
//!
//! Criterion 6 is implemented exactly as specified and currently fails;
//! see the diagnostic it prints and `tests/oracles.rs::
//! ldp_rate_validates_at_wider_tube` for the control experiment at a tube
//! width that resolves the lattice.

use std::time::Instant;

use rand::Rng;

use ldp_core::action::{evaluate_action, InitialRate};

use ldp_core::flow::{branch_solution, integrate_mkv, FlowConfig, Method};
use ldp_core::hamiltonian::{grad_p, hn_value, lagrangian, value};
use ldp_core::hjb::{
    comparison_experiment, nisio_value_dp, semigroup_via_resolvent, solve_resolvent, Grid,
    GridFunction, SchemeParams,
};
use ldp_core::lyapunov::{integrator_tolerance, lyapunov_check};
use ldp_core::model::{EhrenfestModel, GlauberModel, ModelSpec, SmoothFn};
use ldp_core::simulator::{estimate_tube_probability, ldp_rate_estimate};
use ldp_core::state::StatePoint;
use ldp_core::trajectory::{PathKind, Trajectory};

fn finish(criterion: &str, name: &str, budget_s: f64, started: Instant, outcome: Result<String, String>) {
    let elapsed = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("ACCEPTANCE {criterion} {name}: PASS ({elapsed:.2} s < {budget_s} s) {detail}");
            assert!(
                elapsed < budget_s,
                "ACCEPTANCE {criterion} {name}: runtime {elapsed:.2} s exceeds budget {budget_s} s"
            );
        }
        Err(reason) => {
            println!("ACCEPTANCE {criterion} {name}: FAIL ({elapsed:.2} s) {reason}");
            panic!("ACCEPTANCE {criterion} {name}: FAIL — {reason}");
        }
    }
}

fn quadratic_ehrenfest(d: usize) -> ModelSpec {
    ModelSpec::Ehrenfest(EhrenfestModel::from_potential(SmoothFn::quadratic(), d).unwrap())
}

fn free_ehrenfest() -> ModelSpec {
    ModelSpec::Ehrenfest(EhrenfestModel::from_potential(SmoothFn::zero(), 1).unwrap())
}

fn potts_glauber(d: usize) -> ModelSpec {
    ModelSpec::Glauber(
        GlauberModel::from_potential(vec![vec![1.0; d]; d], SmoothFn::quadratic()).unwrap(),
    )
}

fn random_state(model: &ModelSpec, rng: &mut impl Rng) -> StatePoint {
    match model {
        ModelSpec::Ehrenfest(m) => {
            StatePoint::cube((0..m.d()).map(|_| rng.gen_range(-0.999..0.999)).collect()).unwrap()
        }
        ModelSpec::Glauber(m) => {
            let raw: Vec<f64> = (0..m.d()).map(|_| rng.gen_range(0.02..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            StatePoint::simplex(raw.iter().map(|v| v / sum).collect()).unwrap()
        }
    }
}

/// Criterion 1: H(x,0) = 0 to 1e-14 at 10^3 random states per model;
/// analytic H_p matches central differences within 1e-6 at 100 (state, p).
#[test]
fn criterion_1_hamiltonian_identities() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let models = [quadratic_ehrenfest(2), potts_glauber(3)];
        let mut rng = ldp_core::rng::root_rng(101);
        let mut worst_h0: f64 = 0.0;
        let mut worst_fd: f64 = 0.0;
        for model in &models {
            for _ in 0..1000 {
                let state = random_state(model, &mut rng);
                let h0 = value(model, &state, &vec![0.0; model.d()]).unwrap().abs();
                worst_h0 = worst_h0.max(h0);
                if h0 > 1e-14 {
                    return Err(format!("H(x,0) = {h0}"));
                }
            }
            for _ in 0..100 {
                let state = random_state(model, &mut rng);
                let p: Vec<f64> = (0..model.d()).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let grad = grad_p(model, &state, &p).unwrap();
                let eps = 1e-5;
                for i in 0..model.d() {
                    let mut pp = p.clone();
                    pp[i] += eps;
                    let mut pm = p.clone();
                    pm[i] -= eps;
                    let fd = (value(model, &state, &pp).unwrap()
                        - value(model, &state, &pm).unwrap())
                        / (2.0 * eps);
                    let gap = (grad[i] - fd).abs();
                    worst_fd = worst_fd.max(gap);
                    if gap > 1e-6 {
                        return Err(format!("grad vs FD gap {gap}"));
                    }
                }
            }
        }
        Ok(format!("max |H(x,0)| = {worst_h0:.1e}, max FD gap = {worst_fd:.1e}"))
    })();
    finish("1", "hamiltonian-identities", 1.0, started, outcome);
}

/// Brute-force gauge-plane grid maximization of <p,v> - H(mu,p).
fn glauber_dual_brute_force(model: &ModelSpec, state: &StatePoint, velocity: &[f64]) -> f64 {
    let d = state.dim();
    let basis: Vec<Vec<f64>> = match d {
        2 => vec![vec![1.0, -1.0].iter().map(|v| v / 2f64.sqrt()).collect()],
        3 => vec![
            vec![1.0, -1.0, 0.0].iter().map(|v| v / 2f64.sqrt()).collect(),
            vec![1.0, 1.0, -2.0].iter().map(|v| v / 6f64.sqrt()).collect(),
        ],
        _ => unreachable!("oracle implemented for d = 2, 3"),
    };
    let eval = |coeffs: &[f64]| -> f64 {
        let mut p = vec![0.0; d];
        for (c, b) in coeffs.iter().zip(&basis) {
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += c * bi;
            }
        }
        let pv: f64 = p.iter().zip(velocity).map(|(a, b)| a * b).sum();
        pv - value(model, state, &p).unwrap()
    };
    let mut center = vec![0.0; basis.len()];
    let mut span = 10.0;
    let mut best_val = f64::NEG_INFINITY;
    for _ in 0..5 {
        let steps = 80i64;
        let mut best = center.clone();
        best_val = f64::NEG_INFINITY;
        if basis.len() == 1 {
            for i in -steps..=steps {
                let q = [center[0] + span * i as f64 / steps as f64];
                let v = eval(&q);
                if v > best_val {
                    best_val = v;
                    best = q.to_vec();
                }
            }
        } else {
            for i in -steps..=steps {
                for j in -steps..=steps {
                    let q = [
                        center[0] + span * i as f64 / steps as f64,
                        center[1] + span * j as f64 / steps as f64,
                    ];
                    let v = eval(&q);
                    if v > best_val {
                        best_val = v;
                        best = q.to_vec();
                    }
                }
            }
        }
        center = best;
        span = span / steps as f64 * 4.0;
    }
    best_val
}

/// Criterion 2: Fenchel-Young equality within 1e-8 at 100 samples per
/// model; the Glauber Newton dual matches the brute-force grid oracle
/// within 1e-6 on d = 2 and d = 3 instances.
#[test]
fn criterion_2_legendre_duality() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let mut rng = ldp_core::rng::root_rng(202);
        let models = [quadratic_ehrenfest(2), potts_glauber(3)];
        let mut worst_fy: f64 = 0.0;
        for model in &models {
            for _ in 0..100 {
                let state = random_state(model, &mut rng);
                let p: Vec<f64> = (0..model.d()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = grad_p(model, &state, &p).unwrap();
                let lv = lagrangian(model, &state, &v)
                    .map_err(|e| format!("dual solve failed: {e}"))?;
                let pv: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
                let expected = pv - value(model, &state, &p).unwrap();
                let gap = (lv.value.expect_finite() - expected).abs();
                worst_fy = worst_fy.max(gap);
                if gap > 1e-8 {
                    return Err(format!("Fenchel-Young gap {gap}"));
                }
            }
        }
        let mut worst_bf: f64 = 0.0;
        for d in [2usize, 3] {
            let model = potts_glauber(d);
            for k in 0..6 {
                let state = random_state(&model, &mut rng);
                let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.8..0.8)).collect();
                let v = if k % 2 == 0 {
                    grad_p(&model, &state, &p).unwrap()
                } else {
                    // A generic tangent velocity.
                    let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.8..0.8)).collect();
                    let mean = v.iter().sum::<f64>() / d as f64;
                    v.iter_mut().for_each(|x| *x -= mean);
                    v
                };
                let newton = lagrangian(&model, &state, &v)
                    .map_err(|e| format!("dual solve failed: {e}"))?
                    .value
                    .expect_finite();
                let oracle = glauber_dual_brute_force(&model, &state, &v);
                let gap = (newton - oracle).abs();
                worst_bf = worst_bf.max(gap);
                if gap > 1e-6 {
                    return Err(format!("d = {d}: Newton {newton} vs brute force {oracle}"));
                }
            }
        }
        Ok(format!("max FY gap = {worst_fy:.1e}, max Newton-vs-grid gap = {worst_bf:.1e}"))
    })();
    finish("2", "legendre-duality", 10.0, started, outcome);
}

/// Criterion 3: McKean-Vlasov flows have action <= 1e-6·T on the three
/// named models, and the branch family has action <= 1e-5 inside U.
#[test]
fn criterion_3_zero_cost_flows() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let cfg = FlowConfig::new(1e-3, 1.0, Method::Rk4).unwrap();
        let cases: Vec<(ModelSpec, StatePoint)> = vec![
            (free_ehrenfest(), StatePoint::cube(vec![0.8]).unwrap()),
            (
                ModelSpec::Ehrenfest(EhrenfestModel::sqrt_diverging()),
                StatePoint::cube(vec![0.3]).unwrap(),
            ),
            (
                ModelSpec::Glauber(
                    GlauberModel::from_potential(vec![vec![1.0; 3]; 3], SmoothFn::zero()).unwrap(),
                ),
                StatePoint::simplex(vec![0.5, 0.3, 0.2]).unwrap(),
            ),
        ];
        let mut worst_flow: f64 = 0.0;
        for (model, start) in &cases {
            let out = integrate_mkv(model, start, &cfg).map_err(|e| e.to_string())?;
            let i0 = InitialRate::PointMass(start.clone());
            let total = evaluate_action(model, &out.trajectory, &i0)
                .map_err(|e| e.to_string())?
                .total
                .expect_finite();
            worst_flow = worst_flow.max(total);
            if total > 1e-6 * cfg.horizon {
                return Err(format!("{}: flow action {total}", model.label()));
            }
        }
        let nonunique = ModelSpec::Ehrenfest(EhrenfestModel::nonunique(0.5).unwrap());
        let branch_cfg = FlowConfig::new(1e-3, 0.6, Method::Rk4).unwrap();
        let mut worst_branch: f64 = 0.0;
        for a in [0.0, 0.3, 1.0] {
            let gamma = branch_solution(&nonunique, a, &branch_cfg).map_err(|e| e.to_string())?;
            let i0 = InitialRate::PointMass(gamma.start().clone());
            let total = evaluate_action(&nonunique, &gamma, &i0)
                .map_err(|e| e.to_string())?
                .total
                .expect_finite();
            worst_branch = worst_branch.max(total);
            if total > 1e-5 {
                return Err(format!("branch a = {a}: action {total}"));
            }
        }
        Ok(format!("max flow action = {worst_flow:.1e}, max branch action = {worst_branch:.1e}"))
    })();
    finish("3", "zero-cost-flows", 5.0, started, outcome);
}

/// Criterion 4: sup-lattice |H_n f - H f| halves from n = 100 to n = 200
/// (ratio in [1.7, 2.3]) on both models for a fixed smooth quadratic f.
#[test]
fn criterion_4_generator_convergence() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        // Ehrenfest, V = 0, f(x) = 0.3x^2 + 0.1x.
        let em = free_ehrenfest();
        let f = |z: &[f64]| 0.3 * z[0] * z[0] + 0.1 * z[0];
        let sup_e = |n: u64| -> f64 {
            let mut worst: f64 = 0.0;
            for k in 0..=n {
                let x = (2.0 * k as f64 - n as f64) / n as f64;
                let state = StatePoint::cube(vec![x]).unwrap();
                let hn = hn_value(&em, n, &f, &state).unwrap();
                let h = value(&em, &state, &[0.6 * x + 0.1]).unwrap();
                worst = worst.max((hn - h).abs());
            }
            worst
        };
        let ratio_e = sup_e(100) / sup_e(200);

        // Glauber Potts d = 2 with quadratic potential, f(mu) = 0.4(mu1 - mu2)^2.
        let gm = potts_glauber(2);
        let g = |z: &[f64]| 0.4 * (z[0] - z[1]) * (z[0] - z[1]);
        let sup_g = |n: u64| -> f64 {
            let mut worst: f64 = 0.0;
            for k in 0..=n {
                let mu = vec![k as f64 / n as f64, (n - k) as f64 / n as f64];
                let state = StatePoint::simplex(mu.clone()).unwrap();
                let hn = hn_value(&gm, n, &g, &state).unwrap();
                let diff = mu[0] - mu[1];
                let grad = [0.8 * diff, -0.8 * diff];
                let h = value(&gm, &state, &grad).unwrap();
                worst = worst.max((hn - h).abs());
            }
            worst
        };
        let ratio_g = sup_g(100) / sup_g(200);

        for (name, ratio) in [("ehrenfest", ratio_e), ("glauber", ratio_g)] {
            if !(1.7..=2.3).contains(&ratio) {
                return Err(format!("{name} gap ratio {ratio}"));
            }
        }
        Ok(format!("gap ratios: ehrenfest {ratio_e:.3}, glauber {ratio_g:.3}"))
    })();
    finish("4", "generator-convergence", 5.0, started, outcome);
}

/// Criterion 5, exactly as pinned: n = 2000 paths track the exact flow
/// 0.8 e^{-2t} within sup-distance 0.05 in at least 95% of 100 replicas.
///
/// This criterion fails by a fluctuation-size argument, not an
/// implementation gap: the path fluctuates around the flow with stationary
/// std exactly 1/sqrt(n) = 0.0224 (variance rate (2/n)^2 * n(v_+ + v_-) =
/// 4/n, friction 2), so 0.05 is 2.24 sigma and the sup over a full time
/// unit crosses it with probability ~0.19. Calibrated with 10^4 replicas:
/// tube fraction 0.810 at (n=2000, delta=0.05); 0.985 at (n=4000,
/// delta=0.05); 0.935 at (n=2000, delta=0.06).
#[test]
fn criterion_5_lln_consistency() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let model = free_ehrenfest();
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        let states: Vec<StatePoint> = times
            .iter()
            .map(|&t| StatePoint::cube(vec![0.8 * (-2.0 * t).exp()]).unwrap())
            .collect();
        let reference = Trajectory::new(times, states, PathKind::PiecewiseLinear).unwrap();
        let p = estimate_tube_probability(&model, 2000, &reference, 0.05, 100, 505)
            .map_err(|e| e.to_string())?;
        if p >= 0.95 {
            Ok(format!("tube fraction = {p}"))
        } else {
            Err(format!(
                "tube fraction {p} < 0.95 (true fraction at these parameters is ~0.81; \
                 the tube radius is 2.24 path-fluctuation sigmas — see the test doc \
                 and the decisions ledger)"
            ))
        }
    })();
    finish("5", "lln-consistency", 30.0, started, outcome);
}

/// Criterion 6, exactly as pinned: uphill line 0.2 -> 0.5 over T = 0.5,
/// tube radius 0.05, n in {25, 50, 100}: decay estimates positive,
/// increasing toward the action value, largest-n within 35%.
///
/// This criterion fails, and the failure is a property of the pinned tube
/// width, not of the implementation: at delta = 0.05 the sup-norm tube
/// carries a survival cost ~ 2(v_+ + v_-) pi^2 t / (4 delta^2 n), which is
/// ~0.10 at n = 100 (measured decay 0.168 vs action 0.110, 52% off), and
/// at n = 25 the lattice spacing 2/n = 0.08 exceeds the tube half-width,
/// pushing p below Monte-Carlo reach. The same experiment at delta = 0.1
/// lands within 3% of the action (tests/oracles.rs).
#[test]
fn criterion_6_monte_carlo_ldp_cross_check() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let model = free_ehrenfest();
        let reference = Trajectory::new(
            vec![0.0, 0.5],
            vec![
                StatePoint::cube(vec![0.2]).unwrap(),
                StatePoint::cube(vec![0.5]).unwrap(),
            ],
            PathKind::PiecewiseLinear,
        )
        .unwrap();
        let i0 = InitialRate::PointMass(reference.start().clone());
        let report = ldp_rate_estimate(
            &model,
            &reference,
            0.05,
            &[25, 50, 100],
            60_000_000,
            20_260_809,
            &i0,
        )
        .map_err(|e| e.to_string())?;
        let action = report.reference_action.expect_finite();
        let detail = format!(
            "p = {:?}, decay = {:?}, action = {action:.5}",
            report.tube_probabilities, report.decay_estimates
        );
        let decays: Vec<Option<f64>> = report.decay_estimates.clone();
        if decays.iter().any(|d| d.is_none()) {
            return Err(format!("{detail}; some tubes saw no surviving path (decay absent)"));
        }
        let decays: Vec<f64> = decays.into_iter().map(|d| d.unwrap()).collect();
        if !decays.iter().all(|&d| d > 0.0) {
            return Err(format!("{detail}; decays not all positive"));
        }
        if !(decays[0] < decays[1] && decays[1] < decays[2]) {
            return Err(format!("{detail}; decays not increasing toward the action"));
        }
        let rel = (decays[2] - action).abs() / action;
        if rel > 0.35 {
            return Err(format!("{detail}; largest-n decay off by {:.0}%", rel * 100.0));
        }
        Ok(detail)
    })();
    finish("6", "monte-carlo-ldp-cross-check", 600.0, started, outcome);
}

/// Criterion 7: constants are exact resolvent fixed points; order
/// preservation and nonexpansiveness within 1e-8 over 50 random smooth
/// pairs; the comparison experiment contracts across {33, 65, 129}.
#[test]
fn criterion_7_resolvent_solver() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let model = ModelSpec::Ehrenfest(EhrenfestModel::sqrt_diverging());
        let params = SchemeParams::default();
        let grid = Grid::cube(1, 65).unwrap();

        let constant = GridFunction::constant(&grid, 1.7).unwrap();
        let fixed = solve_resolvent(&model, 0.3, &constant, &params).map_err(|e| e.to_string())?;
        for &v in fixed.f.values() {
            if (v - 1.7).abs() > 1e-12 {
                return Err(format!("constant fixed point off by {}", (v - 1.7).abs()));
            }
        }

        let mut rng = ldp_core::rng::root_rng(707);
        let mut worst_order: f64 = 0.0;
        let mut worst_exp: f64 = 0.0;
        for _ in 0..50 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.35..0.35)).collect();
            let c: f64 = rng.gen_range(0.0..0.3);
            let phase: f64 = rng.gen_range(0.0..3.0);
            let h1 = GridFunction::from_fn(&grid, |z| {
                a[0] + a[1] * (1.3 * z[0]).sin() + a[2] * (2.1 * z[0]).cos() + a[3] * z[0] * z[0]
            })
            .unwrap();
            let h2 = GridFunction::from_fn(&grid, |z| {
                a[0] + a[1] * (1.3 * z[0]).sin()
                    + a[2] * (2.1 * z[0]).cos()
                    + a[3] * z[0] * z[0]
                    + c * (1.1 + (0.7 * z[0] + phase).sin())
            })
            .unwrap();
            let f1 = solve_resolvent(&model, 0.1, &h1, &params).map_err(|e| e.to_string())?.f;
            let f2 = solve_resolvent(&model, 0.1, &h2, &params).map_err(|e| e.to_string())?.f;
            for (x, y) in f1.values().iter().zip(f2.values()) {
                worst_order = worst_order.max(x - y);
                if x - y > 1e-8 {
                    return Err(format!("order violation {}", x - y));
                }
            }
            let expansion = f1.sup_diff(&f2) - h1.sup_diff(&h2);
            worst_exp = worst_exp.max(expansion);
            if expansion > 1e-8 {
                return Err(format!("expansion {expansion}"));
            }
        }

        let h = |z: &[f64]| 0.4 * (std::f64::consts::FRAC_PI_2 * z[0]).cos();
        let plus = |_: &[f64]| 1.0;
        let minus = |_: &[f64]| -1.0;
        let inits: Vec<&(dyn Fn(&[f64]) -> f64 + Sync)> = vec![&h, &plus, &minus];
        let report = comparison_experiment(&model, 0.1, &h, &[33, 65, 129], &inits, &params)
            .map_err(|e| e.to_string())?;
        if !report.decreasing {
            return Err(format!("init spread not decreasing: {:?}", report.max_pairwise_diff));
        }
        Ok(format!(
            "worst order violation = {worst_order:.1e}, worst expansion = {worst_exp:.1e}, \
             spreads = {:?}",
            report.max_pairwise_diff
        ))
    })();
    finish("7", "resolvent-solver", 120.0, started, outcome);
}

/// Criterion 8: resolvent semigroup and Nisio DP agree within 20h in sup
/// norm on the m = 129 grid at t = 0.25.
#[test]
fn criterion_8_semigroup_equivalence() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let model = free_ehrenfest();
        let grid = Grid::cube(1, 129).unwrap();
        let params = SchemeParams::default();
        let f0 = GridFunction::from_fn(&grid, |z| {
            0.4 * (std::f64::consts::FRAC_PI_2 * z[0]).cos()
        })
        .unwrap();
        let t = 0.25;
        let semi = semigroup_via_resolvent(&model, &f0, t, 32, &params).map_err(|e| e.to_string())?;
        let dp = nisio_value_dp(&model, &f0, t, 64, 40, &params).map_err(|e| e.to_string())?;
        let diff = semi.sup_diff(&dp);
        let tol = 20.0 * grid.h();
        if diff <= tol {
            Ok(format!("sup difference = {diff:.4} <= {tol:.4}"))
        } else {
            Err(format!("sup difference {diff:.4} > {tol:.4}"))
        }
    })();
    finish("8", "semigroup-equivalence", 300.0, started, outcome);
}

/// Criterion 9: Curie-Weiss rate functions are non-increasing along flows
/// from 5 interior starts (beta in {0.5, 2}); the symmetric model relaxes
/// to I0 = 0.
#[test]
fn criterion_9_lyapunov() {
    let started = Instant::now();
    let outcome = (|| -> Result<String, String> {
        let starts = [
            vec![0.9, 0.1],
            vec![0.7, 0.3],
            vec![0.55, 0.45],
            vec![0.35, 0.65],
            vec![0.15, 0.85],
        ];
        let cfg = FlowConfig::new(1e-3, 30.0, Method::Rk4).unwrap();
        let tolerance = integrator_tolerance(&cfg, 1.0);
        let mut worst: f64 = 0.0;
        for beta in [0.5, 2.0] {
            let model = ModelSpec::Glauber(
                GlauberModel::from_potential(
                    vec![vec![1.0; 2]; 2],
                    SmoothFn::curie_weiss_simplex(beta),
                )
                .unwrap(),
            );
            for start in &starts {
                let sp = match StatePoint::simplex(start.clone()).unwrap() {
                    StatePoint::Simplex(p) => p,
                    _ => unreachable!(),
                };
                let report =
                    lyapunov_check(&model, &sp, &cfg, tolerance).map_err(|e| e.to_string())?;
                worst = worst.max(report.max_increase);
                if !report.monotone {
                    return Err(format!(
                        "beta {beta}, start {start:?}: max increase {} > {tolerance:.1e}",
                        report.max_increase
                    ));
                }
                // The limiting value equals I0 at the reached fixed point
                // (independently coded entropy + potential formula).
                let settled = integrate_mkv(&model, &StatePoint::Simplex(sp.clone()), &cfg)
                    .map_err(|e| e.to_string())?;
                let z = settled.trajectory.states().last().unwrap().coords().to_vec();
                let entropy: f64 = z
                    .iter()
                    .map(|&m| if m > 0.0 { m * (2.0 * m).ln() } else { 0.0 })
                    .sum();
                let i0_fixed = entropy - 0.5 * beta * (z[0] - z[1]) * (z[0] - z[1]);
                let last = *report.values.last().unwrap();
                if (last - i0_fixed).abs() > 1e-6 {
                    return Err(format!(
                        "settled value {last} vs rate at fixed point {i0_fixed}"
                    ));
                }
            }
        }
        // Symmetric model: relative entropy relaxes to 0.
        let symmetric = ModelSpec::Glauber(
            GlauberModel::from_potential(vec![vec![1.0; 2]; 2], SmoothFn::zero()).unwrap(),
        );
        let cfg20 = FlowConfig::new(1e-3, 20.0, Method::Rk4).unwrap();
        let sp = match StatePoint::simplex(vec![0.7, 0.3]).unwrap() {
            StatePoint::Simplex(p) => p,
            _ => unreachable!(),
        };
        let report = lyapunov_check(&symmetric, &sp, &cfg20, integrator_tolerance(&cfg20, 1.0))
            .map_err(|e| e.to_string())?;
        let last = report.values.last().unwrap().abs();
        if !report.monotone || last > 1e-6 {
            return Err(format!("symmetric model: final I0 = {last}"));
        }
        Ok(format!("max forward increase = {worst:.1e}, symmetric final I0 = {last:.1e}"))
    })();
    finish("9", "lyapunov", 10.0, started, outcome);
}

// Criterion 10 (CLI determinism) lives in the CLI crate's acceptance
// suite, next to the binary it exercises.
