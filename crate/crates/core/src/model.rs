//! Model definitions: rate fields and finite-n jump kernels for the two
//! mean-field families.
//!
//! An Ehrenfest model on `[-1,1]^d` is described by limiting rate fields
//! `v_±^i ≥ 0` (per-coordinate up/down flip intensities) together with
//! finite-n per-spin rates `r_{n,±}^i`; the empirical magnetisation jumps by
//! `±2e_i/n` with total rate `n (1∓x_i)/2 · r_{n,±}^i(x)`.
//!
//! A Glauber model on the simplex is described by a limiting field
//! `v(a,b,μ) ≥ 0` (mass flow from `a` to `b`) and a finite-n kernel
//! `r_n(a,b,μ)`; the empirical measure jumps by `(δ_b - δ_a)/n` with total
//! rate `n μ(a) r_n(a,b,μ)`.
//!
//! Rates must vanish on outward faces (`v_+^i = 0` where `x_i = 1`,
//! `v(a,·,μ) = 0` where `μ(a) = 0`), which keeps the dynamics inside the
//! state space. All constructors here produce fields with that tangency
//! property. Models are immutable after construction and the evaluators are
//! pure, so values can be shared freely across threads.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::StatePoint;

/// Real-valued evaluator on raw state coordinates.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Gradient evaluator on raw state coordinates.
pub type GradField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Finite-n per-spin rate: arguments `(n, x)`.
pub type RateNField = Arc<dyn Fn(u64, &[f64]) -> f64 + Send + Sync>;
/// Pair rate on the simplex: arguments `(a, b, mu)`.
pub type PairField = Arc<dyn Fn(usize, usize, &[f64]) -> f64 + Send + Sync>;
/// Finite-n pair kernel: arguments `(n, a, b, mu)`.
pub type PairRateNField = Arc<dyn Fn(u64, usize, usize, &[f64]) -> f64 + Send + Sync>;

/// A continuously differentiable function given by value and gradient
/// evaluators. Used for interaction potentials and for the test functions
/// `g` driving characteristic flows.
#[derive(Clone)]
pub struct SmoothFn {
    pub value: ScalarField,
    pub grad: GradField,
}

impl SmoothFn {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        SmoothFn { value: Arc::new(value), grad: Arc::new(grad) }
    }

    pub fn zero() -> Self {
        SmoothFn::new(|_| 0.0, |z| vec![0.0; z.len()])
    }

    /// `V(z) = ½ Σ z_i²`.
    pub fn quadratic() -> Self {
        SmoothFn::new(
            |z| 0.5 * z.iter().map(|v| v * v).sum::<f64>(),
            |z| z.to_vec(),
        )
    }

    /// Ferromagnetic mean-field potential `V(x) = -(β/2) Σ x_i²` on the cube.
    pub fn curie_weiss_cube(beta: f64) -> Self {
        SmoothFn::new(
            move |x| -0.5 * beta * x.iter().map(|v| v * v).sum::<f64>(),
            move |x| x.iter().map(|v| -beta * v).collect(),
        )
    }

    /// Two-state Curie-Weiss potential `V(μ) = -(β/2)(μ_1 - μ_2)²` on the
    /// simplex.
    pub fn curie_weiss_simplex(beta: f64) -> Self {
        SmoothFn::new(
            move |mu| {
                let m = mu[0] - mu[1];
                -0.5 * beta * m * m
            },
            move |mu| {
                let m = mu[0] - mu[1];
                vec![-beta * m, beta * m]
            },
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension must be positive, got {0}")]
    BadDimension(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("base rate r({a},{b}) = {value} is negative")]
    NegativeBaseRate { a: usize, b: usize, value: f64 },
    #[error("base-rate table must be {d}x{d}")]
    BadBaseRateShape { d: usize },
    #[error("preset `{preset}` is not defined for model `{model}`")]
    BadPreset { model: String, preset: String },
    #[error("preset `{0}` requires `{1}` in the config")]
    MissingField(String, String),
    #[error("curie_weiss potential on the simplex requires d = 2, got {0}")]
    CurieWeissDimension(usize),
}

/// Generalized Ehrenfest model on the cube `[-1,1]^d`.
pub struct EhrenfestModel {
    d: usize,
    v_plus: Vec<ScalarField>,
    v_minus: Vec<ScalarField>,
    rn_plus: Vec<RateNField>,
    rn_minus: Vec<RateNField>,
    potential: Option<SmoothFn>,
    /// Radius of the neighbourhood on which the non-uniqueness rates hold
    /// exactly; `None` for other constructions.
    nonunique_radius: Option<f64>,
    label: String,
}

impl EhrenfestModel {
    /// Potential-tilted spin flips: `v_+^i = (1-x_i)/2 · e^{-∇_i V}`,
    /// `v_-^i = (1+x_i)/2 · e^{+∇_i V}`, with finite-n per-spin rates
    /// `r_{n,±}^i(x) = exp{-n/2 (V(x ± 2e_i/n) - V(x))}`.
    pub fn from_potential(potential: SmoothFn, d: usize) -> Result<Self, ModelError> {
        if d == 0 {
            return Err(ModelError::BadDimension(d));
        }
        let mut v_plus: Vec<ScalarField> = Vec::with_capacity(d);
        let mut v_minus: Vec<ScalarField> = Vec::with_capacity(d);
        let mut rn_plus: Vec<RateNField> = Vec::with_capacity(d);
        let mut rn_minus: Vec<RateNField> = Vec::with_capacity(d);
        for i in 0..d {
            let grad = potential.grad.clone();
            v_plus.push(Arc::new(move |x: &[f64]| {
                0.5 * (1.0 - x[i]) * (-grad(x)[i]).exp()
            }));
            let grad = potential.grad.clone();
            v_minus.push(Arc::new(move |x: &[f64]| {
                0.5 * (1.0 + x[i]) * grad(x)[i].exp()
            }));
            let value = potential.value.clone();
            rn_plus.push(Arc::new(move |n: u64, x: &[f64]| {
                let mut shifted = x.to_vec();
                shifted[i] += 2.0 / n as f64;
                (-(n as f64) * 0.5 * (value(&shifted) - value(x))).exp()
            }));
            let value = potential.value.clone();
            rn_minus.push(Arc::new(move |n: u64, x: &[f64]| {
                let mut shifted = x.to_vec();
                shifted[i] -= 2.0 / n as f64;
                (-(n as f64) * 0.5 * (value(&shifted) - value(x))).exp()
            }));
        }
        Ok(EhrenfestModel {
            d,
            v_plus,
            v_minus,
            rn_plus,
            rn_minus,
            potential: Some(potential),
            nonunique_radius: None,
            label: "ehrenfest_potential".to_string(),
        })
    }

    /// One-dimensional model with diverging per-spin rates:
    /// `v_±(x) = √(1∓x)` and truncated finite-n rates
    /// `r_{n,±}(x) = (2/√(1∓x)) ∧ n`.
    pub fn sqrt_diverging() -> Self {
        let v_plus: ScalarField = Arc::new(|x: &[f64]| (1.0 - x[0]).max(0.0).sqrt());
        let v_minus: ScalarField = Arc::new(|x: &[f64]| (1.0 + x[0]).max(0.0).sqrt());
        let rn_plus: RateNField = Arc::new(|n: u64, x: &[f64]| {
            let s = (1.0 - x[0]).max(0.0).sqrt();
            if s == 0.0 {
                n as f64
            } else {
                (2.0 / s).min(n as f64)
            }
        });
        let rn_minus: RateNField = Arc::new(|n: u64, x: &[f64]| {
            let s = (1.0 + x[0]).max(0.0).sqrt();
            if s == 0.0 {
                n as f64
            } else {
                (2.0 / s).min(n as f64)
            }
        });
        EhrenfestModel {
            d: 1,
            v_plus: vec![v_plus],
            v_minus: vec![v_minus],
            rn_plus: vec![rn_plus],
            rn_minus: vec![rn_minus],
            potential: None,
            nonunique_radius: None,
            label: "ehrenfest_sqrt".to_string(),
        }
    }

    /// One-dimensional model whose zero-cost dynamics `ẋ = 2√x` branches:
    /// on `[-ε, ε]` the rates are exactly `v_+(x) = 1 + √(x⁺)`, `v_-(x) = 1`.
    /// Outside that neighbourhood they are tapered by a smoothstep so that
    /// `v_+(1) = 0` and `v_-(-1) = 0`.
    pub fn nonunique(epsilon: f64) -> Result<Self, ModelError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ModelError::BadEpsilon(epsilon));
        }
        // C^1 taper: 1 at the edge of the neighbourhood, 0 at the face.
        fn smoothstep(u: f64) -> f64 {
            let u = u.clamp(0.0, 1.0);
            u * u * (3.0 - 2.0 * u)
        }
        let eps = epsilon;
        let core_plus = move |x: f64| 1.0 + x.max(0.0).sqrt();
        let v_plus: ScalarField = Arc::new(move |x: &[f64]| {
            let x = x[0];
            if x <= eps {
                core_plus(x)
            } else {
                core_plus(x) * smoothstep((1.0 - x) / (1.0 - eps))
            }
        });
        let v_minus: ScalarField = Arc::new(move |x: &[f64]| {
            let x = x[0];
            if x >= -eps {
                1.0
            } else {
                smoothstep((1.0 + x) / (1.0 - eps))
            }
        });
        let vp = v_plus.clone();
        let rn_plus: RateNField = Arc::new(move |n: u64, x: &[f64]| {
            let face = 0.5 * (1.0 - x[0]);
            if face <= 0.0 {
                n as f64
            } else {
                (vp(x) / face).min(n as f64)
            }
        });
        let vm = v_minus.clone();
        let rn_minus: RateNField = Arc::new(move |n: u64, x: &[f64]| {
            let face = 0.5 * (1.0 + x[0]);
            if face <= 0.0 {
                n as f64
            } else {
                (vm(x) / face).min(n as f64)
            }
        });
        Ok(EhrenfestModel {
            d: 1,
            v_plus: vec![v_plus],
            v_minus: vec![v_minus],
            rn_plus: vec![rn_plus],
            rn_minus: vec![rn_minus],
            potential: None,
            nonunique_radius: Some(epsilon),
            label: "ehrenfest_nonunique".to_string(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn v_plus(&self, i: usize, x: &[f64]) -> f64 {
        (self.v_plus[i])(x)
    }

    pub fn v_minus(&self, i: usize, x: &[f64]) -> f64 {
        (self.v_minus[i])(x)
    }

    pub fn rn_plus(&self, n: u64, i: usize, x: &[f64]) -> f64 {
        (self.rn_plus[i])(n, x)
    }

    pub fn rn_minus(&self, n: u64, i: usize, x: &[f64]) -> f64 {
        (self.rn_minus[i])(n, x)
    }

    pub fn potential(&self) -> Option<&SmoothFn> {
        self.potential.as_ref()
    }

    /// Radius of the exact non-uniqueness neighbourhood, if this model was
    /// built by [`EhrenfestModel::nonunique`].
    pub fn nonunique_radius(&self) -> Option<f64> {
        self.nonunique_radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Mean-field Glauber model on the probability simplex over `d` states.
pub struct GlauberModel {
    d: usize,
    v: PairField,
    rn: PairRateNField,
    potential: Option<SmoothFn>,
    base_rates: Option<Vec<Vec<f64>>>,
    label: String,
}

impl GlauberModel {
    /// Potential-tilted jumps with base rates `r(a,b)`:
    /// `v(a,b,μ) = μ(a) r(a,b) exp{½∇_a V(μ) - ½∇_b V(μ)}` and
    /// `r_n(a,b,μ) = r(a,b) exp{-n/2 (V(μ - δ_a/n + δ_b/n) - V(μ))}`.
    pub fn from_potential(
        base_rates: Vec<Vec<f64>>,
        potential: SmoothFn,
    ) -> Result<Self, ModelError> {
        let d = base_rates.len();
        if d == 0 {
            return Err(ModelError::BadDimension(0));
        }
        for (a, row) in base_rates.iter().enumerate() {
            if row.len() != d {
                return Err(ModelError::BadBaseRateShape { d });
            }
            for (b, &r) in row.iter().enumerate() {
                if !(r >= 0.0) {
                    return Err(ModelError::NegativeBaseRate { a, b, value: r });
                }
            }
        }
        let rates = base_rates.clone();
        let grad = potential.grad.clone();
        let v: PairField = Arc::new(move |a: usize, b: usize, mu: &[f64]| {
            let g = grad(mu);
            mu[a] * rates[a][b] * (0.5 * g[a] - 0.5 * g[b]).exp()
        });
        let rates = base_rates.clone();
        let value = potential.value.clone();
        let rn: PairRateNField = Arc::new(move |n: u64, a: usize, b: usize, mu: &[f64]| {
            let step = 1.0 / n as f64;
            let mut shifted = mu.to_vec();
            shifted[a] -= step;
            shifted[b] += step;
            rates[a][b] * (-(n as f64) * 0.5 * (value(&shifted) - value(mu))).exp()
        });
        Ok(GlauberModel {
            d,
            v,
            rn,
            potential: Some(potential),
            base_rates: Some(base_rates),
            label: "glauber_potts".to_string(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn v(&self, a: usize, b: usize, mu: &[f64]) -> f64 {
        (self.v)(a, b, mu)
    }

    pub fn rn(&self, n: u64, a: usize, b: usize, mu: &[f64]) -> f64 {
        (self.rn)(n, a, b, mu)
    }

    pub fn potential(&self) -> Option<&SmoothFn> {
        self.potential.as_ref()
    }

    pub fn base_rates(&self) -> Option<&Vec<Vec<f64>>> {
        self.base_rates.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// One of the two model families.
pub enum ModelSpec {
    Ehrenfest(EhrenfestModel),
    Glauber(GlauberModel),
}

impl ModelSpec {
    pub fn d(&self) -> usize {
        match self {
            ModelSpec::Ehrenfest(m) => m.d(),
            ModelSpec::Glauber(m) => m.d(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            ModelSpec::Ehrenfest(m) => m.label(),
            ModelSpec::Glauber(m) => m.label(),
        }
    }

    /// Whether a state point belongs to this model's state space.
    pub fn accepts(&self, state: &StatePoint) -> bool {
        match self {
            ModelSpec::Ehrenfest(m) => state.is_cube() && state.dim() == m.d(),
            ModelSpec::Glauber(m) => state.is_simplex() && state.dim() == m.d(),
        }
    }
}

/// JSON model configuration accepted by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelFamily,
    pub d: usize,
    pub preset: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_rates: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Ehrenfest,
    Glauber,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Potential,
    Sqrt,
    Nonunique,
    Potts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    Quadratic,
    CurieWeiss,
}

impl ModelConfig {
    /// Validate and build the configured model. A missing `potential` block
    /// defaults to `V ≡ 0`.
    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        if self.d == 0 {
            return Err(ModelError::BadDimension(0));
        }
        match (self.model, self.preset) {
            (ModelFamily::Ehrenfest, Preset::Potential) => {
                let potential = self.potential_for_cube()?;
                Ok(ModelSpec::Ehrenfest(EhrenfestModel::from_potential(
                    potential, self.d,
                )?))
            }
            (ModelFamily::Ehrenfest, Preset::Sqrt) => {
                if self.d != 1 {
                    return Err(ModelError::BadDimension(self.d));
                }
                Ok(ModelSpec::Ehrenfest(EhrenfestModel::sqrt_diverging()))
            }
            (ModelFamily::Ehrenfest, Preset::Nonunique) => {
                if self.d != 1 {
                    return Err(ModelError::BadDimension(self.d));
                }
                let eps = self.epsilon.ok_or_else(|| {
                    ModelError::MissingField("nonunique".into(), "epsilon".into())
                })?;
                Ok(ModelSpec::Ehrenfest(EhrenfestModel::nonunique(eps)?))
            }
            (ModelFamily::Glauber, Preset::Potts) => {
                let potential = self.potential_for_simplex()?;
                let rates = match &self.base_rates {
                    Some(r) => r.clone(),
                    None => vec![vec![1.0; self.d]; self.d],
                };
                if rates.len() != self.d {
                    return Err(ModelError::BadBaseRateShape { d: self.d });
                }
                Ok(ModelSpec::Glauber(GlauberModel::from_potential(
                    rates, potential,
                )?))
            }
            (model, preset) => Err(ModelError::BadPreset {
                model: format!("{model:?}").to_lowercase(),
                preset: format!("{preset:?}").to_lowercase(),
            }),
        }
    }

    fn potential_for_cube(&self) -> Result<SmoothFn, ModelError> {
        match &self.potential {
            None => Ok(SmoothFn::zero()),
            Some(p) => match p.kind {
                PotentialKind::Zero => Ok(SmoothFn::zero()),
                PotentialKind::Quadratic => Ok(SmoothFn::quadratic()),
                PotentialKind::CurieWeiss => {
                    let beta = p.beta.ok_or_else(|| {
                        ModelError::MissingField("curie_weiss".into(), "beta".into())
                    })?;
                    Ok(SmoothFn::curie_weiss_cube(beta))
                }
            },
        }
    }

    fn potential_for_simplex(&self) -> Result<SmoothFn, ModelError> {
        match &self.potential {
            None => Ok(SmoothFn::zero()),
            Some(p) => match p.kind {
                PotentialKind::Zero => Ok(SmoothFn::zero()),
                PotentialKind::Quadratic => Ok(SmoothFn::quadratic()),
                PotentialKind::CurieWeiss => {
                    if self.d != 2 {
                        return Err(ModelError::CurieWeissDimension(self.d));
                    }
                    let beta = p.beta.ok_or_else(|| {
                        ModelError::MissingField("curie_weiss".into(), "beta".into())
                    })?;
                    Ok(SmoothFn::curie_weiss_simplex(beta))
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn free_1d() -> EhrenfestModel {
        EhrenfestModel::from_potential(SmoothFn::zero(), 1).unwrap()
    }

    #[test]
    fn potential_free_rates() {
        let m = free_1d();
        let x = [0.4];
        assert!((m.v_plus(0, &x) - 0.3).abs() < 1e-15);
        assert!((m.v_minus(0, &x) - 0.7).abs() < 1e-15);
        assert_eq!(m.v_plus(0, &[1.0]), 0.0);
        assert_eq!(m.v_minus(0, &[-1.0]), 0.0);
    }

    #[test]
    fn quadratic_potential_rates_at_origin() {
        let m = EhrenfestModel::from_potential(SmoothFn::quadratic(), 1).unwrap();
        assert!((m.v_plus(0, &[0.0]) - 0.5).abs() < 1e-15);
        assert!((m.v_minus(0, &[0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_zero_rejected() {
        assert!(EhrenfestModel::from_potential(SmoothFn::zero(), 0).is_err());
    }

    #[test]
    fn sqrt_model_values() {
        let m = EhrenfestModel::sqrt_diverging();
        assert!((m.v_plus(0, &[0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(m.v_plus(0, &[1.0]), 0.0);
        // Truncation is active at the face: (2/√0) ∧ 4 = 4.
        assert_eq!(m.rn_plus(4, 0, &[1.0]), 4.0);
    }

    #[test]
    fn nonunique_model_values() {
        let m = EhrenfestModel::nonunique(0.5).unwrap();
        assert!((m.v_plus(0, &[0.25]) - 1.5).abs() < 1e-15);
        assert!((m.v_plus(0, &[-0.125]) - 1.0).abs() < 1e-15);
        assert!((m.v_minus(0, &[-0.125]) - 1.0).abs() < 1e-15);
        // Drift vanishes at the origin: 2[v_+ - v_-] = 0.
        assert_eq!(m.v_plus(0, &[0.0]), m.v_minus(0, &[0.0]));
        // Tangency at the faces survives the extension.
        assert_eq!(m.v_plus(0, &[1.0]), 0.0);
        assert_eq!(m.v_minus(0, &[-1.0]), 0.0);
        assert!(EhrenfestModel::nonunique(0.0).is_err());
        assert!(EhrenfestModel::nonunique(1.0).is_err());
    }

    #[test]
    fn glauber_rates() {
        let m = GlauberModel::from_potential(vec![vec![1.0; 2]; 2], SmoothFn::zero()).unwrap();
        assert!((m.v(0, 1, &[0.5, 0.5]) - 0.5).abs() < 1e-15);
        let mu = [0.3, 0.7];
        assert!((m.v(0, 1, &mu) - 0.3).abs() < 1e-15);
        assert!((m.v(1, 0, &mu) - 0.7).abs() < 1e-15);
        assert_eq!(m.v(0, 1, &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn negative_base_rate_rejected() {
        let r = vec![vec![1.0, -0.5], vec![1.0, 1.0]];
        assert!(matches!(
            GlauberModel::from_potential(r, SmoothFn::zero()),
            Err(ModelError::NegativeBaseRate { .. })
        ));
    }

    #[test]
    fn face_tangency_at_random_face_points() {
        let mut rng = crate::rng::root_rng(11);
        let cube = EhrenfestModel::from_potential(SmoothFn::quadratic(), 3).unwrap();
        let glauber =
            GlauberModel::from_potential(vec![vec![1.0; 3]; 3], SmoothFn::quadratic()).unwrap();
        for _ in 0..100 {
            let i = rng.gen_range(0..3);
            let mut x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            x[i] = 1.0;
            assert_eq!(cube.v_plus(i, &x), 0.0, "v_+ must vanish on x_i = 1");
            x[i] = -1.0;
            assert_eq!(cube.v_minus(i, &x), 0.0, "v_- must vanish on x_i = -1");

            let a = rng.gen_range(0..3);
            let w: f64 = rng.gen_range(0.0..1.0);
            let mut mu = vec![0.0; 3];
            let others: Vec<usize> = (0..3).filter(|&k| k != a).collect();
            mu[others[0]] = w;
            mu[others[1]] = 1.0 - w;
            for b in 0..3 {
                assert_eq!(glauber.v(a, b, &mu), 0.0, "v(a,·) must vanish on mu(a) = 0");
            }
        }
    }

    #[test]
    fn rates_finite_and_nonnegative_at_random_states() {
        let mut rng = crate::rng::root_rng(5);
        let models = [
            ModelSpec::Ehrenfest(EhrenfestModel::from_potential(SmoothFn::quadratic(), 2).unwrap()),
            ModelSpec::Ehrenfest(EhrenfestModel::sqrt_diverging()),
            ModelSpec::Ehrenfest(EhrenfestModel::nonunique(0.5).unwrap()),
            ModelSpec::Glauber(
                GlauberModel::from_potential(vec![vec![2.0; 2]; 2], SmoothFn::curie_weiss_simplex(1.5))
                    .unwrap(),
            ),
        ];
        for model in &models {
            for _ in 0..200 {
                match model {
                    ModelSpec::Ehrenfest(m) => {
                        let x: Vec<f64> = (0..m.d()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                        for i in 0..m.d() {
                            for val in [
                                m.v_plus(i, &x),
                                m.v_minus(i, &x),
                                m.rn_plus(100, i, &x),
                                m.rn_minus(100, i, &x),
                            ] {
                                assert!(val.is_finite() && val >= 0.0, "rate {val} at {x:?}");
                            }
                        }
                    }
                    ModelSpec::Glauber(m) => {
                        let raw: Vec<f64> = (0..m.d()).map(|_| rng.gen_range(0.0..1.0)).collect();
                        let sum: f64 = raw.iter().sum();
                        let mu: Vec<f64> = raw.iter().map(|v| v / sum).collect();
                        for a in 0..m.d() {
                            for b in 0..m.d() {
                                let v = m.v(a, b, &mu);
                                let r = m.rn(100, a, b, &mu);
                                assert!(v.is_finite() && v >= 0.0);
                                assert!(r.is_finite() && r >= 0.0);
                            }
                        }
                    }
                }
            }
        }
    }

    /// The finite-n rates converge to the limiting fields: the sup over a
    /// state grid of |(1∓x_i)/2 · r_{n,±}^i - v_±^i| (and the Glauber
    /// analogue) shrinks as n grows.
    #[test]
    fn finite_n_rates_converge_to_limits() {
        let m = EhrenfestModel::from_potential(SmoothFn::quadratic(), 1).unwrap();
        let sup_gap = |n: u64| -> f64 {
            let mut worst: f64 = 0.0;
            for k in 0..=60 {
                let x = [-1.0 + 2.0 * k as f64 / 60.0];
                let plus = (0.5 * (1.0 - x[0]) * m.rn_plus(n, 0, &x) - m.v_plus(0, &x)).abs();
                let minus = (0.5 * (1.0 + x[0]) * m.rn_minus(n, 0, &x) - m.v_minus(0, &x)).abs();
                worst = worst.max(plus).max(minus);
            }
            worst
        };
        let gaps: Vec<f64> = [10, 100, 1000].iter().map(|&n| sup_gap(n)).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");

        let g = GlauberModel::from_potential(vec![vec![1.0; 2]; 2], SmoothFn::quadratic()).unwrap();
        let sup_gap_g = |n: u64| -> f64 {
            let mut worst: f64 = 0.0;
            for k in 0..=60 {
                let mu = [k as f64 / 60.0, 1.0 - k as f64 / 60.0];
                for a in 0..2 {
                    for b in 0..2 {
                        if a == b {
                            continue;
                        }
                        let gap = (mu[a] * g.rn(n, a, b, &mu) - g.v(a, b, &mu)).abs();
                        worst = worst.max(gap);
                    }
                }
            }
            worst
        };
        let gaps: Vec<f64> = [10, 100, 1000].iter().map(|&n| sup_gap_g(n)).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg: ModelConfig = serde_json::from_str(
            r#"{"model":"ehrenfest","d":1,"preset":"potential","potential":{"kind":"quadratic"}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.build().unwrap(), ModelSpec::Ehrenfest(_)));

        let cfg: ModelConfig = serde_json::from_str(
            r#"{"model":"glauber","d":2,"preset":"potts","potential":{"kind":"curie_weiss","beta":2.0}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.build().unwrap(), ModelSpec::Glauber(_)));

        // Unknown keys rejected.
        assert!(serde_json::from_str::<ModelConfig>(
            r#"{"model":"ehrenfest","d":1,"preset":"sqrt","unknown":1}"#
        )
        .is_err());

        // Wrong family/preset combination rejected.
        let cfg: ModelConfig =
            serde_json::from_str(r#"{"model":"glauber","d":2,"preset":"sqrt"}"#).unwrap();
        assert!(cfg.build().is_err());
    }
}
