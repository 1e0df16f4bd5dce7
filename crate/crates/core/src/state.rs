//! State spaces: the cube `[-1,1]^d` of magnetisations and the probability
//! simplex over `d` states.

use thiserror::Error;

/// Mass-conservation tolerance for simplex points.
pub const SIMPLEX_MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("dimension must be positive")]
    EmptyState,
    #[error("cube coordinate {index} = {value} outside [-1, 1]")]
    OutsideCube { index: usize, value: f64 },
    #[error("simplex mass {index} = {value} is negative")]
    NegativeMass { index: usize, value: f64 },
    #[error("simplex masses sum to {sum}, not 1")]
    MassNotConserved { sum: f64 },
    #[error("coordinate {index} is not finite")]
    NotFinite { index: usize },
}

/// A point of the cube `[-1,1]^d` (per-coordinate magnetisations).
#[derive(Clone, Debug, PartialEq)]
pub struct CubePoint {
    x: Vec<f64>,
}

impl CubePoint {
    pub fn new(x: Vec<f64>) -> Result<Self, StateError> {
        if x.is_empty() {
            return Err(StateError::EmptyState);
        }
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(StateError::NotFinite { index: i });
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(StateError::OutsideCube { index: i, value: v });
            }
        }
        Ok(CubePoint { x })
    }

    /// Clamp coordinates into `[-1,1]` and construct.
    pub fn clamped(mut x: Vec<f64>) -> Result<Self, StateError> {
        for v in &mut x {
            *v = v.clamp(-1.0, 1.0);
        }
        CubePoint::new(x)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }
}

/// A point of the probability simplex over `{1,…,d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    mu: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(mu: Vec<f64>) -> Result<Self, StateError> {
        if mu.is_empty() {
            return Err(StateError::EmptyState);
        }
        let mut sum = 0.0;
        for (i, &v) in mu.iter().enumerate() {
            if !v.is_finite() {
                return Err(StateError::NotFinite { index: i });
            }
            if v < 0.0 {
                return Err(StateError::NegativeMass { index: i, value: v });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > SIMPLEX_MASS_TOL {
            return Err(StateError::MassNotConserved { sum });
        }
        Ok(SimplexPoint { mu })
    }

    /// Clamp negative masses to zero, renormalise, and construct.
    pub fn projected(mut mu: Vec<f64>) -> Result<Self, StateError> {
        let mut sum = 0.0;
        for v in &mut mu {
            if !v.is_finite() {
                return Err(StateError::NotFinite { index: 0 });
            }
            *v = v.max(0.0);
            sum += *v;
        }
        if sum <= 0.0 {
            return Err(StateError::MassNotConserved { sum });
        }
        for v in &mut mu {
            *v /= sum;
        }
        SimplexPoint::new(mu)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.mu
    }

    pub fn uniform(d: usize) -> Result<Self, StateError> {
        if d == 0 {
            return Err(StateError::EmptyState);
        }
        SimplexPoint::new(vec![1.0 / d as f64; d])
    }
}

/// A point of either state space.
#[derive(Clone, Debug, PartialEq)]
pub enum StatePoint {
    Cube(CubePoint),
    Simplex(SimplexPoint),
}

impl StatePoint {
    pub fn cube(x: Vec<f64>) -> Result<Self, StateError> {
        Ok(StatePoint::Cube(CubePoint::new(x)?))
    }

    pub fn simplex(mu: Vec<f64>) -> Result<Self, StateError> {
        Ok(StatePoint::Simplex(SimplexPoint::new(mu)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            StatePoint::Cube(p) => p.dim(),
            StatePoint::Simplex(p) => p.dim(),
        }
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            StatePoint::Cube(p) => p.coords(),
            StatePoint::Simplex(p) => p.masses(),
        }
    }

    pub fn is_cube(&self) -> bool {
        matches!(self, StatePoint::Cube(_))
    }

    pub fn is_simplex(&self) -> bool {
        matches!(self, StatePoint::Simplex(_))
    }
}

/// Sup-norm distance between coordinate vectors.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
