//! Time-indexed paths through a state space.

use thiserror::Error;

use crate::state::{StateError, StatePoint};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("a trajectory needs at least one sample")]
    Empty,
    #[error("times and states have different lengths ({times} vs {states})")]
    LengthMismatch { times: usize, states: usize },
    #[error("times must be strictly increasing (t[{index}] = {value})")]
    NotIncreasing { index: usize, value: f64 },
    #[error("states mix kinds or dimensions at index {0}")]
    InconsistentStates(usize),
    #[error(transparent)]
    State(#[from] StateError),
}

/// How to read values between samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// Jump-process skeleton: the path holds the last state until the next
    /// sample time.
    PiecewiseConstant,
    /// Sampled continuous path: linear interpolation between samples.
    PiecewiseLinear,
}

/// A path: strictly increasing sample times and matching states, all in the
/// same state space.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StatePoint>,
    kind: PathKind,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<StatePoint>,
        kind: PathKind,
    ) -> Result<Self, TrajectoryError> {
        if times.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        if times.len() != states.len() {
            return Err(TrajectoryError::LengthMismatch {
                times: times.len(),
                states: states.len(),
            });
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) {
                return Err(TrajectoryError::NotIncreasing { index: i, value: times[i] });
            }
        }
        let first = &states[0];
        for (i, s) in states.iter().enumerate().skip(1) {
            if s.is_cube() != first.is_cube() || s.dim() != first.dim() {
                return Err(TrajectoryError::InconsistentStates(i));
            }
        }
        Ok(Trajectory { times, states, kind })
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one sample
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StatePoint] {
        &self.states
    }

    pub fn start(&self) -> &StatePoint {
        &self.states[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Path value at time `t` (clamped to the sampled range), as raw
    /// coordinates.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let times = &self.times;
        if t <= times[0] {
            return self.states[0].coords().to_vec();
        }
        if t >= *times.last().unwrap() {
            return self.states.last().unwrap().coords().to_vec();
        }
        // Index of the last sample time <= t.
        let idx = match times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        match self.kind {
            PathKind::PiecewiseConstant => self.states[idx].coords().to_vec(),
            PathKind::PiecewiseLinear => {
                let t0 = times[idx];
                let t1 = times[idx + 1];
                let w = (t - t0) / (t1 - t0);
                let a = self.states[idx].coords();
                let b = self.states[idx + 1].coords();
                a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(v: f64) -> StatePoint {
        StatePoint::cube(vec![v]).unwrap()
    }

    #[test]
    fn validates_monotone_times() {
        let t = Trajectory::new(
            vec![0.0, 1.0, 1.0],
            vec![cube(0.0), cube(0.1), cube(0.2)],
            PathKind::PiecewiseLinear,
        );
        assert!(matches!(t, Err(TrajectoryError::NotIncreasing { .. })));
    }

    #[test]
    fn interpolates_linearly() {
        let t = Trajectory::new(
            vec![0.0, 2.0],
            vec![cube(0.0), cube(1.0)],
            PathKind::PiecewiseLinear,
        )
        .unwrap();
        assert!((t.eval(0.5)[0] - 0.25).abs() < 1e-15);
        assert_eq!(t.eval(5.0)[0], 1.0);
    }

    #[test]
    fn piecewise_constant_holds_left_value() {
        let t = Trajectory::new(
            vec![0.0, 1.0],
            vec![cube(0.0), cube(1.0)],
            PathKind::PiecewiseConstant,
        )
        .unwrap();
        assert_eq!(t.eval(0.999)[0], 0.0);
        assert_eq!(t.eval(1.0)[0], 1.0);
    }
}
