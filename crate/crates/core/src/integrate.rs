//! Fixed-step classical Runge-Kutta integration with per-stage inputs.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Evaluation point of an RK4 stage within `[t, t + dt]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Start,
    Mid,
    End,
}

impl Stage {
    /// Offset of the stage from the start of the step.
    pub fn offset(self, dt: f64) -> f64 {
        match self {
            Stage::Start => 0.0,
            Stage::Mid => 0.5 * dt,
            Stage::End => dt,
        }
    }
}

/// Exogenous inputs sampled at the start, midpoint and end of a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageInputs<T> {
    pub start: T,
    pub mid: T,
    pub end: T,
}

impl<T: Copy> StageInputs<T> {
    /// Zero-order hold: the same input at every stage.
    pub fn held(value: T) -> Self {
        Self {
            start: value,
            mid: value,
            end: value,
        }
    }

    pub fn at(&self, stage: Stage) -> &T {
        match stage {
            Stage::Start => &self.start,
            Stage::Mid => &self.mid,
            Stage::End => &self.end,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> StageInputs<U> {
        StageInputs {
            start: f(&self.start),
            mid: f(&self.mid),
            end: f(&self.end),
        }
    }
}

pub(crate) fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(dt))
    }
}

/// One RK4 step of `ẋ = f(stage, x)`.
pub fn rk4<const N: usize, F>(x: &SVector<f64, N>, dt: f64, mut f: F) -> Result<SVector<f64, N>>
where
    F: FnMut(Stage, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    check_step(dt)?;
    let k1 = f(Stage::Start, x)?;
    let k2 = f(Stage::Mid, &(x + k1 * (0.5 * dt)))?;
    let k3 = f(Stage::Mid, &(x + k2 * (0.5 * dt)))?;
    let k4 = f(Stage::End, &(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Explicit Euler, used as a fine-step reference in tests.
pub fn euler<const N: usize, F>(x: &SVector<f64, N>, dt: f64, mut f: F) -> Result<SVector<f64, N>>
where
    F: FnMut(Stage, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    check_step(dt)?;
    Ok(x + f(Stage::Start, x)? * dt)
}
