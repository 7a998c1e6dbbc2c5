//! Energy-variation step-size control:
//! `dt = max(dt_min, dt_max / sqrt(1 + gamma E'^2))`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid adaptive parameters: {0}")]
pub struct AdaptiveError(pub String);

/// How `E'(t_n)` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergySlope {
    /// `(E_n - E_{n-1}) / dt_n` on the original energy.
    #[default]
    BackwardDifference,
    /// `-I_2 / dt_n`, the dissipation the scheme itself booked for the step.
    Dissipation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub dt_min: f64,
    pub dt_max: f64,
    pub gamma: f64,
    pub slope: EnergySlope,
}

impl AdaptiveParams {
    pub fn new(dt_min: f64, dt_max: f64, gamma: f64) -> Result<Self, AdaptiveError> {
        let p = Self {
            dt_min,
            dt_max,
            gamma,
            slope: EnergySlope::BackwardDifference,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_slope(mut self, slope: EnergySlope) -> Self {
        self.slope = slope;
        self
    }

    pub fn validate(&self) -> Result<(), AdaptiveError> {
        if !(self.dt_min.is_finite() && self.dt_min > 0.0) {
            return Err(AdaptiveError(format!("dt_min must be positive, got {}", self.dt_min)));
        }
        if !(self.dt_max.is_finite() && self.dt_max >= self.dt_min) {
            return Err(AdaptiveError(format!(
                "dt_max must be >= dt_min ({}), got {}",
                self.dt_min, self.dt_max
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(AdaptiveError(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Step size for an energy slope estimate `e_prime`.
    pub fn dt_for_slope(&self, e_prime: f64) -> f64 {
        if !e_prime.is_finite() {
            return self.dt_min;
        }
        let dt = self.dt_max / (1.0 + self.gamma * e_prime * e_prime).sqrt();
        dt.clamp(self.dt_min, self.dt_max)
    }
}

/// Backward-difference controller. Degenerate input (non-finite energies,
/// nonpositive `dt_prev`) yields `dt_min`.
pub fn next_dt(params: &AdaptiveParams, e_curr: f64, e_prev: f64, dt_prev: f64) -> f64 {
    if !(dt_prev > 0.0 && dt_prev.is_finite()) {
        return params.dt_min;
    }
    params.dt_for_slope((e_curr - e_prev) / dt_prev)
}
