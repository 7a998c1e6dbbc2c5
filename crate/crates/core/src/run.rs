//! Time integration driver: bootstrap ladder, fixed or adaptive stepping,
//! snapshots and the energy ledger.

use ndarray::Array2;
use thiserror::Error;

use crate::adaptive::{AdaptiveParams, EnergySlope};
use crate::etd::MAX_ORDER;
use crate::models::GradientFlow;
use crate::solver::{EnergyLedgerRow, SolverError, SpectralState, StepHistory, TdsrSolver};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepping {
    Fixed { dt: f64 },
    Adaptive(AdaptiveParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub final_time: f64,
    /// Interpolation order `r` (accuracy `r + 1`).
    pub order: usize,
    pub stepping: TimeStepping,
    /// Times at which the nodal `phi` is recorded, ascending.
    pub snapshot_times: Vec<f64>,
    /// If above 1, each of the first `order` steps is taken as this many
    /// equal substeps.
    pub bootstrap_substeps: usize,
}

impl Schedule {
    pub fn fixed(final_time: f64, dt: f64, order: usize) -> Self {
        Self {
            final_time,
            order,
            stepping: TimeStepping::Fixed { dt },
            snapshot_times: Vec::new(),
            bootstrap_substeps: 0,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::InvalidSchedule(m));
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return bad(format!("final time must be >= 0, got {}", self.final_time));
        }
        if self.order > MAX_ORDER {
            return bad(format!(
                "interpolation order must be <= {MAX_ORDER}, got {}",
                self.order
            ));
        }
        match self.stepping {
            TimeStepping::Fixed { dt } if !(dt.is_finite() && dt > 0.0) => {
                return bad(format!("step size must be positive, got {dt}"));
            }
            TimeStepping::Adaptive(p) => {
                if let Err(e) = p.validate() {
                    return bad(e.0);
                }
            }
            _ => {}
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return bad("snapshot times must be ascending".into());
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(0.0..=self.final_time).contains(&t))
        {
            return bad("snapshot times must lie in [0, final_time]".into());
        }
        Ok(())
    }
}

/// Nodal `phi` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<C> {
    /// Initial row followed by one row per accepted step.
    pub ledger: Vec<EnergyLedgerRow>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SpectralState<C>,
}

/// Ledger and snapshots gathered before a failure.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRun {
    pub ledger: Vec<EnergyLedgerRow>,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("step from t = {t} failed: {source}")]
    Solver {
        t: f64,
        source: SolverError,
        partial: Box<PartialRun>,
    },
}

impl RunError {
    pub fn solver_error(&self) -> Option<&SolverError> {
        match self {
            RunError::Solver { source, .. } => Some(source),
            RunError::InvalidSchedule(_) => None,
        }
    }
}

struct Recorder {
    ledger: Vec<EnergyLedgerRow>,
    snapshots: Vec<Snapshot>,
    pending: Vec<f64>,
}

impl Recorder {
    fn capture<M: GradientFlow>(&mut self, model: &M, state: &SpectralState<M::Coef>, tol: f64) {
        while let Some(&ts) = self.pending.first() {
            if state.t + tol < ts {
                break;
            }
            self.pending.remove(0);
            self.snapshots.push(Snapshot {
                t: state.t,
                values: model.to_nodal(&state.phi()),
            });
        }
    }

    fn fail(self, t: f64, source: SolverError) -> RunError {
        RunError::Solver {
            t,
            source,
            partial: Box::new(PartialRun {
                ledger: self.ledger,
                snapshots: self.snapshots,
            }),
        }
    }
}

/// Integrates from `phi0` (spectral, `R = 1`, `t = 0`) to the final time.
///
/// The interpolation order ramps up as levels become available: a step
/// uses order `min(schedule.order, history length)`, so the first step of a
/// third-order run is second order. Steps are shortened to land exactly on
/// snapshot times and on the final time. Under adaptive stepping a diverged
/// Picard iteration is retried with half the step, down to `dt_min`.
pub fn run<M: GradientFlow>(
    solver: &mut TdsrSolver<M>,
    phi0: Array2<M::Coef>,
    schedule: &Schedule,
) -> Result<Trajectory<M::Coef>, RunError> {
    schedule.validate()?;
    let mut rec = Recorder {
        ledger: Vec::new(),
        snapshots: Vec::new(),
        pending: schedule.snapshot_times.clone(),
    };
    let mut history = match solver.initial_history(phi0, 0.0) {
        Ok(h) => h,
        Err(e) => return Err(rec.fail(0.0, e)),
    };
    rec.ledger.push(solver.ledger_row(history.newest()));
    let scale = schedule.final_time.max(1.0);
    let time_tol = 1e-12 * scale;
    rec.capture(solver.model(), &history.newest().state, time_tol);

    let (dt_floor, dt_ceiling) = match schedule.stepping {
        TimeStepping::Fixed { dt } => (1e-9 * dt, dt),
        TimeStepping::Adaptive(p) => (p.dt_min, p.dt_max),
    };
    let mut last_quadrature = 0.0f64;
    let mut first = true;
    let mut full_steps = 0;

    loop {
        let t = history.newest().state.t;
        let remaining_total = schedule.final_time - t;
        if remaining_total <= time_tol {
            break;
        }
        let target = rec
            .pending
            .iter()
            .copied()
            .find(|&ts| ts > t + time_tol)
            .unwrap_or(schedule.final_time)
            .min(schedule.final_time);

        let mut dt = match schedule.stepping {
            TimeStepping::Fixed { dt } => dt,
            TimeStepping::Adaptive(p) => {
                if first {
                    p.dt_min
                } else {
                    let last = rec.ledger[rec.ledger.len() - 1];
                    let slope = match p.slope {
                        EnergySlope::BackwardDifference => {
                            (last.energy - rec.ledger[rec.ledger.len() - 2].energy) / last.dt
                        }
                        EnergySlope::Dissipation => -last_quadrature.max(0.0) / last.dt,
                    };
                    p.dt_for_slope(slope)
                }
            }
        };
        dt = fit_to_target(dt, target - t, dt_floor, dt_ceiling);

        if full_steps < schedule.order && schedule.bootstrap_substeps > 1 {
            // Starting level computed with substeps on a scratch history;
            // only the level at the full step is kept, so later steps see
            // uniform spacing.
            let m = schedule.bootstrap_substeps;
            let mut fine = history.clone();
            for k in 0..m {
                let h = if k + 1 == m {
                    t + dt - fine.newest().state.t
                } else {
                    dt / m as f64
                };
                match step_once(solver, &mut fine, h, schedule.order) {
                    Ok((row, q)) => {
                        last_quadrature = q;
                        rec.ledger.push(row);
                    }
                    Err(e) => return Err(rec.fail(fine.newest().state.t, e)),
                }
            }
            let mut level = fine.newest().clone();
            level.dt = dt;
            history.push(level);
        } else {
            loop {
                match step_once(solver, &mut history, dt, schedule.order) {
                    Ok((row, q)) => {
                        last_quadrature = q;
                        rec.ledger.push(row);
                        break;
                    }
                    Err(SolverError::PicardDiverged { .. })
                        if matches!(schedule.stepping, TimeStepping::Adaptive(_)) && dt > dt_floor =>
                    {
                        dt = (0.5 * dt).max(dt_floor);
                    }
                    Err(e) => return Err(rec.fail(t, e)),
                }
            }
        }
        first = false;
        full_steps += 1;
        rec.capture(solver.model(), &history.newest().state, time_tol);
    }

    Ok(Trajectory {
        ledger: rec.ledger,
        snapshots: rec.snapshots,
        final_state: history.newest().state.clone(),
    })
}

fn step_once<M: GradientFlow>(
    solver: &mut TdsrSolver<M>,
    history: &mut StepHistory<M::Coef>,
    dt: f64,
    target_order: usize,
) -> Result<(EnergyLedgerRow, f64), SolverError> {
    let order = target_order.min(history.len());
    let report = solver.step(history, dt, order)?;
    Ok((report.row, report.dissipation_quadrature))
}

/// Shortens `dt` so that the run lands on a target `remaining` away
/// without leaving a sliver below `floor`.
fn fit_to_target(dt: f64, remaining: f64, floor: f64, ceiling: f64) -> f64 {
    if dt >= remaining || remaining - dt < floor {
        if remaining <= ceiling {
            remaining
        } else {
            0.5 * remaining
        }
    } else {
        dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_examples() {
        assert_eq!(fit_to_target(0.1, 1.0, 1e-4, 0.1), 0.1);
        assert_eq!(fit_to_target(0.1, 0.05, 1e-4, 0.1), 0.05);
        // a sliver below the floor is absorbed by splitting
        assert_eq!(fit_to_target(0.1, 0.10005, 1e-4, 0.1), 0.050025);
        assert_eq!(fit_to_target(0.05, 0.05005, 1e-4, 0.1), 0.05005);
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::fixed(1.0, 0.1, 2).validate().is_ok());
        assert!(Schedule::fixed(1.0, 0.0, 2).validate().is_err());
        assert!(Schedule::fixed(1.0, 0.1, 3).validate().is_err());
        let mut s = Schedule::fixed(1.0, 0.1, 1);
        s.snapshot_times = vec![0.5, 0.2];
        assert!(s.validate().is_err());
        s.snapshot_times = vec![0.5, 2.0];
        assert!(s.validate().is_err());
    }
}
