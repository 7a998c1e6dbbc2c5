//! Temporal self-convergence studies against a fine reference run.

use ndarray::Array2;
use rayon::prelude::*;
use thiserror::Error;

use crate::models::GradientFlow;
use crate::run::{run, RunError, Schedule, TimeStepping};
use crate::solver::TdsrSolver;

/// Errors below this fraction of `max |phi_ref|` are treated as roundoff.
pub const SATURATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// `max |phi(T) - phi_ref(T)|` over the nodes.
    pub phi_error: f64,
    /// `|R(T) - R_ref(T)|`.
    pub r_error: f64,
    /// `log2(e(2 dt) / e(dt))` against the previous, coarser row.
    pub phi_rate: Option<f64>,
    pub r_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub order: usize,
    pub reference_dt: f64,
    pub final_time: f64,
    pub phi_scale: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Least-squares slope of `log e` against `log dt` over the ladder, or
    /// `None` when any error sits at roundoff level.
    pub fn phi_slope(&self) -> Option<f64> {
        self.fit(|r| r.phi_error, self.phi_scale)
    }

    pub fn r_slope(&self) -> Option<f64> {
        self.fit(|r| r.r_error, 1.0)
    }

    /// Whether every `phi` error is at roundoff level.
    pub fn saturated(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.phi_error <= SATURATION * self.phi_scale.max(1.0))
    }

    fn fit(&self, err: impl Fn(&ConvergenceRow) -> f64, scale: f64) -> Option<f64> {
        let floor = SATURATION * scale.max(1.0);
        if self.rows.len() < 2 || self.rows.iter().any(|r| err(r).is_nan() || err(r) <= floor) {
            return None;
        }
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.dt.ln(), err(r).ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StudyError {
    #[error("a convergence ladder needs at least 3 step sizes, got {0}")]
    TooFewLevels(usize),
    #[error("reference picard tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("run with dt = {dt} failed: {source}")]
    Run {
        dt: f64,
        source: RunError,
        /// Rows of the ladder members that did finish (empty if the
        /// reference failed).
        partial: Vec<ConvergenceRow>,
    },
}

/// Step ladder and reference settings of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    /// Final time, order and bootstrap settings shared by the ladder runs.
    pub base: Schedule,
    pub ladder: Vec<f64>,
    pub reference_dt: f64,
    pub reference_order: usize,
    /// Picard tolerance for the reference run. Thousands of fine steps each
    /// stopping one tolerance short of the fixed point drift by far more
    /// than the ladder errors being measured, so this is usually much
    /// tighter than the ladder's own tolerance. `None` keeps the solver's.
    pub reference_picard_tol: Option<f64>,
}

impl StudyPlan {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.ladder.len() < 3 {
            return Err(StudyError::TooFewLevels(self.ladder.len()));
        }
        if let Some(tol) = self.reference_picard_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(StudyError::BadTolerance(tol));
            }
        }
        Ok(())
    }

    fn schedule(&self, dt: f64, order: usize) -> Schedule {
        Schedule {
            stepping: TimeStepping::Fixed { dt },
            order,
            snapshot_times: Vec::new(),
            ..self.base.clone()
        }
    }
}

/// Nodal `phi` and `R` of the reference run at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub phi: Array2<f64>,
    pub r: f64,
}

fn run_member<M: GradientFlow>(
    mut solver: TdsrSolver<M>,
    phi0: &Array2<M::Coef>,
    schedule: &Schedule,
) -> Result<Reference, RunError> {
    let traj = run(&mut solver, phi0.clone(), schedule)?;
    let phi = solver.model().to_nodal(&traj.final_state.phi());
    Ok(Reference {
        phi,
        r: traj.final_state.r,
    })
}

fn reference_job<M, F>(make_solver: &F, phi0: &Array2<M::Coef>, plan: &StudyPlan) -> Result<Reference, StudyError>
where
    M: GradientFlow,
    F: Fn() -> TdsrSolver<M>,
{
    let mut solver = make_solver();
    if let Some(tol) = plan.reference_picard_tol {
        solver.controls_mut().picard_tol = tol;
    }
    run_member(solver, phi0, &plan.schedule(plan.reference_dt, plan.reference_order)).map_err(|source| {
        StudyError::Run {
            dt: plan.reference_dt,
            source,
            partial: Vec::new(),
        }
    })
}

/// Runs only the reference of `plan`, for reuse across several studies.
pub fn reference_solution<M, F>(
    make_solver: F,
    phi0: &Array2<M::Coef>,
    plan: &StudyPlan,
) -> Result<Reference, StudyError>
where
    M: GradientFlow,
    F: Fn() -> TdsrSolver<M>,
{
    plan.validate()?;
    reference_job(&make_solver, phi0, plan)
}

/// Runs every ladder member and a reference, all from `phi0`, and compares
/// at the final time. Runs execute in parallel; `make_solver` builds a
/// fresh, independent solver for each.
pub fn convergence_study<M, F>(
    make_solver: F,
    phi0: &Array2<M::Coef>,
    plan: &StudyPlan,
) -> Result<ConvergenceReport, StudyError>
where
    M: GradientFlow,
    F: Fn() -> TdsrSolver<M> + Sync,
{
    plan.validate()?;
    let (reference, members) = rayon::join(
        || reference_job(&make_solver, phi0, plan),
        || ladder_runs(&make_solver, phi0, plan),
    );
    compare(plan, &reference?, members)
}

/// Like [`convergence_study`] but against a precomputed reference.
pub fn convergence_against<M, F>(
    make_solver: F,
    phi0: &Array2<M::Coef>,
    plan: &StudyPlan,
    reference: &Reference,
) -> Result<ConvergenceReport, StudyError>
where
    M: GradientFlow,
    F: Fn() -> TdsrSolver<M> + Sync,
{
    plan.validate()?;
    let members = ladder_runs(&make_solver, phi0, plan);
    compare(plan, reference, members)
}

fn ladder_runs<M, F>(make_solver: &F, phi0: &Array2<M::Coef>, plan: &StudyPlan) -> Vec<Result<Reference, RunError>>
where
    M: GradientFlow,
    F: Fn() -> TdsrSolver<M> + Sync,
{
    plan.ladder
        .par_iter()
        .map(|&dt| run_member(make_solver(), phi0, &plan.schedule(dt, plan.base.order)))
        .collect()
}

fn compare(
    plan: &StudyPlan,
    reference: &Reference,
    members: Vec<Result<Reference, RunError>>,
) -> Result<ConvergenceReport, StudyError> {
    let phi_scale = reference.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = SATURATION * phi_scale.max(1.0);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for (&dt, member) in plan.ladder.iter().zip(members) {
        let got = match member {
            Ok(v) => v,
            Err(source) => {
                return Err(StudyError::Run {
                    dt,
                    source,
                    partial: rows,
                })
            }
        };
        let phi_error = (&got.phi - &reference.phi).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let r_error = (got.r - reference.r).abs();
        let rate = |prev: f64, cur: f64, prev_dt: f64| {
            (prev > floor && cur > floor).then(|| (prev / cur).ln() / (prev_dt / dt).ln())
        };
        let prev = rows.last();
        let phi_rate = prev.and_then(|p| rate(p.phi_error, phi_error, p.dt));
        let r_rate = prev.and_then(|p| rate(p.r_error, r_error, p.dt));
        rows.push(ConvergenceRow {
            dt,
            phi_error,
            r_error,
            phi_rate,
            r_rate,
        });
    }
    Ok(ConvergenceReport {
        order: plan.base.order,
        reference_dt: plan.reference_dt,
        final_time: plan.base.final_time,
        phi_scale,
        rows,
    })
}
