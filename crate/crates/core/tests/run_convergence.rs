use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use tdsr_core::{
    convergence_study, run, AdaptiveParams, DomainSpec, GradientFlow, ModelKind, ModelSpec, PeriodicModel, Potential,
    RunError, Schedule, SolverControls, SolverError, StudyError, StudyPlan, TdsrSolver, TimeStepping,
};

#[derive(Debug)]
struct Flat;

impl Potential for Flat {
    fn value(&self, _: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _: f64) -> f64 {
        0.0
    }
}

fn spec(theta: f64) -> ModelSpec {
    let domain = DomainSpec::Periodic {
        length: 2.0 * PI,
        nodes: 32,
    };
    ModelSpec::new(ModelKind::AllenCahn, 0.01, domain).with_theta(theta)
}

fn ic(m: &PeriodicModel) -> Array2<Complex64> {
    m.from_nodal(&m.space().grid().sample(|x, y| (2.0 * x).sin() * (3.0 * y).cos()))
        .unwrap()
}

fn plan(order: usize, ladder: Vec<f64>) -> StudyPlan {
    StudyPlan {
        base: Schedule::fixed(0.5, ladder[0], order),
        ladder,
        reference_dt: 0.01,
        reference_order: 2,
        reference_picard_tol: None,
    }
}

#[test]
fn heat_equation_study_sits_at_roundoff() {
    let heat = PeriodicModel::with_potential(spec(10.0).with_s(0.0), Arc::new(Flat)).unwrap();
    let phi0 = ic(&heat);
    for order in 0..=2 {
        let report = convergence_study(
            || TdsrSolver::new(heat.clone(), SolverControls::default()),
            &phi0,
            &plan(order, vec![0.1, 0.05, 0.025]),
        )
        .unwrap();
        assert!(report.saturated(), "order {order}: {:?}", report.rows);
        assert_eq!(report.phi_slope(), None);
        assert!(report.rows.iter().all(|r| r.phi_rate.is_none()));
    }
}

#[test]
fn zero_length_run_keeps_only_the_initial_row() {
    let m = PeriodicModel::new(spec(1e4)).unwrap();
    let mut solver = TdsrSolver::new(m.clone(), SolverControls::default());
    let mut schedule = Schedule::fixed(0.0, 0.1, 2);
    schedule.snapshot_times = vec![0.0];
    let traj = run(&mut solver, ic(&m), &schedule).unwrap();
    assert_eq!(traj.ledger.len(), 1);
    assert_eq!(traj.ledger[0].r, 1.0);
    assert_eq!(traj.snapshots.len(), 1);
}

#[test]
fn adaptive_run_lands_on_snapshots_within_bounds() {
    let m = PeriodicModel::new(spec(1e4)).unwrap();
    let mut solver = TdsrSolver::new(m.clone(), SolverControls::default());
    let params = AdaptiveParams::new(1e-3, 0.05, 1e3).unwrap();
    let schedule = Schedule {
        final_time: 0.3,
        order: 2,
        stepping: TimeStepping::Adaptive(params),
        snapshot_times: vec![0.05, 0.123],
        bootstrap_substeps: 0,
    };
    let traj = run(&mut solver, ic(&m), &schedule).unwrap();
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    assert!(
        (times[0] - 0.05).abs() < 1e-12 && (times[1] - 0.123).abs() < 1e-12,
        "{times:?}"
    );
    assert!((traj.final_state.t - 0.3).abs() < 1e-12);
    for row in &traj.ledger[1..] {
        assert!(
            row.dt >= 1e-3 * (1.0 - 1e-12) && row.dt <= 0.05 * (1.0 + 1e-12),
            "dt {}",
            row.dt
        );
    }
}

#[test]
fn invalid_schedules_are_rejected() {
    let m = PeriodicModel::new(spec(1e4)).unwrap();
    let mut solver = TdsrSolver::new(m.clone(), SolverControls::default());
    for schedule in [
        Schedule::fixed(1.0, -0.1, 1),
        Schedule::fixed(1.0, 0.1, 3),
        Schedule::fixed(-1.0, 0.1, 0),
    ] {
        assert!(matches!(
            run(&mut solver, ic(&m), &schedule),
            Err(RunError::InvalidSchedule(_))
        ));
    }
}

#[test]
fn failed_member_keeps_the_rows_before_it() {
    // too few sweeps for the coarse step only
    let m = PeriodicModel::new(spec(10.0)).unwrap();
    let controls = SolverControls {
        picard_tol: 1e-10,
        max_picard: 20,
        ..SolverControls::default()
    };
    let err = convergence_study(
        || TdsrSolver::new(m.clone(), controls),
        &ic(&m),
        &StudyPlan {
            reference_dt: 0.002,
            reference_order: 1,
            ..plan(1, vec![0.005, 0.0025, 0.5])
        },
    )
    .unwrap_err();
    match err {
        StudyError::Run { dt, partial, source } => {
            assert_eq!(dt, 0.5, "{source}");
            assert_eq!(partial.len(), 2);
            assert!(matches!(
                source.solver_error(),
                Some(SolverError::PicardDiverged { .. })
            ));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn short_ladders_are_rejected() {
    let m = PeriodicModel::new(spec(10.0)).unwrap();
    let err = convergence_study(
        || TdsrSolver::new(m.clone(), SolverControls::default()),
        &ic(&m),
        &plan(1, vec![0.1, 0.05]),
    )
    .unwrap_err();
    assert_eq!(err, StudyError::TooFewLevels(2));
}
