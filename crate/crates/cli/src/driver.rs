//! Runs and order studies driven by a [`RunConfig`], with their files.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use tdsr_core::{
    convergence_study, run, ConvergenceReport, DomainSpec, EnergyLedgerRow, GradientFlow, ModelSpec, NeumannModel,
    PeriodicModel, RunError, Snapshot, StudyError, TdsrSolver,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_convergence, write_ledger, write_snapshot, SnapshotHeader};

pub const LEDGER_FILE: &str = "ledger.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub last: EnergyLedgerRow,
    pub steps: usize,
    pub snapshots: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub dir: PathBuf,
    pub report: ConvergenceReport,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn save_config(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, cfg.to_toml()).map_err(|e| CliError::io(path, e))
}

/// Calls `$body` with `$m` bound to the model `$spec` describes.
macro_rules! with_model {
    ($spec:expr, |$m:ident| $body:expr) => {{
        let spec: ModelSpec = $spec;
        match spec.domain {
            DomainSpec::Periodic { .. } => {
                let $m = PeriodicModel::new(spec)?;
                $body
            }
            DomainSpec::Neumann { .. } => {
                let $m = NeumannModel::new(spec)?;
                $body
            }
        }
    }};
}

/// Spectral initial data of `cfg` on the grid of `model`.
pub fn initial_state<M: GradientFlow>(model: &M, cfg: &RunConfig) -> Result<Array2<M::Coef>, CliError> {
    let ic = cfg
        .initial_condition()
        .map_err(|e| CliError::Config(crate::error::ConfigError::Invalid(e)))?;
    Ok(model.from_nodal(&ic.sample(&model.coordinates(), cfg.seed()))?)
}

fn save_snapshots<M: GradientFlow>(model: &M, snaps: &[Snapshot], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::with_capacity(snaps.len());
    for (k, s) in snaps.iter().enumerate() {
        let stem = dir.join(format!("snap_{k:04}"));
        let header = SnapshotHeader::new(model.spec().kind.name(), s.t, model.node_layout(), model.coordinates());
        write_snapshot(&stem, header, &s.values)?;
        paths.push(stem.with_extension("bin"));
    }
    Ok(paths)
}

/// Integrates the configured problem and writes `config.toml`,
/// `ledger.csv` and `snap_NNNN.{bin,toml}` into the output directory. On a
/// solver failure the partial ledger and snapshots are still written.
pub fn run_config(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let dir = cfg.output_dir();
    create_dir(&dir)?;
    save_config(cfg, &dir)?;
    with_model!(cfg.model_spec()?, |model| execute(model, cfg, &dir))
}

fn execute<M: GradientFlow>(model: M, cfg: &RunConfig, dir: &Path) -> Result<RunOutcome, CliError> {
    let phi0 = initial_state(&model, cfg)?;
    let mut solver = TdsrSolver::new(model, cfg.controls());
    match run(&mut solver, phi0, &cfg.schedule()) {
        Ok(traj) => {
            write_ledger(&dir.join(LEDGER_FILE), &traj.ledger)?;
            let snapshots = save_snapshots(solver.model(), &traj.snapshots, dir)?;
            Ok(RunOutcome {
                dir: dir.to_path_buf(),
                last: *traj.ledger.last().expect("ledger has the initial row"),
                steps: traj.ledger.len() - 1,
                snapshots,
            })
        }
        Err(err) => {
            if let RunError::Solver { partial, .. } = &err {
                write_ledger(&dir.join(LEDGER_FILE), &partial.ledger)?;
                save_snapshots(solver.model(), &partial.snapshots, dir)?;
            }
            Err(err.into())
        }
    }
}

/// Runs the `[study]` ladder and reference and writes `convergence.csv`
/// (only the finished rows if a member fails).
pub fn converge_config(cfg: &RunConfig) -> Result<StudyOutcome, CliError> {
    cfg.validate()?;
    let plan = cfg.study_plan()?;
    let dir = cfg.output_dir();
    create_dir(&dir)?;
    save_config(cfg, &dir)?;
    let controls = cfg.controls();
    let path = dir.join(CONVERGENCE_FILE);
    let result = with_model!(cfg.model_spec()?, |model| {
        let phi0 = initial_state(&model, cfg)?;
        convergence_study(|| TdsrSolver::new(model.clone(), controls), &phi0, &plan)
    });
    match result {
        Ok(report) => {
            write_convergence(&path, &report)?;
            Ok(StudyOutcome { dir, report })
        }
        Err(err) => {
            if let StudyError::Run { partial, .. } = &err {
                let report = ConvergenceReport {
                    order: plan.base.order,
                    reference_dt: plan.reference_dt,
                    final_time: plan.base.final_time,
                    phi_scale: f64::NAN,
                    rows: partial.clone(),
                };
                write_convergence(&path, &report)?;
            }
            Err(err.into())
        }
    }
}
