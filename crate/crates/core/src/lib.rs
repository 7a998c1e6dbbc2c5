//! Time-dependent spectral renormalization (TDSR) exponential time
//! differencing for gradient flows.
//!
//! The solution of a gradient flow is written as `phi = R(t) * psi`, where
//! the scalar `R` carries a discrete energy balance that is solved together
//! with an exponential multistep update of the spectral coefficients of
//! `psi`. The resulting schemes (orders 1 to 3, variable step sizes) dissipate
//! a modified energy `E[phi] + theta * (R^2 - 1)` exactly, whatever the step.
//!
//! Module map:
//!
//! * [`etd`]: Lagrange weights and exponential multistep coefficients.
//! * [`fourier`]: periodic pseudo-spectral space.
//! * [`legendre`]: Legendre-Galerkin space for homogeneous Neumann data.
//! * [`models`]: Allen-Cahn, Cahn-Hilliard, MBE and PFC energies.
//! * [`solver`]: the Picard/Newton TDSR-ETD time step.
//! * [`adaptive`]: energy-variation step-size control.
//! * [`run`] and [`convergence`]: integration driver and order studies.

pub mod adaptive;
pub mod convergence;
pub mod etd;
pub mod fourier;
pub mod legendre;
pub mod models;
pub mod run;
pub mod solver;
mod spectrum;

pub use adaptive::{next_dt, AdaptiveError, AdaptiveParams, EnergySlope};
pub use convergence::{
    convergence_against, convergence_study, reference_solution, ConvergenceReport, ConvergenceRow, Reference,
    StudyError, StudyPlan,
};
pub use etd::{EtdCoefficients, EtdError, StepGeometry};
pub use fourier::{FourierError, FourierSpace, ModeField, NodalField, PeriodicGrid};
pub use legendre::{EigenField, LegendreError, NeumannBasis};
pub use models::{
    DomainSpec, DoubleWell, Evaluation, GradientFlow, ModelError, ModelKind, ModelSpec, NeumannModel, PeriodicModel,
    Potential, RadialEnergy,
};
pub use run::{run, PartialRun, RunError, Schedule, Snapshot, TimeStepping, Trajectory};
pub use solver::{
    clamp_dissipation, solve_r, EnergyLedgerRow, HistoryLevel, SolverControls, SolverError, SpectralState, StepHistory,
    StepReport, TdsrSolver,
};
pub use spectrum::Coefficient;
