//! Gradient-flow models: linear symbols, stabilized nonlinear terms,
//! chemical potentials, energies and dissipation rates.
//!
//! Every model is written as `d(phi)/dt = L phi - N(phi)` in its spectral
//! basis, with `L` diagonal and nonpositive, together with an energy `E` that
//! decays at rate `D(phi) >= 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use thiserror::Error;

use crate::fourier::FourierError;
use crate::legendre::LegendreError;
use crate::spectrum::Coefficient;

mod neumann;
mod periodic;

pub use neumann::NeumannModel;
pub use periodic::PeriodicModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    AllenCahn,
    CahnHilliard,
    MbeSlope,
    MbeNoSlope,
    Pfc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::AllenCahn,
        ModelKind::CahnHilliard,
        ModelKind::MbeSlope,
        ModelKind::MbeNoSlope,
        ModelKind::Pfc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::AllenCahn => "allen-cahn",
            ModelKind::CahnHilliard => "cahn-hilliard",
            ModelKind::MbeSlope => "mbe-slope",
            ModelKind::MbeNoSlope => "mbe-noslope",
            ModelKind::Pfc => "pfc",
        }
    }

    /// Stabilization constant used when none is configured.
    pub fn default_s(self, delta: f64) -> f64 {
        match self {
            ModelKind::AllenCahn | ModelKind::CahnHilliard | ModelKind::MbeSlope => 2.0,
            ModelKind::MbeNoSlope => 0.125,
            ModelKind::Pfc => delta,
        }
    }

    /// Whether the model runs on the Neumann (Legendre) backend.
    pub fn is_neumann(self) -> bool {
        matches!(self, ModelKind::CahnHilliard)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ModelError::InvalidParameter(format!("unknown model kind `{s}`")))
    }
}

/// Spatial discretization of a square domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    /// `(0, length)^2` with `nodes` Fourier nodes per axis.
    Periodic { length: f64, nodes: usize },
    /// `[a, b]^2` with polynomial degree `degree` per axis.
    Neumann { a: f64, b: f64, degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub epsilon_sq: f64,
    pub s: f64,
    pub theta: f64,
    pub sigma: f64,
    pub delta: f64,
    pub dealias: bool,
    pub domain: DomainSpec,
}

impl ModelSpec {
    /// Spec with the default stabilizer, `theta = 1e4` and dealiasing on.
    pub fn new(kind: ModelKind, epsilon_sq: f64, domain: DomainSpec) -> Self {
        let (sigma, delta) = (1.0, 0.025);
        Self {
            kind,
            epsilon_sq,
            s: kind.default_s(delta),
            theta: 1e4,
            sigma,
            delta,
            dealias: true,
            domain,
        }
    }

    /// PFC spec; `s` defaults to `delta`.
    pub fn pfc(sigma: f64, delta: f64, domain: DomainSpec) -> Self {
        Self {
            sigma,
            delta,
            s: delta,
            ..Self::new(ModelKind::Pfc, 0.0, domain)
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite_nonneg = |name: &str, v: f64, out: &mut Vec<String>| {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("{name} must be finite and >= 0, got {v}"));
            }
        };
        finite_nonneg("s", self.s, &mut out);
        finite_nonneg("theta", self.theta, &mut out);
        if self.kind == ModelKind::Pfc {
            if !(self.sigma.is_finite()
                && self.delta.is_finite()
                && self.delta > 0.0
                && self.delta < self.sigma * self.sigma)
            {
                out.push(format!(
                    "pfc needs 0 < delta < sigma^2, got sigma = {}, delta = {}",
                    self.sigma, self.delta
                ));
            }
        } else if !(self.epsilon_sq.is_finite() && self.epsilon_sq > 0.0) {
            out.push(format!("epsilon_sq must be positive, got {}", self.epsilon_sq));
        }
        match (self.kind.is_neumann(), self.domain) {
            (true, DomainSpec::Periodic { .. }) => {
                out.push(format!("{} requires a neumann domain", self.kind));
            }
            (false, DomainSpec::Neumann { .. }) => {
                out.push(format!("{} requires a periodic domain", self.kind));
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParameter(String),
    #[error("{kind} cannot run on a {backend} backend")]
    BackendMismatch { kind: ModelKind, backend: &'static str },
    #[error("non-finite value while evaluating {stage}")]
    Overflow { stage: &'static str },
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Legendre(#[from] LegendreError),
}

/// A smooth double-well type potential `F` with derivative `f = F'`.
pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, phi: f64) -> f64;
    fn derivative(&self, phi: f64) -> f64;
}

/// `F(phi) = (phi^2 - 1)^2 / 4`, `f(phi) = phi^3 - phi`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleWell;

impl Potential for DoubleWell {
    fn value(&self, phi: f64) -> f64 {
        let w = phi * phi - 1.0;
        0.25 * w * w
    }

    fn derivative(&self, phi: f64) -> f64 {
        phi * phi * phi - phi
    }
}

/// Nonlinear spectrum and dissipation rate at one state.
#[derive(Debug, Clone)]
pub struct Evaluation<C> {
    /// Spectral coefficients of the stabilized nonlinear term, in the form
    /// that enters the exponential update directly.
    pub nonlinear: Array2<C>,
    /// `D(phi) >= 0`, the instantaneous energy decay rate.
    pub dissipation: f64,
}

#[derive(Debug, Clone)]
enum RadialPart {
    Pointwise {
        values: Vec<f64>,
        potential: Arc<dyn Potential>,
    },
    SlopeSelection {
        grad_sq: Vec<f64>,
    },
    NoSlope {
        grad_sq: Vec<f64>,
    },
    Quartic {
        quartic: f64,
    },
}

/// `E[R psi]` as a function of the scalar `R` for a frozen `psi`.
///
/// The quadratic part of the energy is exactly `q R^2`; the remaining part
/// is evaluated by nodal quadrature from cached node data.
#[derive(Debug, Clone)]
pub struct RadialEnergy {
    quadratic: f64,
    weights: Vec<f64>,
    part: RadialPart,
}

impl RadialEnergy {
    pub fn value(&self, r: f64) -> f64 {
        let r2 = r * r;
        let rest = match &self.part {
            RadialPart::Pointwise { values, potential } => self
                .weights
                .iter()
                .zip(values)
                .map(|(w, &v)| w * potential.value(r * v))
                .sum(),
            RadialPart::SlopeSelection { grad_sq } => self
                .weights
                .iter()
                .zip(grad_sq)
                .map(|(w, &g)| {
                    let d = r2 * g - 1.0;
                    0.25 * w * d * d
                })
                .sum(),
            RadialPart::NoSlope { grad_sq } => self
                .weights
                .iter()
                .zip(grad_sq)
                .map(|(w, &g)| -0.5 * w * (r2 * g).ln_1p())
                .sum(),
            RadialPart::Quartic { quartic } => quartic * r2 * r2,
        };
        self.quadratic * r2 + rest
    }

    /// `d E[R psi] / dR`.
    pub fn derivative(&self, r: f64) -> f64 {
        let r2 = r * r;
        let rest = match &self.part {
            RadialPart::Pointwise { values, potential } => self
                .weights
                .iter()
                .zip(values)
                .map(|(w, &v)| w * potential.derivative(r * v) * v)
                .sum(),
            RadialPart::SlopeSelection { grad_sq } => self
                .weights
                .iter()
                .zip(grad_sq)
                .map(|(w, &g)| w * (r2 * g - 1.0) * r * g)
                .sum(),
            RadialPart::NoSlope { grad_sq } => self
                .weights
                .iter()
                .zip(grad_sq)
                .map(|(w, &g)| -w * r * g / (1.0 + r2 * g))
                .sum(),
            RadialPart::Quartic { quartic } => 4.0 * quartic * r2 * r,
        };
        2.0 * self.quadratic * r + rest
    }
}

/// Interface the TDSR solver needs from a model on a particular backend.
pub trait GradientFlow: Send + Sync {
    type Coef: Coefficient;

    fn spec(&self) -> &ModelSpec;

    /// Per-mode linear symbol `L`, nonpositive.
    fn symbols(&self) -> &Array2<f64>;

    /// Shape of a spectral coefficient array.
    fn spectral_shape(&self) -> (usize, usize);

    /// Shape of a nodal array.
    fn nodal_shape(&self) -> (usize, usize);

    /// Node coordinates along each axis (the grid is square).
    fn coordinates(&self) -> Vec<f64>;

    /// `"uniform"` or `"gauss-lobatto"`.
    fn node_layout(&self) -> &'static str;

    fn to_nodal(&self, c: &Array2<Self::Coef>) -> Array2<f64>;

    #[allow(clippy::wrong_self_convention)]
    fn from_nodal(&self, u: &Array2<f64>) -> Result<Array2<Self::Coef>, ModelError>;

    /// Nonlinear spectrum and dissipation rate at `phi`.
    fn evaluate(&self, phi: &Array2<Self::Coef>) -> Result<Evaluation<Self::Coef>, ModelError>;

    /// Spectral nonlinear term only.
    fn nonlinear(&self, phi: &Array2<Self::Coef>) -> Result<Array2<Self::Coef>, ModelError> {
        Ok(self.evaluate(phi)?.nonlinear)
    }

    fn energy(&self, phi: &Array2<Self::Coef>) -> f64;

    /// Chemical potential on the nodes, without dealiasing.
    fn chemical_potential(&self, phi: &Array2<Self::Coef>) -> Array2<f64>;

    /// `int mu(phi) v` for a direction `v` given in the spectral basis.
    fn potential_pairing(&self, phi: &Array2<Self::Coef>, v: &Array2<Self::Coef>) -> f64;

    fn radial(&self, psi: &Array2<Self::Coef>) -> RadialEnergy;

    /// `max |u - v|` over the nodes.
    fn sup_distance(&self, u: &Array2<Self::Coef>, v: &Array2<Self::Coef>) -> f64 {
        let diff = u - v;
        self.to_nodal(&diff).iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `int phi`.
    fn mass(&self, phi: &Array2<Self::Coef>) -> f64;

    /// `|Omega|`.
    fn area(&self) -> f64;
}

pub(crate) fn check_finite(values: &Array2<f64>, stage: &'static str) -> Result<(), ModelError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::Overflow { stage })
    }
}
