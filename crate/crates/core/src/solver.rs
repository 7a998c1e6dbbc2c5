//! One TDSR-ETD time step: a Picard iteration that alternates a scalar
//! Newton solve for `R` (energy balance) with the diagonal exponential update
//! of `psi`.

use std::collections::VecDeque;
use std::sync::Arc;

use ndarray::Array2;
use thiserror::Error;

use crate::etd::{EtdCoefficients, EtdError, StepGeometry, MAX_ORDER};
use crate::models::{GradientFlow, ModelError, RadialEnergy};
use crate::spectrum::{all_finite, scale_by, sub_scaled, Coefficient};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("Picard iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    PicardDiverged { iterations: usize, residual: f64 },
    #[error("scalar solve for R failed (target {target:.6e}, start {start})")]
    NewtonFailed { target: f64, start: f64 },
    #[error("renormalization factor collapsed to {0:.3e}")]
    RNearZero(f64),
    #[error("order {order} needs {needed} history levels, have {available}")]
    InsufficientHistory {
        order: usize,
        needed: usize,
        available: usize,
    },
    #[error(transparent)]
    Etd(#[from] EtdError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverControls {
    /// Picard stopping tolerance on `max |psi^(m+1) - psi^(m)|`.
    pub picard_tol: f64,
    pub max_picard: usize,
    /// Relative tolerance of the scalar equation for `R`.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_bisection: usize,
    /// Half-width of the bisection search window around the initial guess.
    pub bracket: f64,
    /// `|R|` below this aborts the step.
    pub r_floor: f64,
    /// Consecutive residual increases that count as divergence.
    pub divergence_streak: usize,
}

impl Default for SolverControls {
    fn default() -> Self {
        Self {
            picard_tol: 1e-7,
            max_picard: 100,
            newton_tol: 1e-12,
            max_newton: 50,
            max_bisection: 200,
            bracket: 0.5,
            r_floor: 1e-6,
            divergence_streak: 3,
        }
    }
}

/// `phi = R psi` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState<C> {
    pub r: f64,
    pub psi: Array2<C>,
    pub t: f64,
}

impl<C: Coefficient> SpectralState<C> {
    pub fn phi(&self) -> Array2<C> {
        self.psi.mapv(|c| c * self.r)
    }
}

/// A stored time level together with the quantities later steps reuse.
#[derive(Debug, Clone)]
pub struct HistoryLevel<C> {
    pub state: SpectralState<C>,
    pub nonlinear: Array2<C>,
    pub dissipation: f64,
    pub energy: f64,
    /// Step size that produced this level (0 for the initial level).
    pub dt: f64,
}

/// The most recent levels, newest first.
#[derive(Debug, Clone)]
pub struct StepHistory<C> {
    levels: VecDeque<HistoryLevel<C>>,
}

impl<C> StepHistory<C> {
    const CAPACITY: usize = MAX_ORDER + 1;

    pub fn new(initial: HistoryLevel<C>) -> Self {
        let mut levels = VecDeque::with_capacity(Self::CAPACITY);
        levels.push_front(initial);
        Self { levels }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn newest(&self) -> &HistoryLevel<C> {
        &self.levels[0]
    }

    /// Level `n - j`.
    pub fn level(&self, j: usize) -> &HistoryLevel<C> {
        &self.levels[j]
    }

    pub fn push(&mut self, level: HistoryLevel<C>) {
        if self.levels.len() == Self::CAPACITY {
            self.levels.pop_back();
        }
        self.levels.push_front(level);
    }

    pub fn iter(&self) -> impl Iterator<Item = &HistoryLevel<C>> {
        self.levels.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLedgerRow {
    pub t: f64,
    pub dt: f64,
    pub energy: f64,
    pub modified_energy: f64,
    pub r: f64,
    pub picard_iters: usize,
    pub newton_iters: usize,
    pub clamp_active: bool,
    pub mass: f64,
}

/// `max(i2, 0)` and whether clipping happened.
pub fn clamp_dissipation(i2: f64) -> (f64, bool) {
    if i2 < 0.0 {
        (0.0, true)
    } else {
        (i2, false)
    }
}

/// Solves `E[R psi] + theta R^2 = c` for `R` near `r_init`.
///
/// Newton from `r_init` first; if it stalls, the window
/// `[r_init - bracket, r_init + bracket]` is scanned outward for the sign
/// change closest to `r_init`, which is then bisected. Returns the root and
/// the number of iterations used.
pub fn solve_r(
    energy: &RadialEnergy,
    theta: f64,
    c: f64,
    r_init: f64,
    controls: &SolverControls,
) -> Result<(f64, usize), SolverError> {
    let fail = SolverError::NewtonFailed {
        target: c,
        start: r_init,
    };
    if !(c.is_finite() && r_init.is_finite()) {
        return Err(fail);
    }
    let tol = controls.newton_tol * c.abs().max(1.0);
    let g = |r: f64| energy.value(r) + theta * r * r - c;
    let dg = |r: f64| energy.derivative(r) + 2.0 * theta * r;

    let mut r = r_init;
    let mut iters = 0;
    for _ in 0..=controls.max_newton {
        let gv = g(r);
        if !gv.is_finite() {
            break;
        }
        if gv.abs() <= tol {
            return Ok((r, iters));
        }
        if iters == controls.max_newton {
            break;
        }
        let d = dg(r);
        let next = r - gv / d;
        if !next.is_finite() {
            break;
        }
        r = next;
        iters += 1;
    }

    let g0 = g(r_init);
    if !g0.is_finite() {
        return Err(fail);
    }
    const SCAN: usize = 64;
    let mut bracket = None;
    'scan: for k in 1..=SCAN {
        let inner = controls.bracket * (k - 1) as f64 / SCAN as f64;
        let outer = controls.bracket * k as f64 / SCAN as f64;
        for sign in [1.0, -1.0] {
            let (a, b) = (r_init + sign * inner, r_init + sign * outer);
            let (ga, gb) = (g(a), g(b));
            if ga.is_finite() && gb.is_finite() && (ga == 0.0 || ga.signum() != gb.signum()) {
                bracket = Some((a, b, ga));
                break 'scan;
            }
        }
    }
    let (mut lo, mut hi, mut glo) = bracket.ok_or(fail.clone())?;
    for _ in 0..controls.max_bisection {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        iters += 1;
        if gm.abs() <= tol || (hi - lo).abs() <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            return Ok((mid, iters));
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Err(fail)
}

/// Outcome of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub row: EnergyLedgerRow,
    /// The unclipped dissipation quadrature `sum_j beta_j D_{n-j}`.
    pub dissipation_quadrature: f64,
}

/// Integrator state that outlives a single step: the model, controls and
/// a coefficient cache for repeated step geometries.
pub struct TdsrSolver<M: GradientFlow> {
    model: M,
    controls: SolverControls,
    theta: f64,
    cache: Option<Arc<EtdCoefficients>>,
}

impl<M: GradientFlow> TdsrSolver<M> {
    pub fn new(model: M, controls: SolverControls) -> Self {
        let theta = model.spec().theta;
        Self {
            model,
            controls,
            theta,
            cache: None,
        }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn controls(&self) -> &SolverControls {
        &self.controls
    }

    pub fn controls_mut(&mut self) -> &mut SolverControls {
        &mut self.controls
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Level `R = 1`, `psi = phi0` at time `t0`.
    pub fn initial_level(&self, phi0: Array2<M::Coef>, t0: f64) -> Result<HistoryLevel<M::Coef>, SolverError> {
        let eval = self.model.evaluate(&phi0)?;
        let energy = self.model.energy(&phi0);
        Ok(HistoryLevel {
            state: SpectralState {
                r: 1.0,
                psi: phi0,
                t: t0,
            },
            nonlinear: eval.nonlinear,
            dissipation: eval.dissipation,
            energy,
            dt: 0.0,
        })
    }

    pub fn initial_history(&self, phi0: Array2<M::Coef>, t0: f64) -> Result<StepHistory<M::Coef>, SolverError> {
        Ok(StepHistory::new(self.initial_level(phi0, t0)?))
    }

    pub fn ledger_row(&self, level: &HistoryLevel<M::Coef>) -> EnergyLedgerRow {
        let r = level.state.r;
        EnergyLedgerRow {
            t: level.state.t,
            dt: level.dt,
            energy: level.energy,
            modified_energy: level.energy + self.theta * (r * r - 1.0),
            r,
            picard_iters: 0,
            newton_iters: 0,
            clamp_active: false,
            mass: self.model.mass(&level.state.phi()),
        }
    }

    /// Coefficients for `geom`, reused while the geometry repeats.
    pub fn coefficients(&mut self, geom: StepGeometry) -> Result<Arc<EtdCoefficients>, SolverError> {
        if let Some(c) = &self.cache {
            if *c.geometry() == geom {
                return Ok(Arc::clone(c));
            }
        }
        let c = Arc::new(EtdCoefficients::new(geom, self.model.symbols())?);
        self.cache = Some(Arc::clone(&c));
        Ok(c)
    }

    /// Explicit part of the update: `e^{dt L} R^n Psi^n - sum_{j>=0} alpha_j N_{n-j}`.
    pub fn assemble_rhs(&self, history: &StepHistory<M::Coef>, coeffs: &EtdCoefficients) -> Array2<M::Coef> {
        let newest = &history.newest().state;
        let mut rhs = scale_by(&newest.psi, coeffs.propagator());
        rhs.mapv_inplace(|c| c * newest.r);
        for j in 0..coeffs.geometry().order() {
            sub_scaled(&mut rhs, &history.level(j).nonlinear, coeffs.alpha(j as isize));
        }
        rhs
    }

    /// Advances `history` by one step of size `dt` with interpolation order
    /// `order`. On error the history is left untouched.
    pub fn step(
        &mut self,
        history: &mut StepHistory<M::Coef>,
        dt: f64,
        order: usize,
    ) -> Result<StepReport, SolverError> {
        if order > MAX_ORDER {
            return Err(EtdError::UnsupportedOrder(order).into());
        }
        let needed = order.max(1);
        if history.len() < needed {
            return Err(SolverError::InsufficientHistory {
                order,
                needed,
                available: history.len(),
            });
        }
        let newest = history.newest();
        let ratio = if order == 2 { dt / newest.dt } else { 1.0 };
        let coeffs = self.coefficients(StepGeometry::new(dt, ratio, order)?)?;
        let rhs = self.assemble_rhs(history, &coeffs);
        let alpha_new = coeffs.alpha(-1);
        let beta_new = coeffs.beta(-1);
        let history_quadrature: f64 = (0..order)
            .map(|j| coeffs.beta(j as isize) * history.level(j).dissipation)
            .sum();
        let theta = self.theta;
        let c0 = newest.energy + theta * newest.state.r * newest.state.r;

        let mut r = newest.state.r;
        let mut psi = newest.state.psi.clone();
        let mut dissipation = newest.dissipation;
        let mut prev_residual = f64::INFINITY;
        let mut streak = 0;
        let mut newton_total = 0;
        let mut clamp_active;
        let mut quadrature;
        let mut iterations = 0;
        loop {
            iterations += 1;
            quadrature = beta_new * dissipation + history_quadrature;
            let (clamped, clipped) = clamp_dissipation(quadrature);
            clamp_active = clipped;
            let radial = self.model.radial(&psi);
            let (r_new, its) = solve_r(&radial, theta, c0 - clamped, r, &self.controls)?;
            newton_total += its;
            if r_new.abs() < self.controls.r_floor {
                return Err(SolverError::RNearZero(r_new));
            }
            let phi_guess = psi.mapv(|c| c * r_new);
            let nonlinear = self
                .model
                .nonlinear(&phi_guess)
                .map_err(|_| SolverError::PicardDiverged {
                    iterations,
                    residual: f64::INFINITY,
                })?;
            let mut next = rhs.clone();
            sub_scaled(&mut next, &nonlinear, alpha_new);
            let inv = 1.0 / r_new;
            next.mapv_inplace(|c| c * inv);
            if !all_finite(&next) {
                return Err(SolverError::PicardDiverged {
                    iterations,
                    residual: f64::INFINITY,
                });
            }
            let residual = self.model.sup_distance(&next, &psi);
            r = r_new;
            psi = next;
            if residual <= self.controls.picard_tol {
                break;
            }
            if residual > prev_residual {
                streak += 1;
                if streak >= self.controls.divergence_streak {
                    return Err(SolverError::PicardDiverged { iterations, residual });
                }
            } else {
                streak = 0;
            }
            if iterations >= self.controls.max_picard {
                return Err(SolverError::PicardDiverged { iterations, residual });
            }
            prev_residual = residual;
            dissipation = self
                .model
                .evaluate(&psi.mapv(|c| c * r))
                .map_err(|_| SolverError::PicardDiverged { iterations, residual })?
                .dissipation;
        }

        // R^(m+1) was solved against psi^(m). Keep phi = R psi from the update
        // and take R from the energy balance at that phi, so both equations
        // hold for the returned pair.
        let (clamped, _) = clamp_dissipation(quadrature);
        let phi = psi.mapv(|c| c * r);
        let room = c0 - clamped - self.model.energy(&phi);
        let (r, psi) = if theta > 0.0 && room > 0.0 {
            let balanced = r.signum() * (room / theta).sqrt();
            if balanced.abs() < self.controls.r_floor {
                return Err(SolverError::RNearZero(balanced));
            }
            let inv = 1.0 / balanced;
            (balanced, phi.mapv(|c| c * inv))
        } else {
            (r, psi)
        };

        let state = SpectralState {
            r,
            psi,
            t: newest.state.t + dt,
        };
        let phi = state.phi();
        let eval = self.model.evaluate(&phi)?;
        let energy = self.model.energy(&phi);
        let level = HistoryLevel {
            state,
            nonlinear: eval.nonlinear,
            dissipation: eval.dissipation,
            energy,
            dt,
        };
        let mut row = self.ledger_row(&level);
        row.picard_iters = iterations;
        row.newton_iters = newton_total;
        row.clamp_active = clamp_active;
        history.push(level);
        Ok(StepReport {
            row,
            dissipation_quadrature: quadrature,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_dissipation(-0.3), (0.0, true));
        assert_eq!(clamp_dissipation(0.0), (0.0, false));
        assert_eq!(clamp_dissipation(2.5), (2.5, false));
    }

    #[test]
    fn history_keeps_three_newest() {
        let level = |t: f64| HistoryLevel {
            state: SpectralState {
                r: 1.0,
                psi: Array2::<f64>::zeros((1, 1)),
                t,
            },
            nonlinear: Array2::zeros((1, 1)),
            dissipation: 0.0,
            energy: 0.0,
            dt: 0.1,
        };
        let mut h = StepHistory::new(level(0.0));
        for k in 1..5 {
            h.push(level(k as f64));
        }
        assert_eq!(h.len(), 3);
        let times: Vec<f64> = h.iter().map(|l| l.state.t).collect();
        assert_eq!(times, vec![4.0, 3.0, 2.0]);
    }
}
