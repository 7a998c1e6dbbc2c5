//! Variable-step exponential multistep coefficients.
//!
//! For a step from `t_n` to `t_{n+1} = t_n + dt`, the nonlinear Duhamel
//! integral of a mode with linear symbol `L` is approximated by replacing
//! the integrand's data with its Lagrange interpolant through
//! `t_{n+1}, t_n, ..., t_{n+1-r}`:
//!
//! ```text
//! int_{t_n}^{t_{n+1}} e^{(t_{n+1}-s) L} u(s) ds  ≈  Σ_j alpha^{(r,j)} u(t_{n-j}),
//! int_{t_n}^{t_{n+1}} u(s) ds                    ≈  Σ_j beta^{(r,j)}  u(t_{n-j}),
//! ```
//!
//! with `j = -1, ..., r-1` (index `-1` is the new level). Orders `r = 0, 1, 2`
//! are supported, giving schemes of accuracy `r + 1`.
//!
//! The alpha weights are combinations of `dt * phi_k(z)`, `z = L * dt`. They
//! are evaluated from closed forms when `|z| >= TAYLOR_RADIUS` and from
//! power series otherwise; the two differences `phi_1 - phi_2` and
//! `phi_2 - 2 phi_3` that appear in the history weights get their own closed
//! forms so that no weight is formed by subtracting nearly equal numbers.

use ndarray::Array2;
use thiserror::Error;

/// Highest supported interpolation order `r`.
pub const MAX_ORDER: usize = 2;

/// Below this `|L dt|` the phi-functions are summed as power series.
pub const TAYLOR_RADIUS: f64 = 0.5;

const TAYLOR_TERMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EtdError {
    #[error("unsupported interpolation order {0} (supported: 0, 1, 2)")]
    UnsupportedOrder(usize),
    #[error("non-finite argument {name} = {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("invalid step geometry: {0}")]
    Geometry(String),
}

/// Size of the next step, ratio to the previous one, and interpolation order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGeometry {
    dt_next: f64,
    ratio: f64,
    order: usize,
}

impl StepGeometry {
    /// `ratio` is `dt_{n+1} / dt_n`; it is ignored unless `order == 2`.
    pub fn new(dt_next: f64, ratio: f64, order: usize) -> Result<Self, EtdError> {
        if order > MAX_ORDER {
            return Err(EtdError::UnsupportedOrder(order));
        }
        if !dt_next.is_finite() {
            return Err(EtdError::Domain {
                name: "dt",
                value: dt_next,
            });
        }
        if dt_next <= 0.0 {
            return Err(EtdError::Geometry(format!("step size must be positive, got {dt_next}")));
        }
        let ratio = if order == 2 {
            if !ratio.is_finite() || ratio <= 0.0 {
                return Err(EtdError::Geometry(format!("step ratio must be positive, got {ratio}")));
            }
            ratio
        } else {
            1.0
        };
        Ok(Self { dt_next, ratio, order })
    }

    pub fn dt_next(&self) -> f64 {
        self.dt_next
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of interpolation nodes, `r + 1`.
    pub fn levels(&self) -> usize {
        self.order + 1
    }
}

/// Weights `omega_{r,j}(eta)`, `j = -1..r-1`, of the interpolant evaluated
/// at `t_n + eta * dt_{n+1}`. Entry 0 belongs to the new level `t_{n+1}`.
pub fn lagrange_weights(order: usize, ratio: f64, eta: f64) -> Result<Vec<f64>, EtdError> {
    if !eta.is_finite() {
        return Err(EtdError::Domain {
            name: "eta",
            value: eta,
        });
    }
    match order {
        0 => Ok(vec![1.0]),
        1 => Ok(vec![eta, 1.0 - eta]),
        2 => {
            if !ratio.is_finite() || ratio <= 0.0 {
                return Err(EtdError::Geometry(format!("step ratio must be positive, got {ratio}")));
            }
            let g = ratio;
            Ok(vec![
                (g * eta + 1.0) * eta / (1.0 + g),
                (1.0 - eta) * (1.0 + g * eta),
                g * g * (eta - 1.0) * eta / (1.0 + g),
            ])
        }
        r => Err(EtdError::UnsupportedOrder(r)),
    }
}

/// `dt * phi_k` combinations for one value of `z = L dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PhiParts {
    /// `dt * phi_1(z)`
    pub a0: f64,
    /// `dt * phi_2(z)`
    pub a1: f64,
    /// `2 dt * phi_3(z)`
    pub a2: f64,
    /// `a0 - a1`
    pub d01: f64,
    /// `a1 - a2`
    pub d12: f64,
}

fn horner(z: f64, coef: impl Fn(usize) -> f64) -> f64 {
    (0..TAYLOR_TERMS).rev().fold(0.0, |acc, m| acc * z + coef(m))
}

fn phi_parts(l: f64, dt: f64) -> PhiParts {
    let z = l * dt;
    if z.abs() < TAYLOR_RADIUS {
        // phi_k(z) = sum z^m / (m + k)!
        let mut inv_fact = [0.0f64; TAYLOR_TERMS + 4];
        inv_fact[0] = 1.0;
        for i in 1..inv_fact.len() {
            inv_fact[i] = inv_fact[i - 1] / i as f64;
        }
        let phi1 = horner(z, |m| inv_fact[m + 1]);
        let phi2 = horner(z, |m| inv_fact[m + 2]);
        let phi3 = horner(z, |m| inv_fact[m + 3]);
        let d01 = horner(z, |m| (m + 1) as f64 * inv_fact[m + 2]);
        let d12 = horner(z, |m| (m + 1) as f64 * inv_fact[m + 3]);
        PhiParts {
            a0: dt * phi1,
            a1: dt * phi2,
            a2: 2.0 * dt * phi3,
            d01: dt * d01,
            d12: dt * d12,
        }
    } else {
        let em1 = z.exp_m1();
        let ez = z.exp();
        let z2 = z * z;
        let z3 = z2 * z;
        PhiParts {
            a0: dt * em1 / z,
            a1: dt * (em1 - z) / z2,
            a2: 2.0 * dt * (em1 - z - 0.5 * z2) / z3,
            d01: dt * ((z - 1.0) * ez + 1.0) / z2,
            d12: dt * ((z - 2.0) * ez + z + 2.0) / z3,
        }
    }
}

/// The three base integrals `(alpha_0, alpha_1, alpha_2)` for symbol `l`
/// and step `dt`; at `l = 0` they reduce to `(dt, dt/2, dt/3)`.
pub fn phi_base(l: f64, dt: f64) -> Result<(f64, f64, f64), EtdError> {
    check_finite("L", l)?;
    check_finite("dt", dt)?;
    let p = phi_parts(l, dt);
    Ok((p.a0, p.a1, p.a2))
}

fn check_finite(name: &'static str, value: f64) -> Result<(), EtdError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(EtdError::Domain { name, value })
    }
}

fn alpha_from_parts(order: usize, g: f64, p: &PhiParts) -> [f64; 3] {
    match order {
        0 => [p.a0, 0.0, 0.0],
        1 => [p.a1, p.d01, 0.0],
        _ => [
            (p.a1 + g * p.a2) / (1.0 + g),
            p.d01 + g * p.d12,
            -g * g / (1.0 + g) * p.d12,
        ],
    }
}

/// Alpha weights `alpha^{(r,j)}`, `j = -1..r-1`, for a single symbol value.
pub fn alpha_scalar(geom: &StepGeometry, l: f64) -> Result<Vec<f64>, EtdError> {
    check_finite("L", l)?;
    let p = phi_parts(l, geom.dt_next);
    Ok(alpha_from_parts(geom.order, geom.ratio, &p)[..geom.levels()].to_vec())
}

/// Per-mode alpha weights. Element `j + 1` of the returned vector holds
/// `alpha^{(r,j)}` for every mode.
pub fn alpha_coeffs(geom: &StepGeometry, symbols: &Array2<f64>) -> Result<Vec<Array2<f64>>, EtdError> {
    if let Some(&bad) = symbols.iter().find(|v| !v.is_finite()) {
        return Err(EtdError::Domain { name: "L", value: bad });
    }
    let levels = geom.levels();
    let mut out = vec![Array2::<f64>::zeros(symbols.raw_dim()); levels];
    for (idx, &l) in symbols.indexed_iter() {
        let p = phi_parts(l, geom.dt_next);
        let a = alpha_from_parts(geom.order, geom.ratio, &p);
        for (j, arr) in out.iter_mut().enumerate() {
            arr[idx] = a[j];
        }
    }
    Ok(out)
}

/// Quadrature weights `beta^{(r,j)}`, `j = -1..r-1`. They sum to `dt`.
///
/// For `r = 2` the last weight is negative; the solver clips the resulting
/// dissipation estimate at zero.
pub fn beta_coeffs(geom: &StepGeometry) -> Vec<f64> {
    let dt = geom.dt_next;
    let g = geom.ratio;
    match geom.order {
        0 => vec![dt],
        1 => vec![0.5 * dt, 0.5 * dt],
        _ => vec![
            dt * (2.0 * g + 3.0) / (6.0 * (1.0 + g)),
            (3.0 + g) / 6.0 * dt,
            -g * g * dt / (6.0 * (1.0 + g)),
        ],
    }
}

/// Everything one ETD step needs: the diagonal propagator `e^{dt L}` and the
/// alpha/beta weights for every interpolation level.
#[derive(Debug, Clone)]
pub struct EtdCoefficients {
    geometry: StepGeometry,
    propagator: Array2<f64>,
    alpha: Vec<Array2<f64>>,
    beta: Vec<f64>,
}

impl EtdCoefficients {
    pub fn new(geometry: StepGeometry, symbols: &Array2<f64>) -> Result<Self, EtdError> {
        let alpha = alpha_coeffs(&geometry, symbols)?;
        let propagator = symbols.mapv(|l| (l * geometry.dt_next).exp());
        Ok(Self {
            geometry,
            propagator,
            alpha,
            beta: beta_coeffs(&geometry),
        })
    }

    pub fn geometry(&self) -> &StepGeometry {
        &self.geometry
    }

    pub fn propagator(&self) -> &Array2<f64> {
        &self.propagator
    }

    /// `alpha^{(r,j)}` for `j` in `-1..r-1`.
    pub fn alpha(&self, j: isize) -> &Array2<f64> {
        &self.alpha[(j + 1) as usize]
    }

    pub fn beta(&self, j: isize) -> f64 {
        self.beta[(j + 1) as usize]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }
}
