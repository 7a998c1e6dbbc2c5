//! Periodic pseudo-spectral space on a square `N x N` grid.
//!
//! Nodal values live at `x_i = i L / N`, `y_j = j L / N`; array index
//! `[i, j]` is `(x_i, y_j)`. Mode arrays use the standard FFT ordering on both
//! axes, so index `p` carries wavenumber `p` for `p < N/2` and `p - N`
//! otherwise. Amplitudes are normalized so that `e^{i 2 pi (k x + l y) / L}`
//! maps to a unit coefficient at `(k, l)`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

pub type NodalField = Array2<f64>;
pub type ModeField = Array2<Complex64>;

/// Coefficients whose Hermitian partner differs by more than this (relative
/// to the largest amplitude) do not describe a real field.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FourierError {
    #[error("grid needs an even node count >= 8, got {0}")]
    BadNodeCount(usize),
    #[error("domain length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("field shape {got:?} does not match the {expected}x{expected} grid")]
    Shape { got: (usize, usize), expected: usize },
    #[error("non-finite nodal value at {0:?}")]
    NonFinite((usize, usize)),
    #[error("coefficients are not Hermitian-symmetric (defect {defect:.3e} at {at:?})")]
    Symmetry { defect: f64, at: (usize, usize) },
}

/// A square periodic domain `(0, length)^2` sampled by `nodes` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    length: f64,
    nodes: usize,
}

impl PeriodicGrid {
    pub fn new(length: f64, nodes: usize) -> Result<Self, FourierError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(FourierError::BadLength(length));
        }
        if nodes < 8 || !nodes.is_multiple_of(2) {
            return Err(FourierError::BadNodeCount(nodes));
        }
        Ok(Self { length, nodes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.nodes as f64
    }

    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// Node coordinates along one axis.
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| i as f64 * self.spacing()).collect()
    }

    /// Signed integer wavenumber carried by FFT index `p`.
    pub fn mode_number(&self, p: usize) -> i64 {
        let n = self.nodes as i64;
        let p = p as i64;
        if p < n / 2 {
            p
        } else {
            p - n
        }
    }

    /// Physical wavenumber `2 pi k / L` for FFT index `p`.
    pub fn wavenumber(&self, p: usize) -> f64 {
        2.0 * PI * self.mode_number(p) as f64 / self.length
    }

    /// Evaluates `f(x, y)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> NodalField {
        let h = self.spacing();
        Array2::from_shape_fn((self.nodes, self.nodes), |(i, j)| f(i as f64 * h, j as f64 * h))
    }
}

/// FFT plans plus the wavenumber tables for one grid. Immutable once built.
#[derive(Clone)]
pub struct FourierSpace {
    grid: PeriodicGrid,
    forward_plan: Arc<dyn Fft<f64>>,
    inverse_plan: Arc<dyn Fft<f64>>,
    /// Physical wavenumbers per index, Nyquist kept (even-order symbols).
    wavenumbers: Vec<f64>,
    /// Derivative multipliers per index, Nyquist zeroed (odd-order symbols).
    derivative: Vec<f64>,
    wavenumber_sq: Array2<f64>,
    dealias_cutoff: i64,
}

impl std::fmt::Debug for FourierSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierSpace").field("grid", &self.grid).finish()
    }
}

impl FourierSpace {
    pub fn new(grid: PeriodicGrid) -> Self {
        let n = grid.nodes();
        let mut planner = FftPlanner::new();
        let forward_plan = planner.plan_fft_forward(n);
        let inverse_plan = planner.plan_fft_inverse(n);
        let wavenumbers: Vec<f64> = (0..n).map(|p| grid.wavenumber(p)).collect();
        let derivative: Vec<f64> = (0..n).map(|p| if p == n / 2 { 0.0 } else { wavenumbers[p] }).collect();
        let wavenumber_sq = Array2::from_shape_fn((n, n), |(p, q)| wavenumbers[p].powi(2) + wavenumbers[q].powi(2));
        Self {
            grid,
            forward_plan,
            inverse_plan,
            wavenumbers,
            derivative,
            wavenumber_sq,
            dealias_cutoff: n as i64 / 3,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.grid.nodes()
    }

    /// `|kappa|^2 = kx^2 + ky^2` per mode in physical units.
    pub fn wavenumber_sq(&self) -> &Array2<f64> {
        &self.wavenumber_sq
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    fn check_shape<T>(&self, a: &Array2<T>) -> Result<(), FourierError> {
        let n = self.nodes();
        if a.dim() != (n, n) {
            return Err(FourierError::Shape {
                got: a.dim(),
                expected: n,
            });
        }
        Ok(())
    }

    fn transform_2d(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.nodes();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows (y direction), then columns via transposition
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }

    /// Nodal values to normalized Fourier amplitudes.
    pub fn forward(&self, f: &NodalField) -> Result<ModeField, FourierError> {
        self.check_shape(f)?;
        if let Some((idx, _)) = f.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(FourierError::NonFinite(idx));
        }
        Ok(self.forward_unchecked(f))
    }

    pub(crate) fn forward_unchecked(&self, f: &NodalField) -> ModeField {
        let n = self.nodes();
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_2d(&mut data, &self.forward_plan);
        let scale = 1.0 / (n * n) as f64;
        Array2::from_shape_vec((n, n), data.into_iter().map(|c| c * scale).collect()).expect("square buffer")
    }

    /// Amplitudes back to nodal values, after verifying Hermitian symmetry.
    pub fn inverse(&self, c: &ModeField) -> Result<NodalField, FourierError> {
        self.check_shape(c)?;
        self.check_hermitian(c)?;
        Ok(self.to_nodal(c))
    }

    /// Real part of the inverse transform, without the symmetry check.
    pub fn to_nodal(&self, c: &ModeField) -> NodalField {
        let n = self.nodes();
        let mut data: Vec<Complex64> = c.iter().copied().collect();
        self.transform_2d(&mut data, &self.inverse_plan);
        Array2::from_shape_vec((n, n), data.into_iter().map(|c| c.re).collect()).expect("square buffer")
    }

    fn check_hermitian(&self, c: &ModeField) -> Result<(), FourierError> {
        let n = self.nodes();
        let scale = c.iter().fold(1.0f64, |m, v| m.max(v.norm()));
        let mut worst = (0.0, (0, 0));
        for ((p, q), v) in c.indexed_iter() {
            let partner = c[[(n - p) % n, (n - q) % n]].conj();
            let d = (v - partner).norm() / scale;
            if d > worst.0 {
                worst = (d, (p, q));
            }
        }
        if worst.0 > SYMMETRY_TOLERANCE {
            return Err(FourierError::Symmetry {
                defect: worst.0,
                at: worst.1,
            });
        }
        Ok(())
    }

    /// Pointwise product of the amplitudes with a real per-mode symbol.
    pub fn apply_symbol(&self, c: &ModeField, symbol: &Array2<f64>) -> ModeField {
        let mut out = c.clone();
        Zip::from(&mut out).and(symbol).for_each(|v, &s| *v *= s);
        out
    }

    /// Spectral `(d/dx, d/dy)` of a field, returned on the grid. The Nyquist
    /// mode is dropped from both derivatives.
    pub fn gradient_nodal(&self, c: &ModeField) -> (NodalField, NodalField) {
        let (dx, dy) = self.gradient_modes(c);
        (self.to_nodal(&dx), self.to_nodal(&dy))
    }

    pub(crate) fn gradient_modes(&self, c: &ModeField) -> (ModeField, ModeField) {
        let i = Complex64::new(0.0, 1.0);
        let dx = Array2::from_shape_fn(c.raw_dim(), |(p, q)| i * self.derivative[p] * c[[p, q]]);
        let dy = Array2::from_shape_fn(c.raw_dim(), |(p, q)| i * self.derivative[q] * c[[p, q]]);
        (dx, dy)
    }

    /// Amplitudes of `d qx/dx + d qy/dy` for a nodal vector field.
    pub fn divergence_modes(&self, qx: &NodalField, qy: &NodalField) -> ModeField {
        let ax = self.forward_unchecked(qx);
        let ay = self.forward_unchecked(qy);
        let i = Complex64::new(0.0, 1.0);
        Array2::from_shape_fn(ax.raw_dim(), |(p, q)| {
            i * (self.derivative[p] * ax[[p, q]] + self.derivative[q] * ay[[p, q]])
        })
    }

    /// Trapezoid rule `h^2 * sum(f)`, spectrally accurate for periodic data.
    pub fn integrate(&self, f: &NodalField) -> f64 {
        let h = self.grid.spacing();
        h * h * f.sum()
    }

    /// `int |f|^2` from amplitudes (Parseval).
    pub fn norm_sq_modes(&self, c: &ModeField) -> f64 {
        self.grid.area() * c.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `int w |f|^2` in spectral space for a real per-mode weight `w`.
    pub fn weighted_norm_sq(&self, c: &ModeField, weight: &Array2<f64>) -> f64 {
        let mut acc = 0.0;
        Zip::from(c).and(weight).for_each(|v, &w| acc += w * v.norm_sqr());
        self.grid.area() * acc
    }

    /// Whether the mode at FFT index `(p, q)` survives the 2/3 rule.
    pub fn is_resolved(&self, p: usize, q: usize) -> bool {
        self.grid.mode_number(p).abs() <= self.dealias_cutoff && self.grid.mode_number(q).abs() <= self.dealias_cutoff
    }

    /// Zeroes every mode with `|k| > N/3` or `|l| > N/3`.
    pub fn dealias(&self, c: &ModeField) -> ModeField {
        let mut out = c.clone();
        self.dealias_in_place(&mut out);
        out
    }

    pub fn dealias_in_place(&self, c: &mut ModeField) {
        for ((p, q), v) in c.indexed_iter_mut() {
            if !self.is_resolved(p, q) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
