use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use ndarray::{Array2, Zip};
use num_complex::Complex64;

/// Scalar type of a spectral coefficient: complex Fourier amplitudes or real
/// Legendre eigen-coefficients. Linear symbols and ETD weights are always
/// real, so coefficients only need scaling by `f64`.
pub trait Coefficient:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// `out = weights ⊙ field`
pub(crate) fn scale_by<C: Coefficient>(field: &Array2<C>, weights: &Array2<f64>) -> Array2<C> {
    let mut out = field.clone();
    Zip::from(&mut out).and(weights).for_each(|v, &w| *v = *v * w);
    out
}

/// `acc -= weights ⊙ field`
pub(crate) fn sub_scaled<C: Coefficient>(acc: &mut Array2<C>, field: &Array2<C>, weights: &Array2<f64>) {
    Zip::from(acc)
        .and(field)
        .and(weights)
        .for_each(|a, &f, &w| *a = *a - f * w);
}

pub(crate) fn all_finite<C: Coefficient>(field: &Array2<C>) -> bool {
    field.iter().all(|v| v.is_finite())
}
