//! Initial data: named analytic profiles, seeded random fields and PFC
//! crystallite layouts. Everything here is nodal, indexed `[i, j]` for
//! `(x_i, y_j)`.

use std::f64::consts::PI;
use std::str::FromStr;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `sin 2x cos 3y`
    Sin2xCos3y,
    /// `0.1 (cos 3x cos 2y + cos 5x cos 5y)`
    CosModes,
    /// `0.1 (sin 3x sin 2y + sin 5x sin 5y)`
    SinModes,
    /// `sin(pi x / 16) cos(pi y / 16)`
    PfcWave,
}

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::Sin2xCos3y,
        Profile::CosModes,
        Profile::SinModes,
        Profile::PfcWave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Sin2xCos3y => "sin2x-cos3y",
            Profile::CosModes => "cos-modes",
            Profile::SinModes => "sin-modes",
            Profile::PfcWave => "pfc-wave",
        }
    }

    pub fn value(self, x: f64, y: f64) -> f64 {
        match self {
            Profile::Sin2xCos3y => (2.0 * x).sin() * (3.0 * y).cos(),
            Profile::CosModes => 0.1 * ((3.0 * x).cos() * (2.0 * y).cos() + (5.0 * x).cos() * (5.0 * y).cos()),
            Profile::SinModes => 0.1 * ((3.0 * x).sin() * (2.0 * y).sin() + (5.0 * x).sin() * (5.0 * y).sin()),
            Profile::PfcWave => (PI * x / 16.0).sin() * (PI * y / 16.0).cos(),
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown profile `{s}`"))
    }
}

/// Square blocks of a rotated triangular lattice on a constant background.
#[derive(Debug, Clone, PartialEq)]
pub struct Crystallites {
    pub centers: Vec<[f64; 2]>,
    /// Lattice orientation per block, radians.
    pub angles: Vec<f64>,
    /// Side length of each (axis-aligned) block.
    pub block: f64,
    pub background: f64,
}

impl Crystallites {
    /// Lattice profile in local coordinates.
    pub fn lattice(&self, xl: f64, yl: f64) -> f64 {
        let r3 = 3f64.sqrt();
        self.background + 0.446 * ((0.66 / r3 * yl).cos() * (0.66 * xl).cos() - 0.5 * (1.32 / r3 * yl).cos())
    }

    /// Value at `(x, y)`; local coordinates are taken relative to the
    /// block center.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let half = 0.5 * self.block;
        for (c, &a) in self.centers.iter().zip(&self.angles) {
            let (dx, dy) = (x - c[0], y - c[1]);
            if dx.abs() <= half && dy.abs() <= half {
                let (s, co) = a.sin_cos();
                return self.lattice(dx * s + dy * co, -dx * co + dy * s);
            }
        }
        self.background
    }

    /// Layout problems on `(0, length)^2`.
    pub fn violations(&self, length: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.block.is_finite() && self.block > 0.0) {
            out.push(format!("initial.block must be positive, got {}", self.block));
            return out;
        }
        let half = 0.5 * self.block;
        for (k, c) in self.centers.iter().enumerate() {
            if c.iter().any(|&v| v - half < 0.0 || v + half > length) {
                out.push(format!(
                    "crystallite {k} at ({}, {}) does not fit in (0, {length})^2",
                    c[0], c[1]
                ));
            }
            for (m, d) in self.centers.iter().enumerate().skip(k + 1) {
                if (c[0] - d[0]).abs() < self.block && (c[1] - d[1]).abs() < self.block {
                    out.push(format!("crystallites {k} and {m} overlap"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Profile(Profile),
    /// `mean + amplitude (2u - 1)`, `u` uniform.
    Random {
        amplitude: f64,
        mean: f64,
    },
    Crystallites(Crystallites),
}

impl InitialCondition {
    /// Nodal values on the tensor grid `coords x coords`.
    pub fn sample(&self, coords: &[f64], seed: u64) -> Array2<f64> {
        let n = coords.len();
        match self {
            InitialCondition::Profile(p) => Array2::from_shape_fn((n, n), |(i, j)| p.value(coords[i], coords[j])),
            InitialCondition::Random { amplitude, mean } => {
                seeded_random_field(seed, *amplitude, (n, n)).mapv(|v| v + mean)
            }
            InitialCondition::Crystallites(c) => Array2::from_shape_fn((n, n), |(i, j)| c.value(coords[i], coords[j])),
        }
    }
}

/// I.i.d. uniform values in `[-a, a]`, filled row-major from a ChaCha20
/// stream keyed by `seed`. Each value uses the top 53 bits of one 64-bit
/// output.
pub fn seeded_random_field(seed: u64, amplitude: f64, shape: (usize, usize)) -> Array2<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = 1.0 / (1u64 << 53) as f64;
    Array2::from_shape_simple_fn(shape, || {
        let u = (rng.next_u64() >> 11) as f64 * scale;
        amplitude * (2.0 * u - 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout(angle: f64) -> Crystallites {
        Crystallites {
            centers: vec![[50.0, 50.0]],
            angles: vec![angle],
            block: 40.0,
            background: 0.285,
        }
    }

    #[test]
    fn block_center_value() {
        assert!((layout(0.0).value(50.0, 50.0) - 0.508).abs() < 1e-15);
    }

    #[test]
    fn background_outside_blocks() {
        let c = layout(PI / 4.0);
        for (x, y) in [(0.0, 0.0), (29.0, 50.0), (50.0, 71.0), (99.0, 99.0)] {
            assert_eq!(c.value(x, y), 0.285);
        }
    }

    #[test]
    fn quarter_turn_swaps_coordinates() {
        let (a, b) = (layout(0.0), layout(PI / 2.0));
        for (dx, dy) in [(1.3, -4.0), (7.7, 2.1), (-15.0, 9.9)] {
            let lhs = a.value(50.0 + dx, 50.0 + dy);
            let rhs = b.value(50.0 + dy, 50.0 + dx);
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn layout_errors() {
        let mut c = layout(0.0);
        c.centers.push([85.0, 60.0]);
        c.angles.push(0.0);
        let v = c.violations(100.0);
        assert!(v.iter().any(|m| m.contains("overlap")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("does not fit")), "{v:?}");
        c.centers[1] = [50.0, 90.0];
        assert!(c.violations(200.0).is_empty());
    }

    #[test]
    fn random_field_is_reproducible() {
        let a = seeded_random_field(3, 0.05, (16, 16));
        assert_eq!(a, seeded_random_field(3, 0.05, (16, 16)));
        assert_ne!(a, seeded_random_field(4, 0.05, (16, 16)));
        assert!(a.iter().all(|v| v.abs() <= 0.05));
    }

    proptest! {
        #[test]
        fn random_field_stays_in_range(seed in any::<u64>(), a in 1e-6f64..10.0) {
            let f = seeded_random_field(seed, a, (8, 8));
            prop_assert!(f.iter().all(|v| v.abs() <= a));
            let mean = f.sum() / 64.0;
            prop_assert!(mean.abs() < 0.5 * a);
        }
    }
}
