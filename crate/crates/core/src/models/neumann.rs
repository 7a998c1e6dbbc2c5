//! Cahn-Hilliard with homogeneous Neumann data on the Legendre backend.

use std::sync::Arc;

use ndarray::{Array2, Zip};

use super::{
    check_finite, DomainSpec, DoubleWell, Evaluation, GradientFlow, ModelError, ModelKind, ModelSpec, Potential,
    RadialEnergy, RadialPart,
};
use crate::legendre::{EigenField, NeumannBasis};

#[derive(Debug, Clone)]
pub struct NeumannModel {
    spec: ModelSpec,
    basis: NeumannBasis,
    potential: Arc<dyn Potential>,
    /// `lambda_k + lambda_l`
    pair: Array2<f64>,
    symbols: Array2<f64>,
    weights: Vec<f64>,
}

impl NeumannModel {
    pub fn new(spec: ModelSpec) -> Result<Self, ModelError> {
        Self::with_potential(spec, Arc::new(DoubleWell))
    }

    pub fn with_potential(spec: ModelSpec, potential: Arc<dyn Potential>) -> Result<Self, ModelError> {
        let (a, b, degree) = match spec.domain {
            DomainSpec::Neumann { a, b, degree } => (a, b, degree),
            DomainSpec::Periodic { .. } => {
                return Err(ModelError::BackendMismatch {
                    kind: spec.kind,
                    backend: "periodic",
                })
            }
        };
        if spec.kind != ModelKind::CahnHilliard {
            return Err(ModelError::BackendMismatch {
                kind: spec.kind,
                backend: "neumann",
            });
        }
        spec.validate()?;
        let basis = NeumannBasis::new(degree, a, b)?;
        let pair = basis.pair_eigenvalues();
        let (eps2, s) = (spec.epsilon_sq, spec.s);
        let symbols = pair.mapv(|l| -l * (eps2 * l + s));
        let w = basis.weights();
        let weights = (0..w.len()).flat_map(|i| w.iter().map(move |wj| w[i] * wj)).collect();
        Ok(Self {
            spec,
            basis,
            potential,
            pair,
            symbols,
            weights,
        })
    }

    pub fn basis(&self) -> &NeumannBasis {
        &self.basis
    }

    /// `mu_bar = eps^2 (lambda_k + lambda_l) phi_bar + P^T (I f(phi), h h) P`.
    fn mu_bar(&self, phi: &EigenField) -> Result<(EigenField, EigenField), ModelError> {
        let u = self.basis.to_nodal(phi);
        let f = u.mapv(|v| self.potential.derivative(v));
        check_finite(&f, "f(phi)")?;
        let f_bar = self.basis.project(&f);
        let eps2 = self.spec.epsilon_sq;
        let mut mu = f_bar.clone();
        Zip::from(&mut mu)
            .and(phi)
            .and(&self.pair)
            .for_each(|m, &p, &l| *m += eps2 * l * p);
        Ok((mu, f_bar))
    }
}

impl GradientFlow for NeumannModel {
    type Coef = f64;

    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn symbols(&self) -> &Array2<f64> {
        &self.symbols
    }

    fn spectral_shape(&self) -> (usize, usize) {
        (self.basis.modes(), self.basis.modes())
    }

    fn nodal_shape(&self) -> (usize, usize) {
        (self.basis.node_count(), self.basis.node_count())
    }

    fn coordinates(&self) -> Vec<f64> {
        self.basis.nodes().to_vec()
    }

    fn node_layout(&self) -> &'static str {
        "gauss-lobatto"
    }

    fn to_nodal(&self, c: &EigenField) -> Array2<f64> {
        self.basis.to_nodal(c)
    }

    fn from_nodal(&self, u: &Array2<f64>) -> Result<EigenField, ModelError> {
        check_finite(u, "initial data")?;
        Ok(self.basis.project_nonlinear(u)?)
    }

    fn evaluate(&self, phi: &EigenField) -> Result<Evaluation<f64>, ModelError> {
        let (mu, f_bar) = self.mu_bar(phi)?;
        let s = self.spec.s;
        let mut nonlinear = f_bar;
        Zip::from(&mut nonlinear)
            .and(phi)
            .and(&self.pair)
            .for_each(|n, &p, &l| *n = l * (*n - s * p));
        let dissipation = self.basis.grad_norm_sq(&mu);
        Ok(Evaluation { nonlinear, dissipation })
    }

    fn energy(&self, phi: &EigenField) -> f64 {
        let quad: f64 = Zip::from(phi).and(&self.pair).fold(0.0, |acc, &p, &l| acc + l * p * p);
        let u = self.basis.to_nodal(phi);
        0.5 * self.spec.epsilon_sq * quad + self.basis.integrate(&u.mapv(|v| self.potential.value(v)))
    }

    fn chemical_potential(&self, phi: &EigenField) -> Array2<f64> {
        match self.mu_bar(phi) {
            Ok((mu, _)) => self.basis.to_nodal(&mu),
            Err(_) => Array2::from_elem(self.nodal_shape(), f64::NAN),
        }
    }

    fn potential_pairing(&self, phi: &EigenField, v: &EigenField) -> f64 {
        match self.mu_bar(phi) {
            Ok((mu, _)) => Zip::from(&mu).and(v).fold(0.0, |acc, &m, &w| acc + m * w),
            Err(_) => f64::NAN,
        }
    }

    fn radial(&self, psi: &EigenField) -> RadialEnergy {
        let quad: f64 = Zip::from(psi).and(&self.pair).fold(0.0, |acc, &p, &l| acc + l * p * p);
        RadialEnergy {
            quadratic: 0.5 * self.spec.epsilon_sq * quad,
            weights: self.weights.clone(),
            part: RadialPart::Pointwise {
                values: self.basis.to_nodal(psi).into_iter().collect(),
                potential: Arc::clone(&self.potential),
            },
        }
    }

    fn mass(&self, phi: &EigenField) -> f64 {
        self.basis.integrate_eigen(phi)
    }

    fn area(&self) -> f64 {
        self.basis.area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ch(degree: usize) -> NeumannModel {
        let domain = DomainSpec::Neumann {
            a: -1.0,
            b: 1.0,
            degree,
        };
        NeumannModel::new(ModelSpec::new(ModelKind::CahnHilliard, 2.5e-3, domain)).unwrap()
    }

    #[test]
    fn constant_mode_symbol_is_zero() {
        let m = ch(12);
        assert_eq!(m.symbols()[[0, 0]], 0.0);
        assert!(m.symbols().iter().all(|&l| l <= 0.0));
    }

    #[test]
    fn constant_state_has_no_dissipation() {
        let m = ch(12);
        let phi = m.from_nodal(&Array2::from_elem(m.nodal_shape(), 0.4)).unwrap();
        let e = m.evaluate(&phi).unwrap();
        assert!(e.dissipation < 1e-24);
        let worst = e.nonlinear.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lmax = m.pair.iter().fold(0.0f64, |a, &l| a.max(l));
        assert!(worst < 1e-15 * lmax, "{worst} vs {lmax}");
        assert_relative_eq!(m.mass(&phi), 1.6, max_relative = 1e-14);
    }

    #[test]
    fn radial_matches_energy() {
        let m = ch(16);
        let u = m
            .basis()
            .sample(|x, y| 0.3 * (std::f64::consts::PI * x).cos() * y + 0.1);
        let psi = m.from_nodal(&u).unwrap();
        let rad = m.radial(&psi);
        for r in [0.7, 1.0, 1.1] {
            assert_relative_eq!(rad.value(r), m.energy(&psi.mapv(|c| c * r)), max_relative = 1e-12);
        }
    }
}
