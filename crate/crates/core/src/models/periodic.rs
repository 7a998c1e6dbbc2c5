//! Allen-Cahn, MBE and PFC on the periodic Fourier backend.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::{
    check_finite, DomainSpec, DoubleWell, Evaluation, GradientFlow, ModelError, ModelKind, ModelSpec, Potential,
    RadialEnergy, RadialPart,
};
use crate::fourier::{FourierSpace, ModeField, NodalField, PeriodicGrid};

#[derive(Debug, Clone)]
pub struct PeriodicModel {
    spec: ModelSpec,
    space: FourierSpace,
    potential: Arc<dyn Potential>,
    symbols: Array2<f64>,
    /// Per-mode weight `w` of the quadratic energy `area/2 * sum w |c|^2`.
    energy_weight: Array2<f64>,
}

impl PeriodicModel {
    pub fn new(spec: ModelSpec) -> Result<Self, ModelError> {
        Self::with_potential(spec, Arc::new(DoubleWell))
    }

    /// Allen-Cahn with a custom potential `F`; the other models ignore it.
    pub fn with_potential(spec: ModelSpec, potential: Arc<dyn Potential>) -> Result<Self, ModelError> {
        let (length, nodes) = match spec.domain {
            DomainSpec::Periodic { length, nodes } => (length, nodes),
            DomainSpec::Neumann { .. } => {
                return Err(ModelError::BackendMismatch {
                    kind: spec.kind,
                    backend: "neumann",
                })
            }
        };
        if spec.kind.is_neumann() {
            return Err(ModelError::BackendMismatch {
                kind: spec.kind,
                backend: "periodic",
            });
        }
        spec.validate()?;
        let space = FourierSpace::new(PeriodicGrid::new(length, nodes)?);
        let k2 = space.wavenumber_sq();
        let (eps2, s, sigma) = (spec.epsilon_sq, spec.s, spec.sigma);
        let symbols = match spec.kind {
            ModelKind::AllenCahn => k2.mapv(|k| -eps2 * k - s),
            ModelKind::MbeSlope | ModelKind::MbeNoSlope => k2.mapv(|k| -eps2 * k * k - s * k),
            ModelKind::Pfc => k2.mapv(|k| -k * ((sigma - k).powi(2) + s)),
            ModelKind::CahnHilliard => unreachable!(),
        };
        let energy_weight = match spec.kind {
            ModelKind::AllenCahn => k2.mapv(|k| eps2 * k),
            ModelKind::MbeSlope | ModelKind::MbeNoSlope => k2.mapv(|k| eps2 * k * k),
            ModelKind::Pfc => k2.mapv(|k| (sigma - k).powi(2)),
            ModelKind::CahnHilliard => unreachable!(),
        };
        Ok(Self {
            spec,
            space,
            potential,
            symbols,
            energy_weight,
        })
    }

    pub fn space(&self) -> &FourierSpace {
        &self.space
    }

    fn project(&self, mut c: ModeField) -> ModeField {
        if self.spec.dealias {
            self.space.dealias_in_place(&mut c);
        }
        c
    }

    /// Spectral `f_M(grad phi)` (undealiased) and the nodal `|grad phi|^2`.
    fn mbe_force(&self, phi: &ModeField) -> (ModeField, NodalField) {
        let (gx, gy) = self.space.gradient_nodal(phi);
        let grad_sq = &gx * &gx + &gy * &gy;
        let flux = match self.spec.kind {
            ModelKind::MbeSlope => grad_sq.mapv(|g| -(g - 1.0)),
            _ => grad_sq.mapv(|g| 1.0 / (1.0 + g)),
        };
        let qx = &flux * &gx;
        let qy = &flux * &gy;
        (self.space.divergence_modes(&qx, &qy), grad_sq)
    }

    fn nodal_potential(&self, phi_nodal: &NodalField) -> NodalField {
        phi_nodal.mapv(|v| self.potential.derivative(v))
    }

    /// Spectral chemical potential with undealiased nonlinear part.
    fn mu_modes(&self, phi: &ModeField) -> Result<ModeField, ModelError> {
        let eps2 = self.spec.epsilon_sq;
        match self.spec.kind {
            ModelKind::AllenCahn => {
                let u = self.space.to_nodal(phi);
                let f = self.nodal_potential(&u);
                check_finite(&f, "f(phi)")?;
                let mut mu = self.space.forward_unchecked(&f);
                Zip::from(&mut mu)
                    .and(phi)
                    .and(self.space.wavenumber_sq())
                    .for_each(|m, &p, &k| *m += p * (eps2 * k));
                Ok(mu)
            }
            ModelKind::MbeSlope | ModelKind::MbeNoSlope => {
                let (mut mu, grad_sq) = self.mbe_force(phi);
                check_finite(&grad_sq, "|grad phi|^2")?;
                Zip::from(&mut mu)
                    .and(phi)
                    .and(self.space.wavenumber_sq())
                    .for_each(|m, &p, &k| *m += p * (eps2 * k * k));
                Ok(mu)
            }
            ModelKind::Pfc => {
                let u = self.space.to_nodal(phi);
                let cube = u.mapv(|v| v * v * v);
                check_finite(&cube, "phi^3")?;
                let mut mu = self.space.forward_unchecked(&cube);
                let (sigma, delta) = (self.spec.sigma, self.spec.delta);
                Zip::from(&mut mu)
                    .and(phi)
                    .and(self.space.wavenumber_sq())
                    .for_each(|m, &p, &k| *m += p * ((sigma - k).powi(2) - delta));
                Ok(mu)
            }
            ModelKind::CahnHilliard => unreachable!(),
        }
    }

    fn uniform_weights(&self) -> Vec<f64> {
        let h = self.space.grid().spacing();
        vec![h * h; self.space.nodes() * self.space.nodes()]
    }
}

impl GradientFlow for PeriodicModel {
    type Coef = Complex64;

    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn symbols(&self) -> &Array2<f64> {
        &self.symbols
    }

    fn spectral_shape(&self) -> (usize, usize) {
        (self.space.nodes(), self.space.nodes())
    }

    fn nodal_shape(&self) -> (usize, usize) {
        self.spectral_shape()
    }

    fn coordinates(&self) -> Vec<f64> {
        self.space.grid().coordinates()
    }

    fn node_layout(&self) -> &'static str {
        "uniform"
    }

    fn to_nodal(&self, c: &ModeField) -> NodalField {
        self.space.to_nodal(c)
    }

    fn from_nodal(&self, u: &NodalField) -> Result<ModeField, ModelError> {
        Ok(self.space.forward(u)?)
    }

    fn evaluate(&self, phi: &ModeField) -> Result<Evaluation<Complex64>, ModelError> {
        let s = self.spec.s;
        let k2 = self.space.wavenumber_sq();
        let area = self.space.grid().area();
        match self.spec.kind {
            ModelKind::AllenCahn => {
                let u = self.space.to_nodal(phi);
                let f = self.nodal_potential(&u);
                check_finite(&f, "f(phi)")?;
                let f_modes = self.space.forward_unchecked(&f);
                let mut nonlinear = self.project(f_modes.clone());
                Zip::from(&mut nonlinear).and(phi).for_each(|n, &p| *n -= p * s);
                let eps2 = self.spec.epsilon_sq;
                let mut mu = f_modes;
                Zip::from(&mut mu)
                    .and(phi)
                    .and(k2)
                    .for_each(|m, &p, &k| *m += p * (eps2 * k));
                let dissipation = self.space.norm_sq_modes(&mu);
                Ok(Evaluation { nonlinear, dissipation })
            }
            ModelKind::MbeSlope | ModelKind::MbeNoSlope => {
                let (force, grad_sq) = self.mbe_force(phi);
                check_finite(&grad_sq, "|grad phi|^2")?;
                let mut nonlinear = self.project(force.clone());
                Zip::from(&mut nonlinear)
                    .and(phi)
                    .and(k2)
                    .for_each(|n, &p, &k| *n -= p * (s * k));
                let eps2 = self.spec.epsilon_sq;
                let mut mu = force;
                Zip::from(&mut mu)
                    .and(phi)
                    .and(k2)
                    .for_each(|m, &p, &k| *m += p * (eps2 * k * k));
                let dissipation = self.space.norm_sq_modes(&mu);
                Ok(Evaluation { nonlinear, dissipation })
            }
            ModelKind::Pfc => {
                let u = self.space.to_nodal(phi);
                let cube = u.mapv(|v| v * v * v);
                check_finite(&cube, "phi^3")?;
                let cube_modes = self.space.forward_unchecked(&cube);
                let (sigma, delta) = (self.spec.sigma, self.spec.delta);
                let mut nonlinear = self.project(cube_modes.clone());
                Zip::from(&mut nonlinear)
                    .and(phi)
                    .and(k2)
                    .for_each(|n, &p, &k| *n = (*n - p * (s + delta)) * k);
                let mut mu = cube_modes;
                Zip::from(&mut mu)
                    .and(phi)
                    .and(k2)
                    .for_each(|m, &p, &k| *m += p * ((sigma - k).powi(2) - delta));
                let dissipation = area * Zip::from(&mu).and(k2).fold(0.0, |acc, m, &k| acc + k * m.norm_sqr());
                Ok(Evaluation { nonlinear, dissipation })
            }
            ModelKind::CahnHilliard => unreachable!(),
        }
    }

    fn energy(&self, phi: &ModeField) -> f64 {
        let quadratic = 0.5 * self.space.weighted_norm_sq(phi, &self.energy_weight);
        let rest = match self.spec.kind {
            ModelKind::AllenCahn => {
                let u = self.space.to_nodal(phi);
                self.space.integrate(&u.mapv(|v| self.potential.value(v)))
            }
            ModelKind::MbeSlope => {
                let (gx, gy) = self.space.gradient_nodal(phi);
                let g = &gx * &gx + &gy * &gy;
                self.space.integrate(&g.mapv(|g| 0.25 * (g - 1.0).powi(2)))
            }
            ModelKind::MbeNoSlope => {
                let (gx, gy) = self.space.gradient_nodal(phi);
                let g = &gx * &gx + &gy * &gy;
                self.space.integrate(&g.mapv(|g| -0.5 * g.ln_1p()))
            }
            ModelKind::Pfc => {
                let u = self.space.to_nodal(phi);
                let delta = self.spec.delta;
                self.space
                    .integrate(&u.mapv(|v| 0.25 * v.powi(4) - 0.5 * delta * v * v))
            }
            ModelKind::CahnHilliard => unreachable!(),
        };
        quadratic + rest
    }

    fn chemical_potential(&self, phi: &ModeField) -> NodalField {
        match self.mu_modes(phi) {
            Ok(mu) => self.space.to_nodal(&mu),
            Err(_) => Array2::from_elem(self.nodal_shape(), f64::NAN),
        }
    }

    fn potential_pairing(&self, phi: &ModeField, v: &ModeField) -> f64 {
        let mu = self.chemical_potential(phi);
        let vn = self.space.to_nodal(v);
        self.space.integrate(&(&mu * &vn))
    }

    fn radial(&self, psi: &ModeField) -> RadialEnergy {
        let quadratic = 0.5 * self.space.weighted_norm_sq(psi, &self.energy_weight);
        let weights = self.uniform_weights();
        match self.spec.kind {
            ModelKind::AllenCahn => RadialEnergy {
                quadratic,
                weights,
                part: RadialPart::Pointwise {
                    values: self.space.to_nodal(psi).into_iter().collect(),
                    potential: Arc::clone(&self.potential),
                },
            },
            ModelKind::MbeSlope | ModelKind::MbeNoSlope => {
                let (gx, gy) = self.space.gradient_nodal(psi);
                let grad_sq: Vec<f64> = (&gx * &gx + &gy * &gy).into_iter().collect();
                let part = if self.spec.kind == ModelKind::MbeSlope {
                    RadialPart::SlopeSelection { grad_sq }
                } else {
                    RadialPart::NoSlope { grad_sq }
                };
                RadialEnergy {
                    quadratic,
                    weights,
                    part,
                }
            }
            ModelKind::Pfc => {
                let u = self.space.to_nodal(psi);
                let h2 = weights[0];
                let quartic = 0.25 * h2 * u.iter().map(|v| v.powi(4)).sum::<f64>();
                let second = -0.5 * self.spec.delta * h2 * u.iter().map(|v| v * v).sum::<f64>();
                RadialEnergy {
                    quadratic: quadratic + second,
                    weights: Vec::new(),
                    part: RadialPart::Quartic { quartic },
                }
            }
            ModelKind::CahnHilliard => unreachable!(),
        }
    }

    fn mass(&self, phi: &ModeField) -> f64 {
        self.space.grid().area() * phi[[0, 0]].re
    }

    fn area(&self) -> f64 {
        self.space.grid().area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ac(eps2: f64, n: usize) -> PeriodicModel {
        let domain = DomainSpec::Periodic {
            length: 2.0 * PI,
            nodes: n,
        };
        PeriodicModel::new(ModelSpec::new(ModelKind::AllenCahn, eps2, domain)).unwrap()
    }

    fn pfc() -> PeriodicModel {
        let domain = DomainSpec::Periodic {
            length: 2.0 * PI,
            nodes: 16,
        };
        PeriodicModel::new(ModelSpec::pfc(1.0, 0.025, domain)).unwrap()
    }

    fn constant(m: &PeriodicModel, c: f64) -> ModeField {
        m.from_nodal(&Array2::from_elem(m.nodal_shape(), c)).unwrap()
    }

    #[test]
    fn symbol_examples() {
        let m = ac(0.01, 16);
        assert_eq!(m.symbols()[[0, 0]], -2.0);
        let p = pfc();
        // wavenumber 1 on (0, 2 pi): -1 * ((1 - 1)^2 + 0.025)
        assert_relative_eq!(p.symbols()[[1, 0]], -0.025, max_relative = 1e-15);
        assert!(p.symbols().iter().all(|&l| l <= 0.0));
    }

    #[test]
    fn backend_mismatch() {
        let domain = DomainSpec::Neumann {
            a: -1.0,
            b: 1.0,
            degree: 8,
        };
        let spec = ModelSpec::new(ModelKind::AllenCahn, 0.01, domain);
        assert!(matches!(
            PeriodicModel::new(spec),
            Err(ModelError::BackendMismatch { .. })
        ));
    }

    #[test]
    fn allen_cahn_nonlinear_examples() {
        let m = ac(0.01, 16);
        let zero = m.evaluate(&constant(&m, 0.0)).unwrap();
        assert!(zero.nonlinear.iter().all(|c| c.norm() == 0.0));
        let one = m.evaluate(&constant(&m, 1.0)).unwrap();
        let n = m.to_nodal(&one.nonlinear);
        assert!(n.iter().all(|v| (v + 2.0).abs() < 1e-14));
        assert!(one.dissipation.abs() < 1e-25);
    }

    #[test]
    fn pfc_constant_examples() {
        let p = pfc();
        let c = 0.3;
        let phi = constant(&p, c);
        let e = p.evaluate(&phi).unwrap();
        assert!(e.nonlinear.iter().all(|v| v.norm() < 1e-15));
        let mu = p.chemical_potential(&phi);
        let want = c + c.powi(3) - 0.025 * c;
        assert!(mu.iter().all(|v| (v - want).abs() < 1e-14));
    }

    #[test]
    fn allen_cahn_energy_and_potential() {
        let m = ac(1.0, 32);
        let zero = constant(&m, 0.0);
        assert_relative_eq!(m.energy(&zero), PI * PI, max_relative = 1e-14);
        assert_eq!(m.energy(&constant(&m, 1.0)), 0.0);
        let phi = m.from_nodal(&m.space().grid().sample(|x, _| x.sin())).unwrap();
        let mu = m.chemical_potential(&phi);
        let want = m.space().grid().sample(|x, _| x.sin().powi(3));
        for (a, b) in mu.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn radial_matches_energy() {
        for kind in [ModelKind::AllenCahn, ModelKind::MbeSlope, ModelKind::MbeNoSlope] {
            let domain = DomainSpec::Periodic {
                length: 2.0 * PI,
                nodes: 32,
            };
            let m = PeriodicModel::new(ModelSpec::new(kind, 0.01, domain)).unwrap();
            let psi = m
                .from_nodal(
                    &m.space()
                        .grid()
                        .sample(|x, y| 0.4 * (2.0 * x).sin() * (3.0 * y).cos() + 0.1),
                )
                .unwrap();
            let rad = m.radial(&psi);
            for r in [0.5, 1.0, 1.3] {
                let phi = psi.mapv(|c| c * r);
                assert_relative_eq!(rad.value(r), m.energy(&phi), max_relative = 1e-12);
            }
        }
        let p = pfc();
        let psi = p
            .from_nodal(&p.space().grid().sample(|x, y| x.sin() * y.cos() + 0.2))
            .unwrap();
        let rad = p.radial(&psi);
        assert_relative_eq!(rad.value(1.2), p.energy(&psi.mapv(|c| c * 1.2)), max_relative = 1e-12);
    }
}
