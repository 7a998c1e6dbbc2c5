//! Legendre-Galerkin space for homogeneous Neumann data on `[a, b]^2`.
//!
//! The trial basis is `h_k = L_k - c_k L_{k+2}`, `c_k = k(k+1)/((k+2)(k+3))`,
//! `k = 0..N-2`, which has `h_k'(a) = h_k'(b) = 0` built in. The generalized
//! eigenproblem `S p = lambda M p` is solved with M-orthonormal eigenvectors
//! `P`, so that in the tensor basis `g_k(x) g_l(y)` with `g_k = sum_i P_ik h_i`
//! the mass matrix is the identity and the stiffness is `lambda_k + lambda_l`.
//!
//! Nodal data live on the `(N+1)^2` Gauss-Lobatto grid; index `[i, j]` is
//! `(x_i, y_j)` with nodes in ascending order.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use thiserror::Error;

/// Coefficients of a field in the `g_k(x) g_l(y)` basis, `(N-1) x (N-1)`.
pub type EigenField = Array2<f64>;

const NODE_TOLERANCE: f64 = 1e-14;
const NODE_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegendreError {
    #[error("polynomial degree must be at least 4, got {0}")]
    BadDegree(usize),
    #[error("interval [{0}, {1}] is empty or not finite")]
    BadInterval(f64, f64),
    #[error("mass matrix is not positive definite")]
    MassNotDefinite,
    #[error("Gauss-Lobatto node iteration did not converge")]
    NodesDiverged,
    #[error("field shape {got:?} does not match expected {expected:?}")]
    Shape {
        got: (usize, usize),
        expected: (usize, usize),
    },
}

fn c_coef(k: usize) -> f64 {
    let k = k as f64;
    k * (k + 1.0) / ((k + 2.0) * (k + 3.0))
}

fn legendre_norm(m: usize) -> f64 {
    2.0 / (2 * m + 1) as f64
}

/// `L_0(x) ..= L_n(x)` by the three-term recurrence.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    if n >= 1 {
        out[1] = x;
    }
    for m in 1..n {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0) * x * out[m] - mf * out[m - 1]) / (mf + 1.0);
    }
    out
}

/// `L_0'(x) ..= L_n'(x)` via `L'_{m+1} = L'_{m-1} + (2m+1) L_m`.
pub fn legendre_derivatives(n: usize, x: f64) -> Vec<f64> {
    let l = legendre_values(n, x);
    let mut out = vec![0.0; n + 1];
    if n >= 1 {
        out[1] = 1.0;
    }
    for m in 1..n {
        out[m + 1] = out[m - 1] + (2 * m + 1) as f64 * l[m];
    }
    out
}

/// Gauss-Lobatto nodes and weights on `[-1, 1]`, `n + 1` points ascending.
fn gauss_lobatto(n: usize) -> Result<(Vec<f64>, Vec<f64>), LegendreError> {
    let mut nodes = vec![0.0; n + 1];
    let nf = n as f64;
    for (i, node) in nodes.iter_mut().enumerate() {
        // Chebyshev-Gauss-Lobatto guess, ascending
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        let mut converged = false;
        for _ in 0..NODE_MAX_ITERS {
            let l = legendre_values(n, x);
            let step = (x * l[n] - l[n - 1]) / ((nf + 1.0) * l[n]);
            x -= step;
            if step.abs() <= NODE_TOLERANCE {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LegendreError::NodesDiverged);
        }
        *node = x;
    }
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    let weights = nodes
        .iter()
        .map(|&x| {
            let ln = legendre_values(n, x)[n];
            2.0 / (nf * (nf + 1.0) * ln * ln)
        })
        .collect();
    Ok((nodes, weights))
}

/// Basis, quadrature and eigen-decomposition for polynomial degree `N`.
#[derive(Debug, Clone)]
pub struct NeumannBasis {
    degree: usize,
    a: f64,
    b: f64,
    mass: Array2<f64>,
    stiff: Vec<f64>,
    eigvals: Vec<f64>,
    eigvecs: Array2<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `h_k` at the nodes, `(N+1) x (N-1)`.
    h_nodes: Array2<f64>,
    /// `g_k` at the nodes.
    g_nodes: Array2<f64>,
    /// `(l_a, g_k)` for the Lagrange cardinal functions `l_a` of the nodes.
    g_moments: Array2<f64>,
}

impl NeumannBasis {
    pub fn new(degree: usize, a: f64, b: f64) -> Result<Self, LegendreError> {
        if degree < 4 {
            return Err(LegendreError::BadDegree(degree));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(LegendreError::BadInterval(a, b));
        }
        let n = degree;
        let m = n - 1;
        let jac = 0.5 * (b - a);

        let mut mass = Array2::<f64>::zeros((m, m));
        for j in 0..m {
            let cj = c_coef(j);
            mass[[j, j]] = jac * (legendre_norm(j) + cj * cj * legendre_norm(j + 2));
            if j + 2 < m {
                let v = -jac * cj * legendre_norm(j + 2);
                mass[[j, j + 2]] = v;
                mass[[j + 2, j]] = v;
            }
        }
        let stiff: Vec<f64> = (0..m)
            .map(|j| {
                let jf = j as f64;
                jf * (jf + 1.0) * (1.0 - c_coef(j)) / jac
            })
            .collect();

        // h_0 is constant and M-orthogonal to every other h_k, so the zero
        // eigenvalue separates exactly; the rest is a dense SPD problem.
        let inner = m - 1;
        let m_inner = DMatrix::from_fn(inner, inner, |i, j| mass[[i + 1, j + 1]]);
        let chol = m_inner.cholesky().ok_or(LegendreError::MassNotDefinite)?;
        let l = chol.l();
        let l_inv = l.clone().try_inverse().ok_or(LegendreError::MassNotDefinite)?;
        let sqrt_s = DMatrix::from_fn(inner, inner, |i, j| if i == j { stiff[i + 1].sqrt() } else { 0.0 });
        let x = &l_inv * sqrt_s;
        let c = &x * x.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let vecs = l_inv.transpose() * eig.eigenvectors;
        let mut order: Vec<usize> = (0..inner).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));

        let mut eigvals = vec![0.0; m];
        let mut eigvecs = Array2::<f64>::zeros((m, m));
        eigvecs[[0, 0]] = 1.0 / mass[[0, 0]].sqrt();
        for (col, &src) in order.iter().enumerate() {
            eigvals[col + 1] = eig.eigenvalues[src];
            // fix the sign so that the largest component is positive
            let v = vecs.column(src);
            let pivot = v
                .iter()
                .fold(0.0f64, |acc, &x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for i in 0..inner {
                eigvecs[[i + 1, col + 1]] = sign * v[i];
            }
        }

        let (ref_nodes, ref_weights) = gauss_lobatto(n)?;
        let nodes: Vec<f64> = ref_nodes.iter().map(|&xi| a + jac * (xi + 1.0)).collect();
        let weights: Vec<f64> = ref_weights.iter().map(|&w| w * jac).collect();

        let mut h_nodes = Array2::<f64>::zeros((n + 1, m));
        let mut lag = Array2::<f64>::zeros((n + 1, n + 1));
        for (i, &xi) in ref_nodes.iter().enumerate() {
            let lv = legendre_values(n, xi);
            for k in 0..m {
                h_nodes[[i, k]] = lv[k] - c_coef(k) * lv[k + 2];
            }
            for (mm, &v) in lv.iter().enumerate() {
                lag[[i, mm]] = v;
            }
        }
        // Moments of the cardinal functions: l_a = sum_m D_ma L_m with the
        // discrete Legendre norms, then integrated exactly against h_k.
        let mut h_moments = Array2::<f64>::zeros((n + 1, m));
        for aa in 0..=n {
            let d = |mm: usize| {
                let gamma = if mm == n { 2.0 / n as f64 } else { legendre_norm(mm) };
                ref_weights[aa] * lag[[aa, mm]] / gamma
            };
            for k in 0..m {
                h_moments[[aa, k]] = jac * (d(k) * legendre_norm(k) - c_coef(k) * d(k + 2) * legendre_norm(k + 2));
            }
        }
        let g_nodes = h_nodes.dot(&eigvecs);
        let g_moments = h_moments.dot(&eigvecs);

        Ok(Self {
            degree,
            a,
            b,
            mass,
            stiff,
            eigvals,
            eigvecs,
            nodes,
            weights,
            h_nodes,
            g_nodes,
            g_moments,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Number of basis functions per axis, `N - 1`.
    pub fn modes(&self) -> usize {
        self.degree - 1
    }

    /// Number of quadrature nodes per axis, `N + 1`.
    pub fn node_count(&self) -> usize {
        self.degree + 1
    }

    pub fn mass(&self) -> &Array2<f64> {
        &self.mass
    }

    /// Diagonal of the stiffness matrix `(h_k', h_k')`.
    pub fn stiffness(&self) -> &[f64] {
        &self.stiff
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigvecs
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn h_at_nodes(&self) -> &Array2<f64> {
        &self.h_nodes
    }

    pub fn g_at_nodes(&self) -> &Array2<f64> {
        &self.g_nodes
    }

    pub fn area(&self) -> f64 {
        (self.b - self.a).powi(2)
    }

    fn reference(&self, x: f64) -> (f64, f64) {
        let jac = 0.5 * (self.b - self.a);
        ((x - self.a) / jac - 1.0, jac)
    }

    /// `h_0(x) ..= h_{N-2}(x)` at a physical point.
    pub fn h_values(&self, x: f64) -> Vec<f64> {
        let (xi, _) = self.reference(x);
        let lv = legendre_values(self.degree, xi);
        (0..self.modes()).map(|k| lv[k] - c_coef(k) * lv[k + 2]).collect()
    }

    /// `h_k'(x)` in physical units.
    pub fn h_derivatives(&self, x: f64) -> Vec<f64> {
        let (xi, jac) = self.reference(x);
        let dv = legendre_derivatives(self.degree, xi);
        (0..self.modes())
            .map(|k| (dv[k] - c_coef(k) * dv[k + 2]) / jac)
            .collect()
    }

    /// `g_k(x)` at a physical point.
    pub fn g_values(&self, x: f64) -> Vec<f64> {
        let h = self.h_values(x);
        (0..self.modes())
            .map(|k| (0..self.modes()).map(|i| h[i] * self.eigvecs[[i, k]]).sum())
            .collect()
    }

    /// `lambda_k + lambda_l` for every coefficient pair.
    pub fn pair_eigenvalues(&self) -> Array2<f64> {
        let m = self.modes();
        Array2::from_shape_fn((m, m), |(k, l)| self.eigvals[k] + self.eigvals[l])
    }

    fn check(&self, a: &Array2<f64>, expected: (usize, usize)) -> Result<(), LegendreError> {
        if a.dim() != expected {
            return Err(LegendreError::Shape { got: a.dim(), expected });
        }
        Ok(())
    }

    /// Tensor-product evaluation of an eigen-field on the node grid.
    pub fn eigen_to_nodal(&self, f: &EigenField) -> Result<Array2<f64>, LegendreError> {
        self.check(f, (self.modes(), self.modes()))?;
        Ok(self.to_nodal(f))
    }

    pub(crate) fn to_nodal(&self, f: &EigenField) -> Array2<f64> {
        self.g_nodes.dot(f).dot(&self.g_nodes.t())
    }

    /// `P^T N P` where `N_kl = (I u, h_k h_l)` and `I u` is the polynomial
    /// interpolant of the node values `u`. For `u` already in the trial
    /// space this inverts [`NeumannBasis::eigen_to_nodal`].
    pub fn project_nonlinear(&self, nodal: &Array2<f64>) -> Result<EigenField, LegendreError> {
        self.check(nodal, (self.node_count(), self.node_count()))?;
        Ok(self.project(nodal))
    }

    pub(crate) fn project(&self, nodal: &Array2<f64>) -> EigenField {
        self.g_moments.t().dot(nodal).dot(&self.g_moments)
    }

    /// `sum (lambda_k + lambda_l) mu_kl^2 = ||grad mu||^2`.
    pub fn grad_norm_sq(&self, mu: &EigenField) -> f64 {
        let mut acc = 0.0;
        for ((k, l), v) in mu.indexed_iter() {
            acc += (self.eigvals[k] + self.eigvals[l]) * v * v;
        }
        acc
    }

    /// Tensor Gauss-Lobatto quadrature.
    pub fn integrate(&self, nodal: &Array2<f64>) -> f64 {
        let w = &self.weights;
        nodal.indexed_iter().map(|((i, j), v)| w[i] * w[j] * v).sum()
    }

    /// `int_Omega sum_kl f_kl g_k g_l`; only the constant mode contributes.
    pub fn integrate_eigen(&self, f: &EigenField) -> f64 {
        let g0 = self.eigvecs[[0, 0]] * (self.b - self.a);
        f[[0, 0]] * g0 * g0
    }

    /// Evaluates `f(x, y)` on the node grid.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        let n = self.node_count();
        Array2::from_shape_fn((n, n), |(i, j)| f(self.nodes[i], self.nodes[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gl_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
        gauss_lobatto(n).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            NeumannBasis::new(3, -1.0, 1.0).unwrap_err(),
            LegendreError::BadDegree(3)
        );
        assert!(matches!(
            NeumannBasis::new(8, 1.0, 1.0),
            Err(LegendreError::BadInterval(..))
        ));
    }

    #[test]
    fn gauss_lobatto_examples() {
        // N = 4: nodes 0, +-sqrt(3/7), +-1 with weights 32/45, 49/90, 1/10
        let (x, w) = gl_rule(4);
        let s = (3.0f64 / 7.0).sqrt();
        for (got, want) in x.iter().zip([-1.0, -s, 0.0, s, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in w.iter().zip([0.1, 49.0 / 90.0, 32.0 / 45.0, 49.0 / 90.0, 0.1]) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn constant_mode_and_mass_entry() {
        let b = NeumannBasis::new(8, -1.0, 1.0).unwrap();
        assert_eq!(b.stiffness()[0], 0.0);
        assert_eq!(b.eigenvalues()[0], 0.0);
        assert_relative_eq!(b.mass()[[0, 0]], 2.0, max_relative = 1e-15);
        assert!(b.eigenvalues()[1..].iter().all(|&l| l > 0.0));
        assert!(b.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn neumann_residual() {
        let b = NeumannBasis::new(24, 0.0, 3.0).unwrap();
        for x in [0.0, 3.0] {
            let d = b.h_derivatives(x);
            assert!(d.iter().all(|v| v.abs() < 1e-10), "{d:?}");
        }
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let b = NeumannBasis::new(16, 0.0, 2.0).unwrap();
        let p = b.eigenvectors();
        let ptmp = p.t().dot(b.mass()).dot(p);
        let s = Array2::from_diag(&ndarray::Array1::from(b.stiffness().to_vec()));
        let ptsp = p.t().dot(&s).dot(p);
        for ((i, j), v) in ptmp.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "PtMP[{i},{j}] = {v}");
            let want = if i == j { b.eigenvalues()[i] } else { 0.0 };
            assert!((ptsp[[i, j]] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn mass_is_banded() {
        let b = NeumannBasis::new(12, -1.0, 1.0).unwrap();
        for ((k, l), v) in b.mass().indexed_iter() {
            let d = k.abs_diff(l);
            if d != 0 && d != 2 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let b = NeumannBasis::new(10, -1.0, 1.0).unwrap();
        assert_relative_eq!(b.integrate(&b.sample(|_, _| 1.0)), 4.0, max_relative = 1e-14);
        assert_relative_eq!(b.integrate(&b.sample(|x, _| x * x)), 4.0 / 3.0, max_relative = 1e-14);
        // degree 2N exceeds the exactness degree
        let exact = 2.0 * 2.0 / 21.0;
        let got = b.integrate(&b.sample(|x, _| x.powi(20)));
        assert!((got - exact).abs() > 1e-6);
        // degree 2N - 1 is integrated exactly
        let got = b.integrate(&b.sample(|x, _| x.powi(18) + x.powi(19)));
        assert_relative_eq!(got, 2.0 * 2.0 / 19.0, max_relative = 1e-13);
    }

    #[test]
    fn constant_eigen_field_is_constant() {
        let b = NeumannBasis::new(8, 0.0, 1.0).unwrap();
        let mut f = EigenField::zeros((7, 7));
        f[[0, 0]] = 2.5;
        let u = b.eigen_to_nodal(&f).unwrap();
        let g0 = b.eigenvectors()[[0, 0]];
        assert!(u.iter().all(|v| (v - 2.5 * g0 * g0).abs() < 1e-14));
        assert_relative_eq!(b.integrate_eigen(&f), b.integrate(&u), max_relative = 1e-14);
    }

    #[test]
    fn round_trip_through_nodes() {
        let b = NeumannBasis::new(12, -1.0, 1.0).unwrap();
        let f = EigenField::from_shape_fn((11, 11), |(k, l)| ((k * 7 + l * 3) % 5) as f64 - 2.0);
        let back = b.project_nonlinear(&b.eigen_to_nodal(&f).unwrap()).unwrap();
        for (x, y) in back.iter().zip(f.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn grad_norm_simple_cases() {
        let b = NeumannBasis::new(8, -1.0, 1.0).unwrap();
        let mut mu = EigenField::zeros((7, 7));
        mu[[0, 0]] = 3.0;
        assert_eq!(b.grad_norm_sq(&mu), 0.0);
        mu[[0, 0]] = 0.0;
        mu[[1, 0]] = 1.0;
        assert_relative_eq!(b.grad_norm_sq(&mu), b.eigenvalues()[1], max_relative = 1e-15);
    }
}
