#[path = "support/quadrature.rs"]
mod quadrature;

use ndarray::Array2;
use proptest::prelude::*;
use quadrature::{alpha_oracle, beta_oracle, gk15, lagrange_basis, step_nodes};
use tdsr_core::etd::{alpha_scalar, beta_coeffs, lagrange_weights, phi_base};
use tdsr_core::{EtdCoefficients, StepGeometry};

const SYMBOLS: [f64; 5] = [0.0, -1e-8, -1.0, -1e2, -1e6];
const STEPS: [f64; 3] = [1e-4, 0.1, 1.0];
const RATIOS: [f64; 3] = [0.5, 1.0, 2.0];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn kronrod_rule_is_exact_for_degree_22() {
    let (k, _) = gk15(&|x: f64| x.powi(22) + x.powi(21), -1.0, 1.0);
    assert!(rel(k, 2.0 / 23.0) < 1e-14);
    let (k, _) = gk15(&|x: f64| x.powi(4), 0.0, 2.0);
    assert!(rel(k, 32.0 / 5.0) < 1e-14);
}

#[test]
fn alpha_matches_quadrature() {
    let mut worst = (0.0, String::new());
    for order in 0..=2 {
        for &g in &RATIOS {
            for &dt in &STEPS {
                let geom = StepGeometry::new(dt, g, order).unwrap();
                for &l in &SYMBOLS {
                    let got = alpha_scalar(&geom, l).unwrap();
                    for (j, &a) in got.iter().enumerate() {
                        let e = rel(a, alpha_oracle(order, g, l, dt, j));
                        if e > worst.0 {
                            worst = (e, format!("r={order} g={g} dt={dt} L={l} j={}", j as isize - 1));
                        }
                    }
                }
            }
        }
    }
    assert!(worst.0 <= 1e-10, "{worst:?}");
}

#[test]
fn beta_matches_quadrature() {
    for order in 0..=2 {
        for &g in &RATIOS {
            for &dt in &STEPS {
                let geom = StepGeometry::new(dt, g, order).unwrap();
                for (j, &b) in beta_coeffs(&geom).iter().enumerate() {
                    let want = beta_oracle(order, g, dt, j);
                    assert!(rel(b, want) <= 1e-12, "r={order} g={g} dt={dt} j={j}: {b} vs {want}");
                }
            }
        }
    }
}

#[test]
fn third_order_history_weight_is_negative() {
    // one-step-back node lies outside the step, so its quadrature weight is
    // negative: -dt/12 for equal steps
    let geom = StepGeometry::new(0.3, 1.0, 2).unwrap();
    let b = beta_coeffs(&geom);
    assert!((b[2] + 0.3 / 12.0).abs() < 1e-15);
    assert!(b[0] > 0.0 && b[1] > 0.0);
}

#[test]
fn lagrange_weights_match_product_form() {
    for order in 0..=2 {
        for &g in &[0.3, 1.0, 4.0] {
            let nodes = step_nodes(order, g);
            for i in 0..=8 {
                let eta = i as f64 / 8.0;
                let w = lagrange_weights(order, g, eta).unwrap();
                for (j, &wj) in w.iter().enumerate() {
                    assert!((wj - lagrange_basis(&nodes, j, eta)).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn per_mode_tables_agree_with_scalar_weights() {
    let symbols = Array2::from_shape_vec((1, 5), SYMBOLS.to_vec()).unwrap();
    let geom = StepGeometry::new(0.1, 0.7, 2).unwrap();
    let c = EtdCoefficients::new(geom, &symbols).unwrap();
    for (p, &l) in SYMBOLS.iter().enumerate() {
        let a = alpha_scalar(&geom, l).unwrap();
        for j in -1..2isize {
            assert_eq!(c.alpha(j)[[0, p]], a[(j + 1) as usize]);
        }
        assert_eq!(c.propagator()[[0, p]], (l * 0.1).exp());
    }
    assert_eq!(c.betas(), beta_coeffs(&geom).as_slice());
}

proptest! {
    #[test]
    fn alphas_sum_to_phi1(l in -1e4f64..0.0, dt in 1e-4f64..1.0, g in 0.2f64..5.0, order in 0usize..3) {
        let geom = StepGeometry::new(dt, g, order).unwrap();
        let sum: f64 = alpha_scalar(&geom, l).unwrap().iter().sum();
        let (a0, _, _) = phi_base(l, dt).unwrap();
        prop_assert!((sum - a0).abs() <= 1e-12 * a0.abs().max(1e-300) + 1e-15 * dt);
    }

    #[test]
    fn betas_integrate_polynomials_exactly(dt in 1e-3f64..2.0, g in 0.2f64..5.0, order in 0usize..3) {
        let geom = StepGeometry::new(dt, g, order).unwrap();
        let b = beta_coeffs(&geom);
        let nodes = step_nodes(order, g);
        for k in 0..=order as i32 {
            let q: f64 = b.iter().zip(&nodes).map(|(w, x)| w * x.powi(k)).sum();
            let exact = dt / (k as f64 + 1.0);
            prop_assert!((q - exact).abs() <= 1e-13 * dt);
        }
    }

    #[test]
    fn alphas_approach_betas_as_symbol_vanishes(dt in 1e-3f64..1.0, g in 0.2f64..5.0, order in 0usize..3) {
        let geom = StepGeometry::new(dt, g, order).unwrap();
        let a = alpha_scalar(&geom, -1e-12 / dt).unwrap();
        for (x, y) in a.iter().zip(beta_coeffs(&geom)) {
            prop_assert!((x - y).abs() <= 1e-11 * dt);
        }
    }

    #[test]
    fn weights_are_finite_for_extreme_symbols(l in -1e12f64..-1e6, dt in 1e-6f64..10.0, g in 0.1f64..10.0) {
        let geom = StepGeometry::new(dt, g, 2).unwrap();
        for a in alpha_scalar(&geom, l).unwrap() {
            prop_assert!(a.is_finite());
        }
    }
}
