//! Adaptive Gauss-Kronrod (7/15) quadrature, used as an independent oracle
//! for the exponential integrator weights.

#![allow(dead_code, clippy::excessive_precision)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and `|K - G|`.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= rel * k.abs() || err < 1e-300 || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    refine(f, a, m, rel, depth - 1) + refine(f, m, b, rel, depth - 1)
}

/// `int_0^1 f` for integrands that may be sharply peaked at 1. The interval
/// is cut at `1 - 10^-k` first so that no panel misses the peak. Pieces are
/// refined to relative accuracy `rel`, which is a bound on the total only
/// when `f` keeps one sign.
pub fn integrate_unit(f: impl Fn(f64) -> f64, rel: f64) -> f64 {
    let mut cuts = vec![0.0, 0.5];
    cuts.extend((1..=15).map(|k| 1.0 - 10f64.powi(-k)));
    cuts.push(1.0);
    cuts.windows(2).map(|w| refine(&f, w[0], w[1], rel, 60)).sum()
}

/// Lagrange basis polynomial `j` through `nodes`, as a plain product.
pub fn lagrange_basis(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &xi)| (x - xi) / (nodes[j] - xi))
        .product()
}

/// Interpolation nodes in units of the new step, newest first:
/// `t_{n+1} -> 1`, `t_n -> 0`, `t_{n-1} -> -1/ratio`.
pub fn step_nodes(order: usize, ratio: f64) -> Vec<f64> {
    [1.0, 0.0, -1.0 / ratio][..order + 1].to_vec()
}

/// `dt * int_0^1 e^{(1-eta) L dt} l_j(eta) d eta`.
pub fn alpha_oracle(order: usize, ratio: f64, l: f64, dt: f64, j: usize) -> f64 {
    let nodes = step_nodes(order, ratio);
    let z = l * dt;
    dt * integrate_unit(|eta| ((1.0 - eta) * z).exp() * lagrange_basis(&nodes, j, eta), 1e-14)
}

/// `dt * int_0^1 l_j(eta) d eta`.
pub fn beta_oracle(order: usize, ratio: f64, dt: f64, j: usize) -> f64 {
    let nodes = step_nodes(order, ratio);
    dt * integrate_unit(|eta| lagrange_basis(&nodes, j, eta), 1e-14)
}
