//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use windqnn::circuit::BoundGate;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| c((i == j) as u8 as f64, 0.0)).collect())
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn h_matrix() -> Matrix {
    let s = 1.0 / 2f64.sqrt();
    vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
}

fn p_matrix(theta: f64) -> Matrix {
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(theta.cos(), theta.sin())],
    ]
}

fn ry_matrix(theta: f64) -> Matrix {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

/// `A_{n-1} (x) ... (x) A_0` with `u` on `qubit`; qubit q is bit q of the
/// basis index.
pub fn lift(u: &Matrix, qubit: usize, n: usize) -> Matrix {
    let mut out = identity(1);
    for q in (0..n).rev() {
        let factor = if q == qubit { u.clone() } else { identity(2) };
        out = kron(&out, &factor);
    }
    out
}

/// CX as a dense matrix assembled from projectors:
/// `|0><0|_c (x) I + |1><1|_c (x) X_t`.
pub fn cx_matrix(control: usize, target: usize, n: usize) -> Matrix {
    let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
    let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let x = vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
    let term = |on_control: &Matrix, on_target: &Matrix| {
        let mut out = identity(1);
        for q in (0..n).rev() {
            let f = if q == control {
                on_control.clone()
            } else if q == target {
                on_target.clone()
            } else {
                identity(2)
            };
            out = kron(&out, &f);
        }
        out
    };
    let a = term(&p0, &identity(2));
    let b = term(&p1, &x);
    a.iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(u, v)| u + v).collect())
        .collect()
}

pub fn gate_matrix(g: &BoundGate, n: usize) -> Matrix {
    match *g {
        BoundGate::H(q) => lift(&h_matrix(), q, n),
        BoundGate::P(q, t) => lift(&p_matrix(t), q, n),
        BoundGate::Ry(q, t) => lift(&ry_matrix(t), q, n),
        BoundGate::Cx(a, b) => cx_matrix(a, b, n),
    }
}

/// Final state of `gates` applied to `|0...0>` by dense matrix products.
pub fn dense_run(gates: &[BoundGate], n: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for g in gates {
        v = matvec(&gate_matrix(g, n), &v);
    }
    v
}

/// `<Z...Z>` as `<psi| Z^(x)n |psi>` with a dense diagonal operator.
pub fn dense_parity(state: &[Complex64], n: usize) -> f64 {
    let z = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]];
    let mut op = identity(1);
    for _ in 0..n {
        op = kron(&op, &z);
    }
    let zpsi = matvec(&op, state);
    state
        .iter()
        .zip(&zpsi)
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> BoundGate {
    let q = rng.random_range(0..n);
    let choice = if n > 1 { rng.random_range(0..4) } else { rng.random_range(0..3) };
    match choice {
        0 => BoundGate::H(q),
        1 => BoundGate::P(q, rng.random_range(-2.0 * PI..2.0 * PI)),
        2 => BoundGate::Ry(q, rng.random_range(-2.0 * PI..2.0 * PI)),
        _ => {
            let mut t = rng.random_range(0..n);
            while t == q {
                t = rng.random_range(0..n);
            }
            BoundGate::Cx(q, t)
        }
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Least squares with intercept through the normal equations, solved by
/// Gauss-Jordan elimination with partial pivoting. Returns
/// `(coefficients, intercept)`.
pub fn normal_equations_ols(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let d = x[0].len() + 1;
    let mut a = vec![vec![0.0; d + 1]; d];
    for (row, &t) in x.iter().zip(y) {
        let z: Vec<f64> = std::iter::once(1.0).chain(row.iter().copied()).collect();
        for i in 0..d {
            for j in 0..d {
                a[i][j] += z[i] * z[j];
            }
            a[i][d] += z[i] * t;
        }
    }
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..d {
            if r != col {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let sol: Vec<f64> = a.iter().map(|r| r[d]).collect();
    (sol[1..].to_vec(), sol[0])
}

/// Tree produced by exhaustive split search, in preorder.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleNode {
    Leaf(f64),
    Split(usize, f64),
}

fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

/// Grows a regression tree by trying every (feature, midpoint) pair and
/// keeping the lexicographically first one among those within
/// `TIE_TOLERANCE` (relative to the node SSE) of the minimum summed child SSE.
pub fn exhaustive_cart(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    min_split: usize,
    out: &mut Vec<OracleNode>,
) {
    let targets: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    if rows.len() < min_split || sse(&targets) == 0.0 {
        out.push(OracleNode::Leaf(mean));
        return;
    }
    let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<f64> = rows.iter().filter(|&&r| x[r][f] <= t).map(|&r| y[r]).collect();
            let right: Vec<f64> = rows.iter().filter(|&&r| x[r][f] > t).map(|&r| y[r]).collect();
            candidates.push((f, t, sse(&left) + sse(&right)));
        }
    }
    if candidates.is_empty() {
        out.push(OracleNode::Leaf(mean));
        return;
    }
    let best = candidates.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let &(f, t, _) = candidates
        .iter()
        .filter(|c| c.2 <= best + windqnn::baselines::TIE_TOLERANCE * sse(&targets))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .unwrap();
    out.push(OracleNode::Split(f, t));
    let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] <= t).collect();
    let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] > t).collect();
    exhaustive_cart(x, y, &left, min_split, out);
    exhaustive_cart(x, y, &right, min_split, out);
}

/// Preorder flattening of a fitted arena tree, comparable with
/// [`exhaustive_cart`] output.
pub fn preorder(nodes: &[windqnn::baselines::CartNode], at: usize, out: &mut Vec<OracleNode>) {
    use windqnn::baselines::CartNode;
    match &nodes[at] {
        CartNode::Leaf { value, .. } => out.push(OracleNode::Leaf(*value)),
        CartNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push(OracleNode::Split(*feature, *threshold));
            preorder(nodes, *left, out);
            preorder(nodes, *right, out);
        }
    }
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

pub fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
