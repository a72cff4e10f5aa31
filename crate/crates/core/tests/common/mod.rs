//! Reference constructions built from first principles, sharing no code with
//! the library: Golub-Welsch quadrature, product-form Lagrange bases, exact
//! Gauss integration and coordinate-keyed assembly.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss rule from the symmetric tridiagonal Jacobi matrix with
/// off-diagonal `sqrt(beta_k)`, `k = 1..n-1`, and total mass `mu0`.
fn golub_welsch(n: usize, beta: impl Fn(usize) -> f64, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = beta(k).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `n`-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    golub_welsch(n, |k| (k * k) as f64 / ((2 * k - 1) * (2 * k + 1)) as f64, 2.0)
}

fn legendre_value(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Gauss-Lobatto-Legendre nodes and weights of degree `order`: endpoints plus
/// the zeros of `P'_order`, which are the Gauss-Jacobi(1, 1) nodes.
pub fn lobatto(order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = order - 1;
    let (inner, _) = golub_welsch(m, |k| (k * (k + 2)) as f64 / ((2 * k + 1) * (2 * k + 3)) as f64, 1.0);
    let nodes: Vec<f64> = std::iter::once(-1.0).chain(inner).chain(std::iter::once(1.0)).collect();
    let nn = (order * (order + 1)) as f64;
    let weights = nodes.iter().map(|&x| 2.0 / (nn * legendre_value(order, x).powi(2))).collect();
    (nodes, weights)
}

/// Lagrange basis polynomial `i` on `nodes`, evaluated at `x`.
pub fn lagrange(nodes: &[f64], i: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &xj)| (x - xj) / (nodes[i] - xj))
        .product()
}

/// Derivative of Lagrange basis polynomial `i` at `x` by the product rule.
pub fn lagrange_derivative(nodes: &[f64], i: usize, x: f64) -> f64 {
    let others: Vec<usize> = (0..nodes.len()).filter(|&j| j != i).collect();
    others
        .iter()
        .map(|&m| {
            let rest: f64 = others
                .iter()
                .filter(|&&j| j != m)
                .map(|&j| (x - nodes[j]) / (nodes[i] - nodes[j]))
                .product();
            rest / (nodes[i] - nodes[m])
        })
        .sum()
}

/// `∫ f` over [-1, 1] with a Gauss rule exact to degree `2 n - 1`.
pub fn integrate(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss(n);
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(xi)).sum()
}

/// Dense `E = Σ_c G_c^T Q M^-1 Q^T G_c` on a periodic `ex x ey` mesh of
/// `[0, lx] x [0, ly]`, every integral evaluated exactly. Local layouts are
/// element blocked, x fastest.
pub fn dense_pseudo_laplacian(ex: usize, ey: usize, lx: f64, ly: f64, order: usize) -> DMatrix<f64> {
    let (gll, gllw) = lobatto(order);
    let (gl, _) = gauss(order - 1);
    let (n1, ng) = (order + 1, order - 1);
    let (hx, hy) = (lx / ex as f64, ly / ey as f64);
    let quad = order + 2;

    // a[i][a] = ∫ φ_i ψ_a, b[i][a] = ∫ φ_i' ψ_a on the reference interval
    let a = DMatrix::from_fn(n1, ng, |i, k| integrate(quad, |x| lagrange(&gll, i, x) * lagrange(&gl, k, x)));
    let b = DMatrix::from_fn(n1, ng, |i, k| {
        integrate(quad, |x| lagrange_derivative(&gll, i, x) * lagrange(&gl, k, x))
    });
    // physical weak gradients with the Jacobian folded in
    let gx_e = (&a * (hy / 2.0)).kronecker(&b);
    let gy_e = b.kronecker(&(&a * (hx / 2.0)));

    let ne = ex * ey;
    let np = ne * ng * ng;
    let mut keys: HashMap<(i64, i64), usize> = HashMap::new();
    let mut l2g = Vec::with_capacity(ne * n1 * n1);
    let key = |v: f64, len: f64| ((v.rem_euclid(len) / len * 1e9).round() as i64).rem_euclid(1_000_000_000);
    for e in 0..ne {
        let (cx, cy) = (e % ex, e / ex);
        for j in 0..n1 {
            for i in 0..n1 {
                let x = (cx as f64 + 0.5 * (gll[i] + 1.0)) * hx;
                let y = (cy as f64 + 0.5 * (gll[j] + 1.0)) * hy;
                let next = keys.len();
                l2g.push(*keys.entry((key(x, lx), key(y, ly))).or_insert(next));
            }
        }
    }
    let nglob = keys.len();
    let mut mass = vec![0.0; nglob];
    for e in 0..ne {
        for j in 0..n1 {
            for i in 0..n1 {
                mass[l2g[e * n1 * n1 + j * n1 + i]] += hx * hy / 4.0 * gllw[i] * gllw[j];
            }
        }
    }

    let mut e_mat = DMatrix::zeros(np, np);
    for ge in [&gx_e, &gy_e] {
        // Q^T G: global velocity rows
        let mut qg = DMatrix::zeros(nglob, np);
        for e in 0..ne {
            for r in 0..n1 * n1 {
                for c in 0..ng * ng {
                    qg[(l2g[e * n1 * n1 + r], e * ng * ng + c)] += ge[(r, c)];
                }
            }
        }
        let mut scaled = qg.clone();
        for (mut row, m) in scaled.row_iter_mut().zip(&mass) {
            row /= *m;
        }
        e_mat += qg.transpose() * scaled;
    }
    e_mat
}

/// Bilinear Q1 stiffness plus mass form `∫ ∇u·∇v` and `∫ u v` of one
/// rectangle `[x0, x1] x [y0, y1]` by 2x2 Gauss quadrature, local nodes
/// ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1).
pub fn q1_cell(x0: f64, x1: f64, y0: f64, y1: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4]) {
    let (g, w) = gauss(2);
    let (hx, hy) = (x1 - x0, y1 - y0);
    let mut k = [[0.0; 4]; 4];
    let mut m = [[0.0; 4]; 4];
    let shape = |s: f64, t: f64| {
        let (u, v) = ((s + 1.0) / 2.0, (t + 1.0) / 2.0);
        let val = [(1.0 - u) * (1.0 - v), u * (1.0 - v), (1.0 - u) * v, u * v];
        let dx = [-(1.0 - v) / hx, (1.0 - v) / hx, -v / hx, v / hx];
        let dy = [-(1.0 - u) / hy, -u / hy, (1.0 - u) / hy, u / hy];
        (val, dx, dy)
    };
    for (qa, wa) in g.iter().zip(&w) {
        for (qb, wb) in g.iter().zip(&w) {
            let (val, dx, dy) = shape(*qa, *qb);
            let jw = wa * wb * hx * hy / 4.0;
            for r in 0..4 {
                for c in 0..4 {
                    k[r][c] += jw * (dx[r] * dx[c] + dy[r] * dy[c]);
                    m[r][c] += jw * val[r] * val[c];
                }
            }
        }
    }
    (k, m)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}
