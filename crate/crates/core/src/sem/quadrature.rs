//! Gauss-Legendre and Gauss-Lobatto-Legendre quadrature on [-1, 1].

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Includes the endpoints; `order + 1` points.
    GaussLobattoLegendre,
    /// Interior points only; `order + 1` points.
    GaussLegendre,
}

/// Nodes and weights of a one-dimensional rule. `order` is the polynomial
/// degree of the Lagrange basis carried by the nodes, so both kinds have
/// `order + 1` points.
#[derive(Debug, Clone)]
pub struct Quadrature1D {
    pub kind: QuadratureKind,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Returns `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

pub fn build_quadrature(kind: QuadratureKind, order: usize) -> Result<Quadrature1D> {
    match kind {
        QuadratureKind::GaussLobattoLegendre => {
            if order < 2 {
                return Err(Error::InvalidArgument(format!(
                    "Gauss-Lobatto-Legendre rule needs order >= 2, got {order}"
                )));
            }
            let (nodes, weights) = gauss_lobatto_legendre(order)?;
            Ok(Quadrature1D { kind, order, nodes, weights })
        }
        QuadratureKind::GaussLegendre => {
            if order < 1 {
                return Err(Error::InvalidArgument(format!(
                    "Gauss-Legendre rule needs order >= 1, got {order}"
                )));
            }
            pressure_rule(order)
        }
    }
}

/// Gauss-Legendre rule of any order, including the one-point rule carried by
/// the degree-0 pressure space of N = 2.
pub(crate) fn pressure_rule(order: usize) -> Result<Quadrature1D> {
    let (nodes, weights) = gauss_legendre(order + 1)?;
    Ok(Quadrature1D { kind: QuadratureKind::GaussLegendre, order, nodes, weights })
}

fn newton<F: Fn(f64) -> (f64, f64)>(mut x: f64, f: F) -> Result<f64> {
    for _ in 0..NEWTON_MAX_ITER {
        let (value, slope) = f(x);
        let dx = value / slope;
        x -= dx;
        if dx.abs() <= NEWTON_TOL * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::LinearAlgebra(format!(
        "Newton iteration for quadrature node did not converge near {x}"
    )))
}

/// `points` Gauss-Legendre points: roots of P_points.
fn gauss_legendre(points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = points;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let x = if m % 2 == 1 && i == half - 1 {
            0.0
        } else {
            newton(guess, |x| legendre(m, x))?
        };
        let (_, dp) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // descending guesses: i-th largest root
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    Ok((nodes, weights))
}

/// Degree-`n` Gauss-Lobatto-Legendre rule: ±1 plus the roots of P_n'.
fn gauss_lobatto_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = n + 1;
    let nf = n as f64;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for i in 1..m.div_ceil(2) {
        let guess = (std::f64::consts::PI * i as f64 / nf).cos();
        let x = if n.is_multiple_of(2) && i == n / 2 {
            0.0
        } else {
            newton(guess, |x| {
                let (p, dp) = legendre(n, x);
                let ddp = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
                (dp, ddp)
            })?
        };
        nodes[n - i] = x;
        nodes[i] = -x;
    }
    for (x, w) in nodes.iter().zip(weights.iter_mut()) {
        let (p, _) = legendre(n, *x);
        *w = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    Ok((nodes, weights))
}
