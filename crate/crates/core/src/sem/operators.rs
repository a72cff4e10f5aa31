//! One-dimensional spectral operators on the reference interval.

use nalgebra::DMatrix;

use super::quadrature::{build_quadrature, legendre, pressure_rule, Quadrature1D, QuadratureKind};
use crate::error::{Error, Result};

/// The per-direction building blocks of the P_N / P_{N-2} pairing.
#[derive(Debug, Clone)]
pub struct OperatorSet1D {
    /// Velocity polynomial degree N.
    pub order: usize,
    /// N + 1 Gauss-Lobatto-Legendre points (velocity grid).
    pub gll: Quadrature1D,
    /// N - 1 Gauss-Legendre points (pressure grid, degree N - 2).
    pub gl: Quadrature1D,
    /// Nodal derivative on the GLL points, (N+1) x (N+1).
    pub deriv: DMatrix<f64>,
    /// Lagrange interpolation from GL to GLL points, (N+1) x (N-1).
    pub interp_gl_to_gll: DMatrix<f64>,
    /// Weak stiffness D^T W D on the reference interval.
    pub stiffness: DMatrix<f64>,
}

impl OperatorSet1D {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!(
                "velocity order must be >= 2 so the pressure space is non-empty, got {order}"
            )));
        }
        let gll = build_quadrature(QuadratureKind::GaussLobattoLegendre, order)?;
        let gl = pressure_rule(order - 2)?;
        let deriv = gll_derivative(&gll.nodes);
        let interp_gl_to_gll = interpolation_matrix(&gl.nodes, &gll.nodes);
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&gll.weights));
        let stiffness = deriv.transpose() * &w * &deriv;
        Ok(Self { order, gll, gl, deriv, interp_gl_to_gll, stiffness })
    }

    /// Points per direction on the velocity grid.
    pub fn n_gll(&self) -> usize {
        self.order + 1
    }

    /// Points per direction on the pressure grid.
    pub fn n_gl(&self) -> usize {
        self.order - 1
    }

    pub fn mass(&self) -> &[f64] {
        &self.gll.weights
    }
}

/// Collocation derivative matrix on GLL nodes. The diagonal is set to the
/// negative off-diagonal row sum so constants differentiate to zero exactly.
pub fn gll_derivative(nodes: &[f64]) -> DMatrix<f64> {
    let m = nodes.len();
    let n = m - 1;
    let p: Vec<f64> = nodes.iter().map(|&x| legendre(n, x).0).collect();
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..m {
            if i != j {
                let v = p[i] / (p[j] * (nodes[i] - nodes[j]));
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Matrix evaluating the Lagrange interpolant through `from` at `to`.
pub fn interpolation_matrix(from: &[f64], to: &[f64]) -> DMatrix<f64> {
    let bw = barycentric_weights(from);
    let mut out = DMatrix::zeros(to.len(), from.len());
    for (i, &x) in to.iter().enumerate() {
        if let Some(j) = from.iter().position(|&xj| (x - xj).abs() < 1e-15) {
            out[(i, j)] = 1.0;
            continue;
        }
        let terms: Vec<f64> = from.iter().zip(&bw).map(|(&xj, &w)| w / (x - xj)).collect();
        let denom: f64 = terms.iter().sum();
        for (j, t) in terms.iter().enumerate() {
            out[(i, j)] = t / denom;
        }
    }
    out
}
