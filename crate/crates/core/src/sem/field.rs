//! Element-blocked nodal fields.
//!
//! Element `e` occupies a contiguous block; inside it, node `(i, j)` (x index
//! `i`, y index `j`) sits at offset `j * n + i`.

use crate::error::{check_len, Result};

/// Two-component field on the GLL grid, (N+1)^2 values per element and
/// component. Shared interface nodes are stored once per element.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub order: usize,
    pub elements: usize,
    pub comps: [Vec<f64>; 2],
}

impl VelocityField {
    pub fn zeros(order: usize, elements: usize) -> Self {
        let len = elements * (order + 1) * (order + 1);
        Self { order, elements, comps: [vec![0.0; len], vec![0.0; len]] }
    }

    pub fn nodes_per_element(&self) -> usize {
        (self.order + 1) * (self.order + 1)
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps[0].is_empty()
    }

    pub fn check_conforms(&self, other: &Self) -> Result<()> {
        check_len(self.len(), other.len())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        for c in 0..2 {
            for (a, b) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *a += alpha * b;
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for c in &mut self.comps {
            c.iter_mut().for_each(|v| *v *= alpha);
        }
    }

    /// Largest absolute nodal value.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean norm over the element-local storage.
    pub fn local_norm(&self) -> f64 {
        self.comps.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Scalar field on the Gauss grid, (N-1)^2 values per element. No
/// continuity between elements.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub order: usize,
    pub elements: usize,
    pub data: Vec<f64>,
}

impl PressureField {
    pub fn zeros(order: usize, elements: usize) -> Self {
        let len = elements * (order - 1) * (order - 1);
        Self { order, elements, data: vec![0.0; len] }
    }

    pub fn from_vec(order: usize, elements: usize, data: Vec<f64>) -> Result<Self> {
        check_len(elements * (order - 1) * (order - 1), data.len())?;
        Ok(Self { order, elements, data })
    }

    pub fn nodes_per_element(&self) -> usize {
        (self.order - 1) * (self.order - 1)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn element(&self, e: usize) -> &[f64] {
        let n = self.nodes_per_element();
        &self.data[e * n..(e + 1) * n]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        axpy(alpha, &other.data, &mut self.data);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
