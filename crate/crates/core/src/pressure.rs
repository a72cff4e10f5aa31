//! The consistent pressure Poisson operator `E = D M^-1 D^T`.
//!
//! Pressure vectors live in two spaces. Primal vectors (iterates, corrections)
//! are defined up to a constant and normalized to zero GL-weighted mean.
//! Dual vectors (right-hand sides, residuals) must be orthogonal to the
//! constants, which is what the range of the symmetric operator `E` is.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use crate::error::{check_len, Result};
use crate::sem::{Discretization, PressureField, VelocityField};

#[derive(Debug)]
pub struct PseudoLaplacian {
    disc: Discretization,
    dssum_passes: AtomicUsize,
}

impl PseudoLaplacian {
    pub fn new(disc: Discretization) -> Self {
        Self { disc, dssum_passes: AtomicUsize::new(0) }
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    pub fn len(&self) -> usize {
        self.disc.pressure_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gather-scatter passes made by operator applications so far.
    pub fn dssum_passes(&self) -> usize {
        self.dssum_passes.load(Ordering::Relaxed)
    }

    /// `out = D M^-1 D^T p`, matrix-free.
    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.len(), p.len())?;
        check_len(self.len(), out.len())?;
        let mut u = self.disc.gradient_local(p)?;
        self.disc.dssum(&mut u);
        self.dssum_passes.fetch_add(1, Ordering::Relaxed);
        self.disc.mass_inverse(&mut u);
        self.disc.divergence_into(&u, out)
    }

    pub fn apply(&self, p: &PressureField) -> Result<PressureField> {
        let mut out = PressureField::zeros(p.order, p.elements);
        self.apply_into(&p.data, &mut out.data)?;
        Ok(out)
    }

    /// `D g` projected onto the range of `E`.
    pub fn build_rhs(&self, g: &VelocityField) -> Result<PressureField> {
        let mut b = self.disc.apply_divergence(g)?;
        self.remove_dual_mean(&mut b.data);
        Ok(b)
    }

    /// GL-weighted mean of a pressure field.
    pub fn weighted_mean(&self, p: &[f64]) -> f64 {
        self.disc.pressure_integral(p) / self.disc.domain_area()
    }

    /// Subtracts the GL-weighted mean (primal normalization). Idempotent.
    pub fn project_out_mean(&self, p: &mut [f64]) {
        let mean = self.weighted_mean(p);
        p.iter_mut().for_each(|v| *v -= mean);
    }

    /// Removes the component of a dual vector along the constants: after the
    /// call `sum(b) = 0`. This is the adjoint of [`project_out_mean`](Self::project_out_mean).
    pub fn remove_dual_mean(&self, b: &mut [f64]) {
        let sum: f64 = b.iter().sum();
        let w = self.disc.pressure_weights();
        let c = sum / self.disc.domain_area();
        for (k, v) in b.iter_mut().enumerate() {
            *v -= c * w[k % w.len()];
        }
    }

    /// Dense diagonal block `E_ee` of element `e`, with the assembled mass.
    /// Local nodes of `e` that share a global node (an element that is its
    /// own periodic neighbor) are summed as in the full operator.
    pub fn element_block(&self, e: usize) -> DMatrix<f64> {
        let n1 = self.disc.ops.n_gll();
        let nv = n1 * n1;
        let l2g = &self.disc.gs.local_to_global()[e * nv..(e + 1) * nv];
        let inv_mass = &self.disc.inv_mass()[e * nv..(e + 1) * nv];
        let sum = DMatrix::from_fn(nv, nv, |r, c| if l2g[r] == l2g[c] { inv_mass[r] } else { 0.0 });
        let np = self.disc.ops.n_gl().pow(2);
        let mut block = DMatrix::zeros(np, np);
        for f in self.disc.gradient_factors() {
            let g = f.to_dense();
            block += g.transpose() * &sum * g;
        }
        block
    }

    /// Dense matrix assembled column by column from [`apply_into`](Self::apply_into).
    /// Only meant for verification on small meshes.
    pub fn to_dense_by_columns(&self) -> Result<DMatrix<f64>> {
        let n = self.len();
        let mut dense = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, &mut col)?;
            e[j] = 0.0;
            dense.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        }
        Ok(dense)
    }
}
