//! Spectral element building blocks: quadrature, 1D operators, the periodic
//! rectangular mesh, element-blocked fields, gather-scatter, and the 2D
//! gradient / divergence pair of the P_N / P_{N-2} discretization.

pub mod field;
pub mod gather;
pub mod mesh;
pub mod operators;
pub mod quadrature;

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

pub use field::{PressureField, VelocityField};
pub use gather::GatherScatter;
pub use mesh::Mesh2D;
pub use operators::OperatorSet1D;
pub use quadrature::{build_quadrature, Quadrature1D, QuadratureKind};

use crate::error::{check_len, Result};

/// A pair of 1D factors `(ay, ax)` acting on an element block `U` (rows y,
/// columns x) as `ay * U * ax^T`, i.e. the Kronecker product `ay ⊗ ax` on
/// x-fastest storage.
#[derive(Debug, Clone)]
pub struct TensorFactor {
    pub ay: DMatrix<f64>,
    pub ax: DMatrix<f64>,
    ay_t: DMatrix<f64>,
    ax_t: DMatrix<f64>,
}

impl TensorFactor {
    pub fn new(ay: DMatrix<f64>, ax: DMatrix<f64>) -> Self {
        let ay_t = ay.transpose();
        let ax_t = ax.transpose();
        Self { ay, ax, ay_t, ax_t }
    }

    /// `(ay ⊗ ax) u`
    pub fn apply(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        &self.ay * u * &self.ax_t
    }

    /// `(ay ⊗ ax)^T u`
    pub fn apply_transpose(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        &self.ay_t * u * &self.ax
    }

    /// Multiply-adds spent by [`apply`](Self::apply).
    pub fn apply_cost(&self) -> u64 {
        let (ry, cy) = self.ay.shape();
        let rx = self.ax.nrows();
        let cx = self.ax.ncols();
        (ry * cy * cx + ry * cx * rx) as u64
    }

    /// Multiply-adds spent by [`apply_transpose`](Self::apply_transpose).
    pub fn apply_transpose_cost(&self) -> u64 {
        let (ry, cy) = self.ay.shape();
        let (rx, cx) = self.ax.shape();
        (cy * ry * rx + cy * rx * cx) as u64
    }

    /// Dense Kronecker matrix, for oracles.
    pub fn to_dense(&self) -> DMatrix<f64> {
        self.ay.kronecker(&self.ax)
    }
}

pub(crate) fn block_from_slice(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn block_to_slice(m: &DMatrix<f64>, out: &mut [f64]) {
    let cols = m.ncols();
    for j in 0..m.nrows() {
        for i in 0..cols {
            out[j * cols + i] = m[(j, i)];
        }
    }
}

pub(crate) fn block_add_to_slice(m: &DMatrix<f64>, out: &mut [f64]) {
    let cols = m.ncols();
    for j in 0..m.nrows() {
        for i in 0..cols {
            out[j * cols + i] += m[(j, i)];
        }
    }
}

/// The spectral element discretization on a uniform periodic mesh.
#[derive(Debug)]
pub struct Discretization {
    pub ops: OperatorSet1D,
    pub mesh: Mesh2D,
    pub gs: GatherScatter,
    /// Weak gradient factors, pressure (GL) to velocity (GLL), per component.
    grad: [TensorFactor; 2],
    /// Element stiffness split `[W_y ⊗ K_x, K_y ⊗ W_x]` with Jacobians.
    stiff: [TensorFactor; 2],
    /// Assembled GLL mass in local storage.
    mass: Vec<f64>,
    inv_mass: Vec<f64>,
    /// Element GLL mass (unassembled), one element block.
    elem_mass: Vec<f64>,
    /// GL quadrature weights times Jacobian, one element block.
    pressure_weights: Vec<f64>,
    flops: AtomicU64,
}

impl Discretization {
    pub fn new(mesh: Mesh2D, order: usize) -> Result<Self> {
        let ops = OperatorSet1D::new(order)?;
        let gs = GatherScatter::new(&mesh, order);
        let (hx, hy) = mesh.element_size();
        let n1 = ops.n_gll();

        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&ops.gll.weights));
        let wj = &w * &ops.interp_gl_to_gll;
        let dtwj = ops.deriv.transpose() * &wj;
        let grad = [
            TensorFactor::new(&wj * (hy / 2.0), dtwj.clone()),
            TensorFactor::new(dtwj, &wj * (hx / 2.0)),
        ];
        let stiff = [
            TensorFactor::new(&w * (hy / 2.0), &ops.stiffness * (2.0 / hx)),
            TensorFactor::new(&ops.stiffness * (2.0 / hy), &w * (hx / 2.0)),
        ];

        let jac = hx * hy / 4.0;
        let gw = &ops.gll.weights;
        let elem_mass: Vec<f64> =
            (0..n1 * n1).map(|k| jac * gw[k / n1] * gw[k % n1]).collect();
        let mut mass: Vec<f64> = elem_mass.iter().cycle().take(gs.local_len()).copied().collect();
        gs.dssum(&mut mass);
        let inv_mass = mass.iter().map(|m| 1.0 / m).collect();

        let pw = &ops.gl.weights;
        let ng = ops.n_gl();
        let pressure_weights = (0..ng * ng).map(|k| jac * pw[k / ng] * pw[k % ng]).collect();

        Ok(Self {
            ops,
            mesh,
            gs,
            grad,
            stiff,
            mass,
            inv_mass,
            elem_mass,
            pressure_weights,
            flops: AtomicU64::new(0),
        })
    }

    pub fn order(&self) -> usize {
        self.ops.order
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn velocity_len(&self) -> usize {
        self.gs.local_len()
    }

    pub fn pressure_len(&self) -> usize {
        self.num_elements() * self.ops.n_gl() * self.ops.n_gl()
    }

    pub fn gradient_factors(&self) -> &[TensorFactor; 2] {
        &self.grad
    }

    /// Assembled diagonal GLL mass, stored per local node.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn inv_mass(&self) -> &[f64] {
        &self.inv_mass
    }

    pub fn element_mass(&self) -> &[f64] {
        &self.elem_mass
    }

    /// GL quadrature weights (with Jacobian) of one element.
    pub fn pressure_weights(&self) -> &[f64] {
        &self.pressure_weights
    }

    /// Multiply-adds spent in element tensor kernels since construction.
    pub fn flop_count(&self) -> u64 {
        self.flops.load(Ordering::Relaxed)
    }

    fn count(&self, n: u64) {
        self.flops.fetch_add(n, Ordering::Relaxed);
    }

    /// Physical coordinates of GLL node `(i, j)` of element `e`.
    pub fn gll_point(&self, e: usize, i: usize, j: usize) -> (f64, f64) {
        let (x0, y0) = self.mesh.origin(e);
        let (hx, hy) = self.mesh.element_size();
        let xi = &self.ops.gll.nodes;
        (x0 + 0.5 * (xi[i] + 1.0) * hx, y0 + 0.5 * (xi[j] + 1.0) * hy)
    }

    /// Physical coordinates of GL node `(a, b)` of element `e`.
    pub fn gl_point(&self, e: usize, a: usize, b: usize) -> (f64, f64) {
        let (x0, y0) = self.mesh.origin(e);
        let (hx, hy) = self.mesh.element_size();
        let xi = &self.ops.gl.nodes;
        (x0 + 0.5 * (xi[a] + 1.0) * hx, y0 + 0.5 * (xi[b] + 1.0) * hy)
    }

    pub fn velocity_from_fn(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> VelocityField {
        let n1 = self.ops.n_gll();
        let mut u = VelocityField::zeros(self.order(), self.num_elements());
        for e in 0..self.num_elements() {
            for j in 0..n1 {
                for i in 0..n1 {
                    let (x, y) = self.gll_point(e, i, j);
                    let v = f(x, y);
                    let k = e * n1 * n1 + j * n1 + i;
                    u.comps[0][k] = v[0];
                    u.comps[1][k] = v[1];
                }
            }
        }
        u
    }

    pub fn pressure_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> PressureField {
        let ng = self.ops.n_gl();
        let mut p = PressureField::zeros(self.order(), self.num_elements());
        for e in 0..self.num_elements() {
            for b in 0..ng {
                for a in 0..ng {
                    let (x, y) = self.gl_point(e, a, b);
                    p.data[e * ng * ng + b * ng + a] = f(x, y);
                }
            }
        }
        p
    }

    pub fn dssum(&self, u: &mut VelocityField) {
        for c in &mut u.comps {
            self.gs.dssum(c);
        }
    }

    /// Element-local weak gradient `∫ p ∇·v` without assembly.
    pub fn gradient_local(&self, p: &[f64]) -> Result<VelocityField> {
        check_len(self.pressure_len(), p.len())?;
        let (ng, n1) = (self.ops.n_gl(), self.ops.n_gll());
        let mut out = VelocityField::zeros(self.order(), self.num_elements());
        for e in 0..self.num_elements() {
            let pe = block_from_slice(ng, ng, &p[e * ng * ng..(e + 1) * ng * ng]);
            for c in 0..2 {
                let ve = self.grad[c].apply(&pe);
                self.count(self.grad[c].apply_cost());
                block_to_slice(&ve, &mut out.comps[c][e * n1 * n1..(e + 1) * n1 * n1]);
            }
        }
        Ok(out)
    }

    /// Assembled weak gradient `D^T p`. The result is continuous.
    pub fn apply_gradient(&self, p: &PressureField) -> Result<VelocityField> {
        let mut u = self.gradient_local(&p.data)?;
        self.dssum(&mut u);
        Ok(u)
    }

    /// Weak divergence `D u = ∫ q ∇·u` of a continuous velocity field.
    pub fn divergence_into(&self, u: &VelocityField, out: &mut [f64]) -> Result<()> {
        check_len(self.velocity_len(), u.len())?;
        check_len(self.pressure_len(), out.len())?;
        let (ng, n1) = (self.ops.n_gl(), self.ops.n_gll());
        for e in 0..self.num_elements() {
            let dst = &mut out[e * ng * ng..(e + 1) * ng * ng];
            dst.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..2 {
                let ue = block_from_slice(n1, n1, &u.comps[c][e * n1 * n1..(e + 1) * n1 * n1]);
                let pe = self.grad[c].apply_transpose(&ue);
                self.count(self.grad[c].apply_transpose_cost());
                block_add_to_slice(&pe, dst);
            }
        }
        Ok(())
    }

    pub fn apply_divergence(&self, u: &VelocityField) -> Result<PressureField> {
        let mut p = PressureField::zeros(self.order(), self.num_elements());
        self.divergence_into(u, &mut p.data)?;
        Ok(p)
    }

    /// Assembled weak Laplacian `∫ ∇u·∇v` applied componentwise.
    pub fn apply_stiffness(&self, u: &VelocityField) -> Result<VelocityField> {
        check_len(self.velocity_len(), u.len())?;
        let n1 = self.ops.n_gll();
        let mut out = VelocityField::zeros(self.order(), self.num_elements());
        for c in 0..2 {
            for e in 0..self.num_elements() {
                let range = e * n1 * n1..(e + 1) * n1 * n1;
                let ue = block_from_slice(n1, n1, &u.comps[c][range.clone()]);
                let ke = self.stiff[0].apply(&ue) + self.stiff[1].apply(&ue);
                self.count(self.stiff[0].apply_cost() + self.stiff[1].apply_cost());
                block_to_slice(&ke, &mut out.comps[c][range]);
            }
        }
        self.dssum(&mut out);
        Ok(out)
    }

    /// Multiplies a dual (assembled) field by the inverse mass.
    pub fn mass_inverse(&self, u: &mut VelocityField) {
        for c in &mut u.comps {
            for (v, m) in c.iter_mut().zip(&self.inv_mass) {
                *v *= m;
            }
        }
    }

    /// Inner product of continuous velocity fields, each global node once.
    pub fn velocity_dot(&self, a: &VelocityField, b: &VelocityField) -> f64 {
        (0..2).map(|c| self.gs.global_dot(&a.comps[c], &b.comps[c])).sum()
    }

    /// L2 inner product of continuous velocity fields by GLL quadrature.
    pub fn velocity_l2_dot(&self, a: &VelocityField, b: &VelocityField) -> f64 {
        let nv = self.elem_mass.len();
        (0..2)
            .map(|c| {
                a.comps[c]
                    .iter()
                    .zip(&b.comps[c])
                    .enumerate()
                    .map(|(k, (x, y))| self.elem_mass[k % nv] * x * y)
                    .sum::<f64>()
            })
            .sum()
    }

    /// GL-quadrature integral of a pressure field.
    pub fn pressure_integral(&self, p: &[f64]) -> f64 {
        let n = self.pressure_weights.len();
        p.iter().enumerate().map(|(k, v)| self.pressure_weights[k % n] * v).sum()
    }

    pub fn domain_area(&self) -> f64 {
        self.mesh.length_x * self.mesh.length_y
    }
}
