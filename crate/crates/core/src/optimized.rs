//! Optimized transmission blocks.
//!
//! The optimized Schwarz block replaces the Dirichlet interface of a
//! subdomain by `∂u/∂n + p u - q ∂²u/∂τ²`. On a tensor grid this is carried
//! by the modified 1D matrices `K + p T0` and `M + q T0`, where `T0` picks the
//! two end nodes, and the 2D block
//!
//! ```text
//! A~ = (M_y + q T0_y) ⊗ (K_x + p T0_x) + (K_y + p T0_y) ⊗ (M_x + q T0_x)
//! ```
//!
//! is inverted by fast diagonalization. For `q = 0` it equals the weak form
//! of the Robin problem; for `q > 0` it adds `(p_x q_y + p_y q_x) T0_y ⊗ T0_x`,
//! a term living only on the four corner nodes.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::q1::{q1_element_1d, ExtendedGrid, MassKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionVariant {
    /// Dirichlet interface (plain RAS).
    Classical,
    /// Optimized zeroth order: Robin with `q = 0`.
    O0,
    /// Optimized second order: Robin plus tangential second derivative.
    O2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionParams {
    pub variant: TransmissionVariant,
    pub p: f64,
    pub q: f64,
    /// Lowest transverse frequency resolved by the problem.
    pub k_min: f64,
    /// Helmholtz-type shift of the model operator.
    pub eta_shift: f64,
    /// Physical overlap width.
    pub overlap_length: f64,
}

impl TransmissionParams {
    pub fn classical() -> Self {
        Self {
            variant: TransmissionVariant::Classical,
            p: 0.0,
            q: 0.0,
            k_min: 0.0,
            eta_shift: 0.0,
            overlap_length: 0.0,
        }
    }

    /// Same parameters with `p` and `q` multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.p *= factor;
        self.q *= factor;
        self
    }

    pub fn is_classical(&self) -> bool {
        self.variant == TransmissionVariant::Classical
    }

    /// `(p, q)` as they enter the matrices; zero for the classical variant.
    pub fn coefficients(&self) -> (f64, f64) {
        if self.is_classical() {
            (0.0, 0.0)
        } else {
            (self.p, self.q)
        }
    }
}

/// Optimized Robin coefficients for an overlap of physical width
/// `overlap_length`:
///
/// * O0: `p = 2^{-1/3} (k_min² + η)^{1/3} L^{-1/3}`, `q = 0`
/// * O2: `p = 2^{-3/5} (k_min² + η)^{2/5} L^{-1/5}`,
///   `q = 2^{-1/5} (k_min² + η)^{-1/5} L^{3/5}`
pub fn compute_params(
    variant: TransmissionVariant,
    k_min: f64,
    eta_shift: f64,
    overlap_length: f64,
) -> Result<TransmissionParams> {
    let mut out = TransmissionParams { variant, p: 0.0, q: 0.0, k_min, eta_shift, overlap_length };
    if variant == TransmissionVariant::Classical {
        return Ok(out);
    }
    if !(overlap_length > 0.0 && overlap_length.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "overlap length must be positive, got {overlap_length}"
        )));
    }
    let s = k_min * k_min + eta_shift;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "k_min^2 + eta_shift must be positive, got {s}"
        )));
    }
    let l = overlap_length;
    match variant {
        TransmissionVariant::O0 => {
            out.p = 2f64.powf(-1.0 / 3.0) * s.powf(1.0 / 3.0) * l.powf(-1.0 / 3.0);
        }
        TransmissionVariant::O2 => {
            out.p = 2f64.powf(-3.0 / 5.0) * s.powf(2.0 / 5.0) * l.powf(-1.0 / 5.0);
            out.q = 2f64.powf(-1.0 / 5.0) * s.powf(-1.0 / 5.0) * l.powf(3.0 / 5.0);
        }
        TransmissionVariant::Classical => unreachable!(),
    }
    Ok(out)
}

/// `n x n` zero matrix with ones at the first and last diagonal entries.
pub fn t0_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("T0 needs n >= 2, got {n}")));
    }
    let mut t = DMatrix::zeros(n, n);
    t[(0, 0)] = 1.0;
    t[(n - 1, n - 1)] = 1.0;
    Ok(t)
}

/// `(K + p T0, M + q T0)` for one direction.
pub fn modified_pair(
    k1: &DMatrix<f64>,
    m1: &DMatrix<f64>,
    params: &TransmissionParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (p, q) = params.coefficients();
    let t0 = t0_matrix(k1.nrows())?;
    Ok((k1 + &t0 * p, m1 + &t0 * q))
}

/// Simultaneous diagonalization of one direction:
/// `S^T (M + q T0) S = I`, `S^T (K + p T0) S = diag(λ)`.
#[derive(Debug, Clone)]
pub struct AxisEigen {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

pub fn fdm_factor_1d(
    k1: &DMatrix<f64>,
    m1: &DMatrix<f64>,
    params: &TransmissionParams,
) -> Result<AxisEigen> {
    let (a, b) = modified_pair(k1, m1, params)?;
    let sym = |m: &DMatrix<f64>| (m + m.transpose()) * 0.5;
    let b_eig = SymmetricEigen::new(sym(&b));
    let scale = b_eig.eigenvalues.amax();
    if b_eig.eigenvalues.iter().any(|&v| v <= 1e-14 * scale) {
        return Err(Error::LinearAlgebra(format!(
            "modified mass M + q T0 is not positive definite (q = {})",
            params.q
        )));
    }
    // B^{-1/2} = Q diag(1/sqrt(μ)) Q^T
    let mut qs = b_eig.eigenvectors.clone();
    for (mut col, mu) in qs.column_iter_mut().zip(b_eig.eigenvalues.iter()) {
        col /= mu.sqrt();
    }
    let b_inv_sqrt = &qs * b_eig.eigenvectors.transpose();
    let c = sym(&(&b_inv_sqrt * &a * &b_inv_sqrt));
    let c_eig = SymmetricEigen::new(c);
    let vectors = &b_inv_sqrt * &c_eig.eigenvectors;
    Ok(AxisEigen { vectors, values: c_eig.eigenvalues.iter().copied().collect() })
}

/// Fast-diagonalization inverse of `B_y ⊗ A_x + A_y ⊗ B_x`.
#[derive(Debug, Clone)]
pub struct FdmBlock {
    sx: DMatrix<f64>,
    sy: DMatrix<f64>,
    sx_t: DMatrix<f64>,
    sy_t: DMatrix<f64>,
    /// `1 / (λ_y[j] + λ_x[i])`, rows y.
    inv_diag: DMatrix<f64>,
    pub lambda_x: Vec<f64>,
    pub lambda_y: Vec<f64>,
}

impl FdmBlock {
    pub fn new(x: AxisEigen, y: AxisEigen) -> Result<Self> {
        let (nx, ny) = (x.values.len(), y.values.len());
        let scale = x.values.iter().chain(&y.values).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut inv_diag = DMatrix::zeros(ny, nx);
        for j in 0..ny {
            for i in 0..nx {
                let d = y.values[j] + x.values[i];
                if d.abs() <= 1e-13 * scale {
                    return Err(Error::LinearAlgebra(
                        "singular fast-diagonalization block (zero eigenvalue sum)".into(),
                    ));
                }
                inv_diag[(j, i)] = 1.0 / d;
            }
        }
        Ok(Self {
            sx_t: x.vectors.transpose(),
            sy_t: y.vectors.transpose(),
            sx: x.vectors,
            sy: y.vectors,
            inv_diag,
            lambda_x: x.values,
            lambda_y: y.values,
        })
    }

    /// Factors both directions of an optimized block.
    pub fn factor(
        kx: &DMatrix<f64>,
        mx: &DMatrix<f64>,
        px: &TransmissionParams,
        ky: &DMatrix<f64>,
        my: &DMatrix<f64>,
        py: &TransmissionParams,
    ) -> Result<Self> {
        Self::new(fdm_factor_1d(kx, mx, px)?, fdm_factor_1d(ky, my, py)?)
    }

    pub fn len(&self) -> usize {
        self.sx.nrows() * self.sy.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = A~^{-1} r` with `r` in x-fastest order: four dense contractions.
    pub fn apply_inverse(&self, r: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.sx.nrows(), self.sy.nrows());
        let u = DMatrix::from_row_slice(ny, nx, r);
        let mut w = &self.sy_t * u * &self.sx;
        w.component_mul_assign(&self.inv_diag);
        let z = &self.sy * w * &self.sx_t;
        crate::sem::block_to_slice(&z, out);
    }

    /// Multiply-adds per [`apply_inverse`](Self::apply_inverse).
    pub fn apply_cost(&self) -> u64 {
        let (nx, ny) = (self.sx.nrows() as u64, self.sy.nrows() as u64);
        2 * (ny * ny * nx + ny * nx * nx)
    }
}

/// Dense `(M_y + q_y T0) ⊗ (K_x + p_x T0) + (K_y + p_y T0) ⊗ (M_x + q_x T0)`.
pub fn optimized_kronecker_block(
    kx: &DMatrix<f64>,
    mx: &DMatrix<f64>,
    px: &TransmissionParams,
    ky: &DMatrix<f64>,
    my: &DMatrix<f64>,
    py: &TransmissionParams,
) -> Result<DMatrix<f64>> {
    let (ax, bx) = modified_pair(kx, mx, px)?;
    let (ay, by) = modified_pair(ky, my, py)?;
    Ok(by.kronecker(&ax) + ay.kronecker(&bx))
}

/// Q1 weak form of the optimized subdomain problem on the active nodes of
/// `grid`, assembled cell by cell:
///
/// * `∫ ∇u·∇v` over every cell touching an active node, inactive (ghost or
///   cut corner) nodes carrying zero Dirichlet data;
/// * on every boundary line of the active set, `∫ p u v + q ∂τu ∂τv`, where a
///   node lies on an x-face when its left (or right) x-neighbor is inactive.
///
/// With classical parameters this is the Dirichlet block. On full tensor
/// grids it differs from [`optimized_kronecker_block`] only on the corner
/// diagonal entries.
pub fn assemble_optimized_dense(
    grid: &ExtendedGrid,
    px: &TransmissionParams,
    py: &TransmissionParams,
    mass: MassKind,
) -> DMatrix<f64> {
    let n = grid.len();
    let mut a = DMatrix::zeros(n, n);
    let (nx, ny) = (grid.x.len() as isize, grid.y.len() as isize);
    let xs = &grid.x.coords;
    let ys = &grid.y.coords;

    // cells span ghosted indices c..c+1, i.e. non-ghost indices c-1 and c
    for cy in 0..=ny {
        for cx in 0..=nx {
            let ids = [
                grid.index(cx - 1, cy - 1),
                grid.index(cx, cy - 1),
                grid.index(cx - 1, cy),
                grid.index(cx, cy),
            ];
            if ids.iter().all(Option::is_none) {
                continue;
            }
            let (kxe, mxe) = q1_element_1d(xs[cx as usize + 1] - xs[cx as usize], mass);
            let (kye, mye) = q1_element_1d(ys[cy as usize + 1] - ys[cy as usize], mass);
            for (ra, ia) in ids.iter().enumerate() {
                let Some(r) = *ia else { continue };
                let (ay, ax) = (ra / 2, ra % 2);
                for (cb, ib) in ids.iter().enumerate() {
                    let Some(c) = *ib else { continue };
                    let (by, bx) = (cb / 2, cb % 2);
                    a[(r, c)] += mye[ay][by] * kxe[ax][bx] + kye[ay][by] * mxe[ax][bx];
                }
            }
        }
    }

    let active = |i: isize, j: isize| grid.index(i, j).is_some();
    let (pxc, qxc) = px.coefficients();
    let (pyc, qyc) = py.coefficients();

    // faces normal to x: segments run along y on a fixed column i
    if pxc != 0.0 || qxc != 0.0 {
        for side in [-1isize, 1] {
            let on_face = |i: isize, j: isize| active(i, j) && !active(i + side, j);
            for i in 0..nx {
                for cy in 0..=ny {
                    let (j0, j1) = (cy - 1, cy);
                    let ok = |j: isize| !active(i, j) || on_face(i, j);
                    if !(ok(j0) && ok(j1) && (on_face(i, j0) || on_face(i, j1))) {
                        continue;
                    }
                    let (ke, me) = q1_element_1d(ys[cy as usize + 1] - ys[cy as usize], mass);
                    let ids = [grid.index(i, j0), grid.index(i, j1)];
                    add_segment(&mut a, ids, &ke, &me, pxc, qxc);
                }
            }
        }
    }
    // faces normal to y: segments run along x on a fixed row j
    if pyc != 0.0 || qyc != 0.0 {
        for side in [-1isize, 1] {
            let on_face = |i: isize, j: isize| active(i, j) && !active(i, j + side);
            for j in 0..ny {
                for cx in 0..=nx {
                    let (i0, i1) = (cx - 1, cx);
                    let ok = |i: isize| !active(i, j) || on_face(i, j);
                    if !(ok(i0) && ok(i1) && (on_face(i0, j) || on_face(i1, j))) {
                        continue;
                    }
                    let (ke, me) = q1_element_1d(xs[cx as usize + 1] - xs[cx as usize], mass);
                    let ids = [grid.index(i0, j), grid.index(i1, j)];
                    add_segment(&mut a, ids, &ke, &me, pyc, qyc);
                }
            }
        }
    }
    a
}

fn add_segment(
    a: &mut DMatrix<f64>,
    ids: [Option<usize>; 2],
    ke: &[[f64; 2]; 2],
    me: &[[f64; 2]; 2],
    p: f64,
    q: f64,
) {
    for (ra, ia) in ids.iter().enumerate() {
        let Some(r) = *ia else { continue };
        for (cb, ib) in ids.iter().enumerate() {
            let Some(c) = *ib else { continue };
            a[(r, c)] += p * me[ra][cb] + q * ke[ra][cb];
        }
    }
}

/// Q1 weak form of the Robin/O2 problem posed on the active nodes of `grid`
/// with no Dirichlet data at all: only cells whose four nodes are active
/// contribute, and every cell edge on the boundary of that union carries
/// `∫ p u v + q ∂τu ∂τv`. On full tensor grids this differs from
/// `(M_y + q T0) ⊗ (K_x + p T0) + (K_y + p T0) ⊗ (M_x + q T0)` built from
/// free-end 1D matrices only on the four corner diagonal entries.
pub fn assemble_robin_dense(
    grid: &ExtendedGrid,
    px: &TransmissionParams,
    py: &TransmissionParams,
    mass: MassKind,
) -> DMatrix<f64> {
    let n = grid.len();
    let mut a = DMatrix::zeros(n, n);
    let (nx, ny) = (grid.x.len() as isize, grid.y.len() as isize);
    let x = |i: isize| grid.x.coords[i as usize + 1];
    let y = |j: isize| grid.y.coords[j as usize + 1];
    let cell = |i: isize, j: isize| {
        [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)].map(|(a, b)| grid.index(a, b))
    };
    let included = |i: isize, j: isize| cell(i, j).iter().all(Option::is_some);

    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if !included(i, j) {
                continue;
            }
            let ids = cell(i, j);
            let (kxe, mxe) = q1_element_1d(x(i + 1) - x(i), mass);
            let (kye, mye) = q1_element_1d(y(j + 1) - y(j), mass);
            for (ra, ia) in ids.iter().enumerate() {
                let r = ia.expect("included cell");
                let (ay, ax) = (ra / 2, ra % 2);
                for (cb, ib) in ids.iter().enumerate() {
                    let c = ib.expect("included cell");
                    let (by, bx) = (cb / 2, cb % 2);
                    a[(r, c)] += mye[ay][by] * kxe[ax][bx] + kye[ay][by] * mxe[ax][bx];
                }
            }
        }
    }

    let (pxc, qxc) = px.coefficients();
    let (pyc, qyc) = py.coefficients();
    // edges normal to x
    for i in 0..nx {
        for j in 0..ny - 1 {
            if included(i - 1, j) != included(i, j) {
                let (ke, me) = q1_element_1d(y(j + 1) - y(j), mass);
                add_segment(&mut a, [grid.index(i, j), grid.index(i, j + 1)], &ke, &me, pxc, qxc);
            }
        }
    }
    // edges normal to y
    for j in 0..ny {
        for i in 0..nx - 1 {
            if included(i, j - 1) != included(i, j) {
                let (ke, me) = q1_element_1d(x(i + 1) - x(i), mass);
                add_segment(&mut a, [grid.index(i, j), grid.index(i + 1, j)], &ke, &me, pyc, qyc);
            }
        }
    }
    a
}

/// Per-direction parameters of a grid, `(x, y)`, with the overlap width
/// measured on the grid itself.
pub fn grid_params(
    grid: &ExtendedGrid,
    variant: TransmissionVariant,
    k_min: f64,
    eta_shift: f64,
) -> Result<(TransmissionParams, TransmissionParams)> {
    Ok((
        compute_params(variant, k_min, eta_shift, grid.x.overlap_length)?,
        compute_params(variant, k_min, eta_shift, grid.y.overlap_length)?,
    ))
}
