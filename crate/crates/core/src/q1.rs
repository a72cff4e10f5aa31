//! Low-order overlapping subdomains built on the Gauss pressure nodes.
//!
//! Each element owns one subdomain: its own GL nodes plus `overlap` node
//! layers borrowed from each face neighbor (and, in [`CornerMode::FullTensor`],
//! from the diagonal neighbors). One ghost node is appended at each end of
//! the 1D extended grids. Bilinear (Q1) finite elements are assembled over all
//! subintervals touching the non-ghost nodes, but the ghost shape functions
//! themselves are dropped, which puts homogeneous Dirichlet data at the ghosts.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sem::Mesh2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerMode {
    /// Overlap only into face neighbors.
    Cross,
    /// Full tensor-product rectangle, diagonal neighbors included.
    FullTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassKind {
    #[default]
    Consistent,
    Lumped,
}

/// One direction of an extended grid.
#[derive(Debug, Clone)]
pub struct ExtendedAxis {
    /// Coordinates including the two ghosts, strictly increasing and
    /// unwrapped across periodic boundaries.
    pub coords: Vec<f64>,
    /// Element column (or row) of every non-ghost node.
    pub element: Vec<usize>,
    /// Local GL index of every non-ghost node inside its element.
    pub local: Vec<usize>,
    /// Distance from the owner face to the outermost non-ghost node.
    pub overlap_length: f64,
}

impl ExtendedAxis {
    /// Number of non-ghost nodes.
    pub fn len(&self) -> usize {
        self.element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element.is_empty()
    }

    /// Non-ghost coordinates.
    pub fn interior_coords(&self) -> &[f64] {
        &self.coords[1..self.coords.len() - 1]
    }
}

#[derive(Debug, Clone)]
pub struct ExtendedGrid {
    pub owner: usize,
    pub overlap: usize,
    pub corner_mode: CornerMode,
    /// Nodes per direction of the owner element.
    pub owned_per_dim: usize,
    pub x: ExtendedAxis,
    pub y: ExtendedAxis,
    /// Active `(i, j)` nodes in x-fastest order.
    pub nodes: Vec<(usize, usize)>,
    lookup: Vec<Option<usize>>,
}

impl ExtendedGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Local index of node `(i, j)`, if active. Ghost or negative indices
    /// are never active.
    pub fn index(&self, i: isize, j: isize) -> Option<usize> {
        let (mx, my) = (self.x.len() as isize, self.y.len() as isize);
        if i < 0 || j < 0 || i >= mx || j >= my {
            return None;
        }
        self.lookup[(j * mx + i) as usize]
    }

    pub fn is_full_tensor(&self) -> bool {
        self.nodes.len() == self.x.len() * self.y.len()
    }

    /// Whether non-ghost node `(i, j)` belongs to the owner element.
    pub fn is_owned(&self, i: usize, j: usize) -> bool {
        let lo = self.overlap;
        let hi = self.overlap + self.owned_per_dim;
        (lo..hi).contains(&i) && (lo..hi).contains(&j)
    }
}

fn build_axis(
    mesh: &Mesh2D,
    axis: usize,
    owner_col: usize,
    reference_nodes: &[f64],
    overlap: usize,
) -> Result<ExtendedAxis> {
    let n = reference_nodes.len() as isize;
    let h = if axis == 0 { mesh.element_size().0 } else { mesh.element_size().1 };
    let d = overlap as isize;
    let mut coords = Vec::with_capacity((n + 2 * d + 2) as usize);
    let mut element = Vec::with_capacity((n + 2 * d) as usize);
    let mut local = Vec::with_capacity((n + 2 * d) as usize);
    for t in (-d - 1)..=(n + d) {
        let shift = t.div_euclid(n);
        let loc = t.rem_euclid(n) as usize;
        let col = owner_col as isize + shift;
        coords.push((col as f64 + 0.5 * (reference_nodes[loc] + 1.0)) * h);
        if t >= -d && t < n + d {
            let wrapped = mesh.wrap(axis, col).ok_or_else(|| {
                Error::Mesh(format!(
                    "element column {col} on axis {axis} is outside the non-periodic mesh"
                ))
            })?;
            element.push(wrapped);
            local.push(loc);
        }
    }
    let face = owner_col as f64 * h;
    let overlap_length = face - coords[1];
    Ok(ExtendedAxis { coords, element, local, overlap_length })
}

/// Builds the extended grid of `element`. `pressure_nodes` are the GL nodes
/// on [-1, 1].
pub fn build_extended_grid(
    element: usize,
    mesh: &Mesh2D,
    pressure_nodes: &[f64],
    overlap: usize,
    corner_mode: CornerMode,
) -> Result<ExtendedGrid> {
    let n = pressure_nodes.len();
    if overlap > n {
        return Err(Error::InvalidArgument(format!(
            "overlap must lie in 1..={n} (one neighbor element), got {overlap}"
        )));
    }
    extended_grid(element, mesh, pressure_nodes, overlap, corner_mode)
}

/// [`build_extended_grid`] without the one-neighbor limit on `overlap`.
pub(crate) fn extended_grid(
    element: usize,
    mesh: &Mesh2D,
    pressure_nodes: &[f64],
    overlap: usize,
    corner_mode: CornerMode,
) -> Result<ExtendedGrid> {
    let n = pressure_nodes.len();
    if overlap < 1 {
        return Err(Error::InvalidArgument("overlap must be at least 1".into()));
    }
    let (ix, iy) = mesh.element_coords(element);
    let x = build_axis(mesh, 0, ix, pressure_nodes, overlap)?;
    let y = build_axis(mesh, 1, iy, pressure_nodes, overlap)?;
    let (mx, my) = (x.len(), y.len());
    let in_band = |k: usize| k < overlap || k >= overlap + n;
    let mut nodes = Vec::with_capacity(mx * my);
    let mut lookup = vec![None; mx * my];
    for j in 0..my {
        for i in 0..mx {
            if corner_mode == CornerMode::Cross && in_band(i) && in_band(j) {
                continue;
            }
            lookup[j * mx + i] = Some(nodes.len());
            nodes.push((i, j));
        }
    }
    Ok(ExtendedGrid { owner: element, overlap, corner_mode, owned_per_dim: n, x, y, nodes, lookup })
}

/// 1D element matrices `(stiffness, mass)` of a subinterval of width `h`.
pub fn q1_element_1d(h: f64, mass: MassKind) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let k = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    let m = match mass {
        MassKind::Consistent => [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]],
        MassKind::Lumped => [[h / 2.0, 0.0], [0.0, h / 2.0]],
    };
    (k, m)
}

/// Q1 stiffness and mass on `coords`, whose first and last entries are
/// ghosts. Every subinterval contributes, but the two ghost shape functions
/// are left out, so the result is `(len - 2) x (len - 2)`.
pub fn q1_matrices_1d(coords: &[f64], mass: MassKind) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if coords.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 coordinates (two ghosts and one node), got {}",
            coords.len()
        )));
    }
    if coords.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
        return Err(Error::InvalidArgument("coordinates must be strictly increasing".into()));
    }
    let m = coords.len() - 2;
    let mut k1 = DMatrix::zeros(m, m);
    let mut m1 = DMatrix::zeros(m, m);
    for c in 0..coords.len() - 1 {
        let (ke, me) = q1_element_1d(coords[c + 1] - coords[c], mass);
        // local shape functions sit on coordinate indices c and c + 1,
        // i.e. matrix indices c - 1 and c
        for a in 0..2 {
            for b in 0..2 {
                let (Some(r), Some(s)) = (owned(c + a, m), owned(c + b, m)) else { continue };
                k1[(r, s)] += ke[a][b];
                m1[(r, s)] += me[a][b];
            }
        }
    }
    Ok((k1, m1))
}

/// Q1 stiffness and mass on `nodes` with natural (free) ends: only the
/// subintervals between the given nodes contribute.
pub fn q1_free_matrices_1d(nodes: &[f64], mass: MassKind) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {}", nodes.len())));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
        return Err(Error::InvalidArgument("coordinates must be strictly increasing".into()));
    }
    let m = nodes.len();
    let mut k1 = DMatrix::zeros(m, m);
    let mut m1 = DMatrix::zeros(m, m);
    for c in 0..m - 1 {
        let (ke, me) = q1_element_1d(nodes[c + 1] - nodes[c], mass);
        for a in 0..2 {
            for b in 0..2 {
                k1[(c + a, c + b)] += ke[a][b];
                m1[(c + a, c + b)] += me[a][b];
            }
        }
    }
    Ok((k1, m1))
}

fn owned(coord_index: usize, m: usize) -> Option<usize> {
    (1..=m).contains(&coord_index).then(|| coord_index - 1)
}

/// `(kx, mx, ky, my)`
pub type GridFactors = (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>);

/// The 1D Q1 factors of a grid.
pub fn grid_factors(grid: &ExtendedGrid, mass: MassKind) -> Result<GridFactors> {
    let (kx, mx) = q1_matrices_1d(&grid.x.coords, mass)?;
    let (ky, my) = q1_matrices_1d(&grid.y.coords, mass)?;
    Ok((kx, mx, ky, my))
}

/// Restricts a full tensor-grid matrix to the active nodes of `grid`.
pub fn restrict_to_active(grid: &ExtendedGrid, full: &DMatrix<f64>) -> DMatrix<f64> {
    if grid.is_full_tensor() {
        return full.clone();
    }
    let mx = grid.x.len();
    let flat: Vec<usize> = grid.nodes.iter().map(|&(i, j)| j * mx + i).collect();
    DMatrix::from_fn(flat.len(), flat.len(), |r, c| full[(flat[r], flat[c])])
}

/// The classical Schwarz block `M_y ⊗ K_x + K_y ⊗ M_x` with Dirichlet data at
/// the ghosts, restricted to the active nodes in cross mode.
pub fn assemble_classical_block(grid: &ExtendedGrid, mass: MassKind) -> Result<DMatrix<f64>> {
    let (kx, mx, ky, my) = grid_factors(grid, mass)?;
    let full = my.kronecker(&kx) + ky.kronecker(&mx);
    Ok(restrict_to_active(grid, &full))
}

/// Selection `R` and restricted return `R~` of one subdomain.
#[derive(Debug, Clone)]
pub struct RestrictionMaps {
    /// Global pressure index of each active local node.
    pub global: Vec<usize>,
    /// Whether the local node lies inside the owner element; `R~^T` only
    /// writes these.
    pub owned: Vec<bool>,
}

impl RestrictionMaps {
    /// `out = R r`
    pub fn restrict(&self, r: &[f64], out: &mut [f64]) {
        for (o, &g) in out.iter_mut().zip(&self.global) {
            *o = r[g];
        }
    }

    /// `out += R~^T local`
    pub fn scatter_owned(&self, local: &[f64], out: &mut [f64]) {
        for ((&g, &own), &v) in self.global.iter().zip(&self.owned).zip(local) {
            if own {
                out[g] += v;
            }
        }
    }
}

/// Maps the active nodes of `grid` to global pressure indices. Also checks
/// that each node coincides with the global GL node it selects.
pub fn build_restriction_maps(
    grid: &ExtendedGrid,
    mesh: &Mesh2D,
    pressure_nodes: &[f64],
) -> Result<RestrictionMaps> {
    let n = pressure_nodes.len();
    if n != grid.owned_per_dim {
        return Err(Error::InvalidArgument("grid built for a different order".into()));
    }
    let (hx, hy) = mesh.element_size();
    let mut global = Vec::with_capacity(grid.len());
    let mut owned = Vec::with_capacity(grid.len());
    for &(i, j) in &grid.nodes {
        let e = mesh.element_index(grid.x.element[i], grid.y.element[j]);
        let (a, b) = (grid.x.local[i], grid.y.local[j]);
        // geometric check modulo the periodic domain length
        let gx = (grid.x.element[i] as f64 + 0.5 * (pressure_nodes[a] + 1.0)) * hx;
        let gy = (grid.y.element[j] as f64 + 0.5 * (pressure_nodes[b] + 1.0)) * hy;
        let dx = (grid.x.coords[i + 1] - gx).rem_euclid(mesh.length_x);
        let dy = (grid.y.coords[j + 1] - gy).rem_euclid(mesh.length_y);
        let off = |d: f64, l: f64| d.min(l - d);
        if off(dx, mesh.length_x) > 1e-12 * mesh.length_x || off(dy, mesh.length_y) > 1e-12 * mesh.length_y {
            return Err(Error::Mesh(format!(
                "extended node ({i}, {j}) of element {} does not match a global GL node",
                grid.owner
            )));
        }
        global.push(e * n * n + b * n + a);
        owned.push(grid.is_owned(i, j));
    }
    Ok(RestrictionMaps { global, owned })
}
