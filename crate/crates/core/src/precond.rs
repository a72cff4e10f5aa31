//! Additive Schwarz preconditioners for the pressure operator.
//!
//! Every variant has the form `P^-1 r = Σ_k R~_k^T A_k^-1 R_k r`: restrict to
//! a subdomain, solve, and write back only the owner element's nodes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_len, Error, Result};
use crate::optimized::{
    assemble_optimized_dense, assemble_robin_dense, compute_params, fdm_factor_1d, FdmBlock, TransmissionParams,
    TransmissionVariant,
};
use crate::pressure::PseudoLaplacian;
use crate::q1::{
    build_extended_grid, build_restriction_maps, extended_grid, grid_factors, q1_free_matrices_1d, CornerMode,
    ExtendedGrid, MassKind, RestrictionMaps,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecondKind {
    Identity,
    BlockJacobi,
    Ras,
    OrasO0,
    OrasO2,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 5] =
        [Self::Identity, Self::BlockJacobi, Self::Ras, Self::OrasO0, Self::OrasO2];

    /// Transmission variant of the overlapping kinds.
    pub fn variant(self) -> Option<TransmissionVariant> {
        match self {
            Self::Ras => Some(TransmissionVariant::Classical),
            Self::OrasO0 => Some(TransmissionVariant::O0),
            Self::OrasO2 => Some(TransmissionVariant::O2),
            Self::Identity | Self::BlockJacobi => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "none",
            Self::BlockJacobi => "bj",
            Self::Ras => "ras",
            Self::OrasO0 => "oras-o0",
            Self::OrasO2 => "oras-o2",
        }
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!("unknown preconditioner {s:?} (none, bj, ras, oras-o0, oras-o2)"))
            })
    }
}

/// Where an optimized block imposes its transmission condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RobinSite {
    /// On the outermost overlap layer of a free-boundary block over the
    /// same nodes as the classical block.
    #[default]
    OuterNode,
    /// On the ghost layer, replacing the Dirichlet condition of the
    /// classical block; the ghost nodes become unknowns.
    Ghost,
    /// On the outermost overlap layer, added on top of the classical block
    /// (ghosts keep their Dirichlet data).
    Augmented,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecondConfig {
    pub kind: PrecondKind,
    /// GL node layers borrowed from each neighbor.
    pub overlap: usize,
    pub corner_mode: CornerMode,
    /// Fast diagonalization for full-tensor blocks; cross blocks stay dense.
    pub use_fdm: bool,
    pub mass: MassKind,
    /// Lowest tangential frequency on a face. Defaults to `π / H` with `H`
    /// the element size along the face.
    pub k_min: Option<f64>,
    pub eta_shift: f64,
    /// Multiplies the optimized `p` and `q`.
    pub param_scale: f64,
    pub robin_site: RobinSite,
}

impl Default for PrecondConfig {
    fn default() -> Self {
        Self {
            kind: PrecondKind::Ras,
            overlap: 2,
            corner_mode: CornerMode::FullTensor,
            use_fdm: false,
            mass: MassKind::Consistent,
            k_min: None,
            eta_shift: 0.0,
            param_scale: 1.0,
            robin_site: RobinSite::OuterNode,
        }
    }
}

impl PrecondConfig {
    pub fn with_kind(kind: PrecondKind) -> Self {
        Self { kind, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
enum BlockSolver {
    Dense(Cholesky<f64, Dyn>),
    Fdm(Box<FdmBlock>),
}

impl BlockSolver {
    fn solve(&self, r: &[f64], out: &mut [f64]) {
        match self {
            Self::Dense(chol) => {
                let x = chol.solve(&DVector::from_column_slice(r));
                out.copy_from_slice(x.as_slice());
            }
            Self::Fdm(f) => f.apply_inverse(r, out),
        }
    }
}

/// One element's subdomain: maps plus a factored local operator.
#[derive(Debug, Clone)]
pub struct SchwarzBlock {
    pub element: usize,
    pub maps: RestrictionMaps,
    /// `(x, y)` transmission parameters, absent for block Jacobi.
    pub params: Option<(TransmissionParams, TransmissionParams)>,
    solver: BlockSolver,
}

impl SchwarzBlock {
    pub fn len(&self) -> usize {
        self.maps.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.global.is_empty()
    }

    pub fn uses_fdm(&self) -> bool {
        matches!(self.solver, BlockSolver::Fdm(_))
    }
}

#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub config: PrecondConfig,
    blocks: Vec<SchwarzBlock>,
    len: usize,
}

fn factor_dense(element: usize, a: DMatrix<f64>) -> Result<BlockSolver> {
    let sym = (&a + a.transpose()) * 0.5;
    Cholesky::new(sym)
        .map(BlockSolver::Dense)
        .ok_or_else(|| Error::Block { element, reason: "local block is not positive definite".into() })
}

impl Preconditioner {
    pub fn build(op: &PseudoLaplacian, config: &PrecondConfig) -> Result<Self> {
        let len = op.len();
        let blocks = match config.kind {
            PrecondKind::Identity => Vec::new(),
            PrecondKind::BlockJacobi => build_bj_blocks(op)?,
            _ => build_schwarz_blocks(op, config)?,
        };
        Ok(Self { config: config.clone(), blocks, len })
    }

    pub fn kind(&self) -> PrecondKind {
        self.config.kind
    }

    pub fn blocks(&self) -> &[SchwarzBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `out = P^-1 r`. Blocks are visited in ascending element order and
    /// write disjoint entries, so the result does not depend on scheduling.
    pub fn apply_into(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.len, r.len())?;
        check_len(self.len, out.len())?;
        if self.config.kind == PrecondKind::Identity {
            out.copy_from_slice(r);
            return Ok(());
        }
        out.fill(0.0);
        let mut local = Vec::new();
        let mut sol = Vec::new();
        for b in &self.blocks {
            local.resize(b.len(), 0.0);
            sol.resize(b.len(), 0.0);
            b.maps.restrict(r, &mut local);
            b.solver.solve(&local, &mut sol);
            if sol.iter().any(|v| !v.is_finite()) {
                return Err(Error::Block { element: b.element, reason: "non-finite local solution".into() });
            }
            b.maps.scatter_owned(&sol, out);
        }
        Ok(())
    }

    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; r.len()];
        self.apply_into(r, &mut out)?;
        Ok(out)
    }

    /// `Σ_k R~_k^T R_k r`, i.e. the preconditioner with identity block solves.
    pub fn apply_restriction_identity(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.len, r.len())?;
        check_len(self.len, out.len())?;
        if self.blocks.is_empty() {
            out.copy_from_slice(r);
            return Ok(());
        }
        out.fill(0.0);
        let mut local = Vec::new();
        for b in &self.blocks {
            local.resize(b.len(), 0.0);
            b.maps.restrict(r, &mut local);
            b.maps.scatter_owned(&local, out);
        }
        Ok(())
    }
}

/// High-order block Jacobi: the diagonal element blocks of `E`. On a
/// one-element mesh that block is `E` itself and its constant mode is pinned.
fn build_bj_blocks(op: &PseudoLaplacian) -> Result<Vec<SchwarzBlock>> {
    let disc = op.disc();
    let n = disc.ops.n_gl().pow(2);
    let single = disc.num_elements() == 1;
    (0..disc.num_elements())
        .map(|e| {
            let mut a = op.element_block(e);
            if single {
                let w = DVector::from_column_slice(disc.pressure_weights());
                let c = a.trace() / (n as f64 * w.norm_squared());
                a += &w * w.transpose() * c;
            }
            Ok(SchwarzBlock {
                element: e,
                maps: RestrictionMaps { global: (e * n..(e + 1) * n).collect(), owned: vec![true; n] },
                params: None,
                solver: factor_dense(e, a)?,
            })
        })
        .collect()
}

/// Per-direction transmission parameters of `grid` under `config`. A face
/// normal to x spans one element height, so its default `k_min` is `π / hy`.
pub fn block_params(
    grid: &ExtendedGrid,
    variant: TransmissionVariant,
    config: &PrecondConfig,
    element_size: (f64, f64),
) -> Result<(TransmissionParams, TransmissionParams)> {
    let pi = std::f64::consts::PI;
    let kx = config.k_min.unwrap_or(pi / element_size.1);
    let ky = config.k_min.unwrap_or(pi / element_size.0);
    let px = compute_params(variant, kx, config.eta_shift, grid.x.overlap_length)?;
    let py = compute_params(variant, ky, config.eta_shift, grid.y.overlap_length)?;
    Ok((px.scaled(config.param_scale), py.scaled(config.param_scale)))
}

fn build_schwarz_blocks(op: &PseudoLaplacian, config: &PrecondConfig) -> Result<Vec<SchwarzBlock>> {
    let disc = op.disc();
    let variant = config.kind.variant().expect("overlapping kind");
    let nodes = &disc.ops.gl.nodes;
    let size = disc.mesh.element_size();
    let free = variant != TransmissionVariant::Classical && config.robin_site != RobinSite::Augmented;
    let layers = config.overlap + usize::from(config.robin_site == RobinSite::Ghost);
    (0..disc.num_elements())
        .map(|e| {
            let block_err = |err: Error| Error::Block { element: e, reason: err.to_string() };
            let grid = build_extended_grid(e, &disc.mesh, nodes, config.overlap, config.corner_mode)?;
            let (px, py) = block_params(&grid, variant, config, size)?;
            let (grid, solver) = if free {
                let grid = extended_grid(e, &disc.mesh, nodes, layers, config.corner_mode)?;
                let solver = if config.use_fdm && grid.is_full_tensor() {
                    let (kx, mx) = q1_free_matrices_1d(grid.x.interior_coords(), config.mass)?;
                    let (ky, my) = q1_free_matrices_1d(grid.y.interior_coords(), config.mass)?;
                    let fx = fdm_factor_1d(&kx, &mx, &px).map_err(block_err)?;
                    let fy = fdm_factor_1d(&ky, &my, &py).map_err(block_err)?;
                    BlockSolver::Fdm(Box::new(FdmBlock::new(fx, fy).map_err(block_err)?))
                } else {
                    factor_dense(e, assemble_robin_dense(&grid, &px, &py, config.mass))?
                };
                (grid, solver)
            } else {
                let solver = if config.use_fdm && grid.is_full_tensor() {
                    let (kx, mx, ky, my) = grid_factors(&grid, config.mass)?;
                    BlockSolver::Fdm(Box::new(FdmBlock::factor(&kx, &mx, &px, &ky, &my, &py).map_err(block_err)?))
                } else {
                    factor_dense(e, assemble_optimized_dense(&grid, &px, &py, config.mass))?
                };
                (grid, solver)
            };
            let maps = build_restriction_maps(&grid, &disc.mesh, nodes)?;
            Ok(SchwarzBlock { element: e, maps, params: Some((px, py)), solver })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::{Discretization, Mesh2D};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lap(e: usize, order: usize) -> PseudoLaplacian {
        let tau = 2.0 * std::f64::consts::PI;
        PseudoLaplacian::new(Discretization::new(Mesh2D::periodic(e, e, tau, tau).unwrap(), order).unwrap())
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PrecondKind::ALL {
            assert_eq!(k.name().parse::<PrecondKind>().unwrap(), k);
        }
        assert!("gmres".parse::<PrecondKind>().is_err());
    }

    #[test]
    fn identity_and_zero() {
        let op = lap(2, 5);
        let r = random(op.len(), 1);
        let id = Preconditioner::build(&op, &PrecondConfig::with_kind(PrecondKind::Identity)).unwrap();
        assert_eq!(id.apply(&r).unwrap(), r);
        for kind in PrecondKind::ALL {
            let p = Preconditioner::build(&op, &PrecondConfig::with_kind(kind)).unwrap();
            assert!(p.apply(&vec![0.0; op.len()]).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear() {
        let op = lap(3, 6);
        let (r, s) = (random(op.len(), 2), random(op.len(), 3));
        for kind in [PrecondKind::BlockJacobi, PrecondKind::Ras, PrecondKind::OrasO2] {
            let p = Preconditioner::build(&op, &PrecondConfig::with_kind(kind)).unwrap();
            let combo: Vec<f64> = r.iter().zip(&s).map(|(a, b)| 1.5 * a - 0.25 * b).collect();
            let (pr, ps, pc) = (p.apply(&r).unwrap(), p.apply(&s).unwrap(), p.apply(&combo).unwrap());
            for k in 0..op.len() {
                assert!((pc[k] - (1.5 * pr[k] - 0.25 * ps[k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bj_is_symmetric() {
        let op = lap(3, 5);
        let p = Preconditioner::build(&op, &PrecondConfig::with_kind(PrecondKind::BlockJacobi)).unwrap();
        let (r, s) = (random(op.len(), 4), random(op.len(), 5));
        let a: f64 = p.apply(&r).unwrap().iter().zip(&s).map(|(x, y)| x * y).sum();
        let b: f64 = r.iter().zip(&p.apply(&s).unwrap()).map(|(x, y)| x * y).sum();
        assert!((a - b).abs() < 1e-11 * a.abs().max(1.0));
    }

    #[test]
    fn single_element_bj_solves_up_to_constants() {
        let op = lap(1, 6);
        let p = Preconditioner::build(&op, &PrecondConfig::with_kind(PrecondKind::BlockJacobi)).unwrap();
        let mut q = random(op.len(), 6);
        op.project_out_mean(&mut q);
        let mut b = vec![0.0; op.len()];
        op.apply_into(&q, &mut b).unwrap();
        let mut x = p.apply(&b).unwrap();
        op.project_out_mean(&mut x);
        for (a, b) in x.iter().zip(&q) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn partition_of_unity() {
        let op = lap(3, 5);
        for mode in [CornerMode::Cross, CornerMode::FullTensor] {
            let cfg = PrecondConfig { corner_mode: mode, ..PrecondConfig::with_kind(PrecondKind::Ras) };
            let p = Preconditioner::build(&op, &cfg).unwrap();
            let r = random(op.len(), 7);
            let mut out = vec![0.0; op.len()];
            p.apply_restriction_identity(&r, &mut out).unwrap();
            assert_eq!(out, r);
        }
    }

    #[test]
    fn fdm_and_dense_agree_without_q() {
        let op = lap(3, 6);
        let r = random(op.len(), 8);
        for kind in [PrecondKind::Ras, PrecondKind::OrasO0] {
            let dense = Preconditioner::build(&op, &PrecondConfig::with_kind(kind)).unwrap();
            let fdm = Preconditioner::build(&op, &PrecondConfig { use_fdm: true, ..PrecondConfig::with_kind(kind) })
                .unwrap();
            assert!(fdm.blocks().iter().all(SchwarzBlock::uses_fdm));
            let (a, b) = (dense.apply(&r).unwrap(), fdm.apply(&r).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn cross_mode_falls_back_to_dense() {
        let op = lap(3, 5);
        let cfg = PrecondConfig {
            use_fdm: true,
            corner_mode: CornerMode::Cross,
            ..PrecondConfig::with_kind(PrecondKind::OrasO0)
        };
        let p = Preconditioner::build(&op, &cfg).unwrap();
        assert!(p.blocks().iter().all(|b| !b.uses_fdm()));
    }
}
