mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use sem_schwarz::optimized::{
    assemble_optimized_dense, assemble_robin_dense, fdm_factor_1d, optimized_kronecker_block,
};
use sem_schwarz::q1::{assemble_classical_block, grid_factors, q1_free_matrices_1d};
use sem_schwarz::{
    build_extended_grid, compute_params, CornerMode, ExtendedGrid, FdmBlock, MassKind, Mesh2D, OperatorSet1D,
    TransmissionParams, TransmissionVariant,
};

use common::{max_abs, q1_cell};

fn grid(order: usize, overlap: usize, mode: CornerMode) -> ExtendedGrid {
    let tau = 2.0 * std::f64::consts::PI;
    let mesh = Mesh2D::periodic(4, 3, tau, 1.5 * tau).unwrap();
    let ops = OperatorSet1D::new(order).unwrap();
    build_extended_grid(5, &mesh, &ops.gl.nodes, overlap, mode).unwrap()
}

fn params(variant: TransmissionVariant, l: f64) -> TransmissionParams {
    compute_params(variant, 1.3, 0.0, l).unwrap()
}

/// Adds `p ∫ u v + q ∫ u' v'` along the polyline `pts`, restricted to the
/// nodes that `id` maps to an unknown.
fn add_line(a: &mut DMatrix<f64>, pts: &[(f64, Option<usize>)], p: f64, q: f64) {
    for w in pts.windows(2) {
        let h = w[1].0 - w[0].0;
        let m = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
        let k = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
        for r in 0..2 {
            for c in 0..2 {
                if let (Some(ir), Some(ic)) = (w[r].1, w[c].1) {
                    a[(ir, ic)] += p * m[r][c] + q * k[r][c];
                }
            }
        }
    }
}

/// Bilinear stiffness over every cell of the tensor grid `xs x ys`, keeping
/// the nodes that `id` maps to an unknown.
fn assemble_cells(xs: &[f64], ys: &[f64], n: usize, id: impl Fn(usize, usize) -> Option<usize>) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for cy in 0..ys.len() - 1 {
        for cx in 0..xs.len() - 1 {
            let (k, _) = q1_cell(xs[cx], xs[cx + 1], ys[cy], ys[cy + 1]);
            let ids = [id(cx, cy), id(cx + 1, cy), id(cx, cy + 1), id(cx + 1, cy + 1)];
            for r in 0..4 {
                for c in 0..4 {
                    if let (Some(ir), Some(ic)) = (ids[r], ids[c]) {
                        a[(ir, ic)] += k[r][c];
                    }
                }
            }
        }
    }
    a
}

/// Oracle of the Dirichlet-ghost block: every cell of the ghosted grid, ghost
/// and inactive nodes eliminated, Robin terms on the four outer node lines.
fn ghost_oracle(g: &ExtendedGrid, px: (f64, f64), py: (f64, f64)) -> DMatrix<f64> {
    let (xs, ys) = (&g.x.coords, &g.y.coords);
    let (nx, ny) = (xs.len(), ys.len());
    let id = |i: usize, j: usize| {
        (i > 0 && j > 0 && i < nx - 1 && j < ny - 1).then(|| g.index(i as isize - 1, j as isize - 1)).flatten()
    };
    let mut a = assemble_cells(xs, ys, g.len(), id);
    for i in [1, nx - 2] {
        let pts: Vec<_> = (0..ny).map(|j| (ys[j], id(i, j))).collect();
        add_line(&mut a, &pts, px.0, px.1);
    }
    for j in [1, ny - 2] {
        let pts: Vec<_> = (0..nx).map(|i| (xs[i], id(i, j))).collect();
        add_line(&mut a, &pts, py.0, py.1);
    }
    a
}

/// Oracle of the free block on the non-ghost nodes of a full tensor grid.
fn free_oracle(g: &ExtendedGrid, px: (f64, f64), py: (f64, f64)) -> DMatrix<f64> {
    let (xs, ys) = (g.x.interior_coords(), g.y.interior_coords());
    let (nx, ny) = (xs.len(), ys.len());
    let id = |i: usize, j: usize| g.index(i as isize, j as isize);
    let mut a = assemble_cells(xs, ys, g.len(), id);
    for i in [0, nx - 1] {
        let pts: Vec<_> = (0..ny).map(|j| (ys[j], id(i, j))).collect();
        add_line(&mut a, &pts, px.0, px.1);
    }
    for j in [0, ny - 1] {
        let pts: Vec<_> = (0..nx).map(|i| (xs[i], id(i, j))).collect();
        add_line(&mut a, &pts, py.0, py.1);
    }
    a
}

fn corner_indices(g: &ExtendedGrid) -> Vec<usize> {
    let (nx, ny) = (g.x.len() as isize, g.y.len() as isize);
    [(0, 0), (nx - 1, 0), (0, ny - 1), (nx - 1, ny - 1)].iter().map(|&(i, j)| g.index(i, j).unwrap()).collect()
}

#[test]
fn classical_block_matches_bilinear_oracle() {
    for mode in [CornerMode::FullTensor, CornerMode::Cross] {
        let g = grid(7, 2, mode);
        let want = ghost_oracle(&g, (0.0, 0.0), (0.0, 0.0));
        let got = assemble_classical_block(&g, MassKind::Consistent).unwrap();
        assert!(max_abs(&(&got - &want)) < 1e-12 * max_abs(&want), "{mode:?}");
        let c = TransmissionParams::classical();
        let dense = assemble_optimized_dense(&g, &c, &c, MassKind::Consistent);
        assert!(max_abs(&(&dense - &want)) < 1e-12 * max_abs(&want), "{mode:?}");
    }
}

#[test]
fn ghost_blocks_match_oracle() {
    let g = grid(6, 2, CornerMode::FullTensor);
    for variant in [TransmissionVariant::O0, TransmissionVariant::O2] {
        let (px, py) = (params(variant, g.x.overlap_length), params(variant, g.y.overlap_length));
        let want = ghost_oracle(&g, px.coefficients(), py.coefficients());
        let got = assemble_optimized_dense(&g, &px, &py, MassKind::Consistent);
        assert!(max_abs(&(&got - &want)) < 1e-12 * max_abs(&want), "{variant:?}");
    }
}

#[test]
fn free_blocks_match_oracle() {
    let g = grid(6, 2, CornerMode::FullTensor);
    for variant in [TransmissionVariant::O0, TransmissionVariant::O2] {
        let (px, py) = (params(variant, g.x.overlap_length), params(variant, g.y.overlap_length));
        let want = free_oracle(&g, px.coefficients(), py.coefficients());
        let got = assemble_robin_dense(&g, &px, &py, MassKind::Consistent);
        assert!(max_abs(&(&got - &want)) < 1e-12 * max_abs(&want), "{variant:?}");
    }
}

#[test]
fn kronecker_form_differs_only_on_corner_diagonals() {
    let g = grid(8, 2, CornerMode::FullTensor);
    let corners = corner_indices(&g);
    for variant in [TransmissionVariant::O0, TransmissionVariant::O2] {
        let (px, py) = (params(variant, g.x.overlap_length), params(variant, g.y.overlap_length));
        let (pxc, qxc) = px.coefficients();
        let (pyc, qyc) = py.coefficients();
        let expected_corner = pxc * qyc + pyc * qxc;

        // free boundary form
        let (kx, mx) = q1_free_matrices_1d(g.x.interior_coords(), MassKind::Consistent).unwrap();
        let (ky, my) = q1_free_matrices_1d(g.y.interior_coords(), MassKind::Consistent).unwrap();
        let kron = optimized_kronecker_block(&kx, &mx, &px, &ky, &my, &py).unwrap();
        let diff = kron - assemble_robin_dense(&g, &px, &py, MassKind::Consistent);
        for r in 0..diff.nrows() {
            for c in 0..diff.ncols() {
                let want = if r == c && corners.contains(&r) { expected_corner } else { 0.0 };
                assert!((diff[(r, c)] - want).abs() < 1e-12, "{variant:?} free ({r}, {c}): {}", diff[(r, c)]);
            }
        }

        // Dirichlet-ghost form
        let (kx, mx, ky, my) = grid_factors(&g, MassKind::Consistent).unwrap();
        let kron = optimized_kronecker_block(&kx, &mx, &px, &ky, &my, &py).unwrap();
        let diff = kron - assemble_optimized_dense(&g, &px, &py, MassKind::Consistent);
        for r in 0..diff.nrows() {
            for c in 0..diff.ncols() {
                if !(r == c && corners.contains(&r)) {
                    assert!(diff[(r, c)].abs() < 1e-12, "{variant:?} ghost ({r}, {c})");
                }
            }
        }
        if variant == TransmissionVariant::O0 {
            assert!(max_abs(&diff) < 1e-12);
        }
    }
}

#[test]
fn fdm_inverts_the_kronecker_form() {
    let g = grid(9, 3, CornerMode::FullTensor);
    let v = TransmissionVariant::O2;
    let (px, py) = (params(v, g.x.overlap_length), params(v, g.y.overlap_length));
    let (kx, mx) = q1_free_matrices_1d(g.x.interior_coords(), MassKind::Consistent).unwrap();
    let (ky, my) = q1_free_matrices_1d(g.y.interior_coords(), MassKind::Consistent).unwrap();
    let fdm = FdmBlock::new(fdm_factor_1d(&kx, &mx, &px).unwrap(), fdm_factor_1d(&ky, &my, &py).unwrap()).unwrap();
    let a = optimized_kronecker_block(&kx, &mx, &px, &ky, &my, &py).unwrap();
    let n = a.nrows();
    let mut out = vec![0.0; n];
    for c in 0..n {
        let col: Vec<f64> = a.column(c).iter().copied().collect();
        fdm.apply_inverse(&col, &mut out);
        for (r, v) in out.iter().enumerate() {
            let want = if r == c { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "({r}, {c}) {v}");
        }
    }
}

#[test]
fn optimized_blocks_are_positive_definite() {
    for mode in [CornerMode::FullTensor, CornerMode::Cross] {
        let g = grid(6, 2, mode);
        for v in [TransmissionVariant::O0, TransmissionVariant::O2] {
            let (px, py) = (params(v, g.x.overlap_length), params(v, g.y.overlap_length));
            for a in [
                assemble_robin_dense(&g, &px, &py, MassKind::Consistent),
                assemble_optimized_dense(&g, &px, &py, MassKind::Consistent),
            ] {
                assert!(max_abs(&(&a - a.transpose())) < 1e-13);
                let lmin = SymmetricEigen::new(a).eigenvalues.min();
                assert!(lmin > 0.0, "{mode:?} {v:?}: {lmin}");
            }
        }
    }
}

#[test]
fn free_block_without_transmission_is_singular() {
    // pure Neumann: the constants are in the kernel, so only p > 0 makes it invertible
    let g = grid(6, 2, CornerMode::FullTensor);
    let zero = TransmissionParams { p: 0.0, q: 0.0, ..params(TransmissionVariant::O0, 0.1) };
    let a = assemble_robin_dense(&g, &zero, &zero, MassKind::Consistent);
    let ones = nalgebra::DVector::from_element(a.nrows(), 1.0);
    assert!((a * ones).amax() < 1e-12);
}
