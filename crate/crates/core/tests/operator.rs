mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use sem_schwarz::{Discretization, Mesh2D, PseudoLaplacian};

use common::{dense_pseudo_laplacian, gauss, lobatto, max_abs};

fn operator(ex: usize, ey: usize, lx: f64, ly: f64, order: usize) -> PseudoLaplacian {
    PseudoLaplacian::new(Discretization::new(Mesh2D::periodic(ex, ey, lx, ly).unwrap(), order).unwrap())
}

#[test]
fn quadrature_matches_golub_welsch() {
    for order in 2..=14 {
        let disc = Discretization::new(Mesh2D::periodic(1, 1, 2.0, 2.0).unwrap(), order).unwrap();
        let (x, w) = lobatto(order);
        for k in 0..=order {
            assert!((disc.ops.gll.nodes[k] - x[k]).abs() < 1e-13, "GLL node {k} of {order}");
            assert!((disc.ops.gll.weights[k] - w[k]).abs() < 1e-13, "GLL weight {k} of {order}");
        }
        if order >= 3 {
            let (x, w) = gauss(order - 1);
            for k in 0..order - 1 {
                assert!((disc.ops.gl.nodes[k] - x[k]).abs() < 1e-13);
                assert!((disc.ops.gl.weights[k] - w[k]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn dense_operator_matches_oracle_on_assorted_meshes() {
    for &(ex, ey, lx, ly, order) in &[(2, 2, 2.0, 2.0, 4), (3, 2, 3.0, 1.5, 5), (1, 3, 1.0, 2.5, 6), (2, 1, 6.0, 2.0, 7)] {
        let op = operator(ex, ey, lx, ly, order);
        let got = op.to_dense_by_columns().unwrap();
        let want = dense_pseudo_laplacian(ex, ey, lx, ly, order);
        let err = max_abs(&(&got - &want));
        assert!(err <= 1e-12 * max_abs(&want).max(1.0), "{ex}x{ey} N={order}: {err:e}");
    }
}

#[test]
fn nullspace_is_the_constants() {
    let op = operator(3, 3, 1.0, 1.0, 6);
    let e = op.to_dense_by_columns().unwrap();
    let sym = (&e + e.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.max();
    let mut idx: Vec<usize> = (0..e.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    assert!(eig.eigenvalues[idx[0]].abs() < 1e-12 * lmax);
    assert!(eig.eigenvalues[idx[1]] > 1e-6 * lmax);
    let v = eig.eigenvectors.column(idx[0]);
    let c = v[0];
    assert!(v.iter().all(|x| (x - c).abs() < 1e-10));
}

#[test]
fn one_gather_scatter_per_application() {
    let op = operator(2, 2, 1.0, 1.0, 5);
    let before = op.dssum_passes();
    let p = vec![1.0; op.len()];
    let mut out = vec![0.0; op.len()];
    op.apply_into(&p, &mut out).unwrap();
    op.apply_into(&p, &mut out).unwrap();
    assert_eq!(op.dssum_passes() - before, 2);
}

#[test]
fn element_block_is_the_diagonal_block() {
    let op = operator(3, 2, 3.0, 2.0, 5);
    let e = op.to_dense_by_columns().unwrap();
    let n = 16;
    for el in 0..6 {
        let b = op.element_block(el);
        let want: DMatrix<f64> = e.view((el * n, el * n), (n, n)).into();
        assert!(max_abs(&(&b - &want)) < 1e-12 * max_abs(&want));
    }
}

/// `M^-1 D^T p` approximates `∇p` for smooth `p` (up to the sign of the weak
/// form); the error decays faster than any fixed power of `N`.
#[test]
fn gradient_converges_spectrally() {
    let tau = 2.0 * std::f64::consts::PI;
    let mut errs = Vec::new();
    for order in [4, 6, 8, 10, 12] {
        let disc = Discretization::new(Mesh2D::periodic(2, 2, tau, tau).unwrap(), order).unwrap();
        let p = disc.pressure_from_fn(|x, y| (x.sin() * y.cos()).exp());
        let mut g = disc.apply_gradient(&p).unwrap();
        disc.mass_inverse(&mut g);
        let want = disc.velocity_from_fn(|x, y| {
            let f = (x.sin() * y.cos()).exp();
            [-f * x.cos() * y.cos(), f * x.sin() * y.sin()]
        });
        let mut diff = g.clone();
        diff.axpy(-1.0, &want);
        errs.push(diff.max_abs() / want.max_abs());
    }
    assert!(errs[4] < 1e-3, "{errs:?}");
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
    // algebraic convergence of order s would give ratios (N1/N2)^s -> 1
    let late = (errs[3] / errs[4]).ln() / (12.0f64 / 10.0).ln();
    let early = (errs[0] / errs[1]).ln() / (6.0f64 / 4.0).ln();
    assert!(late > early, "{errs:?}");
}
