use proptest::prelude::*;
use sem_schwarz::{
    compute_params, CornerMode, Discretization, Mesh2D, PrecondConfig, PrecondKind, Preconditioner, PseudoLaplacian,
    TransmissionVariant,
};

fn operator(ex: usize, ey: usize, order: usize, lx: f64, ly: f64) -> PseudoLaplacian {
    PseudoLaplacian::new(Discretization::new(Mesh2D::periodic(ex, ey, lx, ly).unwrap(), order).unwrap())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_symmetric_and_kills_constants(
        ex in 1usize..4, ey in 1usize..4, order in 3usize..8,
        lx in 0.5f64..7.0, ly in 0.5f64..7.0, seed in any::<u64>(),
    ) {
        let op = operator(ex, ey, order, lx, ly);
        let n = op.len();
        let p: Vec<f64> = (0..n).map(|k| ((k as u64 ^ seed) % 97) as f64 / 97.0 - 0.5).collect();
        let q: Vec<f64> = (0..n).map(|k| ((k as u64).wrapping_mul(31) ^ seed.rotate_left(7)) as f64 % 13.0 - 6.0).collect();
        let (mut ep, mut eq) = (vec![0.0; n], vec![0.0; n]);
        op.apply_into(&p, &mut ep).unwrap();
        op.apply_into(&q, &mut eq).unwrap();
        let (a, b) = (dot(&ep, &q), dot(&p, &eq));
        prop_assert!((a - b).abs() <= 1e-10 * (a.abs() + b.abs() + 1.0));
        prop_assert!(dot(&p, &ep) >= -1e-10);
        let mut e1 = vec![0.0; n];
        op.apply_into(&vec![1.0; n], &mut e1).unwrap();
        prop_assert!(e1.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn restricted_return_is_a_partition(
        ex in 2usize..5, ey in 2usize..5, order in 4usize..8, overlap in 1usize..3,
        cross in any::<bool>(), kind in 0usize..3,
    ) {
        let op = operator(ex, ey, order, 1.0, 1.3);
        let kind = [PrecondKind::Ras, PrecondKind::OrasO0, PrecondKind::OrasO2][kind];
        let corner_mode = if cross { CornerMode::Cross } else { CornerMode::FullTensor };
        let pc = Preconditioner::build(&op, &PrecondConfig { overlap, corner_mode, ..PrecondConfig::with_kind(kind) }).unwrap();
        let r: Vec<f64> = (0..op.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut out = vec![0.0; r.len()];
        pc.apply_restriction_identity(&r, &mut out).unwrap();
        prop_assert_eq!(out, r);
    }

    #[test]
    fn parameters_follow_their_power_laws(k in 0.1f64..20.0, eta in 0.0f64..5.0, l in 1e-3f64..1.0) {
        let o0 = compute_params(TransmissionVariant::O0, k, eta, l).unwrap();
        let o0h = compute_params(TransmissionVariant::O0, k, eta, l / 8.0).unwrap();
        prop_assert!((o0h.p / o0.p - 2.0).abs() < 1e-12);
        let o2 = compute_params(TransmissionVariant::O2, k, eta, l).unwrap();
        let o2h = compute_params(TransmissionVariant::O2, k, eta, l / 32.0).unwrap();
        prop_assert!((o2h.p / o2.p - 2.0).abs() < 1e-12);
        prop_assert!((o2.q / o2h.q - 8.0).abs() < 1e-11);
        let pq = 2f64.powf(-0.8) * (k * k + eta).powf(0.2) * l.powf(0.4);
        prop_assert!((o2.p * o2.q - pq).abs() < 1e-12 * (1.0 + o2.p * o2.q));
    }
}
