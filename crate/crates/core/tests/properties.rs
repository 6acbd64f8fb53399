use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tauprec::grid::{flip, Dims};
use tauprec::precond::{build_p_1d, build_tau_r, FdeParams1D};
use tauprec::spectra::{dense_from_toeplitz, pencil_eigs, DenseMatrix};
use tauprec::symbols::{fourier_coeffs_closed, CoeffTensor, SymbolKind};
use tauprec::tau::{tau_solve, TauOperator};
use tauprec::toeplitz::build_toeplitz;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..7, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn offsets_round_trip(dims in dims_strategy(), pick in 0usize..1000) {
        let d = Dims::new(&dims).unwrap();
        let off = pick % d.total();
        prop_assert_eq!(d.offset(&d.unravel(off)), off);
    }

    #[test]
    fn matvec_is_linear_and_transposes(dims in dims_strategy(), seed in any::<u64>(), a in -3.0f64..3.0) {
        let d = Dims::new(&dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = move || rng.gen_range(-0.5..0.5);
        let t = build_toeplitz(CoeffTensor::from_real_fn(&d, |_| next())).unwrap();
        let n = d.total();
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let (tx, ty, tz) = (t.matvec(&x).unwrap(), t.matvec(&y).unwrap(), t.matvec(&z).unwrap());
        for i in 0..n {
            prop_assert!((tz[i] - (a * tx[i] + ty[i])).abs() < 1e-11);
        }
        // ⟨Tx, y⟩ = ⟨x, Tᵀy⟩
        let tty = t.transpose().unwrap().matvec(&y).unwrap();
        let lhs: f64 = tx.iter().zip(&y).map(|(p, q)| p * q).sum();
        let rhs: f64 = x.iter().zip(&tty).map(|(p, q)| p * q).sum();
        prop_assert!((lhs - rhs).abs() < 1e-11);
        prop_assert_eq!(flip(&flip(&x)), x);
    }

    #[test]
    fn tau_solve_inverts_apply(n in 1usize..40, shift in 0.1f64..5.0, x in prop::collection::vec(-1.0f64..1.0, 40)) {
        let op = TauOperator::laplacian(n).unwrap().map(|l| l + shift);
        let x = &x[..n];
        let back = tau_solve(&op, &op.apply(x).unwrap()).unwrap();
        for (p, q) in back.iter().zip(x) {
            prop_assert!((p - q).abs() < 1e-11);
        }
    }

    #[test]
    fn tau_r_keeps_r_within_half_and_three_halves(n in 2usize..24, alpha in 1.01f64..2.0) {
        let r = build_toeplitz(fourier_coeffs_closed(&SymbolKind::RAlpha { alpha }, &[n]).unwrap()).unwrap();
        let dense_r = dense_from_toeplitz(&r).unwrap();
        let m = build_tau_r(&[n], &[alpha], &[1.0]).unwrap();
        let dense_m = DenseMatrix::from_columns(n, |e| m.apply(e)).unwrap();
        let eigs = pencil_eigs(&dense_r, &dense_m.symmetrize()).unwrap();
        prop_assert!(eigs[0] > 0.5 && eigs[n - 1] < 1.5, "{:?}", eigs);
    }

    #[test]
    fn p_1d_is_positive_definite(n in 1usize..64, alpha in 1.01f64..2.0, dp in 0.0f64..2.0, dm in 0.0f64..2.0, tau in 1e-4f64..1.0) {
        prop_assume!(dp + dm > 0.0);
        let p = FdeParams1D::new(n, alpha, dp, dm, (0.0, 1.0), tau).unwrap();
        let m = build_p_1d(&p).unwrap();
        prop_assert!(m.eigs().unwrap().iter().all(|&l| l >= p.nu * (1.0 - 1e-12)));
    }
}
