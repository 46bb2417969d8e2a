//! Property tests for the structural invariants: multilinearity, symmetry
//! preservation, round trips, split partitioning, and step-up monotonicity.

use proptest::prelude::*;

use tnpca_core::infer::fdr_bh;
use tnpca_core::linalg::{dot, DenseMatrix};
use tnpca_core::predict::make_split;
use tnpca_core::tensor::{SemiSymmetricTensor, Tensor3};
use tnpca_core::{tn_pca, TnPcaOpts};

fn tensor3_strategy(max_dim: usize) -> impl Strategy<Value = Tensor3<f64>> {
    (1..=max_dim, 1..=max_dim, 1..=max_dim).prop_flat_map(|(d1, d2, d3)| {
        proptest::collection::vec(-1.0f64..1.0, d1 * d2 * d3)
            .prop_map(move |data| Tensor3::from_values(d1, d2, d3, data).unwrap())
    })
}

fn semisym_strategy(max_p: usize, max_n: usize) -> impl Strategy<Value = SemiSymmetricTensor<f64>> {
    (1..=max_p, 1..=max_n).prop_flat_map(|(p, n)| {
        proptest::collection::vec(-1.0f64..1.0, p * p * n).prop_map(move |data| {
            let raw = Tensor3::from_values(p, p, n, data).unwrap();
            let sym = Tensor3::from_fn(p, p, n, |i, j, s| 0.5 * (raw[(i, j, s)] + raw[(j, i, s)]));
            SemiSymmetricTensor::from_tensor(sym).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn mode_product_linear_in_operand(
        t in tensor3_strategy(4),
        seed in 0u64..1000,
        mode in 1usize..=3,
    ) {
        let mut rng = tnpca_core::rng::rng_from_seed(seed);
        use rand::Rng as _;
        let extent = [t.dims().0, t.dims().1, t.dims().2][mode - 1];
        let a = DenseMatrix::from_fn(2, extent, |_, _| rng.gen_range(-1.0..1.0));
        let b = DenseMatrix::from_fn(2, extent, |_, _| rng.gen_range(-1.0..1.0));
        let combined = t.mode_mul_mat(mode, &a.add(&b).unwrap()).unwrap();
        let separate_a = t.mode_mul_mat(mode, &a).unwrap();
        let separate_b = t.mode_mul_mat(mode, &b).unwrap();
        for (c, (x, y)) in combined
            .data()
            .iter()
            .zip(separate_a.data().iter().zip(separate_b.data()))
        {
            prop_assert!((c - (x + y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn semisym_mode3_contraction_stays_symmetric(
        x in semisym_strategy(5, 4),
        weights in proptest::collection::vec(-2.0f64..2.0, 1..=4),
    ) {
        prop_assume!(weights.len() == x.slice_count());
        let m = x.mode_mul_vec(3, &weights).unwrap();
        let (asym, _, _) = m.max_asymmetry();
        prop_assert!(asym <= 1e-12);
    }

    #[test]
    fn unfold_refold_is_bit_identical(t in tensor3_strategy(5), mode in 1usize..=3) {
        let unf = t.unfold(mode).unwrap();
        let back = Tensor3::fold(&unf, mode, t.dims()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn splits_partition_all_subjects(
        n in 6usize..200,
        seed in 0u64..1000,
        f_train in 0.4f64..0.8,
    ) {
        let rest = (1.0 - f_train) / 2.0;
        let plan = make_split(n, [f_train, rest, rest], seed).unwrap();
        let again = make_split(n, [f_train, rest, rest], seed).unwrap();
        prop_assert_eq!(&plan, &again);
        let mut all: Vec<usize> = plan
            .train
            .iter()
            .chain(&plan.validation)
            .chain(&plan.test)
            .copied()
            .collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn fdr_matches_brute_force_and_is_monotone(
        p_values in proptest::collection::vec(0.0f64..=1.0, 1..40),
        alpha in 0.01f64..0.3,
    ) {
        let out = fdr_bh(&p_values, alpha).unwrap();
        // Brute force: for every i, reject iff some j with p_j >= p_i has
        // p_(rank j) <= alpha * rank_j / m.
        let m = p_values.len();
        let mut sorted: Vec<f64> = p_values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut cutoff: Option<f64> = None;
        for (idx, &p) in sorted.iter().enumerate().rev() {
            if p <= alpha * (idx + 1) as f64 / m as f64 {
                cutoff = Some(p);
                break;
            }
        }
        for (i, &p) in p_values.iter().enumerate() {
            let expect = cutoff.map_or(false, |c| p <= c);
            prop_assert_eq!(out.rejected[i], expect);
        }
        // Monotone in rank.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap());
        let flags: Vec<bool> = order.iter().map(|&i| out.rejected[i]).collect();
        let first_keep = flags.iter().position(|&f| !f).unwrap_or(m);
        prop_assert!(flags[first_keep..].iter().all(|&f| !f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tn_pca_factors_orthonormal_and_traces_monotone(
        x in semisym_strategy(6, 5),
        k in 1usize..=3,
    ) {
        prop_assume!(k <= x.node_count());
        let dec = tn_pca(&x, k, &TnPcaOpts::default()).unwrap();
        for i in 0..dec.components() {
            for j in 0..dec.components() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = dot(&dec.v.col(i), &dec.v.col(j));
                prop_assert!((got - want).abs() <= 1e-10);
            }
        }
        for trace in &dec.objective_trace {
            for w in trace.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
            }
        }
    }
}
