use ctlab::lti::{
    controllability_matrix, discretize, matrix_exponential, numerical_rank, spectral_decompose, LtiSystem, Structure,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.5f64..1.5, n * n).prop_map(move |v| DMatrix::from_row_slice(n, n, &v))
}

/// Upper-triangular matrix with well separated real diagonal.
fn triangular(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (prop::collection::vec(-1.0f64..1.0, n * n), prop::sample::subsequence((1..=8).collect::<Vec<i32>>(), n)).prop_map(
        move |(v, diag)| {
            DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Less => v[i * n + j],
                std::cmp::Ordering::Equal => -0.5 * diag[i] as f64,
                std::cmp::Ordering::Greater => 0.0,
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponential_semigroup(a in matrix(3), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let lhs = matrix_exponential(&a, s + t).unwrap();
        let rhs = matrix_exponential(&a, s).unwrap() * matrix_exponential(&a, t).unwrap();
        prop_assert!((&lhs - &rhs).amax() <= 1e-10 * (1.0 + lhs.amax()));
        let inv = matrix_exponential(&a, -t).unwrap() * matrix_exponential(&a, t).unwrap();
        prop_assert!((inv - DMatrix::identity(3, 3)).amax() <= 1e-10);
    }

    #[test]
    fn reconstruction(a in triangular(3), b in prop::collection::vec(-1.0f64..1.0, 3)) {
        let sys = LtiSystem::single_input(a.clone(), &b).unwrap();
        let sd = spectral_decompose(&sys, None).unwrap();
        prop_assert_eq!(sd.structure, Structure::Distinct);
        prop_assert!(sd.reconstruction_error(&a) <= 1e-8 * a.norm());
        prop_assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rank_invariant_under_similarity(a in matrix(3), b in prop::collection::vec(-1.0f64..1.0, 3), t in matrix(3)) {
        let t = t + DMatrix::identity(3, 3) * 4.0;
        let t_inv = t.clone().try_inverse().unwrap();
        let sys = LtiSystem::single_input(a.clone(), &b).unwrap();
        let bt = &t * DVector::from_column_slice(&b);
        let similar = LtiSystem::single_input(&t * &a * &t_inv, bt.as_slice()).unwrap();
        prop_assert_eq!(controllability_matrix(&sys).rank, controllability_matrix(&similar).rank);
    }

    #[test]
    fn discretization_matches_exponential(a in matrix(2), delta in 0.01f64..0.5) {
        let sys = LtiSystem::single_input(a.clone(), &[1.0, 0.0]).unwrap();
        let d = discretize(&sys, delta, 10.0 * delta).unwrap();
        prop_assert!((d.a_hat - matrix_exponential(&a, delta).unwrap()).amax() < 1e-14);
        prop_assert_eq!(d.steps, 10);
    }
}

#[test]
fn uncontrollable_pair_is_rank_deficient() {
    let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[-1.0, -2.0, -3.0]));
    let sys = LtiSystem::single_input(a, &[1.0, 0.0, 1.0]).unwrap();
    let cm = controllability_matrix(&sys);
    assert_eq!(cm.rank, 2);
    assert!(!cm.is_full_rank());
    assert_eq!(numerical_rank(&cm.matrix), 2);
}
