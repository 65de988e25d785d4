use fracrelax::special::{
    density_cutoff, density_moment, gamma_fn, mittag_leffler, mittag_leffler_matrix, wright_density,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ml_with_alpha_one_is_exp(z in -20.0f64..20.0) {
        let v = mittag_leffler(1.0, 1.0, z).unwrap();
        prop_assert!((v - z.exp()).abs() <= 1e-12 * z.exp(), "{v} vs {}", z.exp());
    }

    #[test]
    fn density_is_nonnegative(alpha in 0.05f64..0.95, frac in 0.0f64..1.5) {
        let theta = frac * density_cutoff(alpha).unwrap();
        let v = wright_density(alpha, theta).unwrap();
        prop_assert!(v >= -1e-12);
    }

    #[test]
    fn matrix_ml_commutes_with_similarity(
        alpha in 0.3f64..1.0,
        beta in 0.5f64..2.0,
        d in prop::collection::vec(-2.0f64..2.0, 3),
        p in prop::collection::vec(-0.3f64..0.3, 9),
    ) {
        let p = DMatrix::from_row_slice(3, 3, &p) + DMatrix::identity(3, 3);
        let pinv = p.clone().try_inverse().unwrap();
        let dm = DMatrix::from_diagonal(&DVector::from_vec(d.clone()));
        let lhs = mittag_leffler_matrix(alpha, beta, &(&p * &dm * &pinv)).unwrap();
        let ed = DMatrix::from_diagonal(&DVector::from_iterator(3, d.iter().map(|&x| mittag_leffler(alpha, beta, x).unwrap())));
        let rhs = &p * ed * &pinv;
        prop_assert!((lhs - rhs).amax() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn density_moments(alpha in 0.2f64..0.95) {
        prop_assert!((density_moment(alpha, 0).unwrap() - 1.0).abs() <= 1e-6);
        prop_assert!((density_moment(alpha, 1).unwrap() - 1.0 / gamma_fn(1.0 + alpha).unwrap()).abs() <= 1e-6);
    }
}
