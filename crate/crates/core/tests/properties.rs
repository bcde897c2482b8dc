use proptest::prelude::*;
use thetacert::dd::Dd;
use thetacert::lattice::{
    direct_sum, e8, enumerate_shells, four_squares, random_rotation, zn, EnumerationOptions,
};
use thetacert::poisson::{poisson_check, GaussianCombo};
use thetacert::theta::{jacobi_theta, lattice_theta, ThetaKind, DEFAULT_TAIL_TOLERANCE};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dd_addition_is_exactly_reversible(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let x = Dd::from_f64(a);
        let y = Dd::from_f64(b);
        let back = (x + y) - y;
        prop_assert!((back - x).to_f64().abs() <= 1e-25 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn dd_sqrt_squares_back(a in 1e-6f64..1e6) {
        let x = Dd::from_f64(a);
        let r = x.sqrt();
        prop_assert!(((r * r - x) / x).to_f64().abs() < 1e-30);
    }

    #[test]
    fn dd_exp_is_a_homomorphism(a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let lhs = (Dd::from_f64(a) + Dd::from_f64(b)).exp();
        let rhs = Dd::from_f64(a).exp() * Dd::from_f64(b).exp();
        prop_assert!(((lhs - rhs) / rhs).to_f64().abs() < 1e-29);
    }

    #[test]
    fn four_squares_satisfies_sum_identity(m in 0u64..100_000_000) {
        let rep = four_squares(m).expect("every integer is a sum of four squares");
        let total: u128 = rep.iter().map(|&x| (x as u128) * (x as u128)).sum();
        prop_assert_eq!(total, m as u128);
    }

    #[test]
    fn positive_combos_satisfy_poisson_on_zn(
        n in 1usize..=12,
        terms in prop::collection::vec((-2.0f64..2.0, 0.2f64..5.0), 1..4),
    ) {
        let h = GaussianCombo::from_pairs(n, &terms).unwrap();
        let report = poisson_check(&h, &zn(n).unwrap(), 1e-9, EnumerationOptions::default()).unwrap();
        prop_assert!(report.passed, "residual {}", report.residual);
    }

    #[test]
    fn zn_theta_is_a_power_of_theta3(n in 1usize..=12, t in 0.2f64..8.0) {
        let lattice = zn(n).unwrap();
        let theta = lattice_theta(&lattice, t, DEFAULT_TAIL_TOLERANCE, EnumerationOptions::default()).unwrap();
        let theta3 = jacobi_theta(ThetaKind::Three, t).unwrap().precise();
        let expected = theta3.powi(n as i32);
        let diff = (theta.precise() - expected).to_f64().abs();
        prop_assert!(diff <= theta.abs_error() + 1e-28 * expected.to_f64(), "diff {diff}");
    }

    #[test]
    fn lattice_theta_decreases_in_t(t in 0.2f64..6.0, dt in 0.01f64..1.0) {
        let lattice = e8();
        let opts = EnumerationOptions::default();
        let a = lattice_theta(&lattice, t, DEFAULT_TAIL_TOLERANCE, opts).unwrap().value();
        let b = lattice_theta(&lattice, t + dt, DEFAULT_TAIL_TOLERANCE, opts).unwrap().value();
        prop_assert!(b < a);
        prop_assert!(b > 1.0);
    }

    #[test]
    fn rotations_are_orthogonal_and_seeded(n in 1usize..=16, seed in any::<u64>()) {
        let u = random_rotation(n, seed).unwrap();
        prop_assert!(u.orthogonality_defect() < 1e-12);
        prop_assert_eq!(u, random_rotation(n, seed).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn direct_sum_counts_are_convolutions(a in 1usize..=6, b in 1usize..=6, m in 1u64..=12) {
        let left = zn(a).unwrap();
        let right = zn(b).unwrap();
        let sum = direct_sum(&[left.clone(), right.clone()]).unwrap();
        let direct = enumerate_shells(&sum, m).unwrap();
        let conv = enumerate_shells(&left, m)
            .unwrap()
            .convolve(&enumerate_shells(&right, m).unwrap())
            .unwrap();
        prop_assert_eq!(direct.counts(), conv.counts());
    }

    #[test]
    fn combos_round_trip_through_json(
        n in 1usize..=16,
        terms in prop::collection::vec((-1e3f64..1e3, 1e-3f64..1e3), 0..6),
    ) {
        let h = GaussianCombo::from_pairs(n, &terms).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        let back: GaussianCombo = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, h);
    }
}
