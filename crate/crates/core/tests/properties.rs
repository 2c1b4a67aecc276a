use biocirc::associated::{self, Op};
use biocirc::determinants::{self, master_window};
use biocirc::recurrences::{self, Family};
use biocirc::{grid, kernels, FourierSeries, Kind, Systems, Weight, C64};
use proptest::prelude::*;

fn weight() -> impl Strategy<Value = Systems> {
    (0u64..10_000, 0.5f64..0.85).prop_map(|(seed, decay)| Systems::new(Weight::FourierSeries(FourierSeries::random(seed, -8, 10, decay))))
}

fn point() -> impl Strategy<Value = C64> {
    prop_oneof![0.3f64..0.8, 1.25f64..2.2].prop_flat_map(|m| (Just(m), 0.0..std::f64::consts::TAU)).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::TwoJK), Just(Kind::JTwoK)]
}

/// Skip draws whose determinants vanish to working precision.
fn usable(sys: &Systems, kind: Kind, o: i64, n: usize) -> bool {
    sys.system(kind, o, n).is_ok_and(|s| (0..=n + 1).all(|k| s.is_singular(k) == Ok(false)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duality_holds(sys in weight(), r in -2i64..3, n in 0usize..6) {
        let d = sys.d(n, r).unwrap();
        let e = sys.e(n, r + n as i64 - 1).unwrap();
        prop_assert!(grid::rel_diff(d, e) <= 1e-12 || (d - e).norm() <= 1e-14);
    }

    #[test]
    fn pairing_is_diagonal(sys in weight(), k in kind(), o in -2i64..3) {
        prop_assume!(usable(&sys, k, o, 4));
        prop_assert!(sys.system(k, o, 4).unwrap().biorthogonality_residual(4).unwrap() <= 1e-10);
    }

    #[test]
    fn norm_is_determinant_ratio(sys in weight(), k in kind(), o in -2i64..3, n in 0usize..5) {
        prop_assume!(usable(&sys, k, o, n));
        let ratio = sys.det(k, n + 1, o).unwrap() / sys.det(k, n, o).unwrap();
        prop_assert!(grid::rel_diff(sys.norm(k, n, o).unwrap(), ratio) <= 1e-13);
    }

    #[test]
    fn dodgson_on_master_matrix(sys in weight(), k in kind(), o in -1i64..2, n in 1i64..4, z in point(), zeta in point(),
                                a in 0usize..64, b in 0usize..64) {
        let size = n as usize + 3;
        let pick = |x: usize| {
            let i = x % (size - 1);
            (i, i + 1 + (x / (size - 1)) % (size - 1 - i))
        };
        let (lo, hi) = master_window(k, o, n);
        let table = sys.moments(lo, hi).unwrap();
        let r = determinants::dodgson_residual(k, o, n, z, zeta, pick(a), pick(b), &table).unwrap();
        prop_assert!(r <= 1e-10, "residual {r}");
    }

    #[test]
    fn degree_recurrences(sys in weight(), o in -1i64..2, n in 0usize..4, z in point()) {
        for (k, fams) in [(Kind::TwoJK, [Family::P, Family::QStar]), (Kind::JTwoK, [Family::R, Family::SStar])] {
            if !usable(&sys, k, o, n + 4) {
                continue;
            }
            for fam in fams {
                if let Ok(r) = recurrences::degree_residual(&sys, fam, n, o, z) {
                    prop_assert!(r <= 1e-9, "{fam} residual {r}");
                }
            }
        }
    }

    #[test]
    fn kernel_methods_agree(sys in weight(), k in kind(), o in -1i64..2, n in 0usize..4, x in point(), y in point()) {
        prop_assume!(usable(&sys, k, o, n + 2));
        match kernels::method_agreement(&sys, k, n, o, x, y) {
            Ok(r) => prop_assert!(r <= 1e-9, "residual {r}"),
            Err(biocirc::Error::DegenerateCdPoint) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn kernel_normalization(sys in weight(), k in kind(), o in -1i64..2, n in 0usize..5) {
        prop_assume!(usable(&sys, k, o, n + 1));
        let v = kernels::normalization(&sys, k, n, o).unwrap();
        prop_assert!((v - C64::new(n as f64 + 1.0, 0.0)).norm() <= 1e-10 * (n as f64 + 1.0));
    }

    #[test]
    fn polynomial_columns_are_annihilated(sys in weight(), o in 0i64..2, n in 0usize..3, z in point()) {
        prop_assume!(usable(&sys, Kind::TwoJK, o - 2, n + 4) && usable(&sys, Kind::TwoJK, o, n + 4) && usable(&sys, Kind::TwoJK, o - 1, n + 4));
        let f = |m: usize| sys.ep(m, o, z);
        prop_assert!(associated::op_residual(&sys, Op::L1, &f, n, o, z).unwrap() <= 1e-9);
    }

    #[test]
    fn tau_without_deformation_is_exp_determinant(n in 0usize..6, ell in 0i64..5) {
        let exp = Systems::new(Weight::ExpLinear);
        let t = determinants::tau(n, ell, C64::new(0.0, 0.0)).unwrap();
        prop_assert!(grid::rel_diff(t, exp.d(n, ell).unwrap()) <= 1e-12);
    }
}
