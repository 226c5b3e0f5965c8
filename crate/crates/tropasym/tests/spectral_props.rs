mod common;

use common::*;
use proptest::prelude::*;
use tropasym::spectral::{
    cycle_mean_oracle, eigenspace_equal, hadamard_lemma_check, max_cycle_mean, same_generator_set, spectral_data,
    verify_eigenvector,
};
use tropasym::tropical::{kleene_star, normalize_projective};

proptest! {
    #[test]
    fn karp_matches_cycle_enumeration(a in matrix(1..=6)) {
        prop_assert_eq!(max_cycle_mean(&a).unwrap(), cycle_mean_oracle(&a).unwrap());
    }

    #[test]
    fn constant_shift_moves_eigenvalue_only(a in matrix(1..=6), c in rational()) {
        let b = plus_constant(&a, &c);
        let (sa, sb) = (spectral_data(&a).unwrap(), spectral_data(&b).unwrap());
        prop_assert_eq!(sb.lambda, &sa.lambda + &c);
        prop_assert!(same_generator_set(&sa.generators, &sb.generators));
    }

    #[test]
    fn transpose_keeps_eigenvalue(a in matrix(1..=6)) {
        prop_assert_eq!(max_cycle_mean(&a.transpose()).unwrap(), max_cycle_mean(&a).unwrap());
    }

    #[test]
    fn critical_star_columns_are_eigenvectors(a in matrix(1..=6)) {
        let sd = spectral_data(&a).unwrap();
        let star = kleene_star(&a.shifted(&-sd.lambda.clone())).unwrap();
        for &v in &sd.critical_nodes {
            prop_assert!(verify_eigenvector(&a, &sd.lambda, &normalize_projective(&star.column(v))));
        }
        for class in &sd.critical_classes {
            let first = normalize_projective(&star.column(class[0]));
            for &v in class {
                prop_assert_eq!(&normalize_projective(&star.column(v)), &first);
            }
        }
        for g in &sd.generators {
            prop_assert!(verify_eigenvector(&a, &sd.lambda, g));
        }
    }

    #[test]
    fn hadamard_power_scales_spectrum(a in matrix(1..=5), k in prop::sample::select(vec![2u32, 3, 5])) {
        prop_assert!(hadamard_lemma_check(&a, k).unwrap());
    }

    #[test]
    fn eigenspace_equality_is_an_equivalence(a in matrix(2..=5), b in matrix(2..=5), c1 in rational(), c2 in rational()) {
        prop_assert!(eigenspace_equal(&a, &a).unwrap());
        if a.n() == b.n() {
            prop_assert_eq!(eigenspace_equal(&a, &b).unwrap(), eigenspace_equal(&b, &a).unwrap());
        }
        let (x, y) = (plus_constant(&a, &c1), plus_constant(&a, &c2));
        prop_assert!(eigenspace_equal(&a, &x).unwrap() && eigenspace_equal(&x, &y).unwrap());
        prop_assert!(eigenspace_equal(&a, &y).unwrap());
    }
}
