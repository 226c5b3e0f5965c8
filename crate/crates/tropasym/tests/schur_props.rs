mod common;

use common::*;
use proptest::prelude::*;
use tropasym::schur::{min_cycle_mean, minplus_schur, schur_sequence};
use tropasym::spectral::max_cycle_mean;
use tropasym::{RatMatrix, Semiring};

/// Min-plus matrix with minimum cycle mean 0, so every star along the way converges.
fn min_plus_nonnegative(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = RatMatrix> {
    matrix_in(sizes, Semiring::MinPlus).prop_map(|b| b.shifted(&-min_cycle_mean(&b).unwrap()))
}

/// Matrix plus two disjoint, nonempty node sets whose union leaves at least one node.
fn with_split() -> impl Strategy<Value = (RatMatrix, Vec<usize>, Vec<usize>)> {
    (3usize..=6).prop_flat_map(|n| {
        (min_plus_nonnegative(n..=n), Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), 1..n - 1)
            .prop_flat_map(move |(b, order, first)| {
                (Just(b), Just(order), Just(first), 1..n - first)
            })
            .prop_map(|(b, order, first, second)| {
                let c1 = order[..first].to_vec();
                let c2 = order[first..first + second].to_vec();
                (b, c1, c2)
            })
    })
}

proptest! {
    #[test]
    fn schur_matches_restricted_paths((b, c, _) in with_split()) {
        prop_assert_eq!(minplus_schur(&b, &c).unwrap().rows(), restricted_shortest_paths(&b, &c));
    }

    #[test]
    fn eliminating_in_two_steps_equals_one((b, c1, c2) in with_split()) {
        let mut union = c1.clone();
        union.extend(&c2);
        let at_once = minplus_schur(&b, &union).unwrap();
        let keep: Vec<usize> = (0..b.n()).filter(|v| !c1.contains(v)).collect();
        let c2_local: Vec<usize> = c2.iter().map(|v| keep.iter().position(|k| k == v).unwrap()).collect();
        let stepwise = minplus_schur(&minplus_schur(&b, &c1).unwrap(), &c2_local).unwrap();
        prop_assert_eq!(at_once, stepwise);
    }

    #[test]
    fn sequence_removes_every_node_once(b in matrix_in(1..=6, Semiring::MinPlus)) {
        let levels = schur_sequence(&b).unwrap();
        prop_assert!(levels.len() <= b.n());
        let mut removed: Vec<usize> = levels.iter().flat_map(|l| l.removed_classes.iter().flatten().copied()).collect();
        removed.sort();
        prop_assert_eq!(removed, (0..b.n()).collect::<Vec<_>>());
    }

    #[test]
    fn negation_swaps_max_and_min_eigenvalues(a in matrix(1..=6)) {
        prop_assert_eq!(min_cycle_mean(&a.negated()).unwrap(), -max_cycle_mean(&a).unwrap());
    }
}
