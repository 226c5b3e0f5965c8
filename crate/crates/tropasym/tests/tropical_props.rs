mod common;

use common::*;
use proptest::prelude::*;
use tropasym::spectral::max_cycle_mean;
use tropasym::tropical::{
    in_span, kleene_star, normalize_projective, trop_add, trop_matmul, trop_project_onto_span,
};
use tropasym::{RatMatrix, RatPoint, Rational, Semiring};

fn identity(n: usize) -> RatMatrix {
    // Off-diagonal entries only need to lose against any path weight that can occur.
    RatMatrix::from_fn(n, Semiring::MaxPlus, |i, j| if i == j { r(0, 1) } else { r(-1_000_000, 1) })
}

/// Max-plus combination `max_j (w_j + g_j)`.
fn combination(gens: &[RatPoint], weights: &[Rational]) -> Vec<Rational> {
    (0..gens[0].dim())
        .map(|i| gens.iter().zip(weights).map(|(g, w)| &g.coords()[i] + w).max().unwrap())
        .collect()
}

proptest! {
    #[test]
    fn normalization_ignores_common_shift(v in prop::collection::vec(rational(), 1..7), c in rational()) {
        let shifted: Vec<Rational> = v.iter().map(|x| x + &c).collect();
        prop_assert_eq!(normalize_projective(&shifted), normalize_projective(&v));
        prop_assert!(normalize_projective(&v).coords()[0] == r(0, 1));
    }

    #[test]
    fn matmul_associates_and_distributes((a, b, c) in triple(1..=5)) {
        let left = trop_matmul(&trop_matmul(&a, &b).unwrap(), &c).unwrap();
        let right = trop_matmul(&a, &trop_matmul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let distributed = trop_add(&trop_matmul(&a, &b).unwrap(), &trop_matmul(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(trop_matmul(&a, &trop_add(&b, &c).unwrap()).unwrap(), distributed);
    }

    #[test]
    fn star_is_closed_and_matches_longest_paths(a in matrix(1..=6)) {
        let normalized = a.shifted(&-max_cycle_mean(&a).unwrap());
        let s = kleene_star(&normalized).unwrap();
        let one_step = trop_add(&identity(a.n()), &trop_matmul(&normalized, &s).unwrap()).unwrap();
        prop_assert_eq!(&one_step, &s);
        prop_assert_eq!(&trop_matmul(&s, &s).unwrap(), &s);
        prop_assert_eq!(s.rows(), longest_path(&normalized));
    }

    #[test]
    fn star_rejects_positive_cycles(a in matrix(1..=5)) {
        let lambda = max_cycle_mean(&a).unwrap();
        prop_assert!(kleene_star(&a.shifted(&(-lambda + r(1, 7)))).is_err());
    }

    #[test]
    fn projection_is_idempotent_and_greatest_below(
        (gens, x, weights) in (2usize..=5).prop_flat_map(|n| {
            (points(n, 1..=4), point(n), prop::collection::vec(rational(), 4))
        })
    ) {
        let p = trop_project_onto_span(&x, &gens).unwrap();
        prop_assert_eq!(&trop_project_onto_span(&p, &gens).unwrap(), &p);
        prop_assert!(in_span(&p, &gens).unwrap());
        // Lift P(x) to the largest copy below x; every span element below x sits under it.
        let lift = x.coords().iter().zip(p.coords()).map(|(a, b)| a - b).min().unwrap();
        let z = combination(&gens, &weights[..gens.len()]);
        let drop = z.iter().zip(x.coords()).map(|(zi, xi)| zi - xi).max().unwrap();
        for i in 0..x.dim() {
            prop_assert!(&p.coords()[i] + &lift <= x.coords()[i]);
            prop_assert!(&z[i] - &drop <= &p.coords()[i] + &lift);
        }
    }

    #[test]
    fn membership_ignores_redundant_generators(
        (gens, x, weights) in (2usize..=5).prop_flat_map(|n| {
            (points(n, 1..=4), point(n), prop::collection::vec(rational(), 4))
        })
    ) {
        let mut extended = gens.clone();
        extended.push(normalize_projective(&combination(&gens, &weights[..gens.len()])));
        prop_assert_eq!(in_span(&x, &gens).unwrap(), in_span(&x, &extended).unwrap());
        for g in &gens {
            prop_assert!(in_span(g, &gens).unwrap());
        }
    }
}
