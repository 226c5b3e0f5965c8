//! Strategies and brute-force oracles shared by the property tests.
#![allow(dead_code)]

use num_traits::Zero;
use proptest::prelude::*;
use tropasym::tropical::normalize_projective;
use tropasym::{RatMatrix, RatPoint, Rational, Semiring};

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

/// Rationals `p/q` with `q ∈ {1, 2, 3, 4, 6}` in `[-8, 4]`.
pub fn rational() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![1i64, 2, 3, 4, 6]).prop_flat_map(|q| (-8 * q..=4 * q).prop_map(move |p| r(p, q)))
}

pub fn matrix_in(sizes: std::ops::RangeInclusive<usize>, semiring: Semiring) -> impl Strategy<Value = RatMatrix> {
    sizes.prop_flat_map(move |n| {
        prop::collection::vec(rational(), n * n)
            .prop_map(move |v| RatMatrix::from_fn(n, semiring, |i, j| v[i * n + j].clone()))
    })
}

pub fn matrix(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = RatMatrix> {
    matrix_in(sizes, Semiring::MaxPlus)
}

/// Three matrices of one common size.
pub fn triple(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (RatMatrix, RatMatrix, RatMatrix)> {
    sizes.prop_flat_map(|n| (matrix(n..=n), matrix(n..=n), matrix(n..=n)))
}

pub fn point(n: usize) -> impl Strategy<Value = RatPoint> {
    prop::collection::vec(rational(), n).prop_map(|v| normalize_projective(&v))
}

pub fn points(n: usize, count: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<RatPoint>> {
    prop::collection::vec(point(n), count)
}

/// Best path weight over walks of `0..=n` edges, by dynamic programming over walk length.
pub fn longest_path(a: &RatMatrix) -> Vec<Vec<Rational>> {
    let n = a.n();
    let mut best: Vec<Vec<Option<Rational>>> =
        (0..n).map(|i| (0..n).map(|j| (i == j).then(Rational::zero)).collect()).collect();
    let mut walks = best.clone();
    for _ in 0..n {
        walks = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).filter_map(|l| walks[i][l].as_ref().map(|w| w + a.get(l, j))).max())
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                if let Some(w) = &walks[i][j] {
                    if best[i][j].as_ref().map_or(true, |b| w > b) {
                        best[i][j] = Some(w.clone());
                    }
                }
            }
        }
    }
    best.into_iter().map(|row| row.into_iter().map(|x| x.expect("complete graph")).collect()).collect()
}

/// Shortest paths with every intermediate node in `c`, restricted to rows and columns outside `c`.
pub fn restricted_shortest_paths(b: &RatMatrix, c: &[usize]) -> Vec<Vec<Rational>> {
    let n = b.n();
    let mut d: Vec<Vec<Rational>> = (0..n).map(|i| b.row(i).to_vec()).collect();
    for &m in c {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][m] + &d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|v| !c.contains(v)).collect();
    keep.iter().map(|&i| keep.iter().map(|&j| d[i][j].clone()).collect()).collect()
}

/// `A + c` on every entry.
pub fn plus_constant(a: &RatMatrix, c: &Rational) -> RatMatrix {
    a.map(|x| x + c)
}
