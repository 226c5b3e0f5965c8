//! Max-plus eigenvalue, critical graph and eigenspace generators.

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde_json::{json, Value};

use crate::scalar::{from_usize, max_ref, min_ref, Scalar};
use crate::tropical::{
    in_span, kleene_star, normalize_projective, point_to_json, scale_matrix, ProjectivePoint, Semiring,
    TropError, TropicalMatrix,
};

/// Largest `n` accepted by the cycle-enumeration oracle.
pub const ORACLE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData<T> {
    pub lambda: T,
    pub critical_nodes: Vec<usize>,
    pub critical_edges: Vec<(usize, usize)>,
    /// Strongly connected components of the critical graph, each sorted, ordered by first node.
    pub critical_classes: Vec<Vec<usize>>,
    /// One normalized star column per class, duplicates removed.
    pub generators: Vec<ProjectivePoint<T>>,
}

impl<T: Scalar> SpectralData<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.lambda.to_string(),
            "classes": self.critical_classes,
            "generators": self.generators.iter().map(point_to_json).collect::<Vec<_>>(),
        })
    }
}

fn require_max_plus<T: Scalar>(a: &TropicalMatrix<T>) -> Result<(), TropError> {
    match a.semiring() {
        Semiring::MaxPlus => Ok(()),
        Semiring::MinPlus => Err(TropError::WrongSemiring { expected: Semiring::MaxPlus }),
    }
}

/// Maximum cycle mean by Karp's walk-weight recursion.
pub fn max_cycle_mean<T: Scalar>(a: &TropicalMatrix<T>) -> Result<T, TropError> {
    require_max_plus(a)?;
    let n = a.n();
    // d[m][j]: best weight of a walk with exactly m edges ending at j, any start.
    let mut d: Vec<Vec<T>> = vec![vec![T::zero(); n]];
    for m in 1..=n {
        let prev = &d[m - 1];
        let next: Vec<T> = (0..n)
            .map(|j| {
                (1..n).fold(prev[0].clone() + a.get(0, j).clone(), |best, i| {
                    max_ref(&best, &(prev[i].clone() + a.get(i, j).clone())).clone()
                })
            })
            .collect();
        d.push(next);
    }
    let karp = |j: usize| {
        let ratio_at = |m: usize| (d[n][j].clone() - d[m][j].clone()) / from_usize::<T>(n - m);
        (1..n).fold(ratio_at(0), |worst, m| min_ref(&worst, &ratio_at(m)).clone())
    };
    Ok((1..n).fold(karp(0), |best, j| max_ref(&best, &karp(j)).clone()))
}

/// All simple cycles of the complete digraph on `n` nodes (loops included),
/// each listed once starting from its smallest node.
pub fn simple_cycles(n: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, path: &mut Vec<usize>, used: &mut [bool], n: usize, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        for v in start + 1..n {
            if !used[v] {
                used[v] = true;
                path.push(v);
                extend(start, path, used, n, out);
                path.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    for start in 0..n {
        let mut used = vec![false; n];
        used[start] = true;
        extend(start, &mut vec![start], &mut used, n, &mut out);
    }
    out
}

/// Weight of the closed walk visiting `cycle` in order.
pub fn cycle_weight<T: Scalar>(a: &TropicalMatrix<T>, cycle: &[usize]) -> T {
    (0..cycle.len()).fold(T::zero(), |w, t| w + a.get(cycle[t], cycle[(t + 1) % cycle.len()]).clone())
}

/// Maximum cycle mean by exhaustive simple-cycle enumeration (`n ≤ 8`).
pub fn cycle_mean_oracle<T: Scalar>(a: &TropicalMatrix<T>) -> Result<T, TropError> {
    require_max_plus(a)?;
    Ok(best_cycle(a)?.1)
}

/// A simple cycle of maximum mean together with that mean (`n ≤ 8`).
pub fn best_cycle<T: Scalar>(a: &TropicalMatrix<T>) -> Result<(Vec<usize>, T), TropError> {
    if a.n() > ORACLE_MAX_N {
        return Err(TropError::TooLarge { n: a.n(), limit: ORACLE_MAX_N });
    }
    let mut best: Option<(Vec<usize>, T)> = None;
    for c in simple_cycles(a.n()) {
        let mean = cycle_weight(a, &c) / from_usize::<T>(c.len());
        if best.as_ref().map_or(true, |(_, m)| mean > *m) {
            best = Some((c, mean));
        }
    }
    Ok(best.expect("n >= 1 has a loop"))
}

/// Eigenvalue, critical graph and eigenspace generators of a max-plus matrix.
pub fn spectral_data<T: Scalar>(a: &TropicalMatrix<T>) -> Result<SpectralData<T>, TropError> {
    let lambda = max_cycle_mean(a)?;
    let n = a.n();
    let normalized = a.shifted(&-lambda.clone());
    let star = kleene_star(&normalized)?;
    let mut graph: DiGraphMap<usize, ()> = DiGraphMap::new();
    let mut critical_edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if (normalized.get(i, j).clone() + star.get(j, i).clone()).is_zero() {
                critical_edges.push((i, j));
                graph.add_edge(i, j, ());
            }
        }
    }
    let mut critical_nodes: Vec<usize> = graph.nodes().collect();
    critical_nodes.sort_unstable();
    let mut critical_classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    critical_classes.sort();
    let mut generators: Vec<ProjectivePoint<T>> = Vec::new();
    for class in &critical_classes {
        let g = normalize_projective(&star.column(class[0]));
        if !generators.contains(&g) {
            generators.push(g);
        }
    }
    Ok(SpectralData { lambda, critical_nodes, critical_edges, critical_classes, generators })
}

/// Exact check of `max_j(A_ij + v_j) = λ + v_i` for every row.
pub fn verify_eigenvector<T: Scalar>(a: &TropicalMatrix<T>, lambda: &T, v: &ProjectivePoint<T>) -> bool {
    if v.dim() != a.n() || a.semiring() != Semiring::MaxPlus {
        return false;
    }
    let x = v.coords();
    (0..a.n()).all(|i| {
        let lhs = (1..a.n()).fold(a.get(i, 0).clone() + x[0].clone(), |m, j| {
            max_ref(&m, &(a.get(i, j).clone() + x[j].clone())).clone()
        });
        lhs == lambda.clone() + x[i].clone()
    })
}

/// Mutual span membership of the two generator sets.
pub fn eigenspace_equal<T: Scalar>(a: &TropicalMatrix<T>, b: &TropicalMatrix<T>) -> Result<bool, TropError> {
    if a.n() != b.n() {
        return Err(TropError::DimensionMismatch { left: a.n(), right: b.n() });
    }
    let ga = spectral_data(a)?.generators;
    let gb = spectral_data(b)?.generators;
    spans_equal(&ga, &gb)
}

/// True when each generator list lies in the span of the other.
pub fn spans_equal<T: Scalar>(ga: &[ProjectivePoint<T>], gb: &[ProjectivePoint<T>]) -> Result<bool, TropError> {
    for g in ga {
        if !in_span(g, gb)? {
            return Ok(false);
        }
    }
    for g in gb {
        if !in_span(g, ga)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Generator lists compared as sets.
pub fn same_generator_set<T: Scalar + Ord>(ga: &[ProjectivePoint<T>], gb: &[ProjectivePoint<T>]) -> bool {
    let mut a = ga.to_vec();
    let mut b = gb.to_vec();
    a.sort();
    b.sort();
    a.dedup();
    b.dedup();
    a == b
}

/// Recomputes the spectrum of `k·A` and compares with `k` times the spectrum of `A`.
pub fn hadamard_lemma_check<T: Scalar + Ord>(a: &TropicalMatrix<T>, k: u32) -> Result<bool, TropError> {
    let kk = T::from_u32(k).expect("small integer");
    let base = spectral_data(a)?;
    let scaled = spectral_data(&scale_matrix(a, &kk)?)?;
    let expected: Vec<_> = base.generators.iter().map(|g| g.scaled(&kk)).collect();
    Ok(scaled.lambda == base.lambda * kk && same_generator_set(&scaled.generators, &expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn m(rows: &[&[i64]]) -> TropicalMatrix<Rational> {
        TropicalMatrix::new(
            rows.iter().map(|r| r.iter().map(|&x| ratio(x, 1)).collect()).collect(),
            Semiring::MaxPlus,
        )
        .unwrap()
    }

    fn mh(rows: &[&[f64]]) -> TropicalMatrix<Rational> {
        TropicalMatrix::new(
            rows.iter().map(|r| r.iter().map(|&x| Rational::from_float(x).unwrap()).collect()).collect(),
            Semiring::MaxPlus,
        )
        .unwrap()
    }

    fn p(v: &[i64]) -> ProjectivePoint<Rational> {
        normalize_projective(&v.iter().map(|&x| ratio(x, 1)).collect::<Vec<_>>())
    }

    #[test]
    fn karp_examples() {
        let fig7 = m(&[&[0, 1, 3], &[-5, 0, 1], &[-6, -1, 0]]);
        assert_eq!(max_cycle_mean(&fig7).unwrap(), ratio(0, 1));
        assert_eq!(cycle_mean_oracle(&fig7).unwrap(), ratio(0, 1));
        let two = m(&[&[0, 2], &[1, 0]]);
        assert_eq!(max_cycle_mean(&two).unwrap(), ratio(3, 2));
        assert_eq!(cycle_mean_oracle(&two).unwrap(), ratio(3, 2));
        let diag = m(&[&[4, 1, 2], &[3, 4, 0], &[-1, 2, 4]]);
        assert_eq!(max_cycle_mean(&diag).unwrap(), ratio(4, 1));
        assert_eq!(max_cycle_mean(&m(&[&[-7]])).unwrap(), ratio(-7, 1));
        assert_eq!(cycle_mean_oracle(&m(&[&[-7]])).unwrap(), ratio(-7, 1));
    }

    #[test]
    fn oracle_limits() {
        let big = TropicalMatrix::from_fn(9, Semiring::MaxPlus, |_, _| ratio(0, 1));
        assert_eq!(cycle_mean_oracle(&big), Err(TropError::TooLarge { n: 9, limit: 8 }));
        assert!(cycle_mean_oracle(&big.with_semiring(Semiring::MinPlus)).is_err());
    }

    #[test]
    fn cycle_count() {
        // loops + 2-cycles + 3-cycles (two orientations) on 3 nodes
        assert_eq!(simple_cycles(3).len(), 3 + 3 + 2);
    }

    #[test]
    fn fig7_spectrum() {
        let sd = spectral_data(&m(&[&[0, 1, 3], &[-5, 0, 1], &[-6, -1, 0]])).unwrap();
        assert_eq!(sd.lambda, ratio(0, 1));
        assert_eq!(sd.critical_classes, vec![vec![0], vec![1, 2]]);
        assert_eq!(sd.generators, vec![p(&[0, -5, -6]), p(&[0, -2, -3])]);
    }

    #[test]
    fn fig4_spectrum() {
        let sd = spectral_data(&m(&[&[0, -1, -1], &[-4, 0, -1], &[-1, -1, -4]])).unwrap();
        assert_eq!(sd.critical_classes, vec![vec![0], vec![1]]);
        assert_eq!(sd.generators, vec![p(&[0, -2, -1]), p(&[0, 1, 0])]);
    }

    #[test]
    fn counterexample_spectrum() {
        let sd = spectral_data(&m(&[&[0, -3, -4], &[-1, 0, -2], &[-1, -1, 0]])).unwrap();
        assert_eq!(sd.critical_classes, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(sd.generators, vec![p(&[0, -1, -1]), p(&[0, 3, 2]), p(&[0, 2, 4])]);
        let json = sd.to_json();
        assert_eq!(json["lambda"], "0");
        assert_eq!(json["generators"][1], serde_json::json!(["0", "3", "2"]));
    }

    #[test]
    fn single_class_and_shared_eigenspace() {
        let fig6 = m(&[&[0, -3, -2], &[1, 0, -1], &[2, 1, 0]]);
        assert_eq!(spectral_data(&fig6).unwrap().generators, vec![p(&[0, 1, 2])]);
        let fig8 = m(&[&[0, -4, -2], &[1, 0, -3], &[-1, -1, 0]]);
        let fig9 = m(&[&[0, -9, -2], &[1, 0, -3], &[-1, -1, 0]]);
        let g8 = spectral_data(&fig8).unwrap().generators;
        assert!(same_generator_set(&g8, &[p(&[0, 1, 0]), p(&[0, 3, 2]), p(&[0, 1, 2])]));
        assert!(eigenspace_equal(&fig8, &fig9).unwrap());
        assert!(eigenspace_equal(&fig8, &fig8).unwrap());
        let fig7 = m(&[&[0, 1, 3], &[-5, 0, 1], &[-6, -1, 0]]);
        let fig4 = m(&[&[0, -1, -1], &[-4, 0, -1], &[-1, -1, -4]]);
        assert!(!eigenspace_equal(&fig7, &fig4).unwrap());
    }

    #[test]
    fn half_integer_figure() {
        let fig2 = mh(&[&[0., -2.5, -0.5], &[-1., 0., -1.5], &[-1., -1., 0.]]);
        let sd = spectral_data(&fig2).unwrap();
        assert_eq!(sd.lambda, ratio(0, 1));
        for g in &sd.generators {
            assert!(verify_eigenvector(&fig2, &sd.lambda, g));
        }
    }

    #[test]
    fn eigenvector_check() {
        let fig7 = m(&[&[0, 1, 3], &[-5, 0, 1], &[-6, -1, 0]]);
        let zero = ratio(0, 1);
        assert!(verify_eigenvector(&fig7, &zero, &p(&[0, -2, -3])));
        assert!(!verify_eigenvector(&fig7, &zero, &p(&[0, 0, 0])));
    }

    #[test]
    fn hadamard_examples() {
        let fig7 = m(&[&[0, 1, 3], &[-5, 0, 1], &[-6, -1, 0]]);
        assert!(hadamard_lemma_check(&fig7, 3).unwrap());
        assert!(hadamard_lemma_check(&fig7, 1).unwrap());
    }
}
