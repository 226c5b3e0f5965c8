//! Min-plus Schur complements, the critical-class elimination sequence and the
//! candidate exponent vectors derived from it.

use serde_json::{json, Value};
use thiserror::Error;

use crate::perron::PinfEstimate;
use crate::scalar::Scalar;
use crate::spectral::{best_cycle, max_cycle_mean, spectral_data, ORACLE_MAX_N};
use crate::tropical::{
    in_span, kleene_star, normalize_projective, point_to_json, ProjectivePoint, Semiring, TropError,
    TropicalMatrix,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchurError {
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error("eliminated set covers every node")]
    ComplementEmpty,
    #[error("node {0} listed twice")]
    DuplicateNode(usize),
    #[error("min-plus star diverges: negative cycle {cycle:?}")]
    NegativeCycle { cycle: Vec<usize> },
}

/// How `B̂` is obtained from `B` and the level eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Row `i` minus the eigenvalue of the level at which node `i` was removed.
    #[default]
    RowShift,
    /// Column `j` minus the eigenvalue of the level at which node `j` was removed.
    ColumnShift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurLevel<T> {
    /// Min-plus matrix over the surviving nodes (before eigenvalue normalization).
    pub matrix: TropicalMatrix<T>,
    /// Original index of each row of `matrix`.
    pub node_map: Vec<usize>,
    /// Minimum cycle mean of `matrix`.
    pub eigenvalue: T,
    /// Critical classes of this level in original indices; eliminated to form the next level.
    pub removed_classes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub v: Vec<T>,
    pub tp_point: ProjectivePoint<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurReport<T> {
    pub levels: Vec<SchurLevel<T>>,
    pub b_hat: TropicalMatrix<T>,
    pub candidates: Vec<Candidate<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateVerdict<T> {
    pub candidate: Candidate<T>,
    pub in_eigenspace: bool,
    pub matches_pinf: bool,
    pub distance_to_pinf: f64,
}

impl<T: Scalar> SchurReport<T> {
    pub fn to_json(&self, verdicts: Option<&[CandidateVerdict<T>]>) -> Value {
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|l| json!({ "nodes": l.node_map, "eigenvalue": l.eigenvalue.to_string(), "removed_classes": l.removed_classes }))
            .collect();
        let candidates: Vec<Value> = match verdicts {
            Some(vs) => vs
                .iter()
                .map(|v| {
                    json!({
                        "v": v.candidate.v.iter().map(ToString::to_string).collect::<Vec<_>>(),
                        "tp_point": point_to_json(&v.candidate.tp_point),
                        "in_eigenspace": v.in_eigenspace,
                        "matches_pinf": v.matches_pinf,
                    })
                })
                .collect(),
            None => self
                .candidates
                .iter()
                .map(|c| {
                    json!({
                        "v": c.v.iter().map(ToString::to_string).collect::<Vec<_>>(),
                        "tp_point": point_to_json(&c.tp_point),
                    })
                })
                .collect(),
        };
        json!({ "levels": levels, "candidates": candidates })
    }
}

fn require_min_plus<T: Scalar>(a: &TropicalMatrix<T>) -> Result<(), TropError> {
    match a.semiring() {
        Semiring::MinPlus => Ok(()),
        Semiring::MaxPlus => Err(TropError::WrongSemiring { expected: Semiring::MinPlus }),
    }
}

/// Minimum cycle mean, i.e. the min-plus eigenvalue.
pub fn min_cycle_mean<T: Scalar>(b: &TropicalMatrix<T>) -> Result<T, TropError> {
    require_min_plus(b)?;
    Ok(-max_cycle_mean(&b.negated())?)
}

/// A most negative cycle of a min-plus matrix, in the indices of `labels`.
fn negative_cycle<T: Scalar>(m: &TropicalMatrix<T>, labels: &[usize], fallback: usize) -> Vec<usize> {
    if m.n() <= ORACLE_MAX_N {
        if let Ok((cycle, _)) = best_cycle(&m.negated()) {
            return cycle.into_iter().map(|i| labels[i]).collect();
        }
    }
    vec![labels[fallback]]
}

fn min_plus_star<T: Scalar>(m: &TropicalMatrix<T>, labels: &[usize]) -> Result<TropicalMatrix<T>, SchurError> {
    kleene_star(m).map_err(|e| match e {
        TropError::StarDiverges { node } => SchurError::NegativeCycle { cycle: negative_cycle(m, labels, node) },
        other => other.into(),
    })
}

/// `A_NN ⊕ A_NC (A_CC)* A_CN` over `N` = nodes not in `c`, rows in increasing order.
pub fn minplus_schur<T: Scalar>(a: &TropicalMatrix<T>, c: &[usize]) -> Result<TropicalMatrix<T>, SchurError> {
    require_min_plus(a)?;
    let n = a.n();
    let mut in_c = vec![false; n];
    for &v in c {
        if v >= n {
            return Err(TropError::IndexOutOfRange { index: v, n }.into());
        }
        if in_c[v] {
            return Err(SchurError::DuplicateNode(v));
        }
        in_c[v] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&v| !in_c[v]).collect();
    if keep.is_empty() {
        return Err(SchurError::ComplementEmpty);
    }
    if c.is_empty() {
        return Ok(a.clone());
    }
    let star = min_plus_star(&a.submatrix(c)?, c)?;
    let s = Semiring::MinPlus;
    // Detour i → c_p ⇝ c_q → j, minimized over entry and exit nodes.
    Ok(TropicalMatrix::from_fn(keep.len(), s, |i, j| {
        let (gi, gj) = (keep[i], keep[j]);
        let mut best = a.get(gi, gj).clone();
        for (p, &cp) in c.iter().enumerate() {
            for (q, &cq) in c.iter().enumerate() {
                let detour = a.get(gi, cp).clone() + star.get(p, q).clone() + a.get(cq, gj).clone();
                best = s.add(&best, &detour);
            }
        }
        best
    }))
}

/// Repeated elimination of the critical classes, starting from `b` itself.
pub fn schur_sequence<T: Scalar>(b: &TropicalMatrix<T>) -> Result<Vec<SchurLevel<T>>, SchurError> {
    require_min_plus(b)?;
    let mut levels = Vec::new();
    let mut current = b.clone();
    let mut node_map: Vec<usize> = (0..b.n()).collect();
    loop {
        let eigenvalue = min_cycle_mean(&current)?;
        let sd = spectral_data(&current.negated())?;
        let removed_classes: Vec<Vec<usize>> =
            sd.critical_classes.iter().map(|cl| cl.iter().map(|&v| node_map[v]).collect()).collect();
        let all_critical = sd.critical_nodes.len() == current.n();
        let normalized = current.shifted(&-eigenvalue.clone());
        levels.push(SchurLevel { matrix: current, node_map: node_map.clone(), eigenvalue, removed_classes });
        if all_critical {
            return Ok(levels);
        }
        current = minplus_schur(&normalized, &sd.critical_nodes)?;
        node_map = (0..node_map.len())
            .filter(|v| !sd.critical_nodes.contains(v))
            .map(|v| node_map[v])
            .collect();
    }
}

/// Builds `B̂`, its min-plus star and one candidate per distinct star column.
pub fn candidate_exponents<T: Scalar>(
    b: &TropicalMatrix<T>,
    normalization: Normalization,
) -> Result<SchurReport<T>, SchurError> {
    let levels = schur_sequence(b)?;
    let n = b.n();
    let mut removal: Vec<Option<T>> = vec![None; n];
    for level in &levels {
        for &v in level.removed_classes.iter().flatten() {
            removal[v] = Some(level.eigenvalue.clone());
        }
    }
    let removal: Vec<T> = removal.into_iter().map(|m| m.expect("every node is removed at some level")).collect();
    let b_hat = TropicalMatrix::from_fn(n, Semiring::MinPlus, |i, j| {
        let shift = match normalization {
            Normalization::RowShift => &removal[i],
            Normalization::ColumnShift => &removal[j],
        };
        b.get(i, j).clone() - shift.clone()
    });
    let labels: Vec<usize> = (0..n).collect();
    let star = min_plus_star(&b_hat, &labels)?;
    let mut candidates: Vec<Candidate<T>> = Vec::new();
    for j in 0..n {
        let v = star.column(j);
        let neg: Vec<T> = v.iter().map(|x| -x.clone()).collect();
        let tp_point = normalize_projective(&neg);
        if candidates.iter().all(|c| c.tp_point != tp_point) {
            candidates.push(Candidate { v, tp_point });
        }
    }
    Ok(SchurReport { levels, b_hat, candidates })
}

/// Flags each candidate by exact eigenspace membership for the max-plus matrix `a`
/// and by ∞-norm distance to the numerical limit.
pub fn compare_prediction<T: Scalar>(
    a: &TropicalMatrix<T>,
    report: &SchurReport<T>,
    pinf: &PinfEstimate,
    tol: f64,
) -> Result<Vec<CandidateVerdict<T>>, SchurError> {
    if a.n() != pinf.point.dim() {
        return Err(TropError::DimensionMismatch { left: a.n(), right: pinf.point.dim() }.into());
    }
    let gens = spectral_data(a)?.generators;
    report
        .candidates
        .iter()
        .map(|c| {
            let distance_to_pinf = c.tp_point.to_f64().inf_distance(&pinf.point);
            Ok(CandidateVerdict {
                candidate: c.clone(),
                in_eigenspace: in_span(&c.tp_point, &gens)?,
                matches_pinf: distance_to_pinf <= tol,
                distance_to_pinf,
            })
        })
        .collect()
}
