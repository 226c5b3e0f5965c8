//! Max-plus / min-plus matrices, projective points, Kleene star and tropical spans.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::scalar::{max_ref, min_ref, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TropError {
    #[error("matrix has no rows")]
    EmptyMatrix,
    #[error("row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, found: usize, expected: usize },
    #[error("declared size n = {declared} but entries have {found} rows")]
    SizeField { declared: usize, found: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("cannot parse entry ({row}, {col}): {text:?}")]
    BadEntry { row: usize, col: usize, text: String },
    #[error("invalid matrix JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("semiring mismatch")]
    SemiringMismatch,
    #[error("operation requires a {expected} matrix")]
    WrongSemiring { expected: Semiring },
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("Kleene star diverges: improving cycle through node {node}")]
    StarDiverges { node: usize },
    #[error("generator list is empty")]
    EmptyGenerators,
    #[error("cycle enumeration is limited to n <= {limit}, got n = {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Semiring {
    #[serde(rename = "max-plus")]
    MaxPlus,
    #[serde(rename = "min-plus")]
    MinPlus,
}

impl Default for Semiring {
    fn default() -> Self {
        Semiring::MaxPlus
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semiring::MaxPlus => "max-plus",
            Semiring::MinPlus => "min-plus",
        })
    }
}

impl Semiring {
    /// Tropical addition.
    pub fn add<T: Scalar>(self, a: &T, b: &T) -> T {
        match self {
            Semiring::MaxPlus => max_ref(a, b).clone(),
            Semiring::MinPlus => min_ref(a, b).clone(),
        }
    }

    /// True when `a` strictly wins against `b` under tropical addition.
    pub fn improves<T: Scalar>(self, a: &T, b: &T) -> bool {
        match self {
            Semiring::MaxPlus => a > b,
            Semiring::MinPlus => a < b,
        }
    }

    pub fn dual(self) -> Semiring {
        match self {
            Semiring::MaxPlus => Semiring::MinPlus,
            Semiring::MinPlus => Semiring::MaxPlus,
        }
    }
}

/// Square matrix with finite entries, stored row-major, tagged with its semiring.
#[derive(Debug, Clone, PartialEq)]
pub struct TropicalMatrix<T> {
    n: usize,
    entries: Vec<T>,
    semiring: Semiring,
}

impl<T: Scalar> TropicalMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>, semiring: Semiring) -> Result<Self, TropError> {
        let n = rows.len();
        if n == 0 {
            return Err(TropError::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(TropError::NotSquare { row: i, found: row.len(), expected: n });
            }
            for (j, x) in row.into_iter().enumerate() {
                if !x.is_finite_value() {
                    return Err(TropError::NonFinite { row: i, col: j });
                }
                entries.push(x);
            }
        }
        Ok(TropicalMatrix { n, entries, semiring })
    }

    /// Builds an `n × n` matrix from an entry function.
    ///
    /// # Panics
    /// If `n == 0` or an entry is not finite.
    pub fn from_fn(n: usize, semiring: Semiring, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(n > 0, "empty matrix");
        let entries: Vec<T> = (0..n * n).map(|ix| f(ix / n, ix % n)).collect();
        assert!(entries.iter().all(Scalar::is_finite_value), "non-finite entry");
        TropicalMatrix { n, entries, semiring }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        assert!(value.is_finite_value(), "non-finite entry");
        self.entries[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, self.semiring, |i, j| self.get(j, i).clone())
    }

    pub fn with_semiring(&self, semiring: Semiring) -> Self {
        TropicalMatrix { semiring, ..self.clone() }
    }

    /// Entrywise negation with the dual tag: max-plus `A` becomes min-plus `−A`.
    pub fn negated(&self) -> Self {
        TropicalMatrix {
            n: self.n,
            entries: self.entries.iter().map(|x| -x.clone()).collect(),
            semiring: self.semiring.dual(),
        }
    }

    /// Adds `c` to every entry.
    pub fn shifted(&self, c: &T) -> Self {
        TropicalMatrix {
            n: self.n,
            entries: self.entries.iter().map(|x| x.clone() + c.clone()).collect(),
            semiring: self.semiring,
        }
    }

    /// Principal submatrix on `nodes`, in the given order.
    pub fn submatrix(&self, nodes: &[usize]) -> Result<Self, TropError> {
        if nodes.is_empty() {
            return Err(TropError::EmptyMatrix);
        }
        if let Some(&index) = nodes.iter().find(|&&v| v >= self.n) {
            return Err(TropError::IndexOutOfRange { index, n: self.n });
        }
        Ok(Self::from_fn(nodes.len(), self.semiring, |i, j| self.get(nodes[i], nodes[j]).clone()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> TropicalMatrix<U> {
        TropicalMatrix::from_fn(self.n, self.semiring, |i, j| f(self.get(i, j)))
    }

    pub fn to_f64(&self) -> TropicalMatrix<f64> {
        self.map(Scalar::to_f64_lossy)
    }

    fn same_shape(&self, other: &Self) -> Result<(), TropError> {
        if self.n != other.n {
            return Err(TropError::DimensionMismatch { left: self.n, right: other.n });
        }
        if self.semiring != other.semiring {
            return Err(TropError::SemiringMismatch);
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for TropicalMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Tropical product `C_ij = ⊕_l (A_il + B_lj)`.
pub fn trop_matmul<T: Scalar>(a: &TropicalMatrix<T>, b: &TropicalMatrix<T>) -> Result<TropicalMatrix<T>, TropError> {
    a.same_shape(b)?;
    let s = a.semiring;
    Ok(TropicalMatrix::from_fn(a.n, s, |i, j| {
        (1..a.n).fold(a.get(i, 0).clone() + b.get(0, j).clone(), |acc, l| {
            s.add(&acc, &(a.get(i, l).clone() + b.get(l, j).clone()))
        })
    }))
}

/// Entrywise tropical sum.
pub fn trop_add<T: Scalar>(a: &TropicalMatrix<T>, b: &TropicalMatrix<T>) -> Result<TropicalMatrix<T>, TropError> {
    a.same_shape(b)?;
    Ok(TropicalMatrix::from_fn(a.n, a.semiring, |i, j| a.semiring.add(a.get(i, j), b.get(i, j))))
}

/// Log-domain Hadamard power: every entry multiplied by `k`.
pub fn scale_matrix<T: Scalar>(a: &TropicalMatrix<T>, k: &T) -> Result<TropicalMatrix<T>, TropError> {
    if !k.is_positive() {
        return Err(TropError::NonPositiveScale);
    }
    Ok(a.map(|x| x.clone() * k.clone()))
}

/// Kleene star `I ⊕ A ⊕ A² ⊕ … ⊕ Aⁿ` under the matrix's own semiring.
///
/// `S_ij` is the best weight of a path from `i` to `j` (the empty path counts as 0 on the
/// diagonal). Fails when some cycle improves on 0, i.e. the star does not converge.
pub fn kleene_star<T: Scalar>(a: &TropicalMatrix<T>) -> Result<TropicalMatrix<T>, TropError> {
    let s = a.semiring;
    let n = a.n;
    let zero = T::zero();
    let mut m = a.clone();
    for i in 0..n {
        let d = s.add(m.get(i, i), &zero);
        m.entries[i * n + i] = d;
    }
    for l in 0..n {
        for i in 0..n {
            let il = m.get(i, l).clone();
            for j in 0..n {
                let cand = il.clone() + m.get(l, j).clone();
                if s.improves(&cand, m.get(i, j)) {
                    m.entries[i * n + j] = cand;
                }
            }
        }
    }
    match (0..n).find(|&i| s.improves(m.get(i, i), &zero)) {
        Some(node) => Err(TropError::StarDiverges { node }),
        None => Ok(m),
    }
}

/// Point of tropical projective space, stored with first coordinate 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint<T> {
    coords: Vec<T>,
}

/// Representative `(0, v₂−v₁, …, vₙ−v₁)` of the class of `v`.
///
/// # Panics
/// If `v` is empty.
pub fn normalize_projective<T: Scalar>(v: &[T]) -> ProjectivePoint<T> {
    assert!(!v.is_empty(), "cannot normalize an empty vector");
    let first = v[0].clone();
    let mut coords: Vec<T> = v.iter().map(|x| x.clone() - first.clone()).collect();
    coords[0] = T::zero();
    ProjectivePoint { coords }
}

impl<T: Scalar> ProjectivePoint<T> {
    pub fn new(v: &[T]) -> Self {
        normalize_projective(v)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Drops the leading zero: coordinates in ℝ^{n−1}.
    pub fn project_to_plane(&self) -> Vec<T> {
        self.coords[1..].to_vec()
    }

    pub fn to_f64(&self) -> ProjectivePoint<f64> {
        ProjectivePoint { coords: self.coords.iter().map(Scalar::to_f64_lossy).collect() }
    }

    /// Multiplies every coordinate by `k` (still normalized).
    pub fn scaled(&self, k: &T) -> Self {
        ProjectivePoint { coords: self.coords.iter().map(|x| x.clone() * k.clone()).collect() }
    }

    pub fn negated(&self) -> Self {
        normalize_projective(&self.coords.iter().map(|x| -x.clone()).collect::<Vec<_>>())
    }

    /// ∞-norm of the coordinate difference of the two representatives.
    pub fn inf_distance(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(T::zero(), |m, d| max_ref(&m, &d).clone())
    }
}

impl<T: Scalar> fmt::Display for ProjectivePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

fn check_gens<T: Scalar>(x: &ProjectivePoint<T>, gens: &[ProjectivePoint<T>]) -> Result<(), TropError> {
    if gens.is_empty() {
        return Err(TropError::EmptyGenerators);
    }
    if let Some(g) = gens.iter().find(|g| g.dim() != x.dim()) {
        return Err(TropError::DimensionMismatch { left: x.dim(), right: g.dim() });
    }
    Ok(())
}

/// Largest max-plus combination of `gens` dominated by `x`, normalized.
pub fn trop_project_onto_span<T: Scalar>(
    x: &ProjectivePoint<T>,
    gens: &[ProjectivePoint<T>],
) -> Result<ProjectivePoint<T>, TropError> {
    check_gens(x, gens)?;
    let weights: Vec<T> = gens
        .iter()
        .map(|g| {
            let mut it = x.coords.iter().zip(&g.coords).map(|(a, b)| a.clone() - b.clone());
            let first = it.next().expect("nonempty point");
            it.fold(first, |m, d| min_ref(&m, &d).clone())
        })
        .collect();
    let y: Vec<T> = (0..x.dim())
        .map(|i| {
            let mut it = weights.iter().zip(gens).map(|(w, g)| w.clone() + g.coords[i].clone());
            let first = it.next().expect("nonempty generators");
            it.fold(first, |m, v| max_ref(&m, &v).clone())
        })
        .collect();
    Ok(normalize_projective(&y))
}

/// Exact membership: `x` is fixed by the projection.
pub fn in_span<T: Scalar>(x: &ProjectivePoint<T>, gens: &[ProjectivePoint<T>]) -> Result<bool, TropError> {
    Ok(trop_project_onto_span(x, gens)? == *x)
}

/// ∞-norm distance from `x` to its projection onto the span.
pub fn span_distance<T: Scalar>(x: &ProjectivePoint<T>, gens: &[ProjectivePoint<T>]) -> Result<T, TropError> {
    Ok(x.inf_distance(&trop_project_onto_span(x, gens)?))
}

/// Membership up to an ∞-norm tolerance, for floating-point data.
pub fn in_span_tol(x: &ProjectivePoint<f64>, gens: &[ProjectivePoint<f64>], tol: f64) -> Result<bool, TropError> {
    Ok(span_distance(x, gens)? <= tol)
}

#[derive(Debug, Deserialize)]
struct MatrixLiteral {
    n: Option<usize>,
    entries: Vec<Vec<Value>>,
    #[serde(default)]
    semiring: Semiring,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Literal(MatrixLiteral),
    Bare(Vec<Vec<Value>>),
}

/// Parses the matrix literal `{"n", "entries": [[decimal string, …], …], "semiring"}`.
///
/// Entries may also be JSON numbers; a bare nested array is read as a max-plus matrix.
pub fn parse_matrix<T: Scalar>(text: &str) -> Result<TropicalMatrix<T>, TropError> {
    let input: MatrixInput = serde_json::from_str(text).map_err(|e| TropError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let lit = match input {
        MatrixInput::Literal(lit) => lit,
        MatrixInput::Bare(entries) => MatrixLiteral { n: None, entries, semiring: Semiring::MaxPlus },
    };
    if let Some(declared) = lit.n {
        if declared != lit.entries.len() {
            return Err(TropError::SizeField { declared, found: lit.entries.len() });
        }
    }
    let mut rows = Vec::with_capacity(lit.entries.len());
    for (i, row) in lit.entries.iter().enumerate() {
        let mut parsed = Vec::with_capacity(row.len());
        for (j, v) in row.iter().enumerate() {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Number(x) => x.to_string(),
                other => other.to_string(),
            };
            let x = T::parse_decimal(&text).ok_or(TropError::BadEntry { row: i, col: j, text })?;
            parsed.push(x);
        }
        rows.push(parsed);
    }
    TropicalMatrix::new(rows, lit.semiring)
}

/// Serializes to the matrix literal format with exact string entries.
pub fn matrix_to_json<T: Scalar>(a: &TropicalMatrix<T>) -> Value {
    serde_json::json!({
        "n": a.n(),
        "entries": entries_to_json(a),
        "semiring": a.semiring(),
    })
}

pub fn entries_to_json<T: Scalar>(a: &TropicalMatrix<T>) -> Value {
    Value::Array(
        (0..a.n())
            .map(|i| Value::Array(a.row(i).iter().map(|x| Value::String(x.to_string())).collect()))
            .collect(),
    )
}

pub fn point_to_json<T: Scalar>(p: &ProjectivePoint<T>) -> Value {
    Value::Array(p.coords().iter().map(|x| Value::String(x.to_string())).collect())
}
