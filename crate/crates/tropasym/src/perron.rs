//! Perron eigenpair of `exp(kA)` computed in log coordinates, the normalized
//! trajectory `(1/k) log v(k)` and its limit as `k → ∞`.
//!
//! Plain power iteration is useless here: when several critical classes exist the
//! spectral gap of `exp(kA)` closes like `exp(-ck)`, and in double precision the
//! iteration stalls at a spurious fixed point long before converging. The engine is
//! instead a shifted inverse (Noda) iteration. Each step solves `(rI − M) w = x` by a
//! subtraction-free Gaussian elimination in log space, with the diagonal formed from
//! row slacks rather than by cancellation, so tiny couplings keep full relative
//! precision. Successive `k` are warm-started from the previous log vector.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tropical::normalize_projective;
use crate::{FloatMatrix, FloatPoint};

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
pub const DEFAULT_K0: f64 = 4.0;
pub const DEFAULT_DOUBLINGS: u32 = 12;

/// Standalone solves at large `k` climb a doubling ladder starting at or below this.
const LADDER_START: f64 = 4.0;
/// Largest exponent whose `exp` is a finite double.
const EXP_LIMIT: f64 = 709.0;
const ORACLE_MAX_SQUARINGS: usize = 80;
const ORACLE_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerronError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { residual: f64, iterations: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteInput { row: usize, col: usize },
    #[error("k must be positive and finite, got {0}")]
    BadK(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTol(f64),
    #[error("exp(kA) is not representable at k = {k}")]
    Overflow { k: f64 },
    #[error("float oracle unreliable at k = {k}: {reason}")]
    Unreliable { k: f64, reason: String },
    #[error("schedule must be nonempty, positive and strictly increasing")]
    BadSchedule,
    #[error("need at least {needed} usable samples, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("no pair of samples at k and 2k")]
    NoDoublingPair,
    #[error("degenerate least-squares design (all k equal)")]
    DegenerateFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronConfig {
    /// Target for the relative Collatz–Wielandt slack. The solver never asks for less
    /// than a small multiple of the rounding level of the rescaled matrix.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PerronConfig {
    fn default() -> Self {
        PerronConfig { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    /// Log of the Perron root of `exp(kA)`.
    pub log_rho: f64,
    /// Log of the Perron vector, first coordinate 0.
    pub log_vector: FloatPoint,
    /// `max_i (r − (Mx)_i/x_i) / (r − M_ii)` at the returned vector, with `r` the
    /// returned root. Bounds the log fixed-point residual to first order.
    pub residual: f64,
    pub iterations: usize,
}

/// `log(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// `log(e^a − e^b)`, or `-inf` when `b ≥ a`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// `log Σ e^{x_i}` with max shift; `-inf` for an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

fn validate(a: &FloatMatrix, k: f64, cfg: &PerronConfig) -> Result<(), PerronError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(PerronError::BadK(k));
    }
    if !(cfg.tol > 0.0) {
        return Err(PerronError::BadTol(cfg.tol));
    }
    for i in 0..a.n() {
        for j in 0..a.n() {
            if !a.get(i, j).is_finite() || !(k * a.get(i, j)).is_finite() {
                return Err(PerronError::NonFiniteInput { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Perron eigenpair of `exp(kA)` without ever forming `exp(kA)`.
///
/// Large `k` are reached through a doubling ladder from `k ≤ 4`, each rung
/// warm-started from the previous one; `iterations` counts all rungs.
pub fn log_perron_eigenpair(a: &FloatMatrix, k: f64, cfg: &PerronConfig) -> Result<Eigenpair, PerronError> {
    validate(a, k, cfg)?;
    let mut ladder = vec![k];
    while *ladder.last().unwrap() > LADDER_START {
        let next = ladder.last().unwrap() / 2.0;
        ladder.push(next);
    }
    ladder.reverse();
    let mut y = vec![0.0; a.n()];
    let mut total = 0;
    let mut last = None;
    for (idx, &kk) in ladder.iter().enumerate() {
        if idx > 0 {
            y.iter_mut().for_each(|v| *v *= 2.0);
        }
        let mut pair = noda(a, kk, y, cfg)?;
        total += pair.iterations;
        pair.iterations = total;
        y = pair.log_vector.coords().to_vec();
        last = Some(pair);
    }
    Ok(last.expect("ladder is nonempty"))
}

/// As [`log_perron_eigenpair`] but started from the log vector `start` at this `k`.
pub fn log_perron_eigenpair_from(
    a: &FloatMatrix,
    k: f64,
    start: &[f64],
    cfg: &PerronConfig,
) -> Result<Eigenpair, PerronError> {
    validate(a, k, cfg)?;
    assert_eq!(start.len(), a.n(), "start vector dimension");
    noda(a, k, start.to_vec(), cfg)
}

fn noda(a: &FloatMatrix, k: f64, mut y: Vec<f64>, cfg: &PerronConfig) -> Result<Eigenpair, PerronError> {
    const NEG: f64 = f64::NEG_INFINITY;
    let n = a.n();
    let l: Vec<f64> = (0..n * n).map(|ix| k * a.get(ix / n, ix % n)).collect();
    if n == 1 {
        return Ok(Eigenpair { log_rho: l[0], log_vector: normalize_projective(&[0.0]), residual: 0.0, iterations: 0 });
    }
    let diag = |i: usize| l[i * n + i];
    let dmax = (0..n).map(diag).fold(NEG, f64::max);
    // e_i = log(e^dmax − e^{L_ii}); -inf marks the nodes with the largest diagonal.
    let gap: Vec<f64> = (0..n)
        .map(|i| if diag(i) == dmax { NEG } else { dmax + (-(diag(i) - dmax).exp_m1()).ln() })
        .collect();
    let row0_scale = l[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut b = vec![NEG; n * n];
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iter {
        // Rescaled off-diagonal couplings M_ij x_j / x_i in log form.
        let mut bmax = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] = if i == j { NEG } else { l[i * n + j] + y[j] - y[i] };
                if i != j {
                    bmax = bmax.max(b[i * n + j].abs());
                }
            }
        }
        let off: Vec<f64> = (0..n).map(|i| logsumexp(&b[i * n..(i + 1) * n])).collect();
        // r = e^dmax + e^t is the Collatz–Wielandt bound max_i (Mx)_i / x_i, with the
        // diagonals factored out. Rows below the maximal diagonal may only raise t by
        // more than their own rounding noise.
        let t0 = (0..n).filter(|&i| gap[i] == NEG).map(|i| off[i]).fold(NEG, f64::max);
        let noise_scale = (16.0 * f64::EPSILON * (bmax + row0_scale + 1.0)).ln();
        let mut t = t0;
        for i in 0..n {
            if gap[i] != NEG && off[i] > gap[i] {
                let c = log_sub_exp(off[i], gap[i]);
                let noise = noise_scale + off[i].max(gap[i]);
                if c > log_add_exp(t0, noise) {
                    t = t.max(c);
                }
            }
        }
        let delta: Vec<f64> = gap.iter().map(|&e| log_add_exp(t, e)).collect();
        let slack: Vec<f64> = (0..n).map(|i| log_sub_exp(delta[i], off[i])).collect();
        let worst = (0..n).map(|i| slack[i] - delta[i]).fold(NEG, f64::max);
        residual = if worst == NEG { 0.0 } else { worst.exp() };
        let log_r = log_add_exp(dmax, t);
        let floor = 64.0 * f64::EPSILON * (bmax + 1.0);
        if residual <= cfg.tol.max(floor) {
            return Ok(Eigenpair { log_rho: log_r, log_vector: normalize_projective(&y), residual, iterations: it });
        }
        if it == cfg.max_iter {
            break;
        }
        let Some(u) = gth_solve(&b, &slack, n) else {
            // All slacks vanish: x is an exact eigenvector in floating point.
            return Ok(Eigenpair { log_rho: log_r, log_vector: normalize_projective(&y), residual: 0.0, iterations: it });
        };
        for i in 0..n {
            y[i] += u[i];
        }
        let y0 = y[0];
        y.iter_mut().for_each(|v| *v -= y0);
    }
    Err(PerronError::NotConverged { residual, iterations: cfg.max_iter })
}

/// Log of the solution `w` of `(D − B) w = 1`, where `D_ii = s_i + Σ_j B_ij`.
///
/// All inputs are logs of nonnegative numbers. Nodes are eliminated from the last one
/// down; every pivot is assembled from slacks and couplings, never by subtraction.
/// Returns `None` when every slack is zero (the system is singular).
fn gth_solve(b: &[f64], s: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut bw = b.to_vec();
    let mut sw = s.to_vec();
    let mut rhs = vec![0.0; n];
    let mut d = vec![f64::NEG_INFINITY; n];
    for p in (1..n).rev() {
        d[p] = log_add_exp(sw[p], logsumexp(&bw[p * n..p * n + p]));
        for i in 0..p {
            let f = bw[i * n + p] - d[p];
            for j in 0..p {
                if j != i {
                    bw[i * n + j] = log_add_exp(bw[i * n + j], f + bw[p * n + j]);
                }
            }
            sw[i] = log_add_exp(sw[i], f + sw[p]);
            rhs[i] = log_add_exp(rhs[i], f + rhs[p]);
        }
    }
    d[0] = sw[0];
    if d[0] == f64::NEG_INFINITY {
        return None;
    }
    let mut u = vec![0.0; n];
    u[0] = rhs[0] - d[0];
    for p in 1..n {
        let acc = (0..p).map(|j| bw[p * n + j] + u[j]).collect::<Vec<_>>();
        u[p] = log_add_exp(rhs[p], logsumexp(&acc)) - d[p];
    }
    Some(u)
}

/// Perron pair of the explicitly exponentiated matrix by linear-domain power
/// iteration, accelerated by repeated squaring: `M^(2^j) 1` for `j = 1, 2, …`.
/// Every operation is a sum of positive terms, so components keep their relative
/// accuracy until `exp(kA)` under- or overflows. Exists to cross-check the
/// log-domain engine at small `k`.
///
/// Returns `(ρ, x)` with `x_1 = 1`.
pub fn perron_float_oracle(a: &FloatMatrix, k: f64) -> Result<(f64, Vec<f64>), PerronError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(PerronError::BadK(k));
    }
    let n = a.n();
    let amax = (0..n * n).map(|ix| a.get(ix / n, ix % n).abs()).fold(0.0, f64::max);
    if !(k * amax <= EXP_LIMIT) {
        return Err(PerronError::Overflow { k });
    }
    let unreliable = |reason: &str| PerronError::Unreliable { k, reason: reason.to_string() };
    let m: Vec<f64> = (0..n * n).map(|ix| (k * a.get(ix / n, ix % n)).exp()).collect();
    // Shift by a lower bound on ρ from loops and 2-cycles: same eigenvectors, and
    // eigenvalues near −ρ (periodic critical cycles) move away from the Perron root.
    let shift = (0..n * n)
        .map(|ix| (m[ix] * m[(ix % n) * n + ix / n]).sqrt())
        .fold(0.0, f64::max);
    let mut p = m.clone();
    for i in 0..n {
        p[i * n + i] += shift;
    }
    // Collatz–Wielandt: ρ lies between the smallest and largest ratio (Mx)_i / x_i.
    let bounds = |x: &[f64]| {
        let ratios = (0..n).map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum::<f64>() / x[i]);
        ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)))
    };
    for _ in 0..ORACLE_MAX_SQUARINGS {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let pil = p[i * n + l];
                for j in 0..n {
                    q[i * n + j] += pil * p[l * n + j];
                }
            }
        }
        let qmax = q.iter().copied().fold(0.0, f64::max);
        p = q.iter().map(|v| v / qmax).collect();
        let row: Vec<f64> = (0..n).map(|i| p[i * n..(i + 1) * n].iter().sum::<f64>()).collect();
        let x: Vec<f64> = row.iter().map(|v| v / row[0]).collect();
        if !x.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(unreliable("eigenvector component underflowed"));
        }
        let (lo, hi) = bounds(&x);
        if hi - lo <= ORACLE_RTOL * hi {
            return Ok((hi, x));
        }
    }
    Err(unreliable("Collatz-Wielandt bounds did not pinch"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronSample {
    pub k: f64,
    pub log_rho_over_k: f64,
    /// `(1/k) log v(k)`, first coordinate 0.
    pub point: FloatPoint,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub k: f64,
    pub error: PerronError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronTrajectory {
    /// Successful samples, `k` strictly increasing.
    pub samples: Vec<PerronSample>,
    pub failures: Vec<SampleFailure>,
    /// SHA-256 of the matrix size and entry bits, hex.
    pub matrix_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinfEstimate {
    pub point: FloatPoint,
    pub error_bound: f64,
    pub k_max_used: f64,
}

impl PinfEstimate {
    pub fn to_json(&self) -> Value {
        json!({ "point": self.point.coords(), "error_bound": self.error_bound, "k_max_used": self.k_max_used })
    }
}

/// `k0 · 2^i` for `i = 0..=doublings`.
pub fn doubling_schedule(k0: f64, doublings: u32) -> Vec<f64> {
    (0..=doublings).map(|i| k0 * 2f64.powi(i as i32)).collect()
}

pub fn matrix_hash(a: &FloatMatrix) -> String {
    let mut h = Sha256::new();
    h.update((a.n() as u64).to_le_bytes());
    for i in 0..a.n() {
        for x in a.row(i) {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Samples `(1/k) log` of the Perron pair along `schedule`.
///
/// A failing sample is recorded in `failures` and the trajectory continues, warm
/// started from the last good sample.
pub fn normalized_trajectory(
    a: &FloatMatrix,
    schedule: &[f64],
    cfg: &PerronConfig,
) -> Result<PerronTrajectory, PerronError> {
    if schedule.is_empty()
        || schedule.iter().any(|k| !(k.is_finite() && *k > 0.0))
        || schedule.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(PerronError::BadSchedule);
    }
    validate(a, schedule[schedule.len() - 1], cfg)?;
    let mut samples: Vec<PerronSample> = Vec::new();
    let mut failures = Vec::new();
    let mut prev: Option<(f64, Vec<f64>)> = None;
    for &k in schedule {
        let result = match &prev {
            None => log_perron_eigenpair(a, k, cfg),
            Some((kp, y)) => {
                let start: Vec<f64> = y.iter().map(|v| v * (k / kp)).collect();
                log_perron_eigenpair_from(a, k, &start, cfg)
            }
        };
        match result {
            Ok(pair) => {
                let scaled: Vec<f64> = pair.log_vector.coords().iter().map(|v| v / k).collect();
                prev = Some((k, pair.log_vector.coords().to_vec()));
                samples.push(PerronSample {
                    k,
                    log_rho_over_k: pair.log_rho / k,
                    point: normalize_projective(&scaled),
                    residual: pair.residual,
                    iterations: pair.iterations,
                });
            }
            Err(error) => failures.push(SampleFailure { k, error }),
        }
    }
    Ok(PerronTrajectory { samples, failures, matrix_hash: matrix_hash(a) })
}

/// Richardson step `2P(2k) − P(k)` on the last available doubling pair.
pub fn estimate_p_infinity(traj: &PerronTrajectory) -> Result<PinfEstimate, PerronError> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(PerronError::TooFewSamples { needed: 2, have: s.len() });
    }
    for j in (1..s.len()).rev() {
        let target = s[j].k / 2.0;
        if let Some(i) = (0..j).rev().find(|&i| (s[i].k - target).abs() <= 1e-12 * target) {
            let (hi, lo) = (s[j].point.coords(), s[i].point.coords());
            let extrapolated: Vec<f64> = hi.iter().zip(lo).map(|(h, l)| 2.0 * h - l).collect();
            let error_bound = hi.iter().zip(lo).map(|(h, l)| (h - l).abs()).fold(0.0, f64::max);
            return Ok(PinfEstimate {
                point: normalize_projective(&extrapolated),
                error_bound,
                k_max_used: s[j].k,
            });
        }
    }
    Err(PerronError::NoDoublingPair)
}

/// Least-squares fit of each coordinate to `c + d/k` over the tail half of the
/// samples. Returns exponents `v = −c` and log-weights `d`.
pub fn first_order_fit(traj: &PerronTrajectory) -> Result<(FloatPoint, Vec<f64>), PerronError> {
    let s = &traj.samples;
    if s.len() < 3 {
        return Err(PerronError::TooFewSamples { needed: 3, have: s.len() });
    }
    let tail = &s[s.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|p| 1.0 / p.k).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(PerronError::DegenerateFit);
    }
    let n = tail[0].point.dim();
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let ys: Vec<f64> = tail.iter().map(|p| p.point.coords()[i]).collect();
        let ybar = ys.iter().sum::<f64>() / m;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
        let slope = sxy / sxx;
        c.push(ybar - slope * xbar);
        d.push(slope);
    }
    let v: Vec<f64> = c.iter().map(|x| -x).collect();
    Ok((normalize_projective(&v), d))
}

/// Trajectory as CSV: `k,lambda_k,coord_1..coord_n,residual,iterations`, plus an
/// optional trailing column. Failed samples keep `k` and leave numeric fields empty
/// apart from the last residual and iteration count when known.
pub fn trajectory_csv(
    traj: &PerronTrajectory,
    n: usize,
    extra: Option<(&str, &dyn Fn(&PerronSample) -> f64)>,
) -> String {
    let mut out = String::from("k,lambda_k");
    for i in 1..=n {
        out.push_str(&format!(",coord_{i}"));
    }
    out.push_str(",residual,iterations");
    if let Some((name, _)) = extra {
        out.push_str(&format!(",{name}"));
    }
    out.push('\n');
    let mut rows: Vec<(f64, String)> = traj
        .samples
        .iter()
        .map(|s| {
            let mut row = format!("{},{}", s.k, s.log_rho_over_k);
            for x in s.point.coords() {
                row.push_str(&format!(",{x}"));
            }
            row.push_str(&format!(",{},{}", s.residual, s.iterations));
            if let Some((_, f)) = extra {
                row.push_str(&format!(",{}", f(s)));
            }
            (s.k, row)
        })
        .collect();
    for fail in &traj.failures {
        let (res, its) = match fail.error {
            PerronError::NotConverged { residual, iterations } => (residual.to_string(), iterations.to_string()),
            _ => (String::new(), String::new()),
        };
        let mut row = format!("{},", fail.k);
        row.push_str(&",".repeat(n));
        row.push_str(&format!(",{res},{its}"));
        if extra.is_some() {
            row.push(',');
        }
        rows.push((fail.k, row));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, row) in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Semiring;

    fn fm(rows: &[&[f64]]) -> FloatMatrix {
        FloatMatrix::new(rows.iter().map(|r| r.to_vec()).collect(), Semiring::MaxPlus).unwrap()
    }

    fn fig2() -> FloatMatrix {
        fm(&[&[0., -2.5, -0.5], &[-1., 0., -1.5], &[-1., -1., 0.]])
    }

    #[test]
    fn log_helpers() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_sub_exp(2f64.ln(), 0.0)).abs() < 1e-15);
        assert_eq!(log_sub_exp(1.0, 1.0), f64::NEG_INFINITY);
        assert!((logsumexp(&[1000.0, 1000.0]) - 1000.0 - 2f64.ln()).abs() < 1e-12);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn one_by_one() {
        let p = log_perron_eigenpair(&fm(&[&[-1.5]]), 3.0, &PerronConfig::default()).unwrap();
        assert_eq!(p.log_rho, -4.5);
        assert_eq!(p.log_vector.coords(), &[0.0]);
        let (rho, x) = perron_float_oracle(&fm(&[&[-1.5]]), 3.0).unwrap();
        assert!((rho - (-4.5f64).exp()).abs() < 1e-15);
        assert_eq!(x, vec![1.0]);
    }

    #[test]
    fn symmetric_two_by_two() {
        let a = fm(&[&[0.5, -1.0], &[-1.0, 0.5]]);
        for k in [1.0, 7.0, 300.0, 16384.0] {
            let p = log_perron_eigenpair(&a, k, &PerronConfig::default()).unwrap();
            assert_eq!(p.log_vector.coords(), &[0.0, 0.0]);
            let expected = log_add_exp(0.5 * k, -k);
            assert!((p.log_rho - expected).abs() <= 1e-12 * expected.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn agrees_with_float_oracle_on_fig2() {
        let a = fig2();
        for k in [1.0, 2.0, 4.0, 8.0, 13.0, 20.0] {
            let p = log_perron_eigenpair(&a, k, &PerronConfig::default()).unwrap();
            let (rho, x) = perron_float_oracle(&a, k).unwrap();
            let tol = if k == 4.0 { 1e-10 } else { 1e-8 };
            for (y, xo) in p.log_vector.coords().iter().zip(&x) {
                assert!((y / k - xo.ln() / k).abs() < tol, "k={k}");
            }
            assert!((p.log_rho - rho.ln()).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn oracle_overflows_where_log_domain_works() {
        let a = fig2();
        assert_eq!(perron_float_oracle(&a, 10000.0), Err(PerronError::Overflow { k: 10000.0 }));
        let p = log_perron_eigenpair(&a, 10000.0, &PerronConfig::default()).unwrap();
        assert!(p.log_vector.coords().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn fig2_trajectory_limit() {
        let traj = normalized_trajectory(&fig2(), &doubling_schedule(4.0, 10), &PerronConfig::default()).unwrap();
        assert!(traj.failures.is_empty());
        let last = traj.samples.last().unwrap();
        let target = normalize_projective(&[0.0, -0.25, -0.25]);
        assert!(last.point.inf_distance(&target) < 1e-2);
        for w in traj.samples.windows(2) {
            assert!(w[1].log_rho_over_k <= w[0].log_rho_over_k + 1e-12);
        }
        let est = estimate_p_infinity(&traj).unwrap();
        assert!(est.point.inf_distance(&target) < 1e-2);
        let (v, _) = first_order_fit(&traj).unwrap();
        assert!(v.inf_distance(&est.point.negated()) < 5e-2);
    }

    #[test]
    fn richardson_and_fit_on_symmetric() {
        let a = fm(&[&[0.0, -2.0], &[-2.0, 0.0]]);
        let traj = normalized_trajectory(&a, &doubling_schedule(4.0, 5), &PerronConfig::default()).unwrap();
        let est = estimate_p_infinity(&traj).unwrap();
        assert_eq!(est.point.coords(), &[0.0, 0.0]);
        assert_eq!(est.error_bound, 0.0);
        let (v, logw) = first_order_fit(&traj).unwrap();
        assert_eq!(v.coords(), &[0.0, 0.0]);
        assert_eq!(logw, vec![0.0, 0.0]);
        let one = normalized_trajectory(&fm(&[&[2.0]]), &doubling_schedule(4.0, 3), &PerronConfig::default()).unwrap();
        assert_eq!(first_order_fit(&one).unwrap().0.coords(), &[0.0]);
    }

    #[test]
    fn input_validation() {
        let cfg = PerronConfig::default();
        assert_eq!(log_perron_eigenpair(&fig2(), 0.0, &cfg), Err(PerronError::BadK(0.0)));
        assert!(matches!(
            log_perron_eigenpair(&fig2(), 1.0, &PerronConfig { tol: 0.0, max_iter: 10 }),
            Err(PerronError::BadTol(_))
        ));
        assert_eq!(normalized_trajectory(&fig2(), &[2.0, 2.0], &cfg), Err(PerronError::BadSchedule));
        let t = PerronTrajectory { samples: vec![], failures: vec![], matrix_hash: String::new() };
        assert!(matches!(estimate_p_infinity(&t), Err(PerronError::TooFewSamples { .. })));
        let t = normalized_trajectory(&fig2(), &[1.0, 3.0], &cfg).unwrap();
        assert_eq!(estimate_p_infinity(&t), Err(PerronError::NoDoublingPair));
    }

    #[test]
    fn iteration_budget_is_reported() {
        let a = fm(&[&[0., -1., -3.], &[-2., 0., -1.], &[-1., -2., 0.]]);
        let cfg = PerronConfig { tol: 1e-13, max_iter: 0 };
        match log_perron_eigenpair(&a, 2.0, &cfg) {
            Err(PerronError::NotConverged { iterations: 0, residual }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let traj = normalized_trajectory(&fig2(), &[4.0, 8.0], &PerronConfig::default()).unwrap();
        let csv = trajectory_csv(&traj, 3, None);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,lambda_k,coord_1,coord_2,coord_3,residual,iterations");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("4,"));
        assert_eq!(lines[2].split(',').count(), 7);
    }

    #[test]
    fn hash_is_content_based() {
        assert_eq!(matrix_hash(&fig2()), matrix_hash(&fig2()));
        assert_ne!(matrix_hash(&fig2()), matrix_hash(&fig2().transpose()));
        assert_eq!(matrix_hash(&fig2()).len(), 64);
    }
}
