//! Randomized checks of two conjectured links between the tropical eigenspace and
//! the limit `P∞` of the normalized Perron vector:
//!
//! * translation chain: if the generators are `g + α(0,1,…,1)` for `0 ≤ α ≤ β`, then
//!   `P∞` is the generator with the largest shift;
//! * eigenspace determines limit: matrices with the same eigenspace share `P∞`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::perron::{estimate_p_infinity, normalized_trajectory, PerronConfig, PerronError, PinfEstimate};
use crate::scalar::{ratio, Rational};
use crate::spectral::{same_generator_set, spectral_data, spans_equal};
use crate::tropical::{entries_to_json, point_to_json, span_distance, Semiring, TropError};
use crate::{FloatPoint, RatMatrix, RatPoint};

#[derive(Debug, Error)]
pub enum ConjectureError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error(transparent)]
    Perron(#[from] PerronError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed dataset line {line} in {path}: {message}")]
    Dataset { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationChain {
    pub base: RatPoint,
    pub beta: Rational,
    pub predicted: RatPoint,
}

/// Detects generators that differ pairwise by `(0, c, …, c)`.
pub fn translation_chain(gens: &[RatPoint]) -> Option<TranslationChain> {
    let first = gens.first()?;
    let n = first.dim();
    let mut shifts = Vec::with_capacity(gens.len());
    for g in gens {
        if g.dim() != n {
            return None;
        }
        let d: Vec<Rational> = g.coords().iter().zip(first.coords()).map(|(a, b)| a - b).collect();
        if n > 1 && d[2..].iter().any(|x| *x != d[1]) {
            return None;
        }
        shifts.push(if n > 1 { d[1].clone() } else { Rational::zero() });
    }
    let lo = (0..gens.len()).min_by(|&i, &j| shifts[i].cmp(&shifts[j])).expect("nonempty");
    let hi = (0..gens.len()).max_by(|&i, &j| shifts[i].cmp(&shifts[j])).expect("nonempty");
    Some(TranslationChain {
        base: gens[lo].clone(),
        beta: &shifts[hi] - &shifts[lo],
        predicted: gens[hi].clone(),
    })
}

/// Outcome of one conjecture check, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureVerdict {
    pub holds: bool,
    pub matrices: Vec<RatMatrix>,
    pub pinf: Vec<PinfEstimate>,
    pub predicted: Option<RatPoint>,
    /// Largest ∞-norm deviation that the verdict compared against the tolerance.
    pub deviation: f64,
    /// Every estimate lies within `10·error_bound + 1e-3` of the eigenspace.
    pub membership_ok: bool,
    pub tolerance_used: f64,
    pub seed: Option<u64>,
}

impl ConjectureVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "deviation": self.deviation,
            "membership_ok": self.membership_ok,
            "tolerance_used": self.tolerance_used,
            "seed": self.seed,
            "predicted": self.predicted.as_ref().map(point_to_json),
            "matrices": self.matrices.iter().map(entries_to_json).collect::<Vec<_>>(),
            "pinf": self.pinf.iter().map(PinfEstimate::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `P∞` estimate of `a` plus the eigenspace-membership safety check.
pub fn measure_pinf(
    a: &RatMatrix,
    schedule: &[f64],
    cfg: &PerronConfig,
) -> Result<(PinfEstimate, bool), ConjectureError> {
    let traj = normalized_trajectory(&a.to_f64(), schedule, cfg)?;
    let est = estimate_p_infinity(&traj)?;
    let gens: Vec<FloatPoint> = spectral_data(a)?.generators.iter().map(RatPoint::to_f64).collect();
    let member = span_distance(&est.point, &gens)? <= 10.0 * est.error_bound + 1e-3;
    Ok((est, member))
}

/// Compares `P∞(a)` with the top of the translation chain of its generators.
pub fn conjecture1_test(
    a: &RatMatrix,
    tol: f64,
    schedule: &[f64],
    cfg: &PerronConfig,
) -> Result<ConjectureVerdict, ConjectureError> {
    let gens = spectral_data(a)?.generators;
    let chain = translation_chain(&gens)
        .ok_or_else(|| ConjectureError::Precondition("eigenspace generators are not a translation chain".into()))?;
    let (est, membership_ok) = measure_pinf(a, schedule, cfg)?;
    let deviation = est.point.inf_distance(&chain.predicted.to_f64());
    Ok(ConjectureVerdict {
        holds: deviation <= tol,
        matrices: vec![a.clone()],
        pinf: vec![est],
        predicted: Some(chain.predicted),
        deviation,
        membership_ok,
        tolerance_used: tol,
        seed: None,
    })
}

/// Pairwise agreement of `P∞` over `a` and matrices sharing its eigenspace.
pub fn conjecture2_test(
    a: &RatMatrix,
    perturbed: &[RatMatrix],
    tol: f64,
    schedule: &[f64],
    cfg: &PerronConfig,
) -> Result<ConjectureVerdict, ConjectureError> {
    let gens = spectral_data(a)?.generators;
    for (idx, b) in perturbed.iter().enumerate() {
        if b.n() != a.n() || !spans_equal(&gens, &spectral_data(b)?.generators)? {
            return Err(ConjectureError::Precondition(format!("matrix {idx} does not share the eigenspace")));
        }
    }
    let mut matrices = vec![a.clone()];
    matrices.extend(perturbed.iter().cloned());
    let mut pinf = Vec::with_capacity(matrices.len());
    let mut membership_ok = true;
    for m in &matrices {
        let (est, member) = measure_pinf(m, schedule, cfg)?;
        membership_ok &= member;
        pinf.push(est);
    }
    let mut deviation = 0.0f64;
    for i in 0..pinf.len() {
        for j in i + 1..pinf.len() {
            deviation = deviation.max(pinf[i].point.inf_distance(&pinf[j].point));
        }
    }
    Ok(ConjectureVerdict {
        holds: deviation <= tol,
        matrices,
        pinf,
        predicted: None,
        deviation,
        membership_ok,
        tolerance_used: tol,
        seed: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbations {
    pub matrices: Vec<RatMatrix>,
    /// Set when the attempt budget ran out before `count` matrices were found.
    pub notice: Option<String>,
}

const ATTEMPTS_PER_PERTURBATION: usize = 200;

/// Single-entry changes by `magnitude·j/4`, `j ∈ {±1, …, ±4}`, kept when the eigenvalue
/// and the generator set stay exactly the same.
pub fn eigenspace_preserving_perturbations(
    a: &RatMatrix,
    count: usize,
    magnitude: &Rational,
    seed: u64,
) -> Result<Perturbations, ConjectureError> {
    if count == 0 || !magnitude.is_positive() {
        return Err(ConjectureError::Precondition("count >= 1 and magnitude > 0 required".into()));
    }
    let base = spectral_data(a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = a.n();
    let budget = ATTEMPTS_PER_PERTURBATION * count;
    let mut matrices: Vec<RatMatrix> = Vec::new();
    for _ in 0..budget {
        if matrices.len() == count {
            break;
        }
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let mut step = rng.random_range(-4i64..4);
        if step >= 0 {
            step += 1;
        }
        let mut b = a.clone();
        b.set(i, j, a.get(i, j) + magnitude * ratio(step, 4));
        if matrices.contains(&b) {
            continue;
        }
        let sd = spectral_data(&b)?;
        if sd.lambda == base.lambda && same_generator_set(&sd.generators, &base.generators) {
            matrices.push(b);
        }
    }
    let notice = (matrices.len() < count)
        .then(|| format!("found {} of {count} perturbations in {budget} attempts", matrices.len()));
    Ok(Perturbations { matrices, notice })
}

/// Zero-diagonal matrix with off-diagonal entries `lo + step·m`, `m` uniform on
/// the grid points of `[lo, hi]`.
///
/// # Panics
/// If `n < 2`, `step ≤ 0` or `hi < lo`.
pub fn random_matrix(n: usize, step: &Rational, range: (&Rational, &Rational), seed: u64) -> RatMatrix {
    random_matrix_with(&mut ChaCha8Rng::seed_from_u64(seed), n, step, range)
}

fn random_matrix_with(rng: &mut impl Rng, n: usize, step: &Rational, range: (&Rational, &Rational)) -> RatMatrix {
    assert!(n >= 2, "n >= 2 required");
    assert!(step.is_positive() && range.1 >= range.0, "bad grid");
    let points = ((range.1 - range.0) / step).floor().to_u64().expect("grid size fits u64");
    RatMatrix::from_fn(n, Semiring::MaxPlus, |i, j| {
        if i == j {
            Rational::zero()
        } else {
            range.0 + step * Rational::from_integer(rng.random_range(0..=points).into())
        }
    })
}

/// One line of the `(E(A), P∞)` dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub matrix: Vec<Vec<String>>,
    pub generators: Vec<Vec<String>>,
    pub pinf: Vec<f64>,
    pub error_bound: f64,
    pub seed: Option<u64>,
}

impl DatasetRecord {
    pub fn new(a: &RatMatrix, gens: &[RatPoint], est: &PinfEstimate, seed: Option<u64>) -> Self {
        DatasetRecord {
            matrix: a.rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
            generators: gens.iter().map(|g| g.coords().iter().map(ToString::to_string).collect()).collect(),
            pinf: est.point.coords().to_vec(),
            error_bound: est.error_bound,
            seed,
        }
    }
}

/// Writes one JSON object per line.
pub fn export_samples(path: &Path, batch: &[DatasetRecord]) -> Result<(), ConjectureError> {
    let io = |source| ConjectureError::Io { path: path.to_path_buf(), source };
    let mut file = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    for record in batch {
        let line = serde_json::to_string(record).expect("records serialize");
        writeln!(file, "{line}").map_err(io)?;
    }
    file.flush().map_err(io)
}

pub fn read_samples(path: &Path) -> Result<Vec<DatasetRecord>, ConjectureError> {
    let io = |source| ConjectureError::Io { path: path.to_path_buf(), source };
    let file = fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| ConjectureError::Dataset {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Translation-chain matrices to test.
    pub chain_count: usize,
    /// Base matrices for the shared-eigenspace test.
    pub family_count: usize,
    pub perturbations: usize,
    pub sizes: Vec<usize>,
    pub grid_step: Rational,
    pub range: (Rational, Rational),
    pub perturbation_magnitude: Rational,
    pub tol: f64,
    pub schedule: Vec<f64>,
    pub perron: PerronConfig,
    /// Random draws allowed per accepted chain matrix.
    pub draw_budget: usize,
}

impl CampaignConfig {
    pub fn new(seed: u64, count: usize, schedule: Vec<f64>, perron: PerronConfig) -> Self {
        CampaignConfig {
            seed,
            chain_count: count,
            family_count: count,
            perturbations: 5,
            sizes: vec![3],
            grid_step: ratio(1, 2),
            range: (ratio(-6, 1), ratio(2, 1)),
            perturbation_magnitude: ratio(2, 1),
            tol: 1e-2,
            schedule,
            perron,
            draw_budget: 2000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CampaignSummary {
    pub tested: usize,
    pub held: usize,
    pub membership_failures: usize,
    pub failures: Vec<ConjectureVerdict>,
    pub notices: Vec<String>,
}

impl CampaignSummary {
    fn record(&mut self, verdict: ConjectureVerdict) {
        self.tested += 1;
        if !verdict.membership_ok {
            self.membership_failures += 1;
        }
        if verdict.holds {
            self.held += 1;
        } else {
            self.failures.push(verdict);
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tested": self.tested,
            "held": self.held,
            "membership_failures": self.membership_failures,
            "failures": self.failures.iter().map(ConjectureVerdict::to_json).collect::<Vec<_>>(),
            "notices": self.notices,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub seed: u64,
    pub chain: CampaignSummary,
    pub shared_eigenspace: CampaignSummary,
    pub dataset: Vec<DatasetRecord>,
}

impl CampaignReport {
    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "translation_chain": self.chain.to_json(),
            "shared_eigenspace": self.shared_eigenspace.to_json(),
            "dataset_records": self.dataset.len(),
        })
    }
}

/// Draws a matrix whose generators form a translation chain with at least two members.
pub fn random_chain_matrix(
    rng: &mut impl RngCore,
    cfg: &CampaignConfig,
) -> Result<Option<(RatMatrix, u64)>, ConjectureError> {
    for _ in 0..cfg.draw_budget {
        let seed = rng.next_u64();
        let mut local = ChaCha8Rng::seed_from_u64(seed);
        let n = cfg.sizes[local.random_range(0..cfg.sizes.len())];
        let a = random_matrix_with(&mut local, n, &cfg.grid_step, (&cfg.range.0, &cfg.range.1));
        let gens = spectral_data(&a)?.generators;
        if gens.len() >= 2 && translation_chain(&gens).is_some() {
            return Ok(Some((a, seed)));
        }
    }
    Ok(None)
}

/// Draws a base matrix admitting the configured number of eigenspace-preserving
/// perturbations, and those perturbations.
pub fn random_family(
    rng: &mut impl RngCore,
    cfg: &CampaignConfig,
) -> Result<Option<(RatMatrix, Vec<RatMatrix>, u64)>, ConjectureError> {
    for _ in 0..cfg.draw_budget {
        let seed = rng.next_u64();
        let mut local = ChaCha8Rng::seed_from_u64(seed);
        let n = cfg.sizes[local.random_range(0..cfg.sizes.len())];
        let a = random_matrix_with(&mut local, n, &cfg.grid_step, (&cfg.range.0, &cfg.range.1));
        let family = eigenspace_preserving_perturbations(&a, cfg.perturbations, &cfg.perturbation_magnitude, seed)?;
        if family.notice.is_none() {
            return Ok(Some((a, family.matrices, seed)));
        }
    }
    Ok(None)
}

/// Seeded campaign over both conjectures; also collects the dataset records.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, ConjectureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chain = CampaignSummary::default();
    let mut shared = CampaignSummary::default();
    let mut dataset = Vec::new();
    for _ in 0..cfg.chain_count {
        let Some((a, seed)) = random_chain_matrix(&mut rng, cfg)? else {
            chain.notices.push(format!("no chain matrix within {} draws", cfg.draw_budget));
            continue;
        };
        let mut verdict = conjecture1_test(&a, cfg.tol, &cfg.schedule, &cfg.perron)?;
        verdict.seed = Some(seed);
        let gens = spectral_data(&a)?.generators;
        dataset.push(DatasetRecord::new(&a, &gens, &verdict.pinf[0], Some(seed)));
        chain.record(verdict);
    }
    for _ in 0..cfg.family_count {
        let Some((a, family, seed)) = random_family(&mut rng, cfg)? else {
            shared.notices.push(format!("no base matrix with {} perturbations within {} draws", cfg.perturbations, cfg.draw_budget));
            continue;
        };
        let mut verdict = conjecture2_test(&a, &family, cfg.tol, &cfg.schedule, &cfg.perron)?;
        verdict.seed = Some(seed);
        let gens = spectral_data(&a)?.generators;
        dataset.push(DatasetRecord::new(&a, &gens, &verdict.pinf[0], Some(seed)));
        shared.record(verdict);
    }
    Ok(CampaignReport { seed: cfg.seed, chain, shared_eigenspace: shared, dataset })
}
