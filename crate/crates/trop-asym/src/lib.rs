//! Commands behind the `trop-asym` binary. Each `cmd_*` returns the text it would print.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use tropasym::conjectures::{export_samples, run_campaign, CampaignConfig, ConjectureError};
use tropasym::perron::{
    doubling_schedule, estimate_p_infinity, first_order_fit, normalized_trajectory, trajectory_csv, PerronConfig,
    PerronError, PerronTrajectory, PinfEstimate, DEFAULT_DOUBLINGS, DEFAULT_K0, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use tropasym::schur::{candidate_exponents, compare_prediction, Normalization, SchurError};
use tropasym::spectral::spectral_data;
use tropasym::tropical::{in_span, in_span_tol, normalize_projective, parse_matrix, point_to_json, span_distance};
use tropasym::{FloatPoint, RatMatrix, RatPoint, Rational, Scalar, Semiring, TropError};

const FIGURES_JSON: &str = include_str!("../resources/figures.json");

/// Tolerance for the float membership test used when shading the plot.
pub const PLOT_SPAN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<TropError> for CliError {
    fn from(e: TropError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PerronError> for CliError {
    fn from(e: PerronError) -> Self {
        match e {
            PerronError::BadK(_) | PerronError::BadTol(_) | PerronError::BadSchedule | PerronError::NonFiniteInput { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SchurError> for CliError {
    fn from(e: SchurError) -> Self {
        match e {
            SchurError::NegativeCycle { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ConjectureError> for CliError {
    fn from(e: ConjectureError) -> Self {
        match e {
            ConjectureError::Perron(p) => p.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Perron,
    Schur,
    Figures,
    Plot,
    Conjectures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Tropical spectra and Perron asymptotics of exp(kA).
#[derive(Debug, Clone, Parser)]
#[command(name = "trop-asym", version, allow_negative_numbers = true)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Matrix literal file.
    #[arg(long, conflicts_with = "matrix")]
    pub input: Option<PathBuf>,
    /// Inline matrix literal, e.g. '{"n":2,"entries":[["0","-1"],["-2","0"]],"semiring":"max-plus"}'.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long, default_value_t = DEFAULT_K0)]
    pub k0: f64,
    #[arg(long, default_value_t = DEFAULT_DOUBLINGS)]
    pub doublings: u32,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Required by randomized commands.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raster resolution of the plotted eigenspace region.
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    /// Matrices per conjecture in a campaign.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Where the campaign writes its (generators, limit) samples.
    #[arg(long, default_value = "trop_asym_dataset.jsonl")]
    pub dataset: PathBuf,
    /// Tolerance for matching a prediction or conjecture against the estimated limit.
    #[arg(long, default_value_t = 1e-2)]
    pub match_tol: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig::parse_from(["trop-asym", command.to_possible_value().expect("named").get_name()])
    }

    fn perron(&self) -> PerronConfig {
        PerronConfig { tol: self.tol, max_iter: self.max_iter }
    }

    fn schedule(&self) -> Result<Vec<f64>, CliError> {
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return Err(CliError::Input(format!("--k0 must be positive, got {}", self.k0)));
        }
        if self.doublings == 0 {
            return Err(CliError::Input("--doublings must be at least 1".into()));
        }
        Ok(doubling_schedule(self.k0, self.doublings))
    }

    fn matrix_text(&self) -> Result<String, CliError> {
        match (&self.input, &self.matrix) {
            (Some(path), None) => {
                fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
            }
            (None, Some(text)) => Ok(text.clone()),
            (None, None) => Err(CliError::Input("a matrix is required: pass --input FILE or --matrix JSON".into())),
            (Some(_), Some(_)) => Err(CliError::Input("--input and --matrix are mutually exclusive".into())),
        }
    }

    /// The input as a max-plus matrix; a min-plus literal `B` is read as `A = −B`.
    pub fn max_plus_matrix(&self) -> Result<RatMatrix, CliError> {
        let m: RatMatrix = parse_matrix(&self.matrix_text()?)?;
        Ok(match m.semiring() {
            Semiring::MaxPlus => m,
            Semiring::MinPlus => m.negated(),
        })
    }
}

/// Dispatches to the selected command.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Perron => cmd_perron(cfg),
        Command::Schur => cmd_schur(cfg),
        Command::Figures => cmd_figures(cfg),
        Command::Plot => cmd_plot(cfg),
        Command::Conjectures => cmd_conjectures(cfg),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let a = cfg.max_plus_matrix()?;
    Ok(pretty(&spectral_data(&a)?.to_json()))
}

struct Analysis {
    traj: PerronTrajectory,
    estimate: PinfEstimate,
    gens: Vec<RatPoint>,
}

fn analyse(a: &RatMatrix, cfg: &RunConfig) -> Result<Analysis, CliError> {
    let traj = normalized_trajectory(&a.to_f64(), &cfg.schedule()?, &cfg.perron())?;
    let estimate = estimate_p_infinity(&traj)?;
    let gens = spectral_data(a)?.generators;
    Ok(Analysis { traj, estimate, gens })
}

fn float_gens(gens: &[RatPoint]) -> Vec<FloatPoint> {
    gens.iter().map(RatPoint::to_f64).collect()
}

/// Trajectory and limit estimate. JSON by default; with `--format csv` the CSV goes
/// to the output and the estimate is appended as a `#`-prefixed JSON line.
pub fn cmd_perron(cfg: &RunConfig) -> Result<String, CliError> {
    let a = cfg.max_plus_matrix()?;
    let an = analyse(&a, cfg)?;
    let gens = float_gens(&an.gens);
    let distance = |p: &FloatPoint| span_distance(p, &gens).expect("generators match dimension");
    match cfg.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let f = |s: &tropasym::perron::PerronSample| distance(&s.point);
            let mut out = trajectory_csv(&an.traj, a.n(), Some(("span_distance", &f)));
            writeln!(out, "# {}", an.estimate.to_json()).expect("string write");
            Ok(out)
        }
        Format::Json => {
            let samples: Vec<Value> = an
                .traj
                .samples
                .iter()
                .map(|s| {
                    json!({
                        "k": s.k,
                        "lambda_k": s.log_rho_over_k,
                        "point": s.point.coords(),
                        "residual": s.residual,
                        "iterations": s.iterations,
                        "span_distance": distance(&s.point),
                    })
                })
                .collect();
            let failures: Vec<Value> =
                an.traj.failures.iter().map(|f| json!({ "k": f.k, "error": f.error.to_string() })).collect();
            let fit = first_order_fit(&an.traj)
                .map(|(v, logw)| json!({ "v": v.coords(), "logw": logw }))
                .unwrap_or(Value::Null);
            Ok(pretty(&json!({
                "matrix_hash": an.traj.matrix_hash,
                "samples": samples,
                "failures": failures,
                "estimate": an.estimate.to_json(),
                "first_order_fit": fit,
            })))
        }
        Format::Svg => Err(CliError::Input("perron supports --format json or csv; use the plot command for SVG".into())),
    }
}

/// Critical-class elimination report for `B = −A` with candidates checked against
/// the eigenspace of `A` and its numerical limit.
pub fn cmd_schur(cfg: &RunConfig) -> Result<String, CliError> {
    let a = cfg.max_plus_matrix()?;
    let report = candidate_exponents(&a.negated(), Normalization::RowShift)?;
    let an = analyse(&a, cfg)?;
    let verdicts = compare_prediction(&a, &report, &an.estimate, cfg.match_tol)?;
    let mut out = report.to_json(Some(&verdicts));
    out["pinf"] = an.estimate.to_json();
    Ok(pretty(&out))
}

#[derive(Debug, Deserialize)]
struct FigureFile {
    version: u32,
    figures: Vec<FigureEntry>,
}

#[derive(Debug, Deserialize)]
struct FigureEntry {
    id: String,
    matrix: Vec<Vec<String>>,
    reference_pinf: Vec<String>,
    #[serde(default)]
    predicted_points: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedPoint {
    pub point: RatPoint,
    pub in_eigenspace: bool,
    pub distance_to_estimate: f64,
}

/// One embedded reference matrix with its recomputed data.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub id: String,
    pub matrix: RatMatrix,
    pub lambda: Rational,
    pub generators: Vec<RatPoint>,
    pub estimate: PinfEstimate,
    pub reference: RatPoint,
    /// Exact membership of the reference value in the eigenspace.
    pub consistent: bool,
    pub distance_to_reference: f64,
    pub predicted: Vec<PredictedPoint>,
}

impl FigureRow {
    pub fn flag(&self) -> &'static str {
        if self.consistent {
            "CONSISTENT"
        } else {
            "DISCREPANT"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "lambda": self.lambda.to_string(),
            "generators": self.generators.iter().map(point_to_json).collect::<Vec<_>>(),
            "pinf_estimate": self.estimate.to_json(),
            "reference_pinf": point_to_json(&self.reference),
            "reference_in_eigenspace": self.consistent,
            "distance_to_reference": self.distance_to_reference,
            "flag": self.flag(),
            "predicted_points": self.predicted.iter().map(|p| json!({
                "point": point_to_json(&p.point),
                "in_eigenspace": p.in_eigenspace,
                "distance_to_estimate": p.distance_to_estimate,
            })).collect::<Vec<_>>(),
        })
    }
}

fn rational_point(coords: &[String]) -> Result<RatPoint, CliError> {
    let parsed: Option<Vec<Rational>> = coords.iter().map(|c| Rational::parse_decimal(c)).collect();
    let parsed = parsed.ok_or_else(|| CliError::Input(format!("bad point {coords:?} in figure resource")))?;
    if parsed.is_empty() {
        return Err(CliError::Input("empty point in figure resource".into()));
    }
    Ok(normalize_projective(&parsed))
}

/// Recomputes every embedded reference matrix.
pub fn figure_rows(cfg: &RunConfig) -> Result<Vec<FigureRow>, CliError> {
    let file: FigureFile = serde_json::from_str(FIGURES_JSON).map_err(|e| CliError::Input(e.to_string()))?;
    debug_assert_eq!(file.version, 1);
    file.figures
        .iter()
        .map(|fig| {
            let matrix: RatMatrix = parse_matrix(&json!({ "entries": fig.matrix }).to_string())?;
            let sd = spectral_data(&matrix)?;
            let an = analyse(&matrix, cfg)?;
            let reference = rational_point(&fig.reference_pinf)?;
            let predicted = fig
                .predicted_points
                .iter()
                .map(|c| {
                    let point = rational_point(c)?;
                    Ok(PredictedPoint {
                        in_eigenspace: in_span(&point, &sd.generators)?,
                        distance_to_estimate: point.to_f64().inf_distance(&an.estimate.point),
                        point,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(FigureRow {
                id: fig.id.clone(),
                lambda: sd.lambda,
                consistent: in_span(&reference, &sd.generators)?,
                distance_to_reference: reference.to_f64().inf_distance(&an.estimate.point),
                generators: sd.generators,
                estimate: an.estimate,
                reference,
                predicted,
                matrix,
            })
        })
        .collect()
}

pub fn cmd_figures(cfg: &RunConfig) -> Result<String, CliError> {
    let rows = figure_rows(cfg)?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => Ok(pretty(&Value::Array(rows.iter().map(FigureRow::to_json).collect()))),
        Format::Csv => {
            let mut out = String::from("id,lambda,pinf_estimate,error_bound,reference_pinf,distance_to_reference,flag\n");
            for r in &rows {
                let est: Vec<String> = r.estimate.point.coords().iter().map(|x| format!("{x:.6}")).collect();
                writeln!(
                    out,
                    "{},{},{},{:e},{},{:.6},{}",
                    r.id,
                    r.lambda,
                    est.join(" "),
                    r.estimate.error_bound,
                    r.reference.coords().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                    r.distance_to_reference,
                    r.flag()
                )
                .expect("string write");
            }
            Ok(out)
        }
        Format::Svg => Err(CliError::Input("figures supports --format json or csv".into())),
    }
}

/// Plot box in plane coordinates: the generators' bounding box padded by 1, made square.
fn plot_box(gens: &[Vec<f64>]) -> (f64, f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for g in gens {
        x0 = x0.min(g[0]);
        x1 = x1.max(g[0]);
        y0 = y0.min(g[1]);
        y1 = y1.max(g[1]);
    }
    let (x0, x1, y0, y1) = (x0 - 1.0, x1 + 1.0, y0 - 1.0, y1 + 1.0);
    let side = (x1 - x0).max(y1 - y0);
    (x0 - (side - (x1 - x0)) / 2.0, y0 - (side - (y1 - y0)) / 2.0, side)
}

/// Lattice points `(i, j)`, `0 ≤ i, j ≤ grid`, whose plane point passes the float membership test.
pub fn region_cells(gens: &[FloatPoint], grid: usize) -> Vec<(usize, usize)> {
    let planes: Vec<Vec<f64>> = gens.iter().map(|g| g.project_to_plane()).collect();
    let (x0, y0, side) = plot_box(&planes);
    let h = side / grid as f64;
    let mut cells = Vec::new();
    for j in 0..=grid {
        for i in 0..=grid {
            let p = normalize_projective(&[0.0, x0 + i as f64 * h, y0 + j as f64 * h]);
            if in_span_tol(&p, gens, PLOT_SPAN_TOL).expect("dimensions agree") {
                cells.push((i, j));
            }
        }
    }
    cells
}

fn gradient(t: f64) -> String {
    let (a, b) = ([250.0, 220.0, 40.0], [90.0, 20.0, 130.0]);
    let c: Vec<u8> = (0..3).map(|i| (a[i] + (b[i] - a[i]) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// SVG of the eigenspace region in the plane `(x₂, x₃)`, the generators and the trajectory.
pub fn render_svg(gens: &[RatPoint], traj: &PerronTrajectory, grid: usize) -> Result<String, CliError> {
    if gens.first().map_or(true, |g| g.dim() != 3) {
        return Err(CliError::Input("plot draws the tropical projective plane TP^2 only: the matrix must be 3x3".into()));
    }
    if grid == 0 {
        return Err(CliError::Input("--grid must be positive".into()));
    }
    let fgens = float_gens(gens);
    let planes: Vec<Vec<f64>> = fgens.iter().map(|g| g.project_to_plane()).collect();
    let (x0, y0, side) = plot_box(&planes);
    let (size, margin) = (600.0, 50.0);
    let scale = size / side;
    let sx = |x: f64| margin + (x - x0) * scale;
    let sy = |y: f64| margin + size - (y - y0) * scale;
    let h = side / grid as f64;
    let cell = h * scale;

    let mut svg = String::new();
    let total = size + 2.0 * margin;
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    )
    .unwrap();
    writeln!(svg, r#"<defs><clipPath id="plot"><rect x="{margin}" y="{margin}" width="{size}" height="{size}"/></clipPath></defs>"#).unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{total}" height="{total}" fill="white"/>"#).unwrap();
    writeln!(svg, r##"<g id="region" fill="#9ecae1" clip-path="url(#plot)">"##).unwrap();
    let cells = region_cells(&fgens, grid);
    // Merge horizontal runs of lattice points into single rectangles.
    let mut idx = 0;
    while idx < cells.len() {
        let (i, j) = cells[idx];
        let mut end = idx;
        while end + 1 < cells.len() && cells[end + 1] == (cells[end].0 + 1, j) {
            end += 1;
        }
        let run = cells[end].0 - i + 1;
        let x = sx(x0 + i as f64 * h) - cell / 2.0;
        let y = sy(y0 + j as f64 * h) - cell / 2.0;
        writeln!(svg, r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{cell:.3}"/>"#, cell * run as f64).unwrap();
        idx = end + 1;
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(
        svg,
        r##"<rect x="{margin}" y="{margin}" width="{size}" height="{size}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    writeln!(svg, r##"<g font-family="sans-serif" font-size="12" fill="#333">"##).unwrap();
    writeln!(svg, r#"<text x="{margin}" y="{}">{x0:.2}</text>"#, margin + size + 16.0).unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#, margin + size, margin + size + 16.0, x0 + side).unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y0:.2}</text>"#, margin - 4.0, margin + size).unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#, margin - 4.0, margin + 12.0, y0 + side).unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">x2 - x1</text>"#, margin + size / 2.0, margin + size + 32.0).unwrap();
    writeln!(svg, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">x3 - x1</text>"#, margin + size / 2.0, margin + size / 2.0).unwrap();
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<g id="trajectory" clip-path="url(#plot)">"#).unwrap();
    let count = traj.samples.len();
    for (t, s) in traj.samples.iter().enumerate() {
        let p = s.point.project_to_plane();
        let frac = if count > 1 { t as f64 / (count - 1) as f64 } else { 1.0 };
        writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="{}"><title>k = {}</title></circle>"#,
            sx(p[0]),
            sy(p[1]),
            gradient(frac),
            s.k
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<g id="generators" fill="none" stroke="red" stroke-width="2">"#).unwrap();
    for (g, p) in gens.iter().zip(&planes) {
        writeln!(svg, r#"<circle cx="{:.3}" cy="{:.3}" r="8"><title>{g}</title></circle>"#, sx(p[0]), sy(p[1])).unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

pub fn cmd_plot(cfg: &RunConfig) -> Result<String, CliError> {
    let a = cfg.max_plus_matrix()?;
    if a.n() != 3 {
        return Err(CliError::Input(format!(
            "plot draws the tropical projective plane TP^2 only: the matrix must be 3x3, got {0}x{0}",
            a.n()
        )));
    }
    if let Some(f) = cfg.format.filter(|f| *f != Format::Svg) {
        return Err(CliError::Input(format!("plot writes SVG only, not {f:?}")));
    }
    let an = analyse(&a, cfg)?;
    render_svg(&an.gens, &an.traj, cfg.grid)
}

/// Seeded campaign over both conjectures; writes the dataset to `cfg.dataset`.
pub fn cmd_conjectures(cfg: &RunConfig) -> Result<String, CliError> {
    let seed = cfg.seed.ok_or_else(|| CliError::Input("conjectures is randomized and requires --seed".into()))?;
    let campaign = CampaignConfig::new(seed, cfg.count, cfg.schedule()?, cfg.perron());
    let campaign = CampaignConfig { tol: cfg.match_tol, ..campaign };
    let report = run_campaign(&campaign)?;
    export_samples(&cfg.dataset, &report.dataset)?;
    let mut out = report.to_json();
    out["dataset"] = json!(cfg.dataset.display().to_string());
    Ok(pretty(&out))
}
