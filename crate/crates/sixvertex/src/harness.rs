//! Configuration ingestion, reproducible run orchestration, and
//! machine-readable reporting for the verification suites.
//!
//! Runs are deterministic: every random draw flows from one seeded
//! generator, case inputs are generated up front in a fixed order, and
//! results are collected by index. The thread count (RAYON_NUM_THREADS)
//! cannot change any reported number.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::action_angle;
use crate::bethe::{self, BetheConfig, LambdaSiteProduct};
use crate::error::{Error, Result};
use crate::expansion;
use crate::lattice::{self, LatticeConfig};
use crate::monodromy::{self, ModelParams};
use crate::tensor::Convention;
use crate::weights::{self, SpectralParams, VertexWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ybe,
    Rtt,
    Commute,
    Sixteen,
    LemmaAudit,
    Bethe,
    Eigencheck,
    Partition,
    ActionAngle,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 9] = [
        Suite::Ybe,
        Suite::Rtt,
        Suite::Commute,
        Suite::Sixteen,
        Suite::LemmaAudit,
        Suite::Bethe,
        Suite::Eigencheck,
        Suite::Partition,
        Suite::ActionAngle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ybe => "ybe",
            Suite::Rtt => "rtt",
            Suite::Commute => "commute",
            Suite::Sixteen => "sixteen",
            Suite::LemmaAudit => "lemma-audit",
            Suite::Bethe => "bethe",
            Suite::Eigencheck => "eigencheck",
            Suite::Partition => "partition",
            Suite::ActionAngle => "action-angle",
            Suite::All => "all",
        }
    }

    pub fn parse(name: &str) -> Result<Suite> {
        match name {
            "ybe" => Ok(Suite::Ybe),
            "rtt" => Ok(Suite::Rtt),
            "commute" => Ok(Suite::Commute),
            "sixteen" => Ok(Suite::Sixteen),
            "lemma-audit" => Ok(Suite::LemmaAudit),
            "bethe" => Ok(Suite::Bethe),
            "eigencheck" => Ok(Suite::Eigencheck),
            "partition" => Ok(Suite::Partition),
            "action-angle" => Ok(Suite::ActionAngle),
            "all" => Ok(Suite::All),
            other => Err(Error::Usage(format!("unknown suite '{other}'"))),
        }
    }

    /// Stable per-suite RNG stream tag, so the suites compose in `all` with
    /// the same case inputs as when run individually.
    fn stream_tag(self) -> u64 {
        self.name().bytes().fold(0xcbf29ce484222325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x100000001b3)
        })
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

fn d_eta() -> f64 {
    0.7
}
fn d_lambda() -> f64 {
    1.0
}
fn d_convention() -> Convention {
    Convention::Trigonometric
}

/// Model parameters at the configuration level; inhomogeneities are drawn
/// per case from the seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "d_eta")]
    pub eta: f64,
    #[serde(default)]
    pub h_field: f64,
    #[serde(default)]
    pub v_field: f64,
    #[serde(default = "d_lambda")]
    pub lambda_c: f64,
    #[serde(default = "d_convention")]
    pub convention: Convention,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            eta: d_eta(),
            h_field: 0.0,
            v_field: 0.0,
            lambda_c: d_lambda(),
            convention: d_convention(),
        }
    }
}

fn d_eta_values() -> Vec<f64> {
    vec![0.3, 0.7, 1.1]
}
fn d_grid_points() -> usize {
    5
}
fn d_rtt_sites() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn d_commute_sites() -> Vec<usize> {
    vec![2, 3, 4, 5, 6]
}
fn d_bethe_sites() -> Vec<usize> {
    vec![2, 3]
}
fn d_draws() -> usize {
    3
}
fn d_pairs() -> usize {
    3
}
fn d_partition_cap() -> usize {
    9
}
fn d_aa_grid() -> usize {
    20
}
fn d_inhomogeneity_scale() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Anisotropy sweep for the Yang-Baxter suite.
    #[serde(default = "d_eta_values")]
    pub eta_values: Vec<f64>,
    /// Side length of the random (u, v) grid.
    #[serde(default = "d_grid_points")]
    pub grid_points: usize,
    #[serde(default = "d_rtt_sites")]
    pub rtt_site_counts: Vec<usize>,
    #[serde(default = "d_commute_sites")]
    pub commute_site_counts: Vec<usize>,
    #[serde(default = "d_bethe_sites")]
    pub bethe_site_counts: Vec<usize>,
    /// Random parameter draws per configuration.
    #[serde(default = "d_draws")]
    pub draws: usize,
    /// Spectral-point pairs per draw.
    #[serde(default = "d_pairs")]
    pub spectral_pairs: usize,
    /// Largest vertex count for the torus sweep.
    #[serde(default = "d_partition_cap")]
    pub partition_vertex_cap: usize,
    /// Sample count for the conjugate-function grid.
    #[serde(default = "d_aa_grid")]
    pub action_angle_grid: usize,
    /// Magnitude bound on drawn inhomogeneities.
    #[serde(default = "d_inhomogeneity_scale")]
    pub inhomogeneity_scale: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

fn t_ybe() -> f64 {
    1e-12
}
fn t_rtt() -> f64 {
    1e-10
}
fn t_commute() -> f64 {
    1e-10
}
fn t_sixteen() -> f64 {
    1e-10
}
fn t_recursion() -> f64 {
    1e-12
}
fn t_bethe_residual() -> f64 {
    1e-10
}
fn t_eigencheck() -> f64 {
    1e-8
}
fn t_lambda_vacuum() -> f64 {
    1e-12
}
fn t_partition_rel() -> f64 {
    1e-10
}
fn t_semigrand() -> f64 {
    1e-10
}
fn t_conjugate() -> f64 {
    1e-14
}
fn t_scalarization() -> f64 {
    1e-12
}
fn t_charges() -> f64 {
    1e-10
}
fn t_be_fd() -> f64 {
    1e-6
}
fn t_be_decomposition() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "t_ybe")]
    pub ybe: f64,
    #[serde(default = "t_rtt")]
    pub rtt: f64,
    #[serde(default = "t_commute")]
    pub commute: f64,
    #[serde(default = "t_sixteen")]
    pub sixteen: f64,
    #[serde(default = "t_recursion")]
    pub recursion: f64,
    #[serde(default = "t_bethe_residual")]
    pub bethe_residual: f64,
    #[serde(default = "t_eigencheck")]
    pub eigencheck: f64,
    #[serde(default = "t_lambda_vacuum")]
    pub lambda_vacuum: f64,
    #[serde(default = "t_partition_rel")]
    pub partition_rel: f64,
    #[serde(default = "t_semigrand")]
    pub semigrand: f64,
    #[serde(default = "t_conjugate")]
    pub conjugate: f64,
    #[serde(default = "t_scalarization")]
    pub scalarization: f64,
    #[serde(default = "t_charges")]
    pub charges: f64,
    #[serde(default = "t_be_fd")]
    pub be_finite_difference: f64,
    #[serde(default = "t_be_decomposition")]
    pub be_decomposition: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl ToleranceConfig {
    fn validate(&self) -> Result<()> {
        let all = [
            self.ybe,
            self.rtt,
            self.commute,
            self.sixteen,
            self.recursion,
            self.bethe_residual,
            self.eigencheck,
            self.lambda_vacuum,
            self.partition_rel,
            self.semigrand,
            self.conjugate,
            self.scalarization,
            self.charges,
            self.be_finite_difference,
            self.be_decomposition,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config("tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: String,
    pub format: OutputFormat,
}

fn d_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub suite: Suite,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn for_suite(suite: Suite) -> Self {
        Self {
            suite,
            params: ParamsConfig::default(),
            grids: GridConfig::default(),
            tolerances: ToleranceConfig::default(),
            seed: d_seed(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let g = &self.grids;
        if g.eta_values.is_empty()
            || g.grid_points == 0
            || g.rtt_site_counts.is_empty()
            || g.commute_site_counts.is_empty()
            || g.bethe_site_counts.is_empty()
            || g.draws == 0
            || g.spectral_pairs == 0
            || g.partition_vertex_cap == 0
            || g.action_angle_grid == 0
        {
            return Err(Error::Config("grids must be nonempty".into()));
        }
        if self.params.lambda_c <= 0.0 {
            return Err(Error::Config("lambda_c must be positive".into()));
        }
        Ok(())
    }
}

/// Parse and validate a configuration document.
pub fn load_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("parse error at line {}, column {}: {e}", e.line(), e.column())))?;
    config.validate()?;
    Ok(config)
}

/// One verified case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    pub label: String,
    pub inputs: Value,
    /// Absent when the case errored before producing a number.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CaseRecord {
    fn checked(label: impl Into<String>, inputs: Value, residual: f64, tolerance: f64) -> Self {
        Self {
            index: 0,
            label: label.into(),
            inputs,
            residual: Some(residual),
            tolerance,
            pass: residual < tolerance,
            error: None,
        }
    }

    /// Informational row: the number is recorded, the case always passes.
    fn reported(label: impl Into<String>, inputs: Value, residual: f64) -> Self {
        Self {
            index: 0,
            label: label.into(),
            inputs,
            residual: Some(residual),
            tolerance: f64::MAX,
            pass: true,
            error: None,
        }
    }

    fn failed(label: impl Into<String>, inputs: Value, tolerance: f64, error: String) -> Self {
        Self {
            index: 0,
            label: label.into(),
            inputs,
            residual: None,
            tolerance,
            pass: false,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub max_residual: Option<f64>,
    pub pass_count: usize,
    pub case_count: usize,
    pub pass: bool,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: RunConfig,
    pub cases: Vec<CaseRecord>,
    pub aggregate: Aggregate,
}

impl SuiteReport {
    fn assemble(suite: Suite, config: &RunConfig, mut cases: Vec<CaseRecord>, wall_time_ms: u64) -> Self {
        for (i, case) in cases.iter_mut().enumerate() {
            case.index = i;
        }
        let max_residual = cases
            .iter()
            .filter_map(|c| c.residual)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        let pass_count = cases.iter().filter(|c| c.pass).count();
        Self {
            suite: suite.name().to_string(),
            config: config.clone(),
            aggregate: Aggregate {
                max_residual,
                pass_count,
                case_count: cases.len(),
                pass: pass_count == cases.len(),
                wall_time_ms,
            },
            cases,
        }
    }
}

fn rng_for(config: &RunConfig, suite: Suite) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed ^ suite.stream_tag())
}

fn draw_c(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn draw_inhomogeneities(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<C64> {
    (0..n).map(|_| draw_c(rng, scale)).collect()
}

fn cnum(z: C64) -> Value {
    json!([z.re, z.im])
}

fn model_params(config: &RunConfig, v: Vec<C64>) -> ModelParams {
    ModelParams {
        eta: C64::new(config.params.eta, 0.0),
        h_field: config.params.h_field,
        v_field: config.params.v_field,
        inhomogeneities: v,
        convention: config.params.convention,
        lambda_c: config.params.lambda_c,
    }
}

/// Evaluate prepared cases in parallel, collecting results by case order.
fn run_cases<I, F>(prepared: Vec<I>, eval: F) -> Vec<CaseRecord>
where
    I: Send + Sync,
    F: Fn(&I) -> CaseRecord + Sync + Send,
{
    prepared.par_iter().map(eval).collect()
}

fn ybe_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::Ybe);
    let mut cases = Vec::new();
    let mut prepared = Vec::new();
    for &eta in &config.grids.eta_values {
        let eta_c = C64::new(eta, 0.0);
        let cal = weights::calibrate_weight_sign(eta_c, config.params.convention)?;
        cases.push(CaseRecord::reported(
            format!("calibration eta={eta}"),
            json!({
                "eta": eta,
                "chosen": cal.chosen.to_string(),
                "residual_eta_plus_u": cal.max_residual_eta_plus_u,
                "residual_eta_minus_u": cal.max_residual_eta_minus_u,
            }),
            cal.max_residual_eta_plus_u.min(cal.max_residual_eta_minus_u),
        ));
        for _ in 0..config.grids.grid_points * config.grids.grid_points {
            let u = draw_c(&mut rng, 0.5);
            let v = draw_c(&mut rng, 0.5);
            prepared.push((eta_c, u, v, cal.chosen));
        }
    }
    let conv = config.params.convention;
    let tol = config.tolerances.ybe;
    cases.extend(run_cases(prepared, |&(eta, u, v, sign)| {
        let p = SpectralParams::new(C64::new(0.0, 0.0), eta, conv);
        match weights::ybe_residual(u, v, &p, sign) {
            Ok(r) => CaseRecord::checked(
                format!("ybe eta={} u=({:.3},{:.3}) v=({:.3},{:.3})", eta.re, u.re, u.im, v.re, v.im),
                json!({"eta": eta.re, "u": cnum(u), "v": cnum(v)}),
                r,
                tol,
            ),
            Err(e) => CaseRecord::failed("ybe", json!({"eta": eta.re}), tol, e.to_string()),
        }
    }));
    Ok(cases)
}

fn rtt_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::Rtt);
    let mut prepared = Vec::new();
    for &n in &config.grids.rtt_site_counts {
        for draw in 0..config.grids.draws {
            let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
            let u = draw_c(&mut rng, 0.5);
            let up = draw_c(&mut rng, 0.5);
            prepared.push((n, draw, v, u, up));
        }
    }
    let tol = config.tolerances.rtt;
    Ok(run_cases(prepared, |(n, draw, v, u, up)| {
        let params = model_params(config, v.clone());
        match monodromy::rtt_residual(*u, *up, &params, false) {
            Ok(r) => CaseRecord::checked(
                format!("rtt N={n} draw={draw}"),
                json!({"n_sites": n, "draw": draw, "u": cnum(*u), "u_prime": cnum(*up)}),
                r,
                tol,
            ),
            Err(e) => CaseRecord::failed(
                format!("rtt N={n} draw={draw}"),
                json!({"n_sites": n}),
                tol,
                e.to_string(),
            ),
        }
    }))
}

fn commute_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::Commute);
    let mut prepared = Vec::new();
    for &n in &config.grids.commute_site_counts {
        for draw in 0..config.grids.draws {
            let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
            for pair in 0..config.grids.spectral_pairs {
                let u = draw_c(&mut rng, 0.5);
                let up = draw_c(&mut rng, 0.5);
                prepared.push((n, draw, pair, v.clone(), u, up));
            }
        }
    }
    let tol = config.tolerances.commute;
    Ok(run_cases(prepared, |(n, draw, pair, v, u, up)| {
        let params = model_params(config, v.clone());
        match monodromy::transfer_commutator_residual(*u, *up, &params) {
            Ok(r) => CaseRecord::checked(
                format!("commute N={n} draw={draw} pair={pair}"),
                json!({"n_sites": n, "draw": draw, "u": cnum(*u), "u_prime": cnum(*up)}),
                r,
                tol,
            ),
            Err(e) => CaseRecord::failed(
                format!("commute N={n} draw={draw} pair={pair}"),
                json!({"n_sites": n}),
                tol,
                e.to_string(),
            ),
        }
    }))
}

fn sixteen_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::Sixteen);
    let mut prepared = Vec::new();
    for &n in &config.grids.rtt_site_counts {
        for draw in 0..config.grids.draws {
            let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
            let u = draw_c(&mut rng, 0.5);
            let up = draw_c(&mut rng, 0.5);
            prepared.push((n, draw, v, u, up));
        }
    }
    let tol = config.tolerances.sixteen;
    let groups = run_cases(prepared, |(n, draw, v, u, up)| {
        let params = model_params(config, v.clone());
        match monodromy::sixteen_relations_report(*u, *up, &params, tol) {
            Ok(rows) => CaseRecord {
                index: 0,
                label: format!("sixteen N={n} draw={draw}"),
                inputs: json!({
                    "n_sites": n,
                    "draw": draw,
                    "rows": rows.iter().map(|r| json!({
                        "index": r.index,
                        "label": r.label,
                        "norm": r.commutator_norm,
                        "expected_zero": r.expected_zero,
                    })).collect::<Vec<_>>(),
                }),
                residual: Some(
                    rows.iter()
                        .filter(|r| r.expected_zero)
                        .map(|r| r.commutator_norm)
                        .fold(0.0, f64::max),
                ),
                tolerance: tol,
                pass: rows.iter().all(|r| r.pass.unwrap_or(true)),
                error: None,
            },
            Err(e) => CaseRecord::failed(
                format!("sixteen N={n} draw={draw}"),
                json!({"n_sites": n}),
                tol,
                e.to_string(),
            ),
        }
    });
    Ok(groups)
}

fn lemma_audit_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::LemmaAudit);
    let mut cases = Vec::new();
    // Recursion against the fully-embedded brute-force product, plus the
    // supporting route comparisons.
    for n in 2..=6usize {
        let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
        let u = draw_c(&mut rng, 0.5);
        let params = model_params(config, v);
        let tol = config.tolerances.recursion;
        let build = monodromy::build_monodromy(u, &params)?;
        let folded = monodromy::monodromy_by_recursion(u, &params, false)?;
        let oracle = monodromy::monodromy_kron_oracle(u, &params)?;
        cases.push(CaseRecord::checked(
            format!("recursion vs embedded-product oracle N={n}"),
            json!({"n_sites": n, "u": cnum(u)}),
            folded.max_abs_diff(&oracle)?,
            tol,
        ));
        cases.push(CaseRecord::checked(
            format!("recursion fold vs ordered product N={n}"),
            json!({"n_sites": n, "u": cnum(u)}),
            build.max_abs_diff(&folded)?,
            tol,
        ));
        cases.push(CaseRecord::checked(
            format!("ordered product vs embedded-product oracle N={n}"),
            json!({"n_sites": n, "u": cnum(u)}),
            build.max_abs_diff(&oracle)?,
            tol,
        ));
    }
    // Closed-form audit, report-only.
    for n in [4usize, 5] {
        let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
        let u = draw_c(&mut rng, 0.5);
        let params = model_params(config, v);
        let report = expansion::lemma_audit(u, &params, n)?;
        for row in report.rows {
            cases.push(CaseRecord::reported(
                format!("closed-form n={n} block={} floor=({})", row.block, row.floor),
                json!({
                    "n_sites": n,
                    "block": row.block,
                    "floor": row.floor,
                    "abs_deviation": row.abs_deviation,
                    "rel_deviation": row.rel_deviation,
                }),
                row.rel_deviation,
            ));
        }
    }
    Ok(cases)
}

fn bethe_cfg(config: &RunConfig, n_sites: usize, n_roots: usize, v: Vec<C64>) -> Result<BetheConfig> {
    BetheConfig::new(
        n_sites,
        n_roots,
        C64::new(config.params.eta, 0.0),
        config.params.h_field,
        v,
        config.params.convention,
    )
}

fn bethe_suite(config: &RunConfig, eigencheck_only: bool) -> Result<Vec<CaseRecord>> {
    let suite = if eigencheck_only { Suite::Eigencheck } else { Suite::Bethe };
    let mut rng = rng_for(config, suite);
    let mut cases = Vec::new();

    let cal = bethe::calibrate_spectral_map(config.params.convention)?;
    cases.push(CaseRecord::reported(
        "spectral-map calibration",
        json!({
            "chosen": cal.chosen.to_string(),
            "candidates": cal.residuals.iter().map(|(m, r)| json!({"map": m, "residual": r})).collect::<Vec<_>>(),
        }),
        cal.residuals.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min),
    ));

    for &n_sites in &config.grids.bethe_site_counts {
        for n_roots in [0usize, 1] {
            let v = draw_inhomogeneities(&mut rng, n_sites, config.grids.inhomogeneity_scale);
            let cfg = bethe_cfg(config, n_sites, n_roots, v)?;
            let label = format!("N={n_sites} n={n_roots}");
            let outcome = bethe::solve_bethe(&cfg, &bethe::grid_seeds_one_root(5), config.tolerances.bethe_residual)?;
            if outcome.roots.is_empty() {
                cases.push(CaseRecord::failed(
                    format!("solve {label}"),
                    json!({"n_sites": n_sites, "n_roots": n_roots}),
                    config.tolerances.bethe_residual,
                    "solver returned no roots".into(),
                ));
                continue;
            }
            let roots = &outcome.roots[0];
            let root_json: Vec<Value> = roots.alpha().iter().map(|a| cnum(*a)).collect();
            match bethe::bethe_residual(roots) {
                Ok(res) => {
                    let worst = res.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    cases.push(CaseRecord::checked(
                        format!("bethe residual {label}"),
                        json!({"n_sites": n_sites, "n_roots": n_roots, "roots": root_json}),
                        worst,
                        config.tolerances.bethe_residual,
                    ));
                }
                Err(e) => cases.push(CaseRecord::failed(
                    format!("bethe residual {label}"),
                    json!({"n_sites": n_sites, "n_roots": n_roots}),
                    config.tolerances.bethe_residual,
                    e.to_string(),
                )),
            }
            for probe in 0..3 {
                let u = draw_c(&mut rng, 0.3);
                match bethe::eigencheck(roots, u) {
                    Ok(r) => cases.push(CaseRecord::checked(
                        format!("eigencheck {label} probe={probe}"),
                        json!({"n_sites": n_sites, "n_roots": n_roots, "u": cnum(u)}),
                        r,
                        config.tolerances.eigencheck,
                    )),
                    Err(e) => cases.push(CaseRecord::failed(
                        format!("eigencheck {label} probe={probe}"),
                        json!({"n_sites": n_sites, "n_roots": n_roots, "u": cnum(u)}),
                        config.tolerances.eigencheck,
                        e.to_string(),
                    )),
                }
            }
            if n_roots == 0 {
                let u = draw_c(&mut rng, 0.3);
                let lambda = bethe::eigenvalue_lambda(roots, u, LambdaSiteProduct::AllSites)?;
                let t = bethe::bethe_transfer(u, &cfg)?;
                let vac = cfg.space()?.vacuum_index();
                let dev = (lambda - t.get(vac, vac)).norm() / lambda.norm().max(1.0);
                cases.push(CaseRecord::checked(
                    format!("vacuum lambda {label}"),
                    json!({"n_sites": n_sites, "u": cnum(u), "lambda": cnum(lambda)}),
                    dev,
                    config.tolerances.lambda_vacuum,
                ));
                // Alternate site-product reading, reported alongside.
                let trunc = bethe::eigenvalue_lambda(roots, u, LambdaSiteProduct::RootCount)?;
                cases.push(CaseRecord::reported(
                    format!("vacuum lambda root-count reading {label}"),
                    json!({"n_sites": n_sites, "deviation": (trunc - t.get(vac, vac)).norm()}),
                    (trunc - t.get(vac, vac)).norm() / lambda.norm().max(1.0),
                ));
            }
        }
    }

    if !eigencheck_only {
        cases.extend(be_lemma_cases(config, &mut rng)?);
    }
    Ok(cases)
}

/// Finite-difference log-derivative checks and the basis-decomposition
/// identities on a pole-avoiding random grid.
fn be_lemma_cases(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<CaseRecord>> {
    let conv = config.params.convention;
    let eta = C64::new(config.params.eta, 0.0);
    let i = C64::new(0.0, 1.0);
    let h = 1e-5;
    let mut cases = Vec::new();
    let mut accepted = 0usize;
    while accepted < 10 {
        let alpha = draw_c(rng, 0.6);
        let beta = draw_c(rng, 0.6);
        let v = draw_c(rng, 0.6);
        let args = [
            eta / 2.0 + i * alpha - v,
            eta / 2.0 - i * alpha + v,
            i * (alpha - beta) + eta,
            i * (alpha - beta) - eta,
        ];
        // Pole avoidance margin 0.1 on every kernel value.
        if args.iter().any(|z| conv.s(*z).norm() < 0.1) {
            continue;
        }
        accepted += 1;
        let (u1, u2, u3, u4) = bethe::log_derivative_functions(alpha, v, beta, eta, conv)?;
        let f1 = |vv: C64| conv.s(eta / 2.0 + i * alpha - vv);
        let f2 = |vv: C64| conv.s(eta / 2.0 - i * alpha + vv);
        let f3 = |bb: C64| conv.s(i * (alpha - bb) + eta);
        let f4 = |bb: C64| conv.s(i * (alpha - bb) - eta);
        let ih = C64::new(0.0, h);
        let fds = [
            ((f1(v + h) - f1(v - h)) / (2.0 * h) / f1(v) - u1).norm(),
            ((f2(v + h) - f2(v - h)) / (2.0 * h) / f2(v) - u2).norm(),
            ((f3(beta - ih) - f3(beta + ih)) / (2.0 * h) / f3(beta) - u3).norm(),
            ((f4(beta - ih) - f4(beta + ih)) / (2.0 * h) / f4(beta) - u4).norm(),
        ];
        for (k, fd) in fds.iter().enumerate() {
            cases.push(CaseRecord::checked(
                format!("log-derivative U{} sample={}", k + 1, accepted),
                json!({"alpha": cnum(alpha), "beta": cnum(beta), "v": cnum(v)}),
                *fd,
                config.tolerances.be_finite_difference,
            ));
        }
        let (s1, s2, s3, s4) = bethe::basis_coefficients(alpha, v, beta, eta, conv)?;
        let (f1v, f2v) = (f1(v), f2(v));
        let (f3v, f4v) = (f3(beta), f4(beta));
        let d12 = (s1 * f1v + s2 * f2v - f1v / f2v).norm();
        let d34 = (s3 * f3v + s4 * f4v - f3v / f4v).norm();
        cases.push(CaseRecord::checked(
            format!("decomposition F1/F2 sample={accepted}"),
            json!({"alpha": cnum(alpha), "v": cnum(v)}),
            d12,
            config.tolerances.be_decomposition,
        ));
        cases.push(CaseRecord::checked(
            format!("decomposition F3/F4 sample={accepted}"),
            json!({"alpha": cnum(alpha), "beta": cnum(beta)}),
            d34,
            config.tolerances.be_decomposition,
        ));
    }
    Ok(cases)
}

fn partition_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::Partition);
    let cap = config.grids.partition_vertex_cap;
    let mut shapes = Vec::new();
    for n in 1..=cap {
        for m in 1..=cap {
            if n * m <= cap {
                shapes.push((n, m));
            }
        }
    }
    let mut prepared = Vec::new();
    for &(n, m) in &shapes {
        for draw in 0..config.grids.draws {
            // Baxter family inside the regime 0 < u < eta.
            let eta: f64 = rng.gen_range(0.45..1.2);
            let u: f64 = rng.gen_range(0.05..eta - 0.02);
            let w = match config.params.convention {
                Convention::Hyperbolic => {
                    VertexWeights::symmetric((eta - u).sinh(), u.sinh(), eta.sinh())?
                }
                Convention::Trigonometric => {
                    VertexWeights::symmetric((eta - u).sin(), u.sin(), eta.sin())?
                }
            };
            prepared.push((n, m, format!("baxter draw={draw}"), w));
        }
        for draw in 0..config.grids.draws {
            let mut pick = || rng.gen_range(0.2..2.0);
            let w = VertexWeights::new(pick(), pick(), pick(), pick(), pick(), pick())?;
            prepared.push((n, m, format!("generic draw={draw}"), w));
        }
    }
    let tol = config.tolerances.partition_rel;
    let mut cases = run_cases(prepared, |(n, m, tag, w)| {
        let inputs = |zb: f64, zt: f64, rel: f64| {
            json!({
                "n_cols": n, "n_rows": m,
                "a1": w.a1, "a2": w.a2, "b1": w.b1, "b2": w.b2, "c1": w.c1, "c2": w.c2,
                "z_brute": zb, "z_transfer": zt, "rel_err": rel,
            })
        };
        let lattice = match LatticeConfig::new(*n, *m, *w) {
            Ok(l) => l,
            Err(e) => {
                return CaseRecord::failed(
                    format!("partition {n}x{m} {tag}"),
                    json!({"n_cols": n, "n_rows": m}),
                    tol,
                    e.to_string(),
                )
            }
        };
        match (lattice::partition_brute(&lattice), lattice::partition_transfer(&lattice)) {
            (Ok(zb), Ok(zt)) => {
                let rel = (zb - zt).abs() / zb.abs().max(1e-300);
                CaseRecord::checked(format!("partition {n}x{m} {tag}"), inputs(zb, zt, rel), rel, tol)
            }
            (Err(e), _) | (_, Err(e)) => CaseRecord::failed(
                format!("partition {n}x{m} {tag}"),
                json!({"n_cols": n, "n_rows": m}),
                tol,
                e.to_string(),
            ),
        }
    });
    // Semigrand sector decomposition at V = 0.4.
    for (n, m) in [(2usize, 2usize), (3, 2), (2, 3)] {
        let mut pick = || rng.gen_range(0.2..2.0);
        let base = VertexWeights::new(pick(), pick(), pick(), pick(), pick(), pick())?;
        let report = lattice::semigrand_decomposition(&base, 0.4, n, m)?;
        cases.push(CaseRecord::checked(
            format!("semigrand {n}x{m} V=0.4"),
            json!({
                "n_cols": n, "n_rows": m, "v_field": 0.4,
                "z_full": report.z_full,
                "z_sector_sum": report.z_sector_sum,
                "sector_traces": report.sector_traces,
            }),
            report.rel_err,
            config.tolerances.semigrand,
        ));
    }
    Ok(cases)
}

fn action_angle_suite(config: &RunConfig) -> Result<Vec<CaseRecord>> {
    let mut rng = rng_for(config, Suite::ActionAngle);
    let mut cases = Vec::new();
    // Conjugate-variable structure over the sample grid.
    for k in 0..config.grids.action_angle_grid {
        for eps in [1i32, -1] {
            let x: f64 = if eps == 1 { rng.gen_range(0.0..6.0) } else { rng.gen_range(0.0..0.95) };
            let got = action_angle::conjugate_function_check(x, eps)?;
            let dev = (got - f64::from(eps) / std::f64::consts::PI).abs();
            cases.push(CaseRecord::checked(
                format!("conjugate x={x:.4} eps={eps} sample={k}"),
                json!({"x": x, "epsilon": eps}),
                dev,
                config.tolerances.conjugate,
            ));
        }
    }
    // Scalarization sector identity plus the sampled observables.
    for n in 2..=4usize {
        let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
        let params = model_params(config, v);
        let u = draw_c(&mut rng, 0.4);
        let (_, b2) = action_angle::b_scalarization(u, &params)?;
        let space = params.space()?;
        let blocks = monodromy::build_monodromy(u, &params)?;
        let vac = space.vacuum_index();
        let sector: f64 = (1..=n)
            .map(|k| blocks.b().get(vac - (1usize << (n - k)), vac).norm_sqr())
            .sum();
        let sample = action_angle::action_angle_sample(u, &params, 1)?;
        cases.push(CaseRecord::checked(
            format!("scalarization sector identity N={n}"),
            json!({
                "n_sites": n,
                "u": cnum(u),
                "b_abs2": sample.b_abs2,
                "phi": sample.phi,
                "rho": sample.rho,
                "epsilon": sample.epsilon,
            }),
            (b2 - sector).abs() / b2.max(1.0),
            config.tolerances.scalarization,
        ));
    }
    // Commuting-charge evidence on the integrability-shadow configurations.
    for &n in &config.grids.commute_site_counts {
        let v = draw_inhomogeneities(&mut rng, n, config.grids.inhomogeneity_scale);
        let params = model_params(config, v);
        let grid: Vec<C64> = (0..4).map(|_| draw_c(&mut rng, 0.4)).collect();
        let ev = action_angle::commuting_charges_evidence(&params, &grid, config.tolerances.charges)?;
        cases.push(CaseRecord::checked(
            format!("commuting charges N={n}"),
            json!({"n_sites": n, "grid": ev.grid}),
            ev.max_norm,
            config.tolerances.charges,
        ));
    }
    Ok(cases)
}

/// Run one suite (or the composition of all of them) deterministically.
pub fn run_suite(config: &RunConfig) -> Result<SuiteReport> {
    config.validate()?;
    let start = std::time::Instant::now();
    let cases = match config.suite {
        Suite::Ybe => ybe_suite(config)?,
        Suite::Rtt => rtt_suite(config)?,
        Suite::Commute => commute_suite(config)?,
        Suite::Sixteen => sixteen_suite(config)?,
        Suite::LemmaAudit => lemma_audit_suite(config)?,
        Suite::Bethe => bethe_suite(config, false)?,
        Suite::Eigencheck => bethe_suite(config, true)?,
        Suite::Partition => partition_suite(config)?,
        Suite::ActionAngle => action_angle_suite(config)?,
        Suite::All => {
            let mut combined = Vec::new();
            for suite in Suite::INDIVIDUAL {
                let sub = RunConfig { suite, ..config.clone() };
                let report = run_suite(&sub)?;
                for mut case in report.cases {
                    case.label = format!("{}/{}", suite.name(), case.label);
                    combined.push(case);
                }
            }
            combined
        }
    };
    let wall = start.elapsed().as_millis() as u64;
    Ok(SuiteReport::assemble(config.suite, config, cases, wall))
}

/// Serialize a report as pretty JSON or CSV.
pub fn emit_report(report: &SuiteReport, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)
                .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        OutputFormat::Csv => {
            let mut keys: Vec<String> = Vec::new();
            for case in &report.cases {
                if let Value::Object(map) = &case.inputs {
                    for key in map.keys() {
                        if !keys.contains(key) {
                            keys.push(key.clone());
                        }
                    }
                }
            }
            keys.sort();
            let mut out = String::new();
            out.push_str("suite,case,label,residual,tolerance,pass,error");
            for key in &keys {
                out.push(',');
                out.push_str(key);
            }
            out.push('\n');
            for case in &report.cases {
                let residual = case.residual.map_or(String::new(), |r| format!("{r:e}"));
                let error = case.error.clone().unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{:e},{},{}",
                    report.suite,
                    case.index,
                    csv_quote(&case.label),
                    residual,
                    case.tolerance,
                    case.pass,
                    csv_quote(&error),
                ));
                for key in &keys {
                    out.push(',');
                    if let Value::Object(map) = &case.inputs {
                        if let Some(v) = map.get(key) {
                            out.push_str(&csv_quote(&compact_value(v)));
                        }
                    }
                }
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
    }
}

fn compact_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
