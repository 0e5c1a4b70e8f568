//! Experiment runner: preprocess once, then fit and score every
//! (encoding, model) cell on the same split.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::encoding::{embed_matrix, AngleMap, EncodingKind, EncodingScheme, Quantizer, ReadoutMode};
use crate::matrix::FeatureMatrix;
use crate::metrics::{MetricReport, DEFAULT_THRESHOLD};
use crate::models::{fit, ModelSpec};
use crate::pipeline::{prepare, read_csv, PipelineConfig, PipelineError, PreprocessReport, Schema};
use crate::qsim::DEFAULT_MAX_QUBITS;
use crate::scale::MinMaxScaler;

/// Widest readout a cell may produce; larger ones fail the cell instead of
/// exhausting memory.
pub const MAX_READOUT_WIDTH: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("data error: {0}")]
    Data(#[from] PipelineError),
    #[error("no results to report")]
    EmptyResults,
}

impl BenchError {
    /// Process exit code: 1 for configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::EmptyResults => 1,
            BenchError::Io { .. } | BenchError::Data(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaChoice {
    Named(String),
    Custom(Schema),
}

impl Default for SchemaChoice {
    fn default() -> Self {
        SchemaChoice::Named("telco".into())
    }
}

impl SchemaChoice {
    pub fn resolve(&self) -> Result<Schema> {
        match self {
            SchemaChoice::Named(n) if n == "telco" => Ok(Schema::telco()),
            SchemaChoice::Named(n) => Err(BenchError::Config(format!("unknown schema {n:?}"))),
            SchemaChoice::Custom(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicalTag {
    #[serde(rename = "classical")]
    Classical,
}

/// One column of the matrix: the PCA features as-is, or an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EncodingChoice {
    Classical(ClassicalTag),
    Quantum(EncodingScheme),
}

impl EncodingChoice {
    pub const CLASSICAL: EncodingChoice = EncodingChoice::Classical(ClassicalTag::Classical);

    pub fn name(&self) -> &'static str {
        match self {
            EncodingChoice::Classical(_) => "classical",
            EncodingChoice::Quantum(s) => s.name(),
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub schema: SchemaChoice,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    pub encodings: Vec<EncodingChoice>,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Fit/predict runs per cell; timings are the median.
    #[serde(default = "one")]
    pub repeat: usize,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.encodings.is_empty() || self.models.is_empty() {
            return Err(BenchError::Config("need at least one encoding and one model".into()));
        }
        if self.repeat == 0 {
            return Err(BenchError::Config("repeat must be >= 1".into()));
        }
        let p = &self.pipeline;
        if !(0.0..=1.0).contains(&p.correlation_threshold) {
            return Err(BenchError::Config(format!("correlation_threshold {} not in [0, 1]", p.correlation_threshold)));
        }
        if p.vif_threshold.is_nan() || p.vif_threshold <= 1.0 {
            return Err(BenchError::Config(format!("vif_threshold {} must be > 1", p.vif_threshold)));
        }
        if !(p.split_ratio > 0.0 && p.split_ratio < 1.0) {
            return Err(BenchError::Config(format!("split_ratio {} not in (0, 1)", p.split_ratio)));
        }
        for m in &self.models {
            m.validate().map_err(|e| BenchError::Config(format!("{}: {e}", m.name())))?;
        }
        for e in &self.encodings {
            if let EncodingChoice::Quantum(s) = e {
                if matches!(s.kind, EncodingKind::Superposition) {
                    return Err(BenchError::Config("superposition encoding cannot embed feature rows".into()));
                }
            }
        }
        self.schema.resolve()?;
        Ok(())
    }

    /// Overrides the split, undersampling and model seeds.
    pub fn set_seed(&mut self, seed: u64) {
        self.pipeline.split_seed = seed;
        self.pipeline.undersample_seed = seed;
        for m in &mut self.models {
            m.seed = seed;
        }
    }

    /// SHA-256 of the config's JSON form.
    pub fn hash(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| BenchError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Reads a config file, or the manifest config of a persisted run.
/// Relative dataset and output paths are taken relative to the file's
/// directory.
pub fn load_config(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg: BenchConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(first) => match serde_json::from_str::<BenchRun>(&text) {
            Ok(run) => run.manifest.config,
            Err(_) => return Err(BenchError::Config(format!("{}: {first}", path.display()))),
        },
    };
    if let Some(dir) = path.parent() {
        if cfg.dataset.is_relative() {
            cfg.dataset = dir.join(&cfg.dataset);
        }
        if let Some(out) = cfg.output_dir.as_mut().filter(|o| o.is_relative()) {
            *out = dir.join(&*out);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub encode_ms: f64,
    pub fit_ms: f64,
    pub predict_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub split: u64,
    pub undersample: u64,
    pub model: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub encoding: String,
    pub model: String,
    /// `None` when the cell failed; see `error`.
    pub metrics: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings: Timings,
    pub seeds: Seeds,
    pub dim_in: usize,
    pub dim_out: usize,
    pub iterations: usize,
    pub converged: bool,
    pub split_checksum: String,
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: BenchConfig,
    pub config_hash: String,
    pub dataset_sha256: String,
    pub split_checksum: String,
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub manifest: Manifest,
    pub preprocess: PreprocessReport,
    pub results: Vec<RunResult>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn readout_width(scheme: &EncodingScheme, d: usize, quantizer: Option<&Quantizer>) -> usize {
    let n_qubits = match scheme.kind {
        EncodingKind::Basis { .. } => quantizer.map_or(d, Quantizer::n_qubits),
        EncodingKind::Angle { .. } => d,
        EncodingKind::Amplitude | EncodingKind::Superposition => d.max(1).next_power_of_two().trailing_zeros() as usize,
    };
    match scheme.readout() {
        ReadoutMode::ZExpectations => n_qubits,
        ReadoutMode::ProbabilityVector => 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX),
        ReadoutMode::AmplitudeParts => 1usize.checked_shl(n_qubits as u32 + 1).unwrap_or(usize::MAX),
    }
}

/// Encodes both splits with `scheme`. Scalers and quantizers see only the
/// training rows.
pub fn encode_split(
    scheme: &EncodingScheme,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
) -> std::result::Result<(FeatureMatrix, FeatureMatrix), String> {
    let (train, test, quantizer) = match scheme.kind {
        EncodingKind::Basis { bits_per_feature } => {
            let q = Quantizer::fit(train, bits_per_feature, DEFAULT_MAX_QUBITS).map_err(|e| e.to_string())?;
            (train.clone(), test.clone(), Some(q))
        }
        EncodingKind::Angle { map: AngleMap::LinearPi, .. } => {
            let s = MinMaxScaler::fit(train, true);
            (s.transform(train), s.transform(test), None)
        }
        _ => (train.clone(), test.clone(), None),
    };
    let width = readout_width(scheme, train.cols(), quantizer.as_ref());
    if width > MAX_READOUT_WIDTH {
        return Err(format!(
            "{} readout would have {width} features (limit {MAX_READOUT_WIDTH}); use z_expectations",
            scheme.name()
        ));
    }
    let a = embed_matrix(&train, scheme, quantizer.as_ref()).map_err(|e| e.to_string())?;
    let b = embed_matrix(&test, scheme, quantizer.as_ref()).map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn encode_timed(
    scheme: &EncodingScheme,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    repeat: usize,
) -> std::result::Result<(FeatureMatrix, FeatureMatrix, f64), String> {
    let mut times = Vec::with_capacity(repeat);
    let mut out = None;
    for _ in 0..repeat {
        let t = Instant::now();
        let pair = encode_split(scheme, train, test)?;
        times.push(ms_since(t));
        out.get_or_insert(pair);
    }
    let (a, b) = out.expect("repeat >= 1");
    Ok((a, b, median(&mut times)))
}

struct CellOutcome {
    metrics: MetricReport,
    fit_ms: f64,
    predict_ms: f64,
    iterations: usize,
    converged: bool,
}

fn run_cell(spec: &ModelSpec, train: &FeatureMatrix, test: &FeatureMatrix, repeat: usize) -> std::result::Result<CellOutcome, String> {
    let mut fit_times = Vec::with_capacity(repeat);
    let mut predict_times = Vec::with_capacity(repeat);
    let mut first = None;
    for _ in 0..repeat {
        let t = Instant::now();
        let model = fit(spec, train).map_err(|e| e.to_string())?;
        fit_times.push(ms_since(t));
        let t = Instant::now();
        let scores = model.predict_proba(test).map_err(|e| e.to_string())?;
        predict_times.push(ms_since(t));
        if first.is_none() {
            let metrics = MetricReport::evaluate(test.labels(), &scores, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
            first = Some((metrics, model.meta.iterations, model.meta.converged));
        }
    }
    let (metrics, iterations, converged) = first.expect("repeat >= 1");
    Ok(CellOutcome {
        metrics,
        fit_ms: median(&mut fit_times),
        predict_ms: median(&mut predict_times),
        iterations,
        converged,
    })
}

/// Loads the dataset, preprocesses once and runs every cell.
pub fn run_matrix(config: &BenchConfig) -> Result<BenchRun> {
    config.validate()?;
    let schema = config.schema.resolve()?;
    let bytes = std::fs::read(&config.dataset)
        .map_err(|e| BenchError::Io { path: config.dataset.display().to_string(), message: e.to_string() })?;
    let dataset = read_csv(&bytes[..], &schema)?;
    let prepared = prepare(&dataset, &config.pipeline)?;
    let checksum = prepared.report.split_checksum.clone();
    let (train, test) = (&prepared.train, &prepared.test);

    let mut results = Vec::with_capacity(config.encodings.len() * config.models.len());
    for enc in &config.encodings {
        let encoded = match enc {
            EncodingChoice::Classical(_) => Ok((train.clone(), test.clone(), 0.0)),
            EncodingChoice::Quantum(scheme) => encode_timed(scheme, train, test, config.repeat),
        };
        for spec in &config.models {
            let seeds = Seeds {
                split: config.pipeline.split_seed,
                undersample: config.pipeline.undersample_seed,
                model: spec.seed,
            };
            let mut result = RunResult {
                encoding: enc.name().to_string(),
                model: spec.name(),
                metrics: None,
                error: None,
                timings: Timings { encode_ms: 0.0, fit_ms: 0.0, predict_ms: 0.0 },
                seeds,
                dim_in: train.cols(),
                dim_out: 0,
                iterations: 0,
                converged: false,
                split_checksum: checksum.clone(),
                timestamp_unix: now_unix(),
            };
            match &encoded {
                Err(e) => result.error = Some(format!("encoding failed: {e}")),
                Ok((etrain, etest, encode_ms)) => {
                    result.timings.encode_ms = *encode_ms;
                    result.dim_out = etrain.cols();
                    match run_cell(spec, etrain, etest, config.repeat) {
                        Ok(c) => {
                            result.metrics = Some(c.metrics);
                            result.timings.fit_ms = c.fit_ms;
                            result.timings.predict_ms = c.predict_ms;
                            result.iterations = c.iterations;
                            result.converged = c.converged;
                        }
                        Err(e) => result.error = Some(e),
                    }
                }
            }
            results.push(result);
        }
    }

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        config_hash: config.hash(),
        dataset_sha256: hex_digest(&bytes),
        split_checksum: checksum,
        created_unix: now_unix(),
    };
    Ok(BenchRun { manifest, preprocess: prepared.report, results })
}

/// Re-runs a persisted manifest and reports the cells whose MetricReport
/// differs from the recorded one.
pub fn replay(run: &BenchRun) -> Result<Vec<(String, String)>> {
    let again = run_matrix(&run.manifest.config)?;
    Ok(run
        .results
        .iter()
        .zip(&again.results)
        .filter(|(a, b)| a.metrics != b.metrics || a.split_checksum != b.split_checksum)
        .map(|(a, _)| (a.encoding.clone(), a.model.clone()))
        .collect())
}

pub fn save_run(run: &BenchRun, dir: &Path) -> Result<PathBuf> {
    let io = |e: std::io::Error| BenchError::Io { path: dir.display().to_string(), message: e.to_string() };
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join("results.json");
    let text = serde_json::to_string_pretty(run).expect("results serialize");
    std::fs::write(&path, text + "\n").map_err(io)?;
    Ok(path)
}

pub fn load_run(path: &Path) -> Result<BenchRun> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "encoding",
    "model",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "kappa",
    "encode_ms",
    "fit_ms",
    "predict_ms",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn report_row(r: &RunResult) -> Vec<String> {
    let m = r.metrics.as_ref();
    let metric = |f: fn(&MetricReport) -> Option<f64>| opt(m.and_then(f));
    vec![
        r.encoding.clone(),
        r.model.clone(),
        metric(|m| m.accuracy),
        metric(|m| m.precision),
        metric(|m| m.recall),
        metric(|m| m.f1),
        metric(|m| m.roc_auc),
        metric(|m| m.kappa),
        r.timings.encode_ms.to_string(),
        r.timings.fit_ms.to_string(),
        r.timings.predict_ms.to_string(),
    ]
}

/// One row per result in the given order; undefined metrics print as `NA`
/// and floats use the shortest representation that parses back exactly.
pub fn emit_report(results: &[RunResult], format: ReportFormat) -> Result<String> {
    if results.is_empty() {
        return Err(BenchError::EmptyResults);
    }
    let rows: Vec<Vec<String>> = results.iter().map(report_row).collect();
    Ok(match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS).expect("write to memory");
            for r in &rows {
                w.write_record(r).expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
        }
        ReportFormat::Markdown => {
            let mut s = format!("| {} |\n", REPORT_COLUMNS.join(" | "));
            s.push_str(&format!("|{}\n", "---|".repeat(REPORT_COLUMNS.len())));
            for r in &rows {
                s.push_str(&format!("| {} |\n", r.join(" | ")));
            }
            s
        }
    })
}
