//! Evaluation runs driven by a JSON configuration, and their reports.

mod emit;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use emit::{emit_plot_data, emit_report, format_risk, format_trimmed, render_json, render_markdown, ReportFormat};

use crate::attack_privacy::{
    inference_risk, linkability_risk, singling_out_risk, AuxSplit, RiskEstimate, SinglingOutMode,
    DEFAULT_INFERENCE_TOLERANCE, DEFAULT_N_ATTACKS,
};
use crate::distance_privacy::{self, DistanceCaps, DistancePrivacyReport};
use crate::error::{Error, Result};
use crate::ml_utility::{tstr_compare, Learner, UtilityReport};
use crate::outcome::Outcome;
use crate::rng::derive_seed;
use crate::similarity::{self, SimilarityConfig, SimilarityReport, SinkhornParams, WassersteinMode};
use crate::tabular::{load_csv, sample_rows, CsvOptions, Dataset, Schema, DEFAULT_BINS};

/// Row caps for the expensive metrics on large inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LargeDataPolicy {
    /// Caps apply when the original has more rows than this.
    pub threshold_rows: usize,
    /// Rows drawn from each side for the three attacks.
    pub attack_rows: usize,
    /// Rows per side for NNAA.
    pub nnaa_rows: usize,
}

impl Default for LargeDataPolicy {
    fn default() -> Self {
        LargeDataPolicy {
            threshold_rows: 10_000,
            attack_rows: 1_000,
            nnaa_rows: 5_000,
        }
    }
}

fn default_n_attacks() -> usize {
    DEFAULT_N_ATTACKS
}
fn default_n_neighbors() -> usize {
    1
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_sample_size() -> usize {
    similarity::DEFAULT_WASSERSTEIN_SAMPLE
}
fn default_tolerance() -> f64 {
    DEFAULT_INFERENCE_TOLERANCE
}
fn default_learners() -> Vec<Learner> {
    vec![Learner::default()]
}
fn default_true() -> bool {
    true
}
fn default_delimiter() -> char {
    ','
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub original_path: PathBuf,
    /// Optional JSON schema; inferred from the original otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_path: Option<PathBuf>,
    /// Model name to synthetic CSV.
    pub synthetic_paths: BTreeMap<String, PathBuf>,
    /// Quasi-identifiers for DiSCO and repU.
    pub keys: Vec<String>,
    pub target: String,
    /// Column halves for the linkability attack; defaults to the non-target
    /// columns split in schema order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_split: Option<AuxSplit>,
    /// Secret for the inference attack; defaults to the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
    /// Columns known to the inference attacker; defaults to all others.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference_aux: Option<Vec<String>>,
    #[serde(default = "default_n_attacks")]
    pub n_attacks: usize,
    #[serde(default = "default_n_neighbors")]
    pub n_neighbors: usize,
    #[serde(default)]
    pub singling_out_mode: SinglingOutMode,
    #[serde(default = "default_tolerance")]
    pub inference_tolerance: f64,
    /// Also attack every column in turn as the secret, the rest as auxiliary.
    #[serde(default)]
    pub inference_sweep: bool,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub wasserstein_mode: WassersteinMode,
    #[serde(default = "default_sample_size")]
    pub wasserstein_sample_size: usize,
    #[serde(default = "default_true")]
    pub compare_wasserstein_modes: bool,
    #[serde(default)]
    pub sinkhorn: SinkhornParams,
    #[serde(default)]
    pub category_order: BTreeMap<String, Vec<String>>,
    #[serde(default = "default_learners")]
    pub learners: Vec<Learner>,
    #[serde(default)]
    pub large_data: LargeDataPolicy,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

impl EvalConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.original_path);
        if let Some(p) = cfg.schema_path.as_mut() {
            resolve(p);
        }
        for p in cfg.synthetic_paths.values_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.output_dir.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn secret(&self) -> &str {
        self.secret.as_deref().unwrap_or(&self.target)
    }

    pub fn aux_split_for(&self, schema: &Schema) -> AuxSplit {
        self.aux_split.clone().unwrap_or_else(|| {
            let cols: Vec<String> = schema.names().filter(|c| *c != self.target).map(str::to_string).collect();
            let half = cols.len().div_ceil(2);
            AuxSplit {
                side_a: cols[..half].to_vec(),
                side_b: cols[half..].to_vec(),
            }
        })
    }

    pub fn inference_aux_for(&self, schema: &Schema) -> Vec<String> {
        self.inference_aux.clone().unwrap_or_else(|| {
            schema.names().filter(|c| *c != self.secret()).map(str::to_string).collect()
        })
    }

    fn csv_options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::invalid("delimiter must be a single ASCII character"));
        }
        Ok(CsvOptions { delimiter: self.delimiter as u8 })
    }

    /// Checks the settings that do not need the data.
    pub fn validate_settings(&self) -> Result<()> {
        if self.keys.is_empty() {
            return Err(Error::invalid("at least one quasi-identifier is required"));
        }
        if self.keys.contains(&self.target) {
            return Err(Error::invalid(format!("target `{}` is also a key", self.target)));
        }
        if self.n_attacks == 0 || self.n_neighbors == 0 {
            return Err(Error::invalid("n_attacks and n_neighbors must be at least 1"));
        }
        if self.bins < 2 {
            return Err(Error::invalid("bins must be at least 2"));
        }
        if self.wasserstein_sample_size < 2 {
            return Err(Error::invalid("wasserstein_sample_size must be at least 2"));
        }
        if !(self.sinkhorn.epsilon > 0.0) || self.sinkhorn.max_iter == 0 || self.sinkhorn.cap < 2 {
            return Err(Error::invalid("sinkhorn needs epsilon > 0, max_iter >= 1 and cap >= 2"));
        }
        if !(self.inference_tolerance >= 0.0) {
            return Err(Error::invalid("inference_tolerance must be non-negative"));
        }
        for l in &self.learners {
            l.validate()?;
        }
        self.csv_options()?;
        Ok(())
    }

    /// Checks that every referenced column exists in `schema`.
    pub fn validate_columns(&self, schema: &Schema) -> Result<()> {
        let mut referenced: Vec<&str> = self.keys.iter().map(String::as_str).collect();
        referenced.push(&self.target);
        referenced.push(self.secret());
        if let Some(a) = &self.aux_split {
            referenced.extend(a.side_a.iter().chain(&a.side_b).map(String::as_str));
        }
        if let Some(a) = &self.inference_aux {
            referenced.extend(a.iter().map(String::as_str));
        }
        referenced.extend(self.category_order.keys().map(String::as_str));
        for c in referenced {
            schema.index_of(c)?;
        }
        let aux = self.aux_split_for(schema);
        if aux.side_a.is_empty() || aux.side_b.is_empty() {
            return Err(Error::invalid("linkability needs at least two non-target columns"));
        }
        Ok(())
    }
}

/// What the large-data policy did for this run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedCaps {
    pub large_data: bool,
    pub attack_rows: Option<usize>,
    pub nnaa_rows: Option<usize>,
    pub sinkhorn_rows: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub config: EvalConfig,
    pub original_rows: usize,
    pub original_columns: Vec<String>,
    pub caps: AppliedCaps,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub rows: usize,
    pub distance_privacy: Outcome<DistancePrivacyReport>,
    pub singling_out: Outcome<RiskEstimate>,
    pub linkability: Outcome<RiskEstimate>,
    pub inference: Outcome<RiskEstimate>,
    /// Keyed by secret column; filled only with `inference_sweep`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inference_sweep: BTreeMap<String, Outcome<RiskEstimate>>,
    pub similarity: Outcome<SimilarityReport>,
    /// Keyed by learner name.
    pub utility: BTreeMap<String, Outcome<UtilityReport>>,
}

/// Wall-clock seconds per model and stage. Kept apart from the report so
/// that reports of identical runs are byte-identical.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub models: BTreeMap<String, BTreeMap<String, f64>>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metadata: RunMetadata,
    pub models: BTreeMap<String, ModelReport>,
    #[serde(skip)]
    pub timings: Timings,
}

/// Loads the original and every synthetic dataset, checking the
/// configuration against the original's schema before anything runs.
pub fn load_inputs(config: &EvalConfig) -> Result<(Dataset, BTreeMap<String, Dataset>)> {
    config.validate_settings()?;
    if config.synthetic_paths.is_empty() {
        return Err(Error::invalid("no synthetic datasets configured"));
    }
    let opts = config.csv_options()?;
    let schema = match &config.schema_path {
        Some(p) => Some(Schema::from_json_file(p)?),
        None => None,
    };
    let original = load_csv(&config.original_path, schema.as_ref(), &opts)?;
    config.validate_columns(original.schema())?;
    let mut synthetic = BTreeMap::new();
    for (name, path) in &config.synthetic_paths {
        let data = load_csv(path, Some(original.schema()), &opts).map_err(|e| match e {
            Error::SchemaMismatch(m) => Error::SchemaMismatch(format!("synthetic `{name}`: {m}")),
            other => other,
        })?;
        synthetic.insert(name.clone(), data);
    }
    Ok((original, synthetic))
}

fn caps_for(config: &EvalConfig, n_rows: usize) -> AppliedCaps {
    let large = n_rows > config.large_data.threshold_rows;
    let mut notes = Vec::new();
    let attack_rows = large.then_some(config.large_data.attack_rows);
    let nnaa_rows = large.then_some(config.large_data.nnaa_rows);
    if let Some(a) = attack_rows {
        notes.push(format!("attacks run on {a} sampled rows of each dataset"));
    }
    if let Some(c) = nnaa_rows {
        notes.push(format!("NNAA runs on at most {c} sampled rows per side"));
    }
    if n_rows > config.sinkhorn.cap {
        notes.push(format!("Sinkhorn runs on at most {} sampled rows per side", config.sinkhorn.cap));
    }
    AppliedCaps {
        large_data: large,
        attack_rows,
        nnaa_rows,
        sinkhorn_rows: config.sinkhorn.cap,
        notes,
    }
}

fn maybe_sample(data: &Dataset, cap: Option<usize>, seed: u64) -> Result<Dataset> {
    match cap {
        Some(c) if data.n_rows() > c => sample_rows(data, c, false, seed),
        _ => Ok(data.clone()),
    }
}

/// Privacy, then similarity, then utility for one synthetic dataset.
pub fn evaluate_model(
    config: &EvalConfig,
    caps: &AppliedCaps,
    original: &Dataset,
    name: &str,
    synthetic: &Dataset,
) -> (ModelReport, BTreeMap<String, f64>) {
    let seed = config.seed;
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &str, timings: &mut BTreeMap<String, f64>| {
        timings.insert(stage.to_string(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };

    let distance: Outcome<_> = distance_privacy::evaluate(
        original,
        synthetic,
        &config.keys,
        &config.target,
        config.bins,
        derive_seed(seed, 1),
        DistanceCaps { nnaa_rows: caps.nnaa_rows },
    )
    .into();
    lap("distance_privacy", &mut timings);

    let attack_data = maybe_sample(original, caps.attack_rows, derive_seed(seed, 2))
        .and_then(|o| Ok((o, maybe_sample(synthetic, caps.attack_rows, derive_seed(seed, 3))?)));
    let (singling_out, linkability, inference) = match &attack_data {
        Ok((o, s)) => (
            singling_out_risk(o, s, config.n_attacks, config.singling_out_mode, derive_seed(seed, 4)).into(),
            linkability_risk(
                o,
                s,
                &config.aux_split_for(original.schema()),
                config.n_attacks,
                config.n_neighbors,
                derive_seed(seed, 5),
            )
            .into(),
            inference_risk(
                o,
                s,
                &config.inference_aux_for(original.schema()),
                config.secret(),
                config.n_attacks,
                config.inference_tolerance,
                derive_seed(seed, 6),
            )
            .into(),
        ),
        Err(e) => (Outcome::from_error(e), Outcome::from_error(e), Outcome::from_error(e)),
    };
    let mut inference_sweep = BTreeMap::new();
    if config.inference_sweep {
        let names: Vec<String> = original.schema().names().map(str::to_string).collect();
        for (i, secret) in names.iter().enumerate() {
            let outcome = match &attack_data {
                Ok((o, s)) => {
                    let aux: Vec<String> = names.iter().filter(|c| *c != secret).cloned().collect();
                    let sweep_seed = derive_seed(derive_seed(seed, 9), i as u64);
                    inference_risk(o, s, &aux, secret, config.n_attacks, config.inference_tolerance, sweep_seed).into()
                }
                Err(e) => Outcome::from_error(e),
            };
            inference_sweep.insert(secret.clone(), outcome);
        }
    }
    lap("attacks", &mut timings);

    let sim_config = SimilarityConfig {
        bins: config.bins,
        wasserstein_mode: config.wasserstein_mode,
        sample_size: config.wasserstein_sample_size,
        sinkhorn: config.sinkhorn,
        category_order: config.category_order.clone(),
        compare_wasserstein_modes: config.compare_wasserstein_modes,
        seed: derive_seed(seed, 7),
    };
    let similarity: Outcome<_> = similarity::evaluate(original, synthetic, &sim_config).into();
    lap("similarity", &mut timings);

    let mut utility = BTreeMap::new();
    for learner in &config.learners {
        let mut key = learner.kind.name().to_string();
        let mut i = 2;
        while utility.contains_key(&key) {
            key = format!("{}_{i}", learner.kind.name());
            i += 1;
        }
        let learner = Learner { seed: learner.seed, ..learner.clone() };
        utility.insert(
            key,
            tstr_compare(original, synthetic, &config.target, &learner, derive_seed(seed, 8)).into(),
        );
    }
    lap("utility", &mut timings);

    (
        ModelReport {
            name: name.to_string(),
            rows: synthetic.n_rows(),
            distance_privacy: distance,
            singling_out,
            linkability,
            inference,
            inference_sweep,
            similarity,
            utility,
        },
        timings,
    )
}

/// Runs every configured metric over every synthetic dataset. Metric
/// failures become skipped entries; only bad configuration or input files
/// are errors.
pub fn run_evaluation(config: &EvalConfig) -> Result<MetricReport> {
    let start = Instant::now();
    let (original, synthetic) = load_inputs(config)?;
    let load_seconds = start.elapsed().as_secs_f64();
    run_on(config, &original, &synthetic, load_seconds, start)
}

/// [`run_evaluation`] on datasets that are already loaded.
pub fn run_on_datasets(
    config: &EvalConfig,
    original: &Dataset,
    synthetic: &BTreeMap<String, Dataset>,
) -> Result<MetricReport> {
    config.validate_settings()?;
    if synthetic.is_empty() {
        return Err(Error::invalid("no synthetic datasets given"));
    }
    config.validate_columns(original.schema())?;
    let start = Instant::now();
    run_on(config, original, synthetic, 0.0, start)
}

fn run_on(
    config: &EvalConfig,
    original: &Dataset,
    synthetic: &BTreeMap<String, Dataset>,
    load_seconds: f64,
    start: Instant,
) -> Result<MetricReport> {
    let caps = caps_for(config, original.n_rows());
    for note in &caps.notes {
        info!("{note}");
    }
    let aligned = synthetic
        .iter()
        .map(|(name, d)| Ok((name, d.align_to(original.schema())?)))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(ModelReport, BTreeMap<String, f64>)> = aligned
        .par_iter()
        .map(|(name, data)| {
            info!("evaluating `{name}`");
            evaluate_model(config, &caps, original, name, data)
        })
        .collect();

    let mut models = BTreeMap::new();
    let mut timings = Timings {
        load_seconds,
        ..Default::default()
    };
    for (report, t) in results {
        timings.models.insert(report.name.clone(), t);
        models.insert(report.name.clone(), report);
    }
    timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(MetricReport {
        metadata: RunMetadata {
            tool: "tabeval".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            // where the report lands is not part of the result
            config: EvalConfig {
                output_dir: None,
                ..config.clone()
            },
            original_rows: original.n_rows(),
            original_columns: original.schema().names().map(str::to_string).collect(),
            caps,
            notes: vec![
                "JS is 1 minus the base-2 Jensen-Shannon divergence".into(),
                "the Wasserstein value is the mean over numeric columns in exact_1d and sampled modes".into(),
                "TSTR trains on the synthetic data resized to the real training size".into(),
            ],
        },
        models,
        timings,
    })
}
