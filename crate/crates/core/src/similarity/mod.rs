//! Statistical similarity between an original and a synthetic dataset.
//!
//! Scores in `[0, 1]` are similarities (1 = indistinguishable); the
//! Wasserstein distance and the basic-statistics differences are distances
//! (0 = identical). Everything is computed on data normalized against the
//! original schema.

mod correlation;
mod information;
mod ks;
mod sinkhorn;
mod stats;
mod wasserstein;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use correlation::{
    average_ranks, correlation_matrix, correlation_similarity, pearson, similarity_from_matrices, spearman,
    CorrelationMethod, LabeledMatrix,
};
pub use information::{
    js_divergence, js_per_column, js_similarity, nmi_matrices, nmi_matrix, nmi_similarity, nmi_similarity_from,
    normalized_mutual_information,
};
pub use ks::{ks_per_column, ks_similarity, ks_statistic, ks_statistic_categorical};
pub use sinkhorn::{cost_matrix, sinkhorn, sinkhorn_between, sinkhorn_distance, SinkhornParams, SinkhornSolution};
pub use stats::{basic_stats, basic_stats_diff, column_stats, stats_diff_from, BasicStats, ColumnStats, StatsDiff};
pub use wasserstein::{wasserstein_1d, wasserstein_exact_1d, wasserstein_per_column, wasserstein_sampled};

use crate::error::Result;
use crate::outcome::Outcome;
use crate::rng::derive_seed;
use crate::tabular::{normalize, Dataset, DEFAULT_BINS};

/// Row count above which `auto` switches to Sinkhorn.
pub const SINKHORN_AUTO_ROWS: usize = 20_000;
pub const DEFAULT_WASSERSTEIN_SAMPLE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WassersteinMode {
    #[default]
    #[serde(rename = "auto")]
    Auto,
    #[serde(rename = "exact_1d")]
    Exact1d,
    #[serde(rename = "sampled")]
    Sampled,
    #[serde(rename = "sinkhorn")]
    Sinkhorn,
}

impl WassersteinMode {
    pub fn resolve(self, n_rows: usize) -> WassersteinMode {
        match self {
            WassersteinMode::Auto if n_rows > SINKHORN_AUTO_ROWS => WassersteinMode::Sinkhorn,
            WassersteinMode::Auto => WassersteinMode::Exact1d,
            m => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    pub bins: usize,
    pub wasserstein_mode: WassersteinMode,
    pub sample_size: usize,
    pub sinkhorn: SinkhornParams,
    /// Explicit orders for categorical columns; such columns join the
    /// Spearman correlation as ordinal codes.
    pub category_order: BTreeMap<String, Vec<String>>,
    /// Also compute every Wasserstein variant for side-by-side comparison.
    pub compare_wasserstein_modes: bool,
    pub seed: u64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            bins: DEFAULT_BINS,
            wasserstein_mode: WassersteinMode::Auto,
            sample_size: DEFAULT_WASSERSTEIN_SAMPLE,
            sinkhorn: SinkhornParams::default(),
            category_order: BTreeMap::new(),
            compare_wasserstein_modes: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinModes {
    pub exact_1d: Outcome<f64>,
    pub sampled: Outcome<f64>,
    pub sinkhorn: Outcome<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDetail {
    pub ks_per_column: Vec<(String, f64)>,
    pub js_per_column: Vec<(String, f64)>,
    pub wasserstein_per_column: Vec<(String, f64)>,
    pub pearson: Option<(LabeledMatrix, LabeledMatrix)>,
    pub spearman: Option<(LabeledMatrix, LabeledMatrix)>,
    pub nmi: Option<(LabeledMatrix, LabeledMatrix)>,
    pub column_stats: Vec<ColumnStats>,
    pub wasserstein_modes: Option<WassersteinModes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub wasserstein: Outcome<f64>,
    pub wasserstein_mode: WassersteinMode,
    pub ks: Outcome<f64>,
    pub corr_pearson: Outcome<f64>,
    pub corr_spearman: Outcome<f64>,
    pub nmi: Outcome<f64>,
    pub js: Outcome<f64>,
    pub stats_diff: Outcome<StatsDiff>,
    pub detail: SimilarityDetail,
}

fn mean(per: &[(String, f64)]) -> f64 {
    per.iter().map(|p| p.1).sum::<f64>() / per.len() as f64
}

fn run_mode(mode: WassersteinMode, o: &Dataset, s: &Dataset, config: &SimilarityConfig) -> Result<f64> {
    match mode {
        WassersteinMode::Auto | WassersteinMode::Exact1d => wasserstein_exact_1d(o, s),
        WassersteinMode::Sampled => wasserstein_sampled(o, s, config.sample_size, derive_seed(config.seed, 21)),
        WassersteinMode::Sinkhorn => sinkhorn_distance(o, s, &config.sinkhorn, derive_seed(config.seed, 22)),
    }
}

/// Runs every similarity metric. Failures of individual metrics are reported
/// as skipped entries; only an unusable pair of datasets is an error.
pub fn evaluate(original: &Dataset, synthetic: &Dataset, config: &SimilarityConfig) -> Result<SimilarityReport> {
    let reference = original.schema().clone();
    let o = normalize(original, &reference)?;
    let s = normalize(&synthetic.align_to(&reference)?, &reference)?;

    let mode = config.wasserstein_mode.resolve(original.n_rows());
    let ws_cols = wasserstein_per_column(&o, &s);
    let (wasserstein, modes) = if config.compare_wasserstein_modes {
        let modes = WassersteinModes {
            exact_1d: Outcome::from_ref(&ws_cols, |p| Ok(mean(p))),
            sampled: run_mode(WassersteinMode::Sampled, &o, &s, config).into(),
            sinkhorn: run_mode(WassersteinMode::Sinkhorn, &o, &s, config).into(),
        };
        let chosen = match mode {
            WassersteinMode::Sampled => modes.sampled.clone(),
            WassersteinMode::Sinkhorn => modes.sinkhorn.clone(),
            _ => modes.exact_1d.clone(),
        };
        (chosen, Some(modes))
    } else if matches!(mode, WassersteinMode::Exact1d | WassersteinMode::Auto) {
        (Outcome::from_ref(&ws_cols, |p| Ok(mean(p))), None)
    } else {
        (run_mode(mode, &o, &s, config).into(), None)
    };

    let ks_cols = ks_per_column(&o, &s);
    let js_cols = js_per_column(&o, &s, config.bins);
    let pearson = correlation_matrix(&o, CorrelationMethod::Pearson, &config.category_order)
        .and_then(|a| Ok((a, correlation_matrix(&s, CorrelationMethod::Pearson, &config.category_order)?)));
    let spearman = correlation_matrix(&o, CorrelationMethod::Spearman, &config.category_order)
        .and_then(|a| Ok((a, correlation_matrix(&s, CorrelationMethod::Spearman, &config.category_order)?)));
    let nmi = nmi_matrices(&o, &s, config.bins);
    let cstats = column_stats(&o, &s);

    let pair_score = |m: &Result<(LabeledMatrix, LabeledMatrix)>| -> Outcome<f64> {
        Outcome::from_ref(m, |(a, b)| similarity_from_matrices(a, b))
    };
    Ok(SimilarityReport {
        wasserstein,
        wasserstein_mode: mode,
        ks: Outcome::from_ref(&ks_cols, |p| Ok(mean(p))),
        corr_pearson: pair_score(&pearson),
        corr_spearman: pair_score(&spearman),
        nmi: Outcome::from_ref(&nmi, |(a, b)| nmi_similarity_from(a, b)),
        js: Outcome::from_ref(&js_cols, |p| Ok(mean(p))),
        stats_diff: Outcome::from_ref(&cstats, |c| Ok(stats_diff_from(c))),
        detail: SimilarityDetail {
            ks_per_column: ks_cols.unwrap_or_default(),
            js_per_column: js_cols.unwrap_or_default(),
            wasserstein_per_column: ws_cols.unwrap_or_default(),
            pearson: pearson.ok(),
            spearman: spearman.ok(),
            nmi: nmi.ok(),
            column_stats: cstats.unwrap_or_default(),
            wasserstein_modes: modes,
        },
    })
}
