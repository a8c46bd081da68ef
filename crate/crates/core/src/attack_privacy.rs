//! Attack-based privacy risks: singling out, linkability and attribute
//! inference.
//!
//! Each attack is simulated a number of times against the original records
//! using only the synthetic data as the attacker's knowledge; the risk is the
//! raw success rate (no control-set correction) with a Wilson score interval.

use std::collections::{BTreeMap, HashSet};

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::neighbors::{encode_clouds, k_nearest};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tabular::{normalize, Column, Dataset};

pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_N_ATTACKS: usize = 500;
pub const DEFAULT_INFERENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub risk: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_attacks: usize,
    pub n_success: usize,
    pub confidence: f64,
}

impl RiskEstimate {
    pub fn from_counts(n_success: usize, n_attacks: usize, confidence: f64) -> Result<Self> {
        if n_attacks == 0 {
            // nothing could be attempted: no evidence of risk
            return Ok(RiskEstimate {
                risk: 0.0,
                ci_low: 0.0,
                ci_high: 1.0,
                n_attacks: 0,
                n_success: 0,
                confidence,
            });
        }
        let (ci_low, ci_high) = wilson_interval(n_success, n_attacks, confidence)?;
        Ok(RiskEstimate {
            risk: n_success as f64 / n_attacks as f64,
            ci_low,
            ci_high,
            n_attacks,
            n_success,
            confidence,
        })
    }
}

/// Wilson score interval for a binomial proportion, clamped to `[0, 1]`.
pub fn wilson_interval(successes: usize, trials: usize, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("Wilson interval needs at least one trial"));
    }
    if successes > trials {
        return Err(Error::invalid(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!("confidence {confidence} not in (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let mut low = (center - half).clamp(0.0, 1.0);
    let mut high = (center + half).clamp(0.0, 1.0);
    if successes == 0 {
        low = 0.0;
    }
    if successes == trials {
        high = 1.0;
    }
    Ok((low, high))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SinglingOutMode {
    Univariate,
    #[default]
    Multivariate,
}

/// Two disjoint column sets held by the linking attacker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSplit {
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
}

impl AuxSplit {
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return Err(Error::invalid("both auxiliary sides need at least one column"));
        }
        let a: HashSet<&String> = self.side_a.iter().collect();
        if let Some(c) = self.side_b.iter().find(|c| a.contains(c)) {
            return Err(Error::invalid(format!(
                "column `{c}` is on both auxiliary sides"
            )));
        }
        for c in self.side_a.iter().chain(&self.side_b) {
            dataset.schema().index_of(c)?;
        }
        Ok(())
    }
}

/// One condition of a singling-out predicate, on normalized data.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Equals { column: usize, label: String },
    NumEquals { column: usize, value: f64 },
    AtMost { column: usize, value: f64 },
    AtLeast { column: usize, value: f64 },
    Within { column: usize, low: f64, high: f64 },
}

impl Condition {
    fn holds(&self, data: &Dataset, row: usize) -> bool {
        let col = |c: usize| &data.columns()[c];
        match self {
            Condition::Equals { column, label } => match col(*column) {
                Column::Categorical(v) => v[row] == *label,
                Column::Numeric(_) => false,
            },
            Condition::NumEquals { column, value } => num(col(*column), row) == Some(*value),
            Condition::AtMost { column, value } => {
                num(col(*column), row).is_some_and(|x| x <= *value)
            }
            Condition::AtLeast { column, value } => {
                num(col(*column), row).is_some_and(|x| x >= *value)
            }
            Condition::Within { column, low, high } => {
                num(col(*column), row).is_some_and(|x| x >= *low && x <= *high)
            }
        }
    }

    fn key(&self) -> String {
        format!("{self:?}")
    }
}

fn num(col: &Column, row: usize) -> Option<f64> {
    match col {
        Column::Numeric(v) => Some(v[row]),
        Column::Categorical(_) => None,
    }
}

/// Conjunction of conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate(pub Vec<Condition>);

impl Predicate {
    /// Number of matching rows, counting no further than `limit`.
    pub fn count_matches(&self, data: &Dataset, limit: usize) -> usize {
        let mut n = 0;
        for r in 0..data.n_rows() {
            if self.0.iter().all(|c| c.holds(data, r)) {
                n += 1;
                if n >= limit {
                    break;
                }
            }
        }
        n
    }

    pub fn singles_out(&self, data: &Dataset) -> bool {
        self.count_matches(data, 2) == 1
    }
}

/// Every single-column predicate that isolates exactly one synthetic record:
/// equality on a value seen once, and `<= min` / `>= max` when the extreme is
/// unique.
pub fn univariate_predicates(synthetic: &Dataset) -> Vec<Predicate> {
    let mut out = Vec::new();
    for (c, col) in synthetic.columns().iter().enumerate() {
        match col {
            Column::Categorical(v) => {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for s in v {
                    *counts.entry(s).or_default() += 1;
                }
                out.extend(counts.into_iter().filter(|(_, n)| *n == 1).map(|(s, _)| {
                    Predicate(vec![Condition::Equals {
                        column: c,
                        label: s.to_string(),
                    }])
                }));
            }
            Column::Numeric(v) => {
                let mut sorted = v.clone();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len();
                let mut i = 0;
                while i < n {
                    let mut j = i;
                    while j + 1 < n && sorted[j + 1] == sorted[i] {
                        j += 1;
                    }
                    if i == j {
                        out.push(Predicate(vec![Condition::NumEquals {
                            column: c,
                            value: sorted[i],
                        }]));
                    }
                    i = j + 1;
                }
                if n >= 1 && (n == 1 || sorted[0] != sorted[1]) {
                    out.push(Predicate(vec![Condition::AtMost {
                        column: c,
                        value: sorted[0],
                    }]));
                }
                if n >= 2 && sorted[n - 1] != sorted[n - 2] {
                    out.push(Predicate(vec![Condition::AtLeast {
                        column: c,
                        value: sorted[n - 1],
                    }]));
                }
            }
        }
    }
    out
}

/// Half-width of the numeric windows in multivariate predicates, on the
/// normalized `[0, 1]` scale.
pub const WINDOW_HALF_WIDTH: f64 = 0.01;

/// Predicate built from one synthetic record over a random subset of 2 to 4
/// columns; numeric conditions are windows around the value.
fn record_predicate(synthetic: &Dataset, row: usize, rng: &mut impl Rng, half_width: f64) -> Predicate {
    let n_cols = synthetic.n_cols();
    let width = rng.random_range(2..=4usize).min(n_cols);
    let cols = index::sample(rng, n_cols, width).into_vec();
    let mut conds: Vec<Condition> = cols
        .into_iter()
        .map(|c| match &synthetic.columns()[c] {
            Column::Categorical(v) => Condition::Equals {
                column: c,
                label: v[row].clone(),
            },
            Column::Numeric(v) => Condition::Within {
                column: c,
                low: v[row] - half_width,
                high: v[row] + half_width,
            },
        })
        .collect();
    conds.sort_by_key(|c| match c {
        Condition::Equals { column, .. }
        | Condition::NumEquals { column, .. }
        | Condition::AtMost { column, .. }
        | Condition::AtLeast { column, .. }
        | Condition::Within { column, .. } => *column,
    });
    Predicate(conds)
}

/// Builds up to `n_attacks` predicates that single out one synthetic record.
pub fn singling_out_predicates(
    synthetic: &Dataset,
    n_attacks: usize,
    mode: SinglingOutMode,
    seed: u64,
) -> Vec<Predicate> {
    match mode {
        SinglingOutMode::Univariate => {
            let mut all = univariate_predicates(synthetic);
            all.shuffle(&mut rng_from_seed(seed));
            all.truncate(n_attacks);
            all
        }
        SinglingOutMode::Multivariate => {
            if synthetic.n_rows() == 0 || synthetic.n_cols() == 0 {
                return Vec::new();
            }
            let max_tries = n_attacks.saturating_mul(20);
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for attempt in 0..max_tries {
                if out.len() == n_attacks {
                    break;
                }
                let mut rng = rng_from_seed(derive_seed(seed, attempt as u64));
                let row = rng.random_range(0..synthetic.n_rows());
                let p = record_predicate(synthetic, row, &mut rng, WINDOW_HALF_WIDTH);
                let key: String = p.0.iter().map(Condition::key).collect();
                if seen.contains(&key) {
                    continue;
                }
                if p.singles_out(synthetic) {
                    seen.insert(key);
                    out.push(p);
                }
            }
            out
        }
    }
}

fn prepare(original: &Dataset, synthetic: &Dataset) -> Result<(Dataset, Dataset)> {
    let reference = original.schema();
    Ok((
        normalize(original, reference)?,
        normalize(&synthetic.align_to(reference)?, reference)?,
    ))
}

/// Share of synthetic-derived singling-out predicates that also isolate
/// exactly one original record.
pub fn singling_out_risk(
    original: &Dataset,
    synthetic: &Dataset,
    n_attacks: usize,
    mode: SinglingOutMode,
    seed: u64,
) -> Result<RiskEstimate> {
    if n_attacks == 0 {
        return Err(Error::invalid("n_attacks must be at least 1"));
    }
    let (o, s) = prepare(original, synthetic)?;
    let predicates = singling_out_predicates(&s, n_attacks, mode, seed);
    if predicates.is_empty() {
        warn!("no singling-out predicate could be generated from the synthetic data");
    } else if predicates.len() < n_attacks {
        warn!(
            "only {} of {n_attacks} singling-out predicates could be generated",
            predicates.len()
        );
    }
    let success = predicates.par_iter().filter(|p| p.singles_out(&o)).count();
    RiskEstimate::from_counts(success, predicates.len(), DEFAULT_CONFIDENCE)
}

fn attack_targets(n_rows: usize, n_attacks: usize, seed: u64) -> Result<Vec<usize>> {
    if n_attacks == 0 {
        return Err(Error::invalid("n_attacks must be at least 1"));
    }
    if n_rows == 0 {
        return Err(Error::insufficient("original dataset is empty"));
    }
    let n = if n_attacks > n_rows {
        warn!("n_attacks lowered from {n_attacks} to {n_rows} (original size)");
        n_rows
    } else {
        n_attacks
    };
    Ok(index::sample(&mut rng_from_seed(seed), n_rows, n).into_vec())
}

/// Links the two auxiliary halves of original records through their nearest
/// synthetic neighbours; success when the two neighbour sets intersect.
pub fn linkability_risk(
    original: &Dataset,
    synthetic: &Dataset,
    aux: &AuxSplit,
    n_attacks: usize,
    n_neighbors: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    aux.validate(original)?;
    if n_neighbors == 0 || n_neighbors > synthetic.n_rows() {
        return Err(Error::invalid(format!(
            "n_neighbors {n_neighbors} must be in 1..={}",
            synthetic.n_rows()
        )));
    }
    let (o, s) = prepare(original, synthetic)?;
    let targets = attack_targets(o.n_rows(), n_attacks, seed)?;
    let a = encode_clouds(&[&o, &s], &aux.side_a)?;
    let b = encode_clouds(&[&o, &s], &aux.side_b)?;
    let success = targets
        .par_iter()
        .filter(|&&t| {
            let na = k_nearest(&a[1], a[0].row(t), n_neighbors, None);
            let nb = k_nearest(&b[1], b[0].row(t), n_neighbors, None);
            na.iter().any(|x| nb.iter().any(|y| y.index == x.index))
        })
        .count();
    RiskEstimate::from_counts(success, targets.len(), DEFAULT_CONFIDENCE)
}

/// Guesses the secret of original records from the nearest synthetic record
/// on the auxiliary columns. Numeric secrets count as guessed when within
/// `tolerance` of the normalized range.
pub fn inference_risk(
    original: &Dataset,
    synthetic: &Dataset,
    aux_columns: &[String],
    secret: &str,
    n_attacks: usize,
    tolerance: f64,
    seed: u64,
) -> Result<RiskEstimate> {
    if aux_columns.is_empty() {
        return Err(Error::invalid("inference needs at least one auxiliary column"));
    }
    if aux_columns.iter().any(|c| c == secret) {
        return Err(Error::invalid(format!(
            "secret `{secret}` is also an auxiliary column"
        )));
    }
    for c in aux_columns {
        original.schema().index_of(c)?;
        synthetic.schema().index_of(c)?;
    }
    original.schema().index_of(secret)?;
    synthetic.schema().index_of(secret)?;
    let (o, s) = prepare(original, synthetic)?;
    let targets = attack_targets(o.n_rows(), n_attacks, seed)?;
    let clouds = encode_clouds(&[&o, &s], aux_columns)?;
    let truth = o.column(secret)?;
    let guesses = s.column(secret)?;
    let success = targets
        .par_iter()
        .filter(|&&t| {
            let nn = k_nearest(&clouds[1], clouds[0].row(t), 1, None);
            let Some(best) = nn.first() else { return false };
            match (truth, guesses) {
                (Column::Categorical(a), Column::Categorical(b)) => a[t] == b[best.index],
                (Column::Numeric(a), Column::Numeric(b)) => {
                    (a[t] - b[best.index]).abs() <= tolerance
                }
                _ => false,
            }
        })
        .count();
    RiskEstimate::from_counts(success, targets.len(), DEFAULT_CONFIDENCE)
}
