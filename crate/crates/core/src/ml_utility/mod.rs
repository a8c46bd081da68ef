//! Machine-learning utility: train-real-test-real versus
//! train-synthetic-test-real comparison with two built-in learners.

mod encode;
mod logistic;
mod metrics;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use encode::{FeatureEncoder, TargetClasses};
pub use logistic::{fit_logistic, logistic_gradient, logistic_loss, sigmoid, LogisticModel};
pub use metrics::{auc, binary_metrics, f1, multiclass_metrics, ClassifierMetrics};

use crate::error::{Error, Result};
use crate::neighbors::{all_k_nearest, encode_clouds};
use crate::rng::derive_seed;
use crate::tabular::{dynamic_train_test_split, normalize, sample_rows, Dataset, Schema, SplitPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    #[default]
    LogisticRegression,
    KNearestNeighbors,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::LogisticRegression => "logistic_regression",
            LearnerKind::KNearestNeighbors => "k_nearest_neighbors",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Learner {
    pub kind: LearnerKind,
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
    pub k: usize,
    pub seed: u64,
}

impl Default for Learner {
    fn default() -> Self {
        Learner {
            kind: LearnerKind::LogisticRegression,
            learning_rate: 0.1,
            iterations: 1_000,
            l2: 1e-4,
            k: 5,
            seed: 0,
        }
    }
}

impl Learner {
    pub fn knn(k: usize) -> Self {
        Learner {
            kind: LearnerKind::KNearestNeighbors,
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.k == 0 {
            return Err(Error::invalid("learner needs iterations >= 1 and k >= 1"));
        }
        if !(self.learning_rate > 0.0) || self.l2 < 0.0 {
            return Err(Error::invalid("learner needs a positive learning rate and l2 >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    /// One model for binary targets, one per class otherwise.
    Logistic(Vec<LogisticModel>),
    Knn { train: Dataset, labels: Vec<usize>, k: usize },
}

/// A classifier trained on one dataset, ready to score rows with the same
/// columns.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub classes: TargetClasses,
    encoder: FeatureEncoder,
    reference: Schema,
    fitted: Fitted,
}

impl Classifier {
    /// Fits `learner` on `train`. Features are scaled on `reference` ranges
    /// and the class set comes from `classes`.
    pub fn fit(train: &Dataset, classes: &TargetClasses, reference: &Schema, learner: &Learner) -> Result<Self> {
        learner.validate()?;
        if train.n_rows() == 0 {
            return Err(Error::insufficient("empty training set"));
        }
        let encoder = FeatureEncoder::new(reference, &classes.target)?;
        let y = classes.encode(train)?;
        let fitted = match learner.kind {
            LearnerKind::LogisticRegression => {
                let x = encoder.transform(train)?;
                let targets: Vec<usize> = if classes.is_binary() { vec![1] } else { (0..classes.len()).collect() };
                let models = targets
                    .into_par_iter()
                    .map(|c| {
                        let yc: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect();
                        fit_logistic(&x, encoder.dim(), &yc, learner.learning_rate, learner.iterations, learner.l2)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Fitted::Logistic(models)
            }
            LearnerKind::KNearestNeighbors => Fitted::Knn {
                train: normalize(&train.align_to(reference)?, reference)?,
                labels: y,
                k: learner.k,
            },
        };
        Ok(Classifier {
            classes: classes.clone(),
            encoder,
            reference: reference.clone(),
            fitted,
        })
    }

    /// Per-row class scores (`n x classes`).
    pub fn scores(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        let n_classes = self.classes.len();
        match &self.fitted {
            Fitted::Logistic(models) => {
                let x = self.encoder.transform(data)?;
                if models.len() == 1 {
                    Ok(models[0].predict_proba(&x).into_iter().map(|p| vec![1.0 - p, p]).collect())
                } else {
                    let per: Vec<Vec<f64>> = models.iter().map(|m| m.predict_proba(&x)).collect();
                    Ok((0..data.n_rows()).map(|r| per.iter().map(|p| p[r]).collect()).collect())
                }
            }
            Fitted::Knn { train, labels, k } => {
                let test = normalize(&data.align_to(&self.reference)?, &self.reference)?;
                let features = self.encoder.feature_names();
                let clouds = encode_clouds(&[train, &test], &features)?;
                let k = (*k).min(train.n_rows());
                Ok(all_k_nearest(&clouds[1], &clouds[0], k, false)
                    .into_iter()
                    .map(|nn| {
                        let mut votes = vec![0.0; n_classes];
                        for n in &nn {
                            votes[labels[n.index]] += 1.0 / nn.len() as f64;
                        }
                        votes
                    })
                    .collect())
            }
        }
    }

    /// Probability of the positive (last) class for binary targets.
    pub fn predict_proba(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(self.scores(data)?.into_iter().map(|s| *s.last().unwrap()).collect())
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<ClassifierMetrics> {
        if test.n_rows() == 0 {
            return Err(Error::insufficient("empty evaluation set"));
        }
        let labels = self.classes.encode(test)?;
        let scores = self.scores(test)?;
        if self.classes.is_binary() {
            let positive: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
            let p: Vec<f64> = scores.iter().map(|s| s[1]).collect();
            Ok(binary_metrics(&positive, &p))
        } else {
            Ok(multiclass_metrics(&labels, &scores, self.classes.len()))
        }
    }
}

/// Binary logistic regression on `train` with features scaled on its own
/// schema.
pub fn train_logistic(train: &Dataset, target: &str, learner: &Learner) -> Result<Classifier> {
    let classes = TargetClasses::from_dataset(train, target)?;
    if !classes.is_binary() {
        return Err(Error::invalid(format!(
            "target `{target}` has {} classes; a binary target is required",
            classes.len()
        )));
    }
    let learner = Learner {
        kind: LearnerKind::LogisticRegression,
        ..learner.clone()
    };
    Classifier::fit(train, &classes, train.schema(), &learner)
}

pub fn evaluate_classifier(model: &Classifier, test: &Dataset, target: &str) -> Result<ClassifierMetrics> {
    if model.classes.target != target {
        return Err(Error::invalid(format!(
            "model was trained for `{}`, not `{target}`",
            model.classes.target
        )));
    }
    model.evaluate(test)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub accuracy: f64,
    pub f1: f64,
    pub auc: Option<f64>,
}

/// How the synthetic training set was brought to the real training size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMatching {
    AsIs,
    Subsampled,
    ResampledWithReplacement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub model_name: String,
    pub target: String,
    pub classes: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_ratio: f64,
    pub synthetic_rows: usize,
    pub size_matching: SizeMatching,
    pub trtr: ClassifierMetrics,
    pub tstr: ClassifierMetrics,
    /// TRTR minus TSTR.
    pub deltas: MetricDeltas,
}

/// The stratified train/test split of the original used by [`tstr_compare`]
/// for `seed`.
pub fn utility_split(original: &Dataset, target: &str, seed: u64) -> Result<SplitPair> {
    dynamic_train_test_split(original, derive_seed(seed, 31), Some(target))
}

/// Trains on real and on synthetic data and scores both on the same held-out
/// real rows.
pub fn tstr_compare(
    original: &Dataset,
    synthetic: &Dataset,
    target: &str,
    learner: &Learner,
    seed: u64,
) -> Result<UtilityReport> {
    learner.validate()?;
    let reference = original.schema();
    reference.index_of(target)?;
    if synthetic.schema().index_of(target).is_err() {
        return Err(Error::SchemaMismatch(format!(
            "target `{target}` missing from the synthetic dataset"
        )));
    }
    let synthetic = synthetic.align_to(reference)?;
    let classes = TargetClasses::from_dataset(original, target)?;
    let split = utility_split(original, target, seed)?;
    let n_train = split.train.n_rows();

    let (syn_train, size_matching) = match synthetic.n_rows() {
        0 => return Err(Error::insufficient("synthetic dataset is empty")),
        n if n == n_train => (synthetic.clone(), SizeMatching::AsIs),
        n if n > n_train => (
            sample_rows(&synthetic, n_train, false, derive_seed(seed, 32))?,
            SizeMatching::Subsampled,
        ),
        _ => (
            sample_rows(&synthetic, n_train, true, derive_seed(seed, 32))?,
            SizeMatching::ResampledWithReplacement,
        ),
    };
    if classes.encode(&syn_train)?.iter().all(|&c| c == 0) {
        warn!("synthetic training data holds a single class");
    }

    let real = Classifier::fit(&split.train, &classes, reference, learner)?;
    let synth = Classifier::fit(&syn_train, &classes, reference, learner)?;
    let trtr = real.evaluate(&split.test)?;
    let tstr = synth.evaluate(&split.test)?;
    Ok(UtilityReport {
        model_name: learner.kind.name().to_string(),
        target: target.to_string(),
        classes: classes.labels.clone(),
        train_rows: n_train,
        test_rows: split.test.n_rows(),
        test_ratio: split.ratio,
        synthetic_rows: synthetic.n_rows(),
        size_matching,
        deltas: MetricDeltas {
            accuracy: trtr.accuracy - tstr.accuracy,
            f1: trtr.f1 - tstr.f1,
            auc: trtr.auc.zip(tstr.auc).map(|(a, b)| a - b),
        },
        trtr,
        tstr,
    })
}
