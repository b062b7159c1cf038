//! Binary discourse-usage classifier: sparse surface features and an
//! averaged online linear learner.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{read_utf8, SentencePair, Span};
use crate::error::{Error, Result};
use crate::evaluation::{GoldRecord, GoldStatus};
use crate::projection::{ProjectedAnnotation, Status};
use crate::scalar::Scalar;

/// Binary usage label. UNSUPPORTED candidates have no usage label and are
/// unrepresentable here; they must be excluded when building examples.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum UsageLabel {
    Du,
    Ndu,
}

impl fmt::Display for UsageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageLabel::Du => f.write_str("DU"),
            UsageLabel::Ndu => f.write_str("NDU"),
        }
    }
}

/// Sparse binary indicator features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<F> {
    pub features: BTreeMap<String, F>,
}

impl<F> Default for FeatureVector<F> {
    fn default() -> Self {
        FeatureVector {
            features: BTreeMap::new(),
        }
    }
}

impl<F: Scalar> FeatureVector<F> {
    fn set(&mut self, name: String) {
        self.features.insert(name, F::one());
    }
}

/// Training hyperparameters, recorded in every model file.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub averaging: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 1.0,
            seed: 42,
            averaging: true,
        }
    }
}

/// A trained linear model.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel<F> {
    pub weights: BTreeMap<String, F>,
    pub bias: F,
    pub config: TrainConfig,
}

/// Extracts the surface features of a candidate at `span` in `pair.c_tokens`:
/// the connective's lowercased form, the previous and next tokens (BOS/EOS
/// at the edges), the two adjacent bigrams, and sentence-initial and
/// preceded-by-punctuation flags.
pub fn extract_features<F: Scalar>(pair: &SentencePair, span: Span) -> FeatureVector<F> {
    let conn = pair.c_tokens[span.indices()]
        .iter()
        .map(|t| t.lower.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let prev = match span.start {
        0 => "BOS".to_string(),
        s => pair.c_tokens[s - 1].lower.clone(),
    };
    let next = match pair.c_tokens.get(span.end) {
        Some(t) => t.lower.clone(),
        None => "EOS".to_string(),
    };
    let mut fv = FeatureVector::default();
    fv.set(format!("conn={conn}"));
    fv.set(format!("prev={prev}"));
    fv.set(format!("next={next}"));
    fv.set(format!("prev+conn={prev}+{conn}"));
    fv.set(format!("conn+next={conn}+{next}"));
    if span.start == 0 {
        fv.set("sent_initial".to_string());
    }
    if span.start > 0 && pair.c_tokens[span.start - 1].is_punct {
        fv.set("prev_punct".to_string());
    }
    fv
}

fn sign(label: UsageLabel) -> f64 {
    match label {
        UsageLabel::Du => 1.0,
        UsageLabel::Ndu => -1.0,
    }
}

/// Trains by mistake-driven online updates, shuffling the example order each
/// epoch with a generator seeded from the config. With averaging on, the
/// returned weights are the average over all update steps, which makes the
/// model robust to the final epoch's noise. Deterministic given (examples,
/// config). A training set containing only one label is an error.
pub fn train<F: Scalar>(
    examples: &[(FeatureVector<F>, UsageLabel)],
    config: &TrainConfig,
) -> Result<ClassifierModel<F>> {
    let n_du = examples.iter().filter(|(_, l)| *l == UsageLabel::Du).count();
    if n_du == 0 || n_du == examples.len() {
        return Err(Error::Invalid(format!(
            "training set has a single class ({} DU of {} examples)",
            n_du,
            examples.len()
        )));
    }
    if config.epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }

    let lr = F::from_f64_lossy(config.learning_rate);
    let mut weights: BTreeMap<String, F> = BTreeMap::new();
    let mut bias = F::zero();
    // Averaging accumulators: u = sum of c * update, so that
    // avg = w - u / c_final (the standard lazy averaged-perceptron trick).
    let mut acc_weights: BTreeMap<String, F> = BTreeMap::new();
    let mut acc_bias = F::zero();
    let mut step = F::one();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let (fv, label) = &examples[idx];
            let score = raw_score(&weights, bias, fv);
            let predicted = if score > F::zero() {
                UsageLabel::Du
            } else {
                UsageLabel::Ndu
            };
            if predicted != *label {
                let y = F::from_f64_lossy(sign(*label));
                let delta = lr * y;
                for (name, value) in &fv.features {
                    *weights.entry(name.clone()).or_insert_with(F::zero) += delta * *value;
                    *acc_weights.entry(name.clone()).or_insert_with(F::zero) +=
                        step * delta * *value;
                }
                bias += delta;
                acc_bias += step * delta;
            }
            step += F::one();
        }
    }

    if config.averaging {
        for (name, acc) in &acc_weights {
            let w = weights.entry(name.clone()).or_insert_with(F::zero);
            *w = *w - *acc / step;
        }
        bias = bias - acc_bias / step;
    }

    Ok(ClassifierModel {
        weights,
        bias,
        config: config.clone(),
    })
}

fn raw_score<F: Scalar>(weights: &BTreeMap<String, F>, bias: F, fv: &FeatureVector<F>) -> F {
    let mut score = bias;
    for (name, value) in &fv.features {
        if let Some(w) = weights.get(name) {
            score += *w * *value;
        }
    }
    score
}

/// Scores a feature vector. DU iff the score is strictly positive; an exact
/// zero (including the all-OOV case with zero bias) is NDU.
pub fn predict<F: Scalar>(model: &ClassifierModel<F>, fv: &FeatureVector<F>) -> (UsageLabel, F) {
    let score = raw_score(&model.weights, model.bias, fv);
    let label = if score > F::zero() {
        UsageLabel::Du
    } else {
        UsageLabel::Ndu
    };
    (label, score)
}

/// Binary precision/recall/F1 with DU as the positive class.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ClassifierEval<F> {
    pub precision: Option<F>,
    pub recall: Option<F>,
    pub f1: Option<F>,
}

impl<F: Scalar> ClassifierEval<F> {
    pub fn summary(&self) -> String {
        let fmt = |v: Option<F>| match v {
            Some(x) => format!("{x:.4}"),
            None => "null".to_string(),
        };
        format!(
            "DU\tP={}\tR={}\tF1={}\n",
            fmt(self.precision),
            fmt(self.recall),
            fmt(self.f1)
        )
    }
}

/// Evaluates a model on labeled examples. Empty gold is an error.
pub fn evaluate_classifier<F: Scalar>(
    model: &ClassifierModel<F>,
    gold: &[(FeatureVector<F>, UsageLabel)],
) -> Result<ClassifierEval<F>> {
    if gold.is_empty() {
        return Err(Error::Invalid("empty classifier gold set".into()));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (fv, label) in gold {
        let (predicted, _) = predict(model, fv);
        match (predicted, label) {
            (UsageLabel::Du, UsageLabel::Du) => tp += 1,
            (UsageLabel::Du, UsageLabel::Ndu) => fp += 1,
            (UsageLabel::Ndu, UsageLabel::Du) => fn_ += 1,
            (UsageLabel::Ndu, UsageLabel::Ndu) => {}
        }
    }
    let precision = (tp + fp > 0).then(|| F::from_usize_lossy(tp) / F::from_usize_lossy(tp + fp));
    let recall = (tp + fn_ > 0).then(|| F::from_usize_lossy(tp) / F::from_usize_lossy(tp + fn_));
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if (p + r) > F::zero() => {
            Some((F::one() + F::one()) * p * r / (p + r))
        }
        _ => None,
    };
    Ok(ClassifierEval {
        precision,
        recall,
        f1,
    })
}

/// Builds training examples from a projected corpus: DU and NDU records
/// become labeled feature vectors, UNSUPPORTED records are excluded (they
/// carry no usage label). Unknown pair ids are an error.
pub fn training_examples<F: Scalar>(
    projected: &[ProjectedAnnotation],
    pairs: &[SentencePair],
) -> Result<Vec<(FeatureVector<F>, UsageLabel)>> {
    let by_id: BTreeMap<&str, &SentencePair> =
        pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mut examples = Vec::new();
    for record in projected {
        let label = match record.status {
            Status::Du => UsageLabel::Du,
            Status::Ndu => UsageLabel::Ndu,
            Status::Unsupported => continue,
        };
        let pair = by_id
            .get(record.pair_id.as_str())
            .ok_or_else(|| Error::UnknownPairId {
                pair_id: record.pair_id.clone(),
            })?;
        examples.push((extract_features(pair, record.span), label));
    }
    Ok(examples)
}

/// Builds evaluation examples from gold records: DU and NDU only, DROPPED
/// records have no usage label and are skipped.
pub fn gold_examples<F: Scalar>(
    gold: &[GoldRecord],
    pairs: &[SentencePair],
) -> Result<Vec<(FeatureVector<F>, UsageLabel)>> {
    let by_id: BTreeMap<&str, &SentencePair> =
        pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mut examples = Vec::new();
    for record in gold {
        let label = match record.gold_status {
            GoldStatus::Du => UsageLabel::Du,
            GoldStatus::Ndu => UsageLabel::Ndu,
            GoldStatus::Dropped => continue,
        };
        let pair = by_id
            .get(record.pair_id.as_str())
            .ok_or_else(|| Error::UnknownPairId {
                pair_id: record.pair_id.clone(),
            })?;
        examples.push((extract_features(pair, record.span), label));
    }
    Ok(examples)
}

/// Writes a model as TSV: `# key \t value` header lines for the bias and
/// config, then one `feature \t weight` row per feature.
pub fn write_classifier<F: Scalar>(path: &Path, model: &ClassifierModel<F>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# bias\t{}", model.bias).map_err(|e| Error::io(path, e))?;
    writeln!(out, "# epochs\t{}", model.config.epochs).map_err(|e| Error::io(path, e))?;
    writeln!(out, "# learning_rate\t{}", model.config.learning_rate)
        .map_err(|e| Error::io(path, e))?;
    writeln!(out, "# seed\t{}", model.config.seed).map_err(|e| Error::io(path, e))?;
    writeln!(out, "# averaging\t{}", model.config.averaging).map_err(|e| Error::io(path, e))?;
    for (name, weight) in &model.weights {
        writeln!(out, "{name}\t{weight}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a model written by [`write_classifier`].
pub fn read_classifier<F: Scalar>(path: &Path) -> Result<ClassifierModel<F>> {
    let text = read_utf8(path)?;
    let mut headers: BTreeMap<String, String> = BTreeMap::new();
    let mut weights: BTreeMap<String, F> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            let (key, value) = rest.split_once('\t').ok_or_else(|| {
                Error::parse(path, idx + 1, "malformed header line")
            })?;
            headers.insert(key.to_string(), value.to_string());
            continue;
        }
        let (name, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected feature\\tweight"))?;
        let weight: f64 = value.parse().map_err(|_| {
            Error::parse(path, idx + 1, format!("invalid weight \"{value}\""))
        })?;
        if !weight.is_finite() {
            return Err(Error::parse(path, idx + 1, "non-finite weight"));
        }
        weights.insert(name.to_string(), F::from_f64_lossy(weight));
    }
    let header = |key: &str| -> Result<&str> {
        headers
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::parse(path, 1, format!("missing header \"{key}\"")))
    };
    let bias: f64 = header("bias")?
        .parse()
        .map_err(|_| Error::parse(path, 1, "invalid bias"))?;
    let config = TrainConfig {
        epochs: header("epochs")?
            .parse()
            .map_err(|_| Error::parse(path, 1, "invalid epochs"))?,
        learning_rate: header("learning_rate")?
            .parse()
            .map_err(|_| Error::parse(path, 1, "invalid learning_rate"))?,
        seed: header("seed")?
            .parse()
            .map_err(|_| Error::parse(path, 1, "invalid seed"))?,
        averaging: header("averaging")?
            .parse()
            .map_err(|_| Error::parse(path, 1, "invalid averaging flag"))?,
    };
    Ok(ClassifierModel {
        weights,
        bias: F::from_f64_lossy(bias),
        config,
    })
}
