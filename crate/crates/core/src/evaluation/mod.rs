//! Intrinsic evaluation against a three-way gold standard, dropped-candidate
//! detection rates, inter-annotator agreement, and a synthetic corpus
//! generator with known ground truth.

mod alpha;
mod synth;

pub use alpha::{krippendorff_alpha, load_reliability, ReliabilityData};
pub use synth::{gen_synthetic, SynthConfig, SynthConnective, SynthCorpus};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_jsonl, write_jsonl, Span};
use crate::error::{Error, Result};
use crate::projection::{ProjectedAnnotation, Status};
use crate::scalar::Scalar;

/// Gold label of a candidate: discourse usage, non-discourse usage, or
/// dropped in translation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GoldStatus {
    #[serde(rename = "DU")]
    Du,
    #[serde(rename = "NDU")]
    Ndu,
    #[serde(rename = "DROPPED")]
    Dropped,
}

impl fmt::Display for GoldStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoldStatus::Du => f.write_str("DU"),
            GoldStatus::Ndu => f.write_str("NDU"),
            GoldStatus::Dropped => f.write_str("DROPPED"),
        }
    }
}

/// One gold-standard judgement for a candidate on side C.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub pair_id: String,
    pub span: Span,
    pub gold_status: GoldStatus,
    pub gold_relation: Option<String>,
    pub gold_translation: Option<Vec<usize>>,
}

impl GoldRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.span.is_empty() {
            return Err(format!("empty gold span {}", self.span));
        }
        match self.gold_status {
            GoldStatus::Dropped => {
                if self.gold_translation.as_ref().is_some_and(|t| !t.is_empty()) {
                    return Err("DROPPED gold record with a non-empty translation".into());
                }
            }
            GoldStatus::Du => {
                if self.gold_relation.is_none() {
                    return Err("DU gold record without a relation".into());
                }
            }
            GoldStatus::Ndu => {}
        }
        Ok(())
    }
}

/// Reads gold records from JSONL, validating each.
pub fn read_gold(path: &Path) -> Result<Vec<GoldRecord>> {
    let records = read_jsonl::<GoldRecord>(path)?;
    let mut out = Vec::with_capacity(records.len());
    for (line, record) in records {
        record
            .validate()
            .map_err(|msg| Error::parse(path, line, msg))?;
        out.push(record);
    }
    Ok(out)
}

/// Writes gold records as JSONL.
pub fn write_gold(path: &Path, records: &[GoldRecord]) -> Result<()> {
    for record in records {
        record
            .validate()
            .map_err(|msg| Error::Invalid(format!("pair {}: {msg}", record.pair_id)))?;
    }
    write_jsonl(path, records)
}

/// Precision, recall and F1 for one label; `None` encodes 0/0.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LabelMetrics<F> {
    pub precision: Option<F>,
    pub recall: Option<F>,
    pub f1: Option<F>,
}

impl<F: Scalar> LabelMetrics<F> {
    fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        let precision = ratio(correct, predicted);
        let recall = ratio(correct, gold);
        LabelMetrics {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

fn ratio<F: Scalar>(num: usize, den: usize) -> Option<F> {
    (den > 0).then(|| F::from_usize_lossy(num) / F::from_usize_lossy(den))
}

fn f1<F: Scalar>(precision: Option<F>, recall: Option<F>) -> Option<F> {
    match (precision, recall) {
        (Some(p), Some(r)) if (p + r) > F::zero() => Some((F::one() + F::one()) * p * r / (p + r)),
        _ => None,
    }
}

/// Prediction indices into the confusion matrix rows.
const PRED: [Status; 3] = [Status::Du, Status::Ndu, Status::Unsupported];
/// Gold indices into the confusion matrix columns.
const GOLD: [GoldStatus; 3] = [GoldStatus::Du, GoldStatus::Ndu, GoldStatus::Dropped];

/// Result of [`intrinsic_eval`]: per-label and overall metrics plus the raw
/// predicted-by-gold confusion matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport<F> {
    pub du: LabelMetrics<F>,
    pub ndu: LabelMetrics<F>,
    pub overall_precision: Option<F>,
    pub overall_recall: Option<F>,
    /// `matrix[p][g]`: predictions with status `PRED[p]` and gold `GOLD[g]`.
    pub matrix: [[usize; 3]; 3],
}

impl<F: Scalar> EvalReport<F> {
    /// Number of joined candidates.
    pub fn total(&self) -> usize {
        self.matrix.iter().flatten().sum()
    }

    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("candidates evaluated\t{}\n", self.total()));
        for (label, m) in [("DU", &self.du), ("NDU", &self.ndu)] {
            out.push_str(&format!(
                "{label}\tP={}\tR={}\tF1={}\n",
                fmt_opt(m.precision),
                fmt_opt(m.recall),
                fmt_opt(m.f1)
            ));
        }
        out.push_str(&format!(
            "overall\tP={}\tR={}\n",
            fmt_opt(self.overall_precision),
            fmt_opt(self.overall_recall)
        ));
        out.push_str("matrix (rows predicted, columns gold)\n");
        out.push_str("\tDU\tNDU\tDROPPED\n");
        for (p, row) in self.matrix.iter().enumerate() {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", PRED[p], row[0], row[1], row[2]));
        }
        out
    }

    /// TSV rendering: one metric per row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        let rows = [
            ("du_precision", self.du.precision),
            ("du_recall", self.du.recall),
            ("du_f1", self.du.f1),
            ("ndu_precision", self.ndu.precision),
            ("ndu_recall", self.ndu.recall),
            ("ndu_f1", self.ndu.f1),
            ("overall_precision", self.overall_precision),
            ("overall_recall", self.overall_recall),
        ];
        for (name, value) in rows {
            out.push_str(&format!("{name}\t{}\n", fmt_opt(value)));
        }
        for (p, row) in self.matrix.iter().enumerate() {
            for (g, count) in row.iter().enumerate() {
                out.push_str(&format!("n_{}_{}\t{count}\n", PRED[p], GOLD[g]));
            }
        }
        out
    }
}

fn fmt_opt<F: Scalar>(v: Option<F>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => "null".into(),
    }
}

fn join<'a>(
    projected: &'a [ProjectedAnnotation],
    gold: &'a [GoldRecord],
) -> Result<Vec<(&'a ProjectedAnnotation, &'a GoldRecord)>> {
    if gold.is_empty() {
        return Err(Error::Invalid("empty gold standard".into()));
    }
    let mut by_key: BTreeMap<(&str, Span), &ProjectedAnnotation> = BTreeMap::new();
    for record in projected {
        by_key.insert((record.pair_id.as_str(), record.span), record);
    }
    let mut joined = Vec::with_capacity(gold.len());
    for g in gold {
        let p = by_key
            .get(&(g.pair_id.as_str(), g.span))
            .ok_or_else(|| Error::UnmatchedGold {
                pair_id: g.pair_id.clone(),
                start: g.span.start,
                end: g.span.end,
            })?;
        joined.push((*p, g));
    }
    Ok(joined)
}

/// Scores projected labels against the gold standard.
///
/// UNSUPPORTED predictions are abstentions: they never enter a precision
/// denominator, but the gold DU/NDU instances they cover still count against
/// recall. Gold-DROPPED candidates are never correct.
pub fn intrinsic_eval<F: Scalar>(
    projected: &[ProjectedAnnotation],
    gold: &[GoldRecord],
) -> Result<EvalReport<F>> {
    let joined = join(projected, gold)?;
    let mut matrix = [[0usize; 3]; 3];
    for (p, g) in joined {
        let row = PRED.iter().position(|s| *s == p.status).expect("status");
        let col = GOLD.iter().position(|s| *s == g.gold_status).expect("gold status");
        matrix[row][col] += 1;
    }
    let pred_total = |row: usize| -> usize { matrix[row].iter().sum() };
    let gold_total = |col: usize| -> usize { matrix.iter().map(|r| r[col]).sum() };

    let du = LabelMetrics::from_counts(matrix[0][0], pred_total(0), gold_total(0));
    let ndu = LabelMetrics::from_counts(matrix[1][1], pred_total(1), gold_total(1));
    let correct = matrix[0][0] + matrix[1][1];
    let overall_precision = ratio(correct, pred_total(0) + pred_total(1));
    let overall_recall = ratio(correct, gold_total(0) + gold_total(1));

    Ok(EvalReport {
        du,
        ndu,
        overall_precision,
        overall_recall,
        matrix,
    })
}

/// How gold-DROPPED candidates were labeled, as fractions of all of them.
/// The three fractions sum to 1.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DroppedReport<F> {
    pub identified_fraction: F,
    pub misl_du_fraction: F,
    pub misl_ndu_fraction: F,
}

impl<F: Scalar> DroppedReport<F> {
    pub fn summary(&self) -> String {
        format!(
            "dropped candidates\tidentified={:.4}\tmislabeled_du={:.4}\tmislabeled_ndu={:.4}\n",
            self.identified_fraction, self.misl_du_fraction, self.misl_ndu_fraction
        )
    }
}

/// Measures dropped-candidate detection: over gold-DROPPED candidates only,
/// the fraction predicted UNSUPPORTED (identified) and the fractions
/// mislabeled DU or NDU. Zero gold-DROPPED candidates is an error.
pub fn dropped_eval<F: Scalar>(
    projected: &[ProjectedAnnotation],
    gold: &[GoldRecord],
) -> Result<DroppedReport<F>> {
    let joined = join(projected, gold)?;
    let mut identified = 0usize;
    let mut as_du = 0usize;
    let mut as_ndu = 0usize;
    let mut total = 0usize;
    for (p, g) in joined {
        if g.gold_status != GoldStatus::Dropped {
            continue;
        }
        total += 1;
        match p.status {
            Status::Unsupported => identified += 1,
            Status::Du => as_du += 1,
            Status::Ndu => as_ndu += 1,
        }
    }
    if total == 0 {
        return Err(Error::Invalid("no gold-DROPPED candidates".into()));
    }
    let denom = F::from_usize_lossy(total);
    Ok(DroppedReport {
        identified_fraction: F::from_usize_lossy(identified) / denom,
        misl_du_fraction: F::from_usize_lossy(as_du) / denom,
        misl_ndu_fraction: F::from_usize_lossy(as_ndu) / denom,
    })
}
