//! The core step: compute translation spans for candidate connectives,
//! classify them as discourse usage / non-discourse usage / unsupported, and
//! emit the projected corpus with per-connective statistics.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{AlignerKind, AlignmentSet};
use crate::annotation::SourceAnnotation;
use crate::corpus::{SentencePair, Span};
use crate::error::{Error, Result};
use crate::lexicon::{match_candidates, CandidateDc, ConnectiveEntry};

/// Projected label of a candidate connective.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "DU")]
    Du,
    #[serde(rename = "NDU")]
    Ndu,
    #[serde(rename = "UNSUPPORTED")]
    Unsupported,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Du => f.write_str("DU"),
            Status::Ndu => f.write_str("NDU"),
            Status::Unsupported => f.write_str("UNSUPPORTED"),
        }
    }
}

/// One classified candidate, ready for JSONL serialization.
///
/// `form` is the canonical form of the matched lexicon entry; together with
/// `pair_id` and `span` it identifies the candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedAnnotation {
    pub pair_id: String,
    pub span: Span,
    pub form: String,
    pub status: Status,
    pub relation: Option<String>,
    pub translation: Vec<usize>,
    pub aligner: AlignerKind,
}

impl ProjectedAnnotation {
    /// Checks the record invariants that hold independent of the corpus.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.span.is_empty() {
            return Err(format!("empty candidate span {}", self.span));
        }
        match (self.status, &self.relation) {
            (Status::Du, None) => return Err("status DU requires a relation".into()),
            (Status::Ndu | Status::Unsupported, Some(rel)) => {
                return Err(format!("status {} forbids a relation (got \"{rel}\")", self.status));
            }
            _ => {}
        }
        if self.translation.windows(2).any(|w| w[0] >= w[1]) {
            return Err("translation indices not strictly increasing".into());
        }
        Ok(())
    }
}

/// The annotated-side token indices aligned to any token of the candidate:
/// sorted and deduplicated by construction.
pub fn translation_span(
    candidate: &CandidateDc,
    alignment: &AlignmentSet,
    pair: &SentencePair,
) -> Vec<usize> {
    debug_assert_eq!(candidate.pair_id, alignment.pair_id);
    let mut indices: Vec<usize> = alignment
        .links
        .iter()
        .filter(|l| candidate.span.contains(l.c_index))
        .map(|l| l.a_index)
        .filter(|&a| a < pair.a_tokens.len())
        .collect();
    indices.sort_unstable();
    indices.dedup();
    indices
}

/// Classifies one candidate given its translation span.
///
/// Punctuation-only (or empty) translations are unsupported when filtering
/// is on and non-discourse otherwise; a translation overlapping a source
/// annotation projects that annotation's relation (largest overlap wins,
/// ties to the annotation whose first span starts leftmost); anything else
/// is a non-discourse usage.
pub fn classify_candidate(
    candidate: &CandidateDc,
    entry: &ConnectiveEntry,
    translation: Vec<usize>,
    pair: &SentencePair,
    annotations: &[SourceAnnotation],
    filter_unsupported: bool,
    aligner: AlignerKind,
) -> ProjectedAnnotation {
    let supported: Vec<usize> = translation
        .iter()
        .copied()
        .filter(|&a| !pair.a_tokens[a].is_punct)
        .collect();

    let (status, relation) = if supported.is_empty() {
        if filter_unsupported {
            (Status::Unsupported, None)
        } else {
            (Status::Ndu, None)
        }
    } else {
        let mut best: Option<(usize, usize, &SourceAnnotation)> = None;
        for ann in annotations {
            let overlap = supported.iter().filter(|&&a| ann.covers(a)).count();
            if overlap == 0 {
                continue;
            }
            let first_start = ann.spans[0].start;
            let better = match best {
                None => true,
                Some((best_overlap, best_start, _)) => {
                    overlap > best_overlap || (overlap == best_overlap && first_start < best_start)
                }
            };
            if better {
                best = Some((overlap, first_start, ann));
            }
        }
        match best {
            Some((_, _, ann)) => (Status::Du, Some(ann.relation.clone())),
            None => (Status::Ndu, None),
        }
    };

    ProjectedAnnotation {
        pair_id: candidate.pair_id.clone(),
        span: candidate.span,
        form: entry.canonical.clone(),
        status,
        relation,
        translation,
        aligner,
    }
}

/// Matches, aligns and classifies every candidate of the corpus.
///
/// Pairs without an alignment line are treated as having an empty alignment
/// and counted in a warning; an alignment for an unknown pair id is an
/// error. Output is sorted by (pair_id, span.start).
pub fn project_corpus(
    pairs: &[SentencePair],
    alignments: &[AlignmentSet],
    annotations: &BTreeMap<String, Vec<SourceAnnotation>>,
    lexicon: &[ConnectiveEntry],
    filter_unsupported: bool,
) -> Result<Vec<ProjectedAnnotation>> {
    let known: BTreeMap<&str, &SentencePair> =
        pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mut by_pair: BTreeMap<&str, &AlignmentSet> = BTreeMap::new();
    for set in alignments {
        if !known.contains_key(set.pair_id.as_str()) {
            return Err(Error::UnknownPairId {
                pair_id: set.pair_id.clone(),
            });
        }
        by_pair.insert(set.pair_id.as_str(), set);
    }
    let default_aligner = alignments
        .first()
        .map(|s| s.aligner)
        .unwrap_or(AlignerKind::External);

    let empty: Vec<SourceAnnotation> = Vec::new();
    let per_pair: Vec<(Vec<ProjectedAnnotation>, bool)> = pairs
        .par_iter()
        .map(|pair| {
            let alignment = by_pair.get(pair.pair_id.as_str()).copied();
            let missing = alignment.is_none();
            let fallback = AlignmentSet::new(pair.pair_id.clone(), default_aligner);
            let alignment = alignment.unwrap_or(&fallback);
            let anns = annotations.get(&pair.pair_id).unwrap_or(&empty);
            let projected = match_candidates(pair, lexicon)
                .into_iter()
                .map(|candidate| {
                    let translation = translation_span(&candidate, alignment, pair);
                    classify_candidate(
                        &candidate,
                        &lexicon[candidate.entry_idx],
                        translation,
                        pair,
                        anns,
                        filter_unsupported,
                        alignment.aligner,
                    )
                })
                .collect();
            (projected, missing)
        })
        .collect();

    let missing = per_pair.iter().filter(|(_, m)| *m).count();
    if missing > 0 {
        log::warn!("{missing} pairs had no alignment; treated as empty");
    }
    let mut records: Vec<ProjectedAnnotation> =
        per_pair.into_iter().flat_map(|(r, _)| r).collect();
    records.sort_by(|x, y| (&x.pair_id, x.span.start).cmp(&(&y.pair_id, y.span.start)));
    Ok(records)
}

/// Aggregate and per-connective label counts of a projected corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub n_du: usize,
    pub n_ndu: usize,
    pub n_unsupported: usize,
    pub per_connective: Vec<ConnectiveStats>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConnectiveStats {
    pub form: String,
    pub n_du: usize,
    pub n_ndu: usize,
    pub n_unsupported: usize,
}

impl ConnectiveStats {
    pub fn total(&self) -> usize {
        self.n_du + self.n_ndu + self.n_unsupported
    }
}

impl Stats {
    pub fn total(&self) -> usize {
        self.n_du + self.n_ndu + self.n_unsupported
    }

    /// Renders the counts as TSV: an aggregate `ALL` row followed by the
    /// per-connective rows (sorted by total descending, then by form).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("form\tdu\tndu\tunsupported\ttotal\n");
        out.push_str(&format!(
            "ALL\t{}\t{}\t{}\t{}\n",
            self.n_du,
            self.n_ndu,
            self.n_unsupported,
            self.total()
        ));
        for c in &self.per_connective {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                c.form,
                c.n_du,
                c.n_ndu,
                c.n_unsupported,
                c.total()
            ));
        }
        out
    }
}

/// Counts labels overall and per connective form.
pub fn corpus_stats(projected: &[ProjectedAnnotation]) -> Stats {
    let mut stats = Stats::default();
    let mut per: BTreeMap<&str, ConnectiveStats> = BTreeMap::new();
    for record in projected {
        let entry = per.entry(record.form.as_str()).or_insert_with(|| ConnectiveStats {
            form: record.form.clone(),
            ..Default::default()
        });
        match record.status {
            Status::Du => {
                stats.n_du += 1;
                entry.n_du += 1;
            }
            Status::Ndu => {
                stats.n_ndu += 1;
                entry.n_ndu += 1;
            }
            Status::Unsupported => {
                stats.n_unsupported += 1;
                entry.n_unsupported += 1;
            }
        }
    }
    let mut per_connective: Vec<ConnectiveStats> = per.into_values().collect();
    per_connective.sort_by(|a, b| b.total().cmp(&a.total()).then(a.form.cmp(&b.form)));
    stats.per_connective = per_connective;
    stats
}
