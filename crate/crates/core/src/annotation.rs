//! Source-side (side A) discourse annotations: standoff JSONL I/O and a
//! lexicon-based fallback annotator for corpora without parsed annotations.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_jsonl, write_jsonl, SentencePair, Span};
use crate::error::{Error, Result};
use crate::lexicon::{match_tokens, ConnectiveEntry};

/// One explicit-connective annotation on side A. Spans are token index
/// ranges; more than one span encodes a discontinuous connective such as
/// "either … or".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceAnnotation {
    pub pair_id: String,
    pub spans: Vec<Span>,
    pub relation: String,
}

impl SourceAnnotation {
    /// Checks the per-annotation invariants: at least one span, spans sorted,
    /// non-empty and pairwise disjoint, and a non-empty relation label.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.spans.is_empty() {
            return Err("annotation without spans".into());
        }
        if self.relation.is_empty() {
            return Err("empty relation label".into());
        }
        for (i, span) in self.spans.iter().enumerate() {
            if span.is_empty() {
                return Err(format!("empty span {span}"));
            }
            if i > 0 && span.start < self.spans[i - 1].end {
                return Err(format!(
                    "span {span} out of order or overlapping {}",
                    self.spans[i - 1]
                ));
            }
        }
        Ok(())
    }

    /// True when `index` falls inside any span of this annotation.
    pub fn covers(&self, index: usize) -> bool {
        self.spans.iter().any(|s| s.contains(index))
    }
}

/// What to do when two annotations of the same pair overlap.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OverlapPolicy {
    Warn,
    Deny,
}

/// Loads annotations grouped by pair id. Pairs absent from the file simply
/// have no annotations. Overlap between two annotations of one pair is
/// warned about or rejected according to `policy`.
pub fn load_annotations(
    path: &Path,
    policy: OverlapPolicy,
) -> Result<BTreeMap<String, Vec<SourceAnnotation>>> {
    let records = read_jsonl::<SourceAnnotation>(path)?;
    let mut by_pair: BTreeMap<String, Vec<SourceAnnotation>> = BTreeMap::new();
    for (line, ann) in records {
        ann.validate().map_err(|msg| Error::parse(path, line, msg))?;
        by_pair.entry(ann.pair_id.clone()).or_default().push(ann);
    }
    for (pair_id, anns) in &by_pair {
        for i in 0..anns.len() {
            for j in i + 1..anns.len() {
                let clash = anns[i]
                    .spans
                    .iter()
                    .any(|s| anns[j].spans.iter().any(|t| s.overlaps(t)));
                if clash {
                    match policy {
                        OverlapPolicy::Warn => log::warn!(
                            "pair {pair_id}: annotations {} and {} overlap",
                            anns[i].relation,
                            anns[j].relation
                        ),
                        OverlapPolicy::Deny => {
                            return Err(Error::Invalid(format!(
                                "pair {pair_id}: overlapping annotations"
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(by_pair)
}

/// Writes annotations as JSONL, pairs in id order. `load_annotations` of the
/// result reproduces the map exactly.
pub fn save_annotations(
    path: &Path,
    annotations: &BTreeMap<String, Vec<SourceAnnotation>>,
) -> Result<()> {
    let flat: Vec<&SourceAnnotation> = annotations.values().flatten().collect();
    for ann in &flat {
        ann.validate()
            .map_err(|msg| Error::Invalid(format!("pair {}: {msg}", ann.pair_id)))?;
    }
    write_jsonl(path, &flat)
}

/// Annotates side A by lexicon lookup: every match of `a_lexicon` becomes a
/// single-span annotation carrying the entry's default relation. A matched
/// entry without a default relation is an error.
pub fn baseline_annotate(
    pair: &SentencePair,
    a_lexicon: &[ConnectiveEntry],
) -> Result<Vec<SourceAnnotation>> {
    let mut annotations = Vec::new();
    for (span, entry_idx) in match_tokens(&pair.a_tokens, a_lexicon) {
        let entry = &a_lexicon[entry_idx];
        let relation = entry.default_relation.clone().ok_or_else(|| {
            Error::MissingDefaultRelation {
                canonical: entry.canonical.clone(),
            }
        })?;
        annotations.push(SourceAnnotation {
            pair_id: pair.pair_id.clone(),
            spans: vec![span],
            relation,
        });
    }
    Ok(annotations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsorted_spans_rejected() {
        let ann = SourceAnnotation {
            pair_id: "00000001".into(),
            spans: vec![Span::new(4, 5), Span::new(0, 1)],
            relation: "Alternative".into(),
        };
        assert!(ann.validate().is_err());
    }

    #[test]
    fn empty_span_rejected() {
        let ann = SourceAnnotation {
            pair_id: "00000001".into(),
            spans: vec![Span::new(3, 3)],
            relation: "Contrast".into(),
        };
        assert!(ann.validate().is_err());
    }

    #[test]
    fn discontinuous_accepted() {
        let ann = SourceAnnotation {
            pair_id: "00000001".into(),
            spans: vec![Span::new(0, 1), Span::new(4, 5)],
            relation: "Alternative".into(),
        };
        assert!(ann.validate().is_ok());
        assert!(ann.covers(0));
        assert!(!ann.covers(2));
        assert!(ann.covers(4));
    }
}
