//! Word alignment: EM-trained lexical translation models, best-alignment
//! extraction in both directions, symmetrization heuristics, and ingestion
//! of alignments produced by external tools.

mod em;
mod pharaoh;
mod symmetrize;

pub use em::{read_model, train_em, viterbi_align, write_model, Direction, TranslationModel, NULL_WORD};
pub use pharaoh::{bind_to_corpus, read_pharaoh, write_pharaoh};
pub use symmetrize::{grow_diag, intersect, union_align};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One alignment link between a candidate-side and an annotated-side token.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AlignmentLink {
    pub c_index: usize,
    pub a_index: usize,
}

impl AlignmentLink {
    pub fn new(c_index: usize, a_index: usize) -> Self {
        AlignmentLink { c_index, a_index }
    }
}

/// Which procedure produced an alignment set.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignerKind {
    Direct,
    Inverse,
    Intersection,
    Union,
    GrowDiag,
    External,
}

impl fmt::Display for AlignerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AlignerKind::Direct => "direct",
            AlignerKind::Inverse => "inverse",
            AlignerKind::Intersection => "intersection",
            AlignerKind::Union => "union",
            AlignerKind::GrowDiag => "grow_diag",
            AlignerKind::External => "external",
        };
        f.write_str(name)
    }
}

impl FromStr for AlignerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(AlignerKind::Direct),
            "inverse" => Ok(AlignerKind::Inverse),
            "intersection" => Ok(AlignerKind::Intersection),
            "union" => Ok(AlignerKind::Union),
            "grow_diag" | "grow-diag" => Ok(AlignerKind::GrowDiag),
            "external" => Ok(AlignerKind::External),
            other => Err(Error::Config(format!("unknown aligner \"{other}\""))),
        }
    }
}

/// The word alignment of one sentence pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentSet {
    pub pair_id: String,
    pub links: BTreeSet<AlignmentLink>,
    pub aligner: AlignerKind,
}

impl AlignmentSet {
    pub fn new(pair_id: impl Into<String>, aligner: AlignerKind) -> Self {
        AlignmentSet {
            pair_id: pair_id.into(),
            links: BTreeSet::new(),
            aligner,
        }
    }

    /// Checks that every link is within the owning pair's token counts.
    pub fn check_bounds(&self, c_len: usize, a_len: usize) -> Result<()> {
        for link in &self.links {
            if link.c_index >= c_len || link.a_index >= a_len {
                return Err(Error::Invalid(format!(
                    "pair {}: link {}-{} out of bounds ({} x {} tokens)",
                    self.pair_id, link.c_index, link.a_index, c_len, a_len
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn require_same_pair(left: &AlignmentSet, right: &AlignmentSet) -> Result<()> {
    if left.pair_id != right.pair_id {
        return Err(Error::PairIdMismatch {
            left: left.pair_id.clone(),
            right: right.pair_id.clone(),
        });
    }
    Ok(())
}
