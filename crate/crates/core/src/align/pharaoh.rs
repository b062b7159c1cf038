//! Pharaoh-format alignment files: one line per pair, space-separated `c-a`
//! links, 0-indexed.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use crate::align::{AlignerKind, AlignmentLink, AlignmentSet};
use crate::corpus::{pair_id_for_line, read_utf8, SentencePair};
use crate::error::{Error, Result};

/// Reads a pharaoh file. Line `n` receives the provisional pair id of corpus
/// line `n`; use [`bind_to_corpus`] to attach the sets to an actual corpus.
/// An empty line is a valid empty alignment; duplicate links collapse.
pub fn read_pharaoh(path: &Path) -> Result<Vec<AlignmentSet>> {
    let text = read_utf8(path)?;
    let mut sets = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut set = AlignmentSet::new(pair_id_for_line(idx + 1), AlignerKind::External);
        for field in line.split_whitespace() {
            let (c, a) = field.split_once('-').ok_or_else(|| {
                Error::parse(path, idx + 1, format!("malformed link \"{field}\""))
            })?;
            let c: usize = c.parse().map_err(|_| {
                Error::parse(path, idx + 1, format!("non-integer index in \"{field}\""))
            })?;
            let a: usize = a.parse().map_err(|_| {
                Error::parse(path, idx + 1, format!("non-integer index in \"{field}\""))
            })?;
            set.links.insert(AlignmentLink::new(c, a));
        }
        sets.push(set);
    }
    Ok(sets)
}

/// Writes alignments in pharaoh format, links sorted by (c_index, a_index).
pub fn write_pharaoh(sets: &[AlignmentSet], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for set in sets {
        let line = set
            .links
            .iter()
            .map(|l| format!("{}-{}", l.c_index, l.a_index))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Re-labels positionally read alignment sets with the pair ids of `pairs`
/// and bounds-checks every link. The file must have exactly one line per
/// sentence pair.
pub fn bind_to_corpus(mut sets: Vec<AlignmentSet>, pairs: &[SentencePair]) -> Result<Vec<AlignmentSet>> {
    if sets.len() != pairs.len() {
        return Err(Error::Invalid(format!(
            "alignment file has {} lines but the corpus has {} pairs",
            sets.len(),
            pairs.len()
        )));
    }
    for (set, pair) in sets.iter_mut().zip(pairs) {
        set.pair_id = pair.pair_id.clone();
        set.check_bounds(pair.c_tokens.len(), pair.a_tokens.len())?;
    }
    Ok(sets)
}
