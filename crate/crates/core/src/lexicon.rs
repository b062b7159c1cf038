//! Connective lexicons and candidate matching on the candidate side.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use crate::corpus::{read_utf8, Punctuation, SentencePair, Span, Token, TokenizerProfile};
use crate::error::{Error, Result};

/// One lexicon entry: a connective with its surface variants.
///
/// `canonical` is the space-joined first form, so it is stable under
/// tokenization and serves as the grouping key in reports. The first TSV
/// column is treated as a human-readable label and is not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectiveEntry {
    pub canonical: String,
    /// Each form is a sequence of case-folded tokens.
    pub forms: Vec<Vec<String>>,
    pub default_relation: Option<String>,
}

impl ConnectiveEntry {
    /// Builds an entry from token-sequence forms, deriving the canonical.
    pub fn new(forms: Vec<Vec<String>>, default_relation: Option<String>) -> Result<Self> {
        if forms.is_empty() || forms.iter().any(|f| f.is_empty()) {
            return Err(Error::Invalid("lexicon entry with an empty form".into()));
        }
        let canonical = forms[0].join(" ");
        Ok(ConnectiveEntry {
            canonical,
            forms,
            default_relation,
        })
    }
}

/// A connective occurrence on side C, referencing its lexicon entry by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateDc {
    pub pair_id: String,
    pub span: Span,
    pub entry_idx: usize,
}

/// Loads a lexicon from TSV.
///
/// Columns: label, pipe-separated surface forms, optional default relation.
/// Forms are tokenized with the French profile and case-folded. A form
/// declared by two different entries is an error; repeating a form within
/// one entry keeps both occurrences (harmless for matching). Blank lines and
/// lines starting with `#` are skipped.
pub fn load_lexicon(path: &Path, punct: &Punctuation) -> Result<Vec<ConnectiveEntry>> {
    let text = read_utf8(path)?;
    parse_lexicon(&text, punct).map_err(|(line, msg)| Error::parse(path, line, msg))
}

fn parse_lexicon(
    text: &str,
    punct: &Punctuation,
) -> std::result::Result<Vec<ConnectiveEntry>, (usize, String)> {
    let mut entries: Vec<ConnectiveEntry> = Vec::new();
    // Tokenized form, joined by '\u{1}', mapped to the canonical that owns it.
    let mut seen_forms: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err((
                line_no,
                format!("expected 2 or 3 tab-separated columns, got {}", cols.len()),
            ));
        }
        let mut forms: Vec<Vec<String>> = Vec::new();
        for variant in cols[1].split('|') {
            let tokens = tokenize_form(variant, punct, line_no)?;
            forms.push(tokens);
        }
        let default_relation = match cols.get(2).map(|s| s.trim()) {
            Some("") | None => None,
            Some(rel) => Some(rel.to_string()),
        };
        let entry = ConnectiveEntry::new(forms, default_relation)
            .map_err(|e| (line_no, e.to_string()))?;
        // Repeating a form within one entry is tolerated; the same form in
        // two entries is ambiguous and rejected.
        for form in &entry.forms {
            let key = form.join("\u{1}");
            if let Some(owner) = seen_forms.get(&key) {
                return Err((
                    line_no,
                    Error::DuplicateForm {
                        form: form.join(" "),
                        first: owner.clone(),
                        second: entry.canonical.clone(),
                    }
                    .to_string(),
                ));
            }
        }
        for form in &entry.forms {
            seen_forms.insert(form.join("\u{1}"), entry.canonical.clone());
        }
        entries.push(entry);
    }
    Ok(entries)
}

fn tokenize_form(
    variant: &str,
    punct: &Punctuation,
    line_no: usize,
) -> std::result::Result<Vec<String>, (usize, String)> {
    let tokens = crate::corpus::tokenize(variant, TokenizerProfile::French, punct);
    if tokens.is_empty() {
        return Err((line_no, format!("empty form \"{variant}\"")));
    }
    if let Some(bad) = tokens.iter().find(|t| t.is_punct) {
        return Err((
            line_no,
            format!(
                "form \"{variant}\" contains punctuation-only token \"{}\"",
                bad.surface
            ),
        ));
    }
    Ok(tokens.into_iter().map(|t| t.lower).collect())
}

/// Writes a lexicon as TSV, one entry per line, forms space-joined.
pub fn write_lexicon(path: &Path, entries: &[ConnectiveEntry]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for entry in entries {
        let forms = entry
            .forms
            .iter()
            .map(|f| f.join(" "))
            .collect::<Vec<_>>()
            .join("|");
        let relation = entry.default_relation.as_deref().unwrap_or("");
        writeln!(out, "{}\t{}\t{}", entry.canonical, forms, relation)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Finds all candidate connective occurrences in `pair.c_tokens`.
///
/// Left-to-right greedy scan on the `lower` field; at each position the
/// longest matching form wins and its tokens are consumed, so returned spans
/// are pairwise disjoint and sorted by start.
pub fn match_candidates(pair: &SentencePair, lexicon: &[ConnectiveEntry]) -> Vec<CandidateDc> {
    match_tokens(&pair.c_tokens, lexicon)
        .into_iter()
        .map(|(span, entry_idx)| CandidateDc {
            pair_id: pair.pair_id.clone(),
            span,
            entry_idx,
        })
        .collect()
}

/// Greedy longest-match scan over an arbitrary token sequence. Shared by
/// candidate matching on side C and the baseline annotator on side A.
pub(crate) fn match_tokens(tokens: &[Token], lexicon: &[ConnectiveEntry]) -> Vec<(Span, usize)> {
    // First lower token of a form, mapped to (form, entry index) sorted
    // longest-first; the sort is stable, so equal lengths keep file order.
    let mut index: BTreeMap<&str, Vec<(&[String], usize)>> = BTreeMap::new();
    for (entry_idx, entry) in lexicon.iter().enumerate() {
        for form in &entry.forms {
            index
                .entry(form[0].as_str())
                .or_default()
                .push((form.as_slice(), entry_idx));
        }
    }
    for forms in index.values_mut() {
        forms.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
    }

    let mut matches = Vec::new();
    let mut i = 0usize;
    while i < tokens.len() {
        let mut advance = 1;
        if let Some(forms) = index.get(tokens[i].lower.as_str()) {
            for (form, entry_idx) in forms {
                if i + form.len() <= tokens.len()
                    && form
                        .iter()
                        .zip(&tokens[i..i + form.len()])
                        .all(|(f, t)| *f == t.lower)
                {
                    matches.push((Span::new(i, i + form.len()), *entry_idx));
                    advance = form.len();
                    break;
                }
            }
        }
        i += advance;
    }
    matches
}
