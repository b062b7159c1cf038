//! Sentence-aligned corpora: tokenization, loading, and JSONL record I/O.
//!
//! A corpus is a pair of UTF-8 text files with one sentence per line, line
//! `n` of one file translating line `n` of the other. Side C carries the
//! connective candidates to be projected onto; side A carries the existing
//! annotation. All span arithmetic in this crate is in token indices, and
//! token offsets are Unicode code point offsets into the original line.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

/// Half-open token index range `[start, end)`.
///
/// Serializes as a two-element JSON array.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

impl From<[usize; 2]> for Span {
    fn from(v: [usize; 2]) -> Self {
        Span::new(v[0], v[1])
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// Language-dependent tokenization behavior.
///
/// `French` splits elided articles and clitics at the apostrophe, keeping the
/// apostrophe on the left piece: `d'autre` becomes `d'` + `autre`. `Generic`
/// treats the apostrophe like any other punctuation character.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TokenizerProfile {
    Generic,
    French,
}

impl FromStr for TokenizerProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(TokenizerProfile::Generic),
            "french" => Ok(TokenizerProfile::French),
            other => Err(Error::Config(format!(
                "unknown tokenizer profile \"{other}\" (expected generic or french)"
            ))),
        }
    }
}

impl fmt::Display for TokenizerProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizerProfile::Generic => f.write_str("generic"),
            TokenizerProfile::French => f.write_str("french"),
        }
    }
}

const DEFAULT_PUNCTUATION: &[char] = &[
    '.', ',', ';', ':', '!', '?', '(', ')', '"', '\'', '«', '»', '—', '–', '-',
];

/// The set of characters treated as punctuation.
///
/// A character counts as punctuation when it is in the explicit set or
/// carries a Unicode `P*` general category. The explicit set defaults to
/// common Western punctuation and can be replaced from a config file.
#[derive(Clone, Debug)]
pub struct Punctuation {
    explicit: Vec<char>,
}

impl Default for Punctuation {
    fn default() -> Self {
        Punctuation {
            explicit: DEFAULT_PUNCTUATION.to_vec(),
        }
    }
}

impl Punctuation {
    /// Replaces the explicit set with the given characters.
    pub fn new(chars: impl IntoIterator<Item = char>) -> Self {
        let mut explicit: Vec<char> = chars.into_iter().collect();
        explicit.sort_unstable();
        explicit.dedup();
        Punctuation { explicit }
    }

    /// Loads an explicit set from a file with one entry per line: either a
    /// single literal character or a `U+XXXX` code point escape. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_utf8(path)?;
        let mut chars = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ch = if let Some(hex) = line.strip_prefix("U+") {
                u32::from_str_radix(hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| {
                        Error::parse(path, idx + 1, format!("invalid code point \"{line}\""))
                    })?
            } else {
                let mut it = line.chars();
                let first = it.next().expect("non-empty after trim");
                if it.next().is_some() {
                    return Err(Error::parse(
                        path,
                        idx + 1,
                        format!("expected a single character or U+XXXX, got \"{line}\""),
                    ));
                }
                first
            };
            chars.push(ch);
        }
        Ok(Punctuation::new(chars))
    }

    pub fn contains(&self, c: char) -> bool {
        self.explicit.binary_search(&c).is_ok()
            || c.general_category_group() == GeneralCategoryGroup::Punctuation
    }

    /// True when every character of `s` is punctuation (and `s` is non-empty).
    pub fn all_punct(&self, s: &str) -> bool {
        !s.is_empty() && s.chars().all(|c| self.contains(c))
    }
}

/// One surface token of a sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Original text of the token, whitespace-free.
    pub surface: String,
    /// Case-folded form used for matching and model training.
    pub lower: String,
    /// Code point offset of the first character in the original line.
    pub char_start: usize,
    /// Code point offset one past the last character.
    pub char_end: usize,
    /// True when the surface consists entirely of punctuation characters.
    pub is_punct: bool,
}

impl Token {
    fn from_surface(surface: String, char_start: usize, char_end: usize, punct: &Punctuation) -> Self {
        let lower: String = surface.chars().flat_map(char::to_lowercase).collect();
        let is_punct = punct.all_punct(&surface);
        Token {
            surface,
            lower,
            char_start,
            char_end,
            is_punct,
        }
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits one line into tokens.
///
/// Tokens are maximal runs of non-whitespace, non-punctuation characters;
/// each punctuation character forms a token of its own. Under the `French`
/// profile an apostrophe additionally terminates the current token and stays
/// attached to it, so elision produces a separate clitic token.
pub fn tokenize(text: &str, profile: TokenizerProfile, punct: &Punctuation) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut buf = String::new();
    let mut buf_start = 0usize;
    let mut total = 0usize;
    for (i, ch) in text.chars().enumerate() {
        total = i + 1;
        if ch.is_whitespace() {
            if !buf.is_empty() {
                tokens.push(Token::from_surface(std::mem::take(&mut buf), buf_start, i, punct));
            }
            continue;
        }
        if profile == TokenizerProfile::French && is_apostrophe(ch) && !buf.is_empty() {
            buf.push(ch);
            tokens.push(Token::from_surface(std::mem::take(&mut buf), buf_start, i + 1, punct));
            continue;
        }
        if punct.contains(ch) {
            if !buf.is_empty() {
                tokens.push(Token::from_surface(std::mem::take(&mut buf), buf_start, i, punct));
            }
            tokens.push(Token::from_surface(ch.to_string(), i, i + 1, punct));
            continue;
        }
        if buf.is_empty() {
            buf_start = i;
        }
        buf.push(ch);
    }
    if !buf.is_empty() {
        tokens.push(Token::from_surface(buf, buf_start, total, punct));
    }
    tokens
}

/// One aligned sentence pair. Side C holds the candidate connectives, side A
/// the source-language annotation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub pair_id: String,
    pub c_tokens: Vec<Token>,
    pub a_tokens: Vec<Token>,
}

impl SentencePair {
    /// Checks the structural invariants: a non-empty id, at least one token
    /// per side, and strictly increasing, non-overlapping token offsets.
    pub fn validate(&self) -> Result<()> {
        if self.pair_id.is_empty() {
            return Err(Error::Invalid("sentence pair with empty pair id".into()));
        }
        if self.c_tokens.is_empty() || self.a_tokens.is_empty() {
            return Err(Error::Invalid(format!(
                "pair {}: empty token sequence",
                self.pair_id
            )));
        }
        for (side, tokens) in [("c", &self.c_tokens), ("a", &self.a_tokens)] {
            let mut prev_end = 0usize;
            for (i, tok) in tokens.iter().enumerate() {
                if tok.char_start >= tok.char_end {
                    return Err(Error::Invalid(format!(
                        "pair {} side {side} token {i}: empty offset range",
                        self.pair_id
                    )));
                }
                if i > 0 && tok.char_start < prev_end {
                    return Err(Error::Invalid(format!(
                        "pair {} side {side} token {i}: offsets overlap previous token",
                        self.pair_id
                    )));
                }
                prev_end = tok.char_end;
            }
        }
        Ok(())
    }
}

/// Tokenization settings used when reading a parallel corpus.
#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub c_profile: TokenizerProfile,
    pub a_profile: TokenizerProfile,
    pub punctuation: Punctuation,
}

impl Default for LoadOptions {
    /// Side C defaults to the French profile, side A to the generic one.
    fn default() -> Self {
        LoadOptions {
            c_profile: TokenizerProfile::French,
            a_profile: TokenizerProfile::Generic,
            punctuation: Punctuation::default(),
        }
    }
}

/// Pair id assigned to 1-based corpus line `line`.
///
/// Ids are zero-padded so lexicographic order equals corpus order.
pub fn pair_id_for_line(line: usize) -> String {
    format!("{line:08}")
}

/// Loads a sentence-aligned file pair.
///
/// The files must have the same number of lines. Lines that tokenize to
/// nothing on both sides are skipped with a warning; a line that is empty on
/// exactly one side is an error since it breaks the alignment assumption.
/// Skipped lines still advance the pair id counter.
pub fn load_parallel(c_path: &Path, a_path: &Path, options: &LoadOptions) -> Result<Vec<SentencePair>> {
    let c_text = read_utf8(c_path)?;
    let a_text = read_utf8(a_path)?;
    let c_lines: Vec<&str> = c_text.lines().collect();
    let a_lines: Vec<&str> = a_text.lines().collect();
    if c_lines.len() != a_lines.len() {
        return Err(Error::LineCountMismatch {
            c_path: c_path.to_path_buf(),
            a_path: a_path.to_path_buf(),
            c_lines: c_lines.len(),
            a_lines: a_lines.len(),
        });
    }
    let mut pairs = Vec::with_capacity(c_lines.len());
    for (idx, (c_line, a_line)) in c_lines.iter().zip(&a_lines).enumerate() {
        let line = idx + 1;
        let c_tokens = tokenize(c_line, options.c_profile, &options.punctuation);
        let a_tokens = tokenize(a_line, options.a_profile, &options.punctuation);
        match (c_tokens.is_empty(), a_tokens.is_empty()) {
            (true, true) => {
                log::warn!("line {line}: empty on both sides, skipped");
            }
            (true, false) | (false, true) => {
                return Err(Error::OneSidedEmptyLine { line });
            }
            (false, false) => {
                pairs.push(SentencePair {
                    pair_id: pair_id_for_line(line),
                    c_tokens,
                    a_tokens,
                });
            }
        }
    }
    Ok(pairs)
}

pub(crate) fn read_utf8(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads one JSON value per non-blank line, returning `(line_number, value)`
/// pairs so callers can report validation failures with their location.
pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = read_utf8(path)?;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(raw)
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        records.push((idx + 1, value));
    }
    Ok(records)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Invalid(format!("serialization failed: {e}")))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes tokenized sentence pairs as JSONL, one pair per line, after
/// validating each.
pub fn write_tokens(path: &Path, pairs: &[SentencePair]) -> Result<()> {
    for pair in pairs {
        pair.validate()?;
    }
    write_jsonl(path, pairs)
}

/// Reads tokenized sentence pairs from JSONL. Every record is validated and
/// pair ids must be strictly increasing, which also rules out duplicates.
pub fn read_tokens(path: &Path) -> Result<Vec<SentencePair>> {
    let records = read_jsonl::<SentencePair>(path)?;
    let mut out: Vec<SentencePair> = Vec::with_capacity(records.len());
    for (line, pair) in records {
        pair.validate().map_err(|e| Error::parse(path, line, e.to_string()))?;
        if let Some(prev) = out.last() {
            if pair.pair_id <= prev.pair_id {
                return Err(Error::parse(
                    path,
                    line,
                    format!(
                        "pair id {} out of order after {}",
                        pair.pair_id, prev.pair_id
                    ),
                ));
            }
        }
        out.push(pair);
    }
    Ok(out)
}

/// Writes projected annotations as JSONL, one record per line, after
/// re-checking the record invariants.
pub fn write_projected(path: &Path, records: &[crate::projection::ProjectedAnnotation]) -> Result<()> {
    for record in records {
        record
            .validate()
            .map_err(|msg| Error::Invalid(format!("pair {}: {msg}", record.pair_id)))?;
    }
    write_jsonl(path, records)
}

/// Reads projected annotations from JSONL, validating every record. Blank
/// lines are ignored; malformed lines are reported with their line number.
pub fn read_projected(path: &Path) -> Result<Vec<crate::projection::ProjectedAnnotation>> {
    let records = read_jsonl::<crate::projection::ProjectedAnnotation>(path)?;
    let mut out = Vec::with_capacity(records.len());
    for (line, record) in records {
        record
            .validate()
            .map_err(|msg| Error::parse(path, line, msg))?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctuation_default_and_unicode_category() {
        let p = Punctuation::default();
        assert!(p.contains(','));
        assert!(p.contains('«'));
        // Not in the explicit list; caught by the Unicode category.
        assert!(p.contains('¿'));
        assert!(!p.contains('a'));
        assert!(!p.contains('3'));
    }

    #[test]
    fn french_apostrophe_splits() {
        let p = Punctuation::default();
        let toks = tokenize("d'autre part", TokenizerProfile::French, &p);
        let surfaces: Vec<&str> = toks.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, ["d'", "autre", "part"]);
        assert_eq!(toks[0].char_start, 0);
        assert_eq!(toks[0].char_end, 2);
        assert_eq!(toks[1].char_start, 2);
    }

    #[test]
    fn generic_apostrophe_is_plain_punctuation() {
        let p = Punctuation::default();
        let toks = tokenize("it's", TokenizerProfile::Generic, &p);
        let surfaces: Vec<&str> = toks.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, ["it", "'", "s"]);
    }
}
