//! Lexical translation model: classic Model-1 EM training and best-alignment
//! extraction.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::align::{AlignerKind, AlignmentLink, AlignmentSet};
use crate::corpus::{read_utf8, SentencePair};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distinguished conditioning word standing for "no aligned token".
pub const NULL_WORD: &str = "<NULL>";

/// Conditioning convention of a model: `AGivenC` estimates t(a-word | c-word)
/// and drives the direct alignment; `CGivenA` the mirror image.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    CGivenA,
    AGivenC,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::CGivenA => f.write_str("c_given_a"),
            Direction::AGivenC => f.write_str("a_given_c"),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c_given_a" => Ok(Direction::CGivenA),
            "a_given_c" => Ok(Direction::AGivenC),
            other => Err(Error::Config(format!(
                "unknown direction \"{other}\" (expected c_given_a or a_given_c)"
            ))),
        }
    }
}

/// A lexical translation table t(out | cond) with a NULL conditioning word.
///
/// Invariant after training: for every conditioning word the outgoing
/// probabilities sum to 1 within 1e-6.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationModel<F> {
    pub direction: Direction,
    pub t: BTreeMap<String, BTreeMap<String, F>>,
}

impl<F: Scalar> TranslationModel<F> {
    /// t(out | cond), zero when the pairing never occurred in training.
    pub fn prob(&self, cond: &str, out: &str) -> F {
        self.t
            .get(cond)
            .and_then(|row| row.get(out))
            .copied()
            .unwrap_or_else(F::zero)
    }

    /// Verifies the sum-to-one invariant on every conditioning word.
    pub fn check_normalized(&self, tol: F) -> Result<()> {
        for (cond, row) in &self.t {
            let sum: F = row.values().copied().sum();
            if (sum - F::one()).abs() > tol {
                return Err(Error::Invalid(format!(
                    "conditional distribution for \"{cond}\" sums to {sum}"
                )));
            }
        }
        Ok(())
    }
}

/// Token ids for one pair: conditioning side includes NULL as id 0.
struct PairIds {
    cond: Vec<u32>,
    out: Vec<u32>,
}

struct Interner {
    ids: BTreeMap<String, u32>,
    words: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ids: BTreeMap::new(),
            words: Vec::new(),
        }
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.ids.insert(word.to_string(), id);
        self.words.push(word.to_string());
        id
    }
}

fn sides<'a>(pair: &'a SentencePair, direction: Direction) -> (&'a [crate::corpus::Token], &'a [crate::corpus::Token]) {
    match direction {
        // cond = A side, out = C side.
        Direction::CGivenA => (&pair.a_tokens, &pair.c_tokens),
        // cond = C side, out = A side.
        Direction::AGivenC => (&pair.c_tokens, &pair.a_tokens),
    }
}

/// Trains a Model-1 translation table by EM on the `lower` token forms.
///
/// Initialization is uniform over the out-words co-occurring with each
/// conditioning word (NULL co-occurs with everything). Returns the table and
/// the per-iteration corpus log-likelihood trace, which is non-decreasing.
/// The E-step runs in parallel over pairs but counts are merged in corpus
/// order, so results are byte-identical regardless of thread count.
pub fn train_em<F: Scalar>(
    pairs: &[SentencePair],
    direction: Direction,
    iterations: usize,
) -> Result<(TranslationModel<F>, Vec<F>)> {
    if pairs.is_empty() {
        return Err(Error::Invalid("cannot train on an empty corpus".into()));
    }
    if iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }

    let mut cond_interner = Interner::new();
    let mut out_interner = Interner::new();
    let null_id = cond_interner.intern(NULL_WORD);
    debug_assert_eq!(null_id, 0);

    let id_pairs: Vec<PairIds> = pairs
        .iter()
        .map(|pair| {
            let (cond_toks, out_toks) = sides(pair, direction);
            PairIds {
                cond: cond_toks
                    .iter()
                    .map(|t| cond_interner.intern(&t.lower))
                    .collect(),
                out: out_toks
                    .iter()
                    .map(|t| out_interner.intern(&t.lower))
                    .collect(),
            }
        })
        .collect();

    let n_cond = cond_interner.words.len();

    // Co-occurring out vocabulary per conditioning word, for initialization.
    let mut cooc: Vec<std::collections::BTreeSet<u32>> = vec![Default::default(); n_cond];
    for ids in &id_pairs {
        for &o in &ids.out {
            cooc[0].insert(o);
            for &c in &ids.cond {
                cooc[c as usize].insert(o);
            }
        }
    }

    let mut t: Vec<BTreeMap<u32, F>> = cooc
        .iter()
        .map(|outs| {
            let p = F::one() / F::from_usize_lossy(outs.len().max(1));
            outs.iter().map(|&o| (o, p)).collect()
        })
        .collect();

    let mut trace: Vec<F> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        // E-step: expected counts and log-likelihood per pair.
        let per_pair: Vec<(Vec<(u32, u32, F)>, F)> = id_pairs
            .par_iter()
            .map(|ids| {
                let mut counts: Vec<(u32, u32, F)> = Vec::new();
                let mut ll = F::zero();
                let norm = F::from_usize_lossy(ids.cond.len() + 1).ln();
                for &o in &ids.out {
                    let p_null = t[0].get(&o).copied().unwrap_or_else(F::zero);
                    let mut z = p_null;
                    for &c in &ids.cond {
                        z += t[c as usize].get(&o).copied().unwrap_or_else(F::zero);
                    }
                    if z > F::zero() {
                        counts.push((0, o, p_null / z));
                        for &c in &ids.cond {
                            let p = t[c as usize].get(&o).copied().unwrap_or_else(F::zero);
                            counts.push((c, o, p / z));
                        }
                        ll += z.ln() - norm;
                    }
                }
                (counts, ll)
            })
            .collect();

        // M-step: merge in corpus order, then renormalize per cond word.
        let mut expected: Vec<BTreeMap<u32, F>> = vec![BTreeMap::new(); n_cond];
        let mut ll_total = F::zero();
        for (counts, ll) in per_pair {
            ll_total += ll;
            for (c, o, v) in counts {
                *expected[c as usize].entry(o).or_insert_with(F::zero) += v;
            }
        }
        trace.push(ll_total);

        for (c, row) in expected.into_iter().enumerate() {
            let total: F = row.values().copied().sum();
            if total > F::zero() {
                t[c] = row.into_iter().map(|(o, v)| (o, v / total)).collect();
            }
        }
    }

    let mut table: BTreeMap<String, BTreeMap<String, F>> = BTreeMap::new();
    for (c, row) in t.into_iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let cond_word = cond_interner.words[c].clone();
        let out_row = row
            .into_iter()
            .map(|(o, p)| (out_interner.words[o as usize].clone(), p))
            .collect();
        table.insert(cond_word, out_row);
    }

    Ok((
        TranslationModel {
            direction,
            t: table,
        },
        trace,
    ))
}

/// Extracts the best alignment of one pair under a trained model.
///
/// Each out-side token links to the conditioning token with the highest
/// translation probability. NULL participates in the argmax and wins ties,
/// producing no link; ties between real tokens go to the lowest index.
/// Out-of-vocabulary words score zero everywhere and thus fall to NULL.
pub fn viterbi_align<F: Scalar>(model: &TranslationModel<F>, pair: &SentencePair) -> AlignmentSet {
    let (cond_toks, out_toks) = sides(pair, model.direction);
    let aligner = match model.direction {
        Direction::AGivenC => AlignerKind::Direct,
        Direction::CGivenA => AlignerKind::Inverse,
    };
    let mut set = AlignmentSet::new(pair.pair_id.clone(), aligner);
    for (j, out_tok) in out_toks.iter().enumerate() {
        let mut best: Option<usize> = None;
        let mut best_p = model.prob(NULL_WORD, &out_tok.lower);
        for (i, cond_tok) in cond_toks.iter().enumerate() {
            let p = model.prob(&cond_tok.lower, &out_tok.lower);
            if p > best_p {
                best_p = p;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            let link = match model.direction {
                Direction::AGivenC => AlignmentLink::new(i, j),
                Direction::CGivenA => AlignmentLink::new(j, i),
            };
            set.links.insert(link);
        }
    }
    set
}

/// Writes a model as TSV: a header line naming the direction, then one
/// `cond_word \t out_word \t probability` row per entry.
pub fn write_model<F: Scalar>(path: &Path, model: &TranslationModel<F>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# direction\t{}", model.direction).map_err(|e| Error::io(path, e))?;
    for (cond, row) in &model.t {
        for (word, p) in row {
            writeln!(out, "{cond}\t{word}\t{p}").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a model written by [`write_model`].
pub fn read_model<F: Scalar>(path: &Path) -> Result<TranslationModel<F>> {
    let text = read_utf8(path)?;
    let mut lines = text.lines().enumerate();
    let direction = match lines.next() {
        Some((_, header)) => {
            let rest = header.strip_prefix("# direction\t").ok_or_else(|| {
                Error::parse(path, 1, "expected header line \"# direction\\t<direction>\"")
            })?;
            Direction::from_str(rest).map_err(|e| Error::parse(path, 1, e.to_string()))?
        }
        None => return Err(Error::parse(path, 1, "empty model file")),
    };
    let mut t: BTreeMap<String, BTreeMap<String, F>> = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (cond, word, prob) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
            (Some(c), Some(w), Some(p), None) => (c, w, p),
            _ => {
                return Err(Error::parse(path, idx + 1, "expected 3 tab-separated columns"));
            }
        };
        let p: f64 = prob
            .parse()
            .map_err(|_| Error::parse(path, idx + 1, format!("invalid probability \"{prob}\"")))?;
        if !(0.0..=1.0 + 1e-6).contains(&p) {
            return Err(Error::parse(path, idx + 1, format!("probability {p} out of range")));
        }
        t.entry(cond.to_string())
            .or_default()
            .insert(word.to_string(), F::from_f64_lossy(p));
    }
    Ok(TranslationModel { direction, t })
}
