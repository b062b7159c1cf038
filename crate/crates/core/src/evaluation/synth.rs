//! Synthetic parallel corpus with known ground truth.
//!
//! Sentences are drawn from a bilingual 1:1 content dictionary; every
//! sentence carries exactly one planted connective whose fate (translated
//! and annotated, translated to a non-connective word, or dropped) is rolled
//! per pair. The generator returns the exact true alignments, so projection
//! with oracle alignments must reproduce the gold standard identically.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::align::{AlignerKind, AlignmentLink, AlignmentSet};
use crate::annotation::SourceAnnotation;
use crate::corpus::{pair_id_for_line, tokenize, Punctuation, SentencePair, Span, TokenizerProfile};
use crate::error::{Error, Result};
use crate::evaluation::{GoldRecord, GoldStatus};
use crate::lexicon::ConnectiveEntry;

/// One connective of the synthetic inventory: its candidate-side form, its
/// annotated-side counterpart, the relation it signals, and its relative
/// propensity for each outcome.
///
/// The outcome of a pair is rolled from the global rates first; the weights
/// then bias which connective realizes that outcome. Unequal weights give
/// the corpus learnable structure: a connective with a high `drop_weight`
/// and a low `ndu_weight` behaves like a discourse marker that translators
/// tend to omit, so mislabeling its dropped occurrences as non-discourse
/// plants systematic noise exactly where a usage classifier looks.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConnective {
    pub c_form: Vec<String>,
    pub a_form: Vec<String>,
    pub relation: String,
    pub du_weight: f64,
    pub ndu_weight: f64,
    pub drop_weight: f64,
}

/// Generator settings. `drop_rate` + `ndu_rate` must not exceed 1; the
/// remainder is the probability of a discourse usage.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub n_pairs: usize,
    /// Size of the bilingual content dictionary (cwordN on side C, awordN
    /// on side A, translated 1:1).
    pub content_vocab: usize,
    /// Size of the side-A pool of non-connective translations (dwordN).
    pub distractor_vocab: usize,
    /// Content words per sentence, drawn uniformly from this range.
    pub min_content: usize,
    pub max_content: usize,
    pub connectives: Vec<SynthConnective>,
    pub drop_rate: f64,
    pub ndu_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_pairs: 200,
            content_vocab: 40,
            distractor_vocab: 8,
            min_content: 4,
            max_content: 9,
            connectives: default_inventory(8),
            drop_rate: 0.1,
            ndu_rate: 0.3,
        }
    }
}

/// A small inventory with a mix of one- and two-token forms on both sides.
///
/// Every fourth connective is drop-prone: all dropped occurrences fall on
/// these, they carry reduced discourse-usage weight and never occur as
/// non-discourse usages. The rest are never dropped and split between
/// discourse and non-discourse usages.
pub fn default_inventory(n: usize) -> Vec<SynthConnective> {
    const RELATIONS: [&str; 4] = ["Contrast", "Conjunction", "Purpose", "Condition"];
    (0..n)
        .map(|k| {
            let c_form = if k % 3 == 2 {
                vec![format!("fconn{k}x"), format!("fconn{k}y")]
            } else {
                vec![format!("fconn{k}")]
            };
            let a_form = if k % 4 == 3 {
                vec![format!("econn{k}x"), format!("econn{k}y")]
            } else {
                vec![format!("econn{k}")]
            };
            let drop_prone = k % 4 == 0;
            SynthConnective {
                c_form,
                a_form,
                relation: RELATIONS[k % 4].to_string(),
                du_weight: if drop_prone { 0.3 } else { 1.0 },
                ndu_weight: if drop_prone { 0.0 } else { 1.0 },
                drop_weight: if drop_prone { 1.0 } else { 0.0 },
            }
        })
        .collect()
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("drop_rate", self.drop_rate), ("ndu_rate", self.ndu_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} = {rate} outside [0,1]")));
            }
        }
        if self.drop_rate + self.ndu_rate > 1.0 {
            return Err(Error::Config(format!(
                "drop_rate + ndu_rate = {} exceeds 1",
                self.drop_rate + self.ndu_rate
            )));
        }
        if self.content_vocab == 0 {
            return Err(Error::Config("content_vocab must be positive".into()));
        }
        if self.ndu_rate > 0.0 && self.distractor_vocab == 0 {
            return Err(Error::Config(
                "ndu_rate > 0 requires a non-empty distractor vocabulary".into(),
            ));
        }
        if self.min_content == 0 || self.min_content > self.max_content {
            return Err(Error::Config(format!(
                "invalid content range {}..={}",
                self.min_content, self.max_content
            )));
        }
        if self.connectives.is_empty() {
            return Err(Error::Config("empty connective inventory".into()));
        }
        let punct = Punctuation::default();
        let mut seen_c: Vec<&[String]> = Vec::new();
        for conn in &self.connectives {
            for (side, form) in [("c_form", &conn.c_form), ("a_form", &conn.a_form)] {
                if form.is_empty() {
                    return Err(Error::Config(format!("connective with empty {side}")));
                }
                for token in form {
                    let ok = !token.is_empty()
                        && !token.chars().any(|c| c.is_whitespace() || punct.contains(c))
                        && token.chars().flat_map(char::to_lowercase).collect::<String>() == *token;
                    if !ok {
                        return Err(Error::Config(format!(
                            "{side} token \"{token}\" must be a single lowercase word"
                        )));
                    }
                }
            }
            if conn.relation.is_empty() {
                return Err(Error::Config("connective with empty relation".into()));
            }
            for (name, w) in [
                ("du_weight", conn.du_weight),
                ("ndu_weight", conn.ndu_weight),
                ("drop_weight", conn.drop_weight),
            ] {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Config(format!("invalid {name} {w}")));
                }
            }
            if seen_c.contains(&conn.c_form.as_slice()) {
                return Err(Error::Config(format!(
                    "duplicate candidate-side form \"{}\"",
                    conn.c_form.join(" ")
                )));
            }
            seen_c.push(conn.c_form.as_slice());
        }
        // Every outcome that can be rolled needs at least one eligible
        // connective.
        let du_rate = 1.0 - self.drop_rate - self.ndu_rate;
        for (name, rate, total) in [
            ("du", du_rate, self.total_weight(GoldStatus::Du)),
            ("ndu", self.ndu_rate, self.total_weight(GoldStatus::Ndu)),
            ("drop", self.drop_rate, self.total_weight(GoldStatus::Dropped)),
        ] {
            if rate > 0.0 && total <= 0.0 {
                return Err(Error::Config(format!(
                    "{name} outcomes are possible but every {name}_weight is zero"
                )));
            }
        }
        Ok(())
    }

    fn total_weight(&self, status: GoldStatus) -> f64 {
        self.connectives.iter().map(|c| c.weight(status)).sum()
    }
}

impl SynthConnective {
    fn weight(&self, status: GoldStatus) -> f64 {
        match status {
            GoldStatus::Du => self.du_weight,
            GoldStatus::Ndu => self.ndu_weight,
            GoldStatus::Dropped => self.drop_weight,
        }
    }
}

/// Everything the generator knows about its corpus.
#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub pairs: Vec<SentencePair>,
    /// Raw side-C lines; tokenizing them reproduces `pairs`.
    pub c_lines: Vec<String>,
    pub a_lines: Vec<String>,
    pub gold: Vec<GoldRecord>,
    pub oracle_alignments: Vec<AlignmentSet>,
    pub annotations: BTreeMap<String, Vec<SourceAnnotation>>,
    pub c_lexicon: Vec<ConnectiveEntry>,
    pub a_lexicon: Vec<ConnectiveEntry>,
}

struct PairOutput {
    pair: SentencePair,
    c_line: String,
    a_line: String,
    gold: GoldRecord,
    alignment: AlignmentSet,
    annotation: Option<SourceAnnotation>,
}

/// Generates a corpus. Each pair draws from its own seeded stream, so the
/// result depends only on (config, seed), not on thread count.
pub fn gen_synthetic(config: &SynthConfig, seed: u64) -> Result<SynthCorpus> {
    config.validate()?;

    let outputs: Vec<PairOutput> = (0..config.n_pairs)
        .into_par_iter()
        .map(|i| gen_pair(config, seed, i))
        .collect();

    let mut corpus = SynthCorpus {
        pairs: Vec::with_capacity(outputs.len()),
        c_lines: Vec::with_capacity(outputs.len()),
        a_lines: Vec::with_capacity(outputs.len()),
        gold: Vec::with_capacity(outputs.len()),
        oracle_alignments: Vec::with_capacity(outputs.len()),
        annotations: BTreeMap::new(),
        c_lexicon: Vec::new(),
        a_lexicon: Vec::new(),
    };
    for out in outputs {
        if let Some(ann) = out.annotation {
            corpus
                .annotations
                .entry(ann.pair_id.clone())
                .or_default()
                .push(ann);
        }
        corpus.pairs.push(out.pair);
        corpus.c_lines.push(out.c_line);
        corpus.a_lines.push(out.a_line);
        corpus.gold.push(out.gold);
        corpus.oracle_alignments.push(out.alignment);
    }
    for conn in &config.connectives {
        corpus.c_lexicon.push(ConnectiveEntry::new(
            vec![conn.c_form.clone()],
            Some(conn.relation.clone()),
        )?);
        corpus.a_lexicon.push(ConnectiveEntry::new(
            vec![conn.a_form.clone()],
            Some(conn.relation.clone()),
        )?);
    }
    Ok(corpus)
}

/// Weighted choice among the connectives eligible for `status`. The weight
/// totals were checked by `SynthConfig::validate`.
fn pick_connective<'a>(
    config: &'a SynthConfig,
    status: GoldStatus,
    rng: &mut ChaCha8Rng,
) -> &'a SynthConnective {
    let total: f64 = config.connectives.iter().map(|c| c.weight(status)).sum();
    let mut x: f64 = rng.random::<f64>() * total;
    let mut last = None;
    for conn in &config.connectives {
        let w = conn.weight(status);
        if w > 0.0 {
            last = Some(conn);
            x -= w;
            if x <= 0.0 {
                return conn;
            }
        }
    }
    last.expect("validated: nonzero total weight")
}

fn gen_pair(config: &SynthConfig, seed: u64, index: usize) -> PairOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);

    let n_content = rng.random_range(config.min_content..=config.max_content);
    let content: Vec<usize> = (0..n_content)
        .map(|_| rng.random_range(0..config.content_vocab))
        .collect();
    let roll: f64 = rng.random();
    let status = if roll < config.drop_rate {
        GoldStatus::Dropped
    } else if roll < config.drop_rate + config.ndu_rate {
        GoldStatus::Ndu
    } else {
        GoldStatus::Du
    };
    let conn = pick_connective(config, status, &mut rng);
    let insert_at = rng.random_range(0..=n_content);
    let distractor = if status == GoldStatus::Ndu {
        Some(rng.random_range(0..config.distractor_vocab))
    } else {
        None
    };

    let c_insert: Vec<String> = conn.c_form.clone();
    let a_insert: Vec<String> = match status {
        GoldStatus::Du => conn.a_form.clone(),
        GoldStatus::Ndu => vec![format!("dword{}", distractor.expect("ndu distractor"))],
        GoldStatus::Dropped => Vec::new(),
    };
    let clen = c_insert.len();
    let alen = a_insert.len();

    let mut c_words: Vec<String> = Vec::with_capacity(n_content + clen + 1);
    let mut a_words: Vec<String> = Vec::with_capacity(n_content + alen + 1);
    for (k, id) in content.iter().enumerate() {
        if k == insert_at {
            c_words.extend(c_insert.iter().cloned());
            a_words.extend(a_insert.iter().cloned());
        }
        c_words.push(format!("cword{id}"));
        a_words.push(format!("aword{id}"));
    }
    if insert_at == n_content {
        c_words.extend(c_insert.iter().cloned());
        a_words.extend(a_insert.iter().cloned());
    }
    c_words.push(".".to_string());
    a_words.push(".".to_string());

    let c_line = c_words.join(" ");
    let a_line = a_words.join(" ");
    let pair_id = pair_id_for_line(index + 1);
    let punct = Punctuation::default();
    let pair = SentencePair {
        pair_id: pair_id.clone(),
        c_tokens: tokenize(&c_line, TokenizerProfile::Generic, &punct),
        a_tokens: tokenize(&a_line, TokenizerProfile::Generic, &punct),
    };

    // Token index of content word k on each side.
    let c_content_idx = |k: usize| if k < insert_at { k } else { k + clen };
    let a_content_idx = |k: usize| if k < insert_at { k } else { k + alen };

    let mut alignment = AlignmentSet::new(pair_id.clone(), AlignerKind::External);
    for k in 0..n_content {
        alignment
            .links
            .insert(AlignmentLink::new(c_content_idx(k), a_content_idx(k)));
    }
    for ci in 0..clen {
        for aj in 0..alen {
            alignment
                .links
                .insert(AlignmentLink::new(insert_at + ci, insert_at + aj));
        }
    }
    alignment
        .links
        .insert(AlignmentLink::new(n_content + clen, n_content + alen));

    let span = Span::new(insert_at, insert_at + clen);
    let gold = GoldRecord {
        pair_id: pair_id.clone(),
        span,
        gold_status: status,
        gold_relation: match status {
            GoldStatus::Du => Some(conn.relation.clone()),
            _ => None,
        },
        gold_translation: match status {
            GoldStatus::Dropped => None,
            _ => Some((insert_at..insert_at + alen).collect()),
        },
    };
    let annotation = (status == GoldStatus::Du).then(|| SourceAnnotation {
        pair_id,
        spans: vec![Span::new(insert_at, insert_at + alen)],
        relation: conn.relation.clone(),
    });

    PairOutput {
        pair,
        c_line,
        a_line,
        gold,
        alignment,
        annotation,
    }
}
