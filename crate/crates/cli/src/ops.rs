//! One function per subcommand. `cmd_pipeline` is literally a composition of
//! the others, which is what makes the pipeline-equals-composition contract
//! hold by construction.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use dcproj_core::align::{
    bind_to_corpus, grow_diag, intersect, read_model, read_pharaoh, train_em, union_align,
    viterbi_align, write_model, write_pharaoh, AlignmentSet, Direction,
};
use dcproj_core::annotation::{
    baseline_annotate, load_annotations, save_annotations, SourceAnnotation,
};
use dcproj_core::classifier::{
    evaluate_classifier, extract_features, gold_examples, predict, read_classifier, train,
    training_examples, write_classifier, TrainConfig,
};
use dcproj_core::corpus::{
    load_parallel, read_projected, read_tokens, write_tokens, LoadOptions, Punctuation,
    SentencePair, TokenizerProfile,
};
use dcproj_core::error::{Error, Result};
use dcproj_core::evaluation::{
    dropped_eval, gen_synthetic, intrinsic_eval, krippendorff_alpha, load_reliability, read_gold,
    write_gold, SynthConfig,
};
use dcproj_core::lexicon::{load_lexicon, match_candidates, write_lexicon};
use dcproj_core::projection::{corpus_stats, project_corpus};

use crate::config::{AlignerChoice, RunConfig};

/// Symmetrization method of the `symmetrize` subcommand. Unlike
/// [`AlignerChoice`] this includes union, which is only reachable here.
#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SymMethod {
    Intersection,
    Union,
    GrowDiag,
}

/// Tokenization inputs shared by `tokenize` and the pipeline.
pub struct CorpusArgs {
    pub corpus_c: PathBuf,
    pub corpus_a: PathBuf,
    pub profile_c: TokenizerProfile,
    pub profile_a: TokenizerProfile,
    pub punctuation: Option<PathBuf>,
}

fn load_punct(path: Option<&Path>) -> Result<Punctuation> {
    match path {
        Some(p) => Punctuation::from_file(p),
        None => Ok(Punctuation::default()),
    }
}

/// Writes to the file, or to standard output when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn cmd_tokenize(args: &CorpusArgs, out: &Path) -> Result<()> {
    let options = LoadOptions {
        c_profile: args.profile_c,
        a_profile: args.profile_a,
        punctuation: load_punct(args.punctuation.as_deref())?,
    };
    let pairs = load_parallel(&args.corpus_c, &args.corpus_a, &options)?;
    write_tokens(out, &pairs)?;
    log::info!("tokenized {} pairs into {}", pairs.len(), out.display());
    Ok(())
}

pub fn cmd_train_align(
    tokens: &Path,
    direction: Direction,
    iterations: usize,
    out: &Path,
    trace_out: Option<&Path>,
) -> Result<()> {
    let pairs = read_tokens(tokens)?;
    let (model, trace) = train_em::<f64>(&pairs, direction, iterations)?;
    write_model(out, &model)?;
    if let Some(trace_out) = trace_out {
        let mut text = String::from("iteration\tlog_likelihood\n");
        for (i, ll) in trace.iter().enumerate() {
            text.push_str(&format!("{}\t{ll:.10}\n", i + 1));
        }
        emit(Some(trace_out), &text)?;
    }
    log::info!(
        "trained {direction} on {} pairs, final log-likelihood {:.4}",
        pairs.len(),
        trace.last().expect("at least one iteration")
    );
    Ok(())
}

pub fn cmd_align(tokens: &Path, model: &Path, out: &Path) -> Result<()> {
    let pairs = read_tokens(tokens)?;
    let model = read_model::<f64>(model)?;
    let sets: Vec<AlignmentSet> = pairs.par_iter().map(|p| viterbi_align(&model, p)).collect();
    write_pharaoh(&sets, out)
}

pub fn cmd_symmetrize(direct: &Path, inverse: &Path, method: SymMethod, out: &Path) -> Result<()> {
    let d = read_pharaoh(direct)?;
    let i = read_pharaoh(inverse)?;
    if d.len() != i.len() {
        return Err(Error::Invalid(format!(
            "{} has {} lines but {} has {}",
            direct.display(),
            d.len(),
            inverse.display(),
            i.len()
        )));
    }
    let sets: Vec<AlignmentSet> = d
        .iter()
        .zip(&i)
        .map(|(d, i)| match method {
            SymMethod::Intersection => intersect(d, i),
            SymMethod::Union => union_align(d, i),
            SymMethod::GrowDiag => grow_diag(d, i),
        })
        .collect::<Result<_>>()?;
    write_pharaoh(&sets, out)
}

pub fn cmd_match(
    tokens: &Path,
    lexicon_c: &Path,
    punctuation: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let pairs = read_tokens(tokens)?;
    let punct = load_punct(punctuation)?;
    let lexicon = load_lexicon(lexicon_c, &punct)?;
    let mut text = String::from("pair_id\tstart\tend\tform\n");
    for pair in &pairs {
        for cand in match_candidates(pair, &lexicon) {
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                cand.pair_id,
                cand.span.start,
                cand.span.end,
                lexicon[cand.entry_idx].canonical
            ));
        }
    }
    emit(out, &text)
}

/// Loads the corpus from the tokens file when given, else from the raw
/// parallel text.
fn load_pairs(cfg: &RunConfig) -> Result<Vec<SentencePair>> {
    if let Some(tokens) = &cfg.tokens {
        return read_tokens(tokens);
    }
    match (&cfg.corpus_c, &cfg.corpus_a) {
        (Some(c), Some(a)) => {
            let options = LoadOptions {
                c_profile: cfg.profile_c,
                a_profile: cfg.profile_a,
                punctuation: load_punct(cfg.punctuation.as_deref())?,
            };
            load_parallel(c, a, &options)
        }
        _ => Err(Error::Config(
            "need either tokens or both corpus_c and corpus_a".into(),
        )),
    }
}

/// Trains EM in both needed directions and produces per-pair alignment sets
/// for a non-external aligner choice.
pub fn train_alignments(
    choice: AlignerChoice,
    pairs: &[SentencePair],
    iterations: usize,
) -> Result<Vec<AlignmentSet>> {
    let viterbi = |direction| -> Result<Vec<AlignmentSet>> {
        let (model, _) = train_em::<f64>(pairs, direction, iterations)?;
        Ok(pairs.par_iter().map(|p| viterbi_align(&model, p)).collect())
    };
    match choice {
        AlignerChoice::Direct => viterbi(Direction::AGivenC),
        AlignerChoice::Inverse => viterbi(Direction::CGivenA),
        AlignerChoice::Intersection | AlignerChoice::GrowDiag => {
            let direct = viterbi(Direction::AGivenC)?;
            let inverse = viterbi(Direction::CGivenA)?;
            direct
                .iter()
                .zip(&inverse)
                .map(|(d, i)| {
                    if choice == AlignerChoice::Intersection {
                        intersect(d, i)
                    } else {
                        grow_diag(d, i)
                    }
                })
                .collect()
        }
        AlignerChoice::External => Err(Error::Config(
            "external alignments are read from a file, not trained".into(),
        )),
    }
}

pub fn cmd_project(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    cfg.validate()?;
    let pairs = load_pairs(cfg)?;
    let punct = load_punct(cfg.punctuation.as_deref())?;
    let lexicon_c_path = cfg
        .lexicon_c
        .as_ref()
        .ok_or_else(|| Error::Config("project needs a lexicon_c".into()))?;
    let lexicon_c = load_lexicon(lexicon_c_path, &punct)?;

    let annotations = match &cfg.annotations {
        Some(path) => load_annotations(path, cfg.overlap)?,
        // No annotation file: annotate side A by lexicon lookup.
        None => {
            let lexicon_a_path = cfg.lexicon_a.as_ref().ok_or_else(|| {
                Error::Config("project needs either annotations or a lexicon_a".into())
            })?;
            let lexicon_a = load_lexicon(lexicon_a_path, &punct)?;
            let mut map: BTreeMap<String, Vec<SourceAnnotation>> = BTreeMap::new();
            for pair in &pairs {
                let anns = baseline_annotate(pair, &lexicon_a)?;
                if !anns.is_empty() {
                    map.insert(pair.pair_id.clone(), anns);
                }
            }
            map
        }
    };

    let alignments = if cfg.aligner == AlignerChoice::External {
        let path = cfg.alignments.as_ref().expect("checked by validate");
        bind_to_corpus(read_pharaoh(path)?, &pairs)?
    } else {
        train_alignments(cfg.aligner, &pairs, cfg.em_iterations)?
    };

    let projected = project_corpus(
        &pairs,
        &alignments,
        &annotations,
        &lexicon_c,
        cfg.filter_unsupported,
    )?;
    let mut text = String::new();
    for record in &projected {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Invalid(format!("serialization failed: {e}")))?;
        text.push_str(&line);
        text.push('\n');
    }
    emit(out, &text)?;

    let stats = corpus_stats(&projected);
    log::info!(
        "projected {} candidates: {} DU, {} NDU, {} UNSUPPORTED",
        stats.total(),
        stats.n_du,
        stats.n_ndu,
        stats.n_unsupported
    );
    Ok(())
}

pub fn cmd_stats(projected: &Path, out: Option<&Path>) -> Result<()> {
    let records = read_projected(projected)?;
    emit(out, &corpus_stats(&records).to_tsv())
}

pub fn cmd_eval(projected: &Path, gold: &Path, out: Option<&Path>) -> Result<()> {
    let records = read_projected(projected)?;
    let gold = read_gold(gold)?;
    let report = intrinsic_eval::<f64>(&records, &gold)?;
    emit(out, &report.to_tsv())?;
    eprint!("{}", report.summary());
    Ok(())
}

pub fn cmd_dropped_eval(projected: &Path, gold: &Path, out: Option<&Path>) -> Result<()> {
    let records = read_projected(projected)?;
    let gold = read_gold(gold)?;
    let report = dropped_eval::<f64>(&records, &gold)?;
    let text = format!(
        "metric\tvalue\nidentified_fraction\t{:.6}\nmislabeled_du_fraction\t{:.6}\nmislabeled_ndu_fraction\t{:.6}\n",
        report.identified_fraction, report.misl_du_fraction, report.misl_ndu_fraction
    );
    emit(out, &text)
}

pub fn cmd_alpha(data: &Path, out: Option<&Path>) -> Result<()> {
    let data = load_reliability(data)?;
    let text = match krippendorff_alpha::<f64>(&data) {
        Some(alpha) => format!("alpha\t{alpha:.6}\n"),
        None => "alpha\tundefined\n".to_string(),
    };
    emit(out, &text)
}

pub fn cmd_synth(config: &SynthConfig, seed: u64, out_dir: &Path) -> Result<()> {
    let corpus = gen_synthetic(config, seed)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let write_lines = |name: &str, lines: &[String]| -> Result<()> {
        let path = out_dir.join(name);
        let text: String = lines.iter().flat_map(|l| [l.as_str(), "\n"]).collect();
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write_lines("corpus.c", &corpus.c_lines)?;
    write_lines("corpus.a", &corpus.a_lines)?;
    write_lexicon(&out_dir.join("lexicon_c.tsv"), &corpus.c_lexicon)?;
    write_lexicon(&out_dir.join("lexicon_a.tsv"), &corpus.a_lexicon)?;
    save_annotations(&out_dir.join("annotations.jsonl"), &corpus.annotations)?;
    write_gold(&out_dir.join("gold.jsonl"), &corpus.gold)?;
    write_pharaoh(&corpus.oracle_alignments, &out_dir.join("oracle.pharaoh"))?;
    log::info!(
        "generated {} pairs into {}",
        corpus.pairs.len(),
        out_dir.display()
    );
    Ok(())
}

pub fn cmd_train_clf(projected: &Path, tokens: &Path, tc: &TrainConfig, out: &Path) -> Result<()> {
    let records = read_projected(projected)?;
    let pairs = read_tokens(tokens)?;
    let examples = training_examples::<f64>(&records, &pairs)?;
    let model = train(&examples, tc)?;
    write_classifier(out, &model)?;
    log::info!("trained on {} examples", examples.len());
    Ok(())
}

pub fn cmd_classify(
    model: &Path,
    tokens: &Path,
    lexicon_c: &Path,
    punctuation: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let model = read_classifier::<f64>(model)?;
    let pairs = read_tokens(tokens)?;
    let punct = load_punct(punctuation)?;
    let lexicon = load_lexicon(lexicon_c, &punct)?;
    let mut text = String::from("pair_id\tstart\tend\tform\tlabel\tscore\n");
    for pair in &pairs {
        for cand in match_candidates(pair, &lexicon) {
            let fv = extract_features::<f64>(pair, cand.span);
            let (label, score) = predict(&model, &fv);
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\t{label}\t{score:.6}\n",
                cand.pair_id,
                cand.span.start,
                cand.span.end,
                lexicon[cand.entry_idx].canonical
            ));
        }
    }
    emit(out, &text)
}

pub fn cmd_eval_clf(model: &Path, tokens: &Path, gold: &Path, out: Option<&Path>) -> Result<()> {
    let model = read_classifier::<f64>(model)?;
    let pairs = read_tokens(tokens)?;
    let gold = read_gold(gold)?;
    let examples = gold_examples::<f64>(&gold, &pairs)?;
    let eval = evaluate_classifier(&model, &examples)?;
    emit(out, &eval.summary())
}

/// tokenize, train-align both directions, align, symmetrize, match, project,
/// stats, everything under `output_dir`. With an external aligner the
/// training and symmetrization steps have nothing to do and are skipped; the
/// provided alignment file is used directly.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let out_dir = cfg
        .output_dir
        .as_ref()
        .ok_or_else(|| Error::Config("pipeline needs an output_dir".into()))?;
    let (Some(corpus_c), Some(corpus_a)) = (&cfg.corpus_c, &cfg.corpus_a) else {
        return Err(Error::Config(
            "pipeline needs both corpus_c and corpus_a".into(),
        ));
    };
    let lexicon_c = cfg
        .lexicon_c
        .clone()
        .ok_or_else(|| Error::Config("pipeline needs a lexicon_c".into()))?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    log::info!("pipeline seed {}, aligner {}", cfg.seed, cfg.aligner);

    let tokens = out_dir.join("tokens.jsonl");
    cmd_tokenize(
        &CorpusArgs {
            corpus_c: corpus_c.clone(),
            corpus_a: corpus_a.clone(),
            profile_c: cfg.profile_c,
            profile_a: cfg.profile_a,
            punctuation: cfg.punctuation.clone(),
        },
        &tokens,
    )?;

    if cfg.aligner != AlignerChoice::External {
        let model_ac = out_dir.join("model_a_given_c.tsv");
        let model_ca = out_dir.join("model_c_given_a.tsv");
        cmd_train_align(
            &tokens,
            Direction::AGivenC,
            cfg.em_iterations,
            &model_ac,
            Some(&out_dir.join("trace_a_given_c.tsv")),
        )?;
        cmd_train_align(
            &tokens,
            Direction::CGivenA,
            cfg.em_iterations,
            &model_ca,
            Some(&out_dir.join("trace_c_given_a.tsv")),
        )?;
        let direct = out_dir.join("direct.pharaoh");
        let inverse = out_dir.join("inverse.pharaoh");
        cmd_align(&tokens, &model_ac, &direct)?;
        cmd_align(&tokens, &model_ca, &inverse)?;
        let aligned = out_dir.join("aligned.pharaoh");
        match cfg.aligner {
            AlignerChoice::Direct => {
                fs::copy(&direct, &aligned).map_err(|e| Error::io(&aligned, e))?;
            }
            AlignerChoice::Inverse => {
                fs::copy(&inverse, &aligned).map_err(|e| Error::io(&aligned, e))?;
            }
            AlignerChoice::Intersection => {
                cmd_symmetrize(&direct, &inverse, SymMethod::Intersection, &aligned)?
            }
            AlignerChoice::GrowDiag => {
                cmd_symmetrize(&direct, &inverse, SymMethod::GrowDiag, &aligned)?
            }
            AlignerChoice::External => unreachable!(),
        }
    }

    cmd_match(
        &tokens,
        &lexicon_c,
        cfg.punctuation.as_deref(),
        Some(&out_dir.join("candidates.tsv")),
    )?;

    let mut project_cfg = cfg.clone();
    project_cfg.tokens = Some(tokens);
    let projected = out_dir.join("projected.jsonl");
    cmd_project(&project_cfg, Some(&projected))?;
    cmd_stats(&projected, Some(&out_dir.join("stats.tsv")))?;
    Ok(())
}
