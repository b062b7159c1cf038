//! dcproj: cross-lingual projection of discourse connective annotations.
//!
//! Exit codes: 0 on success, 1 on a usage or validation error, 2 on an I/O
//! error. Diagnostics go to standard error; data goes to files or standard
//! output.

mod config;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use dcproj_core::align::Direction;
use dcproj_core::annotation::OverlapPolicy;
use dcproj_core::classifier::TrainConfig;
use dcproj_core::corpus::TokenizerProfile;
use dcproj_core::error::{Error, Result};
use dcproj_core::evaluation::SynthConfig;

use config::{parse_overlap, AlignerChoice, FileConfig, RunConfig};
use ops::SymMethod;

#[derive(Parser)]
#[command(name = "dcproj", version, about, max_term_width = 100)]
struct Cli {
    /// Flat key=value config file; command-line flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every random component.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads, 0 meaning one per processor. Parallelism never
    /// changes output bytes.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Corpus-level inputs shared by `project` and `pipeline`.
#[derive(Args)]
struct RunArgs {
    /// Candidate-side corpus, one sentence per line.
    #[arg(long, value_name = "FILE")]
    corpus_c: Option<PathBuf>,

    /// Annotated-side corpus, line-aligned with corpus C.
    #[arg(long, value_name = "FILE")]
    corpus_a: Option<PathBuf>,

    /// Pre-tokenized corpus JSONL; takes precedence over the raw corpus.
    #[arg(long, value_name = "FILE")]
    tokens: Option<PathBuf>,

    /// Candidate-side connective lexicon TSV.
    #[arg(long, value_name = "FILE")]
    lexicon_c: Option<PathBuf>,

    /// Annotated-side lexicon, used to annotate side A by lookup when no
    /// annotations file is given.
    #[arg(long, value_name = "FILE")]
    lexicon_a: Option<PathBuf>,

    /// Source annotations JSONL for side A.
    #[arg(long, value_name = "FILE")]
    annotations: Option<PathBuf>,

    /// Precomputed pharaoh alignments; requires --aligner external.
    #[arg(long, value_name = "FILE")]
    alignments: Option<PathBuf>,

    /// Alignment source: direct, inverse, intersection, grow-diag or
    /// external.
    #[arg(long, value_enum, value_name = "KIND")]
    aligner: Option<AlignerChoice>,

    /// Drop unsupported candidates from the output (the default).
    #[arg(long, overrides_with = "no_filter")]
    filter: bool,

    /// Keep every candidate, labeling unsupported ones NDU.
    #[arg(long, overrides_with = "filter")]
    no_filter: bool,

    /// EM iterations for alignment training.
    #[arg(long, value_name = "N")]
    em_iterations: Option<usize>,

    /// Tokenizer profile for side C: generic or french.
    #[arg(long, value_name = "NAME")]
    profile_c: Option<TokenizerProfile>,

    /// Tokenizer profile for side A.
    #[arg(long, value_name = "NAME")]
    profile_a: Option<TokenizerProfile>,

    /// Punctuation set file, one character or U+XXXX escape per line.
    #[arg(long, value_name = "FILE")]
    punctuation: Option<PathBuf>,

    /// Policy for overlapping annotations: warn or deny.
    #[arg(long, value_parser = parse_overlap, value_name = "POLICY")]
    overlap: Option<OverlapPolicy>,

    /// Gold records JSONL (recorded in the run configuration; used by the
    /// eval subcommands).
    #[arg(long, value_name = "FILE")]
    gold: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a parallel corpus into a tokens JSONL file.
    Tokenize {
        #[arg(long, value_name = "FILE")]
        corpus_c: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        corpus_a: Option<PathBuf>,
        /// Tokenizer profile for side C: generic or french.
        #[arg(long, value_name = "NAME")]
        profile_c: Option<TokenizerProfile>,
        /// Tokenizer profile for side A.
        #[arg(long, value_name = "NAME")]
        profile_a: Option<TokenizerProfile>,
        #[arg(long, value_name = "FILE")]
        punctuation: Option<PathBuf>,
        /// Output tokens JSONL.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Train a lexical translation model by EM.
    TrainAlign {
        #[arg(long, value_name = "FILE")]
        tokens: Option<PathBuf>,
        /// Conditioning direction: a_given_c (direct) or c_given_a (inverse).
        #[arg(long, value_name = "DIR")]
        direction: Direction,
        /// EM iterations.
        #[arg(long, value_name = "N")]
        iterations: Option<usize>,
        /// Output model TSV.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Optional per-iteration log-likelihood trace TSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },

    /// Extract best alignments under a trained model (pharaoh format).
    Align {
        #[arg(long, value_name = "FILE")]
        tokens: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Combine direct and inverse alignment files into one.
    Symmetrize {
        #[arg(long, value_name = "FILE")]
        direct: PathBuf,
        #[arg(long, value_name = "FILE")]
        inverse: PathBuf,
        /// intersection, union or grow-diag.
        #[arg(long, value_enum, value_name = "METHOD")]
        method: SymMethod,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// List candidate connectives matched by the lexicon (TSV).
    Match {
        #[arg(long, value_name = "FILE")]
        tokens: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        lexicon_c: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        punctuation: Option<PathBuf>,
        /// Output TSV; standard output when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Match, align and classify every candidate (JSONL).
    Project {
        #[command(flatten)]
        run: RunArgs,
        /// Output JSONL; standard output when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Label counts of a projected corpus (TSV).
    Stats {
        #[arg(long, value_name = "FILE")]
        projected: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Score a projected corpus against gold records.
    Eval {
        #[arg(long, value_name = "FILE")]
        projected: PathBuf,
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Measure how gold-DROPPED candidates were labeled.
    DroppedEval {
        #[arg(long, value_name = "FILE")]
        projected: PathBuf,
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Krippendorff's alpha of a reliability TSV (annotator, item, label).
    Alpha {
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Generate a synthetic corpus with known ground truth.
    Synth {
        /// Number of sentence pairs.
        #[arg(long, value_name = "N")]
        pairs: Option<usize>,
        /// Probability that the planted connective is dropped in translation.
        #[arg(long, value_name = "RATE")]
        drop_rate: Option<f64>,
        /// Probability of a non-discourse usage.
        #[arg(long, value_name = "RATE")]
        ndu_rate: Option<f64>,
        /// Output directory for corpus, lexicons, annotations, gold and
        /// oracle alignments.
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },

    /// Train the usage classifier on a projected corpus.
    TrainClf {
        #[arg(long, value_name = "FILE")]
        projected: PathBuf,
        #[arg(long, value_name = "FILE")]
        tokens: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        epochs: Option<usize>,
        #[arg(long, value_name = "X")]
        learning_rate: Option<f64>,
        /// Average weights over update steps: true or false.
        #[arg(long, value_name = "BOOL")]
        averaging: Option<bool>,
        /// Output model TSV.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Label every lexicon candidate with a trained classifier (TSV).
    Classify {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        tokens: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        lexicon_c: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        punctuation: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Score a classifier against gold DU/NDU labels.
    EvalClf {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        tokens: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Full run: tokenize, train-align both directions, align, symmetrize,
    /// match, project, stats, everything under the output directory.
    Pipeline {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "DIR")]
        output_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // print() sends help and version to standard output, everything
            // else to standard error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

/// Merges the run-level flags with the config file into a [`RunConfig`].
fn run_config(args: &RunArgs, file: &FileConfig, seed: u64) -> Result<RunConfig> {
    let filter_unsupported = if args.filter {
        true
    } else if args.no_filter {
        false
    } else {
        file.parse(None, "filter", true)?
    };
    let overlap = match args.overlap {
        Some(policy) => policy,
        None => match file.get("overlap") {
            Some(raw) => parse_overlap(raw)?,
            None => OverlapPolicy::Warn,
        },
    };
    Ok(RunConfig {
        corpus_c: file.path(&args.corpus_c, "corpus_c"),
        corpus_a: file.path(&args.corpus_a, "corpus_a"),
        tokens: file.path(&args.tokens, "tokens"),
        lexicon_c: file.path(&args.lexicon_c, "lexicon_c"),
        lexicon_a: file.path(&args.lexicon_a, "lexicon_a"),
        annotations: file.path(&args.annotations, "annotations"),
        alignments: file.path(&args.alignments, "alignments"),
        gold: file.path(&args.gold, "gold"),
        output_dir: None,
        aligner: file.parse(args.aligner, "aligner", AlignerChoice::Intersection)?,
        filter_unsupported,
        em_iterations: file.parse(args.em_iterations, "em_iterations", 10)?,
        profile_c: file.parse(args.profile_c, "profile_c", TokenizerProfile::French)?,
        profile_a: file.parse(args.profile_a, "profile_a", TokenizerProfile::Generic)?,
        punctuation: file.path(&args.punctuation, "punctuation"),
        overlap,
        train: TrainConfig {
            epochs: file.parse(None, "epochs", 10)?,
            learning_rate: file.parse(None, "learning_rate", 1.0)?,
            seed,
            averaging: file.parse(None, "averaging", true)?,
        },
        seed,
    })
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };
    let seed: u64 = file.parse(cli.seed, "seed", 42)?;
    let jobs: usize = file.parse(cli.jobs, "jobs", 0)?;
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Tokenize {
            corpus_c,
            corpus_a,
            profile_c,
            profile_a,
            punctuation,
            out,
        } => {
            let args = ops::CorpusArgs {
                corpus_c: file.required_path(&corpus_c, "corpus_c")?,
                corpus_a: file.required_path(&corpus_a, "corpus_a")?,
                profile_c: file.parse(profile_c, "profile_c", TokenizerProfile::French)?,
                profile_a: file.parse(profile_a, "profile_a", TokenizerProfile::Generic)?,
                punctuation: file.path(&punctuation, "punctuation"),
            };
            ops::cmd_tokenize(&args, &out)
        }
        Command::TrainAlign {
            tokens,
            direction,
            iterations,
            out,
            trace,
        } => {
            let tokens = file.required_path(&tokens, "tokens")?;
            let iterations = file.parse(iterations, "em_iterations", 10)?;
            ops::cmd_train_align(&tokens, direction, iterations, &out, trace.as_deref())
        }
        Command::Align { tokens, model, out } => {
            let tokens = file.required_path(&tokens, "tokens")?;
            ops::cmd_align(&tokens, &model, &out)
        }
        Command::Symmetrize {
            direct,
            inverse,
            method,
            out,
        } => ops::cmd_symmetrize(&direct, &inverse, method, &out),
        Command::Match {
            tokens,
            lexicon_c,
            punctuation,
            out,
        } => {
            let tokens = file.required_path(&tokens, "tokens")?;
            let lexicon_c = file.required_path(&lexicon_c, "lexicon_c")?;
            let punctuation = file.path(&punctuation, "punctuation");
            ops::cmd_match(&tokens, &lexicon_c, punctuation.as_deref(), out.as_deref())
        }
        Command::Project { run, out } => {
            let cfg = run_config(&run, &file, seed)?;
            ops::cmd_project(&cfg, out.as_deref())
        }
        Command::Stats { projected, out } => ops::cmd_stats(&projected, out.as_deref()),
        Command::Eval {
            projected,
            gold,
            out,
        } => {
            let gold = file.required_path(&gold, "gold")?;
            ops::cmd_eval(&projected, &gold, out.as_deref())
        }
        Command::DroppedEval {
            projected,
            gold,
            out,
        } => {
            let gold = file.required_path(&gold, "gold")?;
            ops::cmd_dropped_eval(&projected, &gold, out.as_deref())
        }
        Command::Alpha { data, out } => ops::cmd_alpha(&data, out.as_deref()),
        Command::Synth {
            pairs,
            drop_rate,
            ndu_rate,
            out_dir,
        } => {
            let defaults = SynthConfig::default();
            let config = SynthConfig {
                n_pairs: pairs.unwrap_or(defaults.n_pairs),
                drop_rate: drop_rate.unwrap_or(defaults.drop_rate),
                ndu_rate: ndu_rate.unwrap_or(defaults.ndu_rate),
                ..defaults
            };
            let out_dir = file.required_path(&out_dir, "output_dir")?;
            ops::cmd_synth(&config, seed, &out_dir)
        }
        Command::TrainClf {
            projected,
            tokens,
            epochs,
            learning_rate,
            averaging,
            out,
        } => {
            let tokens = file.required_path(&tokens, "tokens")?;
            let tc = TrainConfig {
                epochs: file.parse(epochs, "epochs", 10)?,
                learning_rate: file.parse(learning_rate, "learning_rate", 1.0)?,
                seed,
                averaging: file.parse(averaging, "averaging", true)?,
            };
            ops::cmd_train_clf(&projected, &tokens, &tc, &out)
        }
        Command::Classify {
            model,
            tokens,
            lexicon_c,
            punctuation,
            out,
        } => {
            let tokens = file.required_path(&tokens, "tokens")?;
            let lexicon_c = file.required_path(&lexicon_c, "lexicon_c")?;
            let punctuation = file.path(&punctuation, "punctuation");
            ops::cmd_classify(
                &model,
                &tokens,
                &lexicon_c,
                punctuation.as_deref(),
                out.as_deref(),
            )
        }
        Command::EvalClf {
            model,
            tokens,
            gold,
            out,
        } => {
            let tokens = file.required_path(&tokens, "tokens")?;
            let gold = file.required_path(&gold, "gold")?;
            ops::cmd_eval_clf(&model, &tokens, &gold, out.as_deref())
        }
        Command::Pipeline { run, output_dir } => {
            let mut cfg = run_config(&run, &file, seed)?;
            cfg.output_dir = Some(file.required_path(&output_dir, "output_dir")?);
            ops::cmd_pipeline(&cfg)
        }
    }
}
