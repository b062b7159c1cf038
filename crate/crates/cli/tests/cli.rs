//! Black-box tests of the dcproj binary: exit codes, filter semantics,
//! config-file handling, and the pipeline/composition equivalence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_str()
        .expect("utf-8 path")
        .to_string()
}

fn dcproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcproj"))
        .args(args)
        .output()
        .expect("spawn dcproj")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Runs `project` on the sample corpus with extra flags, returning stdout.
fn project_fixtures(extra: &[&str]) -> Output {
    let mut args = vec![
        "project".to_string(),
        "--corpus-c".into(),
        fixture("sample.fr"),
        "--corpus-a".into(),
        fixture("sample.en"),
        "--lexicon-c".into(),
        fixture("french_lexicon.tsv"),
        "--annotations".into(),
        fixture("sample_annotations.jsonl"),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    dcproj(&args)
}

fn unsupported_count(jsonl: &str) -> usize {
    jsonl
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).expect("json record"))
        .filter(|v| v["status"] == "UNSUPPORTED")
        .count()
}

#[test]
fn help_and_version_exit_zero() {
    let help = dcproj(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("Usage"), "{}", stdout(&help));

    let version = dcproj(&["--version"]);
    assert_eq!(code(&version), 0);
    assert!(stdout(&version).contains("dcproj"));

    let sub = dcproj(&["project", "--help"]);
    assert_eq!(code(&sub), 0);
    assert!(stdout(&sub).contains("--aligner"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&dcproj(&["frobnicate"])), 1);
    assert_eq!(code(&dcproj(&["tokenize", "--bogus-flag"])), 1);
    let out = project_fixtures(&["--overlap", "bogus"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_input_exits_two() {
    let out = dcproj(&[
        "tokenize",
        "--corpus-c",
        "/nonexistent/a.fr",
        "--corpus-a",
        "/nonexistent/a.en",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"));

    let out = dcproj(&["stats", "--projected", "/nonexistent/p.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_run_config_exits_one() {
    // External aligner without an alignment file.
    let out = project_fixtures(&["--aligner", "external"]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));

    // Alignment file with a non-external aligner.
    let alignments = fixture("sample_alignments.pharaoh");
    let out = project_fixtures(&["--aligner", "intersection", "--alignments", &alignments]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("external"), "{}", stderr(&out));

    // Required input missing entirely.
    let out = dcproj(&["project", "--corpus-c", &fixture("sample.fr")]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("corpus_a"), "{}", stderr(&out));
}

#[test]
fn filter_controls_unsupported_labels() {
    let filtered = project_fixtures(&["--aligner", "intersection", "--filter"]);
    assert_eq!(code(&filtered), 0, "stderr: {}", stderr(&filtered));
    assert!(unsupported_count(&stdout(&filtered)) >= 1);

    let naive = project_fixtures(&["--aligner", "grow-diag", "--no-filter"]);
    assert_eq!(code(&naive), 0, "stderr: {}", stderr(&naive));
    assert_eq!(unsupported_count(&stdout(&naive)), 0);

    // Same record count either way: filtering relabels, it never removes.
    assert_eq!(
        stdout(&filtered).lines().count(),
        stdout(&naive).lines().count()
    );
}

#[test]
fn project_is_deterministic() {
    let a = project_fixtures(&["--aligner", "intersection", "--filter"]);
    let b = project_fixtures(&["--aligner", "intersection", "--filter"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let j1 = project_fixtures(&["--aligner", "grow-diag", "--jobs", "1"]);
    let j8 = project_fixtures(&["--aligner", "grow-diag", "--jobs", "8"]);
    assert_eq!(code(&j1), 0);
    assert_eq!(j1.stdout, j8.stdout);
}

#[test]
fn external_alignments_reproduce_gold() {
    let dir = tempfile::tempdir().expect("tempdir");
    let projected = dir.path().join("projected.jsonl");
    let out = project_fixtures(&[
        "--aligner",
        "external",
        "--alignments",
        &fixture("sample_alignments.pharaoh"),
        "--filter",
        "--out",
        projected.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let eval = dcproj(&[
        "eval",
        "--projected",
        projected.to_str().unwrap(),
        "--gold",
        &fixture("sample_gold.jsonl"),
    ]);
    assert_eq!(code(&eval), 0, "stderr: {}", stderr(&eval));
    let report = stdout(&eval);
    for line in ["du_f1\t1.0000", "ndu_f1\t1.0000", "overall_recall\t1.0000"] {
        assert!(report.contains(line), "missing {line:?} in:\n{report}");
    }
    // The human-readable summary goes to stderr, the TSV to stdout.
    assert!(stderr(&eval).contains("matrix"));

    let dropped = dcproj(&[
        "dropped-eval",
        "--projected",
        projected.to_str().unwrap(),
        "--gold",
        &fixture("sample_gold.jsonl"),
    ]);
    assert_eq!(code(&dropped), 0);
    assert!(stdout(&dropped).contains("identified_fraction\t1.000000"));

    let stats = dcproj(&["stats", "--projected", projected.to_str().unwrap()]);
    assert_eq!(code(&stats), 0);
    let stats = stdout(&stats);
    assert!(stats.starts_with("form\tdu\tndu\tunsupported\ttotal\n"));
    assert!(stats.contains("ALL\t5\t2\t1\t8"), "{stats}");
}

#[test]
fn alpha_matches_hand_computed_value() {
    // 8 items, 19 judgements: D_o = 4/19, D_e = 10/19, alpha = 0.6 exactly.
    let out = dcproj(&["alpha", "--data", &fixture("reliability.tsv")]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "alpha\t0.600000\n");
}

#[test]
fn config_file_is_validated() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = dir.path().join("bad.conf");

    fs::write(&conf, "bogus_key = 1\n").unwrap();
    let out = dcproj(&["alpha", "--config", conf.to_str().unwrap(), "--data", &fixture("reliability.tsv")]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("bogus_key"), "{}", stderr(&out));

    fs::write(&conf, "seed = 1\nseed = 2\n").unwrap();
    let out = dcproj(&["alpha", "--config", conf.to_str().unwrap(), "--data", &fixture("reliability.tsv")]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("duplicate"), "{}", stderr(&out));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        format!(
            "corpus_c = {}\ncorpus_a = {}\nlexicon_c = {}\nannotations = {}\naligner = grow-diag\nfilter = false\n",
            fixture("sample.fr"),
            fixture("sample.en"),
            fixture("french_lexicon.tsv"),
            fixture("sample_annotations.jsonl"),
        ),
    )
    .unwrap();

    // As configured: naive grow-diag projection, no UNSUPPORTED labels.
    let configured = dcproj(&["project", "--config", conf.to_str().unwrap()]);
    assert_eq!(code(&configured), 0, "stderr: {}", stderr(&configured));
    assert_eq!(unsupported_count(&stdout(&configured)), 0);

    // Flags override both the aligner and the filter switch.
    let overridden = dcproj(&[
        "project",
        "--config",
        conf.to_str().unwrap(),
        "--aligner",
        "intersection",
        "--filter",
    ]);
    assert_eq!(code(&overridden), 0, "stderr: {}", stderr(&overridden));
    assert!(unsupported_count(&stdout(&overridden)) >= 1);
}

#[test]
fn tokens_input_equals_corpus_input() {
    let dir = tempfile::tempdir().expect("tempdir");
    let tokens = dir.path().join("tokens.jsonl");
    let out = dcproj(&[
        "tokenize",
        "--corpus-c",
        &fixture("sample.fr"),
        "--corpus-a",
        &fixture("sample.en"),
        "--out",
        tokens.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let from_corpus = project_fixtures(&["--aligner", "intersection"]);
    let from_tokens = dcproj(&[
        "project",
        "--tokens",
        tokens.to_str().unwrap(),
        "--lexicon-c",
        &fixture("french_lexicon.tsv"),
        "--annotations",
        &fixture("sample_annotations.jsonl"),
        "--aligner",
        "intersection",
    ]);
    assert_eq!(code(&from_tokens), 0, "stderr: {}", stderr(&from_tokens));
    assert_eq!(from_corpus.stdout, from_tokens.stdout);
}

#[test]
fn classifier_commands_round_trip() {
    let dir = tempfile::tempdir().expect("tempdir");
    let tokens = dir.path().join("tokens.jsonl");
    let projected = dir.path().join("projected.jsonl");
    let model = dir.path().join("clf.tsv");

    let out = dcproj(&[
        "tokenize",
        "--corpus-c",
        &fixture("sample.fr"),
        "--corpus-a",
        &fixture("sample.en"),
        "--out",
        tokens.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = project_fixtures(&[
        "--aligner",
        "external",
        "--alignments",
        &fixture("sample_alignments.pharaoh"),
        "--filter",
        "--out",
        projected.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    let out = dcproj(&[
        "train-clf",
        "--projected",
        projected.to_str().unwrap(),
        "--tokens",
        tokens.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = dcproj(&[
        "classify",
        "--model",
        model.to_str().unwrap(),
        "--tokens",
        tokens.to_str().unwrap(),
        "--lexicon-c",
        &fixture("french_lexicon.tsv"),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("pair_id\tstart\tend\tform\tlabel\tscore\n"), "{text}");
    // One row per candidate in the corpus.
    assert_eq!(text.lines().count(), 9, "{text}");

    let out = dcproj(&[
        "eval-clf",
        "--model",
        model.to_str().unwrap(),
        "--tokens",
        tokens.to_str().unwrap(),
        "--gold",
        &fixture("sample_gold.jsonl"),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("DU\tP="), "{}", stdout(&out));
}

/// The pipeline must equal the composition of its steps, artifact for
/// artifact, byte for byte.
#[test]
fn pipeline_equals_composition() {
    let dir = tempfile::tempdir().expect("tempdir");
    let piped = dir.path().join("piped");
    let manual = dir.path().join("manual");
    fs::create_dir_all(&manual).unwrap();
    let p = |name: &str| piped.join(name).to_str().unwrap().to_string();
    let m = |name: &str| manual.join(name).to_str().unwrap().to_string();

    let out = dcproj(&[
        "pipeline",
        "--corpus-c",
        &fixture("sample.fr"),
        "--corpus-a",
        &fixture("sample.en"),
        "--lexicon-c",
        &fixture("french_lexicon.tsv"),
        "--annotations",
        &fixture("sample_annotations.jsonl"),
        "--aligner",
        "intersection",
        "--filter",
        "--output-dir",
        piped.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let steps: Vec<Vec<String>> = vec![
        vec![
            "tokenize".into(),
            "--corpus-c".into(),
            fixture("sample.fr"),
            "--corpus-a".into(),
            fixture("sample.en"),
            "--out".into(),
            m("tokens.jsonl"),
        ],
        vec![
            "train-align".into(),
            "--tokens".into(),
            m("tokens.jsonl"),
            "--direction".into(),
            "a_given_c".into(),
            "--out".into(),
            m("model_a_given_c.tsv"),
            "--trace".into(),
            m("trace_a_given_c.tsv"),
        ],
        vec![
            "train-align".into(),
            "--tokens".into(),
            m("tokens.jsonl"),
            "--direction".into(),
            "c_given_a".into(),
            "--out".into(),
            m("model_c_given_a.tsv"),
            "--trace".into(),
            m("trace_c_given_a.tsv"),
        ],
        vec![
            "align".into(),
            "--tokens".into(),
            m("tokens.jsonl"),
            "--model".into(),
            m("model_a_given_c.tsv"),
            "--out".into(),
            m("direct.pharaoh"),
        ],
        vec![
            "align".into(),
            "--tokens".into(),
            m("tokens.jsonl"),
            "--model".into(),
            m("model_c_given_a.tsv"),
            "--out".into(),
            m("inverse.pharaoh"),
        ],
        vec![
            "symmetrize".into(),
            "--direct".into(),
            m("direct.pharaoh"),
            "--inverse".into(),
            m("inverse.pharaoh"),
            "--method".into(),
            "intersection".into(),
            "--out".into(),
            m("aligned.pharaoh"),
        ],
        vec![
            "match".into(),
            "--tokens".into(),
            m("tokens.jsonl"),
            "--lexicon-c".into(),
            fixture("french_lexicon.tsv"),
            "--out".into(),
            m("candidates.tsv"),
        ],
        vec![
            "project".into(),
            "--tokens".into(),
            m("tokens.jsonl"),
            "--lexicon-c".into(),
            fixture("french_lexicon.tsv"),
            "--annotations".into(),
            fixture("sample_annotations.jsonl"),
            "--aligner".into(),
            "intersection".into(),
            "--filter".into(),
            "--out".into(),
            m("projected.jsonl"),
        ],
        vec![
            "stats".into(),
            "--projected".into(),
            m("projected.jsonl"),
            "--out".into(),
            m("stats.tsv"),
        ],
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let out = dcproj(&args);
        assert_eq!(code(&out), 0, "step {args:?} failed: {}", stderr(&out));
    }

    let artifacts = [
        "tokens.jsonl",
        "model_a_given_c.tsv",
        "model_c_given_a.tsv",
        "trace_a_given_c.tsv",
        "trace_c_given_a.tsv",
        "direct.pharaoh",
        "inverse.pharaoh",
        "aligned.pharaoh",
        "candidates.tsv",
        "projected.jsonl",
        "stats.tsv",
    ];
    for name in artifacts {
        let piped_bytes = fs::read(p(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let manual_bytes = fs::read(m(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(piped_bytes, manual_bytes, "artifact {name} differs");
    }
}

#[test]
fn synth_is_deterministic_and_oracle_consistent() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a: PathBuf = dir.path().join("a");
    let b: PathBuf = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = dcproj(&[
            "synth",
            "--pairs",
            "60",
            "--drop-rate",
            "0.2",
            "--ndu-rate",
            "0.3",
            "--seed",
            "5",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let names = [
        "corpus.c",
        "corpus.a",
        "lexicon_c.tsv",
        "lexicon_a.tsv",
        "annotations.jsonl",
        "gold.jsonl",
        "oracle.pharaoh",
    ];
    for name in names {
        let left = fs::read(a.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let right = fs::read(b.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(left, right, "synth artifact {name} differs across runs");
    }

    // Oracle alignments plus filtering reproduce the gold labels exactly.
    let s = |name: &str| a.join(name).to_str().unwrap().to_string();
    let projected = a.join("projected.jsonl");
    let out = dcproj(&[
        "project",
        "--corpus-c",
        &s("corpus.c"),
        "--corpus-a",
        &s("corpus.a"),
        "--profile-c",
        "generic",
        "--lexicon-c",
        &s("lexicon_c.tsv"),
        "--annotations",
        &s("annotations.jsonl"),
        "--aligner",
        "external",
        "--alignments",
        &s("oracle.pharaoh"),
        "--filter",
        "--out",
        projected.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let eval = dcproj(&[
        "eval",
        "--projected",
        projected.to_str().unwrap(),
        "--gold",
        &s("gold.jsonl"),
    ]);
    assert_eq!(code(&eval), 0, "stderr: {}", stderr(&eval));
    let report = stdout(&eval);
    for line in ["du_f1\t1.0000", "ndu_f1\t1.0000", "overall_precision\t1.0000"] {
        assert!(report.contains(line), "missing {line:?} in:\n{report}");
    }
}
