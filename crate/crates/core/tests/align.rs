use std::collections::BTreeSet;
use std::fs;

use dcproj_core::align::{
    bind_to_corpus, grow_diag, intersect, read_model, read_pharaoh, train_em, union_align,
    viterbi_align, write_model, write_pharaoh, AlignerKind, AlignmentLink, AlignmentSet,
    Direction, NULL_WORD,
};
use dcproj_core::corpus::{tokenize, Punctuation, SentencePair, TokenizerProfile};
use proptest::prelude::*;

fn pair(id: &str, c: &str, a: &str) -> SentencePair {
    let punct = Punctuation::default();
    SentencePair {
        pair_id: id.into(),
        c_tokens: tokenize(c, TokenizerProfile::French, &punct),
        a_tokens: tokenize(a, TokenizerProfile::Generic, &punct),
    }
}

fn two_pair_corpus() -> Vec<SentencePair> {
    vec![
        pair("00000001", "la maison", "the house"),
        pair("00000002", "la fleur", "the flower"),
    ]
}

#[test]
fn one_pair_corpus_converges_in_one_iteration() {
    // Single pair ("oui","yes"): both "yes" and NULL co-occur only with
    // "oui", so after one M-step each conditions on "oui" with certainty.
    let pairs = vec![pair("00000001", "oui", "yes")];
    let (model, trace) = train_em::<f64>(&pairs, Direction::CGivenA, 1).unwrap();
    assert_eq!(model.prob("yes", "oui"), 1.0);
    assert_eq!(model.prob(NULL_WORD, "oui"), 1.0);
    assert_eq!(trace.len(), 1);
    assert!(trace[0].abs() < 1e-12, "loglik {}", trace[0]);
    model.check_normalized(1e-6).unwrap();
}

// Frozen reference values from an independent EM implementation (dual-route:
// per-token factorized E-step cross-checked against brute-force enumeration
// of all alignment functions; the routes agree to 7e-18).
#[test]
fn two_pair_corpus_matches_independent_oracle() {
    let (model, trace) = train_em::<f64>(&two_pair_corpus(), Direction::CGivenA, 10).unwrap();
    let tol = 1e-9;
    assert!((model.prob("the", "la") - 0.9036886221911256).abs() < tol);
    assert!((model.prob("the", "maison") - 0.04815568890443712).abs() < tol);
    assert!((model.prob("the", "fleur") - 0.04815568890443712).abs() < tol);
    assert!((model.prob("house", "maison") - 0.982003652902086).abs() < tol);
    assert!((model.prob(NULL_WORD, "la") - 0.9036886221911256).abs() < tol);
    assert!((trace[0] - -3.7778464353634065).abs() < tol);
    assert!((trace[9] - -3.054885827260212).abs() < tol);
    assert!(model.prob("the", "la") > model.prob("the", "maison"));
    assert!(model.prob("the", "la") > model.prob("the", "fleur"));
    model.check_normalized(1e-6).unwrap();
}

#[test]
fn log_likelihood_is_non_decreasing() {
    let (_, trace) = train_em::<f64>(&two_pair_corpus(), Direction::AGivenC, 15).unwrap();
    for w in trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "trace decreased: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn distributions_stay_normalized_each_iteration() {
    for iterations in 1..=5 {
        let (model, _) = train_em::<f64>(&two_pair_corpus(), Direction::CGivenA, iterations).unwrap();
        model.check_normalized(1e-6).unwrap();
    }
}

#[test]
fn training_is_deterministic() {
    let (m1, t1) = train_em::<f64>(&two_pair_corpus(), Direction::AGivenC, 10).unwrap();
    let (m2, t2) = train_em::<f64>(&two_pair_corpus(), Direction::AGivenC, 10).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(t1, t2);
}

#[test]
fn empty_corpus_is_an_error() {
    assert!(train_em::<f64>(&[], Direction::CGivenA, 5).is_err());
}

#[test]
fn f32_training_tracks_f64() {
    let (m64, _) = train_em::<f64>(&two_pair_corpus(), Direction::CGivenA, 10).unwrap();
    let (m32, _) = train_em::<f32>(&two_pair_corpus(), Direction::CGivenA, 10).unwrap();
    assert!((m64.prob("the", "la") - m32.prob("the", "la") as f64).abs() < 1e-5);
}

#[test]
fn viterbi_links_dominant_translation() {
    // On this corpus "la" and NULL co-occur with exactly the same words, so
    // their distributions stay identical and "the" loses its tie against
    // NULL (no link). "house" strictly prefers "maison".
    let pairs = two_pair_corpus();
    let (model, _) = train_em::<f64>(&pairs, Direction::AGivenC, 10).unwrap();
    let set = viterbi_align(&model, &pairs[0]);
    assert_eq!(set.aligner, AlignerKind::Direct);
    assert_eq!(set.links, BTreeSet::from([AlignmentLink::new(1, 1)]));
}

#[test]
fn viterbi_oov_words_fall_to_null() {
    let (model, _) = train_em::<f64>(&two_pair_corpus(), Direction::AGivenC, 5).unwrap();
    let unseen = pair("00000009", "zut alors", "completely unseen words");
    let set = viterbi_align(&model, &unseen);
    assert!(set.links.is_empty());
}

fn hand_model(direction: Direction, rows: &[(&str, &str, f64)]) -> dcproj_core::TranslationModel64 {
    let mut t: std::collections::BTreeMap<String, std::collections::BTreeMap<String, f64>> =
        Default::default();
    for &(cond, out, p) in rows {
        t.entry(cond.into()).or_default().insert(out.into(), p);
    }
    dcproj_core::align::TranslationModel { direction, t }
}

#[test]
fn viterbi_tie_between_tokens_goes_to_lowest_index() {
    // "la la" vs "the": both C positions score 0.8 > NULL's 0.2.
    let model = hand_model(
        Direction::AGivenC,
        &[("la", "the", 0.8), (NULL_WORD, "the", 0.2)],
    );
    let p = pair("00000001", "la la", "the");
    let set = viterbi_align(&model, &p);
    assert_eq!(set.links.len(), 1);
    assert_eq!(set.links.iter().next().unwrap().c_index, 0);
}

#[test]
fn viterbi_null_wins_exact_tie() {
    let model = hand_model(
        Direction::AGivenC,
        &[("la", "the", 0.5), (NULL_WORD, "the", 0.5)],
    );
    let p = pair("00000001", "la", "the");
    assert!(viterbi_align(&model, &p).links.is_empty());
}

#[test]
fn viterbi_inverse_mirrors_indices() {
    // Inverse convention: C tokens pick their best A token.
    let model = hand_model(
        Direction::CGivenA,
        &[("house", "maison", 0.9), (NULL_WORD, "maison", 0.01), (NULL_WORD, "la", 0.9)],
    );
    let p = pair("00000001", "la maison", "the house");
    let set = viterbi_align(&model, &p);
    assert_eq!(set.aligner, AlignerKind::Inverse);
    assert_eq!(set.links.iter().collect::<Vec<_>>(), [&AlignmentLink::new(1, 1)]);
}

#[test]
fn model_tsv_round_trips() {
    let (model, _) = train_em::<f64>(&two_pair_corpus(), Direction::CGivenA, 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.tsv");
    write_model(&path, &model).unwrap();
    let header = fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("# direction\tc_given_a\n"));
    let again = read_model::<f64>(&path).unwrap();
    assert_eq!(model.direction, again.direction);
    assert_eq!(model.t, again.t);
}

#[test]
fn model_with_bad_header_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.tsv");
    fs::write(&path, "the\tla\t0.9\n").unwrap();
    assert!(read_model::<f64>(&path).is_err());
}

fn set(id: &str, links: &[(usize, usize)], aligner: AlignerKind) -> AlignmentSet {
    let mut s = AlignmentSet::new(id, aligner);
    s.links = links.iter().map(|&(c, a)| AlignmentLink::new(c, a)).collect();
    s
}

#[test]
fn intersect_union_spec_cases() {
    let d = set("00000001", &[(0, 0), (0, 1), (1, 2)], AlignerKind::Direct);
    let i = set("00000001", &[(0, 0), (1, 2), (2, 2)], AlignerKind::Inverse);
    let inter = intersect(&d, &i).unwrap();
    assert_eq!(inter.links, set("00000001", &[(0, 0), (1, 2)], AlignerKind::Intersection).links);
    assert_eq!(inter.aligner, AlignerKind::Intersection);
    let un = union_align(&d, &i).unwrap();
    assert_eq!(un.links.len(), 4);
    assert_eq!(un.aligner, AlignerKind::Union);
}

#[test]
fn grow_diag_identity_when_equal() {
    let d = set("00000001", &[(0, 0), (2, 3), (5, 1)], AlignerKind::Direct);
    let g = grow_diag(&d, &d).unwrap();
    assert_eq!(g.links, d.links);
}

fn arb_links() -> impl Strategy<Value = BTreeSet<AlignmentLink>> {
    proptest::collection::btree_set((0usize..12, 0usize..12), 0..30)
        .prop_map(|s| s.into_iter().map(|(c, a)| AlignmentLink::new(c, a)).collect())
}

proptest! {
    // The symmetrization chain: intersection ⊆ direct/inverse and
    // intersection ⊆ grow_diag ⊆ union.
    #[test]
    fn symmetrization_chain(dl in arb_links(), il in arb_links()) {
        let d = AlignmentSet { pair_id: "00000001".into(), links: dl, aligner: AlignerKind::Direct };
        let i = AlignmentSet { pair_id: "00000001".into(), links: il, aligner: AlignerKind::Inverse };
        let inter = intersect(&d, &i).unwrap();
        let grown = grow_diag(&d, &i).unwrap();
        let un = union_align(&d, &i).unwrap();
        prop_assert!(inter.links.is_subset(&d.links));
        prop_assert!(inter.links.is_subset(&i.links));
        prop_assert!(inter.links.is_subset(&grown.links));
        prop_assert!(grown.links.is_subset(&un.links));
    }

    // Mirrored-argument commutativity of intersection and union.
    #[test]
    fn intersect_union_commute(dl in arb_links(), il in arb_links()) {
        let d = AlignmentSet { pair_id: "00000001".into(), links: dl, aligner: AlignerKind::Direct };
        let i = AlignmentSet { pair_id: "00000001".into(), links: il, aligner: AlignerKind::Inverse };
        prop_assert_eq!(intersect(&d, &i).unwrap().links, intersect(&i, &d).unwrap().links);
        prop_assert_eq!(union_align(&d, &i).unwrap().links, union_align(&i, &d).unwrap().links);
    }

    #[test]
    fn grow_diag_is_deterministic(dl in arb_links(), il in arb_links()) {
        let d = AlignmentSet { pair_id: "00000001".into(), links: dl, aligner: AlignerKind::Direct };
        let i = AlignmentSet { pair_id: "00000001".into(), links: il, aligner: AlignerKind::Inverse };
        prop_assert_eq!(grow_diag(&d, &i).unwrap().links, grow_diag(&d, &i).unwrap().links);
    }
}

#[test]
fn pharaoh_round_trip() {
    let sets = vec![
        set("00000001", &[(0, 0), (1, 2)], AlignerKind::External),
        set("00000002", &[], AlignerKind::External),
        set("00000003", &[(3, 1)], AlignerKind::External),
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.align");
    write_pharaoh(&sets, &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "0-0 1-2\n\n3-1\n");
    let again = read_pharaoh(&path).unwrap();
    assert_eq!(sets, again);
}

#[test]
fn pharaoh_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.align");
    fs::write(&path, "0-0 x-2\n").unwrap();
    let err = read_pharaoh(&path).unwrap_err();
    assert!(err.to_string().contains("x-2"), "{err}");
}

#[test]
fn bind_checks_counts_and_bounds() {
    let pairs = two_pair_corpus();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.align");

    fs::write(&path, "0-0\n").unwrap();
    let sets = read_pharaoh(&path).unwrap();
    assert!(bind_to_corpus(sets, &pairs).is_err());

    fs::write(&path, "0-0 1-1\n0-5\n").unwrap();
    let sets = read_pharaoh(&path).unwrap();
    assert!(bind_to_corpus(sets, &pairs).is_err());

    fs::write(&path, "0-0 1-1\n0-0\n").unwrap();
    let sets = read_pharaoh(&path).unwrap();
    let bound = bind_to_corpus(sets, &pairs).unwrap();
    assert_eq!(bound[1].pair_id, "00000002");
}
