//! Grammar fidelity: lexicon inventory, production shape, sampling behavior,
//! annotation, recognition, and the exact size of each fragment.

use std::collections::HashSet;

use auxinv_core::grammar::{
    self, annotate, classify_sentence_type, parse, sample_tree, GrammarOptions, Language,
    LexicalCategory, Modifier, Number, Symbol, Transitivity,
};
use auxinv_core::rng;

use proptest::prelude::*;

fn toks(s: &str) -> Vec<String> {
    s.split(' ').map(str::to_string).collect()
}

#[test]
fn lexicon_inventory_matches_printed_grammar() {
    for lang in [Language::NoAgreement, Language::Agreement] {
        let lex = &lang.grammar().lexicon;
        assert_eq!(lex.category_size(LexicalCategory::Det, None), 6);
        assert_eq!(lex.category_size(LexicalCategory::N, None), 26);
        assert_eq!(lex.category_size(LexicalCategory::Vintrans, None), 9);
        assert_eq!(lex.category_size(LexicalCategory::Vtrans, None), 9);
        assert_eq!(lex.category_size(LexicalCategory::Aux, None), 4);
        assert_eq!(lex.category_size(LexicalCategory::P, None), 8);
        assert_eq!(lex.category_size(LexicalCategory::Rel, None), 2);
        assert_eq!(lex.lexical_word_count(), 64);
        assert_eq!(lex.fragment_vocabulary_size(), 66);
    }
}

#[test]
fn auxiliaries_and_features() {
    let no_agr = Language::NoAgreement.grammar();
    assert_eq!(
        no_agr.lexicon.words(LexicalCategory::Aux, None),
        vec!["can", "will", "could", "would"]
    );
    for aux in ["can", "will", "could", "would"] {
        assert_eq!(no_agr.lexicon.number_of(aux), None);
    }

    let agr = Language::Agreement.grammar();
    assert_eq!(
        agr.lexicon.words(LexicalCategory::Aux, None),
        vec!["do", "don't", "does", "doesn't"]
    );
    assert_eq!(agr.lexicon.number_of("do"), Some(Number::Plural));
    assert_eq!(agr.lexicon.number_of("don't"), Some(Number::Plural));
    assert_eq!(agr.lexicon.number_of("does"), Some(Number::Singular));
    assert_eq!(agr.lexicon.number_of("doesn't"), Some(Number::Singular));

    assert_eq!(agr.lexicon.number_of("walrus"), Some(Number::Singular));
    assert_eq!(agr.lexicon.number_of("walruses"), Some(Number::Plural));
}

#[test]
fn every_word_has_exactly_one_category() {
    let g = Language::NoAgreement.grammar();
    // Uniqueness is enforced at construction; spot-check the full inventory
    // partitions into the expected bucket sizes.
    let total: usize = [
        LexicalCategory::Det,
        LexicalCategory::N,
        LexicalCategory::Vintrans,
        LexicalCategory::Vtrans,
        LexicalCategory::Aux,
        LexicalCategory::P,
        LexicalCategory::Rel,
        LexicalCategory::Punct,
        LexicalCategory::Task,
    ]
    .iter()
    .map(|&c| g.lexicon.category_size(c, None))
    .sum();
    assert_eq!(total, 68);
}

#[test]
fn no_agreement_has_ten_productions_over_expected_nonterminals() {
    let g = grammar::no_agreement();
    assert_eq!(g.productions.len(), 10);
    let nts: HashSet<&str> = g.productions.iter().map(|p| p.lhs).collect();
    let expected: HashSet<&str> = ["S", "NP", "VP", "PP", "RC"].into_iter().collect();
    assert_eq!(nts, expected);
}

#[test]
fn no_agreement_derives_paper_sentences() {
    let g = grammar::no_agreement();
    for s in [
        "the walrus can giggle .",
        "the yak could amuse your quails by my raven .",
        "the newt can confuse my yak by the zebra .",
        "the newt can confuse my yak who will sleep .",
        "the newt who will sleep can confuse my yak .",
        "my walrus that will eat can giggle .",
        "her newt who can giggle could swim .",
    ] {
        assert!(parse(&g, &toks(s)).is_some(), "should derive {s:?}");
    }
    // Object relatives are intransitive as printed, so the paper's own
    // transitive object-relative example is only derivable under the
    // configuration switch.
    let trans_obj_rc = "the walruses that the newt will confuse can high_five your peacocks .";
    assert!(parse(&g, &toks(trans_obj_rc)).is_none());
    let g_fixed = grammar::no_agreement_with(GrammarOptions { object_rc_transitive: true });
    assert!(parse(&g_fixed, &toks(trans_obj_rc)).is_some());
    // And the printed intransitive form flips the other way.
    let intrans_obj_rc = "the walruses that the newt will sleep can high_five your peacocks .";
    assert!(parse(&g, &toks(intrans_obj_rc)).is_some());
    assert!(parse(&g_fixed, &toks(intrans_obj_rc)).is_none());
}

#[test]
fn agreement_grammar_enforces_agreement() {
    let g = grammar::agreement();
    assert!(parse(&g, &toks("the walrus does giggle .")).is_some());
    assert!(parse(&g, &toks("the yak doesn't amuse your quails by my raven .")).is_some());
    // Agreement violation: plural auxiliary with singular subject.
    assert!(parse(&g, &toks("the walrus do giggle .")).is_none());
    // Long-distance agreement across an object relative, as in the paper's
    // example; needs the transitive object-relative switch to be derivable.
    let g_fixed = grammar::agreement_with(GrammarOptions { object_rc_transitive: true });
    let long_distance = "the walruses that the newt does confuse do high_five your peacocks .";
    assert!(parse(&g_fixed, &toks(long_distance)).is_some());
    assert!(parse(&g, &toks(long_distance)).is_none());
    // RC-internal agreement must hold locally too.
    let bad_local = "the walruses that the newt do confuse do high_five your peacocks .";
    assert!(parse(&g_fixed, &toks(bad_local)).is_none());
}

#[test]
fn sampled_agreement_sentences_always_agree() {
    let g = grammar::agreement();
    let mut rng = rng::from_seed(11);
    for _ in 0..10_000 {
        let tree = sample_tree(&g, &mut rng);
        let ann = annotate(&g, &tree);
        let main_aux = ann.main_aux();
        assert_eq!(
            g.lexicon.number_of(main_aux),
            Some(ann.subject_number),
            "matrix agreement violated in {:?}",
            ann.sentence()
        );
        // Every sentence must re-parse under the grammar's own recognizer,
        // which checks all local agreement constraints.
        assert!(parse(&g, &ann.tokens).is_some(), "unparseable sample {:?}", ann.sentence());
    }
}

#[test]
fn sampling_is_deterministic_in_the_seed() {
    let g = grammar::no_agreement();
    let a = sample_tree(&g, &mut rng::from_seed(42));
    let b = sample_tree(&g, &mut rng::from_seed(42));
    assert_eq!(a, b);
    let c: Vec<_> = {
        let mut r = rng::from_seed(9);
        (0..50).map(|_| sample_tree(&g, &mut r).tokens()).collect()
    };
    let d: Vec<_> = {
        let mut r = rng::from_seed(9);
        (0..50).map(|_| sample_tree(&g, &mut r).tokens()).collect()
    };
    assert_eq!(c, d);
}

#[test]
fn modifier_choice_is_uniform_before_dedup() {
    let g = grammar::no_agreement();
    let mut rng = rng::from_seed(5);
    let n = 120_000;
    let mut subj = [0usize; 3];
    let mut obj = [0usize; 3];
    let mut objs_total = 0usize;
    for _ in 0..n {
        let ann = annotate(&g, &sample_tree(&g, &mut rng));
        let t = ann.sentence_type;
        subj[match t.subject_mod {
            Modifier::None => 0,
            Modifier::Pp => 1,
            Modifier::Rc => 2,
        }] += 1;
        if let Some(m) = t.object_mod {
            objs_total += 1;
            obj[match m {
                Modifier::None => 0,
                Modifier::Pp => 1,
                Modifier::Rc => 2,
            }] += 1;
        }
    }
    for count in subj {
        let frac = count as f64 / n as f64;
        assert!((frac - 1.0 / 3.0).abs() < 0.02, "subject modifier fraction {frac}");
    }
    for count in obj {
        let frac = count as f64 / objs_total as f64;
        assert!((frac - 1.0 / 3.0).abs() < 0.02, "object modifier fraction {frac}");
    }
}

#[test]
fn production_weight_overrides_bias_sampling() {
    let mut g = grammar::no_agreement();
    // Make the transitive VP rule nine times as likely as the intransitive.
    let vp_rules: Vec<usize> = (0..g.productions.len())
        .filter(|&i| g.productions[i].lhs == "VP")
        .collect();
    g.set_weight(vp_rules[1], 9.0);
    let mut rng = rng::from_seed(3);
    let n = 20_000;
    let transitive = (0..n)
        .filter(|_| {
            let ann = annotate(&g, &sample_tree(&g, &mut rng));
            ann.sentence_type.transitivity == Transitivity::Transitive
        })
        .count();
    let frac = transitive as f64 / n as f64;
    assert!((frac - 0.9).abs() < 0.02, "transitive fraction {frac}");
}

#[test]
fn annotations_match_paper_table() {
    let g = grammar::no_agreement();

    // Table-3-shaped sentences, with off-lexicon words swapped for in-grammar
    // ones of the same category ("laugh" is not in the printed verb list).
    let ann = parse(&g, &toks("my unicorns would giggle .")).expect("derivable");
    assert_eq!(ann.main_aux(), "would");
    assert_eq!(ann.fourth_word(), "giggle");
    assert_eq!(ann.subject_noun(), "unicorns");
    assert_eq!(ann.subject_number, Number::Plural);

    let ann = parse(&g, &toks("my quail with her yak will read .")).expect("derivable");
    assert_eq!(ann.main_aux(), "will");
    assert_eq!(ann.fourth_word(), "her");
    assert_eq!(ann.subject_noun(), "quail");
    assert_eq!(ann.sentence_type.subject_mod, Modifier::Pp);

    let ann = parse(&g, &toks("her newt who can giggle could swim .")).expect("derivable");
    assert_eq!(ann.main_aux(), "could");
    assert_eq!(ann.fourth_word(), "can");
    assert_eq!(ann.subject_noun(), "newt");
    let aux_tokens: Vec<&str> = ann.aux_indices.iter().map(|&i| ann.tokens[i].as_str()).collect();
    assert_eq!(aux_tokens, vec!["can", "could"]);
    assert_eq!(ann.main_aux_index, ann.aux_indices[1]);

    let ann = parse(&g, &toks("the walrus can giggle .")).expect("derivable");
    assert_eq!(ann.aux_indices, vec![ann.main_aux_index]);
}

#[test]
fn sentence_type_classification_matches_examples() {
    let g = grammar::no_agreement();

    let ann = parse(&g, &toks("the newt can confuse my yak who will sleep .")).unwrap();
    let t = classify_sentence_type(&ann);
    assert_eq!(t.subject_mod, Modifier::None);
    assert_eq!(t.transitivity, Transitivity::Transitive);
    assert_eq!(t.object_mod, Some(Modifier::Rc));

    let ann = parse(&g, &toks("the newt who will sleep can confuse my yak .")).unwrap();
    let t = classify_sentence_type(&ann);
    assert_eq!(t.subject_mod, Modifier::Rc);
    assert_eq!(t.object_mod, Some(Modifier::None));

    let ann = parse(&g, &toks("the walrus can giggle .")).unwrap();
    let t = classify_sentence_type(&ann);
    assert_eq!(t.subject_mod, Modifier::None);
    assert_eq!(t.transitivity, Transitivity::Intransitive);
    assert_eq!(t.object_mod, None);
}

#[test]
fn exact_language_sizes() {
    // Frozen from the dynamic program and cross-checked against the
    // skeleton-product sum below.
    assert_eq!(grammar::no_agreement().language_size(), 495_630_616_394_160);
    assert_eq!(grammar::agreement().language_size(), 68_631_332_143_608);
    // The object-relative verb substitution swaps one 9-word class for
    // another, so it does not change the counts.
    let fixed = grammar::no_agreement_with(GrammarOptions { object_rc_transitive: true });
    assert_eq!(fixed.language_size(), 495_630_616_394_160);
}

#[test]
fn skeleton_sum_agrees_with_dynamic_program() {
    for lang in [Language::NoAgreement, Language::Agreement] {
        let g = lang.grammar();
        let sum: u128 = g
            .skeletons()
            .iter()
            .map(|skel| {
                skel.iter()
                    .map(|sym| match sym {
                        Symbol::Cat(c, n) => g.lexicon.category_size(*c, *n) as u128,
                        _ => 1,
                    })
                    .product::<u128>()
            })
            .sum();
        assert_eq!(sum, g.language_size());
    }
}

#[test]
fn skeletons_bound_length_and_fourth_word() {
    for lang in [Language::NoAgreement, Language::Agreement] {
        let g = lang.grammar();
        assert_eq!(g.max_sentence_len(), 17);
        let categories: HashSet<LexicalCategory> = g
            .skeletons()
            .iter()
            .filter_map(|skel| match skel.get(3) {
                Some(Symbol::Cat(c, _)) => Some(*c),
                _ => None,
            })
            .collect();
        let expected: HashSet<LexicalCategory> = [
            LexicalCategory::Vintrans,
            LexicalCategory::Vtrans,
            LexicalCategory::Det,
            LexicalCategory::Aux,
        ]
        .into_iter()
        .collect();
        assert_eq!(categories, expected);
        assert_eq!(g.words_at_index(3).len(), 28);
    }
    assert_eq!(grammar::no_agreement().skeletons().len(), 30);
}

#[test]
fn export_format_is_stable() {
    let g = grammar::no_agreement();
    let text = g.export();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "S -> NP VP . [1]");
    assert_eq!(lines[1], "NP -> Det N [1]");
    assert_eq!(lines[7], "RC -> Rel Aux V_intrans [1]");
    assert_eq!(lines[8], "RC -> Rel Det N Aux V_intrans [1]");
    assert_eq!(lines[9], "RC -> Rel Aux V_trans Det N [1]");
    assert!(lines.contains(&"Det: the some my your our her"));
    assert!(lines.contains(&"Aux: can will could would"));
    assert!(text.contains("N: newt newts orangutan orangutans"));
    // 10 productions + one lexicon line per mentioned bucket.
    assert_eq!(lines.len(), 10 + 7);
}

#[test]
fn question_membership_checks() {
    let g = grammar::no_agreement();
    let good = toks("can the newt who will sleep confuse my yak ?");
    assert!(grammar::question_derivable(&g, &good));
    assert!(grammar::question_derivable_hierarchical(&g, &good));
    // The linear rule's output on a subject-RC sentence: a question-like
    // string formed by fronting a non-matrix auxiliary.
    let linear = toks("will my walrus that eat can giggle ?");
    assert!(grammar::question_derivable(&g, &linear));
    assert!(!grammar::question_derivable_hierarchical(&g, &linear));
    // Not aux-fronted / not question-terminated / aux mismatch.
    assert!(!grammar::question_derivable(&g, &toks("the walrus can giggle ?")));
    assert!(!grammar::question_derivable(&g, &toks("can the walrus giggle .")));
    assert!(!grammar::question_derivable(&g, &toks("would the walrus giggle can ?")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_round_trip_and_start_det_n(seed in 0u64..1_000_000) {
        for lang in [Language::NoAgreement, Language::Agreement] {
            let g = lang.grammar();
            let mut r = rng::from_seed(seed);
            let tree = sample_tree(&g, &mut r);
            let ann = annotate(&g, &tree);
            prop_assert_eq!(ann.tokens.last().map(String::as_str), Some("."));
            prop_assert_eq!(g.lexicon.category_of(&ann.tokens[0]), Some(LexicalCategory::Det));
            prop_assert_eq!(g.lexicon.category_of(&ann.tokens[1]), Some(LexicalCategory::N));
            prop_assert!(ann.tokens.len() <= 17);
            prop_assert!(ann.tokens.len() >= 5);
            // Annotation via the derivation and via the recognizer agree.
            let reparsed = parse(&g, &ann.tokens).expect("sample must re-parse");
            prop_assert_eq!(&reparsed, &ann);
            // Auxiliary ordering invariants.
            prop_assert!(ann.aux_indices.contains(&ann.main_aux_index));
            if ann.sentence_type.subject_mod == Modifier::Rc {
                prop_assert_ne!(ann.main_aux_index, ann.aux_indices[0]);
            } else {
                prop_assert_eq!(ann.main_aux_index, ann.aux_indices[0]);
            }
        }
    }
}
