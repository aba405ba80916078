//! Property tests for words, nets, automata, simple regular expressions and
//! the text formats.

mod common;

use std::collections::BTreeSet;

use common::*;
use num_bigint::BigUint;
use pnclosure::fsa::{are_equivalent, decide, is_included, Fsa, Query};
use pnclosure::io::{parse_fsa, parse_net, parse_sre, print_fsa, print_net};
use pnclosure::net::{right_product, subword, Alphabet, Letter, Marking, Word};
use pnclosure::reach::{brute_force_traces, reachable_markings};
use pnclosure::sre::{linearize, min_word, normalize_product, product_to_fsa, AlphabetOrder};
use proptest::prelude::*;

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(LETTERS.to_vec()), 0..=max_len)
        .prop_map(|ls| Word::new(ls.into_iter().map(Letter::new).collect()))
}

/// Every word obtained by deleting letters from `w`.
fn subwords(w: &Word) -> BTreeSet<Word> {
    let n = w.len();
    (0..1u32 << n)
        .map(|mask| {
            Word::new(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| w.letters()[i].clone())
                    .collect(),
            )
        })
        .collect()
}

fn ab() -> Alphabet {
    Alphabet::from_strs(&LETTERS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subword_is_a_partial_order(u in word_strategy(5), v in word_strategy(5), x in word_strategy(5)) {
        prop_assert!(u.is_subword_of(&u));
        if u.is_subword_of(&v) && v.is_subword_of(&u) {
            prop_assert_eq!(&u, &v);
        }
        if u.is_subword_of(&v) && v.is_subword_of(&x) {
            prop_assert!(u.is_subword_of(&x));
        }
        if u.is_subword_of(&v) {
            prop_assert!(u.len() <= v.len());
        }
    }

    #[test]
    fn deleting_letters_gives_exactly_the_subwords(v in word_strategy(5), u in word_strategy(4)) {
        let subs = subwords(&v);
        prop_assert_eq!(subs.contains(&u), subword(u.letters(), v.letters()));
    }

    #[test]
    fn firing_respects_the_flow_equation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r, 4, 4, 3, &LETTERS);
        let m = random_marking(&mut r, net.num_places(), 4);
        for t in 0..net.num_transitions() {
            let tr = net.transition(t);
            let m2 = net.fire(&m, t);
            prop_assert_eq!(m2.is_ok(), net.is_enabled(&m, t));
            if let Ok(m2) = m2 {
                for p in 0..net.num_places() {
                    prop_assert_eq!(m2.get(p) + &tr.pre[p], m.get(p) + &tr.post[p]);
                }
            }
        }
    }

    #[test]
    fn bpp_means_each_transition_consumes_at_most_one_token(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = if seed % 2 == 0 {
            random_bpp(&mut r, 4, 4, &LETTERS, 0.2)
        } else {
            random_net(&mut r, 4, 4, 2, &LETTERS)
        };
        let by_definition = net.transitions().iter().all(|t| t.consumed() <= BigUint::from(1u32));
        prop_assert_eq!(net.is_bpp(), by_definition);
        let widened = net.with_alphabet(ab().with_letter(Letter::new("c"))).unwrap();
        prop_assert_eq!(widened.is_bpp(), net.is_bpp());
    }

    #[test]
    fn right_product_preserves_left_behaviour(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n1 = random_net(&mut r, 2, 3, 2, &LETTERS);
        let n2 = random_net(&mut r, 2, 3, 2, &LETTERS);
        let m1 = random_marking(&mut r, n1.num_places(), 2);
        let m2 = random_marking(&mut r, n2.num_places(), 2);
        let prod = right_product(&n1, &n2).unwrap();
        prop_assert_eq!(prod.num_places(), n1.num_places() + n2.num_places());
        let m = m1.extended(m2.counts());
        prop_assert_eq!(brute_force_traces(&prod, &m, 3), brute_force_traces(&n1, &m1, 3));
        let left: BTreeSet<Vec<BigUint>> =
            reachable_markings(&n1, &m1, 3).into_iter().map(Marking::into_counts).collect();
        for reached in reachable_markings(&prod, &m, 3) {
            let proj = reached.counts()[..n1.num_places()].to_vec();
            prop_assert!(left.contains(&proj), "projection {:?} not reachable in the left net", proj);
        }
    }

    #[test]
    fn saturation_is_idempotent_and_extensive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_fsa(&mut r, 4, &LETTERS, 0.2);
        let up = a.saturate_up();
        let down = a.saturate_down();
        prop_assert!(are_equivalent(&up.saturate_up(), &up).unwrap().holds);
        prop_assert!(are_equivalent(&down.saturate_down(), &down).unwrap().holds);
        prop_assert!(is_included(&a, &up).unwrap().holds);
        prop_assert!(is_included(&a, &down).unwrap().holds);
        // dc(uc(L)) contains both closures
        let both = up.saturate_down();
        prop_assert!(is_included(&up, &both).unwrap().holds);
        prop_assert!(is_included(&down, &both).unwrap().holds);
    }

    #[test]
    fn up_saturation_matches_subword_search(seed in any::<u64>(), w in word_strategy(5)) {
        let mut r = rng(seed);
        let a = random_fsa(&mut r, 4, &LETTERS, 0.2);
        let expected = subwords(&w).iter().any(|u| a.accepts(u));
        prop_assert_eq!(a.saturate_up().accepts(&w), expected);
    }

    #[test]
    fn down_saturation_matches_superword_search(seed in any::<u64>(), w in word_strategy(2)) {
        let mut r = rng(seed);
        let a = random_fsa(&mut r, 3, &LETTERS, 0.2);
        // a shortest superword in L(a) has at most |Q|·(|w|+1) letters
        let bound = a.num_states() * (w.len() + 1);
        let expected = a.enumerate(bound).iter().any(|v| w.is_subword_of(v));
        prop_assert_eq!(a.saturate_down().accepts(&w), expected);
    }

    #[test]
    fn decisions_agree_with_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_fsa(&mut r, 4, &LETTERS, 0.2);
        let b = random_fsa(&mut r, 4, &LETTERS, 0.2);
        let inc = is_included(&a, &b).unwrap();
        let words = words_up_to(&LETTERS, 5);
        if inc.holds {
            prop_assert!(words.iter().all(|w| !a.accepts(w) || b.accepts(w)));
        } else {
            let ce = inc.counterexample.expect("failing inclusion has a witness");
            prop_assert!(a.accepts(&ce) && !b.accepts(&ce));
        }
        let eq = are_equivalent(&a, &b).unwrap();
        prop_assert_eq!(eq.holds, are_equivalent(&b, &a).unwrap().holds);
        if let Some(ce) = eq.counterexample {
            prop_assert_ne!(a.accepts(&ce), b.accepts(&ce));
        }
        let empty = decide(&a, None, &Query::Emptiness).unwrap();
        prop_assert_eq!(empty.holds, a.shortest_word().is_none());
        for w in words.iter().take(20) {
            prop_assert_eq!(decide(&a, None, &Query::Membership(w.clone())).unwrap().holds, a.accepts(w));
        }
    }

    #[test]
    fn minimal_dfa_accepts_the_same_words(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_fsa(&mut r, 4, &LETTERS, 0.2);
        let dfa = a.determinize();
        let min = dfa.minimize();
        prop_assert!(min.num_states() <= dfa.num_states());
        prop_assert_eq!(min.num_states(), a.minimal_dfa_size());
        let back: Fsa = min.to_fsa();
        for w in words_up_to(&LETTERS, 5) {
            prop_assert_eq!(back.accepts(&w), a.accepts(&w));
        }
    }

    #[test]
    fn min_word_embeds_into_every_word_of_a_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_product(&mut r, &LETTERS, 4);
        let mw = min_word(&p);
        let a = product_to_fsa(&p, &ab());
        prop_assert!(a.accepts(&mw));
        for w in p.unroll(2) {
            prop_assert!(mw.is_subword_of(&w));
            prop_assert!(a.accepts(&w));
        }
    }

    #[test]
    fn linearization_keeps_the_downward_closure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_product(&mut r, &LETTERS, 4);
        let lin = linearize(&p, &AlphabetOrder::of(&ab()));
        let original = product_to_fsa(&p, &ab()).saturate_down();
        let linear = lin.to_fsa(&ab()).saturate_down();
        prop_assert!(are_equivalent(&original, &linear).unwrap().holds);
    }

    #[test]
    fn normalization_keeps_the_downward_closure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_product(&mut r, &LETTERS, 4);
        let np = normalize_product(&p);
        prop_assert_eq!(np.slots.len(), np.blocks.len() + 1);
        let original = product_to_fsa(&p, &ab()).saturate_down();
        let normal = product_to_fsa(&np.to_product(), &ab()).saturate_down();
        prop_assert!(are_equivalent(&original, &normal).unwrap().holds);
    }

    #[test]
    fn sre_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_sre(&mut r, &LETTERS);
        prop_assert_eq!(parse_sre(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn net_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r, 4, 4, 3, &LETTERS);
        let inst = random_instance(&mut r, net);
        let text = print_net(&inst);
        let back = parse_net(&text).unwrap();
        prop_assert_eq!(print_net(&back), text);
        prop_assert_eq!(back.initial(), inst.initial());
        prop_assert_eq!(back.final_marking(), inst.final_marking());
        prop_assert_eq!(back.net().num_transitions(), inst.net().num_transitions());
    }

    #[test]
    fn fsa_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_fsa(&mut r, 4, &LETTERS, 0.2);
        let back = parse_fsa(&print_fsa(&a)).unwrap();
        prop_assert!(are_equivalent(&a, &back).unwrap().holds);
        prop_assert_eq!(back.num_states(), a.num_states());
    }
}
