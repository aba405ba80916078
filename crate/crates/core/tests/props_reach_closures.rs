//! Property tests for coverability, Karp–Miller graphs, membership and the
//! closure automata, checked against bounded enumeration.

mod common;

use std::collections::BTreeSet;

use common::*;
use num_bigint::BigUint;
use num_traits::One;
use pnclosure::closures::{
    bpp_cutoff, dc_fsa_bpp, dc_fsa_pn, k_bounded_fsa, rackoff_f, uc_fsa, uc_fsa_bpp, BoundValue, UcMode,
};
use pnclosure::fsa::{are_equivalent, is_included};
use pnclosure::net::{NetInstance, Word};
use pnclosure::omega::{insert_maximal, OmegaMarking, OmegaValue};
use pnclosure::reach::{
    brute_force_language, coverable, is_trace, km_covers, km_graph, member, reachable_markings,
    simultaneously_unbounded, MemberMode,
};
use pnclosure::Budget;
use proptest::prelude::*;

fn budget() -> Budget {
    Budget::with_nodes(20_000)
}

fn general(seed: u64) -> NetInstance {
    let mut r = rng(seed);
    let net = random_net(&mut r, 3, 4, 2, &LETTERS);
    random_instance(&mut r, net)
}

fn bpp(seed: u64) -> NetInstance {
    let mut r = rng(seed);
    let net = random_bpp(&mut r, 3, 4, &LETTERS, 0.15);
    random_instance(&mut r, net)
}

fn down_of(words: &BTreeSet<Word>, k: usize) -> BTreeSet<Word> {
    words_up_to(&LETTERS, k)
        .into_iter()
        .filter(|u| words.iter().any(|v| u.is_subword_of(v)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coverability_witness_replays(seed in any::<u64>()) {
        let inst = general(seed);
        let Ok(c) = coverable(&inst, &budget()) else { return Ok(()); };
        let net = inst.net();
        if c.coverable {
            let run = c.witness.expect("coverable answers carry a run");
            let end = net.fire_sequence(inst.initial(), &run).expect("witness is fireable");
            prop_assert!(end.covers(inst.final_marking()));
        } else {
            for m in reachable_markings(net, inst.initial(), 4) {
                prop_assert!(!m.covers(inst.final_marking()));
            }
        }
    }

    #[test]
    fn karp_miller_covers_every_reachable_marking(seed in any::<u64>()) {
        let inst = general(seed);
        let Ok(g) = km_graph(inst.net(), inst.initial(), &Budget::with_nodes(5_000)) else { return Ok(()); };
        prop_assert!(g.complete);
        prop_assert_eq!(&g.nodes[g.root], &OmegaMarking::from(inst.initial()));
        for m in reachable_markings(inst.net(), inst.initial(), 4) {
            prop_assert!(km_covers(&g, &m));
        }
        // a single place is unbounded exactly when some node carries ω on it
        for p in 0..inst.net().num_places() {
            let unbounded = simultaneously_unbounded(inst.net(), inst.initial(), &[p], &budget()).unwrap();
            prop_assert_eq!(unbounded, g.nodes.iter().any(|n| n.get(p).is_omega()));
        }
    }

    #[test]
    fn membership_agrees_with_bounded_runs(seed in any::<u64>()) {
        let inst = general(seed);
        let lang = brute_force_language(&inst, 4);
        for w in words_up_to(&LETTERS, 3) {
            let Ok(exact) = member(&w, &inst, MemberMode::Exact, &budget()) else { continue; };
            if lang.contains(&w) {
                prop_assert!(exact, "{} is in L", w);
            }
            if let Ok(up) = member(&w, &inst, MemberMode::Up, &budget()) {
                prop_assert!(up || !exact);
                if lang.iter().any(|u| u.is_subword_of(&w)) {
                    prop_assert!(up, "{} is in uc(L)", w);
                }
            }
            if let Ok(down) = member(&w, &inst, MemberMode::Down, &budget()) {
                prop_assert!(down || !exact);
                if lang.iter().any(|v| w.is_subword_of(v)) {
                    prop_assert!(down, "{} is in dc(L)", w);
                }
            }
            if exact {
                prop_assert!(is_trace(inst.net(), inst.initial(), &w, &budget()).unwrap());
            }
        }
    }

    #[test]
    fn k_bounded_automaton_matches_runs(seed in any::<u64>(), k in 0usize..4) {
        let inst = general(seed);
        let a = k_bounded_fsa(&inst, k, &budget()).unwrap();
        let lang = brute_force_language(&inst, k);
        for w in words_up_to(&LETTERS, k) {
            prop_assert_eq!(a.accepts(&w), lang.contains(&w), "word {}", w);
        }
    }

    #[test]
    fn larger_run_bounds_give_larger_up_closures(seed in any::<u64>(), k in 0usize..3) {
        let inst = general(seed);
        let small = uc_fsa(&inst, &UcMode::UserK(k), &budget()).unwrap();
        let large = uc_fsa(&inst, &UcMode::UserK(k + 1), &budget()).unwrap();
        prop_assert!(is_included(&small.fsa, &large.fsa).unwrap().holds);
        prop_assert!(!small.exactness.is_exact() || are_equivalent(&small.fsa, &large.fsa).unwrap().holds);
    }

    #[test]
    fn bpp_down_closure_is_sound_and_complete(seed in any::<u64>()) {
        let inst = bpp(seed);
        let Ok(dc) = dc_fsa_bpp(&inst, &budget()) else { return Ok(()); };
        prop_assert!(dc.exactness.is_exact());
        let lang = brute_force_language(&inst, 4);
        for w in down_of(&lang, 3) {
            prop_assert!(dc.fsa.accepts(&w), "{} is below a word of L", w);
        }
        for w in words_up_to(&LETTERS, 3) {
            if let Ok(m) = member(&w, &inst, MemberMode::Down, &budget()) {
                prop_assert_eq!(dc.fsa.accepts(&w), m, "word {}", w);
            }
        }
    }

    #[test]
    fn general_down_closure_agrees_with_bpp_construction(seed in any::<u64>()) {
        let inst = bpp(seed);
        let Ok(b) = dc_fsa_bpp(&inst, &budget()) else { return Ok(()); };
        let p = dc_fsa_pn(&inst, &budget());
        if p.exactness.is_exact() {
            prop_assert!(are_equivalent(&b.fsa, &p.fsa).unwrap().holds);
        } else {
            prop_assert!(is_included(&p.fsa, &b.fsa).unwrap().holds);
        }
    }

    #[test]
    fn bpp_up_closure_matches_membership(seed in any::<u64>()) {
        let inst = bpp(seed);
        let Ok(uc) = uc_fsa_bpp(&inst, &budget()) else { return Ok(()); };
        for w in words_up_to(&LETTERS, 3) {
            if let Ok(m) = member(&w, &inst, MemberMode::Up, &budget()) {
                prop_assert_eq!(uc.fsa.accepts(&w), m, "word {}", w);
            }
        }
    }

    #[test]
    fn maximal_insertion_keeps_an_antichain(values in prop::collection::vec(prop::collection::vec(prop::option::of(0u64..4), 3), 1..12)) {
        let mut set = Vec::new();
        let all: Vec<OmegaMarking> = values
            .iter()
            .map(|v| OmegaMarking::from_values(v.iter().map(|x| match x {
                Some(k) => OmegaValue::Finite(BigUint::from(*k)),
                None => OmegaValue::Omega,
            }).collect()))
            .collect();
        for m in &all {
            insert_maximal(&mut set, m.clone());
        }
        for (i, a) in set.iter().enumerate() {
            for (j, b) in set.iter().enumerate() {
                prop_assert!(i == j || !a.le(b));
            }
        }
        for m in &all {
            prop_assert!(set.iter().any(|s| m.le(s)));
        }
    }

    #[test]
    fn rackoff_recurrence_matches_direct_evaluation(n in 0u64..5, i in 0usize..4) {
        let mut f = BigUint::one();
        for j in 1..=i {
            f = ((BigUint::one() << n) * &f).pow(j as u32) + &f;
        }
        prop_assert_eq!(rackoff_f(n, i), BoundValue::Exact(f.clone()));
        if let BoundValue::Exact(next) = rackoff_f(n, i + 1) {
            prop_assert!(next > f);
        }
    }

    #[test]
    fn bpp_cutoff_follows_its_formula(seed in any::<u64>()) {
        let inst = bpp(seed);
        let net = inst.net();
        let report = bpp_cutoff(&inst).unwrap();
        let base = BigUint::from(net.num_places()) * net.max_weight();
        let expected = inst.initial().token_count() * base.pow(net.num_transitions() as u32 + 1);
        prop_assert_eq!(report.value, BoundValue::Exact(expected));
    }
}
