//! Seeded random instances shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use pnclosure::fsa::Fsa;
use pnclosure::net::{Alphabet, Letter, Marking, NetBuilder, NetInstance, PetriNet, Word};
use pnclosure::reach::reachability_set;
use pnclosure::sre::{Atom, Product, Sre};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const LETTERS: [&str; 2] = ["a", "b"];

fn label(rng: &mut impl Rng, letters: &[&'static str], eps_prob: f64) -> Option<&'static str> {
    if letters.is_empty() || rng.gen_bool(eps_prob) {
        None
    } else {
        Some(letters[rng.gen_range(0..letters.len())])
    }
}

/// A general net: every transition touches one or two places on each side
/// with weights up to `max_weight`.
pub fn random_net(
    rng: &mut impl Rng,
    max_places: usize,
    max_transitions: usize,
    max_weight: u32,
    letters: &[&'static str],
) -> PetriNet {
    let np = rng.gen_range(1..=max_places);
    let nt = rng.gen_range(1..=max_transitions);
    let names: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    let mut b = NetBuilder::default()
        .letters(letters.iter().copied())
        .places(names.iter().map(String::as_str));
    for t in 0..nt {
        let side = |rng: &mut dyn rand::RngCore, min: usize| {
            let k = rng.gen_range(min..=2.min(np));
            let mut chosen: Vec<&str> = names.iter().map(String::as_str).collect();
            chosen.shuffle(rng);
            chosen
                .into_iter()
                .take(k)
                .map(|p| (p, rng.gen_range(1..=max_weight)))
                .collect::<Vec<_>>()
        };
        let pre = side(rng, 0);
        let post = side(rng, 0);
        b = b.transition(&format!("t{t}"), label(rng, letters, 0.25), pre, post);
    }
    b.build().expect("random net is well formed")
}

/// A BPP net: each transition consumes one token from one place, or
/// nothing with small probability.
pub fn random_bpp(
    rng: &mut impl Rng,
    max_places: usize,
    max_transitions: usize,
    letters: &[&'static str],
    source_prob: f64,
) -> PetriNet {
    let np = rng.gen_range(1..=max_places);
    let nt = rng.gen_range(1..=max_transitions);
    let names: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    let mut b = NetBuilder::default()
        .letters(letters.iter().copied())
        .places(names.iter().map(String::as_str));
    for t in 0..nt {
        let pre: Vec<(&str, u32)> = if rng.gen_bool(source_prob) {
            vec![]
        } else {
            vec![(names[rng.gen_range(0..np)].as_str(), 1)]
        };
        let k = rng.gen_range(0..=2.min(np));
        let mut chosen: Vec<&str> = names.iter().map(String::as_str).collect();
        chosen.shuffle(rng);
        let post: Vec<(&str, u32)> = chosen.into_iter().take(k).map(|p| (p, rng.gen_range(1..=2))).collect();
        b = b.transition(&format!("t{t}"), label(rng, letters, 0.3), pre, post);
    }
    b.build().expect("random net is well formed")
}

pub fn random_marking(rng: &mut impl Rng, places: usize, max: u64) -> Marking {
    let v: Vec<u64> = (0..places).map(|_| rng.gen_range(0..=max)).collect();
    Marking::from_u64(&v)
}

/// An instance with a non-zero initial marking and a small final marking.
pub fn random_instance(rng: &mut impl Rng, net: PetriNet) -> NetInstance {
    let n = net.num_places();
    let mut m0 = random_marking(rng, n, 2);
    if m0.is_zero() {
        m0.set(0, BigUint::from(1u32));
    }
    let mf = random_marking(rng, n, 1);
    NetInstance::new(net, m0, mf).expect("markings sized by the net")
}

/// A BPP net whose reachability set from its initial marking is finite
/// and small, together with that set.
pub fn bounded_bpp(rng: &mut impl Rng, max_places: usize, max_tokens: u64) -> (PetriNet, Marking, HashSet<Marking>) {
    loop {
        let net = random_bpp(rng, max_places, 5, &LETTERS, 0.1);
        let mut m0 = random_marking(rng, net.num_places(), 2);
        if m0.is_zero() {
            m0.set(0, BigUint::from(1u32));
        }
        if let Some(set) = reachability_set(&net, &m0, 20_000, &BigUint::from(max_tokens)) {
            return (net, m0, set);
        }
    }
}

pub fn random_fsa(rng: &mut impl Rng, max_states: usize, letters: &[&'static str], eps_prob: f64) -> Fsa {
    let n = rng.gen_range(1..=max_states);
    let alphabet = Alphabet::from_strs(letters);
    let ne = rng.gen_range(0..=2 * n);
    let mut edges = Vec::new();
    for _ in 0..ne {
        let p = rng.gen_range(0..n);
        let q = rng.gen_range(0..n);
        let l = if rng.gen_bool(eps_prob) {
            None
        } else {
            Some(rng.gen_range(0..letters.len()))
        };
        edges.push((p, l, q));
    }
    let finals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    Fsa::new(alphabet, n, 0, finals, edges).expect("random automaton is well formed")
}

pub fn random_product(rng: &mut impl Rng, letters: &[&'static str], max_atoms: usize) -> Product {
    let n = rng.gen_range(1..=max_atoms);
    let mut atoms = Vec::new();
    for _ in 0..n {
        let l = Letter::new(letters[rng.gen_range(0..letters.len())]);
        atoms.push(match rng.gen_range(0..4) {
            0 => Atom::Letter(l),
            1 => Atom::Optional(l),
            _ => {
                let set: BTreeSet<Letter> = letters
                    .iter()
                    .filter(|_| rng.gen_bool(0.6))
                    .map(|s| Letter::new(s))
                    .collect();
                Atom::Star(set)
            }
        });
    }
    Product(atoms)
}

pub fn random_sre(rng: &mut impl Rng, letters: &[&'static str]) -> Sre {
    let n = rng.gen_range(1..=2);
    Sre((0..n).map(|_| random_product(rng, letters, 3)).collect())
}

/// All words over `letters` of length at most `k`.
pub fn words_up_to(letters: &[&str], k: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &layer {
            for l in letters {
                next.push(w.pushed(Letter::new(l)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Every prefix of the words in `set`, ε included.
pub fn prefix_closure(set: &BTreeSet<Word>) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for w in set {
        for i in 0..=w.len() {
            out.insert(Word::new(w.letters()[..i].to_vec()));
        }
    }
    out
}

/// All markings of `places` places with at most `tokens` tokens in total.
pub fn markings_up_to(places: usize, tokens: u64) -> Vec<Marking> {
    let mut out: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..places {
        let mut next = Vec::new();
        for m in &out {
            let used: u64 = m.iter().sum();
            for k in 0..=tokens - used {
                let mut m2 = m.clone();
                m2.push(k);
                next.push(m2);
            }
        }
        out = next;
    }
    out.into_iter().map(|v| Marking::from_u64(&v)).collect()
}

pub fn w(s: &str) -> Word {
    Word::from_chars(s)
}
