//! Simple regular expressions: products of letters, optional letters and
//! letter-set iterations, combined by choice.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::fsa::Fsa;
use crate::net::{Alphabet, Letter, PetriNet, PlaceId, Transition, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Letter(Letter),
    /// `a + ε`.
    Optional(Letter),
    /// `Γ*`; the empty set denotes `{ε}`.
    Star(BTreeSet<Letter>),
}

impl Atom {
    pub fn letters(&self) -> Vec<Letter> {
        match self {
            Atom::Letter(a) | Atom::Optional(a) => vec![a.clone()],
            Atom::Star(g) => g.iter().cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Product(pub Vec<Atom>);

impl Product {
    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn letters(&self) -> BTreeSet<Letter> {
        self.0.iter().flat_map(|a| a.letters()).collect()
    }

    /// Words obtained by iterating each star at most `depth` times with
    /// letters of its set, used as a finite under-approximation.
    pub fn unroll(&self, depth: usize) -> BTreeSet<Word> {
        let mut acc: BTreeSet<Vec<Letter>> = BTreeSet::from([Vec::new()]);
        for atom in &self.0 {
            let pieces: Vec<Vec<Letter>> = match atom {
                Atom::Letter(a) => vec![vec![a.clone()]],
                Atom::Optional(a) => vec![Vec::new(), vec![a.clone()]],
                Atom::Star(g) => {
                    let mut out: Vec<Vec<Letter>> = vec![Vec::new()];
                    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
                    for _ in 0..depth {
                        let mut next = Vec::new();
                        for w in &layer {
                            for l in g {
                                let mut v = w.clone();
                                v.push(l.clone());
                                next.push(v);
                            }
                        }
                        out.extend(next.iter().cloned());
                        layer = next;
                    }
                    out
                }
            };
            let mut next = BTreeSet::new();
            for w in &acc {
                for p in &pieces {
                    let mut v = w.clone();
                    v.extend(p.iter().cloned());
                    next.insert(v);
                }
            }
            acc = next;
        }
        acc.into_iter().map(Word::new).collect()
    }
}

/// A non-empty choice of products.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sre(pub Vec<Product>);

impl Sre {
    pub fn single(p: Product) -> Self {
        Sre(vec![p])
    }

    pub fn products(&self) -> &[Product] {
        &self.0
    }

    pub fn letters(&self) -> BTreeSet<Letter> {
        self.0.iter().flat_map(|p| p.letters()).collect()
    }

    /// Syntactic size: every letter occurrence and every operator counts.
    pub fn size(&self) -> usize {
        let products: usize = self
            .0
            .iter()
            .map(|p| {
                let atoms: usize =
                    p.0.iter()
                        .map(|a| match a {
                            Atom::Letter(_) => 1,
                            Atom::Optional(_) => 3,
                            Atom::Star(g) => 1 + g.len().max(1) + g.len().saturating_sub(1),
                        })
                        .sum();
                atoms + p.0.len().saturating_sub(1)
            })
            .sum();
        products + self.0.len().saturating_sub(1)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Letter(a) => write!(f, "{a}"),
            Atom::Optional(a) => write!(f, "({a}+eps)"),
            Atom::Star(g) if g.is_empty() => f.write_str("@*"),
            Atom::Star(g) => {
                let names: Vec<&str> = g.iter().map(|l| l.as_str()).collect();
                write!(f, "{{{}}}*", names.join(","))
            }
        }
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("@*");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Sre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// A total order on the alphabet, written as a word listing every letter once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphabetOrder(Vec<Letter>);

impl AlphabetOrder {
    pub fn new(letters: Vec<Letter>) -> Self {
        let alphabet = Alphabet::new(letters);
        AlphabetOrder(alphabet.letters().to_vec())
    }

    pub fn of(alphabet: &Alphabet) -> Self {
        AlphabetOrder(alphabet.letters().to_vec())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// `w_Σ|_Γ`: the order restricted to `gamma`. Letters of `gamma` missing
    /// from the order are appended in name order.
    pub fn project(&self, gamma: &BTreeSet<Letter>) -> Vec<Letter> {
        let mut out: Vec<Letter> = self.0.iter().filter(|l| gamma.contains(*l)).cloned().collect();
        out.extend(gamma.iter().filter(|l| !self.0.contains(l)).cloned());
        out
    }
}

/// `min(p)`: letters stay, optional letters and stars contribute ε.
pub fn min_word(p: &Product) -> Word {
    p.0.iter()
        .filter_map(|a| match a {
            Atom::Letter(l) => Some(l.clone()),
            _ => None,
        })
        .collect()
}

/// One item of a linearized product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinItem {
    Letter(Letter),
    /// `(w)*` for the projected order word `w`; empty for `∅*`.
    Block(Vec<Letter>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linearized(pub Vec<LinItem>);

impl Linearized {
    pub fn items(&self) -> &[LinItem] {
        &self.0
    }

    pub fn to_product(&self) -> Product {
        // only meaningful for display and tests: a block of one letter is a star
        Product(
            self.0
                .iter()
                .map(|i| match i {
                    LinItem::Letter(a) => Atom::Letter(a.clone()),
                    LinItem::Block(w) => Atom::Star(w.iter().cloned().collect()),
                })
                .collect(),
        )
    }

    pub fn to_fsa(&self, alphabet: &Alphabet) -> Fsa {
        let alphabet = alphabet.union(&Alphabet::new(self.letters()));
        let mut a = Fsa::empty(alphabet.clone());
        let mut cur = 0;
        for item in &self.0 {
            match item {
                LinItem::Letter(l) => {
                    let next = a.add_state();
                    a.add_transition(cur, alphabet.index_of(l), next);
                    cur = next;
                }
                LinItem::Block(w) if w.is_empty() => {}
                LinItem::Block(w) => {
                    let head = cur;
                    let mut at = head;
                    for (i, l) in w.iter().enumerate() {
                        let to = if i + 1 == w.len() { head } else { a.add_state() };
                        a.add_transition(at, alphabet.index_of(l), to);
                        at = to;
                    }
                    // leave the loop so that the next block gets its own head
                    let next = a.add_state();
                    a.add_transition(head, None, next);
                    cur = next;
                }
            }
        }
        a.set_final(cur, true);
        a
    }

    fn letters(&self) -> Vec<Letter> {
        self.0
            .iter()
            .flat_map(|i| match i {
                LinItem::Letter(a) => vec![a.clone()],
                LinItem::Block(w) => w.clone(),
            })
            .collect()
    }
}

impl fmt::Display for Linearized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.0 {
            match item {
                LinItem::Letter(a) => write!(f, "{a}")?,
                LinItem::Block(w) => {
                    let s: Vec<&str> = w.iter().map(|l| l.as_str()).collect();
                    write!(f, "({})*", s.concat())?
                }
            }
        }
        Ok(())
    }
}

/// `lin(a) = a`, `lin(a+ε) = a`, `lin(Γ*) = (w_Σ|_Γ)*`.
pub fn linearize(p: &Product, ord: &AlphabetOrder) -> Linearized {
    Linearized(
        p.0.iter()
            .map(|a| match a {
                Atom::Letter(l) | Atom::Optional(l) => LinItem::Letter(l.clone()),
                Atom::Star(g) => LinItem::Block(ord.project(g)),
            })
            .collect(),
    )
}

/// A one-token control net for a linearized product.
#[derive(Clone, Debug)]
pub struct LinNet {
    pub net: PetriNet,
    pub initial_place: PlaceId,
    pub final_place: PlaceId,
    /// One counting place per non-empty block, in product order.
    pub counting: Vec<PlaceId>,
}

/// A transition still to be added: name, label, pre-places and post-places.
type PendingTransition = (String, Option<Letter>, Vec<PlaceId>, Vec<PlaceId>);

/// Builds the control net of `linp` over `alphabet`.
///
/// Control places `c0, c1, …` follow the items. A non-empty block `(w)*`
/// loops on its head control place. Its last letter either returns to the
/// head (`x{i}_{j}`) or moves on to the next control place (`x{i}_exit`),
/// and both add a token to the block's counting place. The net has no
/// ε-transitions, so every block is read at least once; this changes the
/// language but not its downward closure.
pub fn lin_to_net(linp: &Linearized, alphabet: &Alphabet) -> LinNet {
    let alphabet = alphabet.union(&Alphabet::new(linp.letters()));
    let mut places: Vec<String> = vec!["c0".to_string()];
    let mut pending: Vec<PendingTransition> = Vec::new();
    let mut counting = Vec::new();
    let mut cur = 0;
    let mut control = 0;
    let new_place = |places: &mut Vec<String>, name: String| {
        places.push(name);
        places.len() - 1
    };
    for (i, item) in linp.0.iter().enumerate() {
        match item {
            LinItem::Letter(l) => {
                control += 1;
                let next = new_place(&mut places, format!("c{control}"));
                pending.push((format!("x{i}"), Some(l.clone()), vec![cur], vec![next]));
                cur = next;
            }
            LinItem::Block(w) if w.is_empty() => {}
            LinItem::Block(w) => {
                let count = new_place(&mut places, format!("count{i}"));
                counting.push(count);
                let head = cur;
                let mut at = head;
                control += 1;
                let mut next = None;
                for (j, l) in w.iter().enumerate() {
                    if j + 1 == w.len() {
                        let after = new_place(&mut places, format!("c{control}"));
                        pending.push((format!("x{i}_{j}"), Some(l.clone()), vec![at], vec![head, count]));
                        pending.push((format!("x{i}_exit"), Some(l.clone()), vec![at], vec![after, count]));
                        next = Some(after);
                    } else {
                        let mid = new_place(&mut places, format!("b{i}_{j}"));
                        pending.push((format!("x{i}_{j}"), Some(l.clone()), vec![at], vec![mid]));
                        at = mid;
                    }
                }
                cur = next.expect("block is non-empty");
            }
        }
    }
    let n = places.len();
    let to_vec = |ps: &[PlaceId]| {
        let mut v = vec![BigUint::zero(); n];
        for &p in ps {
            v[p] += 1u32;
        }
        v
    };
    let transitions = pending
        .into_iter()
        .map(|(name, label, pre, post)| Transition {
            name,
            label,
            pre: to_vec(&pre),
            post: to_vec(&post),
        })
        .collect();
    let net = PetriNet::new(alphabet, places, transitions).expect("generated control net is well formed");
    LinNet {
        net,
        initial_place: 0,
        final_place: cur,
        counting,
    }
}

/// A product in the shape `(a₁+ε) Σ₁* (a₂+ε) … Σ_{n−1}* (a_n+ε)`.
///
/// `slots[i]` is `None` when the position carries no letter.
/// Always `slots.len() == blocks.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalProduct {
    pub slots: Vec<Option<Letter>>,
    pub blocks: Vec<BTreeSet<Letter>>,
}

impl NormalProduct {
    /// Number of optional-letter positions `n`.
    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn to_product(&self) -> Product {
        let mut atoms = Vec::new();
        for (i, slot) in self.slots.iter().enumerate() {
            if let Some(a) = slot {
                atoms.push(Atom::Optional(a.clone()));
            }
            if let Some(b) = self.blocks.get(i) {
                atoms.push(Atom::Star(b.clone()));
            }
        }
        Product(atoms)
    }
}

impl fmt::Display for NormalProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_product())
    }
}

/// Brings `p` into alternating optional-letter / star shape. Mandatory
/// letters become optional, `∅*` atoms are dropped, and empty blocks or
/// absent letters are inserted where two atoms of the same kind meet.
pub fn normalize_product(p: &Product) -> NormalProduct {
    let mut slots: Vec<Option<Letter>> = Vec::new();
    let mut blocks: Vec<BTreeSet<Letter>> = Vec::new();
    for atom in &p.0 {
        match atom {
            Atom::Letter(a) | Atom::Optional(a) => {
                if slots.len() > blocks.len() {
                    blocks.push(BTreeSet::new());
                }
                slots.push(Some(a.clone()));
            }
            Atom::Star(g) if g.is_empty() => {}
            Atom::Star(g) => {
                if slots.len() == blocks.len() {
                    slots.push(None);
                }
                blocks.push(g.clone());
            }
        }
    }
    if slots.len() == blocks.len() {
        slots.push(None);
    }
    NormalProduct { slots, blocks }
}

/// Thompson-style automaton for `s` over `alphabet` (extended by the
/// letters of `s` when needed).
pub fn to_fsa(s: &Sre, alphabet: &Alphabet) -> Fsa {
    let alphabet = alphabet.union(&Alphabet::new(s.letters()));
    let mut a = Fsa::empty(alphabet.clone());
    for p in &s.0 {
        let start = a.add_state();
        a.add_transition(0, None, start);
        let mut cur = start;
        for atom in &p.0 {
            let next = a.add_state();
            match atom {
                Atom::Letter(l) => a.add_transition(cur, alphabet.index_of(l), next),
                Atom::Optional(l) => {
                    a.add_transition(cur, alphabet.index_of(l), next);
                    a.add_transition(cur, None, next);
                }
                Atom::Star(g) => {
                    for l in g {
                        a.add_transition(cur, alphabet.index_of(l), cur);
                    }
                    a.add_transition(cur, None, next);
                }
            }
            cur = next;
        }
        a.set_final(cur, true);
    }
    a
}

pub fn product_to_fsa(p: &Product, alphabet: &Alphabet) -> Fsa {
    to_fsa(&Sre::single(p.clone()), alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::are_equivalent;

    fn l(s: &str) -> Letter {
        Letter::new(s)
    }

    fn star(ls: &[&str]) -> Atom {
        Atom::Star(ls.iter().map(|s| l(s)).collect())
    }

    fn w(s: &str) -> Word {
        Word::from_chars(s)
    }

    #[test]
    fn min_words() {
        assert_eq!(min_word(&Product(vec![Atom::Optional(l("a"))])), Word::empty());
        let p = Product(vec![Atom::Letter(l("a")), star(&["a", "c"]), Atom::Letter(l("b"))]);
        assert_eq!(min_word(&p), w("ab"));
        let p = Product(vec![Atom::Letter(l("a")), Atom::Optional(l("b")), star(&["a", "b"])]);
        assert_eq!(min_word(&p), w("a"));
    }

    #[test]
    fn linearize_examples() {
        let ord = AlphabetOrder::new(vec![l("a"), l("b"), l("c")]);
        let p = Product(vec![star(&["a", "c"]), Atom::Optional(l("a")), star(&["b", "c"])]);
        assert_eq!(linearize(&p, &ord).to_string(), "(ac)*a(bc)*");
        assert_eq!(
            linearize(&Product(vec![star(&[])]), &ord),
            Linearized(vec![LinItem::Block(vec![])])
        );
        assert_eq!(linearize(&Product(vec![star(&["b"])]), &ord).to_string(), "(b)*");
    }

    #[test]
    fn to_fsa_examples() {
        let abc = Alphabet::from_strs(&["a", "b"]);
        let eps = to_fsa(&Sre::single(Product(vec![star(&[])])), &abc);
        assert_eq!(eps.enumerate(3), BTreeSet::from([Word::empty()]));
        let choice = to_fsa(
            &Sre(vec![
                Product(vec![Atom::Letter(l("a"))]),
                Product(vec![Atom::Letter(l("b"))]),
            ]),
            &abc,
        );
        assert_eq!(choice.enumerate(3), BTreeSet::from([w("a"), w("b")]));
        let p = to_fsa(&Sre::single(Product(vec![Atom::Optional(l("a")), star(&["b"])])), &abc);
        let expected: BTreeSet<Word> = ["", "a", "b", "bb", "bbb", "ab", "abb"].iter().map(|s| w(s)).collect();
        assert_eq!(p.enumerate(3), expected);
    }

    #[test]
    fn lin_net_counts_block_iterations() {
        let abc = Alphabet::from_strs(&["a", "b", "c"]);
        let ord = AlphabetOrder::of(&abc);
        let p = Product(vec![star(&["a", "c"]), Atom::Optional(l("a")), star(&["b", "c"])]);
        let lin = linearize(&p, &ord);
        let ln = lin_to_net(&lin, &abc);
        assert_eq!(ln.counting.len(), 2);
        let net = &ln.net;
        let mut m = crate::net::Marking::zero(net.num_places());
        m.set(ln.initial_place, BigUint::from(1u32));
        // (ac)a(bc)(bc): one round of the first block, a, two of the second
        let names = ["x0_0", "x0_exit", "x1", "x2_0", "x2_1", "x2_0", "x2_exit"];
        let seq: Vec<_> = names.iter().map(|n| net.transition_index(n).unwrap()).collect();
        let m2 = net.fire_sequence(&m, &seq).unwrap();
        assert_eq!(m2.get(ln.counting[1]), &BigUint::from(2u32));
        assert_eq!(m2.get(ln.final_place), &BigUint::from(1u32));
        assert_eq!(net.label_of(&seq), w("acabcbc"));
        assert!(net.transitions().iter().all(|t| t.label.is_some()));
        // firing the c of (ac)* increments the first counter
        let seq: Vec<_> = ["x0_0", "x0_1"]
            .iter()
            .map(|n| net.transition_index(n).unwrap())
            .collect();
        let m3 = net.fire_sequence(&m, &seq).unwrap();
        assert_eq!(m3.get(ln.counting[0]), &BigUint::from(1u32));
        let plain = lin_to_net(&linearize(&Product(vec![Atom::Letter(l("a"))]), &ord), &abc);
        assert!(plain.counting.is_empty());
    }

    #[test]
    fn lin_net_language_matches_linearization() {
        let abc = Alphabet::from_strs(&["a", "b", "c"]);
        let ord = AlphabetOrder::of(&abc);
        let p = Product(vec![Atom::Letter(l("b")), star(&["a", "c"]), Atom::Optional(l("a"))]);
        let lin = linearize(&p, &ord);
        let ln = lin_to_net(&lin, &abc);
        let mut m0 = crate::net::Marking::zero(ln.net.num_places());
        m0.set(ln.initial_place, BigUint::from(1u32));
        let mut mf = crate::net::Marking::zero(ln.net.num_places());
        mf.set(ln.final_place, BigUint::from(1u32));
        let inst = crate::net::NetInstance::new(ln.net.clone(), m0, mf).unwrap();
        // b(ac)*a with at least one round of the block
        let words = crate::reach::brute_force_language(&inst, 8);
        let expected: BTreeSet<Word> = ["baca", "bacaca", "bacacaca"].into_iter().map(w).collect();
        assert_eq!(words, expected);
        let exact = lin.to_fsa(&abc);
        assert!(words.iter().all(|x| exact.accepts(x)));
    }

    #[test]
    fn normalize_examples() {
        let ab = Product(vec![Atom::Letter(l("a")), Atom::Letter(l("b"))]);
        let n = normalize_product(&ab);
        assert_eq!(n.slots, vec![Some(l("a")), Some(l("b"))]);
        assert_eq!(n.blocks, vec![BTreeSet::new()]);
        let stars = Product(vec![star(&["a"]), star(&["b"])]);
        let n = normalize_product(&stars);
        assert_eq!(n.slots, vec![None, None, None]);
        assert_eq!(n.blocks.len(), 2);
        let a_star = Product(vec![Atom::Letter(l("a")), star(&["a", "b"])]);
        let n = normalize_product(&a_star);
        assert_eq!(n.slots, vec![Some(l("a")), None]);
        let empty = normalize_product(&Product(vec![star(&[])]));
        assert_eq!(empty.slots, vec![None]);
        assert!(empty.blocks.is_empty());
    }

    #[test]
    fn normalize_over_approximates() {
        let ab = Alphabet::from_strs(&["a", "b"]);
        let p = Product(vec![Atom::Letter(l("a")), star(&["b"]), Atom::Letter(l("a"))]);
        let norm = normalize_product(&p).to_product();
        let original = product_to_fsa(&p, &ab);
        let normal = product_to_fsa(&norm, &ab);
        assert!(crate::fsa::is_included(&original, &normal).unwrap().holds);
        assert!(
            are_equivalent(&original.saturate_down(), &normal.saturate_down())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn unroll_depth() {
        let p = Product(vec![Atom::Letter(l("a")), star(&["b"])]);
        let expected: BTreeSet<Word> = ["a", "ab", "abb"].iter().map(|s| w(s)).collect();
        assert_eq!(p.unroll(2), expected);
    }
}
