//! Labelled Petri nets, markings, firing and the product constructions
//! used by the deciders.
//!
//! Places and transitions are addressed by dense indices; names are kept for
//! printing, parsing and witness reporting. Weights and token counts are
//! arbitrary-precision naturals.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::fsa::Fsa;

pub type PlaceId = usize;
pub type TransitionId = usize;

/// A letter of an alphabet. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(Arc<str>);

impl Letter {
    pub fn new(name: &str) -> Self {
        Letter(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Letter {
    fn from(s: &str) -> Self {
        Letter::new(s)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A finite word. The empty word is ε.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from a string of single-character letters.
    pub fn from_chars(s: &str) -> Self {
        Word(s.chars().map(|c| Letter::new(&c.to_string())).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn pushed(&self, letter: Letter) -> Word {
        let mut w = self.clone();
        w.push(letter);
        w
    }

    pub fn is_subword_of(&self, other: &Word) -> bool {
        subword(&self.0, &other.0)
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let single = self.0.iter().all(|l| l.as_str().chars().count() == 1);
        let sep = if single { "" } else { "," };
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            f.write_str(l.as_str())?;
        }
        Ok(())
    }
}

/// `u ⊑ v`: `u` is obtained from `v` by deleting letters.
pub fn subword(u: &[Letter], v: &[Letter]) -> bool {
    let mut rest = v.iter();
    u.iter().all(|a| rest.any(|b| b == a))
}

/// An ordered finite set of letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alphabet(Vec<Letter>);

impl Alphabet {
    /// Keeps the first occurrence of every letter.
    pub fn new<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for l in letters {
            if seen.insert(l.clone()) {
                out.push(l);
            }
        }
        Alphabet(out)
    }

    pub fn from_strs(letters: &[&str]) -> Self {
        Alphabet::new(letters.iter().map(|s| Letter::new(s)))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, letter: &Letter) -> Option<usize> {
        self.0.iter().position(|l| l == letter)
    }

    pub fn contains(&self, letter: &Letter) -> bool {
        self.0.contains(letter)
    }

    pub fn as_set(&self) -> BTreeSet<Letter> {
        self.0.iter().cloned().collect()
    }

    pub fn same_letters(&self, other: &Alphabet) -> bool {
        self.as_set() == other.as_set()
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.0.iter().all(|l| other.contains(l))
    }

    /// `self` followed by the letters of `other` not yet present.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    pub fn with_letter(&self, letter: Letter) -> Alphabet {
        Alphabet::new(self.0.iter().cloned().chain(std::iter::once(letter)))
    }
}

/// A marking: a total map from the net's places to token counts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(Vec<BigUint>);

impl Marking {
    pub fn zero(places: usize) -> Self {
        Marking(vec![BigUint::zero(); places])
    }

    pub fn from_vec(counts: Vec<BigUint>) -> Self {
        Marking(counts)
    }

    pub fn from_u64(counts: &[u64]) -> Self {
        Marking(counts.iter().map(|&c| BigUint::from(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: PlaceId) -> &BigUint {
        &self.0[p]
    }

    pub fn set(&mut self, p: PlaceId, value: BigUint) {
        self.0[p] = value;
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.0
    }

    pub fn into_counts(self) -> Vec<BigUint> {
        self.0
    }

    /// `self ≥ other` point-wise.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// ‖M‖, the number of tokens.
    pub fn token_count(&self) -> BigUint {
        self.0.iter().sum()
    }

    pub fn max_value(&self) -> BigUint {
        self.0.iter().max().cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// Extends the marking with `extra` trailing places.
    pub fn extended(&self, extra: &[BigUint]) -> Marking {
        let mut v = self.0.clone();
        v.extend_from_slice(extra);
        Marking(v)
    }

    pub fn display<'a>(&'a self, net: &'a PetriNet) -> MarkingDisplay<'a> {
        MarkingDisplay { marking: self, net }
    }
}

pub struct MarkingDisplay<'a> {
    marking: &'a Marking,
    net: &'a PetriNet,
}

impl fmt::Display for MarkingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        let mut first = true;
        for (p, c) in self.marking.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}:{}", self.net.place_name(p), c)?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    /// `None` is ε.
    pub label: Option<Letter>,
    /// Dense over the net's places.
    pub pre: Vec<BigUint>,
    pub post: Vec<BigUint>,
}

impl Transition {
    pub fn consumed(&self) -> BigUint {
        self.pre.iter().sum()
    }

    /// The unique pre-place of a BPP transition, if any.
    pub fn pre_place(&self) -> Option<PlaceId> {
        self.pre.iter().position(|w| !w.is_zero())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("transition {transition} is not enabled{}: place {place} lacks {deficit} token(s)", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NotEnabled {
        step: Option<usize>,
        transition: String,
        place: String,
        deficit: BigUint,
    },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("letter {0} already belongs to the alphabet")]
    LetterCollision(Letter),
    #[error("unknown place {0}")]
    UnknownPlace(String),
    #[error("label {0} is not a letter of the alphabet")]
    UnknownLetter(String),
    #[error("duplicate place {0}")]
    DuplicatePlace(String),
    #[error("duplicate transition {0}")]
    DuplicateTransition(String),
    #[error("no transition with index {0}")]
    UnknownTransition(usize),
    #[error("marking has {found} entries but the net has {expected} places")]
    MarkingSize { expected: usize, found: usize },
    #[error("transition {0} has flow vectors of the wrong length")]
    FlowSize(String),
}

/// A labelled Petri net `(Σ, P, T, F, λ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    alphabet: Alphabet,
    places: Vec<String>,
    transitions: Vec<Transition>,
}

impl PetriNet {
    pub fn new(alphabet: Alphabet, places: Vec<String>, transitions: Vec<Transition>) -> Result<Self, NetError> {
        let mut seen = BTreeSet::new();
        for p in &places {
            if !seen.insert(p.as_str()) {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &transitions {
            if !seen.insert(t.name.as_str()) {
                return Err(NetError::DuplicateTransition(t.name.clone()));
            }
            if t.pre.len() != places.len() || t.post.len() != places.len() {
                return Err(NetError::FlowSize(t.name.clone()));
            }
            if let Some(l) = &t.label {
                if !alphabet.contains(l) {
                    return Err(NetError::UnknownLetter(l.to_string()));
                }
            }
        }
        Ok(PetriNet {
            alphabet,
            places,
            transitions,
        })
    }

    pub fn builder() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p]
    }

    pub fn place_index(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t]
    }

    pub fn transition_index(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.name == name)
    }

    /// `m = max(F)`.
    pub fn max_weight(&self) -> BigUint {
        self.transitions
            .iter()
            .flat_map(|t| t.pre.iter().chain(t.post.iter()))
            .max()
            .cloned()
            .unwrap_or_default()
    }

    /// `|N| = |Σ| + |P|·|T|·(1 + ⌈log₂(1 + max F)⌉)`.
    pub fn size(&self) -> u64 {
        let bits = self.max_weight().bits();
        self.alphabet.len() as u64 + (self.places.len() * self.transitions.len()) as u64 * (1 + bits)
    }

    /// Every transition consumes at most one token in total.
    pub fn is_bpp(&self) -> bool {
        self.transitions.iter().all(|t| t.consumed() <= BigUint::one())
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.transitions[t].pre.iter().zip(m.counts()).all(|(w, c)| c >= w)
    }

    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        self.fire_at(m, t, None)
    }

    fn fire_at(&self, m: &Marking, t: TransitionId, step: Option<usize>) -> Result<Marking, NetError> {
        self.check_marking(m)?;
        let tr = self.transitions.get(t).ok_or(NetError::UnknownTransition(t))?;
        for (p, (w, c)) in tr.pre.iter().zip(m.counts()).enumerate() {
            if c < w {
                return Err(NetError::NotEnabled {
                    step,
                    transition: tr.name.clone(),
                    place: self.places[p].clone(),
                    deficit: w - c,
                });
            }
        }
        Ok(self.fire_unchecked(m, t))
    }

    /// Fires `t` assuming it is enabled in `m`.
    pub fn fire_unchecked(&self, m: &Marking, t: TransitionId) -> Marking {
        let tr = &self.transitions[t];
        Marking(
            m.counts()
                .iter()
                .zip(tr.pre.iter().zip(&tr.post))
                .map(|(c, (pre, post))| c - pre + post)
                .collect(),
        )
    }

    pub fn fire_sequence(&self, m: &Marking, seq: &[TransitionId]) -> Result<Marking, NetError> {
        let mut cur = m.clone();
        for (i, &t) in seq.iter().enumerate() {
            cur = self.fire_at(&cur, t, Some(i))?;
        }
        Ok(cur)
    }

    pub fn label_of(&self, seq: &[TransitionId]) -> Word {
        seq.iter().filter_map(|&t| self.transitions[t].label.clone()).collect()
    }

    pub fn check_marking(&self, m: &Marking) -> Result<(), NetError> {
        if m.len() != self.places.len() {
            return Err(NetError::MarkingSize {
                expected: self.places.len(),
                found: m.len(),
            });
        }
        Ok(())
    }

    /// Returns the net with a different (super-)alphabet.
    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<PetriNet, NetError> {
        PetriNet::new(alphabet, self.places.clone(), self.transitions.clone())
    }

    pub(crate) fn into_parts(self) -> (Alphabet, Vec<String>, Vec<Transition>) {
        (self.alphabet, self.places, self.transitions)
    }
}

/// Name-based incremental construction of a [`PetriNet`].
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    letters: Vec<Letter>,
    places: Vec<String>,
    transitions: Vec<PendingTransition>,
}

#[derive(Clone, Debug)]
struct PendingTransition {
    name: String,
    label: Option<Letter>,
    pre: Vec<(String, BigUint)>,
    post: Vec<(String, BigUint)>,
}

impl NetBuilder {
    pub fn letter(mut self, l: &str) -> Self {
        self.letters.push(Letter::new(l));
        self
    }

    pub fn letters<'a, I: IntoIterator<Item = &'a str>>(mut self, ls: I) -> Self {
        self.letters.extend(ls.into_iter().map(Letter::new));
        self
    }

    pub fn place(mut self, name: &str) -> Self {
        self.places.push(name.to_string());
        self
    }

    pub fn places<'a, I: IntoIterator<Item = &'a str>>(mut self, names: I) -> Self {
        self.places.extend(names.into_iter().map(str::to_string));
        self
    }

    /// Adds a transition; labels not yet declared are appended to the alphabet.
    pub fn transition<'a, I, J, W>(mut self, name: &str, label: Option<&str>, pre: I, post: J) -> Self
    where
        I: IntoIterator<Item = (&'a str, W)>,
        J: IntoIterator<Item = (&'a str, W)>,
        W: Into<BigUint>,
    {
        let label = label.map(Letter::new);
        if let Some(l) = &label {
            if !self.letters.contains(l) {
                self.letters.push(l.clone());
            }
        }
        self.transitions.push(PendingTransition {
            name: name.to_string(),
            label,
            pre: pre.into_iter().map(|(p, w)| (p.to_string(), w.into())).collect(),
            post: post.into_iter().map(|(p, w)| (p.to_string(), w.into())).collect(),
        });
        self
    }

    pub fn build(self) -> Result<PetriNet, NetError> {
        let n = self.places.len();
        let lookup = |name: &str| -> Result<PlaceId, NetError> {
            self.places
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| NetError::UnknownPlace(name.to_string()))
        };
        let mut transitions = Vec::new();
        for pt in &self.transitions {
            let mut pre = vec![BigUint::zero(); n];
            let mut post = vec![BigUint::zero(); n];
            for (p, w) in &pt.pre {
                pre[lookup(p)?] += w;
            }
            for (p, w) in &pt.post {
                post[lookup(p)?] += w;
            }
            transitions.push(Transition {
                name: pt.name.clone(),
                label: pt.label.clone(),
                pre,
                post,
            });
        }
        PetriNet::new(Alphabet::new(self.letters), self.places, transitions)
    }
}

/// A net with initial and final markings `(N, M₀, M_f)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetInstance {
    net: PetriNet,
    initial: Marking,
    final_marking: Marking,
}

impl NetInstance {
    pub fn new(net: PetriNet, initial: Marking, final_marking: Marking) -> Result<Self, NetError> {
        net.check_marking(&initial)?;
        net.check_marking(&final_marking)?;
        Ok(NetInstance {
            net,
            initial,
            final_marking,
        })
    }

    /// Builds markings from `(place, count)` pairs.
    pub fn with_named_markings(
        net: PetriNet,
        initial: &[(&str, u64)],
        final_marking: &[(&str, u64)],
    ) -> Result<Self, NetError> {
        let m0 = named_marking(&net, initial)?;
        let mf = named_marking(&net, final_marking)?;
        NetInstance::new(net, m0, mf)
    }

    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn initial(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    /// `|(N, M₀, M_f)| = |N| + |M₀| + |M_f|` with `|M| = |P|·(1 + ⌈log₂(1 + max M)⌉)`.
    pub fn size(&self) -> u64 {
        let places = self.net.num_places() as u64;
        let marking_size = |m: &Marking| places * (1 + m.max_value().bits());
        self.net.size() + marking_size(&self.initial) + marking_size(&self.final_marking)
    }

    pub fn is_covering(&self, m: &Marking) -> bool {
        m.covers(&self.final_marking)
    }
}

pub fn named_marking(net: &PetriNet, entries: &[(&str, u64)]) -> Result<Marking, NetError> {
    let mut m = Marking::zero(net.num_places());
    for (name, c) in entries {
        let p = net
            .place_index(name)
            .ok_or_else(|| NetError::UnknownPlace(name.to_string()))?;
        m.0[p] += BigUint::from(*c);
    }
    Ok(m)
}

/// The right-synchronized product `n1 ▷ n2`.
///
/// Places are `left.p` (indices `0..|P1|`) followed by `right.p`. The
/// transitions of `n1` come first and keep their index; then one
/// `merge.t1.t2` per pair of equal non-ε labels, ordered by `(t1, t2)`.
/// Transitions of `n2` never fire on their own.
pub fn right_product(n1: &PetriNet, n2: &PetriNet) -> Result<PetriNet, NetError> {
    if !n1.alphabet().same_letters(n2.alphabet()) {
        return Err(NetError::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            n1.alphabet().letters(),
            n2.alphabet().letters()
        )));
    }
    Ok(product_with(n1, n2, ProductShape::Right))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ProductShape {
    /// All `n1` transitions free.
    Right,
    /// Only ε-labelled `n1` transitions are free.
    Full,
}

fn product_with(n1: &PetriNet, n2: &PetriNet, shape: ProductShape) -> PetriNet {
    let p1 = n1.num_places();
    let p2 = n2.num_places();
    let zero = || vec![BigUint::zero(); p1 + p2];
    let lift_left = |v: &[BigUint]| {
        let mut out = zero();
        out[..p1].clone_from_slice(v);
        out
    };
    let mut places: Vec<String> = n1.places().iter().map(|p| format!("left.{p}")).collect();
    places.extend(n2.places().iter().map(|p| format!("right.{p}")));

    let mut transitions = Vec::new();
    for t in n1.transitions() {
        if shape == ProductShape::Full && t.label.is_some() {
            continue;
        }
        transitions.push(Transition {
            name: format!("left.{}", t.name),
            label: t.label.clone(),
            pre: lift_left(&t.pre),
            post: lift_left(&t.post),
        });
    }
    for t1 in n1.transitions() {
        let Some(l1) = &t1.label else { continue };
        for t2 in n2.transitions() {
            if t2.label.as_ref() != Some(l1) {
                continue;
            }
            let mut pre = lift_left(&t1.pre);
            let mut post = lift_left(&t1.post);
            pre[p1..].clone_from_slice(&t2.pre);
            post[p1..].clone_from_slice(&t2.post);
            transitions.push(Transition {
                name: format!("merge.{}.{}", t1.name, t2.name),
                label: Some(l1.clone()),
                pre,
                post,
            });
        }
    }
    PetriNet {
        alphabet: n1.alphabet().clone(),
        places,
        transitions,
    }
}

/// How net transitions synchronise with the automaton in [`sync_with_fsa`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyncMode {
    /// Net transitions may fire alone or together with an equally labelled
    /// automaton edge.
    Right,
    /// Lettered net transitions must synchronise; only ε-transitions fire alone.
    Full,
}

/// A net composed with a one-token encoding of an automaton.
#[derive(Clone, Debug)]
pub struct SyncProduct {
    pub net: PetriNet,
    /// Place of each automaton state.
    pub state_places: Vec<PlaceId>,
    /// Receives the control token once an accepting state was reached.
    pub end_place: PlaceId,
    automaton_initial: PlaceId,
    base_places: usize,
}

impl SyncProduct {
    /// Lifts `(M₀, M_f)` of the original net: the automaton token starts on
    /// the initial state and the end place must be covered.
    pub fn instance(&self, initial: &Marking, final_marking: &Marking) -> Result<NetInstance, NetError> {
        let extra = self.net.num_places() - self.base_places;
        let mut m0 = initial.extended(&vec![BigUint::zero(); extra]);
        m0.set(self.automaton_initial, BigUint::one());
        let mut mf = final_marking.extended(&vec![BigUint::zero(); extra]);
        mf.set(self.end_place, BigUint::one());
        NetInstance::new(self.net.clone(), m0, mf)
    }
}

/// Composes `net` with the automaton `a`, encoded as a net whose single
/// token walks the automaton's states.
///
/// ε-edges of the automaton fire on their own; accepting states move the
/// token to `end`. Covering `M_f + end` in the composite means that some run
/// of the net is matched against an accepted word of `a` according to `mode`.
pub fn sync_with_fsa(net: &PetriNet, a: &Fsa, mode: SyncMode) -> Result<SyncProduct, NetError> {
    if !a.alphabet().is_subset_of(net.alphabet()) {
        return Err(NetError::AlphabetMismatch(format!(
            "automaton alphabet {:?} is not contained in {:?}",
            a.alphabet().letters(),
            net.alphabet().letters()
        )));
    }
    let mut builder = NetBuilder::default().letters(net.alphabet().letters().iter().map(|l| l.as_str()));
    for q in 0..a.num_states() {
        builder = builder.place(&format!("q{q}"));
    }
    builder = builder.place("end");
    for (edge_index, &(from, label, to)) in a.transitions().iter().enumerate() {
        let from_p = format!("q{from}");
        let to_p = format!("q{to}");
        let label = label.map(|l| a.alphabet().letters()[l].as_str().to_string());
        builder = builder.transition(
            &format!("e{edge_index}"),
            label.as_deref(),
            [(from_p.as_str(), 1u32)],
            [(to_p.as_str(), 1u32)],
        );
    }
    let automaton_net = builder.build()?;
    let base = net.num_places();
    let shape = match mode {
        SyncMode::Right => ProductShape::Right,
        SyncMode::Full => ProductShape::Full,
    };
    let mut product = product_with(net, &automaton_net, shape);
    // automaton ε-edges and the moves to `end` fire alone
    let total = product.places.len();
    for t in automaton_net.transitions().iter().filter(|t| t.label.is_none()) {
        let mut pre = vec![BigUint::zero(); base];
        pre.extend(t.pre.iter().cloned());
        let mut post = vec![BigUint::zero(); base];
        post.extend(t.post.iter().cloned());
        product.transitions.push(Transition {
            name: format!("right.{}", t.name),
            label: None,
            pre,
            post,
        });
    }
    let end_place = base + a.num_states();
    for &q in a.finals() {
        let mut pre = vec![BigUint::zero(); total];
        pre[base + q] = BigUint::one();
        let mut post = vec![BigUint::zero(); total];
        post[end_place] = BigUint::one();
        product.transitions.push(Transition {
            name: format!("accept.q{q}"),
            label: None,
            pre,
            post,
        });
    }
    Ok(SyncProduct {
        state_places: (0..a.num_states()).map(|q| base + q).collect(),
        end_place,
        automaton_initial: base + a.initial(),
        base_places: base,
        net: product,
    })
}

/// `N.a`: adds `t_final` labelled with the fresh letter, consuming `M_f`.
/// The new final marking is zero.
pub fn append_final_letter(inst: &NetInstance, letter: Letter) -> Result<NetInstance, NetError> {
    let net = inst.net();
    if net.alphabet().contains(&letter) {
        return Err(NetError::LetterCollision(letter));
    }
    let mut name = "t_final".to_string();
    while net.transition_index(&name).is_some() {
        name.push('\'');
    }
    let (alphabet, places, mut transitions) = net.clone().into_parts();
    let n = places.len();
    transitions.push(Transition {
        name,
        label: Some(letter.clone()),
        pre: inst.final_marking().counts().to_vec(),
        post: vec![BigUint::zero(); n],
    });
    let net = PetriNet::new(alphabet.with_letter(letter), places, transitions)?;
    NetInstance::new(net, inst.initial().clone(), Marking::zero(n))
}
