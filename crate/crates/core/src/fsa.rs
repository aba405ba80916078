//! Finite automata with ε-transitions.
//!
//! Transition labels are indices into the automaton's [`Alphabet`]; `None`
//! is ε. Language queries determinize on the fly and report shortlex-minimal
//! counterexamples, with letters ordered by their names.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::net::{Alphabet, Letter, Word};

pub type StateId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FsaError {
    #[error("alphabet mismatch: {0:?} vs {1:?}")]
    AlphabetMismatch(Vec<Letter>, Vec<Letter>),
    #[error("state {0} does not exist")]
    UnknownState(StateId),
    #[error("letter {0} is not in the alphabet")]
    UnknownLetter(Letter),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsa {
    alphabet: Alphabet,
    num_states: usize,
    transitions: Vec<(StateId, Option<usize>, StateId)>,
    initial: StateId,
    finals: BTreeSet<StateId>,
}

impl Fsa {
    pub fn new(
        alphabet: Alphabet,
        num_states: usize,
        initial: StateId,
        finals: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = (StateId, Option<usize>, StateId)>,
    ) -> Result<Self, FsaError> {
        let num_states = num_states.max(1);
        let finals: BTreeSet<StateId> = finals.into_iter().collect();
        let mut seen = BTreeSet::new();
        let mut ts = Vec::new();
        for (p, l, q) in transitions {
            for s in [p, q] {
                if s >= num_states {
                    return Err(FsaError::UnknownState(s));
                }
            }
            if let Some(l) = l {
                if l >= alphabet.len() {
                    return Err(FsaError::UnknownLetter(Letter::new(&format!("#{l}"))));
                }
            }
            if seen.insert((p, l, q)) {
                ts.push((p, l, q));
            }
        }
        if initial >= num_states {
            return Err(FsaError::UnknownState(initial));
        }
        if let Some(&f) = finals.iter().find(|&&f| f >= num_states) {
            return Err(FsaError::UnknownState(f));
        }
        Ok(Fsa {
            alphabet,
            num_states,
            transitions: ts,
            initial,
            finals,
        })
    }

    /// The automaton with a single non-accepting state.
    pub fn empty(alphabet: Alphabet) -> Self {
        Fsa {
            alphabet,
            num_states: 1,
            transitions: Vec::new(),
            initial: 0,
            finals: BTreeSet::new(),
        }
    }

    /// Accepts exactly `{w}`.
    pub fn word(alphabet: Alphabet, w: &Word) -> Result<Self, FsaError> {
        let mut ts = Vec::new();
        for (i, l) in w.letters().iter().enumerate() {
            let idx = alphabet.index_of(l).ok_or_else(|| FsaError::UnknownLetter(l.clone()))?;
            ts.push((i, Some(idx), i + 1));
        }
        Fsa::new(alphabet, w.len() + 1, 0, [w.len()], ts)
    }

    /// Accepts Σ*.
    pub fn universal(alphabet: Alphabet) -> Self {
        let ts: Vec<_> = (0..alphabet.len()).map(|a| (0, Some(a), 0)).collect();
        Fsa::new(alphabet, 1, 0, [0], ts).expect("valid universal automaton")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn transitions(&self) -> &[(StateId, Option<usize>, StateId)] {
        &self.transitions
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    /// `|A| = |Q| + |Σ|`.
    pub fn size(&self) -> usize {
        self.num_states + self.alphabet.len()
    }

    pub fn letter(&self, idx: usize) -> &Letter {
        &self.alphabet.letters()[idx]
    }

    /// Adds a state and returns it.
    pub fn add_state(&mut self) -> StateId {
        self.num_states += 1;
        self.num_states - 1
    }

    pub fn add_transition(&mut self, from: StateId, label: Option<usize>, to: StateId) {
        assert!(from < self.num_states && to < self.num_states);
        if !self.transitions.contains(&(from, label, to)) {
            self.transitions.push((from, label, to));
        }
    }

    pub fn set_final(&mut self, q: StateId, accepting: bool) {
        if accepting {
            self.finals.insert(q);
        } else {
            self.finals.remove(&q);
        }
    }

    /// Re-expresses the automaton over `alphabet`, which must contain every
    /// letter of the current alphabet.
    pub fn with_alphabet(&self, alphabet: &Alphabet) -> Result<Fsa, FsaError> {
        if !self.alphabet.is_subset_of(alphabet) {
            return Err(FsaError::AlphabetMismatch(
                self.alphabet.letters().to_vec(),
                alphabet.letters().to_vec(),
            ));
        }
        let map: Vec<usize> = self
            .alphabet
            .letters()
            .iter()
            .map(|l| alphabet.index_of(l).expect("subset checked"))
            .collect();
        Ok(Fsa {
            alphabet: alphabet.clone(),
            num_states: self.num_states,
            transitions: self
                .transitions
                .iter()
                .map(|&(p, l, q)| (p, l.map(|l| map[l]), q))
                .collect(),
            initial: self.initial,
            finals: self.finals.clone(),
        })
    }

    fn successors(&self) -> Vec<Vec<(Option<usize>, StateId)>> {
        let mut succ = vec![Vec::new(); self.num_states];
        for &(p, l, q) in &self.transitions {
            succ[p].push((l, q));
        }
        succ
    }

    /// ε-closure of a set of states, as a sorted vector.
    pub fn eps_closure(&self, states: impl IntoIterator<Item = StateId>) -> Vec<StateId> {
        let succ = self.successors();
        eps_closure_with(&succ, states)
    }

    pub fn accepts(&self, w: &Word) -> bool {
        let succ = self.successors();
        let mut cur = eps_closure_with(&succ, [self.initial]);
        for l in w.letters() {
            let Some(a) = self.alphabet.index_of(l) else {
                return false;
            };
            let next = step_with(&succ, &cur, a);
            cur = eps_closure_with(&succ, next);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|q| self.finals.contains(q))
    }

    /// Adds a self-loop on every letter at every state; accepts uc(L).
    pub fn saturate_up(&self) -> Fsa {
        let mut out = self.clone();
        for q in 0..self.num_states {
            for a in 0..self.alphabet.len() {
                out.add_transition(q, Some(a), q);
            }
        }
        out
    }

    /// Adds an ε-copy of every transition; accepts dc(L).
    pub fn saturate_down(&self) -> Fsa {
        let mut out = self.clone();
        for &(p, l, q) in &self.transitions {
            if l.is_some() {
                out.add_transition(p, None, q);
            }
        }
        out
    }

    /// States reachable from the initial state.
    pub fn reachable_states(&self) -> BTreeSet<StateId> {
        let succ = self.successors();
        let mut seen = BTreeSet::from([self.initial]);
        let mut stack = vec![self.initial];
        while let Some(p) = stack.pop() {
            for &(_, q) in &succ[p] {
                if seen.insert(q) {
                    stack.push(q);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable_states(&self) -> BTreeSet<StateId> {
        let mut pred = vec![Vec::new(); self.num_states];
        for &(p, _, q) in &self.transitions {
            pred[q].push(p);
        }
        let mut seen: BTreeSet<StateId> = self.finals.clone();
        let mut stack: Vec<StateId> = seen.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for &p in &pred[q] {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Keeps only states that are both reachable and co-reachable. The
    /// initial state is always kept (as state 0).
    pub fn trim(&self) -> Fsa {
        let reach = self.reachable_states();
        let coreach = self.coreachable_states();
        let mut keep: Vec<StateId> = vec![self.initial];
        keep.extend((0..self.num_states).filter(|q| *q != self.initial && reach.contains(q) && coreach.contains(q)));
        let index: HashMap<StateId, StateId> = keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let useful = |q: &StateId| reach.contains(q) && coreach.contains(q);
        let transitions = self
            .transitions
            .iter()
            .filter(|(p, _, q)| useful(p) && useful(q))
            .map(|&(p, l, q)| (index[&p], l, index[&q]));
        let finals = self.finals.iter().filter(|q| useful(q)).map(|q| index[q]);
        Fsa::new(
            self.alphabet.clone(),
            keep.len(),
            0,
            finals.collect::<Vec<_>>(),
            transitions.collect::<Vec<_>>(),
        )
        .expect("trimmed automaton is well formed")
    }

    /// Disjoint union accepting `L(self) ∪ L(other)`; alphabets are merged.
    pub fn union(&self, other: &Fsa) -> Fsa {
        let alphabet = self.alphabet.union(&other.alphabet);
        let a = self.with_alphabet(&alphabet).expect("superset");
        let b = other.with_alphabet(&alphabet).expect("superset");
        let off_a = 1;
        let off_b = 1 + a.num_states;
        let mut ts = vec![(0, None, a.initial + off_a), (0, None, b.initial + off_b)];
        ts.extend(a.transitions.iter().map(|&(p, l, q)| (p + off_a, l, q + off_a)));
        ts.extend(b.transitions.iter().map(|&(p, l, q)| (p + off_b, l, q + off_b)));
        let finals: Vec<_> = a
            .finals
            .iter()
            .map(|f| f + off_a)
            .chain(b.finals.iter().map(|f| f + off_b))
            .collect();
        Fsa::new(alphabet, 1 + a.num_states + b.num_states, 0, finals, ts).expect("union well formed")
    }

    /// Subset construction over the reachable part; the result is complete.
    pub fn determinize(&self) -> Dfa {
        let succ = self.successors();
        let k = self.alphabet.len();
        let start = eps_closure_with(&succ, [self.initial]);
        let mut index: HashMap<Vec<StateId>, usize> = HashMap::new();
        let mut sets = vec![start.clone()];
        index.insert(start, 0);
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let cur = sets[i].clone();
            let mut row = Vec::with_capacity(k);
            for a in 0..k {
                let next = eps_closure_with(&succ, step_with(&succ, &cur, a));
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        sets.push(next.clone());
                        index.insert(next, sets.len() - 1);
                        sets.len() - 1
                    }
                };
                row.push(id);
            }
            delta.push(row);
            i += 1;
        }
        let finals = sets.iter().map(|s| s.iter().any(|q| self.finals.contains(q))).collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            initial: 0,
            finals,
        }
    }

    /// Number of states of the minimal complete DFA accepting `L(self)`.
    pub fn minimal_dfa_size(&self) -> usize {
        self.determinize().minimize().num_states()
    }

    /// All accepted words of length at most `k`.
    pub fn enumerate(&self, k: usize) -> BTreeSet<Word> {
        let succ = self.successors();
        let mut out = BTreeSet::new();
        let start = eps_closure_with(&succ, [self.initial]);
        let mut layer: HashMap<Vec<StateId>, Vec<Word>> = HashMap::new();
        layer.insert(start, vec![Word::empty()]);
        for len in 0..=k {
            let mut next: HashMap<Vec<StateId>, Vec<Word>> = HashMap::new();
            for (set, words) in &layer {
                if set.iter().any(|q| self.finals.contains(q)) {
                    out.extend(words.iter().cloned());
                }
                if len == k {
                    continue;
                }
                for a in 0..self.alphabet.len() {
                    let target = eps_closure_with(&succ, step_with(&succ, set, a));
                    if target.is_empty() {
                        continue;
                    }
                    let entry = next.entry(target).or_default();
                    entry.extend(words.iter().map(|w| w.pushed(self.letter(a).clone())));
                }
            }
            layer = next;
        }
        out
    }

    /// Shortlex-minimal accepted word, if any.
    pub fn shortest_word(&self) -> Option<Word> {
        let pair = PairSearch::new(self, None, |a, _| a);
        pair.run()
    }
}

fn eps_closure_with(succ: &[Vec<(Option<usize>, StateId)>], states: impl IntoIterator<Item = StateId>) -> Vec<StateId> {
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut stack: Vec<StateId> = Vec::new();
    for s in states {
        if seen.insert(s) {
            stack.push(s);
        }
    }
    while let Some(p) = stack.pop() {
        for &(l, q) in &succ[p] {
            if l.is_none() && seen.insert(q) {
                stack.push(q);
            }
        }
    }
    seen.into_iter().collect()
}

fn step_with(succ: &[Vec<(Option<usize>, StateId)>], states: &[StateId], a: usize) -> Vec<StateId> {
    let mut out = BTreeSet::new();
    for &p in states {
        for &(l, q) in &succ[p] {
            if l == Some(a) {
                out.insert(q);
            }
        }
    }
    out.into_iter().collect()
}

/// A complete deterministic automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    delta: Vec<Vec<usize>>,
    initial: usize,
    finals: Vec<bool>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn next(&self, q: usize, a: usize) -> usize {
        self.delta[q][a]
    }

    /// Moore partition refinement over the reachable states.
    pub fn minimize(&self) -> Dfa {
        let n = self.num_states();
        let k = self.alphabet.len();
        let mut class: Vec<usize> = self.finals.iter().map(|&f| usize::from(f)).collect();
        let mut count = class.iter().collect::<BTreeSet<_>>().len();
        loop {
            let mut signatures: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend((0..k).map(|a| class[self.delta[q][a]]));
                let len = signatures.len();
                next[q] = *signatures.entry(sig).or_insert(len);
            }
            let new_count = signatures.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut delta = vec![vec![0; k]; count];
        let mut finals = vec![false; count];
        for q in 0..n {
            for a in 0..k {
                delta[class[q]][a] = class[self.delta[q][a]];
            }
            finals[class[q]] = self.finals[q];
        }
        let mut min = Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            initial: class[self.initial],
            finals,
        };
        min.renumber();
        min
    }

    fn renumber(&mut self) {
        // BFS order from the initial state
        let n = self.num_states();
        let mut order = vec![usize::MAX; n];
        let mut queue = VecDeque::from([self.initial]);
        order[self.initial] = 0;
        let mut next_id = 1;
        while let Some(q) = queue.pop_front() {
            for &r in &self.delta[q] {
                if order[r] == usize::MAX {
                    order[r] = next_id;
                    next_id += 1;
                    queue.push_back(r);
                }
            }
        }
        let mut delta = vec![Vec::new(); next_id];
        let mut finals = vec![false; next_id];
        for q in 0..n {
            if order[q] == usize::MAX {
                continue;
            }
            delta[order[q]] = self.delta[q].iter().map(|&r| order[r]).collect();
            finals[order[q]] = self.finals[q];
        }
        self.delta = delta;
        self.finals = finals;
        self.initial = 0;
    }

    pub fn to_fsa(&self) -> Fsa {
        let mut ts = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (a, &r) in row.iter().enumerate() {
                ts.push((q, Some(a), r));
            }
        }
        let finals: Vec<_> = (0..self.num_states()).filter(|&q| self.finals[q]).collect();
        Fsa::new(self.alphabet.clone(), self.num_states(), self.initial, finals, ts)
            .expect("dfa converts to a valid automaton")
    }
}

/// A language query answered by [`decide`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    /// `L(a) ⊆ L(b)`.
    Inclusion,
    /// `L(a) = L(b)`.
    Equivalence,
    /// `L(a) = ∅`.
    Emptiness,
    /// `w ∈ L(a)`.
    Membership(Word),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub holds: bool,
    /// Shortlex-minimal witness of failure, when the query has one:
    /// a word of `L(a) \ L(b)` for inclusion, of the symmetric difference
    /// for equivalence, an accepted word for emptiness.
    pub counterexample: Option<Word>,
}

/// Answers `query` about `a` (and `b` for binary queries).
pub fn decide(a: &Fsa, b: Option<&Fsa>, query: &Query) -> Result<Decision, FsaError> {
    match query {
        Query::Emptiness => {
            let w = a.shortest_word();
            Ok(Decision {
                holds: w.is_none(),
                counterexample: w,
            })
        }
        Query::Membership(w) => Ok(Decision {
            holds: a.accepts(w),
            counterexample: None,
        }),
        Query::Inclusion => {
            let b = b.ok_or_else(|| FsaError::AlphabetMismatch(a.alphabet.letters().to_vec(), Vec::new()))?;
            let w = difference_witness(a, b, |x, y| x && !y)?;
            Ok(Decision {
                holds: w.is_none(),
                counterexample: w,
            })
        }
        Query::Equivalence => {
            let b = b.ok_or_else(|| FsaError::AlphabetMismatch(a.alphabet.letters().to_vec(), Vec::new()))?;
            let w = difference_witness(a, b, |x, y| x != y)?;
            Ok(Decision {
                holds: w.is_none(),
                counterexample: w,
            })
        }
    }
}

pub fn is_included(a: &Fsa, b: &Fsa) -> Result<Decision, FsaError> {
    decide(a, Some(b), &Query::Inclusion)
}

pub fn are_equivalent(a: &Fsa, b: &Fsa) -> Result<Decision, FsaError> {
    decide(a, Some(b), &Query::Equivalence)
}

fn difference_witness(a: &Fsa, b: &Fsa, bad: fn(bool, bool) -> bool) -> Result<Option<Word>, FsaError> {
    if !a.alphabet.same_letters(&b.alphabet) {
        return Err(FsaError::AlphabetMismatch(
            a.alphabet.letters().to_vec(),
            b.alphabet.letters().to_vec(),
        ));
    }
    let b = b.with_alphabet(&a.alphabet)?;
    Ok(PairSearch::new(a, Some(&b), bad).run())
}

/// Breadth-first search over pairs of subset-construction states, with
/// letters tried in name order, so the first hit is shortlex-minimal.
struct PairSearch<'a> {
    a: &'a Fsa,
    b: Option<&'a Fsa>,
    bad: fn(bool, bool) -> bool,
}

impl<'a> PairSearch<'a> {
    fn new(a: &'a Fsa, b: Option<&'a Fsa>, bad: fn(bool, bool) -> bool) -> Self {
        PairSearch { a, b, bad }
    }

    fn run(&self) -> Option<Word> {
        let sa = self.a.successors();
        let sb = self.b.map(|b| b.successors());
        let mut letters: Vec<usize> = (0..self.a.alphabet.len()).collect();
        letters.sort_by(|&x, &y| self.a.letter(x).cmp(self.a.letter(y)));
        let accepting = |fsa: &Fsa, set: &[StateId]| set.iter().any(|q| fsa.finals.contains(q));

        type Key = (Vec<StateId>, Vec<StateId>);
        let start: Key = (
            eps_closure_with(&sa, [self.a.initial]),
            match (self.b, &sb) {
                (Some(b), Some(sb)) => eps_closure_with(sb, [b.initial]),
                _ => Vec::new(),
            },
        );
        let mut parent: Vec<Option<(usize, usize)>> = vec![None];
        let mut nodes: Vec<Key> = vec![start.clone()];
        let mut seen: HashMap<Key, usize> = HashMap::from([(start, 0)]);
        let mut i = 0;
        while i < nodes.len() {
            let (x, y) = nodes[i].clone();
            let in_a = accepting(self.a, &x);
            let in_b = self.b.is_some_and(|b| accepting(b, &y));
            if (self.bad)(in_a, in_b) {
                let mut word = Vec::new();
                let mut cur = i;
                while let Some((p, l)) = parent[cur] {
                    word.push(self.a.letter(l).clone());
                    cur = p;
                }
                word.reverse();
                return Some(Word::new(word));
            }
            for &l in &letters {
                let nx = eps_closure_with(&sa, step_with(&sa, &x, l));
                let ny = match &sb {
                    Some(sb) => eps_closure_with(sb, step_with(sb, &y, l)),
                    None => Vec::new(),
                };
                // both sides dead: nothing below can differ
                if nx.is_empty() && ny.is_empty() {
                    continue;
                }
                let key = (nx, ny);
                if !seen.contains_key(&key) {
                    seen.insert(key.clone(), nodes.len());
                    nodes.push(key);
                    parent.push(Some((i, l)));
                }
            }
            i += 1;
        }
        None
    }
}
