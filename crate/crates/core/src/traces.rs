//! Trace inclusion between a finite automaton and a Petri net, and the
//! deciders for whether a coverability language is upward or downward
//! closed.
//!
//! The search explores pairs `(q, S)` where `q` is an automaton state and
//! `S` is the antichain of maximal ω-markings reachable in the net by some
//! firing sequence carrying the current trace. `S` is kept closed under
//! ε-transitions of the net using Karp–Miller acceleration restricted to
//! those transitions. A node is discarded once an already processed node
//! with the same automaton state has a smaller marking set, since every
//! continuation that fails from the new node also fails from the old one.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::closures::{closure_fsa, Direction};
use crate::fsa::{Fsa, FsaError, StateId};
use crate::net::{append_final_letter, Letter, Marking, NetError, NetInstance, PetriNet, TransitionId, Word};
use crate::omega::{insert_maximal, OmegaMarking};
use crate::reach::km_explore_from;
use crate::Budget;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("budget exceeded after {explored} {what}")]
    BudgetExceeded { what: &'static str, explored: usize },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Fsa(#[from] FsaError),
}

/// Result of a trace inclusion check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceInclusion {
    pub included: bool,
    /// A shortest trace of the automaton that is not a trace of the net.
    pub counterexample: Option<Word>,
    /// The automaton states visited while reading the counterexample,
    /// starting at the initial state.
    pub path: Option<Vec<StateId>>,
    /// Number of search nodes processed.
    pub explored: usize,
}

/// Result of a containment check of a regular language in a net language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularInclusion {
    pub included: bool,
    /// A word accepted by the automaton but outside the net language.
    pub counterexample: Option<Word>,
}

/// Answer of the closedness deciders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedAnswer {
    Yes,
    /// The language is not closed; the word lies in the closure but not in
    /// the language.
    No(Word),
    /// No verdict within budget, with a diagnostic.
    Unknown(String),
}

struct Node {
    state: StateId,
    markings: Vec<OmegaMarking>,
    parent: Option<usize>,
    letter: Option<Letter>,
}

/// Every marking of `old` is below some marking of `new`.
fn dominated(old: &[OmegaMarking], new: &[OmegaMarking]) -> bool {
    old.iter().all(|m| new.iter().any(|n| m.le(n)))
}

struct Closer<'a> {
    net: &'a PetriNet,
    budget: &'a Budget,
    by_label: HashMap<Letter, Vec<TransitionId>>,
}

impl<'a> Closer<'a> {
    fn new(net: &'a PetriNet, budget: &'a Budget) -> Self {
        let mut by_label: HashMap<Letter, Vec<TransitionId>> = HashMap::new();
        for (t, tr) in net.transitions().iter().enumerate() {
            if let Some(l) = &tr.label {
                by_label.entry(l.clone()).or_default().push(t);
            }
        }
        Closer { net, budget, by_label }
    }

    /// Maximal elements of the ε-closure of `set`.
    fn eps_close(&self, set: Vec<OmegaMarking>) -> Result<Vec<OmegaMarking>, TraceError> {
        let net = self.net;
        let mut out = Vec::new();
        for m in set {
            let g = km_explore_from(net, m, self.budget, |t| net.transition(t).label.is_none());
            if !g.complete {
                return Err(TraceError::BudgetExceeded {
                    what: "ε-closure nodes",
                    explored: g.nodes.len(),
                });
            }
            for n in g.nodes {
                insert_maximal(&mut out, n);
            }
        }
        Ok(out)
    }

    /// Markings reachable from `set` by one `letter`-labelled transition
    /// followed by ε-transitions.
    fn step(&self, set: &[OmegaMarking], letter: &Letter) -> Result<Vec<OmegaMarking>, TraceError> {
        let Some(ts) = self.by_label.get(letter) else {
            return Ok(Vec::new());
        };
        let mut next = Vec::new();
        for m in set {
            for &t in ts {
                if m.is_enabled(self.net, t) {
                    insert_maximal(&mut next, m.fire(self.net, t));
                }
            }
        }
        self.eps_close(next)
    }
}

/// Decides `Traces(A) ⊆ Traces(N, M0)`, where the traces of the automaton
/// are the labels of all its paths from the initial state.
pub fn traces_included(a: &Fsa, net: &PetriNet, m0: &Marking, budget: &Budget) -> Result<TraceInclusion, TraceError> {
    net.check_marking(m0)?;
    let closer = Closer::new(net, budget);
    let root = closer.eps_close(vec![OmegaMarking::from(m0)])?;
    let mut nodes = vec![Node {
        state: a.initial(),
        markings: root,
        parent: None,
        letter: None,
    }];
    let mut succ: Vec<Vec<(Option<usize>, StateId)>> = vec![Vec::new(); a.num_states()];
    for &(p, l, q) in a.transitions() {
        succ[p].push((l, q));
    }
    let mut processed: Vec<Vec<usize>> = vec![Vec::new(); a.num_states()];
    let mut deque = VecDeque::from([0usize]);
    let mut explored = 0;
    while let Some(n) = deque.pop_front() {
        let q = nodes[n].state;
        if processed[q]
            .iter()
            .any(|&o| dominated(&nodes[o].markings, &nodes[n].markings))
        {
            continue;
        }
        processed[q].push(n);
        explored += 1;
        if nodes.len() >= budget.nodes {
            return Err(TraceError::BudgetExceeded {
                what: "trace nodes",
                explored: nodes.len(),
            });
        }
        for &(l, q2) in &succ[q] {
            match l {
                None => {
                    let markings = nodes[n].markings.clone();
                    nodes.push(Node {
                        state: q2,
                        markings,
                        parent: Some(n),
                        letter: None,
                    });
                    deque.push_front(nodes.len() - 1);
                }
                Some(idx) => {
                    let letter = a.letter(idx).clone();
                    let markings = closer.step(&nodes[n].markings, &letter)?;
                    let empty = markings.is_empty();
                    nodes.push(Node {
                        state: q2,
                        markings,
                        parent: Some(n),
                        letter: Some(letter),
                    });
                    let id = nodes.len() - 1;
                    if empty {
                        let (word, path) = trace_of(&nodes, id);
                        return Ok(TraceInclusion {
                            included: false,
                            counterexample: Some(word),
                            path: Some(path),
                            explored,
                        });
                    }
                    deque.push_back(id);
                }
            }
        }
    }
    Ok(TraceInclusion {
        included: true,
        counterexample: None,
        path: None,
        explored,
    })
}

fn trace_of(nodes: &[Node], mut n: usize) -> (Word, Vec<StateId>) {
    let mut letters = Vec::new();
    let mut path = Vec::new();
    loop {
        path.push(nodes[n].state);
        if let Some(l) = &nodes[n].letter {
            letters.push(l.clone());
        }
        match nodes[n].parent {
            Some(p) => n = p,
            None => break,
        }
    }
    letters.reverse();
    path.reverse();
    (Word::new(letters), path)
}

fn fresh_letter(a: &Fsa, net: &PetriNet) -> Letter {
    let mut k = 0usize;
    loop {
        let l = Letter::new(&format!("end{k}#"));
        if !a.alphabet().contains(&l) && !net.alphabet().contains(&l) {
            return l;
        }
        k += 1;
    }
}

/// Decides `L(A) ⊆ L(N, M0, Mf)` by reduction to trace inclusion.
///
/// The automaton is trimmed and every final state gets a transition on a
/// fresh letter to a new unique final state; the net gets a transition on
/// the same letter that consumes the final marking.
pub fn regular_included_in_lang(a: &Fsa, inst: &NetInstance, budget: &Budget) -> Result<RegularInclusion, TraceError> {
    let trimmed = a.trim();
    if trimmed.finals().is_empty() {
        return Ok(RegularInclusion {
            included: true,
            counterexample: None,
        });
    }
    let end = fresh_letter(&trimmed, inst.net());
    let alphabet = trimmed.alphabet().with_letter(end.clone());
    let end_idx = alphabet.index_of(&end).expect("letter was just added");
    let f = trimmed.num_states();
    let ts = trimmed
        .transitions()
        .iter()
        .copied()
        .chain(trimmed.finals().iter().map(|&q| (q, Some(end_idx), f)));
    let reduced = Fsa::new(alphabet, f + 1, trimmed.initial(), [f], ts.collect::<Vec<_>>())?;
    let extended = append_final_letter(inst, end.clone())?;
    let check = traces_included(&reduced, extended.net(), extended.initial(), budget)?;
    if check.included {
        return Ok(RegularInclusion {
            included: true,
            counterexample: None,
        });
    }
    let trace = check.counterexample.expect("failing check has a counterexample");
    let path = check.path.expect("failing check has a path");
    let mut letters = trace.letters().to_vec();
    if letters.last() == Some(&end) {
        letters.pop();
    } else {
        // extend the trace along any path to an accepting state
        let q = *path.last().expect("paths are non-empty");
        let from_q = Fsa::new(
            trimmed.alphabet().clone(),
            trimmed.num_states(),
            q,
            trimmed.finals().iter().copied(),
            trimmed.transitions().iter().copied(),
        )?;
        let rest = from_q.shortest_word().expect("trimmed states are co-reachable");
        letters.extend(rest.letters().iter().cloned());
    }
    Ok(RegularInclusion {
        included: false,
        counterexample: Some(Word::new(letters)),
    })
}

/// Decides whether the covering language of `inst` is closed in the given
/// direction. The answer is `Yes` only when the closure automaton is exact.
pub fn is_closed(inst: &NetInstance, dir: Direction, budget: &Budget) -> ClosedAnswer {
    let closure = match closure_fsa(inst, dir, budget) {
        Ok(c) => c,
        Err(e) => return ClosedAnswer::Unknown(format!("closure construction failed: {e}")),
    };
    match regular_included_in_lang(&closure.fsa, inst, budget) {
        Ok(r) if !r.included => ClosedAnswer::No(r.counterexample.expect("failing check has a counterexample")),
        Ok(_) if closure.exactness.is_exact() => ClosedAnswer::Yes,
        Ok(_) => ClosedAnswer::Unknown(format!(
            "closure automaton is {} ({}); no counterexample found",
            closure.exactness, closure.note
        )),
        Err(e) => ClosedAnswer::Unknown(format!("inclusion check failed: {e}")),
    }
}
