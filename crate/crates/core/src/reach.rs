//! Coverability, Karp–Miller graphs, simultaneous unboundedness and
//! membership in the covering language and its closures.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::fsa::Fsa;
use crate::net::{
    sync_with_fsa, Letter, Marking, NetError, NetInstance, PetriNet, PlaceId, SyncMode, TransitionId, Word,
};
use crate::omega::OmegaMarking;
use crate::Budget;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReachError {
    #[error("budget exceeded after {explored} {what}")]
    BudgetExceeded { what: &'static str, explored: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Outcome of a coverability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverability {
    pub coverable: bool,
    /// A covering run when `coverable`.
    pub witness: Option<Vec<TransitionId>>,
}

/// Backward coverability over a minimal basis of the upward-closed set of
/// markings from which `M_f` can be covered.
pub fn coverable(inst: &NetInstance, budget: &Budget) -> Result<Coverability, ReachError> {
    let net = inst.net();
    let m0 = inst.initial();
    let target = inst.final_marking();
    if m0.covers(target) {
        return Ok(Coverability {
            coverable: true,
            witness: Some(Vec::new()),
        });
    }
    // arena of generated elements: (marking, transition, successor index)
    let mut arena: Vec<(Marking, Option<(TransitionId, usize)>)> = vec![(target.clone(), None)];
    let mut basis: Vec<usize> = vec![0];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(idx) = queue.pop_front() {
        if !basis.contains(&idx) {
            continue;
        }
        for t in 0..net.num_transitions() {
            let pre = backward_step(net, &arena[idx].0, t);
            if basis.iter().any(|&b| pre.covers(&arena[b].0)) {
                continue;
            }
            if arena.len() >= budget.nodes {
                return Err(ReachError::BudgetExceeded {
                    what: "basis elements",
                    explored: arena.len(),
                });
            }
            let new_idx = arena.len();
            arena.push((pre, Some((t, idx))));
            if m0.covers(&arena[new_idx].0) {
                let mut witness = Vec::new();
                let mut cur = new_idx;
                while let Some((t, next)) = arena[cur].1 {
                    witness.push(t);
                    cur = next;
                }
                debug_assert!(net
                    .fire_sequence(m0, &witness)
                    .map(|m| m.covers(target))
                    .unwrap_or(false));
                return Ok(Coverability {
                    coverable: true,
                    witness: Some(witness),
                });
            }
            basis.retain(|&b| !arena[b].0.covers(&arena[new_idx].0));
            basis.push(new_idx);
            debug_assert!(is_antichain(basis.iter().map(|&b| &arena[b].0)));
            queue.push_back(new_idx);
        }
    }
    Ok(Coverability {
        coverable: false,
        witness: None,
    })
}

/// `pre_t(M) = max(M − post(t), 0) + pre(t)`, the least marking from which
/// firing `t` covers `M`.
pub fn backward_step(net: &PetriNet, m: &Marking, t: TransitionId) -> Marking {
    let tr = net.transition(t);
    Marking::from_vec(
        m.counts()
            .iter()
            .zip(tr.pre.iter().zip(&tr.post))
            .map(|(c, (pre, post))| if c > post { c - post + pre } else { pre.clone() })
            .collect(),
    )
}

pub fn is_antichain<'a>(ms: impl Iterator<Item = &'a Marking> + Clone) -> bool {
    let v: Vec<_> = ms.collect();
    v.iter()
        .enumerate()
        .all(|(i, a)| v.iter().enumerate().all(|(j, b)| i == j || !a.covers(b)))
}

/// A Karp–Miller coverability graph.
#[derive(Clone, Debug)]
pub struct KmGraph {
    pub nodes: Vec<OmegaMarking>,
    pub edges: Vec<(usize, TransitionId, usize)>,
    pub root: usize,
    /// False when exploration stopped at the node budget; the graph is then
    /// an explored prefix.
    pub complete: bool,
}

impl KmGraph {
    pub fn node_with_omega_on(&self, places: &[PlaceId]) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| places.iter().all(|&p| n.get(p).is_omega()))
    }
}

/// Builds the Karp–Miller graph, returning an error when the node budget
/// is hit.
pub fn km_graph(net: &PetriNet, m0: &Marking, budget: &Budget) -> Result<KmGraph, ReachError> {
    let g = km_graph_partial(net, m0, budget);
    if g.complete {
        Ok(g)
    } else {
        Err(ReachError::BudgetExceeded {
            what: "Karp–Miller nodes",
            explored: g.nodes.len(),
        })
    }
}

/// Builds the Karp–Miller graph, or the prefix explored within budget.
///
/// The frontier is FIFO. A successor is accelerated against every tree
/// ancestor it strictly dominates; identical ω-markings share a node.
pub fn km_graph_partial(net: &PetriNet, m0: &Marking, budget: &Budget) -> KmGraph {
    km_explore(net, m0, budget, |_| true)
}

/// Karp–Miller exploration restricted to the transitions accepted by `allow`.
pub(crate) fn km_explore(
    net: &PetriNet,
    m0: &Marking,
    budget: &Budget,
    allow: impl Fn(TransitionId) -> bool,
) -> KmGraph {
    km_explore_from(net, OmegaMarking::from(m0), budget, allow)
}

pub(crate) fn km_explore_from(
    net: &PetriNet,
    root: OmegaMarking,
    budget: &Budget,
    allow: impl Fn(TransitionId) -> bool,
) -> KmGraph {
    let mut nodes = vec![root.clone()];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut index: HashMap<OmegaMarking, usize> = HashMap::from([(root, 0)]);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut complete = true;
    'outer: while let Some(n) = queue.pop_front() {
        for t in (0..net.num_transitions()).filter(|&t| allow(t)) {
            if !nodes[n].is_enabled(net, t) {
                continue;
            }
            let mut succ = nodes[n].fire(net, t);
            let mut anc = Some(n);
            while let Some(a) = anc {
                succ.accelerate_against(&nodes[a]);
                anc = parent[a];
            }
            if let Some(&existing) = index.get(&succ) {
                edges.push((n, t, existing));
                continue;
            }
            if nodes.len() >= budget.nodes {
                complete = false;
                break 'outer;
            }
            let id = nodes.len();
            nodes.push(succ.clone());
            parent.push(Some(n));
            index.insert(succ, id);
            edges.push((n, t, id));
            queue.push_back(id);
        }
    }
    KmGraph {
        nodes,
        edges,
        root: 0,
        complete,
    }
}

/// Decides whether the places `x` can be made simultaneously arbitrarily
/// large, via the ω-criterion on the Karp–Miller graph.
pub fn simultaneously_unbounded(
    net: &PetriNet,
    m0: &Marking,
    x: &[PlaceId],
    budget: &Budget,
) -> Result<bool, ReachError> {
    if x.is_empty() {
        return Ok(true);
    }
    let g = km_graph_partial(net, m0, budget);
    if g.node_with_omega_on(x).is_some() {
        return Ok(true);
    }
    if g.complete {
        Ok(false)
    } else {
        Err(ReachError::BudgetExceeded {
            what: "Karp–Miller nodes",
            explored: g.nodes.len(),
        })
    }
}

/// Which language a word is tested against in [`member`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemberMode {
    /// `w ∈ L`.
    Exact,
    /// `w ∈ uc(L)`.
    Up,
    /// `w ∈ dc(L)`.
    Down,
}

/// Exact membership of `w` in `L`, `uc(L)` or `dc(L)`.
pub fn member(w: &Word, inst: &NetInstance, mode: MemberMode, budget: &Budget) -> Result<bool, ReachError> {
    let net = inst.net();
    let alphabet = net.alphabet().clone();
    let foreign = w.letters().iter().any(|l| !alphabet.contains(l));
    let (automaton, sync) = match mode {
        MemberMode::Exact | MemberMode::Down => {
            if foreign {
                return Ok(false);
            }
            let a = Fsa::word(alphabet, w).expect("letters checked");
            let sync = if mode == MemberMode::Exact {
                SyncMode::Full
            } else {
                SyncMode::Right
            };
            (a, sync)
        }
        MemberMode::Up => {
            // letters the net cannot produce are simply skipped
            let kept: Word = w.letters().iter().filter(|l| alphabet.contains(l)).cloned().collect();
            let a = Fsa::word(alphabet, &kept).expect("letters filtered").saturate_down();
            (a, SyncMode::Full)
        }
    };
    let product = sync_with_fsa(net, &automaton, sync)?;
    let composite = product.instance(inst.initial(), inst.final_marking())?;
    Ok(coverable(&composite, budget)?.coverable)
}

/// Whether `w` labels some firing sequence from `m0` (a trace).
pub fn is_trace(net: &PetriNet, m0: &Marking, w: &Word, budget: &Budget) -> Result<bool, ReachError> {
    let zero = Marking::zero(net.num_places());
    let inst = NetInstance::new(net.clone(), m0.clone(), zero)?;
    member(w, &inst, MemberMode::Exact, budget)
}

/// `L_k`: labels of covering runs with at most `k` transitions.
pub fn brute_force_language(inst: &NetInstance, k: usize) -> BTreeSet<Word> {
    let mut memo = HashMap::new();
    let set = language_from(inst, inst.initial(), k, &mut memo);
    set.iter().cloned().map(Word::new).collect()
}

type Memo = HashMap<(Marking, usize), Rc<BTreeSet<Vec<Letter>>>>;

fn language_from(inst: &NetInstance, m: &Marking, k: usize, memo: &mut Memo) -> Rc<BTreeSet<Vec<Letter>>> {
    if let Some(r) = memo.get(&(m.clone(), k)) {
        return r.clone();
    }
    let net = inst.net();
    let mut out = BTreeSet::new();
    if inst.is_covering(m) {
        out.insert(Vec::new());
    }
    if k > 0 {
        for t in 0..net.num_transitions() {
            if !net.is_enabled(m, t) {
                continue;
            }
            let next = net.fire_unchecked(m, t);
            let rest = language_from(inst, &next, k - 1, memo);
            let label = &net.transition(t).label;
            for w in rest.iter() {
                match label {
                    Some(l) => {
                        let mut v = Vec::with_capacity(w.len() + 1);
                        v.push(l.clone());
                        v.extend_from_slice(w);
                        out.insert(v);
                    }
                    None => {
                        out.insert(w.clone());
                    }
                }
            }
        }
    }
    let rc = Rc::new(out);
    memo.insert((m.clone(), k), rc.clone());
    rc
}

/// Labels of all firing sequences from `m0` with at most `k` transitions.
pub fn brute_force_traces(net: &PetriNet, m0: &Marking, k: usize) -> BTreeSet<Word> {
    let zero = Marking::zero(net.num_places());
    let inst = NetInstance::new(net.clone(), m0.clone(), zero).expect("markings sized by the net");
    brute_force_language(&inst, k)
}

/// Markings reachable with at most `k` transitions.
pub fn reachable_markings(net: &PetriNet, m0: &Marking, k: usize) -> HashSet<Marking> {
    let mut seen = HashSet::from([m0.clone()]);
    let mut layer = vec![m0.clone()];
    for _ in 0..k {
        let mut next = Vec::new();
        for m in &layer {
            for t in 0..net.num_transitions() {
                if net.is_enabled(m, t) {
                    let s = net.fire_unchecked(m, t);
                    if seen.insert(s.clone()) {
                        next.push(s);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    seen
}

/// All markings reachable from `m0`, or `None` when more than `limit`
/// exist or some marking exceeds `cap` tokens on a place.
pub fn reachability_set(net: &PetriNet, m0: &Marking, limit: usize, cap: &BigUint) -> Option<HashSet<Marking>> {
    let mut seen = HashSet::from([m0.clone()]);
    let mut stack = vec![m0.clone()];
    while let Some(m) = stack.pop() {
        for t in 0..net.num_transitions() {
            if net.is_enabled(&m, t) {
                let s = net.fire_unchecked(&m, t);
                if s.counts().iter().any(|c| c > cap) {
                    return None;
                }
                if seen.insert(s.clone()) {
                    if seen.len() > limit {
                        return None;
                    }
                    stack.push(s);
                }
            }
        }
    }
    Some(seen)
}

/// Convenience: does any node of the graph cover `m` (with ω dominating)?
pub fn km_covers(g: &KmGraph, m: &Marking) -> bool {
    g.nodes.iter().any(|n| n.covers_marking(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_bpp_power, gen_rackoff_ce};
    use crate::net::named_marking;

    fn w(s: &str) -> Word {
        Word::from_chars(s)
    }

    #[test]
    fn rackoff_coverable_by_rt_a() {
        let inst = gen_rackoff_ce();
        let c = coverable(&inst, &Budget::default()).unwrap();
        assert!(c.coverable);
        let rt_a = inst.net().transition_index("rt_a").unwrap();
        assert_eq!(c.witness, Some(vec![rt_a]));
    }

    #[test]
    fn zero_target_is_trivially_coverable() {
        let inst = gen_rackoff_ce();
        let zero = Marking::zero(3);
        let inst = NetInstance::new(inst.net().clone(), inst.initial().clone(), zero).unwrap();
        assert_eq!(coverable(&inst, &Budget::default()).unwrap().witness, Some(vec![]));
    }

    #[test]
    fn power_witness_length() {
        let inst = gen_bpp_power(2);
        let c = coverable(&inst, &Budget::default()).unwrap();
        let witness = c.witness.unwrap();
        assert_eq!(witness.len(), 5);
        let m = inst.net().fire_sequence(inst.initial(), &witness).unwrap();
        assert!(m.covers(inst.final_marking()));
    }

    #[test]
    fn uncoverable_target() {
        let inst = gen_bpp_power(1);
        let mf = named_marking(inst.net(), &[("pf", 3)]).unwrap();
        let inst = NetInstance::new(inst.net().clone(), inst.initial().clone(), mf).unwrap();
        assert!(!coverable(&inst, &Budget::default()).unwrap().coverable);
    }

    #[test]
    fn km_graph_examples() {
        let power = gen_bpp_power(2);
        let g = km_graph(power.net(), power.initial(), &Budget::default()).unwrap();
        assert!(g.nodes.iter().all(|n| n.omega_places().next().is_none()));
        assert_eq!(g.nodes.len(), 6);

        let pump = PetriNet::builder()
            .place("p")
            .transition("gen", None, [], [("p", 1u32)])
            .build()
            .unwrap();
        let g = km_graph(&pump, &Marking::from_u64(&[0]), &Budget::default()).unwrap();
        assert!(g.node_with_omega_on(&[0]).is_some());

        let ce = gen_rackoff_ce();
        let g = km_graph(ce.net(), ce.initial(), &Budget::default()).unwrap();
        let temp = ce.net().place_index("temp").unwrap();
        assert!(g.node_with_omega_on(&[temp]).is_some());
    }

    #[test]
    fn km_budget_is_reported() {
        let power = gen_bpp_power(3);
        let err = km_graph(power.net(), power.initial(), &Budget::with_nodes(3)).unwrap_err();
        assert!(matches!(err, ReachError::BudgetExceeded { .. }));
    }

    #[test]
    fn suppn_examples() {
        let power = gen_bpp_power(2);
        let b = Budget::default();
        assert!(simultaneously_unbounded(power.net(), power.initial(), &[], &b).unwrap());
        let p1 = power.net().place_index("p1").unwrap();
        assert!(!simultaneously_unbounded(power.net(), power.initial(), &[p1], &b).unwrap());
        let ce = gen_rackoff_ce();
        let temp = ce.net().place_index("temp").unwrap();
        assert!(simultaneously_unbounded(ce.net(), ce.initial(), &[temp], &b).unwrap());
    }

    #[test]
    fn membership_examples() {
        let b = Budget::default();
        let ce = gen_rackoff_ce();
        assert!(member(&w("ab"), &ce, MemberMode::Exact, &b).unwrap());
        assert!(!member(&w("b"), &ce, MemberMode::Exact, &b).unwrap());
        assert!(!member(&w("b"), &ce, MemberMode::Up, &b).unwrap());
        assert!(member(&w("aab"), &ce, MemberMode::Up, &b).unwrap());
        let power = gen_bpp_power(2);
        assert!(member(&w("aaa"), &power, MemberMode::Down, &b).unwrap());
        assert!(!member(&w("aaaaa"), &power, MemberMode::Down, &b).unwrap());
        assert!(!member(&w("aaa"), &power, MemberMode::Exact, &b).unwrap());
        assert!(member(&w("aaaa"), &power, MemberMode::Exact, &b).unwrap());
    }

    #[test]
    fn brute_force_examples() {
        let ce = gen_rackoff_ce();
        let l2 = brute_force_language(&ce, 2);
        let expected: BTreeSet<Word> = ["ab", "ac", "c"].iter().map(|s| w(s)).collect();
        assert_eq!(l2, expected);
        let zero = NetInstance::new(ce.net().clone(), ce.initial().clone(), Marking::zero(3)).unwrap();
        assert_eq!(brute_force_language(&zero, 0), BTreeSet::from([Word::empty()]));
        let power = gen_bpp_power(2);
        assert_eq!(brute_force_language(&power, 5), BTreeSet::from([w("aaaa")]));
    }

    #[test]
    fn backward_step_formula() {
        let ce = gen_rackoff_ce();
        let net = ce.net();
        let m = named_marking(net, &[("stop", 1)]).unwrap();
        let rt_b = net.transition_index("rt_b").unwrap();
        assert_eq!(
            backward_step(net, &m, rt_b),
            named_marking(net, &[("run", 1), ("temp", 1)]).unwrap()
        );
    }
}
