//! Closure automata: the k-bounded automaton, Rackoff-style bounds, upward
//! closures for Petri nets and BPP nets, and downward closures via the BPP
//! cutoff abstraction or the Karp–Miller graph.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::fsa::{are_equivalent, Fsa};
use crate::net::{Marking, NetInstance};
use crate::omega::OmegaMarking;
use crate::reach::km_graph_partial;
use crate::Budget;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("the net is not a BPP net")]
    NotBpp,
    #[error("budget exceeded after {explored} {what}")]
    BudgetExceeded { what: &'static str, explored: usize },
    #[error("certified bound {0} exceeds the configured ceiling")]
    BoundTooLarge(Box<BoundReport>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    RackoffF,
    RackoffG,
    BppShort,
    BppCutoff,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::RackoffF => "rackoff_f",
            BoundKind::RackoffG => "rackoff_g",
            BoundKind::BppShort => "bpp_short",
            BoundKind::BppCutoff => "bpp_cutoff_c",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundValue {
    Exact(BigUint),
    /// `2^exponent`.
    PowerOfTwo(BigUint),
    /// Too large to materialize; has at least this many bits.
    AtLeastBits(u64),
}

impl BoundValue {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Exact(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(v) => write!(f, "{v}"),
            BoundValue::PowerOfTwo(e) => write!(f, "2^{e}"),
            BoundValue::AtLeastBits(b) => write!(f, "> 2^{}", b.saturating_sub(1)),
        }
    }
}

/// Parameters a bound is computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundInputs {
    /// Binary size of the instance.
    pub n: u64,
    /// Number of places.
    pub l: usize,
    pub transitions: usize,
    pub m0_tokens: BigUint,
    pub mf_tokens: BigUint,
    /// Largest flow weight.
    pub m: BigUint,
}

impl BoundInputs {
    pub fn of(inst: &NetInstance) -> Self {
        BoundInputs {
            n: inst.size(),
            l: inst.net().num_places(),
            transitions: inst.net().num_transitions(),
            m0_tokens: inst.initial().token_count(),
            mf_tokens: inst.final_marking().token_count(),
            m: inst.net().max_weight(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: BoundValue,
    pub inputs: BoundInputs,
    /// The formula instantiated with the inputs.
    pub formula: String,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}  [{}]", self.kind, self.value, self.formula)
    }
}

/// Largest number of bits materialized when evaluating the recurrence.
const MAX_BOUND_BITS: u64 = 1 << 22;

/// `f(0) = 1`, `f(i+1) = (2^n·f(i))^(i+1) + f(i)`.
pub fn rackoff_f(n: u64, i: usize) -> BoundValue {
    let mut f = BigUint::one();
    for j in 0..i {
        let est = (j as u64 + 1).saturating_mul(n.saturating_add(f.bits()));
        if est > MAX_BOUND_BITS {
            return BoundValue::AtLeastBits(est);
        }
        let base: BigUint = (BigUint::one() << n) * &f;
        f = base.pow(j as u32 + 1) + &f;
    }
    BoundValue::Exact(f)
}

/// Length bound `f(ℓ)` for covering runs, with `n = |inst|` and `ℓ = |P|`.
pub fn rackoff_bound(inst: &NetInstance) -> BoundReport {
    let inputs = BoundInputs::of(inst);
    BoundReport {
        kind: BoundKind::RackoffF,
        value: rackoff_f(inputs.n, inputs.l),
        formula: format!("f({}) with f(0)=1, f(i+1)=(2^{}·f(i))^(i+1)+f(i)", inputs.l, inputs.n),
        inputs,
    }
}

/// `g(i) = 2^((3n)^(i+1))`, reported through its exponent.
pub fn rackoff_g(n: u64, i: usize) -> BoundValue {
    BoundValue::PowerOfTwo(BigUint::from(3 * n).pow(i as u32 + 1))
}

pub fn rackoff_g_bound(inst: &NetInstance) -> BoundReport {
    let inputs = BoundInputs::of(inst);
    BoundReport {
        kind: BoundKind::RackoffG,
        value: rackoff_g(inputs.n, inputs.l),
        formula: format!("g({}) = 2^((3·{})^{})", inputs.l, inputs.n, inputs.l + 1),
        inputs,
    }
}

/// `‖M_f‖²·|T|`, the length of some covering run of a BPP net whose label
/// is a subword of any given covering run's label.
pub fn bpp_short_bound(inst: &NetInstance) -> Result<BoundReport, ClosureError> {
    if !inst.net().is_bpp() {
        return Err(ClosureError::NotBpp);
    }
    let inputs = BoundInputs::of(inst);
    let value = &inputs.mf_tokens * &inputs.mf_tokens * BigUint::from(inputs.transitions);
    Ok(BoundReport {
        kind: BoundKind::BppShort,
        value: BoundValue::Exact(value),
        formula: format!("{}²·{}", inputs.mf_tokens, inputs.transitions),
        inputs,
    })
}

/// `c = ‖M₀‖·(|P|·m)^(|T|+1)`.
pub fn bpp_cutoff(inst: &NetInstance) -> Result<BoundReport, ClosureError> {
    if !inst.net().is_bpp() {
        return Err(ClosureError::NotBpp);
    }
    let inputs = BoundInputs::of(inst);
    let base = BigUint::from(inputs.l) * &inputs.m;
    let value = &inputs.m0_tokens * base.pow(inputs.transitions as u32 + 1);
    Ok(BoundReport {
        kind: BoundKind::BppCutoff,
        value: BoundValue::Exact(value),
        formula: format!(
            "{}·({}·{})^({}+1)",
            inputs.m0_tokens, inputs.l, inputs.m, inputs.transitions
        ),
        inputs,
    })
}

/// The threshold the BPP constructions actually use.
///
/// It instantiates the same formula with every factor raised so that it
/// stays positive: a token source is added when some transition has an
/// empty preset, and `|P|·m` is at least 2.
pub fn effective_cutoff(inst: &NetInstance) -> BigUint {
    let net = inst.net();
    let source = usize::from(net.transitions().iter().any(|t| t.pre_place().is_none()));
    let tokens = inst.initial().token_count() + BigUint::from(source);
    let base = (BigUint::from(net.num_places() + source) * net.max_weight()).max(BigUint::from(2u32));
    let c = tokens * base.pow(net.num_transitions() as u32 + 1);
    c.max(BigUint::one())
}

/// How far an automaton is from the exact closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Accepts a subset of the closure.
    UnderApprox,
    /// Stopped by a stabilization heuristic; a subset of the closure.
    Heuristic,
    /// Built from an explored prefix within budget; a subset of the closure.
    Partial,
}

impl Exactness {
    pub fn is_exact(self) -> bool {
        self == Exactness::Exact
    }
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exactness::Exact => "exact",
            Exactness::UnderApprox => "under-approximation",
            Exactness::Heuristic => "heuristic",
            Exactness::Partial => "partial",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ClosureAutomaton {
    pub fsa: Fsa,
    pub exactness: Exactness,
    /// The run-length bound used, for k-bounded constructions.
    pub k: Option<usize>,
    pub note: String,
}

/// The automaton for `L_k`: states are reachable `(marking, steps)` pairs.
pub fn k_bounded_fsa(inst: &NetInstance, k: usize, budget: &Budget) -> Result<Fsa, ClosureError> {
    let net = inst.net();
    let alphabet = net.alphabet().clone();
    let mut index: HashMap<(Marking, usize), usize> = HashMap::new();
    let mut states: Vec<(Marking, usize)> = vec![(inst.initial().clone(), 0)];
    index.insert((inst.initial().clone(), 0), 0);
    let mut transitions = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let (m, step) = states[s].clone();
        if step == k {
            continue;
        }
        for t in 0..net.num_transitions() {
            if !net.is_enabled(&m, t) {
                continue;
            }
            let key = (net.fire_unchecked(&m, t), step + 1);
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    if states.len() >= budget.nodes {
                        return Err(ClosureError::BudgetExceeded {
                            what: "k-bounded states",
                            explored: states.len(),
                        });
                    }
                    states.push(key.clone());
                    index.insert(key, states.len() - 1);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            let label = net
                .transition(t)
                .label
                .as_ref()
                .map(|l| alphabet.index_of(l).expect("declared letter"));
            transitions.push((s, label, id));
        }
    }
    let finals: Vec<usize> = (0..states.len()).filter(|&s| inst.is_covering(&states[s].0)).collect();
    Ok(Fsa::new(alphabet, states.len(), 0, finals, transitions).expect("constructed automaton is well formed"))
}

/// How [`uc_fsa`] chooses the run-length bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UcMode {
    /// `k = f(ℓ)`, refused when the bound exceeds `ceiling`.
    Certified {
        ceiling: BigUint,
    },
    UserK(usize),
    /// Doubles `k` until the language is unchanged over `window` consecutive
    /// increments or `max_k` is passed.
    Adaptive {
        window: usize,
        max_k: usize,
    },
}

impl UcMode {
    pub fn certified() -> Self {
        UcMode::Certified {
            ceiling: BigUint::from(1_000_000u32),
        }
    }

    pub fn adaptive() -> Self {
        UcMode::Adaptive {
            window: 3,
            max_k: 1 << 16,
        }
    }
}

/// `saturate_up(k_bounded_fsa(k))` for a `k` chosen by `mode`.
pub fn uc_fsa(inst: &NetInstance, mode: &UcMode, budget: &Budget) -> Result<ClosureAutomaton, ClosureError> {
    let report = rackoff_bound(inst);
    match mode {
        UcMode::Certified { ceiling } => {
            let k = match report.value.exact() {
                Some(v) if v <= ceiling => v.to_usize().expect("below ceiling"),
                _ => return Err(ClosureError::BoundTooLarge(Box::new(report))),
            };
            let fsa = k_bounded_fsa(inst, k, budget)?.saturate_up();
            Ok(ClosureAutomaton {
                fsa,
                exactness: Exactness::Exact,
                k: Some(k),
                note: format!("certified with {report}"),
            })
        }
        UcMode::UserK(k) => {
            let fsa = k_bounded_fsa(inst, *k, budget)?.saturate_up();
            let exact = matches!(report.value.exact(), Some(v) if BigUint::from(*k) >= *v);
            Ok(ClosureAutomaton {
                fsa,
                exactness: if exact {
                    Exactness::Exact
                } else {
                    Exactness::UnderApprox
                },
                k: Some(*k),
                note: format!("k = {k}, certified bound {report}"),
            })
        }
        UcMode::Adaptive { window, max_k } => uc_adaptive(inst, *window, *max_k, budget),
    }
}

fn uc_adaptive(
    inst: &NetInstance,
    window: usize,
    max_k: usize,
    budget: &Budget,
) -> Result<ClosureAutomaton, ClosureError> {
    let mut k = 1usize;
    let mut last: Option<(usize, Fsa)> = None;
    let mut stable = 0usize;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let current = match k_bounded_fsa(inst, k, budget) {
            Ok(a) => a.saturate_up(),
            Err(e) => {
                return match last {
                    Some((lk, fsa)) => Ok(ClosureAutomaton {
                        fsa,
                        exactness: Exactness::Partial,
                        k: Some(lk),
                        note: format!("stopped at k = {k}: {e}"),
                    }),
                    None => Err(e),
                }
            }
        };
        if let Some((_, prev)) = &last {
            if are_equivalent(prev, &current).expect("same alphabet").holds {
                stable += 1;
            } else {
                stable = 0;
            }
        }
        if stable >= window || k >= max_k || iterations >= budget.steps {
            let exactness = if stable >= window {
                Exactness::Heuristic
            } else {
                Exactness::Partial
            };
            return Ok(ClosureAutomaton {
                fsa: current,
                exactness,
                k: Some(k),
                note: format!("adaptive: language unchanged over {stable} doubling(s) up to k = {k}"),
            });
        }
        last = Some((k, current));
        k = k.saturating_mul(2);
    }
}

/// Exact `uc(L)` of a BPP instance, using the short-run bound as `k`.
pub fn uc_fsa_bpp(inst: &NetInstance, budget: &Budget) -> Result<ClosureAutomaton, ClosureError> {
    let report = bpp_short_bound(inst)?;
    let k = report
        .value
        .exact()
        .and_then(|v| v.to_usize())
        .ok_or(ClosureError::BudgetExceeded {
            what: "run-length bound",
            explored: usize::MAX,
        })?;
    let fsa = k_bounded_fsa(inst, k, budget)?.saturate_up();
    Ok(ClosureAutomaton {
        fsa,
        exactness: Exactness::Exact,
        k: Some(k),
        note: format!("{report}"),
    })
}

/// Exact `dc(L)` of a BPP instance: the state space with token counts above
/// the cutoff replaced by ω, each transition present with its label and as ε.
pub fn dc_fsa_bpp(inst: &NetInstance, budget: &Budget) -> Result<ClosureAutomaton, ClosureError> {
    if !inst.net().is_bpp() {
        return Err(ClosureError::NotBpp);
    }
    let c = effective_cutoff(inst);
    let net = inst.net();
    let alphabet = net.alphabet().clone();
    let root = OmegaMarking::from(inst.initial()).cut(&c);
    let mut states = vec![root.clone()];
    let mut index = HashMap::from([(root, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    let mut transitions = Vec::new();
    while let Some(s) = queue.pop_front() {
        for t in 0..net.num_transitions() {
            if !states[s].is_enabled(net, t) {
                continue;
            }
            let succ = states[s].fire(net, t).cut(&c);
            let id = match index.get(&succ) {
                Some(&id) => id,
                None => {
                    if states.len() >= budget.nodes {
                        return Err(ClosureError::BudgetExceeded {
                            what: "abstract states",
                            explored: states.len(),
                        });
                    }
                    states.push(succ.clone());
                    index.insert(succ, states.len() - 1);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            if let Some(l) = &net.transition(t).label {
                transitions.push((s, alphabet.index_of(l), id));
            }
            transitions.push((s, None, id));
        }
    }
    let finals: Vec<usize> = (0..states.len())
        .filter(|&s| states[s].covers_marking(inst.final_marking()))
        .collect();
    let fsa = Fsa::new(alphabet, states.len(), 0, finals, transitions).expect("constructed automaton is well formed");
    let formula_c = bpp_cutoff(inst)?;
    Ok(ClosureAutomaton {
        fsa,
        exactness: Exactness::Exact,
        k: None,
        note: format!("{formula_c}; threshold used {c}"),
    })
}

/// `dc(L)` from the Karp–Miller graph: nodes are states, edges carry their
/// label and an ε-copy, and nodes covering `M_f` accept.
pub fn dc_fsa_pn(inst: &NetInstance, budget: &Budget) -> ClosureAutomaton {
    let net = inst.net();
    let alphabet = net.alphabet().clone();
    let g = km_graph_partial(net, inst.initial(), budget);
    let mut transitions = Vec::new();
    for &(s, t, d) in &g.edges {
        if let Some(l) = &net.transition(t).label {
            transitions.push((s, alphabet.index_of(l), d));
        }
        transitions.push((s, None, d));
    }
    let finals: Vec<usize> = (0..g.nodes.len())
        .filter(|&s| g.nodes[s].covers_marking(inst.final_marking()))
        .collect();
    let fsa =
        Fsa::new(alphabet, g.nodes.len(), g.root, finals, transitions).expect("constructed automaton is well formed");
    ClosureAutomaton {
        fsa,
        exactness: if g.complete {
            Exactness::Exact
        } else {
            Exactness::Partial
        },
        k: None,
        note: format!("Karp–Miller graph with {} nodes", g.nodes.len()),
    }
}

/// Direction of a closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// The default closure construction: exact BPP constructions when the net
/// is BPP, otherwise certified (if the bound is small) or adaptive for `up`
/// and the Karp–Miller construction for `down`.
pub fn closure_fsa(inst: &NetInstance, dir: Direction, budget: &Budget) -> Result<ClosureAutomaton, ClosureError> {
    match dir {
        Direction::Up if inst.net().is_bpp() => uc_fsa_bpp(inst, budget),
        Direction::Up => match uc_fsa(inst, &UcMode::certified(), budget) {
            Err(ClosureError::BoundTooLarge(_)) => uc_fsa(inst, &UcMode::adaptive(), budget),
            other => other,
        },
        Direction::Down if inst.net().is_bpp() => dc_fsa_bpp(inst, budget),
        Direction::Down => Ok(dc_fsa_pn(inst, budget)),
    }
}
