//! Reachability sets of BPP nets as existential Presburger formulas.
//!
//! A marking `M` is reachable from `M0` in a BPP net exactly when some
//! transition count vector `x` solves the marking equation and every place
//! consumed by a transition of `x` is either initially marked or fed by a
//! used transition whose own pre-place lies strictly closer to the initial
//! marking. The "closer" relation is witnessed by natural-valued distance
//! variables, one per consumed place.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::{evaluate, Assignment, Formula, PresburgerError, Term};
use crate::net::{Marking, PetriNet};

/// Variable holding the token count of `place`.
pub fn place_var(place: &str) -> String {
    format!("m[{place}]")
}

/// Variable holding the number of firings of `transition`.
pub fn transition_var(transition: &str) -> String {
    format!("x[{transition}]")
}

fn distance_var(place: &str) -> String {
    format!("d[{place}]")
}

/// The reachability formula together with its variable naming.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BppReachFormula {
    /// `∃x ∃d: ψ(m, x, d)`; its free variables are the place variables.
    pub formula: Formula,
    /// The quantifier-free body, with transition and distance variables free.
    pub body: Formula,
    /// Place variables, in place order.
    pub place_vars: Vec<String>,
    /// Transition variables, in transition order.
    pub transition_vars: Vec<String>,
    /// Distance variables of the places consumed by some transition.
    pub distance_vars: Vec<String>,
}

impl BppReachFormula {
    /// Assignment of the place variables to the counts of `m`.
    pub fn assignment(&self, m: &Marking) -> Assignment {
        self.place_vars
            .iter()
            .cloned()
            .zip(m.counts().iter().cloned())
            .collect()
    }

    /// Decides whether `m` satisfies the formula.
    pub fn holds(&self, m: &Marking) -> Result<bool, PresburgerError> {
        evaluate(&self.formula, &self.assignment(m))
    }
}

fn big(v: &BigUint) -> BigInt {
    BigInt::from(v.clone())
}

/// Builds the reachability formula of a BPP net from `m0`.
pub fn bpp_reach_formula(net: &PetriNet, m0: &Marking) -> Result<BppReachFormula, PresburgerError> {
    if !net.is_bpp() {
        return Err(PresburgerError::NotBpp);
    }
    let place_vars: Vec<String> = net.places().iter().map(|p| place_var(p)).collect();
    let transition_vars: Vec<String> = net.transitions().iter().map(|t| transition_var(&t.name)).collect();
    let x = |t: usize| Term::var(transition_vars[t].clone());
    let mut parts = Vec::new();
    // marking equation
    for (p, pv) in place_vars.iter().enumerate() {
        let mut effect = Vec::new();
        for (t, tr) in net.transitions().iter().enumerate() {
            let delta = big(&tr.post[p]) - big(&tr.pre[p]);
            if !delta.is_zero() {
                effect.push(Term::scale(delta, x(t)));
            }
        }
        let rhs = Term::sum(std::iter::once(Term::Const(big(m0.get(p)))).chain(effect));
        parts.push(Formula::eq(Term::var(pv.clone()), rhs));
    }
    // support constraints for consumed places
    let consumed: BTreeSet<usize> = net.transitions().iter().filter_map(|t| t.pre_place()).collect();
    let mut distance_vars = Vec::new();
    for &p in &consumed {
        distance_vars.push(distance_var(&net.places()[p]));
    }
    let d = |p: usize| Term::var(distance_var(&net.places()[p]));
    for &p in &consumed {
        if !m0.get(p).is_zero() {
            continue;
        }
        let consumers: Vec<Term> = net
            .transitions()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.pre_place() == Some(p))
            .map(|(t, _)| x(t))
            .collect();
        let mut options = vec![Formula::eq(Term::sum(consumers), Term::zero())];
        for (t, tr) in net.transitions().iter().enumerate() {
            if tr.post[p].is_zero() {
                continue;
            }
            let used = Formula::le(Term::int(1), x(t));
            match tr.pre_place() {
                None => options.push(used),
                Some(q) if q == p => {}
                Some(q) => options.push(Formula::and([used, Formula::lt(d(q), d(p))])),
            }
        }
        parts.push(Formula::or(options));
    }
    let body = Formula::and(parts);
    let bound: Vec<String> = transition_vars.iter().chain(distance_vars.iter()).cloned().collect();
    let formula = if bound.is_empty() {
        body.clone()
    } else {
        Formula::exists(bound, body.clone())
    };
    Ok(BppReachFormula {
        formula,
        body,
        place_vars,
        transition_vars,
        distance_vars,
    })
}
