//! Existential Presburger arithmetic over natural-valued variables.
//!
//! Terms are built from integer constants, variables, `+`, `−` and scaling
//! by constants; atoms compare terms. Formulas are decided by an exact
//! branch-and-bound search over linear relaxations ([`solve`]), exported as
//! SMT-LIB ([`smtlib_export`]), or handed to an external solver.

mod bpp;
mod simplex;
mod smtlib;
mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

pub use bpp::{bpp_reach_formula, place_var, transition_var, BppReachFormula};
pub use smtlib::{parse_model, parse_script, run_external_solver, smtlib_export, ExternalSolver, ParsedScript};
pub use solver::{solve, solve_bounded, solve_exhaustive, SolveResult, SolverConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresburgerError {
    #[error("variable {0} has no value")]
    UnboundVariable(String),
    #[error("unsupported formula: {0}")]
    Unsupported(String),
    #[error("the net is not a BPP net")]
    NotBpp,
    #[error("solver gave up after {0} search nodes")]
    ResourceLimit(usize),
    #[error("SMT-LIB parse error: {0}")]
    Parse(String),
    #[error("external solver failed: {0}")]
    External(String),
}

/// Values of natural-valued variables.
pub type Assignment = BTreeMap<String, BigUint>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(BigInt),
    Var(String),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    /// Multiplication by a constant, shorthand for repeated addition.
    Scale(BigInt, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(v: impl Into<BigInt>) -> Term {
        Term::Const(v.into())
    }

    pub fn zero() -> Term {
        Term::Const(BigInt::zero())
    }

    pub fn scale(k: impl Into<BigInt>, t: Term) -> Term {
        Term::Scale(k.into(), Box::new(t))
    }

    /// Sum of terms; `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Term>) -> Term {
        let mut it = terms.into_iter();
        match it.next() {
            None => Term::zero(),
            Some(first) => it.fold(first, |acc, t| acc + t),
        }
    }

    pub fn eval(&self, asg: &Assignment) -> Result<BigInt, PresburgerError> {
        Ok(match self {
            Term::Const(c) => c.clone(),
            Term::Var(v) => asg
                .get(v)
                .map(|x| BigInt::from(x.clone()))
                .ok_or_else(|| PresburgerError::UnboundVariable(v.clone()))?,
            Term::Add(a, b) => a.eval(asg)? + b.eval(asg)?,
            Term::Sub(a, b) => a.eval(asg)? - b.eval(asg)?,
            Term::Scale(k, t) => k * t.eval(asg)?,
        })
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Scale(_, t) => t.collect_vars(out),
        }
    }

    fn substitute(&self, asg: &Assignment, bound: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(v) if !bound.contains(v) => match asg.get(v) {
                Some(x) => Term::Const(BigInt::from(x.clone())),
                None => self.clone(),
            },
            Term::Const(_) | Term::Var(_) => self.clone(),
            Term::Add(a, b) => Term::Add(Box::new(a.substitute(asg, bound)), Box::new(b.substitute(asg, bound))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.substitute(asg, bound)), Box::new(b.substitute(asg, bound))),
            Term::Scale(k, t) => Term::Scale(k.clone(), Box::new(t.substitute(asg, bound))),
        }
    }

    pub(crate) fn rename(&self, map: &BTreeMap<String, String>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::Const(_) => self.clone(),
            Term::Add(a, b) => Term::Add(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Term::Scale(k, t) => Term::Scale(k.clone(), Box::new(t.rename(map))),
        }
    }
}

impl std::ops::Add for Term {
    type Output = Term;
    fn add(self, rhs: Term) -> Term {
        Term::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Term {
    type Output = Term;
    fn sub(self, rhs: Term) -> Term {
        Term::Sub(Box::new(self), Box::new(rhs))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Sub(a, b) => write!(f, "({a} - {b})"),
            Term::Scale(k, t) => write!(f, "{k}·{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Le(Term, Term),
    Eq(Term, Term),
    Not(Box<Formula>),
    Or(Vec<Formula>),
    And(Vec<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Le(a, b)
    }

    /// `a < b`, i.e. `a + 1 ≤ b`.
    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Le(a + Term::int(1), b)
    }

    pub fn ge(a: Term, b: Term) -> Formula {
        Formula::Le(b, a)
    }

    pub fn gt(a: Term, b: Term) -> Formula {
        Formula::lt(b, a)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn exists(vars: impl IntoIterator<Item = String>, body: Formula) -> Formula {
        Formula::Exists(vars.into_iter().collect(), Box::new(body))
    }

    /// Variables not bound by a quantifier.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &BTreeSet<String>, out: &mut BTreeSet<String>) {
        let add_term = |t: &Term, out: &mut BTreeSet<String>| {
            let mut vs = BTreeSet::new();
            t.collect_vars(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Le(a, b) | Formula::Eq(a, b) => {
                add_term(a, out);
                add_term(b, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::Or(fs) | Formula::And(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(vs, body) => {
                let mut inner = bound.clone();
                inner.extend(vs.iter().cloned());
                body.collect_free(&inner, out);
            }
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Exists(..) => true,
            Formula::Not(f) => f.has_quantifier(),
            Formula::Or(fs) | Formula::And(fs) => fs.iter().any(|f| f.has_quantifier()),
            _ => false,
        }
    }

    /// Replaces free variables by the values in `asg`.
    pub fn substitute(&self, asg: &Assignment) -> Formula {
        self.substitute_with(asg, &BTreeSet::new())
    }

    fn substitute_with(&self, asg: &Assignment, bound: &BTreeSet<String>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Le(a, b) => Formula::Le(a.substitute(asg, bound), b.substitute(asg, bound)),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(asg, bound), b.substitute(asg, bound)),
            Formula::Not(f) => Formula::not(f.substitute_with(asg, bound)),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute_with(asg, bound)).collect()),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute_with(asg, bound)).collect()),
            Formula::Exists(vs, body) => {
                let mut inner = bound.clone();
                inner.extend(vs.iter().cloned());
                Formula::Exists(vs.clone(), Box::new(body.substitute_with(asg, &inner)))
            }
        }
    }

    pub(crate) fn rename(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Le(a, b) => Formula::Le(a.rename(map), b.rename(map)),
            Formula::Eq(a, b) => Formula::Eq(a.rename(map), b.rename(map)),
            Formula::Not(f) => Formula::not(f.rename(map)),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename(map)).collect()),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename(map)).collect()),
            Formula::Exists(vs, body) => {
                let mut inner = map.clone();
                for v in vs {
                    inner.remove(v);
                }
                Formula::Exists(vs.clone(), Box::new(body.rename(&inner)))
            }
        }
    }

    /// Number of nodes, for diagnostics.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Le(..) | Formula::Eq(..) => 1,
            Formula::Not(f) | Formula::Exists(_, f) => 1 + f.size(),
            Formula::Or(fs) | Formula::And(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], op: &str, empty: &str| -> fmt::Result {
            if fs.is_empty() {
                return f.write_str(empty);
            }
            f.write_str("(")?;
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Le(a, b) => write!(f, "{a} ≤ {b}"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(x) => write!(f, "¬{x}"),
            Formula::Or(fs) => join(f, fs, "∨", "false"),
            Formula::And(fs) => join(f, fs, "∧", "true"),
            Formula::Exists(vs, body) => write!(f, "∃{}: {body}", vs.join(",")),
        }
    }
}

/// Truth of `φ` under `asg`. Quantified subformulas are decided by the
/// solver after substituting the assignment.
pub fn evaluate(phi: &Formula, asg: &Assignment) -> Result<bool, PresburgerError> {
    match phi {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Le(a, b) => Ok(a.eval(asg)? <= b.eval(asg)?),
        Formula::Eq(a, b) => Ok(a.eval(asg)? == b.eval(asg)?),
        Formula::Not(f) => Ok(!evaluate(f, asg)?),
        Formula::Or(fs) => {
            for f in fs {
                if evaluate(f, asg)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::And(fs) => {
            for f in fs {
                if !evaluate(f, asg)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(..) => {
            let closed = phi.substitute(asg);
            if let Some(v) = closed.free_vars().into_iter().next() {
                return Err(PresburgerError::UnboundVariable(v));
            }
            match solve(&closed, &SolverConfig::default())? {
                SolveResult::Sat(_) => Ok(true),
                SolveResult::Unsat => Ok(false),
                SolveResult::Unknown(n) => Err(PresburgerError::ResourceLimit(n)),
            }
        }
    }
}
