//! Exact satisfiability search for existential Presburger formulas.
//!
//! Quantifiers in positive positions are lifted to the top, the matrix is
//! put in negation normal form over linear atoms `lin ≤ 0` and `lin = 0`,
//! and a depth-first search alternates LP relaxations with case splits on
//! violated disjunctions and branch-and-bound on fractional variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::simplex::{minimize_sum_with_cut, LpResult, Row, Sense};
use super::{evaluate, Assignment, Formula, PresburgerError, Term};

/// Limits for [`solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Maximum number of LP relaxations solved before giving up.
    pub node_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { node_limit: 50_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// A model over the free variables and the (possibly renamed)
    /// existentially bound variables.
    Sat(Assignment),
    Unsat,
    /// The search stopped after the given number of nodes.
    Unknown(usize),
}

/// Decides satisfiability of `phi` over the naturals.
pub fn solve(phi: &Formula, cfg: &SolverConfig) -> Result<SolveResult, PresburgerError> {
    let (matrix, vars) = prenex(phi)?;
    let problem = Problem::new(&matrix, vars, None)?;
    problem.run(cfg.node_limit)
}

/// Satisfiability with every variable additionally bounded by `bound`.
/// The search space is finite, so this always terminates with an answer.
pub fn solve_bounded(phi: &Formula, bound: &BigUint) -> Result<Option<Assignment>, PresburgerError> {
    let (matrix, vars) = prenex(phi)?;
    let problem = Problem::new(&matrix, vars, Some(bound))?;
    match problem.run(usize::MAX)? {
        SolveResult::Sat(a) => Ok(Some(a)),
        SolveResult::Unsat => Ok(None),
        SolveResult::Unknown(n) => Err(PresburgerError::ResourceLimit(n)),
    }
}

/// Enumerates every assignment with values in `0..=bound` and returns the
/// first model in lexicographic order. Exponential; meant for small checks.
pub fn solve_exhaustive(phi: &Formula, bound: u64) -> Result<Option<Assignment>, PresburgerError> {
    let (matrix, vars) = prenex(phi)?;
    let mut values = vec![0u64; vars.len()];
    loop {
        let asg: Assignment = vars
            .iter()
            .cloned()
            .zip(values.iter().map(|&v| BigUint::from(v)))
            .collect();
        if evaluate(&matrix, &asg)? {
            return Ok(Some(asg));
        }
        // odometer increment, last variable fastest
        let mut i = vars.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            if values[i] < bound {
                values[i] += 1;
                break;
            }
            values[i] = 0;
        }
    }
}

/// Lifts positively occurring quantifiers. Returns the quantifier-free
/// matrix and all variables (free first, then bound) in a stable order.
pub(crate) fn prenex(phi: &Formula) -> Result<(Formula, Vec<String>), PresburgerError> {
    let free = phi.free_vars();
    let mut used: BTreeSet<String> = free.clone();
    let mut bound = Vec::new();
    let matrix = lift(phi, true, &BTreeMap::new(), &mut used, &mut bound)?;
    let mut vars: Vec<String> = free.into_iter().collect();
    vars.extend(bound);
    Ok((matrix, vars))
}

fn lift(
    f: &Formula,
    positive: bool,
    renames: &BTreeMap<String, String>,
    used: &mut BTreeSet<String>,
    bound: &mut Vec<String>,
) -> Result<Formula, PresburgerError> {
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Le(..) | Formula::Eq(..) => f.rename(renames),
        Formula::Not(g) => Formula::not(lift(g, !positive, renames, used, bound)?),
        Formula::And(fs) => Formula::And(
            fs.iter()
                .map(|g| lift(g, positive, renames, used, bound))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(fs) => Formula::Or(
            fs.iter()
                .map(|g| lift(g, positive, renames, used, bound))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Exists(vs, body) => {
            if !positive {
                return Err(PresburgerError::Unsupported(
                    "universal quantification (negated existential)".into(),
                ));
            }
            let mut inner = renames.clone();
            for v in vs {
                let mut name = v.clone();
                let mut k = 1;
                while used.contains(&name) {
                    name = format!("{v}#{k}");
                    k += 1;
                }
                used.insert(name.clone());
                bound.push(name.clone());
                inner.insert(v.clone(), name);
            }
            lift(body, positive, &inner, used, bound)?
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct Lin {
    coeffs: BTreeMap<usize, BigInt>,
    c: BigInt,
}

impl Lin {
    fn of_term(t: &Term, idx: &HashMap<String, usize>) -> Result<Lin, PresburgerError> {
        Ok(match t {
            Term::Const(c) => Lin {
                coeffs: BTreeMap::new(),
                c: c.clone(),
            },
            Term::Var(v) => {
                let j = *idx.get(v).ok_or_else(|| PresburgerError::UnboundVariable(v.clone()))?;
                let mut coeffs = BTreeMap::new();
                coeffs.insert(j, BigInt::one());
                Lin {
                    coeffs,
                    c: BigInt::zero(),
                }
            }
            Term::Add(a, b) => Lin::of_term(a, idx)?.plus(&Lin::of_term(b, idx)?, &BigInt::one()),
            Term::Sub(a, b) => Lin::of_term(a, idx)?.plus(&Lin::of_term(b, idx)?, &-BigInt::one()),
            Term::Scale(k, t) => Lin::of_term(t, idx)?.scaled(k),
        })
    }

    /// `self + k·other`.
    fn plus(mut self, other: &Lin, k: &BigInt) -> Lin {
        for (j, a) in &other.coeffs {
            let e = self.coeffs.entry(*j).or_default();
            *e += k * a;
            if e.is_zero() {
                self.coeffs.remove(j);
            }
        }
        self.c += k * &other.c;
        self
    }

    fn scaled(mut self, k: &BigInt) -> Lin {
        if k.is_zero() {
            return Lin::default();
        }
        for a in self.coeffs.values_mut() {
            *a *= k;
        }
        self.c *= k;
        self
    }

    fn eval(&self, x: &[BigRational]) -> BigRational {
        let mut s = BigRational::from_integer(self.c.clone());
        for (j, a) in &self.coeffs {
            s += &x[*j] * BigRational::from_integer(a.clone());
        }
        s
    }

    fn eval_int(&self, x: &[BigInt]) -> BigInt {
        let mut s = self.c.clone();
        for (j, a) in &self.coeffs {
            s += &x[*j] * a;
        }
        s
    }

    /// Replaces `x_j` by `e`.
    fn substitute(mut self, j: usize, e: &Lin) -> Lin {
        match self.coeffs.remove(&j) {
            None => self,
            Some(k) => self.plus(e, &k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Atom {
    /// `lin ≤ 0`
    Le(Lin),
    /// `lin = 0`
    Eq(Lin),
}

impl Atom {
    fn holds(&self, x: &[BigRational]) -> bool {
        match self {
            Atom::Le(l) => !l.eval(x).is_positive(),
            Atom::Eq(l) => l.eval(x).is_zero(),
        }
    }

    fn to_row(&self) -> Row {
        let (l, sense) = match self {
            Atom::Le(l) => (l, Sense::Le),
            Atom::Eq(l) => (l, Sense::Eq),
        };
        Row {
            coeffs: l.coeffs.iter().map(|(j, a)| (*j, a.clone())).collect(),
            sense,
            rhs: -&l.c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Nnf {
    True,
    False,
    Atom(Atom),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

/// Normalizes an atom: constant atoms are decided, coefficients are divided
/// by their gcd and inequalities are tightened.
fn atom(a: Atom) -> Nnf {
    let (l, is_eq) = match a {
        Atom::Le(l) => (l, false),
        Atom::Eq(l) => (l, true),
    };
    if l.coeffs.is_empty() {
        let ok = if is_eq { l.c.is_zero() } else { !l.c.is_positive() };
        return if ok { Nnf::True } else { Nnf::False };
    }
    let g = l.coeffs.values().fold(BigInt::zero(), |g, a| g.gcd(a));
    if is_eq {
        if !(&l.c % &g).is_zero() {
            return Nnf::False;
        }
        let coeffs = l.coeffs.into_iter().map(|(j, a)| (j, a / &g)).collect();
        return Nnf::Atom(Atom::Eq(Lin { coeffs, c: l.c / &g }));
    }
    // Σ a x ≤ −c  becomes  Σ (a/g) x ≤ ⌊−c/g⌋
    let rhs = (-&l.c).div_floor(&g);
    let coeffs = l.coeffs.into_iter().map(|(j, a)| (j, a / &g)).collect();
    Nnf::Atom(Atom::Le(Lin { coeffs, c: -rhs }))
}

fn and(parts: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Nnf::True => {}
            Nnf::False => return Nnf::False,
            Nnf::And(qs) => out.extend(qs),
            p => out.push(p),
        }
    }
    match out.len() {
        0 => Nnf::True,
        1 => out.pop().expect("one element"),
        _ => Nnf::And(out),
    }
}

fn or(parts: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Nnf::False => {}
            Nnf::True => return Nnf::True,
            Nnf::Or(qs) => out.extend(qs),
            p => out.push(p),
        }
    }
    match out.len() {
        0 => Nnf::False,
        1 => out.pop().expect("one element"),
        _ => Nnf::Or(out),
    }
}

fn to_nnf(f: &Formula, neg: bool, idx: &HashMap<String, usize>) -> Result<Nnf, PresburgerError> {
    Ok(match f {
        Formula::True => {
            if neg {
                Nnf::False
            } else {
                Nnf::True
            }
        }
        Formula::False => {
            if neg {
                Nnf::True
            } else {
                Nnf::False
            }
        }
        Formula::Le(a, b) => {
            let l = Lin::of_term(a, idx)?.plus(&Lin::of_term(b, idx)?, &-BigInt::one());
            if neg {
                // a − b ≥ 1
                let mut m = l.scaled(&-BigInt::one());
                m.c += 1;
                atom(Atom::Le(m))
            } else {
                atom(Atom::Le(l))
            }
        }
        Formula::Eq(a, b) => {
            let l = Lin::of_term(a, idx)?.plus(&Lin::of_term(b, idx)?, &-BigInt::one());
            if neg {
                let mut below = l.clone();
                below.c += 1;
                let mut above = l.scaled(&-BigInt::one());
                above.c += 1;
                or(vec![atom(Atom::Le(below)), atom(Atom::Le(above))])
            } else {
                atom(Atom::Eq(l))
            }
        }
        Formula::Not(g) => to_nnf(g, !neg, idx)?,
        Formula::And(fs) | Formula::Or(fs) => {
            let parts = fs.iter().map(|g| to_nnf(g, neg, idx)).collect::<Result<Vec<_>, _>>()?;
            if matches!(f, Formula::And(_)) != neg {
                and(parts)
            } else {
                or(parts)
            }
        }
        Formula::Exists(..) => return Err(PresburgerError::Unsupported("nested quantifier".into())),
    })
}

impl Nnf {
    fn holds(&self, x: &[BigRational]) -> bool {
        match self {
            Nnf::True => true,
            Nnf::False => false,
            Nnf::Atom(a) => a.holds(x),
            Nnf::And(fs) => fs.iter().all(|f| f.holds(x)),
            Nnf::Or(fs) => fs.iter().any(|f| f.holds(x)),
        }
    }

    fn substitute(self, j: usize, e: &Lin) -> Nnf {
        match self {
            Nnf::True | Nnf::False => self,
            Nnf::Atom(Atom::Le(l)) => atom(Atom::Le(l.substitute(j, e))),
            Nnf::Atom(Atom::Eq(l)) => atom(Atom::Eq(l.substitute(j, e))),
            Nnf::And(fs) => and(fs.into_iter().map(|f| f.substitute(j, e)).collect()),
            Nnf::Or(fs) => or(fs.into_iter().map(|f| f.substitute(j, e)).collect()),
        }
    }
}

/// A search node: hard linear constraints and disjunctions still to be
/// satisfied.
#[derive(Clone, Debug)]
struct Node {
    atoms: Vec<Atom>,
    pending: Vec<Nnf>,
}

impl Node {
    /// Adds a constraint; returns `false` on a syntactic contradiction.
    fn add(&mut self, f: Nnf) -> bool {
        match f {
            Nnf::True => true,
            Nnf::False => false,
            Nnf::Atom(a) => {
                self.atoms.push(a);
                true
            }
            Nnf::And(fs) => fs.into_iter().all(|g| self.add(g)),
            or @ Nnf::Or(_) => {
                self.pending.push(or);
                true
            }
        }
    }
}

struct Problem {
    vars: Vec<String>,
    /// `None` when the formula is trivially false.
    root: Option<Node>,
    /// Eliminated variables with their defining expression, in order.
    eliminated: Vec<(usize, Lin)>,
}

/// Cutting-plane rounds tried at a node before branching on a variable.
const CUT_ROUNDS: usize = 16;

fn lp_point(n: usize, atoms: &[Atom]) -> Option<Vec<BigRational>> {
    lp_point_with_cut(n, atoms).map(|(x, _)| x)
}

/// The relaxation's optimum together with a cut separating it from the
/// integer hull when it is fractional.
fn lp_point_with_cut(n: usize, atoms: &[Atom]) -> Option<(Vec<BigRational>, Option<Nnf>)> {
    let rows: Vec<Row> = atoms.iter().map(Atom::to_row).collect();
    match minimize_sum_with_cut(n, &rows) {
        (LpResult::Infeasible, _) => None,
        (LpResult::Optimal(x), cut) => {
            let cut = cut.map(|r| {
                let coeffs = r.coeffs.into_iter().filter(|(_, a)| !a.is_zero()).collect();
                atom(Atom::Le(Lin { coeffs, c: -r.rhs }))
            });
            Some((x, cut))
        }
    }
}

impl Problem {
    fn new(matrix: &Formula, vars: Vec<String>, bound: Option<&BigUint>) -> Result<Problem, PresburgerError> {
        let idx: HashMap<String, usize> = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut f = to_nnf(matrix, false, &idx)?;
        if let Some(b) = bound {
            let mut parts = vec![f];
            for j in 0..vars.len() {
                let mut l = Lin::default();
                l.coeffs.insert(j, BigInt::one());
                l.c = -BigInt::from(b.clone());
                parts.push(atom(Atom::Le(l)));
            }
            f = and(parts);
        }
        let mut eliminated = Vec::new();
        // substitute away equalities with a unit coefficient
        loop {
            let mut node = Node {
                atoms: Vec::new(),
                pending: Vec::new(),
            };
            if !node.add(f.clone()) {
                return Ok(Problem {
                    vars,
                    root: None,
                    eliminated,
                });
            }
            let pick = node.atoms.iter().find_map(|a| match a {
                Atom::Eq(l) => l
                    .coeffs
                    .iter()
                    .find(|(_, c)| c.abs().is_one())
                    .map(|(j, c)| (*j, c.clone(), l.clone())),
                Atom::Le(_) => None,
            });
            let Some((j, c, l)) = pick else {
                return Ok(Problem {
                    vars,
                    root: Some(node),
                    eliminated,
                });
            };
            // c·x_j + rest = 0  gives  x_j = −c·rest
            let mut rest = l;
            rest.coeffs.remove(&j);
            let e = rest.scaled(&-c);
            let nonneg = atom(Atom::Le(e.clone().scaled(&-BigInt::one())));
            f = and(vec![f.substitute(j, &e), nonneg]);
            eliminated.push((j, e));
        }
    }

    fn run(self, node_limit: usize) -> Result<SolveResult, PresburgerError> {
        let Some(root) = self.root.clone() else {
            return Ok(SolveResult::Unsat);
        };
        let n = self.vars.len();
        let mut stack = vec![root];
        let mut explored = 0usize;
        'nodes: while let Some(mut node) = stack.pop() {
            let mut rounds = 0;
            // propagation and cuts may tighten the node and re-solve it
            'solve: loop {
                if explored >= node_limit {
                    return Ok(SolveResult::Unknown(explored));
                }
                explored += 1;
                let Some((x, cut)) = lp_point_with_cut(n, &node.atoms) else {
                    continue 'nodes;
                };
                let violated: Vec<usize> = (0..node.pending.len())
                    .filter(|&i| !node.pending[i].holds(&x))
                    .collect();
                if violated.is_empty() {
                    if rounds < CUT_ROUNDS {
                        if let Some(cut) = cut {
                            rounds += 1;
                            if !node.add(cut) {
                                continue 'nodes;
                            }
                            continue 'solve;
                        }
                    }
                    if let Some(j) = (0..n).find(|&j| !x[j].is_integer()) {
                        let lo = x[j].floor().to_integer();
                        let hi = &lo + 1;
                        let mut up = Lin::default();
                        up.coeffs.insert(j, -BigInt::one());
                        up.c = hi;
                        let mut down = Lin::default();
                        down.coeffs.insert(j, BigInt::one());
                        down.c = -lo;
                        for extra in [up, down] {
                            let mut child = node.clone();
                            child.atoms.push(Atom::Le(extra));
                            stack.push(child);
                        }
                        continue 'nodes;
                    }
                    return Ok(SolveResult::Sat(self.model(&x)));
                }
                // keep, for every violated disjunction, the disjuncts that
                // are feasible together with the hard constraints
                let mut best: Option<(usize, Vec<Node>)> = None;
                for &i in &violated {
                    let Nnf::Or(disjuncts) = &node.pending[i] else {
                        unreachable!("pending entries are disjunctions");
                    };
                    let mut base = node.clone();
                    base.pending.remove(i);
                    let mut children = Vec::new();
                    for d in disjuncts {
                        let mut child = base.clone();
                        if !child.add(d.clone()) {
                            continue;
                        }
                        if child.atoms.len() > base.atoms.len() {
                            explored += 1;
                            if lp_point(n, &child.atoms).is_none() {
                                continue;
                            }
                        }
                        children.push(child);
                    }
                    if children.len() <= 1 {
                        match children.pop() {
                            None => continue 'nodes,
                            Some(only) => {
                                node = only;
                                continue 'solve;
                            }
                        }
                    }
                    if best.as_ref().is_none_or(|(k, _)| children.len() < *k) {
                        best = Some((children.len(), children));
                    }
                }
                let (_, children) = best.expect("some violated disjunction");
                stack.extend(children.into_iter().rev());
                continue 'nodes;
            }
        }
        Ok(SolveResult::Unsat)
    }

    fn model(&self, x: &[BigRational]) -> Assignment {
        let mut vals: Vec<BigInt> = x.iter().map(|v| v.to_integer()).collect();
        for (j, e) in self.eliminated.iter().rev() {
            vals[*j] = e.eval_int(&vals);
        }
        self.vars
            .iter()
            .zip(vals)
            .map(|(v, x)| (v.clone(), x.to_biguint().expect("non-negative by construction")))
            .collect()
    }
}
