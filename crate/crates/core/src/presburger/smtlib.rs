//! SMT-LIB 2 export, a parser for the emitted subset, and external solvers.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;

use super::solver::prenex;
use super::{evaluate, Assignment, Formula, PresburgerError, SolveResult, Term};

/// Environment variable naming the external solver command.
pub const SOLVER_ENV: &str = "PNCLOSURE_SOLVER";

fn symbol(name: &str) -> String {
    format!("|{}|", name.replace(['|', '\\'], "_"))
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Const(c) if c.is_negative() => {
            let _ = write!(out, "(- {})", -c);
        }
        Term::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Term::Var(v) => out.push_str(&symbol(v)),
        Term::Add(a, b) | Term::Sub(a, b) => {
            out.push_str(if matches!(t, Term::Add(..)) { "(+ " } else { "(- " });
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Term::Scale(k, t) => {
            out.push_str("(* ");
            write_term(out, &Term::Const(k.clone()));
            out.push(' ');
            write_term(out, t);
            out.push(')');
        }
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    let list = |out: &mut String, op: &str, fs: &[Formula], empty: &str| match fs.len() {
        0 => out.push_str(empty),
        1 => write_formula(out, &fs[0]),
        _ => {
            let _ = write!(out, "({op}");
            for g in fs {
                out.push(' ');
                write_formula(out, g);
            }
            out.push(')');
        }
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Le(a, b) | Formula::Eq(a, b) => {
            out.push_str(if matches!(f, Formula::Le(..)) { "(<= " } else { "(= " });
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(out, g);
            out.push(')');
        }
        Formula::And(fs) => list(out, "and", fs, "true"),
        Formula::Or(fs) => list(out, "or", fs, "false"),
        Formula::Exists(vs, body) => {
            out.push_str("(exists (");
            for v in vs {
                let _ = write!(out, "({} Int)", symbol(v));
            }
            out.push_str(") (and");
            for v in vs {
                let _ = write!(out, " (>= {} 0)", symbol(v));
            }
            out.push(' ');
            write_formula(out, body);
            out.push_str("))");
        }
    }
}

/// Renders `phi` as an SMT-LIB script. Positively occurring quantifiers are
/// flattened into top-level declarations (logic `QF_LIA`); formulas with a
/// negated quantifier keep it inline under logic `LIA`.
pub fn smtlib_export(phi: &Formula) -> String {
    let (body, vars, logic) = match prenex(phi) {
        Ok((m, vars)) => (m, vars, "QF_LIA"),
        Err(_) => (phi.clone(), phi.free_vars().into_iter().collect(), "LIA"),
    };
    let mut out = String::new();
    let _ = writeln!(out, "(set-option :produce-models true)");
    let _ = writeln!(out, "(set-logic {logic})");
    for v in &vars {
        let _ = writeln!(out, "(declare-fun {} () Int)", symbol(v));
    }
    for v in &vars {
        let _ = writeln!(out, "(assert (>= {} 0))", symbol(v));
    }
    out.push_str("(assert ");
    write_formula(&mut out, &body);
    out.push_str(")\n(check-sat)\n(get-model)\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Result<Vec<String>, PresburgerError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                tokens.push(c.to_string());
                chars.next();
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '|' => {
                chars.next();
                let mut s = String::from("|");
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(c) => s.push(c),
                        None => return Err(PresburgerError::Parse("unterminated quoted symbol".into())),
                    }
                }
                tokens.push(s);
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err(PresburgerError::Parse("unterminated string".into())),
                    }
                }
                tokens.push(s);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                tokens.push(s);
            }
        }
    }
    Ok(tokens)
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, PresburgerError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for tok in tokens {
        match tok.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().expect("stack is never empty");
                stack
                    .last_mut()
                    .ok_or_else(|| PresburgerError::Parse("unbalanced ')'".into()))?
                    .push(Sexp::List(done));
            }
            _ => stack.last_mut().expect("stack is never empty").push(Sexp::Atom(tok)),
        }
        if stack.is_empty() {
            return Err(PresburgerError::Parse("unbalanced ')'".into()));
        }
    }
    if stack.len() != 1 {
        return Err(PresburgerError::Parse("unbalanced '('".into()));
    }
    Ok(stack.pop().expect("one level left"))
}

fn symbol_name(s: &str) -> String {
    s.strip_prefix('|').unwrap_or(s).to_string()
}

fn bad(what: &str, e: &Sexp) -> PresburgerError {
    PresburgerError::Parse(format!("{what}: {e:?}"))
}

fn parse_term(e: &Sexp) -> Result<Term, PresburgerError> {
    match e {
        Sexp::Atom(a) => {
            if let Ok(n) = a.parse::<BigInt>() {
                Ok(Term::Const(n))
            } else {
                Ok(Term::var(symbol_name(a)))
            }
        }
        Sexp::List(items) => {
            let Some(Sexp::Atom(op)) = items.first() else {
                return Err(bad("term", e));
            };
            let args = items[1..].iter().map(parse_term).collect::<Result<Vec<_>, _>>()?;
            match (op.as_str(), args.len()) {
                ("+", _) => Ok(Term::sum(args)),
                ("-", 1) => Ok(match &args[0] {
                    Term::Const(k) => Term::Const(-k),
                    t => Term::zero() - t.clone(),
                }),
                ("-", n) if n >= 2 => Ok(args[1..].iter().cloned().fold(args[0].clone(), |acc, t| acc - t)),
                ("*", 2) => match (&args[0], &args[1]) {
                    (Term::Const(k), t) | (t, Term::Const(k)) => Ok(Term::scale(k.clone(), t.clone())),
                    _ => Err(PresburgerError::Unsupported("non-linear multiplication".into())),
                },
                _ => Err(bad("term", e)),
            }
        }
    }
}

fn parse_formula(e: &Sexp) -> Result<Formula, PresburgerError> {
    match e {
        Sexp::Atom(a) if a == "true" => Ok(Formula::True),
        Sexp::Atom(a) if a == "false" => Ok(Formula::False),
        Sexp::Atom(_) => Err(bad("formula", e)),
        Sexp::List(items) => {
            let Some(Sexp::Atom(op)) = items.first() else {
                return Err(bad("formula", e));
            };
            let rest = &items[1..];
            let two_terms = || -> Result<(Term, Term), PresburgerError> {
                if rest.len() != 2 {
                    return Err(bad("binary relation", e));
                }
                Ok((parse_term(&rest[0])?, parse_term(&rest[1])?))
            };
            let subs = || rest.iter().map(parse_formula).collect::<Result<Vec<_>, _>>();
            match op.as_str() {
                "<=" => two_terms().map(|(a, b)| Formula::le(a, b)),
                ">=" => two_terms().map(|(a, b)| Formula::ge(a, b)),
                "<" => two_terms().map(|(a, b)| Formula::lt(a, b)),
                ">" => two_terms().map(|(a, b)| Formula::gt(a, b)),
                "=" => two_terms().map(|(a, b)| Formula::eq(a, b)),
                "not" if rest.len() == 1 => Ok(Formula::not(parse_formula(&rest[0])?)),
                "and" => Ok(Formula::And(subs()?)),
                "or" => Ok(Formula::Or(subs()?)),
                "=>" if rest.len() == 2 => Ok(Formula::implies(parse_formula(&rest[0])?, parse_formula(&rest[1])?)),
                "exists" if rest.len() == 2 => {
                    let Sexp::List(binders) = &rest[0] else {
                        return Err(bad("binder list", &rest[0]));
                    };
                    let mut vars = Vec::new();
                    for b in binders {
                        match b {
                            Sexp::List(pair) if pair.len() == 2 => match &pair[0] {
                                Sexp::Atom(v) => vars.push(symbol_name(v)),
                                other => return Err(bad("binder", other)),
                            },
                            other => return Err(bad("binder", other)),
                        }
                    }
                    Ok(Formula::exists(vars, parse_formula(&rest[1])?))
                }
                _ => Err(bad("formula", e)),
            }
        }
    }
}

/// The declarations and assertions of a script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedScript {
    pub logic: Option<String>,
    pub declared: Vec<String>,
    pub assertions: Vec<Formula>,
}

impl ParsedScript {
    /// Conjunction of all assertions.
    pub fn formula(&self) -> Formula {
        Formula::And(self.assertions.clone())
    }
}

/// Parses the linear-arithmetic subset emitted by [`smtlib_export`].
pub fn parse_script(text: &str) -> Result<ParsedScript, PresburgerError> {
    let mut script = ParsedScript {
        logic: None,
        declared: Vec::new(),
        assertions: Vec::new(),
    };
    for cmd in parse_sexps(text)? {
        let Sexp::List(items) = &cmd else {
            return Err(bad("command", &cmd));
        };
        let Some(Sexp::Atom(head)) = items.first() else {
            return Err(bad("command", &cmd));
        };
        match (head.as_str(), &items[1..]) {
            ("set-logic", [Sexp::Atom(l)]) => script.logic = Some(l.clone()),
            ("declare-fun", [Sexp::Atom(v), Sexp::List(args), Sexp::Atom(sort)])
                if args.is_empty() && sort == "Int" =>
            {
                script.declared.push(symbol_name(v))
            }
            ("declare-const", [Sexp::Atom(v), Sexp::Atom(sort)]) if sort == "Int" => {
                script.declared.push(symbol_name(v))
            }
            ("assert", [f]) => script.assertions.push(parse_formula(f)?),
            ("set-option" | "set-info" | "check-sat" | "get-model" | "exit", _) => {}
            _ => return Err(bad("unsupported command", &cmd)),
        }
    }
    Ok(script)
}

fn collect_defines(e: &Sexp, out: &mut Assignment) -> Result<(), PresburgerError> {
    let Sexp::List(items) = e else {
        return Ok(());
    };
    if let [Sexp::Atom(head), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort), value] = items.as_slice() {
        if head == "define-fun" && args.is_empty() && sort == "Int" {
            let v = match parse_term(value)? {
                Term::Const(c) => c,
                t => t.eval(&Assignment::new())?,
            };
            let v = BigUint::try_from(v).map_err(|_| PresburgerError::Parse(format!("negative value for {name}")))?;
            out.insert(symbol_name(name), v);
            return Ok(());
        }
    }
    for item in items {
        collect_defines(item, out)?;
    }
    Ok(())
}

/// Extracts `define-fun` entries of integer constants from solver output.
pub fn parse_model(text: &str) -> Result<Assignment, PresburgerError> {
    let mut out = Assignment::new();
    for e in parse_sexps(text)? {
        collect_defines(&e, &mut out)?;
    }
    Ok(out)
}

/// An SMT solver reading a script on standard input, e.g. `z3 -in`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalSolver {
    /// Splits a command line at whitespace.
    pub fn from_command(command: &str) -> Option<ExternalSolver> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(ExternalSolver {
            program,
            args: parts.collect(),
        })
    }

    /// The solver configured through the environment, if any.
    pub fn from_env() -> Option<ExternalSolver> {
        std::env::var(SOLVER_ENV)
            .ok()
            .and_then(|c| ExternalSolver::from_command(&c))
    }
}

/// Runs `solver` on the export of `phi`. A reported model is completed with
/// zeros for missing variables and checked with [`evaluate`] before it is
/// returned.
pub fn run_external_solver(solver: &ExternalSolver, phi: &Formula) -> Result<SolveResult, PresburgerError> {
    let (matrix, vars) = prenex(phi)?;
    let script = smtlib_export(phi);
    let mut child = Command::new(&solver.program)
        .args(&solver.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| PresburgerError::External(format!("{}: {e}", solver.program)))?;
    child
        .stdin
        .take()
        .expect("stdin is piped")
        .write_all(script.as_bytes())
        .map_err(|e| PresburgerError::External(e.to_string()))?;
    let output = child
        .wait_with_output()
        .map_err(|e| PresburgerError::External(e.to_string()))?;
    let text = String::from_utf8_lossy(&output.stdout);
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Ok(SolveResult::Unsat),
        Some("unknown") => Ok(SolveResult::Unknown(0)),
        Some("sat") => {
            let rest: Vec<&str> = lines.collect();
            let model = parse_model(&rest.join("\n"))?;
            let asg: Assignment = vars
                .iter()
                .map(|v| (v.clone(), model.get(v).cloned().unwrap_or_default()))
                .collect();
            if !evaluate(&matrix, &asg)? {
                return Err(PresburgerError::External("model does not satisfy the formula".into()));
            }
            Ok(SolveResult::Sat(asg))
        }
        other => Err(PresburgerError::External(format!(
            "unexpected answer {:?}; stderr: {}",
            other.unwrap_or(""),
            String::from_utf8_lossy(&output.stderr).trim()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn simple_export() {
        let s = smtlib_export(&Formula::le(v("x"), Term::int(1)));
        assert!(s.contains("(declare-fun |x| () Int)"));
        assert!(s.contains("(assert (>= |x| 0))"));
        assert!(s.contains("(assert (<= |x| 1))"));
        assert!(s.trim_end().ends_with("(check-sat)\n(get-model)"));
        assert!(s.contains("QF_LIA"));
    }

    #[test]
    fn nested_binders_are_flattened() {
        let phi = Formula::and([
            Formula::eq(v("x"), Term::int(1)),
            Formula::exists(["x".to_string()], Formula::le(v("x"), Term::int(-4) + v("y"))),
        ]);
        let s = smtlib_export(&phi);
        assert!(!s.contains("exists"));
        assert!(s.contains("(declare-fun |x#1| () Int)"));
        assert!(s.contains("(- 4)"));
    }

    #[test]
    fn negated_quantifier_keeps_lia() {
        let phi = Formula::not(Formula::exists(["y".to_string()], Formula::lt(v("x"), v("y"))));
        let s = smtlib_export(&phi);
        assert!(s.contains("(set-logic LIA)"));
        let back = parse_script(&s).unwrap();
        assert_eq!(back.declared, vec!["x"]);
    }

    #[test]
    fn round_trip_agrees_with_evaluate() {
        let phi = Formula::and([
            Formula::or([
                Formula::eq(Term::scale(3, v("x")), v("y") - Term::int(2)),
                Formula::not(Formula::le(v("y"), v("x"))),
            ]),
            Formula::le(v("x") + v("y"), Term::int(6)),
        ]);
        let back = parse_script(&smtlib_export(&phi)).unwrap().formula();
        for x in 0..5u32 {
            for y in 0..8u32 {
                let a: Assignment = [("x".to_string(), BigUint::from(x)), ("y".to_string(), BigUint::from(y))].into();
                assert_eq!(evaluate(&phi, &a).unwrap(), evaluate(&back, &a).unwrap(), "x={x} y={y}");
            }
        }
    }

    #[test]
    fn negative_coefficients_round_trip() {
        let phi = Formula::le(Term::scale(-2, v("x")) + Term::int(-3), Term::zero());
        let text = smtlib_export(&phi);
        assert!(text.contains("(* (- 2) |x|)"), "{text}");
        let back = parse_script(&text).unwrap().formula();
        let a: Assignment = [("x".to_string(), BigUint::from(1u32))].into();
        assert_eq!(evaluate(&back, &a).unwrap(), evaluate(&phi, &a).unwrap());
    }

    #[test]
    fn model_parsing() {
        let text = "(\n  (define-fun |m[p]| () Int 3)\n  (define-fun y () Int (- 0))\n)";
        let m = parse_model(text).unwrap();
        assert_eq!(m["m[p]"], BigUint::from(3u32));
        assert_eq!(m["y"], BigUint::from(0u32));
        assert!(parse_model("((define-fun z () Int (- 2)))").is_err());
    }

    #[test]
    fn missing_solver_binary_is_reported() {
        let s = ExternalSolver::from_command("/nonexistent/solver -in").unwrap();
        let r = run_external_solver(&s, &Formula::True);
        assert!(matches!(r, Err(PresburgerError::External(_))));
    }
}
