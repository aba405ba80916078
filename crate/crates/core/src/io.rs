//! Text formats for nets, automata, simple regular expressions and words,
//! plus Graphviz export.
//!
//! A net document is line oriented. Blank lines and lines starting with `#`
//! are ignored.
//!
//! ```text
//! alphabet a b c
//! place run temp stop
//! trans rt_help label a pre run:1 post run:1,temp:1
//! trans rt_b label b pre run:1,temp:1 post stop:1
//! init run:1
//! final stop:1
//! ```
//!
//! `alphabet` and `place` take one or more names and may repeat. A
//! transition without `label` is silent. `init` and `final` default to the
//! zero marking. Weights are arbitrary-precision decimals.
//!
//! An automaton document lists its states, initial state, accepting states
//! and edges; `eps` marks a silent edge.
//!
//! ```text
//! alphabet a b
//! states 3
//! initial 0
//! final 2
//! edge 0 a 1
//! edge 1 b 2
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::fsa::Fsa;
use crate::net::{Alphabet, Letter, Marking, NetInstance, PetriNet, Transition, Word};
use crate::sre::{Atom, Product, Sre};

/// A syntax or consistency error, with the 1-based line it occurred on.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: expected {expected}")]
pub struct ParseError {
    pub line: usize,
    pub expected: String,
}

fn err(line: usize, expected: impl Into<String>) -> ParseError {
    ParseError {
        line,
        expected: expected.into(),
    }
}

/// Silent label keyword in the automaton format and in expressions.
const EPS: &str = "eps";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split_whitespace().collect()))
        }
    })
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.contains([':', ',', '#']) && !s.chars().any(char::is_whitespace)
}

fn parse_weights(line: usize, s: &str, places: &[String]) -> Result<Vec<BigUint>, ParseError> {
    let mut out = vec![BigUint::zero(); places.len()];
    for entry in s.split(',') {
        let (p, w) = entry
            .split_once(':')
            .ok_or_else(|| err(line, format!("PLACE:WEIGHT, found `{entry}`")))?;
        let idx = places
            .iter()
            .position(|q| q == p)
            .ok_or_else(|| err(line, format!("a declared place, found `{p}`")))?;
        let w: BigUint = w
            .parse()
            .map_err(|_| err(line, format!("a decimal weight, found `{w}`")))?;
        out[idx] += w;
    }
    Ok(out)
}

/// Parses a net document.
pub fn parse_net(text: &str) -> Result<NetInstance, ParseError> {
    let mut letters: Vec<Letter> = Vec::new();
    let mut places: Vec<String> = Vec::new();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut init: Option<(usize, Vec<BigUint>)> = None;
    let mut fin: Option<(usize, Vec<BigUint>)> = None;
    let mut last_line = 0;
    for (line, toks) in content_lines(text) {
        last_line = line;
        match toks[0] {
            "alphabet" => {
                for &t in &toks[1..] {
                    if !is_name(t) || t == EPS {
                        return Err(err(line, format!("a letter name, found `{t}`")));
                    }
                    let l = Letter::new(t);
                    if !letters.contains(&l) {
                        letters.push(l);
                    }
                }
            }
            "place" => {
                if toks.len() < 2 {
                    return Err(err(line, "at least one place name"));
                }
                for &t in &toks[1..] {
                    if !is_name(t) {
                        return Err(err(line, format!("a place name, found `{t}`")));
                    }
                    if places.iter().any(|p| p == t) {
                        return Err(err(line, format!("a new place name, `{t}` is already declared")));
                    }
                    places.push(t.to_string());
                }
            }
            "trans" => {
                let name = toks.get(1).ok_or_else(|| err(line, "a transition name"))?;
                if !is_name(name) {
                    return Err(err(line, format!("a transition name, found `{name}`")));
                }
                if transitions.iter().any(|t| t.name == *name) {
                    return Err(err(
                        line,
                        format!("a new transition name, `{name}` is already declared"),
                    ));
                }
                let mut label = None;
                let mut pre = vec![BigUint::zero(); places.len()];
                let mut post = vec![BigUint::zero(); places.len()];
                let mut i = 2;
                while i < toks.len() {
                    let arg = toks
                        .get(i + 1)
                        .ok_or_else(|| err(line, format!("an argument after `{}`", toks[i])))?;
                    match toks[i] {
                        "label" => {
                            if !is_name(arg) || *arg == EPS {
                                return Err(err(line, format!("a letter name, found `{arg}`")));
                            }
                            let l = Letter::new(arg);
                            if !letters.contains(&l) {
                                letters.push(l.clone());
                            }
                            label = Some(l);
                        }
                        "pre" => pre = parse_weights(line, arg, &places)?,
                        "post" => post = parse_weights(line, arg, &places)?,
                        other => return Err(err(line, format!("`label`, `pre` or `post`, found `{other}`"))),
                    }
                    i += 2;
                }
                transitions.push(Transition {
                    name: name.to_string(),
                    label,
                    pre,
                    post,
                });
            }
            kw @ ("init" | "final") => {
                let counts = match toks.len() {
                    1 => vec![BigUint::zero(); places.len()],
                    2 => parse_weights(line, toks[1], &places)?,
                    _ => return Err(err(line, "a single comma-separated marking")),
                };
                let slot = if kw == "init" { &mut init } else { &mut fin };
                if slot.is_some() {
                    return Err(err(line, format!("a single `{kw}` line")));
                }
                *slot = Some((line, counts));
            }
            other => {
                return Err(err(
                    line,
                    format!("`alphabet`, `place`, `trans`, `init` or `final`, found `{other}`"),
                ))
            }
        }
    }
    // markings given before later place declarations are padded
    let pad = |m: Option<(usize, Vec<BigUint>)>| {
        let mut v = m.map(|(_, v)| v).unwrap_or_default();
        v.resize(places.len(), BigUint::zero());
        Marking::from_vec(v)
    };
    for t in &mut transitions {
        t.pre.resize(places.len(), BigUint::zero());
        t.post.resize(places.len(), BigUint::zero());
    }
    let m0 = pad(init);
    let mf = pad(fin);
    let net = PetriNet::new(Alphabet::new(letters), places, transitions).map_err(|e| err(last_line, e.to_string()))?;
    NetInstance::new(net, m0, mf).map_err(|e| err(last_line, e.to_string()))
}

fn weights(places: &[String], counts: &[BigUint]) -> String {
    places
        .iter()
        .zip(counts)
        .filter(|(_, c)| !c.is_zero())
        .map(|(p, c)| format!("{p}:{c}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Prints a net document; [`parse_net`] reads it back unchanged.
pub fn print_net(inst: &NetInstance) -> String {
    let net = inst.net();
    let mut out = String::new();
    if !net.alphabet().is_empty() {
        let names: Vec<&str> = net.alphabet().letters().iter().map(|l| l.as_str()).collect();
        writeln!(out, "alphabet {}", names.join(" ")).unwrap();
    }
    for p in net.places() {
        writeln!(out, "place {p}").unwrap();
    }
    for t in net.transitions() {
        write!(out, "trans {}", t.name).unwrap();
        if let Some(l) = &t.label {
            write!(out, " label {l}").unwrap();
        }
        let pre = weights(net.places(), &t.pre);
        if !pre.is_empty() {
            write!(out, " pre {pre}").unwrap();
        }
        let post = weights(net.places(), &t.post);
        if !post.is_empty() {
            write!(out, " post {post}").unwrap();
        }
        out.push('\n');
    }
    for (kw, m) in [("init", inst.initial()), ("final", inst.final_marking())] {
        let w = weights(net.places(), m.counts());
        if w.is_empty() {
            writeln!(out, "{kw}").unwrap();
        } else {
            writeln!(out, "{kw} {w}").unwrap();
        }
    }
    out
}

fn parse_index(line: usize, s: &str, what: &str) -> Result<usize, ParseError> {
    s.parse().map_err(|_| err(line, format!("{what}, found `{s}`")))
}

/// Parses an automaton document.
pub fn parse_fsa(text: &str) -> Result<Fsa, ParseError> {
    let mut letters: Vec<Letter> = Vec::new();
    let mut states: Option<usize> = None;
    let mut initial = 0;
    let mut finals = Vec::new();
    let mut edges: Vec<(usize, usize, Option<Letter>, usize)> = Vec::new();
    let mut last_line = 0;
    for (line, toks) in content_lines(text) {
        last_line = line;
        match toks[0] {
            "alphabet" => {
                for &t in &toks[1..] {
                    if !is_name(t) || t == EPS {
                        return Err(err(line, format!("a letter name, found `{t}`")));
                    }
                    let l = Letter::new(t);
                    if !letters.contains(&l) {
                        letters.push(l);
                    }
                }
            }
            "states" if toks.len() == 2 => states = Some(parse_index(line, toks[1], "a state count")?),
            "initial" if toks.len() == 2 => initial = parse_index(line, toks[1], "a state")?,
            "final" => {
                for &t in &toks[1..] {
                    finals.push(parse_index(line, t, "a state")?);
                }
            }
            "edge" if toks.len() == 4 => {
                let p = parse_index(line, toks[1], "a source state")?;
                let q = parse_index(line, toks[3], "a target state")?;
                let label = if toks[2] == EPS {
                    None
                } else if is_name(toks[2]) {
                    let l = Letter::new(toks[2]);
                    if !letters.contains(&l) {
                        letters.push(l.clone());
                    }
                    Some(l)
                } else {
                    return Err(err(line, format!("a letter or `eps`, found `{}`", toks[2])));
                };
                edges.push((line, p, label, q));
            }
            "states" | "initial" => return Err(err(line, format!("`{} N`", toks[0]))),
            "edge" => return Err(err(line, "`edge FROM LETTER TO`")),
            other => {
                return Err(err(
                    line,
                    format!("`alphabet`, `states`, `initial`, `final` or `edge`, found `{other}`"),
                ))
            }
        }
    }
    let alphabet = Alphabet::new(letters);
    let n = states.ok_or_else(|| err(last_line.max(1), "a `states` line"))?;
    let mut ts = Vec::new();
    for (line, p, l, q) in edges {
        if p >= n || q >= n {
            return Err(err(line, format!("states below {n}")));
        }
        ts.push((p, l.map(|l| alphabet.index_of(&l).expect("letter registered")), q));
    }
    if initial >= n || finals.iter().any(|&f| f >= n) {
        return Err(err(last_line, format!("states below {n}")));
    }
    Fsa::new(alphabet, n, initial, finals, ts).map_err(|e| err(last_line, e.to_string()))
}

/// Prints an automaton document; [`parse_fsa`] reads it back unchanged.
pub fn print_fsa(fsa: &Fsa) -> String {
    let mut out = String::new();
    if !fsa.alphabet().is_empty() {
        let names: Vec<&str> = fsa.alphabet().letters().iter().map(|l| l.as_str()).collect();
        writeln!(out, "alphabet {}", names.join(" ")).unwrap();
    }
    writeln!(out, "states {}", fsa.num_states()).unwrap();
    writeln!(out, "initial {}", fsa.initial()).unwrap();
    let finals: Vec<String> = fsa.finals().iter().map(|f| f.to_string()).collect();
    if finals.is_empty() {
        writeln!(out, "final").unwrap();
    } else {
        writeln!(out, "final {}", finals.join(" ")).unwrap();
    }
    for &(p, l, q) in fsa.transitions() {
        let label = l
            .map(|l| fsa.letter(l).as_str().to_string())
            .unwrap_or_else(|| EPS.to_string());
        writeln!(out, "edge {p} {label} {q}").unwrap();
    }
    out
}

/// Parses a word: a comma-separated list of letters when it contains a
/// comma, otherwise one letter per character. `eps`, `ε` and the empty
/// string denote the empty word.
pub fn parse_word(s: &str) -> Word {
    let s = s.trim();
    if s.is_empty() || s == EPS || s == "ε" {
        return Word::empty();
    }
    if s.contains(',') {
        s.split(',').map(|l| Letter::new(l.trim())).collect()
    } else {
        Word::from_chars(s)
    }
}

struct SreParser<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl SreParser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn error(&self, what: &str) -> ParseError {
        let rest: String = self.chars[self.pos.min(self.chars.len())..].iter().collect();
        let found = if rest.is_empty() {
            "end of input".to_string()
        } else {
            format!("`{rest}`")
        };
        err(
            1,
            format!("{what} at column {} of `{}`, found {found}", self.pos + 1, self.text),
        )
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_alphanumeric() || *c == '_' || *c == '\'')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("a letter"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn letter(&mut self) -> Result<Letter, ParseError> {
        let save = self.pos;
        let id = self.ident()?;
        if id == EPS {
            self.pos = save;
            return Err(self.error("a letter other than `eps`"));
        }
        Ok(Letter::new(&id))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let a = self.letter()?;
                self.expect('+')?;
                let save = self.pos;
                if self.ident()? != EPS {
                    self.pos = save;
                    return Err(self.error("`eps`"));
                }
                self.expect(')')?;
                Ok(Atom::Optional(a))
            }
            Some('{') => {
                self.pos += 1;
                let mut set = BTreeSet::new();
                if self.peek() != Some('}') {
                    set.insert(self.letter()?);
                    while self.peek() == Some(',') {
                        self.pos += 1;
                        set.insert(self.letter()?);
                    }
                }
                self.expect('}')?;
                self.expect('*')?;
                Ok(Atom::Star(set))
            }
            Some('@') => {
                self.pos += 1;
                self.expect('*')?;
                Ok(Atom::Star(BTreeSet::new()))
            }
            _ => Ok(Atom::Letter(self.letter()?)),
        }
    }

    fn product(&mut self) -> Result<Product, ParseError> {
        let mut atoms = vec![self.atom()?];
        while self.peek() == Some('.') {
            self.pos += 1;
            atoms.push(self.atom()?);
        }
        Ok(Product(atoms))
    }

    fn sre(&mut self) -> Result<Sre, ParseError> {
        let mut products = vec![self.product()?];
        while self.peek() == Some('+') {
            self.pos += 1;
            products.push(self.product()?);
        }
        if self.peek().is_some() {
            return Err(self.error("`.`, `+` or end of input"));
        }
        Ok(Sre(products))
    }
}

/// Parses a simple regular expression such as `(a+eps).{a,b}* + c.@*`.
///
/// Atoms are a letter, `(a+eps)`, `{a,b,...}*` and `@*` (the empty
/// iteration, denoting the empty word). Atoms are joined by `.` into
/// products, and products by `+`.
pub fn parse_sre(text: &str) -> Result<Sre, ParseError> {
    SreParser {
        chars: text.chars().collect(),
        pos: 0,
        text,
    }
    .sre()
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering of a net with its initial marking; places are
/// circles and transitions boxes.
pub fn net_to_dot(inst: &NetInstance) -> String {
    let net = inst.net();
    let mut out = String::from("digraph net {\n  rankdir=LR;\n");
    for (p, name) in net.places().iter().enumerate() {
        let tokens = inst.initial().get(p);
        let label = if tokens.is_zero() {
            name.clone()
        } else {
            format!("{name}\\n{tokens}")
        };
        writeln!(
            out,
            "  {} [shape=circle, label={}];",
            dot_id(&format!("p:{name}")),
            dot_id(&label)
        )
        .unwrap();
    }
    for t in net.transitions() {
        let label = match &t.label {
            Some(l) => format!("{}\\n{l}", t.name),
            None => format!("{}\\nε", t.name),
        };
        writeln!(
            out,
            "  {} [shape=box, label={}];",
            dot_id(&format!("t:{}", t.name)),
            dot_id(&label)
        )
        .unwrap();
        for (p, name) in net.places().iter().enumerate() {
            for (w, from, to) in [
                (&t.pre[p], format!("p:{name}"), format!("t:{}", t.name)),
                (&t.post[p], format!("t:{}", t.name), format!("p:{name}")),
            ] {
                if w.is_zero() {
                    continue;
                }
                write!(out, "  {} -> {}", dot_id(&from), dot_id(&to)).unwrap();
                if *w != BigUint::from(1u32) {
                    write!(out, " [label={}]", dot_id(&w.to_string())).unwrap();
                }
                out.push_str(";\n");
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Graphviz rendering of an automaton; accepting states are doubled.
pub fn fsa_to_dot(fsa: &Fsa) -> String {
    let mut out = String::from("digraph fsa {\n  rankdir=LR;\n  start [shape=point];\n");
    for q in 0..fsa.num_states() {
        let shape = if fsa.finals().contains(&q) {
            "doublecircle"
        } else {
            "circle"
        };
        writeln!(out, "  q{q} [shape={shape}];").unwrap();
    }
    writeln!(out, "  start -> q{};", fsa.initial()).unwrap();
    for &(p, l, q) in fsa.transitions() {
        let label = l
            .map(|l| fsa.letter(l).as_str().to_string())
            .unwrap_or_else(|| "ε".to_string());
        writeln!(out, "  q{p} -> q{q} [label={}];", dot_id(&label)).unwrap();
    }
    out.push_str("}\n");
    out
}
