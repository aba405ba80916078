//! Command-line driver for the closure and inclusion procedures.
//!
//! Every command that analyses a net reads a net document from `--net` or
//! from standard input. Exit status 0 means holds/yes, 1 fails/no,
//! 2 unknown, 3 an error, and 64 a usage error.

use std::fmt::Display;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pnclosure::closures::{
    bpp_cutoff, bpp_short_bound, closure_fsa, dc_fsa_bpp, dc_fsa_pn, k_bounded_fsa, rackoff_bound, uc_fsa,
    ClosureAutomaton, Direction, Exactness, UcMode,
};
use pnclosure::generators::FamilyParams;
use pnclosure::inclusion::{
    sre_in_dc_bpp, sre_in_dc_pn, sre_in_uc_bpp, sre_in_uc_pn, Answer, InclusionOptions, Verdict, Witness,
};
use pnclosure::io::{fsa_to_dot, net_to_dot, parse_fsa, parse_net, parse_sre, parse_word, print_fsa, print_net};
use pnclosure::net::NetInstance;
use pnclosure::presburger::{bpp_reach_formula, place_var, smtlib_export, ExternalSolver, Formula, Term};
use pnclosure::reach::{coverable, km_graph_partial, member, simultaneously_unbounded, MemberMode};
use pnclosure::traces::{is_closed, regular_included_in_lang, ClosedAnswer};
use pnclosure::Budget;

const EXIT_HOLDS: u8 = 0;
const EXIT_FAILS: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_ERROR: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "pnclosure",
    version,
    about = "Upward and downward closures of Petri net languages"
)]
struct Cli {
    /// Net document to analyse; standard input when absent.
    #[arg(long, global = true)]
    net: Option<PathBuf>,
    /// Limit on explored states, graph nodes or solver nodes.
    #[arg(long, global = true, default_value_t = Budget::default().nodes)]
    budget_nodes: usize,
    /// Limit on outer refinement iterations.
    #[arg(long, global = true, default_value_t = Budget::default().steps)]
    budget_steps: usize,
    /// External SMT solver command line reading SMT-LIB on standard input;
    /// defaults to the PNCLOSURE_SOLVER environment variable.
    #[arg(long, global = true)]
    solver: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dir {
    Up,
    Down,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::Up => Direction::Up,
            Dir::Down => Direction::Down,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundName {
    Rackoff,
    BppShort,
    BppCutoff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ClosureMode {
    Certified,
    Adaptive,
    K(usize),
}

fn parse_closure_mode(s: &str) -> Result<ClosureMode, String> {
    match s {
        "certified" => Ok(ClosureMode::Certified),
        "adaptive" => Ok(ClosureMode::Adaptive),
        _ => s
            .strip_prefix("k=")
            .and_then(|k| k.parse().ok())
            .map(ClosureMode::K)
            .ok_or_else(|| format!("expected certified, adaptive or k=K, found `{s}`")),
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ExportFormat {
    /// Graphviz rendering of the net.
    #[arg(long)]
    dot: bool,
    /// SMT-LIB coverability query of a BPP net.
    #[arg(long)]
    smt2: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the final marking is coverable.
    Cover,
    /// Decide membership of a word in the language or one of its closures.
    Member {
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(short = 'w', long = "word")]
        word: String,
    },
    /// Print an automaton for the upward or downward closure.
    Closure {
        #[arg(long, value_enum)]
        dir: Dir,
        #[arg(long, value_parser = parse_closure_mode)]
        mode: Option<ClosureMode>,
        /// Print Graphviz instead of an automaton document.
        #[arg(long)]
        dot: bool,
    },
    /// Decide inclusion of a simple regular expression in a closure.
    SreIn {
        #[arg(long, value_enum)]
        dir: Dir,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Write the SMT-LIB query here when the built-in solver gives up.
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Decide whether the language is upward or downward closed.
    IsClosed {
        #[arg(long, value_enum)]
        dir: Dir,
    },
    /// Decide inclusion of a regular language in the net language.
    RegIn {
        /// Automaton document.
        #[arg(short = 'a', long = "automaton")]
        automaton: PathBuf,
    },
    /// Decide whether the given places are simultaneously unbounded.
    Suppn {
        #[arg(short = 'X', long = "places", value_delimiter = ',')]
        places: Vec<String>,
    },
    /// Print the Karp–Miller graph.
    Km,
    /// Print a net of a built-in family: rackoff-ce, bpp-power N, ackermann N X.
    Gen { family: String, params: Vec<u64> },
    /// Print a run-length or cutoff bound.
    Bound {
        #[arg(value_enum)]
        name: BoundName,
    },
    /// Export the net.
    Export {
        #[command(flatten)]
        format: ExportFormat,
    },
}

enum Failure {
    Usage(String),
    Error(String),
}

fn error(e: impl Display) -> Failure {
    Failure::Error(e.to_string())
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

struct Context {
    net_path: Option<PathBuf>,
    budget: Budget,
    solver: Option<ExternalSolver>,
}

impl Context {
    fn instance(&self) -> Result<NetInstance, Failure> {
        let text = match &self.net_path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| error(format!("{}: {e}", p.display())))?,
            None => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(error)?;
                s
            }
        };
        parse_net(&text).map_err(error)
    }

    fn options(&self) -> InclusionOptions {
        InclusionOptions {
            external: self.solver.clone(),
            ..InclusionOptions::with_budget(self.budget)
        }
    }
}

fn verdict_code(b: bool) -> u8 {
    if b {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn report_verdict(v: &Verdict) -> u8 {
    println!("answer: {}", v.answer);
    if let Some(p) = &v.failing_product {
        println!("failing product: {p}");
    }
    match &v.witness {
        Some(Witness::Word(w)) => println!("witness word: {w}"),
        Some(Witness::Assignment(a)) => {
            println!("witness assignment:");
            for (k, val) in a {
                println!("  {k} = {val}");
            }
        }
        None => {}
    }
    if let Some(n) = &v.note {
        println!("note: {n}");
    }
    match v.answer {
        Answer::Holds => EXIT_HOLDS,
        Answer::Fails => EXIT_FAILS,
        Answer::Unknown => EXIT_UNKNOWN,
    }
}

fn closure_automaton(
    inst: &NetInstance,
    dir: Direction,
    mode: Option<ClosureMode>,
    budget: &Budget,
) -> Result<ClosureAutomaton, Failure> {
    let bpp = inst.net().is_bpp();
    let result = match (dir, mode) {
        (_, None) => closure_fsa(inst, dir, budget),
        (Direction::Up, Some(ClosureMode::Certified)) => uc_fsa(inst, &UcMode::certified(), budget),
        (Direction::Up, Some(ClosureMode::Adaptive)) => uc_fsa(inst, &UcMode::adaptive(), budget),
        (Direction::Up, Some(ClosureMode::K(k))) => uc_fsa(inst, &UcMode::UserK(k), budget),
        (Direction::Down, Some(ClosureMode::K(k))) => k_bounded_fsa(inst, k, budget).map(|f| ClosureAutomaton {
            fsa: f.saturate_down(),
            exactness: Exactness::UnderApprox,
            k: Some(k),
            note: format!("downward closure of runs of length at most {k}"),
        }),
        (Direction::Down, Some(_)) if bpp => dc_fsa_bpp(inst, budget),
        (Direction::Down, Some(_)) => Ok(dc_fsa_pn(inst, budget)),
    };
    result.map_err(error)
}

fn gen_family(family: &str, params: &[u64]) -> Result<FamilyParams, Failure> {
    let u32_param = |v: u64| u32::try_from(v).map_err(|_| usage(format!("parameter {v} is too large")));
    match (family, params) {
        ("rackoff-ce", []) => Ok(FamilyParams::RackoffCe),
        ("bpp-power", [n]) => Ok(FamilyParams::BppPower { n: u32_param(*n)? }),
        ("ackermann", [n, x]) => Ok(FamilyParams::Ackermann {
            n: u32_param(*n)?,
            x: *x,
        }),
        _ => Err(usage(format!(
            "unknown family or parameters `{family} {params:?}`; expected rackoff-ce, bpp-power N or ackermann N X"
        ))),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let ctx = Context {
        net_path: cli.net,
        budget: Budget {
            nodes: cli.budget_nodes,
            steps: cli.budget_steps,
        },
        solver: match &cli.solver {
            Some(s) => Some(ExternalSolver::from_command(s).ok_or_else(|| usage("empty --solver command"))?),
            None => ExternalSolver::from_env(),
        },
    };
    let budget = ctx.budget;
    match cli.command {
        Command::Gen { family, params } => {
            let inst = gen_family(&family, &params)?.generate().map_err(error)?;
            print!("{}", print_net(&inst));
            Ok(EXIT_HOLDS)
        }
        Command::Cover => {
            let inst = ctx.instance()?;
            let c = coverable(&inst, &budget).map_err(error)?;
            println!("coverable: {}", if c.coverable { "yes" } else { "no" });
            if let Some(run) = c.witness {
                let names: Vec<&str> = run.iter().map(|&t| inst.net().transition(t).name.as_str()).collect();
                println!("run: {}", names.join(" "));
            }
            Ok(verdict_code(c.coverable))
        }
        Command::Member { mode, word } => {
            let inst = ctx.instance()?;
            let w = parse_word(&word);
            let mode = match mode {
                Mode::Exact => MemberMode::Exact,
                Mode::Up => MemberMode::Up,
                Mode::Down => MemberMode::Down,
            };
            let m = member(&w, &inst, mode, &budget).map_err(error)?;
            println!("member: {}", if m { "yes" } else { "no" });
            Ok(verdict_code(m))
        }
        Command::Closure { dir, mode, dot } => {
            let inst = ctx.instance()?;
            let c = closure_automaton(&inst, dir.into(), mode, &budget)?;
            println!("# exactness: {}", c.exactness);
            if !c.note.is_empty() {
                println!("# {}", c.note);
            }
            if dot {
                print!("{}", fsa_to_dot(&c.fsa));
            } else {
                print!("{}", print_fsa(&c.fsa));
            }
            Ok(if c.exactness.is_exact() {
                EXIT_HOLDS
            } else {
                EXIT_UNKNOWN
            })
        }
        Command::SreIn { dir, expr, artifact } => {
            let sre = parse_sre(&expr).map_err(usage)?;
            let inst = ctx.instance()?;
            let opts = ctx.options();
            let verdict = match (Direction::from(dir), inst.net().is_bpp()) {
                (Direction::Down, true) => sre_in_dc_bpp(&sre, &inst, &opts),
                (Direction::Up, true) => sre_in_uc_bpp(&sre, &inst, &opts),
                (Direction::Down, false) => sre_in_dc_pn(&sre, &inst, &budget),
                (Direction::Up, false) => sre_in_uc_pn(&sre, &inst, &budget),
            }
            .map_err(error)?;
            if let (Some(path), Some(script)) = (&artifact, &verdict.artifact) {
                std::fs::write(path, script).map_err(|e| error(format!("{}: {e}", path.display())))?;
                println!("artifact: {}", path.display());
            }
            Ok(report_verdict(&verdict))
        }
        Command::IsClosed { dir } => {
            let inst = ctx.instance()?;
            match is_closed(&inst, dir.into(), &budget) {
                ClosedAnswer::Yes => {
                    println!("closed: yes");
                    Ok(EXIT_HOLDS)
                }
                ClosedAnswer::No(w) => {
                    println!("closed: no");
                    println!("counterexample: {w}");
                    Ok(EXIT_FAILS)
                }
                ClosedAnswer::Unknown(why) => {
                    println!("closed: unknown");
                    println!("note: {why}");
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::RegIn { automaton } => {
            let text =
                std::fs::read_to_string(&automaton).map_err(|e| error(format!("{}: {e}", automaton.display())))?;
            let fsa = parse_fsa(&text).map_err(error)?;
            let inst = ctx.instance()?;
            let r = regular_included_in_lang(&fsa, &inst, &budget).map_err(error)?;
            println!("included: {}", if r.included { "yes" } else { "no" });
            if let Some(w) = r.counterexample {
                println!("counterexample: {w}");
            }
            Ok(verdict_code(r.included))
        }
        Command::Suppn { places } => {
            let inst = ctx.instance()?;
            let ids = places
                .iter()
                .map(|p| {
                    inst.net()
                        .place_index(p)
                        .ok_or_else(|| usage(format!("unknown place `{p}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let r = simultaneously_unbounded(inst.net(), inst.initial(), &ids, &budget).map_err(error)?;
            println!("simultaneously unbounded: {}", if r { "yes" } else { "no" });
            Ok(verdict_code(r))
        }
        Command::Km => {
            let inst = ctx.instance()?;
            let g = km_graph_partial(inst.net(), inst.initial(), &budget);
            println!("nodes: {}", g.nodes.len());
            for (i, n) in g.nodes.iter().enumerate() {
                println!("  n{i} {}", n.display(inst.net()));
            }
            println!("edges: {}", g.edges.len());
            for &(a, t, b) in &g.edges {
                println!("  n{a} -{}-> n{b}", inst.net().transition(t).name);
            }
            println!("complete: {}", if g.complete { "yes" } else { "no" });
            Ok(if g.complete { EXIT_HOLDS } else { EXIT_UNKNOWN })
        }
        Command::Bound { name } => {
            let inst = ctx.instance()?;
            let report = match name {
                BoundName::Rackoff => rackoff_bound(&inst),
                BoundName::BppShort => bpp_short_bound(&inst).map_err(error)?,
                BoundName::BppCutoff => bpp_cutoff(&inst).map_err(error)?,
            };
            println!("{report}");
            Ok(EXIT_HOLDS)
        }
        Command::Export { format } => {
            let inst = ctx.instance()?;
            if format.dot {
                print!("{}", net_to_dot(&inst));
            } else {
                let f = bpp_reach_formula(inst.net(), inst.initial()).map_err(error)?;
                let covering = inst
                    .net()
                    .places()
                    .iter()
                    .zip(inst.final_marking().counts())
                    .map(|(p, c)| Formula::ge(Term::var(place_var(p)), Term::int(c.clone())));
                let query = Formula::and(std::iter::once(f.formula).chain(covering));
                print!("{}", smtlib_export(&query));
            }
            Ok(EXIT_HOLDS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_HOLDS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
