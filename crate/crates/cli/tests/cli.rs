//! End-to-end runs of the `pnclosure` binary.

use std::io::Write;
use std::process::{Command, Stdio};

use pnclosure::io::{parse_fsa, parse_net};
use pnclosure::net::Word;
use pnclosure::presburger::{parse_script, solve, SolveResult, SolverConfig};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pnclosure"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(stdin.as_bytes())
        .expect("stdin accepts input");
    let out = child.wait_with_output().expect("binary finishes");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn generate(family: &[&str]) -> String {
    let mut args = vec!["gen"];
    args.extend_from_slice(family);
    let out = run(&args, "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    out.stdout
}

const BPP_LOOP: &str = "alphabet a\nplace p\ntrans t label a pre p:1 post p:1\ninit p:1\n";

#[test]
fn generated_nets_parse() {
    for family in [&["rackoff-ce"][..], &["bpp-power", "3"], &["ackermann", "1", "2"]] {
        let text = generate(family);
        parse_net(&text).unwrap_or_else(|e| panic!("{family:?}: {e}"));
    }
}

#[test]
fn power_down_closure_pipeline() {
    let net = generate(&["bpp-power", "2"]);
    let out = run(&["closure", "--dir", "down"], &net);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let fsa = parse_fsa(&out.stdout).expect("closure prints an automaton");
    for i in 0..8 {
        let w = Word::from_chars(&"a".repeat(i));
        assert_eq!(fsa.accepts(&w), i <= 4, "a^{i}");
    }
}

#[test]
fn upward_membership_in_the_counterexample_net() {
    let net = generate(&["rackoff-ce"]);
    assert_eq!(run(&["member", "--mode", "up", "-w", "aab"], &net).code, 0);
    assert_eq!(run(&["member", "--mode", "exact", "-w", "aab"], &net).code, 0);
    assert_eq!(run(&["member", "--mode", "exact", "-w", "b"], &net).code, 1);
    assert_eq!(run(&["member", "--mode", "down", "-w", "bb"], &net).code, 1);
}

#[test]
fn star_is_not_below_the_power_language() {
    let net = generate(&["bpp-power", "2"]);
    let out = run(&["sre-in", "--dir", "down", "-e", "{a}*"], &net);
    assert_eq!(out.code, 1, "{}", out.stdout);
    assert!(out.stdout.contains("witness word: aaaaa"), "{}", out.stdout);
    assert_eq!(run(&["sre-in", "--dir", "down", "-e", "(a+eps).a.a"], &net).code, 0);
}

#[test]
fn net_file_flag_reads_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.txt");
    std::fs::write(&path, generate(&["rackoff-ce"])).unwrap();
    let out = run(&["--net", path.to_str().unwrap(), "cover"], "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    let missing = dir.path().join("absent.txt");
    let out = run(&["--net", missing.to_str().unwrap(), "cover"], "");
    assert_eq!(out.code, 3);
}

#[test]
fn regular_inclusion_reads_an_automaton_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.fsa");
    std::fs::write(
        &path,
        "alphabet a b c\nstates 3\ninitial 0\nfinal 2\nedge 0 a 1\nedge 1 b 2\n",
    )
    .unwrap();
    let net = generate(&["rackoff-ce"]);
    assert_eq!(run(&["reg-in", "-a", path.to_str().unwrap()], &net).code, 0);
    std::fs::write(&path, "alphabet a b c\nstates 2\ninitial 0\nfinal 1\nedge 0 b 1\n").unwrap();
    let out = run(&["reg-in", "-a", path.to_str().unwrap()], &net);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains('b'), "{}", out.stdout);
}

#[test]
fn closedness_and_unboundedness() {
    assert_eq!(run(&["is-closed", "--dir", "up"], BPP_LOOP).code, 0);
    assert_eq!(
        run(&["is-closed", "--dir", "down"], &generate(&["bpp-power", "1"])).code,
        1
    );
    let ce = generate(&["rackoff-ce"]);
    assert_eq!(run(&["suppn", "-X", "temp"], &ce).code, 0);
    assert_eq!(run(&["suppn", "-X", "stop"], &ce).code, 1);
}

#[test]
fn karp_miller_and_bounds_print() {
    let ce = generate(&["rackoff-ce"]);
    let km = run(&["km"], &ce);
    assert_eq!(km.code, 0);
    assert!(km.stdout.contains('ω'), "{}", km.stdout);
    let power = generate(&["bpp-power", "2"]);
    let cutoff = run(&["bound", "bpp-cutoff"], &power);
    assert_eq!(cutoff.code, 0);
    assert!(cutoff.stdout.contains("1728"), "{}", cutoff.stdout);
    assert_eq!(run(&["bound", "bpp-short"], &ce).code, 3);
    assert_eq!(run(&["bound", "rackoff"], &ce).code, 0);
}

#[test]
fn dot_export_is_well_formed() {
    for args in [&["export", "--dot"][..], &["closure", "--dir", "down", "--dot"]] {
        let out = run(args, &generate(&["bpp-power", "1"]));
        assert_eq!(out.code, 0, "{}", out.stderr);
        let body: Vec<&str> = out.stdout.lines().filter(|l| !l.starts_with('#')).collect();
        assert!(body.first().is_some_and(|l| l.starts_with("digraph")), "{}", out.stdout);
        assert_eq!(body.last().map(|l| l.trim()), Some("}"));
        let opens = out.stdout.matches('{').count();
        assert_eq!(opens, out.stdout.matches('}').count());
        assert_eq!(out.stdout.matches('"').count() % 2, 0);
    }
}

#[test]
fn smt2_export_re_parses_and_matches_reachability() {
    let out = run(&["export", "--smt2"], BPP_LOOP);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let phi = parse_script(&out.stdout).expect("exported script parses").formula();
    // transition and distance variables stay free in the script
    for p in 0..4u32 {
        let asg = [("m[p]".to_string(), p.into())].into();
        let fixed = phi.substitute(&asg);
        let sat = matches!(solve(&fixed, &SolverConfig::default()).unwrap(), SolveResult::Sat(_));
        assert_eq!(sat, p == 1, "m[p] = {p}");
    }
    let general = generate(&["rackoff-ce"]);
    assert_eq!(run(&["export", "--smt2"], &general).code, 3);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["frobnicate"][..],
        &["member", "--mode", "sideways", "-w", "a"],
        &["closure"],
    ] {
        let out = run(args, BPP_LOOP);
        assert_eq!(out.code, 64, "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(run(&["gen", "nonsense"], "").code, 64);
    assert_eq!(run(&["--help"], "").code, 0);
}

#[test]
fn malformed_input_is_an_error() {
    let out = run(&["cover"], "place p\ntrans t pre q:1\n");
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let ce = generate(&["rackoff-ce"]);
    for args in [
        &["closure", "--dir", "up"][..],
        &["km"],
        &["sre-in", "--dir", "up", "-e", "a.{a,b}*"],
    ] {
        let first = run(args, &ce);
        let second = run(args, &ce);
        assert_eq!(first.code, second.code);
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}
