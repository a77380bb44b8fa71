use std::path::PathBuf;
use std::process::Command;

use num_traits::One;
use regprob::exactmath::{parse_rational, pow2, rat, Rational};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regprob"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("regprob-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, stdout) = run(args);
    assert_eq!(code, 0, "{args:?}: {stdout}");
    serde_json::from_str(&stdout).unwrap()
}

fn rational(v: &Value, key: &str) -> Rational {
    parse_rational(v[key].as_str().unwrap()).unwrap()
}

const GEOMETRIC: &str = "nonterminals: S\nterminals: a b\nstart: S\nrules:\nS -> a S [1/3]\nS -> b [2/3]\n";

#[test]
fn fixture_then_prob_round_trip() {
    let (code, text) = run(&["fixtures", "-n", "2"]);
    assert_eq!(code, 0);
    let g = scratch("bad2.txt", &text);
    let g = g.to_str().unwrap();
    for (start, expected) in [("A_0", rat(1, 2)), ("A_1", rat(1, 4)), ("A_2", rat(1, 16))] {
        let v = json(&["prob", "--grammar", g, "--infix", "aa", "--start", start, "--json"]);
        let lo = rational(&v, "probability_lo");
        let hi = rational(&v, "probability_hi");
        assert!(lo <= expected && expected <= hi, "{start}");
        assert!(&hi - &lo <= pow2(-20));
        assert_eq!(v["start"], start);
        assert_eq!(v["mode"], "adaptive");
        assert_eq!(v["certified"], false);
    }
}

#[test]
fn snf_output_gives_same_probability() {
    let g = scratch("geo.txt", GEOMETRIC);
    let (code, snf) = run(&["snf", "--grammar", g.to_str().unwrap()]);
    assert_eq!(code, 0);
    let s = scratch("geo-snf.txt", &snf);
    let eps = pow2(-20);
    let before = json(&["prob", "--grammar", g.to_str().unwrap(), "--prefix", "aa", "--json"]);
    let after = json(&["prob", "--grammar", s.to_str().unwrap(), "--prefix", "aa", "--json"]);
    let a = rational(&before, "probability_lo");
    let b = rational(&after, "probability_lo");
    let gap = if a > b { &a - &b } else { &b - &a };
    assert!(gap <= &eps * rat(2, 1));
}

#[test]
fn certified_mode_and_dfa_file() {
    let g = scratch("geo2.txt", GEOMETRIC);
    // Odd number of a's.
    let dfa = scratch("odd.dfa", "states: e o\nalphabet: a b\nstart: e\naccept: o\ndelta:\ne a o\no a e\ne b e\no b o\n");
    let v = json(&["prob", "--grammar", g.to_str().unwrap(), "--dfa", dfa.to_str().unwrap(), "--mode", "certified", "--json"]);
    // sum over odd k of (1/3)^k (2/3) = (2/3)(1/3)/(1 - 1/9) = 1/4.
    let expected = rat(1, 4);
    assert!(rational(&v, "probability_lo") <= expected && expected <= rational(&v, "probability_hi"));
    assert_eq!(v["certified"], true);
    assert_eq!(v["mode"], "certified-noncritical");
}

#[test]
fn incomplete_dfa_needs_flag() {
    let g = scratch("geo3.txt", GEOMETRIC);
    let dfa = scratch("partial.dfa", "states: p\nalphabet: a b\nstart: p\naccept: p\ndelta:\np b p\n");
    let (code, stdout) = run(&["prob", "--grammar", g.to_str().unwrap(), "--dfa", dfa.to_str().unwrap(), "--json"]);
    assert_eq!(code, 1);
    assert!(serde_json::from_str::<Value>(&stdout).unwrap()["error"].is_string());
    let v = json(&["prob", "--grammar", g.to_str().unwrap(), "--dfa", dfa.to_str().unwrap(), "--complete", "--json"]);
    // Only "b" avoids the sink.
    let expected = rat(2, 3);
    assert!(rational(&v, "probability_lo") <= expected && expected <= rational(&v, "probability_hi"));
}

#[test]
fn termination_and_analysis() {
    let (_, text) = run(&["fixtures", "-n", "3"]);
    let g = scratch("bad3.txt", &text);
    let v = json(&["termination", "--grammar", g.to_str().unwrap(), "--json"]);
    assert_eq!(v["all_one"], true);
    assert_eq!(v["exact"], true);
    assert_eq!(rational(&v, "probability_lo"), Rational::one());
    let a = json(&["analyze", "--grammar", g.to_str().unwrap(), "--json"]);
    assert_eq!(a["critical_depth"], 3);
    assert!(a["zero"].as_array().unwrap().is_empty());
}

#[test]
fn usage_and_input_errors() {
    let g = scratch("geo4.txt", GEOMETRIC);
    let g = g.to_str().unwrap();
    assert_eq!(run(&["prob", "--grammar", g, "--all", "--eps", "2"]).0, 2);
    assert_eq!(run(&["prob", "--grammar", g]).0, 2);
    assert_eq!(run(&["prob", "--grammar", g, "--all", "--infix", "a"]).0, 2);
    let (code, stdout) = run(&["prob", "--grammar", g, "--all", "--start", "Nope", "--json"]);
    assert_eq!(code, 1);
    assert!(serde_json::from_str::<Value>(&stdout).unwrap()["error"].is_string());
    let bad = scratch("bad.txt", "nonterminals: S\nterminals: a\nstart: S\nrules:\nS -> a [2]\nS -> a [1]\n");
    assert_eq!(run(&["prob", "--grammar", bad.to_str().unwrap(), "--all", "--json"]).0, 1);
}

#[test]
fn balance_subcommand() {
    let ok = scratch("ok.json", r#"{"d": 2, "n": 1, "values": ["1/4", "1/4", "1/2", "0"]}"#);
    let v = json(&["balance", "--vector", ok.to_str().unwrap(), "--json"]);
    assert_eq!(v["balanced"], true);
    assert_eq!(v["defect"], "0");
    let off = scratch("off.json", r#"{"d": 2, "n": 1, "values": ["1/4", "1/4", "1/4", "0"]}"#);
    let v = json(&["balance", "--vector", off.to_str().unwrap(), "--json"]);
    assert_eq!(v["balanced"], false);
    assert_eq!(v["defect"], "1/4");
}
