//! Browser bindings. Every export takes and returns strings so the page can
//! stay framework-free; results are JSON, errors are `{"error": ...}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use regprob::analysis::analyze;
use regprob::automata::{build_pattern_dfa, PatternKind};
use regprob::exactmath::{format_decimal, parse_rational, rat, Rational};
use regprob::grammar::{parse_grammar, to_snf, Wcfg};
use regprob::solver::{compute_regular_probability, SolveMode};

fn error(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

fn branching(p: &Rational) -> Wcfg {
    let q = Rational::from_integer(1.into()) - p;
    let mut rules: Vec<(&str, &[&str], Rational)> = Vec::new();
    if *p > Rational::from_integer(0.into()) {
        rules.push(("S", &["S", "S"], p.clone()));
    }
    if q > Rational::from_integer(0.into()) {
        rules.push(("S", &["a"], q));
    }
    Wcfg::from_named(&["S"], &["a"], "S", &rules).expect("fixed grammar is well formed")
}

/// Termination probability of `S -> S S [p] | a [1 - p]` for `p = k / steps`,
/// `k = 0..=steps`, with the critical depth of each grammar.
#[wasm_bindgen]
pub fn termination_curve(steps: u32) -> String {
    let steps = steps.clamp(1, 200) as i64;
    let eps = rat(1, 1 << 16);
    let mut points = Vec::new();
    for k in 0..=steps {
        let p = rat(k, steps);
        let g = branching(&p);
        let all = build_pattern_dfa::<String>(PatternKind::All, &[], g.terminals()).expect("pattern automaton");
        let r = match compute_regular_probability(&g, &all, "S", &eps, SolveMode::Adaptive) {
            Ok(r) => r,
            Err(e) => return error(e),
        };
        points.push(json!({
            "p": format_decimal(&p, 4),
            "q": format_decimal(&r.probability_lo, 6),
            "critical": r.critical_depth > 0,
        }));
    }
    Value::Array(points).to_string()
}

/// Probability that the grammar text generates a string matching the
/// pattern; `kind` is one of `infix`, `prefix`, `exact`, `all`.
#[wasm_bindgen]
pub fn pattern_probability(grammar: &str, kind: &str, word: &str, eps: &str) -> String {
    let g = match parse_grammar(grammar) {
        Ok(g) => g,
        Err(e) => return error(e),
    };
    let kind = match kind {
        "infix" => PatternKind::Infix,
        "prefix" => PatternKind::Prefix,
        "exact" => PatternKind::Exact,
        "all" => PatternKind::All,
        other => return error(format!("unknown pattern kind {other:?}")),
    };
    let eps = match parse_rational(eps) {
        Ok(e) => e,
        Err(e) => return error(e),
    };
    let word: Vec<String> = if word.split_whitespace().count() > 1 {
        word.split_whitespace().map(str::to_string).collect()
    } else {
        word.trim().chars().map(|c| c.to_string()).collect()
    };
    let mut alphabet = g.terminals().to_vec();
    for s in &word {
        if !alphabet.contains(s) {
            alphabet.push(s.clone());
        }
    }
    let dfa = match build_pattern_dfa(kind, &word, &alphabet) {
        Ok(d) => d,
        Err(e) => return error(e),
    };
    let start = g.nonterminals()[g.start()].clone();
    match compute_regular_probability(&g, &dfa, &start, &eps, SolveMode::Adaptive) {
        Ok(r) => serde_json::to_string(&r).expect("result serializes"),
        Err(e) => error(e),
    }
}

/// Zero/one variables and critical components of the grammar's equations.
#[wasm_bindgen]
pub fn analyze_grammar(grammar: &str) -> String {
    let g = match parse_grammar(grammar) {
        Ok(g) => g,
        Err(e) => return error(e),
    };
    match analyze(&to_snf(&g)) {
        Ok(r) => serde_json::to_string(&r).expect("report serializes"),
        Err(e) => error(e),
    }
}
