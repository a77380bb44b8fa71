//! Seeded random instance generators and brute-force oracles shared by the
//! integration, property and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regprob::automata::Dfa;
use regprob::equations::{PolySystem, Polynomial};
use regprob::exactmath::{rat, Rational};
use regprob::grammar::{Rule, Symbol, Wcfg};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` positive rationals with random integer weights summing to exactly `total`.
pub fn split_mass(r: &mut ChaCha8Rng, k: usize, total: &Rational) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k).map(|_| r.gen_range(1..=9)).collect();
    let sum: i64 = raw.iter().sum();
    raw.into_iter().map(|x| total * rat(x, sum)).collect()
}

/// Random proper grammar already in SNF shape, `n` nonterminals over {a, b}.
/// Every nonterminal gets kind L (1-3 unit rules), Q or T; at least one is T.
pub fn random_snf_proper(r: &mut ChaCha8Rng, n: usize) -> Wcfg {
    let names: Vec<String> = (0..n).map(|i| format!("N{i}")).collect();
    let terminals = vec!["a".to_string(), "b".to_string()];
    let forced_t = r.gen_range(0..n);
    let mut rules = Vec::new();
    for a in 0..n {
        let kind = if a == forced_t { 2 } else { r.gen_range(0..3) };
        match kind {
            0 => {
                let k = r.gen_range(1..=3);
                for w in split_mass(r, k, &Rational::one()) {
                    rules.push(Rule { lhs: a, rhs: vec![Symbol::Nonterminal(r.gen_range(0..n))], weight: w });
                }
            }
            1 => rules.push(Rule {
                lhs: a,
                rhs: vec![Symbol::Nonterminal(r.gen_range(0..n)), Symbol::Nonterminal(r.gen_range(0..n))],
                weight: Rational::one(),
            }),
            _ => {
                let rhs = match r.gen_range(0..5) {
                    0 => vec![],
                    1 | 2 => vec![Symbol::Terminal(0)],
                    _ => vec![Symbol::Terminal(1)],
                };
                rules.push(Rule { lhs: a, rhs, weight: Rational::one() });
            }
        }
    }
    Wcfg::new(names, terminals, rules, 0).unwrap()
}

/// Random general-form proper SCFG over {a, b}: bodies of length 1-3, no
/// empty bodies, and unit rules only point to later nonterminals, so there
/// are no unit cycles.
pub fn random_general_proper(r: &mut ChaCha8Rng, n: usize) -> Wcfg {
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let terminals = vec!["a".to_string(), "b".to_string()];
    let mut rules = Vec::new();
    for a in 0..n {
        let k = r.gen_range(1..=3);
        let ws = split_mass(r, k, &Rational::one());
        for (j, w) in ws.into_iter().enumerate() {
            // The first rule of the last nonterminal is terminal-only to keep yields finite.
            let len = if a == n - 1 && j == 0 { 1 } else { r.gen_range(1..=3) };
            let mut rhs: Vec<Symbol> = (0..len)
                .map(|_| if r.gen_bool(0.55) { Symbol::Terminal(r.gen_range(0..2)) } else { Symbol::Nonterminal(r.gen_range(0..n)) })
                .collect();
            if a == n - 1 && j == 0 {
                rhs = vec![Symbol::Terminal(r.gen_range(0..2))];
            }
            if let [Symbol::Nonterminal(b)] = rhs[..] {
                if b <= a {
                    rhs = if a + 1 < n { vec![Symbol::Nonterminal(r.gen_range(a + 1..n))] } else { vec![Symbol::Terminal(0)] };
                }
            }
            rules.push(Rule { lhs: a, rhs, weight: w });
        }
    }
    Wcfg::new(names, terminals, rules, 0).unwrap()
}

/// Random complete DFA over `alphabet` with `d` states.
pub fn random_dfa(r: &mut ChaCha8Rng, d: usize, alphabet: &[String]) -> Dfa {
    let states: Vec<String> = (0..d).map(|i| format!("q{i}")).collect();
    let delta: Vec<usize> = (0..d * alphabet.len()).map(|_| r.gen_range(0..d)).collect();
    let accepting: Vec<bool> = (0..d).map(|_| r.gen_bool(0.5)).collect();
    Dfa::new(states, alphabet.to_vec(), delta, 0, accepting).unwrap()
}

/// Random PPS with at most 6 variables. Coefficients are large random
/// integers normalized per row; about half of the rows are exactly proper.
pub fn random_pps(r: &mut ChaCha8Rng) -> PolySystem {
    let n = r.gen_range(1..=6);
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut polys = Vec::with_capacity(n);
    for _ in 0..n {
        let k = r.gen_range(1..=4);
        let mut shapes: Vec<Vec<usize>> = Vec::new();
        let has_constant = r.gen_bool(0.6);
        for _ in 0..k {
            let factors = match r.gen_range(0..3) {
                0 => vec![r.gen_range(0..n)],
                _ => vec![r.gen_range(0..n), r.gen_range(0..n)],
            };
            shapes.push(factors);
        }
        let parts = usize::from(has_constant) + shapes.len();
        let raw: Vec<i64> = (0..parts + 1).map(|_| r.gen_range(1_000..1_000_000)).collect();
        let proper = r.gen_bool(0.5);
        let denom: i64 = if proper { raw[..parts].iter().sum() } else { raw.iter().sum() };
        let mut coeffs = raw[..parts].iter().map(|&x| rat(x, denom));
        let constant = if has_constant { coeffs.next().unwrap() } else { Rational::zero() };
        let terms: Vec<(Rational, Vec<usize>)> = coeffs.zip(shapes).collect();
        polys.push(Polynomial::new(constant, terms));
    }
    PolySystem::new(names, polys).unwrap()
}

/// Sum of derivation weights of every string of length at most `max_len`,
/// by exhaustive leftmost derivation enumeration. Requires no empty bodies
/// reachable in a way that could loop (every nonterminal yields at least one
/// terminal) and no unit cycles, so the search is finite.
pub fn string_weights(g: &Wcfg, max_len: usize) -> BTreeMap<Vec<usize>, Rational> {
    let mut out = BTreeMap::new();
    let mut min_len = vec![usize::MAX; g.nonterminals().len()];
    loop {
        let mut changed = false;
        for rule in g.rules() {
            let len = rule.rhs.iter().try_fold(0usize, |acc, s| match *s {
                Symbol::Terminal(_) => Some(acc + 1),
                Symbol::Nonterminal(b) => (min_len[b] != usize::MAX).then(|| acc + min_len[b]),
            });
            if let Some(len) = len {
                if len < min_len[rule.lhs] {
                    min_len[rule.lhs] = len;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut stack: Vec<(Vec<usize>, Vec<Symbol>, Rational)> = vec![(vec![], vec![Symbol::Nonterminal(g.start())], Rational::one())];
    while let Some((prefix, mut rest, w)) = stack.pop() {
        // `rest` is stored reversed: the next symbol is at the end.
        let mut prefix = prefix;
        while let Some(Symbol::Terminal(t)) = rest.last().copied() {
            prefix.push(t);
            rest.pop();
        }
        // Saturates on unproductive nonterminals, which prunes the branch.
        let lower: usize = rest
            .iter()
            .map(|s| match *s {
                Symbol::Terminal(_) => 1,
                Symbol::Nonterminal(b) => min_len[b],
            })
            .fold(prefix.len(), |a, b| a.saturating_add(b));
        if lower > max_len {
            continue;
        }
        let Some(Symbol::Nonterminal(a)) = rest.pop() else {
            *out.entry(prefix).or_insert_with(Rational::zero) += w;
            continue;
        };
        for ri in g.rules_of(a) {
            let rule = &g.rules()[ri];
            let mut next = rest.clone();
            next.extend(rule.rhs.iter().rev());
            stack.push((prefix.clone(), next, &w * &rule.weight));
        }
    }
    out
}

/// All words over `k` symbols of length at most `max_len`.
pub fn all_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in 0..k {
                let mut w2: Vec<usize> = w.clone();
                w2.push(s);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn shuffle<T>(r: &mut ChaCha8Rng, xs: &mut [T]) {
    xs.shuffle(r);
}
