//! The grammar-automaton product `G (x) D` of an SNF grammar and a complete DFA.
//!
//! Product nonterminals are triples `(s, A, t)` meaning "A derives a string
//! that drives the automaton from `s` to `t`". They are numbered in
//! lexicographic `(s, A, t)` order, which is also the variable order of the
//! product polynomial system.

use num_traits::{One, Zero};

use crate::automata::Dfa;
use crate::exactmath::Rational;
use crate::grammar::{Kind, Origin, Rule, SnfWcfg, Symbol, Wcfg};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProductError {
    #[error("grammar terminal {0:?} is not in the automaton alphabet")]
    AlphabetMismatch(String),
    #[error("unknown nonterminal {0:?}")]
    UnknownNonterminal(String),
    #[error("solution has length {got}, product has {expected} nonterminals")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductWcfg {
    inner: SnfWcfg,
    states: usize,
    source_nonterminals: usize,
    source_names: Vec<String>,
}

impl ProductWcfg {
    pub fn grammar(&self) -> &SnfWcfg {
        &self.inner
    }

    /// Number of automaton states `d`.
    pub fn states(&self) -> usize {
        self.states
    }

    /// Number of source nonterminals `n`.
    pub fn source_nonterminals(&self) -> usize {
        self.source_nonterminals
    }

    pub fn source_names(&self) -> &[String] {
        &self.source_names
    }

    /// Index of the triple `(s, A, t)`.
    pub fn index(&self, s: usize, a: usize, t: usize) -> usize {
        triple_index(self.states, self.source_nonterminals, s, a, t)
    }

    /// Inverse of [`ProductWcfg::index`].
    pub fn triple(&self, i: usize) -> (usize, usize, usize) {
        let d = self.states;
        let n = self.source_nonterminals;
        (i / (n * d), (i / d) % n, i % d)
    }
}

pub fn triple_index(d: usize, n: usize, s: usize, a: usize, t: usize) -> usize {
    (s * n + a) * d + t
}

/// Builds `G (x) D`. Every grammar terminal must be in the automaton alphabet;
/// extra automaton symbols are fine.
pub fn intersect(g: &SnfWcfg, dfa: &Dfa) -> Result<ProductWcfg, ProductError> {
    let d = dfa.num_states();
    let n = g.nonterminals().len();
    let symbol_of: Vec<usize> = g
        .terminals()
        .iter()
        .map(|t| dfa.symbol_index(t).ok_or_else(|| ProductError::AlphabetMismatch(t.clone())))
        .collect::<Result<_, _>>()?;
    let idx = |s: usize, a: usize, t: usize| triple_index(d, n, s, a, t);
    let mut names = Vec::with_capacity(d * d * n);
    for s in 0..d {
        for a in 0..n {
            for t in 0..d {
                names.push(format!("{}.{}.{}", dfa.states()[s], g.nonterminals()[a], dfa.states()[t]));
            }
        }
    }
    let mut rules: Vec<Rule> = Vec::new();
    for s in 0..d {
        for a in 0..n {
            for t in 0..d {
                let lhs = idx(s, a, t);
                for ri in g.rules_of(a) {
                    let r = &g.rules()[ri];
                    match (g.kind(a), r.rhs.as_slice()) {
                        (Kind::L, [Symbol::Nonterminal(b)]) => rules.push(Rule {
                            lhs,
                            rhs: vec![Symbol::Nonterminal(idx(s, *b, t))],
                            weight: r.weight.clone(),
                        }),
                        (Kind::Q, [Symbol::Nonterminal(b), Symbol::Nonterminal(c)]) => {
                            for mid in 0..d {
                                rules.push(Rule {
                                    lhs,
                                    rhs: vec![Symbol::Nonterminal(idx(s, *b, mid)), Symbol::Nonterminal(idx(mid, *c, t))],
                                    weight: Rational::one(),
                                });
                            }
                        }
                        (Kind::T, [Symbol::Terminal(x)]) => {
                            if dfa.step(s, symbol_of[*x]) == t {
                                rules.push(Rule { lhs, rhs: r.rhs.clone(), weight: Rational::one() });
                            }
                        }
                        (Kind::T, []) => {
                            if s == t {
                                rules.push(Rule { lhs, rhs: vec![], weight: Rational::one() });
                            }
                        }
                        _ => unreachable!("SNF invariant violated"),
                    }
                }
            }
        }
    }
    // A kind-T triple with no matching transition has no rules; an empty rule
    // set is legal for kind L, so it is reclassified.
    let mut kinds = Vec::with_capacity(d * d * n);
    for _s in 0..d {
        for a in 0..n {
            for _t in 0..d {
                kinds.push(g.kind(a));
            }
        }
    }
    let mut has_rule = vec![false; d * d * n];
    for r in &rules {
        has_rule[r.lhs] = true;
    }
    for (i, k) in kinds.iter_mut().enumerate() {
        if *k == Kind::T && !has_rule[i] {
            *k = Kind::L;
        }
    }
    let start = idx(dfa.start(), g.start(), dfa.start());
    let grammar = Wcfg::new(names, g.terminals().to_vec(), rules, start).expect("product grammar is well formed");
    let origin = (0..d * d * n).map(|i| Origin::Source((i / d) % n)).collect();
    let inner = SnfWcfg::from_parts_multi_binary(grammar, kinds, origin).expect("product of an SNF grammar is SNF");
    Ok(ProductWcfg { inner, states: d, source_nonterminals: n, source_names: g.nonterminals().to_vec() })
}

/// `q_A^{G,D} = sum over accepting t of solution[(s0, A, t)]`.
pub fn regular_probability_of(
    solution: &[Rational],
    product: &ProductWcfg,
    a: &str,
    dfa: &Dfa,
) -> Result<Rational, ProductError> {
    let expected = product.grammar().nonterminals().len();
    if solution.len() != expected {
        return Err(ProductError::DimensionMismatch { expected, got: solution.len() });
    }
    let a = product
        .source_names
        .iter()
        .position(|x| x == a)
        .ok_or_else(|| ProductError::UnknownNonterminal(a.to_string()))?;
    Ok(accepting_triples(product, a, dfa)
        .into_iter()
        .fold(Rational::zero(), |acc, i| acc + &solution[i]))
}

/// Indices of `(s0, A, t)` for accepting `t`.
pub fn accepting_triples(product: &ProductWcfg, a: usize, dfa: &Dfa) -> Vec<usize> {
    dfa.accepting_states().into_iter().map(|t| product.index(dfa.start(), a, t)).collect()
}
