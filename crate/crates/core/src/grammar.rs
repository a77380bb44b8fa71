//! Weighted and stochastic context-free grammars: the text format, exact
//! classification, conversion to simple normal form and the encoding size.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exactmath::{bitlen, format_rational, parse_rational, rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("undeclared symbol {0:?}")]
    UndeclaredSymbol(String),
    #[error("rule for {0} has a nonpositive weight")]
    NonpositiveWeight(String),
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("\"eps\" is reserved for the empty body and cannot name a symbol")]
    ReservedName,
    #[error("unknown nonterminal {0:?}")]
    UnknownNonterminal(String),
}

/// A symbol in a rule body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nonterminal(usize),
    Terminal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
    pub weight: Rational,
}

/// A weighted context-free grammar with positive rational rule weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wcfg {
    nonterminals: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<Rule>,
    start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GrammarClass {
    Wcfg,
    Scfg,
    ProperScfg,
}

fn check_name(name: &str) -> Result<(), GrammarError> {
    if name == "eps" {
        return Err(GrammarError::ReservedName);
    }
    Ok(())
}

impl Wcfg {
    pub fn new(
        nonterminals: Vec<String>,
        terminals: Vec<String>,
        rules: Vec<Rule>,
        start: usize,
    ) -> Result<Self, GrammarError> {
        let mut seen = HashSet::new();
        for name in nonterminals.iter().chain(&terminals) {
            check_name(name)?;
            if !seen.insert(name.as_str()) {
                return Err(GrammarError::DuplicateSymbol(name.clone()));
            }
        }
        if start >= nonterminals.len() {
            return Err(GrammarError::UndeclaredSymbol(format!("start #{start}")));
        }
        for r in &rules {
            if r.lhs >= nonterminals.len() {
                return Err(GrammarError::UndeclaredSymbol(format!("nonterminal #{}", r.lhs)));
            }
            if !r.weight.is_positive() {
                return Err(GrammarError::NonpositiveWeight(nonterminals[r.lhs].clone()));
            }
            for s in &r.rhs {
                match *s {
                    Symbol::Nonterminal(i) if i >= nonterminals.len() => {
                        return Err(GrammarError::UndeclaredSymbol(format!("nonterminal #{i}")))
                    }
                    Symbol::Terminal(i) if i >= terminals.len() => {
                        return Err(GrammarError::UndeclaredSymbol(format!("terminal #{i}")))
                    }
                    _ => {}
                }
            }
        }
        Ok(Wcfg { nonterminals, terminals, rules, start })
    }

    /// Convenience constructor from named rules `(lhs, body, weight)`; body
    /// symbols are resolved against the declared names.
    pub fn from_named(
        nonterminals: &[&str],
        terminals: &[&str],
        start: &str,
        rules: &[(&str, &[&str], Rational)],
    ) -> Result<Self, GrammarError> {
        let nts: Vec<String> = nonterminals.iter().map(|s| s.to_string()).collect();
        let ts: Vec<String> = terminals.iter().map(|s| s.to_string()).collect();
        let nt_index: HashMap<&str, usize> = nonterminals.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let t_index: HashMap<&str, usize> = terminals.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let resolve = |s: &str| -> Result<Symbol, GrammarError> {
            if let Some(&i) = nt_index.get(s) {
                Ok(Symbol::Nonterminal(i))
            } else if let Some(&i) = t_index.get(s) {
                Ok(Symbol::Terminal(i))
            } else {
                Err(GrammarError::UndeclaredSymbol(s.to_string()))
            }
        };
        let mut out = Vec::with_capacity(rules.len());
        for (lhs, body, w) in rules {
            let lhs = *nt_index.get(lhs).ok_or_else(|| GrammarError::UndeclaredSymbol(lhs.to_string()))?;
            let rhs = body.iter().map(|s| resolve(s)).collect::<Result<_, _>>()?;
            out.push(Rule { lhs, rhs, weight: w.clone() });
        }
        let start = *nt_index.get(start).ok_or_else(|| GrammarError::UndeclaredSymbol(start.to_string()))?;
        Wcfg::new(nts, ts, out, start)
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn nonterminal_index(&self, name: &str) -> Option<usize> {
        self.nonterminals.iter().position(|n| n == name)
    }

    pub fn terminal_index(&self, name: &str) -> Option<usize> {
        self.terminals.iter().position(|n| n == name)
    }

    /// Indices of the rules with left-hand side `a`.
    pub fn rules_of(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.rules.iter().enumerate().filter(move |(_, r)| r.lhs == a).map(|(i, _)| i)
    }

    /// `p(A)`: total weight of the rules for `a`.
    pub fn mass(&self, a: usize) -> Rational {
        self.rules_of(a).fold(Rational::zero(), |acc, i| acc + &self.rules[i].weight)
    }

    pub fn with_start(&self, start: usize) -> Wcfg {
        assert!(start < self.nonterminals.len());
        Wcfg { start, ..self.clone() }
    }

    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<Wcfg, GrammarError> {
        assert_eq!(weights.len(), self.rules.len());
        let rules = self
            .rules
            .iter()
            .zip(weights)
            .map(|(r, weight)| Rule { weight, ..r.clone() })
            .collect();
        Wcfg::new(self.nonterminals.clone(), self.terminals.clone(), rules, self.start)
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::Nonterminal(i) => &self.nonterminals[i],
            Symbol::Terminal(i) => &self.terminals[i],
        }
    }

    /// Renders a rule as `A -> B c [p]`.
    pub fn rule_text(&self, r: &Rule) -> String {
        let body = if r.rhs.is_empty() {
            "eps".to_string()
        } else {
            r.rhs.iter().map(|&s| self.symbol_name(s)).collect::<Vec<_>>().join(" ")
        };
        format!("{} -> {} [{}]", self.nonterminals[r.lhs], body, format_rational(&r.weight))
    }
}

impl fmt::Display for Wcfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nonterminals: {}", self.nonterminals.join(" "))?;
        writeln!(f, "terminals: {}", self.terminals.join(" "))?;
        writeln!(f, "start: {}", self.nonterminals[self.start])?;
        writeln!(f, "rules:")?;
        for r in &self.rules {
            writeln!(f, "{}", self.rule_text(r))?;
        }
        Ok(())
    }
}

/// Parses the line-oriented grammar format. Rule weights are mandatory.
pub fn parse_grammar(text: &str) -> Result<Wcfg, GrammarError> {
    parse_text(text, false)
}

/// Like [`parse_grammar`] but rule weights may be omitted (they default to 1).
pub fn parse_skeleton(text: &str) -> Result<Wcfg, GrammarError> {
    parse_text(text, true)
}

fn parse_text(text: &str, weights_optional: bool) -> Result<Wcfg, GrammarError> {
    let mut nonterminals: Option<Vec<String>> = None;
    let mut terminals: Option<Vec<String>> = None;
    let mut start: Option<(usize, String)> = None;
    let mut in_rules = false;
    let mut raw_rules: Vec<(usize, String, Vec<String>, Rational)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: &str| GrammarError::Syntax { line: line_no, message: message.to_string() };
        if !in_rules || !line.contains("->") {
            if let Some((key, rest)) = line.split_once(':') {
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                match key.trim() {
                    "nonterminals" => nonterminals = Some(names),
                    "terminals" => terminals = Some(names),
                    "start" => {
                        if names.len() != 1 {
                            return Err(syntax("start needs exactly one nonterminal"));
                        }
                        start = Some((line_no, names[0].clone()));
                    }
                    "rules" => {
                        if !names.is_empty() {
                            return Err(syntax("rules: must be followed by one rule per line"));
                        }
                        in_rules = true;
                    }
                    other => return Err(syntax(&format!("unknown section {other:?}"))),
                }
                continue;
            }
            return Err(syntax("expected a section header or a rule"));
        }
        let (lhs, rest) = line.split_once("->").ok_or_else(|| syntax("rule needs \"->\""))?;
        let lhs = lhs.trim();
        if lhs.is_empty() || lhs.contains(char::is_whitespace) {
            return Err(syntax("rule needs exactly one left-hand nonterminal"));
        }
        let (body, weight) = match rest.find('[') {
            Some(open) => {
                let close = rest.rfind(']').ok_or_else(|| syntax("unterminated weight"))?;
                if close < open || !rest[close + 1..].trim().is_empty() {
                    return Err(syntax("weight must end the rule"));
                }
                let w = parse_rational(&rest[open + 1..close])
                    .map_err(|_| syntax(&format!("bad weight {:?}", &rest[open + 1..close])))?;
                (&rest[..open], w)
            }
            None if weights_optional => (rest, Rational::one()),
            None => return Err(syntax("rule needs a weight in brackets")),
        };
        let mut symbols: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        if symbols == ["eps"] {
            symbols.clear();
        } else if symbols.is_empty() {
            return Err(syntax("empty body must be written \"eps\""));
        } else if symbols.iter().any(|s| s == "eps") {
            return Err(syntax("\"eps\" must be the whole body"));
        }
        raw_rules.push((line_no, lhs.to_string(), symbols, weight));
    }

    let nonterminals = nonterminals.ok_or(GrammarError::Syntax { line: 0, message: "missing nonterminals:".into() })?;
    let terminals = terminals.unwrap_or_default();
    let (_, start_name) = start.ok_or(GrammarError::Syntax { line: 0, message: "missing start:".into() })?;
    let nt_index: HashMap<&str, usize> = nonterminals.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let t_index: HashMap<&str, usize> = terminals.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let start = *nt_index.get(start_name.as_str()).ok_or(GrammarError::UndeclaredSymbol(start_name.clone()))?;
    let mut rules = Vec::with_capacity(raw_rules.len());
    for (_, lhs, body, weight) in raw_rules {
        let l = *nt_index.get(lhs.as_str()).ok_or(GrammarError::UndeclaredSymbol(lhs.clone()))?;
        if !weight.is_positive() {
            return Err(GrammarError::NonpositiveWeight(lhs));
        }
        let rhs = body
            .iter()
            .map(|s| {
                nt_index
                    .get(s.as_str())
                    .map(|&i| Symbol::Nonterminal(i))
                    .or_else(|| t_index.get(s.as_str()).map(|&i| Symbol::Terminal(i)))
                    .ok_or_else(|| GrammarError::UndeclaredSymbol(s.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rules.push(Rule { lhs: l, rhs, weight });
    }
    Wcfg::new(nonterminals, terminals, rules, start)
}

/// Exact classification by per-nonterminal weight sums.
pub fn classify(g: &Wcfg) -> GrammarClass {
    let one = Rational::one();
    let mut proper = true;
    for a in 0..g.nonterminals.len() {
        let m = g.mass(a);
        if m > one {
            return GrammarClass::Wcfg;
        }
        proper &= m == one;
    }
    if proper {
        GrammarClass::ProperScfg
    } else {
        GrammarClass::Scfg
    }
}

/// Nonterminal types of simple normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Kind {
    /// Only unit rules `A -> B` (possibly none at all).
    L,
    /// A single rule `A -> B C` of weight 1.
    Q,
    /// A single rule `A -> a` or `A -> eps` of weight 1.
    T,
}

/// Where an SNF nonterminal came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    /// A nonterminal of the source grammar.
    Source(usize),
    /// Fresh nonterminal carrying the suffix of source rule `rule` starting at
    /// body position `offset` (offset 0 for whole-body dispatch targets).
    RuleBody { rule: usize, offset: usize },
    /// Fresh nonterminal that emits the given terminal.
    Terminal(usize),
}

/// A grammar in simple normal form together with per-nonterminal kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfWcfg {
    grammar: Wcfg,
    kinds: Vec<Kind>,
    origin: Vec<Origin>,
    /// Kind-Q nonterminals may carry several weight-1 binary rules (product grammars).
    multi_binary: bool,
}

impl std::ops::Deref for SnfWcfg {
    type Target = Wcfg;
    fn deref(&self) -> &Wcfg {
        &self.grammar
    }
}

impl SnfWcfg {
    /// Wraps a grammar that is already in SNF, inferring kinds. Returns `None`
    /// if some nonterminal fits no SNF type.
    pub fn from_wcfg(g: &Wcfg) -> Option<SnfWcfg> {
        let mut kinds = Vec::with_capacity(g.nonterminals.len());
        for a in 0..g.nonterminals.len() {
            kinds.push(snf_kind(g, a)?);
        }
        let origin = (0..g.nonterminals.len()).map(Origin::Source).collect();
        Some(SnfWcfg { grammar: g.clone(), kinds, origin, multi_binary: false })
    }

    /// Assembles an SNF grammar from parts, checking the kind constraints.
    pub fn from_parts(grammar: Wcfg, kinds: Vec<Kind>, origin: Vec<Origin>) -> Option<SnfWcfg> {
        Self::assemble(grammar, kinds, origin, false)
    }

    /// As [`SnfWcfg::from_parts`], but a kind-Q nonterminal may have any
    /// positive number of weight-1 binary rules, as in a grammar-automaton
    /// product where each one splits over intermediate states.
    pub fn from_parts_multi_binary(grammar: Wcfg, kinds: Vec<Kind>, origin: Vec<Origin>) -> Option<SnfWcfg> {
        Self::assemble(grammar, kinds, origin, true)
    }

    fn assemble(grammar: Wcfg, kinds: Vec<Kind>, origin: Vec<Origin>, multi_binary: bool) -> Option<SnfWcfg> {
        if kinds.len() != grammar.nonterminals.len() || origin.len() != kinds.len() {
            return None;
        }
        for (a, &k) in kinds.iter().enumerate() {
            if !fits_kind(&grammar, a, k, multi_binary) {
                return None;
            }
        }
        Some(SnfWcfg { grammar, kinds, origin, multi_binary })
    }

    pub fn grammar(&self) -> &Wcfg {
        &self.grammar
    }

    pub fn kinds(&self) -> &[Kind] {
        &self.kinds
    }

    pub fn kind(&self, a: usize) -> Kind {
        self.kinds[a]
    }

    pub fn origin(&self) -> &[Origin] {
        &self.origin
    }

    /// Same structure with new rule weights.
    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<SnfWcfg, GrammarError> {
        let grammar = self.grammar.with_weights(weights)?;
        Ok(SnfWcfg { grammar, kinds: self.kinds.clone(), origin: self.origin.clone(), multi_binary: self.multi_binary })
    }

    pub fn with_start(&self, start: usize) -> SnfWcfg {
        SnfWcfg { grammar: self.grammar.with_start(start), ..self.clone() }
    }

    /// Checks every kind constraint; used by tests and debug assertions.
    pub fn is_valid(&self) -> bool {
        (0..self.kinds.len()).all(|a| fits_kind(&self.grammar, a, self.kinds[a], self.multi_binary))
    }
}

fn fits_kind(g: &Wcfg, a: usize, kind: Kind, multi_binary: bool) -> bool {
    let rules: Vec<&Rule> = g.rules_of(a).map(|i| &g.rules[i]).collect();
    match kind {
        Kind::L => rules.iter().all(|r| matches!(r.rhs.as_slice(), [Symbol::Nonterminal(_)])),
        Kind::Q => {
            (rules.len() == 1 || (multi_binary && !rules.is_empty()))
                && rules.iter().all(|r| {
                    r.weight.is_one() && matches!(r.rhs.as_slice(), [Symbol::Nonterminal(_), Symbol::Nonterminal(_)])
                })
        }
        Kind::T => {
            rules.len() == 1
                && rules[0].weight.is_one()
                && matches!(rules[0].rhs.as_slice(), [] | [Symbol::Terminal(_)])
        }
    }
}

fn snf_kind(g: &Wcfg, a: usize) -> Option<Kind> {
    [Kind::L, Kind::Q, Kind::T].into_iter().find(|&k| fits_kind(g, a, k, false))
}

struct SnfBuilder<'a> {
    source: &'a Wcfg,
    names: Vec<String>,
    used: HashSet<String>,
    kinds: Vec<Option<Kind>>,
    origin: Vec<Origin>,
    rules: Vec<Rule>,
    terminal_nt: BTreeMap<usize, usize>,
}

impl<'a> SnfBuilder<'a> {
    fn fresh(&mut self, base: String, origin: Origin) -> usize {
        let mut name = base;
        while self.used.contains(&name) {
            name.push('\'');
        }
        self.used.insert(name.clone());
        self.names.push(name);
        self.kinds.push(None);
        self.origin.push(origin);
        self.names.len() - 1
    }

    fn terminal(&mut self, t: usize) -> usize {
        if let Some(&x) = self.terminal_nt.get(&t) {
            return x;
        }
        let x = self.fresh(format!("T~{}", self.source.terminals[t]), Origin::Terminal(t));
        self.kinds[x] = Some(Kind::T);
        self.rules.push(Rule { lhs: x, rhs: vec![Symbol::Terminal(t)], weight: Rational::one() });
        self.terminal_nt.insert(t, x);
        x
    }

    fn as_nonterminal(&mut self, s: Symbol) -> usize {
        match s {
            Symbol::Nonterminal(b) => b,
            Symbol::Terminal(t) => self.terminal(t),
        }
    }

    /// Defines `head -> body [1]` with `head` of kind T or Q, binarizing to the right.
    fn define_unit_weight(&mut self, head: usize, body: &[Symbol], rule: usize, tag: &str) {
        match body {
            [] | [Symbol::Terminal(_)] => {
                self.kinds[head] = Some(Kind::T);
                self.rules.push(Rule { lhs: head, rhs: body.to_vec(), weight: Rational::one() });
            }
            [_] => unreachable!("unit bodies stay on kind-L nonterminals"),
            _ => {
                let mut current = head;
                for offset in 0..body.len() - 1 {
                    let left = self.as_nonterminal(body[offset]);
                    let right = if offset + 2 == body.len() {
                        self.as_nonterminal(body[offset + 1])
                    } else {
                        let base = format!("{}~{}", tag, offset + 1);
                        self.fresh(base, Origin::RuleBody { rule, offset: offset + 1 })
                    };
                    self.kinds[current] = Some(Kind::Q);
                    self.rules.push(Rule {
                        lhs: current,
                        rhs: vec![Symbol::Nonterminal(left), Symbol::Nonterminal(right)],
                        weight: Rational::one(),
                    });
                    current = right;
                }
            }
        }
    }
}

/// Converts any WCFG into simple normal form, preserving string weights of
/// every source nonterminal. Source nonterminals keep their indices.
pub fn to_snf(g: &Wcfg) -> SnfWcfg {
    let mut b = SnfBuilder {
        source: g,
        names: g.nonterminals.clone(),
        used: g.nonterminals.iter().chain(&g.terminals).cloned().collect(),
        kinds: vec![None; g.nonterminals.len()],
        origin: (0..g.nonterminals.len()).map(Origin::Source).collect(),
        rules: Vec::new(),
        terminal_nt: BTreeMap::new(),
    };
    for a in 0..g.nonterminals.len() {
        let own: Vec<usize> = g.rules_of(a).collect();
        let all_unit = own.iter().all(|&i| matches!(g.rules[i].rhs.as_slice(), [Symbol::Nonterminal(_)]));
        if all_unit {
            b.kinds[a] = Some(Kind::L);
            for &i in &own {
                b.rules.push(g.rules[i].clone());
            }
            continue;
        }
        if let [only] = own.as_slice() {
            let r = &g.rules[*only];
            if r.weight.is_one() {
                let tag = g.nonterminals[a].clone();
                b.define_unit_weight(a, &r.rhs, *only, &tag);
                continue;
            }
        }
        b.kinds[a] = Some(Kind::L);
        for (k, &i) in own.iter().enumerate() {
            let r = &g.rules[i];
            if let [Symbol::Nonterminal(target)] = r.rhs.as_slice() {
                b.rules.push(Rule { lhs: a, rhs: vec![Symbol::Nonterminal(*target)], weight: r.weight.clone() });
                continue;
            }
            let tag = format!("{}~{}", g.nonterminals[a], k + 1);
            let x = b.fresh(tag.clone(), Origin::RuleBody { rule: i, offset: 0 });
            b.rules.push(Rule { lhs: a, rhs: vec![Symbol::Nonterminal(x)], weight: r.weight.clone() });
            b.define_unit_weight(x, &r.rhs, i, &tag);
        }
    }
    // Keep rules grouped by left-hand side in nonterminal order.
    b.rules.sort_by_key(|r| r.lhs);
    let kinds: Vec<Kind> = b.kinds.into_iter().map(|k| k.expect("every nonterminal gets a kind")).collect();
    let grammar = Wcfg::new(b.names, g.terminals.clone(), b.rules, g.start)
        .expect("SNF construction only produces declared symbols and positive weights");
    let snf = SnfWcfg { grammar, kinds, origin: b.origin, multi_binary: false };
    debug_assert!(snf.is_valid());
    snf
}

/// Encoding size `|G|` of an SNF grammar: per nonterminal,
/// `max(3, sum over its rules of bitlen(num) + bitlen(den) + 2 |body|)`.
pub fn encoding_size(g: &SnfWcfg) -> u64 {
    let mut per = vec![0u64; g.nonterminals.len()];
    for r in &g.rules {
        per[r.lhs] += bitlen(r.weight.numer()) + bitlen(r.weight.denom()) + 2 * r.rhs.len() as u64;
    }
    per.into_iter().map(|s| s.max(3)).sum()
}

/// The family with critical depth `n`: `A_i -> A_i A_i [1/2] | A_{i+1} [1/2]`
/// for `i < n`, `A_n -> c a B_n a c [1]`, `B_i -> B_{i-1} B_{i-1} [1]`,
/// `B_0 -> eps [1/2] | b [1/2]`, started at `A_0`.
pub fn bad_family(n: usize) -> Wcfg {
    let mut nonterminals: Vec<String> = (0..=n).map(|i| format!("A_{i}")).collect();
    nonterminals.extend((0..=n).map(|i| format!("B_{i}")));
    let terminals = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let a_of = |i: usize| Symbol::Nonterminal(i);
    let b_of = |i: usize| Symbol::Nonterminal(n + 1 + i);
    let (ta, tb, tc) = (Symbol::Terminal(0), Symbol::Terminal(1), Symbol::Terminal(2));
    let half = rat(1, 2);
    let mut rules = Vec::new();
    for i in 0..n {
        rules.push(Rule { lhs: i, rhs: vec![a_of(i), a_of(i)], weight: half.clone() });
        rules.push(Rule { lhs: i, rhs: vec![a_of(i + 1)], weight: half.clone() });
    }
    rules.push(Rule { lhs: n, rhs: vec![tc, ta, b_of(n), ta, tc], weight: Rational::one() });
    for i in (1..=n).rev() {
        rules.push(Rule { lhs: n + 1 + i, rhs: vec![b_of(i - 1), b_of(i - 1)], weight: Rational::one() });
    }
    rules.push(Rule { lhs: n + 1, rhs: vec![], weight: half.clone() });
    rules.push(Rule { lhs: n + 1, rhs: vec![tb], weight: half });
    Wcfg::new(nonterminals, terminals, rules, 0).expect("fixture grammar is well formed")
}
