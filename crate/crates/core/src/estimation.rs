//! Supervised rule-probability estimation from a weighted corpus of complete
//! leftmost derivations, and the consistency/noncriticality check of the
//! estimated grammar.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{criticality, AnalysisError};
use crate::equations::build_system;
use crate::exactmath::{format_rational, parse_rational, Rational};
use crate::grammar::{classify, parse_skeleton, to_snf, GrammarClass, GrammarError, Rule, Symbol, Wcfg};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EstimationError {
    #[error("rule {0} does not occur in any derivation")]
    UnusedRule(usize),
    #[error("nonterminal {0:?} does not occur in any derivation")]
    UnusedNonterminal(String),
    #[error("nonterminal {0:?} has zero expected count")]
    ZeroDenominator(String),
    #[error("entry {entry}, step {step}: {message}")]
    InvalidDerivation { entry: usize, step: usize, message: String },
    #[error("entry {0} leaves nonterminals unexpanded")]
    IncompleteDerivation(usize),
    #[error("entry {0} has a nonpositive weight")]
    NonpositiveWeight(usize),
    #[error("entry weights sum to {0}, not 1")]
    WeightsNotNormalized(String),
    #[error("grammar is not a proper SCFG")]
    NotProper,
    #[error("no complete derivation within the step cap after {0} attempts")]
    SamplingFailed(usize),
    #[error("corpus JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    /// Indices into the skeleton's rule list, in leftmost order.
    pub rules: Vec<usize>,
    pub weight: Rational,
}

/// A validated corpus: every entry is a complete leftmost derivation from the
/// start symbol, weights are positive and sum to 1, and every skeleton rule
/// and nonterminal occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationCorpus {
    skeleton: Wcfg,
    entries: Vec<CorpusEntry>,
}

fn check_derivation(g: &Wcfg, entry: usize, rules: &[usize]) -> Result<(), EstimationError> {
    let mut pending = vec![Symbol::Nonterminal(g.start())];
    for (step, &ri) in rules.iter().enumerate() {
        let bad = |message: String| EstimationError::InvalidDerivation { entry, step, message };
        let rule = g.rules().get(ri).ok_or_else(|| bad(format!("no rule with index {ri}")))?;
        let leftmost = loop {
            match pending.pop() {
                Some(Symbol::Terminal(_)) => continue,
                Some(Symbol::Nonterminal(a)) => break a,
                None => return Err(bad("derivation is already complete".into())),
            }
        };
        if rule.lhs != leftmost {
            return Err(bad(format!(
                "rule {ri} rewrites {} but the leftmost nonterminal is {}",
                g.nonterminals()[rule.lhs],
                g.nonterminals()[leftmost]
            )));
        }
        pending.extend(rule.rhs.iter().rev());
    }
    if pending.iter().any(|s| matches!(s, Symbol::Nonterminal(_))) {
        return Err(EstimationError::IncompleteDerivation(entry));
    }
    Ok(())
}

impl DerivationCorpus {
    pub fn new(skeleton: Wcfg, entries: Vec<CorpusEntry>) -> Result<Self, EstimationError> {
        let mut total = Rational::zero();
        let mut rule_used = vec![false; skeleton.rules().len()];
        for (i, e) in entries.iter().enumerate() {
            if !e.weight.is_positive() {
                return Err(EstimationError::NonpositiveWeight(i));
            }
            check_derivation(&skeleton, i, &e.rules)?;
            total += &e.weight;
            for &r in &e.rules {
                rule_used[r] = true;
            }
        }
        if !total.is_one() {
            return Err(EstimationError::WeightsNotNormalized(format_rational(&total)));
        }
        let mut nt_used = vec![false; skeleton.nonterminals().len()];
        for (r, used) in skeleton.rules().iter().zip(&rule_used) {
            if *used {
                nt_used[r.lhs] = true;
            }
        }
        if let Some(a) = nt_used.iter().position(|u| !u) {
            return Err(EstimationError::UnusedNonterminal(skeleton.nonterminals()[a].clone()));
        }
        if let Some(r) = rule_used.iter().position(|u| !u) {
            return Err(EstimationError::UnusedRule(r));
        }
        Ok(DerivationCorpus { skeleton, entries })
    }

    pub fn skeleton(&self) -> &Wcfg {
        &self.skeleton
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn to_json(&self) -> String {
        let raw = RawCorpus {
            skeleton: self.skeleton.to_string(),
            entries: self
                .entries
                .iter()
                .map(|e| RawEntry { rules: e.rules.clone(), weight: format_rational(&e.weight) })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("corpus serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    rules: Vec<usize>,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct RawCorpus {
    skeleton: String,
    entries: Vec<RawEntry>,
}

/// Reads `{"skeleton": grammar text, "entries": [{"rules": [..], "weight": "a/b"}]}`.
pub fn parse_corpus(json: &str) -> Result<DerivationCorpus, EstimationError> {
    let raw: RawCorpus = serde_json::from_str(json).map_err(|e| EstimationError::Json(e.to_string()))?;
    let skeleton = parse_skeleton(&raw.skeleton)?;
    let entries = raw
        .entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let weight = parse_rational(&e.weight).map_err(|_| EstimationError::NonpositiveWeight(i))?;
            Ok(CorpusEntry { rules: e.rules, weight })
        })
        .collect::<Result<_, EstimationError>>()?;
    DerivationCorpus::new(skeleton, entries)
}

/// `p(A -> g) = sum P(pi) C(A -> g, pi) / sum P(pi) C(A, pi)`.
pub fn estimate(corpus: &DerivationCorpus) -> Result<Wcfg, EstimationError> {
    let g = corpus.skeleton();
    let mut rule_count = vec![Rational::zero(); g.rules().len()];
    for e in corpus.entries() {
        for &r in &e.rules {
            rule_count[r] += &e.weight;
        }
    }
    let mut nt_count = vec![Rational::zero(); g.nonterminals().len()];
    for (r, c) in g.rules().iter().zip(&rule_count) {
        nt_count[r.lhs] += c;
    }
    let mut weights = Vec::with_capacity(rule_count.len());
    for (i, (r, c)) in g.rules().iter().zip(rule_count).enumerate() {
        if nt_count[r.lhs].is_zero() {
            return Err(EstimationError::ZeroDenominator(g.nonterminals()[r.lhs].clone()));
        }
        if c.is_zero() {
            return Err(EstimationError::UnusedRule(i));
        }
        weights.push(c / &nt_count[r.lhs]);
    }
    Ok(g.with_weights(weights)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EstimationVerdict {
    pub consistent: bool,
    pub noncritical: bool,
}

/// Consistent when every variable of the SNF system has value exactly 1;
/// noncritical when the system has no critical SCC.
pub fn verify_estimated(g: &Wcfg) -> Result<EstimationVerdict, EstimationError> {
    if classify(g) != GrammarClass::ProperScfg {
        return Err(EstimationError::NotProper);
    }
    let p = build_system(&to_snf(g));
    let crit = criticality(&p)?;
    Ok(EstimationVerdict {
        consistent: crit.one_variables().len() == p.len(),
        noncritical: crit.critical_sccs().is_empty(),
    })
}

/// Samples `entries` complete leftmost derivations of the proper grammar `g`,
/// redrawing any that exceed `step_cap` rule applications, with random
/// positive weights normalized to 1. The skeleton is `g` restricted to the
/// rules and nonterminals that occur, so the corpus invariants hold.
pub fn sample_corpus(g: &Wcfg, entries: usize, step_cap: usize, seed: u64) -> Result<DerivationCorpus, EstimationError> {
    if classify(g) != GrammarClass::ProperScfg {
        return Err(EstimationError::NotProper);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choices: Vec<(Vec<usize>, WeightedIndex<f64>)> = (0..g.nonterminals().len())
        .map(|a| {
            let rules: Vec<usize> = g.rules_of(a).collect();
            let w: Vec<f64> = rules.iter().map(|&r| g.rules()[r].weight.to_f64().unwrap_or(0.0)).collect();
            (rules, WeightedIndex::new(&w).expect("proper grammar has positive weights"))
        })
        .collect();
    let mut derivations = Vec::with_capacity(entries);
    let max_attempts = 1000 * entries.max(1);
    let mut attempts = 0;
    while derivations.len() < entries {
        attempts += 1;
        if attempts > max_attempts {
            return Err(EstimationError::SamplingFailed(max_attempts));
        }
        let mut pending = vec![Symbol::Nonterminal(g.start())];
        let mut used = Vec::new();
        let mut complete = true;
        while let Some(sym) = pending.pop() {
            if let Symbol::Nonterminal(a) = sym {
                if used.len() >= step_cap {
                    complete = false;
                    break;
                }
                let (rules, dist) = &choices[a];
                let r = rules[dist.sample(&mut rng)];
                used.push(r);
                pending.extend(g.rules()[r].rhs.iter().rev());
            }
        }
        if complete {
            derivations.push(used);
        }
    }

    let mut rule_used = vec![false; g.rules().len()];
    for d in &derivations {
        for &r in d {
            rule_used[r] = true;
        }
    }
    let mut nt_map = vec![usize::MAX; g.nonterminals().len()];
    let mut names = Vec::new();
    for (r, used) in g.rules().iter().zip(&rule_used) {
        if *used && nt_map[r.lhs] == usize::MAX {
            nt_map[r.lhs] = names.len();
            names.push(g.nonterminals()[r.lhs].clone());
        }
    }
    let mut rule_map = vec![usize::MAX; g.rules().len()];
    let mut rules = Vec::new();
    for (i, r) in g.rules().iter().enumerate() {
        if rule_used[i] {
            rule_map[i] = rules.len();
            let rhs = r
                .rhs
                .iter()
                .map(|s| match *s {
                    Symbol::Nonterminal(b) => Symbol::Nonterminal(nt_map[b]),
                    t => t,
                })
                .collect();
            rules.push(Rule { lhs: nt_map[r.lhs], rhs, weight: Rational::one() });
        }
    }
    let skeleton = Wcfg::new(names, g.terminals().to_vec(), rules, nt_map[g.start()])?;
    let raw: Vec<u64> = (0..entries).map(|_| rng.gen_range(1..=20)).collect();
    let total: u64 = raw.iter().sum();
    let entries = derivations
        .into_iter()
        .zip(raw)
        .map(|(d, w)| CorpusEntry {
            rules: d.into_iter().map(|r| rule_map[r]).collect(),
            weight: Rational::new(w.into(), total.into()),
        })
        .collect();
    DerivationCorpus::new(skeleton, entries)
}
