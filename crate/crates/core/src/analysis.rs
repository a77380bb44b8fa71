//! Qualitative analysis of probabilistic polynomial systems: variables with
//! value exactly 0 or exactly 1, critical SCCs, critical depth, and the
//! probability tweak that removes criticality.
//!
//! Every decision here is exact. Spectral-radius questions are answered by two
//! rational procedures and never by computing an eigenvalue:
//! `rho(M) < 1` iff `(I - M)^{-1}` exists and is nonnegative, and for an
//! irreducible `M >= 0`, `rho(M) = 1` iff `M u = u` has a solution `u >= 0`
//! with `sum(u) = 1`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::equations::{build_system, scc_dag, Polynomial, PolySystem, SccDag};
use crate::exactmath::{inverse_if_nonneg, nonneg_solution_exists, pow2, RatMatrix, Rational};
use crate::grammar::{encoding_size, Kind, SnfWcfg, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("system is not probabilistic (some polynomial has coefficient sum above 1)")]
    NotPps,
    #[error("epsilon must lie in (0, 1]")]
    InvalidEpsilon,
    #[error("critical SCC containing {0} has no internal unit rule")]
    NoInternalLRule(String),
    #[error("tweaked grammar is still critical")]
    StillCritical,
}

/// Variables whose least fixed point value is 0.
///
/// A variable is nonzero iff its polynomial has a positive constant or a
/// monomial whose factors are all nonzero; the nonzero set is the least
/// fixpoint of that rule.
pub fn zero_variables(p: &PolySystem) -> BTreeSet<usize> {
    let n = p.len();
    let mut nonzero = vec![false; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if nonzero[i] {
                continue;
            }
            let poly = p.poly(i);
            if poly.constant.is_positive() || poly.monomials.iter().any(|m| m.factors.iter().all(|&f| nonzero[f])) {
                nonzero[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&i| !nonzero[i]).collect()
}

/// The system after eliminating zero variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSystem {
    pub system: PolySystem,
    /// Original index of each surviving variable.
    pub original: Vec<usize>,
}

impl ReducedSystem {
    /// Reduced index of an original variable, if it survived.
    pub fn reduced_index(&self, original: usize) -> Option<usize> {
        self.original.binary_search(&original).ok()
    }

    /// Expands a reduced solution to the original indexing, zero elsewhere.
    pub fn expand(&self, values: &[Rational], original_len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); original_len];
        for (r, &o) in self.original.iter().enumerate() {
            out[o] = values[r].clone();
        }
        out
    }
}

/// Substitutes 0 for every zero variable and drops their equations.
pub fn remove_zeros(p: &PolySystem) -> ReducedSystem {
    let zeros = zero_variables(p);
    let original: Vec<usize> = (0..p.len()).filter(|i| !zeros.contains(i)).collect();
    let mut new_index = vec![usize::MAX; p.len()];
    for (r, &o) in original.iter().enumerate() {
        new_index[o] = r;
    }
    let polys = original
        .iter()
        .map(|&o| {
            let poly = p.poly(o);
            let terms = poly
                .monomials
                .iter()
                .filter(|m| m.factors.iter().all(|f| !zeros.contains(f)))
                .map(|m| (m.coeff.clone(), m.factors.iter().map(|&f| new_index[f]).collect()));
            Polynomial::new(poly.constant.clone(), terms)
        })
        .collect();
    let names = original.iter().map(|&o| p.names()[o].clone()).collect();
    ReducedSystem { system: PolySystem::new(names, polys).expect("reduction keeps indices valid"), original }
}

/// Per-SCC qualitative classification of a PPS (computed on the zero-free part).
#[derive(Debug, Clone)]
pub struct Criticality {
    pub reduced: ReducedSystem,
    pub dag: SccDag,
    /// Reduced variables whose value is exactly 1.
    pub one: Vec<bool>,
    pub critical: Vec<bool>,
    /// Longest chain of critical SCCs starting at or below each SCC.
    pub chain: Vec<usize>,
}

/// `rho(M) <= 1` for an irreducible (or 1x1) nonnegative block.
fn spectral_radius_at_most_one(block: &RatMatrix) -> bool {
    inverse_if_nonneg(block).is_inverse() || has_unit_perron_vector(block)
}

/// Feasibility of `{M u = u, sum(u) = 1, u >= 0}`.
fn has_unit_perron_vector(block: &RatMatrix) -> bool {
    let k = block.rows();
    let mut rows: Vec<Vec<Rational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { &block[(i, j)] - Rational::one() } else { block[(i, j)].clone() })
                .collect()
        })
        .collect();
    rows.push(vec![Rational::one(); k]);
    let mut rhs = vec![Rational::zero(); k];
    rhs.push(Rational::one());
    nonneg_solution_exists(&RatMatrix::from_rows(rows), &rhs)
}

pub fn criticality(p: &PolySystem) -> Result<Criticality, AnalysisError> {
    if !p.is_pps() {
        return Err(AnalysisError::NotPps);
    }
    let reduced = remove_zeros(p);
    let sys = &reduced.system;
    let dag = scc_dag(sys);
    let ones = vec![Rational::one(); sys.len()];
    let jac = sys.jacobian(&ones).expect("dimension matches").to_dense();
    let mut one = vec![false; sys.len()];
    let mut critical = vec![false; dag.len()];
    let mut chain = vec![0usize; dag.len()];
    let order: Vec<usize> = dag.bottom_up().collect();
    for s in order {
        let members = &dag.members[s];
        let lower_all_one = dag.below[s].iter().all(|&v| one[v]);
        let rows_proper = members.iter().all(|&v| sys.poly(v).coefficient_sum().is_one());
        let block = jac.submatrix(members, members);
        let is_one = lower_all_one && rows_proper && spectral_radius_at_most_one(&block);
        if is_one {
            for &v in members {
                one[v] = true;
            }
        }
        critical[s] = is_one && has_unit_perron_vector(&block);
        let below = dag.successors[s].iter().map(|&t| chain[t]).max().unwrap_or(0);
        chain[s] = below + usize::from(critical[s]);
    }
    Ok(Criticality { reduced, dag, one, critical, chain })
}

impl Criticality {
    pub fn depth(&self) -> usize {
        self.chain.iter().copied().max().unwrap_or(0)
    }

    /// Original indices of variables with value 1.
    pub fn one_variables(&self) -> BTreeSet<usize> {
        (0..self.one.len()).filter(|&r| self.one[r]).map(|r| self.reduced.original[r]).collect()
    }

    /// Critical SCCs as sorted sets of original variable indices.
    pub fn critical_sccs(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.dag.len())
            .filter(|&s| self.critical[s])
            .map(|s| self.dag.members[s].iter().map(|&r| self.reduced.original[r]).collect())
            .collect();
        out.sort();
        out
    }

    /// Critical SCCs with no critical SCC below them (original indices).
    pub fn bottom_critical_sccs(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.dag.len())
            .filter(|&s| self.critical[s] && self.chain[s] == 1)
            .map(|s| self.dag.members[s].iter().map(|&r| self.reduced.original[r]).collect())
            .collect();
        out.sort();
        out
    }
}

/// Variables with value exactly 1.
pub fn one_variables(p: &PolySystem) -> Result<BTreeSet<usize>, AnalysisError> {
    Ok(criticality(p)?.one_variables())
}

/// Critical SCCs, each as a sorted list of variable indices.
pub fn critical_sccs(p: &PolySystem) -> Result<Vec<Vec<usize>>, AnalysisError> {
    Ok(criticality(p)?.critical_sccs())
}

pub fn critical_depth(p: &PolySystem) -> Result<usize, AnalysisError> {
    Ok(criticality(p)?.depth())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub zero: Vec<String>,
    pub one: Vec<String>,
    pub critical_sccs: Vec<Vec<String>>,
    pub critical_depth: usize,
    pub encoding_size: u64,
}

/// Full qualitative report for the system of an SNF grammar.
pub fn analyze(g: &SnfWcfg) -> Result<AnalysisReport, AnalysisError> {
    let p = build_system(g);
    let crit = criticality(&p)?;
    let name = |i: &usize| p.names()[*i].clone();
    Ok(AnalysisReport {
        zero: zero_variables(&p).iter().map(name).collect(),
        one: crit.one_variables().iter().map(name).collect(),
        critical_sccs: crit.critical_sccs().iter().map(|s| s.iter().map(name).collect()).collect(),
        critical_depth: crit.depth(),
        encoding_size: encoding_size(g),
    })
}

/// Result of [`tweak_grammar`].
#[derive(Debug, Clone)]
pub struct Tweak {
    pub grammar: SnfWcfg,
    /// The reduction factor `delta`; `None` when the input was already noncritical.
    pub delta: Option<Rational>,
    /// Indices of the rules whose weight was multiplied by `1 - delta`.
    pub changed_rules: Vec<usize>,
    pub critical_depth: usize,
    pub encoding_size: u64,
}

/// `delta = 2^{-(14|G|+3) 2^c} eps^{2^c}` as an exact rational.
pub fn tweak_delta(g_size: u64, eps: &Rational, depth: usize) -> Rational {
    let reps = 1u64 << depth;
    let exponent = (14 * g_size + 3) * reps;
    pow2(-(exponent as i64)) * num_traits::pow(eps.clone(), reps as usize)
}

/// Removes criticality: in every bottom-critical SCC, the first internal unit
/// rule (by left then right nonterminal name) gets weight `p (1 - delta)`.
pub fn tweak_grammar(g: &SnfWcfg, eps: &Rational) -> Result<Tweak, AnalysisError> {
    if !eps.is_positive() || *eps > Rational::one() {
        return Err(AnalysisError::InvalidEpsilon);
    }
    let p = build_system(g);
    let crit = criticality(&p)?;
    let depth = crit.depth();
    let size = encoding_size(g);
    if depth == 0 {
        return Ok(Tweak { grammar: g.clone(), delta: None, changed_rules: vec![], critical_depth: 0, encoding_size: size });
    }
    let delta = tweak_delta(size, eps, depth);
    let factor = Rational::one() - &delta;
    let mut weights: Vec<Rational> = g.rules().iter().map(|r| r.weight.clone()).collect();
    let mut changed = Vec::new();
    for scc in crit.bottom_critical_sccs() {
        let inside: BTreeSet<usize> = scc.iter().copied().collect();
        let chosen = g
            .rules()
            .iter()
            .enumerate()
            .filter(|(_, r)| g.kind(r.lhs) == Kind::L && inside.contains(&r.lhs))
            .filter_map(|(i, r)| match r.rhs.as_slice() {
                [Symbol::Nonterminal(b)] if inside.contains(b) => Some((i, r.lhs, *b)),
                _ => None,
            })
            .min_by(|x, y| {
                let key = |&(i, a, b): &(usize, usize, usize)| (g.nonterminals()[a].clone(), g.nonterminals()[b].clone(), i);
                key(x).cmp(&key(y))
            });
        let Some((rule, _, _)) = chosen else {
            return Err(AnalysisError::NoInternalLRule(g.nonterminals()[scc[0]].clone()));
        };
        weights[rule] *= &factor;
        changed.push(rule);
    }
    changed.sort_unstable();
    let grammar = g.with_weights(weights).expect("scaled weights stay positive");
    if criticality(&build_system(&grammar))?.depth() != 0 {
        return Err(AnalysisError::StillCritical);
    }
    Ok(Tweak { grammar, delta: Some(delta), changed_rules: changed, critical_depth: depth, encoding_size: size })
}
