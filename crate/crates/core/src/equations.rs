//! Monotone polynomial systems `x = P(x)` of degree at most two, their exact
//! evaluation and Jacobians, and the strongly connected component DAG of the
//! variable dependency graph.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use petgraph::graph::DiGraph;
use serde_json::{json, Value};

use crate::exactmath::{format_rational, int, RatMatrix, RatVector, Rational};
use crate::grammar::{Kind, SnfWcfg, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquationError {
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid polynomial: {0}")]
    Invalid(String),
}

/// `coeff * prod(factors)`, factors sorted, at most two of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub factors: Vec<usize>,
}

/// A polynomial with nonnegative coefficients: constant plus positive monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    pub constant: Rational,
    pub monomials: Vec<Monomial>,
}

impl Polynomial {
    /// Builds a canonical polynomial: merges equal monomials, drops zero
    /// coefficients, sorts by factors. Panics on negative coefficients.
    pub fn new(constant: Rational, terms: impl IntoIterator<Item = (Rational, Vec<usize>)>) -> Self {
        assert!(!constant.is_negative(), "monotone polynomials have nonnegative constants");
        let mut merged: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        let mut constant = constant;
        for (c, mut f) in terms {
            assert!(!c.is_negative(), "monotone polynomials have nonnegative coefficients");
            assert!(f.len() <= 2, "systems are at most quadratic");
            if c.is_zero() {
                continue;
            }
            if f.is_empty() {
                constant += c;
                continue;
            }
            f.sort_unstable();
            *merged.entry(f).or_insert_with(Rational::zero) += c;
        }
        Polynomial {
            constant,
            monomials: merged.into_iter().map(|(factors, coeff)| Monomial { coeff, factors }).collect(),
        }
    }

    pub fn zero() -> Self {
        Polynomial::default()
    }

    /// Constant plus all coefficients, i.e. the value at the all-ones vector.
    pub fn coefficient_sum(&self) -> Rational {
        self.monomials.iter().fold(self.constant.clone(), |acc, m| acc + &m.coeff)
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for m in &self.monomials {
            match m.factors.as_slice() {
                [i] => {
                    if !x[*i].is_zero() {
                        acc += &m.coeff * &x[*i];
                    }
                }
                [i, j] => {
                    if !x[*i].is_zero() && !x[*j].is_zero() {
                        acc += &m.coeff * &x[*i] * &x[*j];
                    }
                }
                _ => unreachable!(),
            }
        }
        acc
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        self.monomials.iter().flat_map(|m| m.factors.iter().copied()).collect()
    }
}

/// Sparse matrix with no explicit zeros, stored by rows as `(column, value)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or_else(Rational::zero, |(_, v)| v.clone())
    }

    pub fn to_dense(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m[(i, *j)] = v.clone();
            }
        }
        m
    }
}

/// `x = P(x)` with one variable per nonterminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySystem {
    names: Vec<String>,
    polys: Vec<Polynomial>,
}

impl PolySystem {
    pub fn new(names: Vec<String>, polys: Vec<Polynomial>) -> Result<Self, EquationError> {
        if names.len() != polys.len() {
            return Err(EquationError::Invalid("one polynomial per variable".into()));
        }
        let n = names.len();
        if polys.iter().any(|p| p.monomials.iter().any(|m| m.factors.iter().any(|&f| f >= n))) {
            return Err(EquationError::Invalid("monomial refers to an unknown variable".into()));
        }
        Ok(PolySystem { names, polys })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn poly(&self, i: usize) -> &Polynomial {
        &self.polys[i]
    }

    /// Probabilistic: every polynomial's coefficients and constant sum to at most 1.
    pub fn is_pps(&self) -> bool {
        let one = Rational::one();
        self.polys.iter().all(|p| p.coefficient_sum() <= one)
    }

    fn check_dim(&self, x: &[Rational]) -> Result<(), EquationError> {
        if x.len() != self.len() {
            return Err(EquationError::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        Ok(())
    }

    /// Exact `P(x)`.
    pub fn evaluate(&self, x: &[Rational]) -> Result<RatVector, EquationError> {
        self.check_dim(x)?;
        Ok(self.polys.iter().map(|p| p.eval(x)).collect())
    }

    /// Exact Jacobian `B(x)_{ij} = dP_i/dx_j`.
    pub fn jacobian(&self, x: &[Rational]) -> Result<SparseMatrix, EquationError> {
        self.check_dim(x)?;
        let rows = self
            .polys
            .iter()
            .map(|p| {
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                for m in &p.monomials {
                    match m.factors.as_slice() {
                        [i] => *row.entry(*i).or_insert_with(Rational::zero) += &m.coeff,
                        [i, j] if i == j => {
                            if !x[*i].is_zero() {
                                *row.entry(*i).or_insert_with(Rational::zero) += &m.coeff * &x[*i] * int(2);
                            }
                        }
                        [i, j] => {
                            if !x[*j].is_zero() {
                                *row.entry(*i).or_insert_with(Rational::zero) += &m.coeff * &x[*j];
                            }
                            if !x[*i].is_zero() {
                                *row.entry(*j).or_insert_with(Rational::zero) += &m.coeff * &x[*i];
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                row.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Ok(SparseMatrix { dim: self.len(), rows })
    }

    /// Dependency edges `i -> j` whenever `x_j` occurs in `P_i`.
    pub fn dependencies(&self, i: usize) -> BTreeSet<usize> {
        self.polys[i].variables()
    }

    /// Debug/golden JSON: `{variables, equations: [{constant, monomials: [[coeff, {var: exp}]]}]}`.
    pub fn to_json(&self) -> Value {
        let equations: Vec<Value> = self
            .polys
            .iter()
            .zip(&self.names)
            .map(|(p, name)| {
                let monomials: Vec<Value> = p
                    .monomials
                    .iter()
                    .map(|m| {
                        let mut exps: BTreeMap<&str, u32> = BTreeMap::new();
                        for &f in &m.factors {
                            *exps.entry(self.names[f].as_str()).or_default() += 1;
                        }
                        json!([format_rational(&m.coeff), exps])
                    })
                    .collect();
                json!({"variable": name, "constant": format_rational(&p.constant), "monomials": monomials})
            })
            .collect();
        json!({"variables": self.names, "equations": equations})
    }
}

/// One equation per nonterminal of an SNF grammar.
pub fn build_system(g: &SnfWcfg) -> PolySystem {
    let n = g.nonterminals().len();
    let mut terms: Vec<Vec<(Rational, Vec<usize>)>> = vec![Vec::new(); n];
    for r in g.rules() {
        let factors: Vec<usize> = r
            .rhs
            .iter()
            .filter_map(|s| match s {
                Symbol::Nonterminal(b) => Some(*b),
                Symbol::Terminal(_) => None,
            })
            .collect();
        debug_assert!(match g.kind(r.lhs) {
            Kind::L => factors.len() == 1,
            Kind::Q => factors.len() == 2,
            Kind::T => factors.is_empty(),
        });
        terms[r.lhs].push((r.weight.clone(), factors));
    }
    let polys = terms.into_iter().map(|t| Polynomial::new(Rational::zero(), t)).collect();
    PolySystem::new(g.nonterminals().to_vec(), polys).expect("grammar systems are well formed")
}

/// Condensation of the dependency graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDag {
    /// SCC id of each variable.
    pub scc_of: Vec<usize>,
    /// Variables of each SCC, sorted.
    pub members: Vec<Vec<usize>>,
    /// SCC ids, dependents before their dependencies.
    pub topo_order: Vec<usize>,
    /// Direct successor SCCs in the condensation.
    pub successors: Vec<BTreeSet<usize>>,
    /// `D(S)`: variables reachable from `S`, excluding `S` itself.
    pub below: Vec<BTreeSet<usize>>,
}

impl SccDag {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// SCC ids with every dependency processed before its dependents.
    pub fn bottom_up(&self) -> impl Iterator<Item = usize> + '_ {
        self.topo_order.iter().rev().copied()
    }

    /// Whether the SCC has an internal edge (a cycle through it).
    pub fn is_cyclic(&self, p: &PolySystem, s: usize) -> bool {
        let m = &self.members[s];
        m.len() > 1 || p.dependencies(m[0]).contains(&m[0])
    }
}

/// Tarjan condensation of the dependency graph of `p`.
pub fn scc_dag(p: &PolySystem) -> SccDag {
    let n = p.len();
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in p.dependencies(i) {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }
    // tarjan_scc lists components in reverse topological order: dependencies first.
    let comps = petgraph::algo::tarjan_scc(&graph);
    let k = comps.len();
    let mut scc_of = vec![0; n];
    let mut members = Vec::with_capacity(k);
    for (id, comp) in comps.iter().enumerate() {
        let mut vars: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        vars.sort_unstable();
        for &v in &vars {
            scc_of[v] = id;
        }
        members.push(vars);
    }
    let mut successors = vec![BTreeSet::new(); k];
    for i in 0..n {
        for j in p.dependencies(i) {
            if scc_of[i] != scc_of[j] {
                successors[scc_of[i]].insert(scc_of[j]);
            }
        }
    }
    let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for s in 0..k {
        let mut acc = BTreeSet::new();
        for &t in &successors[s] {
            debug_assert!(t < s, "successor SCCs come earlier in Tarjan order");
            acc.extend(members[t].iter().copied());
            acc.extend(below[t].iter().copied());
        }
        below[s] = acc;
    }
    SccDag { scc_of, members, topo_order: (0..k).rev().collect(), successors, below }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;
    use crate::grammar::{bad_family, to_snf, Wcfg};

    fn quadratic(a: Rational, c: Rational) -> PolySystem {
        PolySystem::new(vec!["x".into()], vec![Polynomial::new(c, [(a, vec![0, 0])])]).unwrap()
    }

    #[test]
    fn grammar_translation() {
        let g = Wcfg::from_named(&["S"], &["a"], "S", &[("S", &["S", "S"], rat(1, 2)), ("S", &["a"], rat(1, 2))]).unwrap();
        let p = build_system(&to_snf(&g));
        assert_eq!(p.len(), 3);
        assert!(p.is_pps());
        // x_S = 1/2 x_{S~1} + 1/2 x_{S~2}, x_{S~1} = x_S^2, x_{S~2} = 1
        assert_eq!(p.evaluate(&[int(1), int(1), int(1)]).unwrap(), vec![int(1); 3]);
        assert_eq!(p.poly(1).monomials, vec![Monomial { coeff: int(1), factors: vec![0, 0] }]);
        assert_eq!(p.poly(2).constant, int(1));
    }

    #[test]
    fn empty_rule_set_is_zero() {
        let g = Wcfg::from_named(&["S", "A"], &["a"], "S", &[("S", &["A"], int(1))]).unwrap();
        let p = build_system(&to_snf(&g));
        assert_eq!(*p.poly(1), Polynomial::zero());
    }

    #[test]
    fn weighted_system_not_pps() {
        let g = Wcfg::from_named(&["A"], &[], "A", &[("A", &["A"], int(2))]).unwrap();
        let p = build_system(&to_snf(&g));
        assert!(!p.is_pps());
        assert_eq!(p.evaluate(&[int(3)]).unwrap(), vec![int(6)]);
    }

    #[test]
    fn evaluation_examples() {
        let p = quadratic(rat(1, 2), rat(1, 2));
        assert_eq!(p.evaluate(&[int(0)]).unwrap(), vec![rat(1, 2)]);
        assert_eq!(p.evaluate(&[int(1)]).unwrap(), vec![int(1)]);
        let q = quadratic(rat(2, 3), rat(1, 3));
        assert_eq!(q.evaluate(&[rat(1, 2)]).unwrap(), vec![rat(1, 2)]);
        assert!(matches!(q.evaluate(&[]), Err(EquationError::DimensionMismatch { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let p = quadratic(rat(1, 2), rat(1, 2));
        assert_eq!(p.jacobian(&[int(1)]).unwrap().to_dense(), RatMatrix::from_rows(vec![vec![int(1)]]));
        let q = quadratic(rat(2, 3), rat(1, 3));
        assert_eq!(q.jacobian(&[rat(1, 2)]).unwrap().get(0, 0), rat(2, 3));
        let r = PolySystem::new(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec![
                Polynomial::new(int(0), [(int(1), vec![1, 2])]),
                Polynomial::new(int(1), []),
                Polynomial::new(int(1), []),
            ],
        )
        .unwrap();
        let b = r.jacobian(&[int(5), rat(1, 3), rat(1, 7)]).unwrap();
        assert_eq!(b.rows[0], vec![(1, rat(1, 7)), (2, rat(1, 3))]);
        // No explicit zeros at the origin.
        assert!(r.jacobian(&[int(0), int(0), int(0)]).unwrap().rows[0].is_empty());
    }

    #[test]
    fn monomials_merge() {
        let p = Polynomial::new(int(0), [(rat(1, 4), vec![1, 0]), (rat(1, 4), vec![0, 1]), (int(0), vec![0])]);
        assert_eq!(p.monomials, vec![Monomial { coeff: rat(1, 2), factors: vec![0, 1] }]);
    }

    #[test]
    fn scc_examples() {
        let dag = scc_dag(&quadratic(rat(1, 2), rat(1, 2)));
        assert_eq!(dag.members, vec![vec![0]]);
        assert!(dag.below[0].is_empty());
        let chain = PolySystem::new(
            vec!["x1".into(), "x2".into()],
            vec![Polynomial::new(int(0), [(int(1), vec![1])]), Polynomial::new(rat(1, 2), [])],
        )
        .unwrap();
        let dag = scc_dag(&chain);
        assert_eq!(dag.len(), 2);
        let s1 = dag.scc_of[0];
        assert_eq!(dag.below[s1], BTreeSet::from([1]));
        assert_eq!(dag.topo_order[0], s1);
    }

    #[test]
    fn family_sccs() {
        let g = to_snf(&bad_family(2));
        let p = build_system(&g);
        let dag = scc_dag(&p);
        let a0 = g.nonterminal_index("A_0").unwrap();
        let a1 = g.nonterminal_index("A_1").unwrap();
        let a2 = g.nonterminal_index("A_2").unwrap();
        let s0 = &dag.members[dag.scc_of[a0]];
        let s1 = &dag.members[dag.scc_of[a1]];
        // each A_i (i < n) shares its SCC only with its binary dispatch helper
        assert_eq!(s0.len(), 2);
        assert_eq!(s1.len(), 2);
        assert_ne!(dag.scc_of[a0], dag.scc_of[a1]);
        assert_eq!(dag.members[dag.scc_of[a2]], vec![a2]);
        assert!(dag.below[dag.scc_of[a0]].contains(&a2));
        for name in ["B_0", "B_1", "B_2"] {
            let b = g.nonterminal_index(name).unwrap();
            assert_eq!(dag.members[dag.scc_of[b]], vec![b]);
            assert!(!dag.is_cyclic(&p, dag.scc_of[b]));
        }
    }

    #[test]
    fn json_report() {
        let v = quadratic(rat(1, 2), rat(1, 2)).to_json();
        assert_eq!(v["equations"][0]["constant"], "1/2");
        assert_eq!(v["equations"][0]["monomials"][0], json!(["1/2", {"x": 2}]));
    }
}
