//! Newton's method on monotone polynomial systems: the exact Newton operator,
//! rounded-down Newton iteration, the precision parameters that certify its
//! output, independent Kleene and Monte-Carlo oracles, and the end-to-end
//! regular-language probability pipeline.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{criticality, remove_zeros, tweak_grammar, AnalysisError, ReducedSystem};
use crate::automata::Dfa;
use crate::equations::{build_system, scc_dag, EquationError, Polynomial, PolySystem, SccDag};
use crate::exactmath::{ceil_log2, format_rational, round_down_dyadic, solve_linear, DyadicVector, MathError, RatMatrix, RatVector, Rational};
use crate::grammar::{classify, encoding_size, to_snf, GrammarClass, Symbol, Wcfg};
use crate::product::{accepting_triples, intersect, ProductError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("I - B(z) is singular at the current iterate")]
    SingularJacobian,
    #[error("adaptive precision exceeded {max_h} bits without agreement")]
    IterationBudgetExceeded { max_h: u32 },
    #[error("grammar is not stochastic (some nonterminal has total weight above 1)")]
    NotScfg,
    #[error("epsilon must lie in (0, 1]")]
    InvalidEpsilon,
    #[error("unknown nonterminal {0:?}")]
    UnknownNonterminal(String),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

/// How precision is chosen for rounded Newton iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// Fixed `h` from the noncritical bound; the answer is certified.
    CertifiedNoncritical,
    /// Fixed `h` from the critical-depth bound, run on the tweaked grammar built with `eps`.
    CertifiedTweaked { eps: Rational },
    /// Doubles `h` until two successive answers agree within `eps / 2`. Not certified.
    Adaptive { eps: Rational, max_h: u32, strategy: Strategy },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::CertifiedNoncritical => "certified-noncritical",
            Mode::CertifiedTweaked { .. } => "certified-tweaked",
            Mode::Adaptive { .. } => "adaptive",
        }
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self, Mode::Adaptive { .. })
    }
}

impl Serialize for Mode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Adaptive-mode solving strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Newton on the whole system.
    #[default]
    Whole,
    /// SCC by SCC, bottom-up, substituting already-solved lower values.
    Decomposed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonConfig {
    /// Rounding parameter; iterates are multiples of `2^-(h+2)`.
    pub h: u32,
    /// Iteration cap per run; `h + 1` in certified modes.
    pub max_iters: usize,
    pub mode: Mode,
}

pub const DEFAULT_MAX_H: u32 = 1 << 15;

impl NewtonConfig {
    pub fn certified(h: u32) -> Self {
        NewtonConfig { h, max_iters: h as usize + 1, mode: Mode::CertifiedNoncritical }
    }

    pub fn certified_tweaked(h: u32, eps: Rational) -> Self {
        NewtonConfig { h, max_iters: h as usize + 1, mode: Mode::CertifiedTweaked { eps } }
    }

    /// Adaptive run aiming at `eps`, starting a few bits beyond `log2(1/eps)`.
    pub fn adaptive(eps: Rational) -> Self {
        let h = (ceil_log2(&eps.recip()).max(0) as u32 + 4).max(8);
        NewtonConfig {
            h,
            max_iters: h as usize + 1,
            mode: Mode::Adaptive { eps, max_h: DEFAULT_MAX_H, strategy: Strategy::Whole },
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        if let Mode::Adaptive { strategy: s, .. } = &mut self.mode {
            *s = strategy;
        }
        self
    }
}

fn rational_str<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn opt_rational_str<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTrace {
    /// Rounding parameter of the final run.
    pub h: u32,
    pub mode: Mode,
    pub certified: bool,
    /// `x^[0] = 0, x^[1], ...` of the final run.
    pub iterates: Vec<DyadicVector>,
    /// `||P(x) - x||_inf` at the final iterate.
    #[serde(serialize_with = "rational_str")]
    pub residual: Rational,
    #[serde(serialize_with = "opt_rational_str")]
    pub certified_error: Option<Rational>,
    /// Every `h` tried, in order (a single entry outside adaptive mode).
    pub schedule: Vec<u32>,
    /// Newton steps in the final run, summed over SCCs when decomposed.
    pub steps: usize,
}

impl SolveTrace {
    pub fn last(&self) -> &DyadicVector {
        self.iterates.last().expect("trace starts with the zero vector")
    }

    pub fn solution(&self) -> RatVector {
        self.last().to_rationals()
    }

    /// Newton steps taken in the final run.
    pub fn iterations(&self) -> usize {
        self.steps
    }
}

/// Newton operator for a fixed system; the Jacobian solve is block
/// triangular along the SCC DAG, which is exact and equal to a dense solve.
pub struct Newton<'a> {
    system: &'a PolySystem,
    dag: SccDag,
}

impl<'a> Newton<'a> {
    pub fn new(system: &'a PolySystem) -> Self {
        Newton { system, dag: scc_dag(system) }
    }

    /// `N(z) = z + (I - B(z))^{-1} (P(z) - z)`.
    pub fn step(&self, z: &[Rational]) -> Result<RatVector, SolverError> {
        let p = self.system;
        let pz = p.evaluate(z)?;
        let b = p.jacobian(z)?;
        let mut delta = vec![Rational::zero(); p.len()];
        let mut local = vec![usize::MAX; p.len()];
        for s in self.dag.bottom_up() {
            let members = &self.dag.members[s];
            for (k, &v) in members.iter().enumerate() {
                local[v] = k;
            }
            let size = members.len();
            let mut a = RatMatrix::identity(size);
            let mut rhs = Vec::with_capacity(size);
            for (k, &v) in members.iter().enumerate() {
                let mut r = &pz[v] - &z[v];
                for (j, bij) in &b.rows[v] {
                    if self.dag.scc_of[*j] == s {
                        a[(k, local[*j])] -= bij;
                    } else if !delta[*j].is_zero() {
                        r += bij * &delta[*j];
                    }
                }
                rhs.push(r);
            }
            let sol = solve_linear(&a, &rhs).map_err(|e| match e {
                MathError::SingularMatrix => SolverError::SingularJacobian,
                other => unreachable!("block solve: {other}"),
            })?;
            for (&v, x) in members.iter().zip(sol) {
                delta[v] = x;
            }
        }
        Ok(z.iter().zip(delta).map(|(zi, di)| zi + di).collect())
    }
}

/// One exact Newton step.
pub fn newton_step(p: &PolySystem, z: &[Rational]) -> Result<RatVector, SolverError> {
    Newton::new(p).step(z)
}

/// Exact Newton iterates `x^(0) = 0, ..., x^(k)`, without rounding.
pub fn exact_newton_iterates(p: &PolySystem, k: usize) -> Result<Vec<RatVector>, SolverError> {
    let newton = Newton::new(p);
    let mut out = vec![vec![Rational::zero(); p.len()]];
    for _ in 0..k {
        let next = newton.step(out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

fn residual(p: &PolySystem, x: &[Rational]) -> Rational {
    let px = p.evaluate(x).expect("dimension matches");
    px.iter().zip(x).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rational::zero)
}

/// Fixed-precision run: `x^[k+1] = round_down(N(x^[k]), h + 2)`. Stops early
/// once the rounded map reaches a fixed point, since later iterates repeat it.
fn run_fixed(p: &PolySystem, h: u32, max_iters: usize) -> Result<(Vec<DyadicVector>, usize), SolverError> {
    let newton = Newton::new(p);
    let bits = h + 2;
    let mut iterates = vec![DyadicVector::zeros(p.len(), bits)];
    for _ in 0..max_iters {
        let current = iterates.last().expect("nonempty").to_rationals();
        let next = round_down_dyadic(&newton.step(&current)?, bits);
        let done = &next == iterates.last().expect("nonempty");
        iterates.push(next);
        if done {
            break;
        }
    }
    let steps = iterates.len() - 1;
    Ok((iterates, steps))
}

/// Decomposed fixed-precision run: each SCC is iterated to its own rounded
/// fixed point with lower SCCs frozen at their rounded values.
fn run_decomposed(p: &PolySystem, h: u32, max_iters: usize) -> Result<(Vec<DyadicVector>, usize), SolverError> {
    let dag = scc_dag(p);
    let bits = h + 2;
    let mut values = vec![Rational::zero(); p.len()];
    let mut local = vec![usize::MAX; p.len()];
    let mut steps = 0;
    for s in dag.bottom_up() {
        let members = &dag.members[s];
        for (k, &v) in members.iter().enumerate() {
            local[v] = k;
        }
        let polys: Vec<Polynomial> = members
            .iter()
            .map(|&v| {
                let poly = p.poly(v);
                let mut constant = poly.constant.clone();
                let mut terms = Vec::new();
                for m in &poly.monomials {
                    let mut coeff = m.coeff.clone();
                    let mut inner = Vec::new();
                    for &f in &m.factors {
                        if dag.scc_of[f] == s {
                            inner.push(local[f]);
                        } else {
                            coeff *= &values[f];
                        }
                    }
                    if coeff.is_zero() {
                        continue;
                    }
                    if inner.is_empty() {
                        constant += coeff;
                    } else {
                        terms.push((coeff, inner));
                    }
                }
                Polynomial::new(constant, terms)
            })
            .collect();
        let names = members.iter().map(|&v| p.names()[v].clone()).collect();
        let sub = PolySystem::new(names, polys)?;
        let (runs, n) = run_fixed(&sub, h, max_iters)?;
        steps += n;
        let last = runs.last().expect("nonempty");
        for (k, &v) in members.iter().enumerate() {
            values[v] = last.value(k);
        }
    }
    Ok((vec![DyadicVector::zeros(p.len(), bits), round_down_dyadic(&values, bits)], steps))
}

fn watched_value(x: &DyadicVector, watch: &[usize]) -> Rational {
    watch.iter().fold(Rational::zero(), |acc, &i| acc + x.value(i))
}

fn distance(a: &DyadicVector, b: &DyadicVector, watch: &[usize]) -> Rational {
    if watch.is_empty() {
        (0..a.len()).map(|i| (a.value(i) - b.value(i)).abs()).max().unwrap_or_else(Rational::zero)
    } else {
        (watched_value(a, watch) - watched_value(b, watch)).abs()
    }
}

/// Rounded-down Newton iteration from 0. Requires the zero variables to have
/// been removed (least fixed point strictly positive).
pub fn rounded_newton(p: &PolySystem, cfg: &NewtonConfig) -> Result<SolveTrace, SolverError> {
    rounded_newton_watching(p, cfg, &[])
}

/// As [`rounded_newton`]; in adaptive mode the agreement test looks at the sum
/// of the `watch` coordinates (all coordinates, in sup norm, when empty).
pub fn rounded_newton_watching(p: &PolySystem, cfg: &NewtonConfig, watch: &[usize]) -> Result<SolveTrace, SolverError> {
    match &cfg.mode {
        Mode::CertifiedNoncritical | Mode::CertifiedTweaked { .. } => {
            let (iterates, steps) = run_fixed(p, cfg.h, cfg.max_iters)?;
            let res = residual(p, &iterates.last().expect("nonempty").to_rationals());
            Ok(SolveTrace {
                h: cfg.h,
                mode: cfg.mode.clone(),
                certified: true,
                iterates,
                residual: res,
                certified_error: None,
                schedule: vec![cfg.h],
                steps,
            })
        }
        Mode::Adaptive { eps, max_h, strategy } => {
            let tolerance = eps / Rational::from_integer(2.into());
            let run = |h: u32| match strategy {
                Strategy::Whole => run_fixed(p, h, h as usize + 1),
                Strategy::Decomposed => run_decomposed(p, h, h as usize + 1),
            };
            let mut h = cfg.h.max(1);
            let mut schedule = vec![h];
            let (mut previous, _) = run(h)?;
            let mut steps;
            loop {
                if h >= *max_h {
                    return Err(SolverError::IterationBudgetExceeded { max_h: *max_h });
                }
                h = (h * 2).min(*max_h);
                schedule.push(h);
                let (current, n) = run(h)?;
                let agree = distance(previous.last().expect("nonempty"), current.last().expect("nonempty"), watch) <= tolerance;
                previous = current;
                steps = n;
                if agree {
                    break;
                }
            }
            let res = residual(p, &previous.last().expect("nonempty").to_rationals());
            Ok(SolveTrace {
                h,
                mode: cfg.mode.clone(),
                certified: false,
                iterates: previous,
                residual: res,
                certified_error: None,
                schedule,
                steps,
            })
        }
    }
}

/// `h = 14|G| + 3 + ceil(log2(1/eps) + log2(d))`.
pub fn required_h_noncritical(g_size: u64, d: usize, eps: &Rational) -> u64 {
    let d = Rational::from_integer(d.into());
    14 * g_size + 3 + ceil_log2(&(d / eps)).max(0) as u64
}

/// `h = ceil(log2(d) + (3 * 2^c + 1)(log2(1/eps) + 14|G| + 3))`.
pub fn required_h_critical(g_size: u64, d: usize, eps: &Rational, c: usize) -> u64 {
    let k = 3 * (1u64 << c) + 1;
    let d = Rational::from_integer(d.into());
    let inner = d / num_traits::pow(eps.clone(), k as usize);
    k * (14 * g_size + 3) + ceil_log2(&inner).max(0) as u64
}

/// Exact value iteration `x <- P(x)` from 0.
pub fn kleene_oracle(p: &PolySystem, iters: usize) -> RatVector {
    let mut x = vec![Rational::zero(); p.len()];
    for _ in 0..iters {
        x = p.evaluate(&x).expect("dimension matches");
    }
    x
}

/// Value iteration in fixed point: coefficients, products and iterates are
/// floored to multiples of `2^-bits` after every operation. Each step stays
/// below the exact Kleene iterate, hence below the least fixed point. Stops
/// early once the floored map reaches a fixed point.
pub fn kleene_rounded(p: &PolySystem, iters: usize, bits: u32) -> RatVector {
    let scale = BigInt::one() << bits;
    let fix = |r: &Rational| (r.numer() * &scale).div_floor(r.denom());
    let polys: Vec<(BigInt, Vec<(BigInt, Vec<usize>)>)> = p
        .polys()
        .iter()
        .map(|q| (fix(&q.constant), q.monomials.iter().map(|m| (fix(&m.coeff), m.factors.clone())).collect()))
        .collect();
    let mut x = vec![BigInt::zero(); p.len()];
    for _ in 0..iters {
        let next: Vec<BigInt> = polys
            .iter()
            .map(|(c, ms)| {
                let mut acc = c.clone();
                for (coeff, factors) in ms {
                    let mut t = coeff.clone();
                    for &f in factors {
                        t = (t * &x[f]) >> bits;
                    }
                    acc += t;
                }
                acc
            })
            .collect();
        if next == x {
            break;
        }
        x = next;
    }
    x.into_iter().map(|m| Rational::new(m, scale.clone())).collect()
}

/// Monte-Carlo estimate of an acceptance probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonteCarloEstimate {
    pub accepted: u64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    pub fn fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accepted as f64 / self.trials as f64
        }
    }
}

/// Samples leftmost derivations from `a` and runs `dfa` on their yields.
/// Derivations longer than `step_cap` rule applications count as rejected,
/// as does the leftover mass `1 - p(A)` of sub-stochastic nonterminals.
pub fn sample_strings(
    g: &Wcfg,
    a: usize,
    dfa: &Dfa,
    trials: u64,
    step_cap: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, SolverError> {
    if classify(g) == GrammarClass::Wcfg {
        return Err(SolverError::NotScfg);
    }
    let symbol_of: Vec<usize> = g
        .terminals()
        .iter()
        .map(|t| dfa.symbol_index(t).ok_or_else(|| ProductError::AlphabetMismatch(t.clone())))
        .collect::<Result<_, _>>()?;
    // Per nonterminal: candidate rules, the last slot being "no rule".
    let choices: Vec<(Vec<usize>, Option<WeightedIndex<f64>>)> = (0..g.nonterminals().len())
        .map(|nt| {
            let rules: Vec<usize> = g.rules_of(nt).collect();
            let mut w: Vec<f64> = rules.iter().map(|&r| g.rules()[r].weight.to_f64().unwrap_or(0.0)).collect();
            w.push((Rational::one() - g.mass(nt)).to_f64().unwrap_or(0.0).max(0.0));
            (rules, WeightedIndex::new(&w).ok())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut stack: Vec<Symbol> = Vec::new();
    'trial: for _ in 0..trials {
        stack.clear();
        stack.push(Symbol::Nonterminal(a));
        let mut q = dfa.start();
        let mut steps = 0u64;
        while let Some(sym) = stack.pop() {
            match sym {
                Symbol::Terminal(t) => q = dfa.step(q, symbol_of[t]),
                Symbol::Nonterminal(nt) => {
                    steps += 1;
                    if steps > step_cap {
                        continue 'trial;
                    }
                    let (rules, dist) = &choices[nt];
                    let Some(dist) = dist else { continue 'trial };
                    let pick = dist.sample(&mut rng);
                    if pick == rules.len() {
                        continue 'trial;
                    }
                    stack.extend(g.rules()[rules[pick]].rhs.iter().rev());
                }
            }
        }
        if dfa.is_accepting(q) {
            accepted += 1;
        }
    }
    Ok(MonteCarloEstimate { accepted, trials })
}

/// User-facing precision policy for [`compute_regular_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    Adaptive,
    /// Certified; tweaks the grammar first when it is critical.
    Certified,
}

/// `q_A^{G,D}` bracketed as `[lo, hi]`.
#[derive(Debug, Clone, Serialize)]
pub struct RegularProbability {
    #[serde(serialize_with = "rational_str")]
    pub probability_lo: Rational,
    #[serde(serialize_with = "rational_str")]
    pub probability_hi: Rational,
    pub decimal: String,
    pub mode: Mode,
    pub certified: bool,
    /// Rounding parameter of the final run (0 when no iteration was needed).
    pub h: u32,
    pub iterations: usize,
    #[serde(serialize_with = "rational_str")]
    pub epsilon: Rational,
    /// The value is known exactly (`lo == hi`).
    pub exact: bool,
    pub critical_depth: usize,
    #[serde(skip)]
    pub trace: Option<SolveTrace>,
}

/// Options for [`compute_regular_probability_with`].
#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub mode: SolveMode,
    pub strategy: Strategy,
    /// Keep the full iterate trace in the result.
    pub keep_trace: bool,
}

/// Probability that `g`, started at `a`, generates a string accepted by `dfa`.
pub fn compute_regular_probability(
    g: &Wcfg,
    dfa: &Dfa,
    a: &str,
    eps: &Rational,
    mode: SolveMode,
) -> Result<RegularProbability, SolverError> {
    compute_regular_probability_with(g, dfa, a, eps, &PipelineOptions { mode, ..Default::default() })
}

pub fn compute_regular_probability_with(
    g: &Wcfg,
    dfa: &Dfa,
    a: &str,
    eps: &Rational,
    opts: &PipelineOptions,
) -> Result<RegularProbability, SolverError> {
    if classify(g) == GrammarClass::Wcfg {
        return Err(SolverError::NotScfg);
    }
    if !eps.is_positive() || *eps > Rational::one() {
        return Err(SolverError::InvalidEpsilon);
    }
    let start = g.nonterminal_index(a).ok_or_else(|| SolverError::UnknownNonterminal(a.to_string()))?;
    let snf = to_snf(g);
    let base = build_system(&snf);
    let crit = criticality(&base)?;
    let depth = crit.depth();
    let mode_label = |opts: &PipelineOptions| match opts.mode {
        SolveMode::Adaptive => Mode::Adaptive { eps: eps.clone(), max_h: DEFAULT_MAX_H, strategy: opts.strategy },
        SolveMode::Certified if depth == 0 => Mode::CertifiedNoncritical,
        SolveMode::Certified => Mode::CertifiedTweaked { eps: eps.clone() },
    };
    let exact_zero = |mode: Mode| RegularProbability {
        probability_lo: Rational::zero(),
        probability_hi: Rational::zero(),
        decimal: "0".into(),
        certified: mode.is_certified(),
        mode,
        h: 0,
        iterations: 0,
        epsilon: eps.clone(),
        exact: true,
        critical_depth: depth,
        trace: None,
    };
    let accepting = dfa.accepting_states();
    if accepting.is_empty() {
        return Ok(exact_zero(mode_label(opts)));
    }
    // Errors add up over accepting states; each coordinate gets its share.
    let eps_each = eps / Rational::from_integer(accepting.len().into());
    let size = encoding_size(&snf);
    let d = dfa.num_states();
    let (grammar, cfg) = match opts.mode {
        SolveMode::Adaptive => {
            let cfg = NewtonConfig::adaptive(eps_each.clone()).with_strategy(opts.strategy);
            (snf.clone(), cfg)
        }
        SolveMode::Certified if depth == 0 => {
            let h = required_h_noncritical(size, d, &eps_each);
            (snf.clone(), NewtonConfig::certified(h as u32))
        }
        SolveMode::Certified => {
            let tweak = tweak_grammar(&snf, &eps_each)?;
            let h = required_h_critical(size, d, &eps_each, depth);
            (tweak.grammar, NewtonConfig::certified_tweaked(h as u32, eps_each.clone()))
        }
    };
    let product = intersect(&grammar, dfa)?;
    let psys = build_system(product.grammar());
    let reduced: ReducedSystem = remove_zeros(&psys);
    let watch: Vec<usize> =
        accepting_triples(&product, start, dfa).into_iter().filter_map(|i| reduced.reduced_index(i)).collect();
    if watch.is_empty() {
        return Ok(exact_zero(cfg.mode.clone()));
    }
    let mut trace = rounded_newton_watching(&reduced.system, &cfg, &watch)?;
    if trace.certified {
        trace.certified_error = Some(eps_each.clone());
    }
    let lo = watched_value(trace.last(), &watch);
    let hi = (&lo + eps).min(Rational::one()).max(lo.clone());
    let certified = trace.certified;
    Ok(RegularProbability {
        decimal: crate::exactmath::format_decimal(&lo, decimal_digits(eps)),
        probability_lo: lo,
        probability_hi: hi,
        mode: cfg.mode.clone(),
        certified,
        h: trace.h,
        iterations: trace.iterations(),
        epsilon: eps.clone(),
        exact: false,
        critical_depth: depth,
        trace: opts.keep_trace.then_some(trace),
    })
}

fn decimal_digits(eps: &Rational) -> usize {
    // log10(2) < 0.302, so this many digits resolve eps.
    let bits = ceil_log2(&eps.recip()).max(0) as usize;
    bits * 302 / 1000 + 2
}
