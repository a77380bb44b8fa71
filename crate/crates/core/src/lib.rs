//! Exact computation of the probability that a stochastic context-free
//! grammar generates a string in a regular language, via rounded Newton
//! iteration on the grammar-automaton product.

pub mod analysis;
pub mod automata;
pub mod balance;
pub mod equations;
pub mod estimation;
pub mod exactmath;
pub mod grammar;
pub mod product;
pub mod solver;

pub use analysis::{analyze, criticality, one_variables, remove_zeros, tweak_grammar, zero_variables, AnalysisReport};
pub use automata::{build_pattern_dfa, parse_dfa, Dfa, PatternKind};
pub use equations::{build_system, scc_dag, PolySystem, Polynomial};
pub use exactmath::{parse_rational, DyadicVector, Rational};
pub use grammar::{bad_family, encoding_size, parse_grammar, to_snf, SnfWcfg, Wcfg};
pub use product::{intersect, ProductWcfg};
pub use solver::{compute_regular_probability, NewtonConfig, RegularProbability, SolveMode};

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Math(#[from] exactmath::MathError),
    #[error(transparent)]
    Grammar(#[from] grammar::GrammarError),
    #[error(transparent)]
    Dfa(#[from] automata::DfaError),
    #[error(transparent)]
    Product(#[from] product::ProductError),
    #[error(transparent)]
    Equation(#[from] equations::EquationError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error(transparent)]
    Balance(#[from] balance::BalanceError),
    #[error(transparent)]
    Estimation(#[from] estimation::EstimationError),
}
