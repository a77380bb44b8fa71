//! Command-line front end. [`run_cli`] never exits the process; it returns
//! the exit code and the text destined for standard output and error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use regprob::analysis::{analyze, criticality, tweak_grammar};
use regprob::automata::{build_pattern_dfa, parse_dfa, Dfa, PatternKind};
use regprob::balance::{balance_defect, is_balanced_vector, TripleVector};
use regprob::equations::build_system;
use regprob::estimation::{estimate, parse_corpus, verify_estimated};
use regprob::exactmath::{format_decimal, format_rational, parse_rational, Rational};
use regprob::grammar::{bad_family, parse_grammar, to_snf, Wcfg};
use regprob::product::intersect;
use regprob::solver::{compute_regular_probability, sample_strings, SolveMode};
use regprob::Error;

#[derive(Debug, Parser)]
#[command(name = "regprob", version, about = "Probability that a stochastic grammar generates a string of a regular language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability of generating a string accepted by the automaton.
    Prob(ProbArgs),
    /// Zero/one variables and critical components of the grammar's equations.
    Analyze(GrammarArgs),
    /// Termination probability of the start nonterminal.
    Termination(TerminationArgs),
    /// Emit the grammar-automaton product grammar.
    Product(ProductArgs),
    /// Emit the grammar in simple normal form.
    Snf(GrammarArgs),
    /// Estimate rule probabilities from a derivation corpus.
    Estimate(EstimateArgs),
    /// Emit the fixture grammar with critical depth n.
    Fixtures(FixtureArgs),
    /// Largest balance defect of a triple-indexed vector.
    Balance(BalanceArgs),
    /// Monte-Carlo estimate of the acceptance probability.
    Sample(SampleArgs),
    /// Lower critical rule weights so the grammar becomes noncritical.
    Tweak(TweakArgs),
}

#[derive(Debug, Args)]
struct GrammarArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct DfaSource {
    /// Automaton file.
    #[arg(long)]
    dfa: Option<PathBuf>,
    /// Strings containing W.
    #[arg(long, value_name = "W")]
    infix: Option<String>,
    /// Strings starting with W.
    #[arg(long, value_name = "W")]
    prefix: Option<String>,
    /// Exactly the string W.
    #[arg(long, value_name = "W")]
    exact: Option<String>,
    /// Every string.
    #[arg(long)]
    all: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Adaptive,
    Certified,
}

#[derive(Debug, Args)]
struct ProbArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[command(flatten)]
    dfa: DfaSource,
    /// Add a rejecting sink for transitions missing from the automaton file.
    #[arg(long)]
    complete: bool,
    /// Start nonterminal (defaults to the grammar's start).
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value = "1/1048576", value_parser = parse_eps)]
    eps: Rational,
    #[arg(long, value_enum, default_value_t = ModeArg::Adaptive)]
    mode: ModeArg,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct TerminationArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value = "1/1048576", value_parser = parse_eps)]
    eps: Rational,
    #[arg(long, value_enum, default_value_t = ModeArg::Adaptive)]
    mode: ModeArg,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ProductArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[command(flatten)]
    dfa: DfaSource,
    #[arg(long)]
    complete: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    #[arg(long, short)]
    n: usize,
}

#[derive(Debug, Args)]
struct BalanceArgs {
    /// JSON file `{"d": .., "n": .., "values": ["a/b", ..]}`.
    #[arg(long)]
    vector: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[command(flatten)]
    dfa: DfaSource,
    #[arg(long)]
    complete: bool,
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 100_000)]
    step_cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct TweakArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long, default_value = "1/1048576", value_parser = parse_eps)]
    eps: Rational,
}

fn parse_eps(text: &str) -> Result<Rational, String> {
    let eps = parse_rational(text).map_err(|e| e.to_string())?;
    if eps <= Rational::from_integer(0.into()) || eps > Rational::from_integer(1.into()) {
        return Err("epsilon must lie in (0, 1]".into());
    }
    Ok(eps)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Library(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

macro_rules! lib_err {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Library(e.into())
            }
        }
    )*};
}

lib_err!(
    regprob::grammar::GrammarError,
    regprob::automata::DfaError,
    regprob::product::ProductError,
    regprob::analysis::AnalysisError,
    regprob::solver::SolverError,
    regprob::balance::BalanceError,
    regprob::estimation::EstimationError
);

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Math(_) => "math",
        Error::Grammar(_) => "grammar",
        Error::Dfa(_) => "dfa",
        Error::Product(_) => "product",
        Error::Equation(_) => "equation",
        Error::Analysis(_) => "analysis",
        Error::Solver(_) => "solver",
        Error::Balance(_) => "balance",
        Error::Estimation(_) => "estimation",
    }
}

/// Parses `argv` (program name first) and runs the subcommand. Exit code 0 on
/// success, 1 with a JSON error object on stdout for library or input errors,
/// 2 for usage errors.
pub fn run_cli<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput { code, stdout: text, stderr: String::new() }
            } else {
                CliOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(stdout) => CliOutput { code: 0, stdout, stderr: String::new() },
        Err(failure) => {
            let (kind, message) = match failure {
                Failure::Library(e) => (error_kind(&e), e.to_string()),
                Failure::Input(m) => ("input", m),
            };
            let obj = json!({ "error": message, "kind": kind });
            CliOutput { code: 1, stdout: format!("{obj}\n"), stderr: String::new() }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_grammar(path: &Path) -> Result<Wcfg, Failure> {
    Ok(parse_grammar(&read(path)?)?)
}

/// "a b" splits on whitespace; "ab" splits into characters.
fn split_word(w: &str) -> Vec<String> {
    if w.split_whitespace().count() > 1 {
        w.split_whitespace().map(str::to_string).collect()
    } else {
        w.trim().chars().map(|c| c.to_string()).collect()
    }
}

fn load_dfa(src: &DfaSource, complete: bool, g: &Wcfg) -> Result<Dfa, Failure> {
    if let Some(path) = &src.dfa {
        return Ok(parse_dfa(&read(path)?, complete)?);
    }
    let (kind, word) = if let Some(w) = &src.infix {
        (PatternKind::Infix, split_word(w))
    } else if let Some(w) = &src.prefix {
        (PatternKind::Prefix, split_word(w))
    } else if let Some(w) = &src.exact {
        (PatternKind::Exact, split_word(w))
    } else {
        (PatternKind::All, Vec::new())
    };
    let mut alphabet: Vec<String> = g.terminals().to_vec();
    for s in &word {
        if !alphabet.contains(s) {
            alphabet.push(s.clone());
        }
    }
    Ok(build_pattern_dfa(kind, &word, &alphabet)?)
}

fn start_name(g: &Wcfg, start: &Option<String>) -> String {
    start.clone().unwrap_or_else(|| g.nonterminals()[g.start()].clone())
}

fn solve_mode(m: ModeArg) -> SolveMode {
    match m {
        ModeArg::Adaptive => SolveMode::Adaptive,
        ModeArg::Certified => SolveMode::Certified,
    }
}

fn render(value: Value, json: bool, text: impl FnOnce(&Value) -> String) -> String {
    if json {
        format!("{value}\n")
    } else {
        text(&value)
    }
}

fn interval_text(v: &Value) -> String {
    format!(
        "probability in [{}, {}]\ndecimal {}\nmode {} (certified: {}), h = {}, iterations = {}, epsilon = {}\n",
        v["probability_lo"].as_str().unwrap_or(""),
        v["probability_hi"].as_str().unwrap_or(""),
        v["decimal"].as_str().unwrap_or(""),
        v["mode"].as_str().unwrap_or(""),
        v["certified"],
        v["h"],
        v["iterations"],
        v["epsilon"].as_str().unwrap_or(""),
    )
}

fn dispatch(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Prob(a) => {
            let g = load_grammar(&a.grammar)?;
            let dfa = load_dfa(&a.dfa, a.complete, &g)?;
            let start = start_name(&g, &a.start);
            let r = compute_regular_probability(&g, &dfa, &start, &a.eps, solve_mode(a.mode))?;
            let mut v = serde_json::to_value(&r).expect("result serializes");
            v["start"] = json!(start);
            Ok(render(v, a.json, interval_text))
        }
        Command::Analyze(a) => {
            let g = load_grammar(&a.grammar)?;
            let report = analyze(&to_snf(&g))?;
            let v = serde_json::to_value(&report).expect("report serializes");
            Ok(render(v, a.json, |v| {
                let list = |key: &str| {
                    v[key].as_array().map(|xs| xs.iter().filter_map(|x| x.as_str()).collect::<Vec<_>>().join(" ")).unwrap_or_default()
                };
                let sccs: Vec<String> = v["critical_sccs"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|s| format!("{{{}}}", s.as_array().into_iter().flatten().filter_map(|x| x.as_str()).collect::<Vec<_>>().join(" ")))
                    .collect();
                format!(
                    "zero: {}\none: {}\ncritical sccs: {}\ncritical depth: {}\nencoding size: {}\n",
                    list("zero"),
                    list("one"),
                    sccs.join(" "),
                    v["critical_depth"],
                    v["encoding_size"]
                )
            }))
        }
        Command::Termination(a) => {
            let g = load_grammar(&a.grammar)?;
            let start = start_name(&g, &a.start);
            let a_idx = g.nonterminal_index(&start).ok_or_else(|| Failure::Input(format!("unknown nonterminal {start:?}")))?;
            let snf = to_snf(&g);
            let report = analyze(&snf)?;
            let all_one = report.one.len() == snf.nonterminals().len();
            let name = &g.nonterminals()[a_idx];
            let mut v = if report.one.contains(name) || report.zero.contains(name) {
                let q = if report.one.contains(name) { "1" } else { "0" };
                json!({
                    "probability_lo": q, "probability_hi": q, "decimal": q, "mode": "exact",
                    "certified": true, "h": 0, "iterations": 0,
                    "epsilon": format_rational(&a.eps), "exact": true,
                    "critical_depth": report.critical_depth,
                })
            } else {
                let all = build_pattern_dfa::<String>(PatternKind::All, &[], g.terminals())?;
                let r = compute_regular_probability(&g, &all, &start, &a.eps, solve_mode(a.mode))?;
                serde_json::to_value(&r).expect("result serializes")
            };
            v["start"] = json!(start);
            v["one_variables"] = json!(report.one);
            v["zero_variables"] = json!(report.zero);
            v["all_one"] = json!(all_one);
            Ok(render(v, a.json, |v| {
                let mut s = interval_text(v);
                s.push_str(&format!("all variables terminate with probability 1: {}\n", v["all_one"]));
                s
            }))
        }
        Command::Product(a) => {
            let g = load_grammar(&a.grammar)?;
            let dfa = load_dfa(&a.dfa, a.complete, &g)?;
            let p = intersect(&to_snf(&g), &dfa)?;
            Ok(p.grammar().to_string())
        }
        Command::Snf(a) => {
            let g = load_grammar(&a.grammar)?;
            let snf = to_snf(&g);
            if a.json {
                let kinds: Vec<String> = snf.kinds().iter().map(|k| format!("{k:?}")).collect();
                Ok(format!("{}\n", json!({ "grammar": snf.to_string(), "kinds": kinds })))
            } else {
                Ok(snf.to_string())
            }
        }
        Command::Estimate(a) => {
            let corpus = parse_corpus(&read(&a.corpus)?)?;
            let g = estimate(&corpus)?;
            let verdict = verify_estimated(&g)?;
            if a.json {
                Ok(format!(
                    "{}\n",
                    json!({ "grammar": g.to_string(), "consistent": verdict.consistent, "noncritical": verdict.noncritical })
                ))
            } else {
                Ok(format!("{g}# consistent: {}\n# noncritical: {}\n", verdict.consistent, verdict.noncritical))
            }
        }
        Command::Fixtures(a) => Ok(bad_family(a.n).to_string()),
        Command::Balance(a) => {
            let raw: Value = serde_json::from_str(&read(&a.vector)?).map_err(|e| Failure::Input(e.to_string()))?;
            let field = |k: &str| raw[k].as_u64().map(|x| x as usize).ok_or_else(|| Failure::Input(format!("missing integer field {k:?}")));
            let (d, n) = (field("d")?, field("n")?);
            let values = raw["values"]
                .as_array()
                .ok_or_else(|| Failure::Input("missing array field \"values\"".into()))?
                .iter()
                .map(|x| match x {
                    Value::String(s) => parse_rational(s).map_err(|e| Failure::Input(e.to_string())),
                    Value::Number(num) => parse_rational(&num.to_string()).map_err(|e| Failure::Input(e.to_string())),
                    _ => Err(Failure::Input("values must be rationals".into())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let y = TripleVector::new(d, n, values)?;
            let defect = balance_defect(&y);
            let v = json!({ "balanced": is_balanced_vector(&y), "defect": format_rational(&defect) });
            Ok(render(v, a.json, |v| format!("defect {}\nbalanced {}\n", v["defect"].as_str().unwrap_or(""), v["balanced"])))
        }
        Command::Sample(a) => {
            let g = load_grammar(&a.grammar)?;
            let dfa = load_dfa(&a.dfa, a.complete, &g)?;
            let start = start_name(&g, &a.start);
            let a_idx = g.nonterminal_index(&start).ok_or_else(|| Failure::Input(format!("unknown nonterminal {start:?}")))?;
            let est = sample_strings(&g, a_idx, &dfa, a.trials, a.step_cap, a.seed)?;
            let v = json!({ "accepted": est.accepted, "trials": est.trials, "fraction": est.fraction(), "seed": a.seed });
            Ok(render(v, a.json, |v| format!("accepted {} of {} ({})\n", v["accepted"], v["trials"], v["fraction"])))
        }
        Command::Tweak(a) => {
            let g = load_grammar(&a.grammar)?;
            let snf = to_snf(&g);
            let t = tweak_grammar(&snf, &a.eps)?;
            let depth = criticality(&build_system(&t.grammar))?.depth();
            let mut out = t.grammar.to_string();
            if let Some(delta) = &t.delta {
                out.push_str(&format!("# delta ~ {}\n", format_decimal(delta, 6)));
            }
            out.push_str(&format!("# critical depth before {}, after {depth}\n", t.critical_depth));
            Ok(out)
        }
    }
}
