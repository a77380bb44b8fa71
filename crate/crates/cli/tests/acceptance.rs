//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::Value;

use regprob::analysis::{criticality, one_variables, remove_zeros, tweak_grammar, zero_variables};
use regprob::automata::{build_pattern_dfa, Dfa, PatternKind};
use regprob::balance::{collapse_vector, is_balanced_vector, TripleVector};
use regprob::equations::{build_system, PolySystem};
use regprob::estimation::{estimate, sample_corpus, verify_estimated};
use regprob::exactmath::{ceil_log2, parse_rational, pow2, rat, round_down_dyadic, Rational};
use regprob::grammar::{bad_family, classify, encoding_size, to_snf, GrammarClass, Wcfg};
use regprob::product::intersect;
use regprob::solver::{
    compute_regular_probability_with, exact_newton_iterates, kleene_oracle, kleene_rounded, required_h_noncritical,
    Newton, PipelineOptions, SolveMode, SolverError, Strategy,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("regprob-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn cli_json(args: &[&str]) -> Result<Value, String> {
    let mut argv = vec!["regprob"];
    argv.extend_from_slice(args);
    let out = regprob_cli::run_cli(argv);
    if out.code != 0 {
        return Err(format!("exit {} for {args:?}: {}{}", out.code, out.stdout, out.stderr));
    }
    serde_json::from_str(&out.stdout).map_err(|e| format!("bad JSON from {args:?}: {e}"))
}

fn field(v: &Value, key: &str) -> Result<Rational, String> {
    let s = v[key].as_str().ok_or_else(|| format!("missing {key}"))?;
    parse_rational(s).map_err(|e| e.to_string())
}

/// Counts checked iterates; fails on the first violation of the rounding contract.
#[derive(Default)]
struct RoundingLedger {
    runs: usize,
    iterates: usize,
    violations: Vec<String>,
}

impl RoundingLedger {
    fn record(&mut self, g: &Wcfg, dfa: &Dfa, r: &regprob::RegularProbability) {
        if let Err(e) = self.audit(g, dfa, r) {
            self.violations.push(e);
        }
    }

    /// Re-derives the reduced product system the pipeline solved and checks
    /// every iterate against one exact Newton step from its predecessor.
    fn audit(&mut self, g: &Wcfg, dfa: &Dfa, r: &regprob::RegularProbability) -> Result<(), String> {
        let Some(trace) = &r.trace else {
            return check(r.exact, || "non-exact result without a trace".into());
        };
        let grammar = to_snf(g);
        let product = intersect(&grammar, dfa).map_err(|e| e.to_string())?;
        let reduced = remove_zeros(&build_system(product.grammar()));
        let newton = Newton::new(&reduced.system);
        let bits = trace.h + 2;
        for (k, x) in trace.iterates.iter().enumerate() {
            check(x.bits() == bits, || format!("iterate {k} stored at {} bits, expected {bits}", x.bits()))?;
            for i in 0..x.len() {
                let v = x.value(i);
                check(v >= Rational::zero(), || format!("iterate {k} has a negative entry"))?;
                let scaled = &v * pow2(bits as i64);
                check(scaled.is_integer(), || format!("iterate {k} entry {i} is not a multiple of 2^-{bits}"))?;
            }
            if k > 0 {
                let exact = newton.step(&trace.iterates[k - 1].to_rationals()).map_err(|e| e.to_string())?;
                for (i, e) in exact.iter().enumerate() {
                    check(x.value(i) <= *e, || format!("iterate {k} entry {i} exceeds the exact Newton step"))?;
                }
                check(*x == round_down_dyadic(&exact, bits), || format!("iterate {k} is not the floor of the exact step"))?;
            }
            self.iterates += 1;
        }
        self.runs += 1;
        Ok(())
    }
}

fn traced(mode: SolveMode) -> PipelineOptions {
    PipelineOptions { mode, strategy: Strategy::Whole, keep_trace: true }
}

fn criterion_1(ledger: &mut RoundingLedger) -> Outcome {
    let dir = workdir();
    let eps = pow2(-20);
    let dfa = build_pattern_dfa(PatternKind::Infix, &["a", "a"], &["a", "b", "c"]).unwrap();
    let mut cases = 0;
    for n in 1..=3usize {
        let g = bad_family(n);
        let path = dir.join(format!("bad{n}.scfg"));
        std::fs::write(&path, g.to_string()).map_err(|e| e.to_string())?;
        let path = path.to_string_lossy().to_string();
        for i in 0..=n {
            let start = format!("A_{i}");
            let expected = pow2(-(1i64 << i));
            let v = cli_json(&["prob", "--grammar", &path, "--infix", "aa", "--start", &start, "--eps", "1/1048576", "--json"])?;
            let lo = field(&v, "probability_lo")?;
            let hi = field(&v, "probability_hi")?;
            check((&lo - &expected).abs() <= eps, || format!("n={n} {start}: lo {lo} not within 2^-20 of {expected}"))?;
            check(lo <= expected && expected <= hi, || format!("n={n} {start}: [{lo}, {hi}] misses {expected}"))?;
            check(v["mode"] == "adaptive" && v["certified"] == false, || format!("n={n} {start}: unexpected mode {}", v["mode"]))?;
            let r = compute_regular_probability_with(&g, &dfa, &start, &eps, &traced(SolveMode::Adaptive)).map_err(|e| e.to_string())?;
            ledger.record(&g, &dfa, &r);
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, A_i) cases within 2^-20"))
}

fn criterion_2() -> Outcome {
    let dir = workdir();
    for n in 0..=3usize {
        let g = bad_family(n);
        let path = dir.join(format!("term{n}.scfg"));
        std::fs::write(&path, g.to_string()).map_err(|e| e.to_string())?;
        let v = cli_json(&["termination", "--grammar", &path.to_string_lossy(), "--json"])?;
        check(v["all_one"] == true, || format!("n={n}: not every variable classified as 1"))?;
        check(v["probability_lo"] == "1" && v["exact"] == true, || format!("n={n}: termination not exactly 1"))?;
        let snf = to_snf(&g);
        let p = build_system(&snf);
        let ones = one_variables(&p).map_err(|e| e.to_string())?;
        check(ones.len() == p.len(), || format!("n={n}: one_variables covers {} of {}", ones.len(), p.len()))?;
    }
    Ok("bad_family(0..=3) all q = 1 exactly".into())
}

struct Instance {
    base: PolySystem,
    product: PolySystem,
    d: usize,
    n: usize,
}

fn instances() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 0;
    let ab = vec!["a".to_string(), "b".to_string()];
    while out.len() < 50 {
        seed += 1;
        let mut r = common::rng(1000 + seed);
        let size = r.gen_range(1..=5);
        let g = common::random_snf_proper(&mut r, size);
        let snf = to_snf(&g);
        if snf.nonterminals().len() > 5 {
            continue;
        }
        let d = r.gen_range(1..=3);
        let dfa = common::random_dfa(&mut r, d, &ab);
        let base = build_system(&snf);
        // Only pairs whose base LFP is strictly positive.
        if !zero_variables(&base).is_empty() {
            continue;
        }
        let product = intersect(&snf, &dfa).unwrap();
        out.push(Instance { base, product: build_system(product.grammar()), d, n: snf.nonterminals().len() });
    }
    out
}

type NewtonRuns = Vec<Option<(Vec<Vec<Rational>>, Vec<Vec<Rational>>)>>;

fn newton_runs(set: &[Instance]) -> NewtonRuns {
    set.iter()
        .map(|inst| {
            let base = exact_newton_iterates(&inst.base, 8);
            let prod = exact_newton_iterates(&inst.product, 8);
            match (base, prod) {
                (Ok(x), Ok(y)) => Some((x, y)),
                (Err(SolverError::SingularJacobian), _) | (_, Err(SolverError::SingularJacobian)) => None,
                (Err(e), _) | (_, Err(e)) => panic!("unexpected solver error {e}"),
            }
        })
        .collect()
}

fn criterion_3(set: &[Instance], runs: &NewtonRuns) -> Outcome {
    let mut skipped = Vec::new();
    for (idx, (inst, run)) in set.iter().zip(runs).enumerate() {
        let Some((xs, ys)) = run else {
            skipped.push(idx);
            continue;
        };
        for (k, (x, y)) in xs.iter().zip(ys).enumerate() {
            let y = TripleVector::new(inst.d, inst.n, y.clone()).map_err(|e| e.to_string())?;
            let c = collapse_vector(&y, true).map_err(|e| format!("instance {idx}, k={k}: {e}"))?;
            check(*x == c, || format!("instance {idx}, k={k}: x != collapse(y)"))?;
        }
    }
    eprintln!("  criterion 3 skipped instances (singular Jacobian): {skipped:?}");
    check(skipped.len() * 5 < set.len(), || format!("{} of {} instances skipped", skipped.len(), set.len()))?;
    Ok(format!("{} instances x 9 iterates equal, {} skipped", set.len() - skipped.len(), skipped.len()))
}

fn criterion_4(set: &[Instance], runs: &NewtonRuns) -> Outcome {
    let mut checked = 0;
    for (idx, (inst, run)) in set.iter().zip(runs).enumerate() {
        if let Some((_, ys)) = run {
            for (k, y) in ys.iter().enumerate() {
                let y = TripleVector::new(inst.d, inst.n, y.clone()).map_err(|e| e.to_string())?;
                check(is_balanced_vector(&y), || format!("instance {idx}: Newton iterate {k} unbalanced"))?;
                checked += 1;
            }
        }
        for k in 0..=8 {
            let y = TripleVector::new(inst.d, inst.n, kleene_oracle(&inst.product, k)).map_err(|e| e.to_string())?;
            check(is_balanced_vector(&y), || format!("instance {idx}: Kleene iterate {k} unbalanced"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} product iterates balanced"))
}

fn grammar(rules: &[(&str, &[&str], Rational)], terminals: &[&str]) -> Wcfg {
    Wcfg::from_named(&["S"], terminals, "S", rules).unwrap()
}

fn criterion_5(ledger: &mut RoundingLedger) -> Outcome {
    let eps = pow2(-20);
    let half = rat(1, 2);
    let fixtures: Vec<(&str, Wcfg, Dfa)> = vec![
        (
            "x = 2/3 x^2 + 1/3",
            grammar(&[("S", &["S", "S"], rat(2, 3)), ("S", &["a"], rat(1, 3))], &["a"]),
            build_pattern_dfa::<&str>(PatternKind::All, &[], &["a"]).unwrap(),
        ),
        (
            "x = 1/2 x + 1/4",
            grammar(&[("S", &["S"], rat(1, 2)), ("S", &["a"], rat(1, 4))], &["a"]),
            build_pattern_dfa::<&str>(PatternKind::All, &[], &["a"]).unwrap(),
        ),
        (
            "S -> a S | b, prefix a",
            grammar(&[("S", &["a", "S"], rat(1, 2)), ("S", &["b"], rat(1, 2))], &["a", "b"]),
            build_pattern_dfa(PatternKind::Prefix, &["a"], &["a", "b"]).unwrap(),
        ),
        (
            "S -> a b | a a, infix aa",
            grammar(&[("S", &["a", "b"], rat(1, 2)), ("S", &["a", "a"], rat(1, 2))], &["a", "b"]),
            build_pattern_dfa(PatternKind::Infix, &["a", "a"], &["a", "b"]).unwrap(),
        ),
    ];
    let mut notes = Vec::new();
    for (name, g, dfa) in &fixtures {
        let adaptive = compute_regular_probability_with(g, dfa, "S", &eps, &traced(SolveMode::Adaptive)).map_err(|e| e.to_string())?;
        check((&adaptive.probability_lo - &half).abs() <= eps, || format!("{name}: adaptive {} off", adaptive.probability_lo))?;
        ledger.record(g, dfa, &adaptive);

        let snf = to_snf(g);
        let f = dfa.accepting_states().len();
        let h = required_h_noncritical(encoding_size(&snf), dfa.num_states(), &(&eps / Rational::from_integer(f.into())));
        let by_hand = 14 * encoding_size(&snf) + 3 + ceil_log2(&(Rational::from_integer((dfa.num_states() * f).into()) / &eps)) as u64;
        check(h == by_hand, || format!("{name}: h formula {h} != {by_hand}"))?;
        if h <= 2000 {
            let cert = compute_regular_probability_with(g, dfa, "S", &eps, &traced(SolveMode::Certified)).map_err(|e| e.to_string())?;
            check(cert.certified && u64::from(cert.h) == h, || format!("{name}: certified run used h={}", cert.h))?;
            check((&cert.probability_lo - &half).abs() <= eps, || format!("{name}: certified {} off", cert.probability_lo))?;
            check(cert.probability_lo <= half && half <= cert.probability_hi, || format!("{name}: certified interval misses 1/2"))?;
            ledger.record(g, dfa, &cert);
            notes.push(format!("certified h={h}"));
        } else {
            notes.push(format!("h={h} > 2000, formula only"));
        }
    }
    Ok(format!("4 fixtures within 2^-20 in both modes ({})", notes.join(", ")))
}

fn criterion_6() -> Outcome {
    let crit = grammar(&[("S", &["S", "S"], rat(1, 2)), ("S", &["a"], rat(1, 2))], &["a"]);
    let sub = grammar(&[("S", &["S", "S"], rat(2, 3)), ("S", &["a"], rat(1, 3))], &["a"]);
    let mut catalogue: Vec<(String, Wcfg, usize)> = vec![("x = x^2/2 + 1/2".into(), crit, 1), ("x = 2x^2/3 + 1/3".into(), sub, 0)];
    for n in 0..=5 {
        catalogue.push((format!("bad_family({n})"), bad_family(n), n));
    }
    let eps = pow2(-20);
    for (name, g, depth) in &catalogue {
        let snf = to_snf(g);
        let c = criticality(&build_system(&snf)).map_err(|e| e.to_string())?;
        check(c.depth() == *depth, || format!("{name}: depth {} expected {depth}", c.depth()))?;
        let sccs = c.critical_sccs();
        check(sccs.len() == *depth, || format!("{name}: {} critical SCCs expected {depth}", sccs.len()))?;
        if name.starts_with("bad_family") {
            let names: BTreeSet<String> =
                sccs.iter().flat_map(|s| s.iter().map(|&v| snf.nonterminals()[v].clone())).collect();
            for i in 0..*depth {
                check(names.contains(&format!("A_{i}")), || format!("{name}: A_{i} not in a critical SCC"))?;
            }
        }
        if *depth > 0 {
            let t = tweak_grammar(&snf, &eps).map_err(|e| e.to_string())?;
            let after = criticality(&build_system(&t.grammar)).map_err(|e| e.to_string())?.depth();
            check(after == 0, || format!("{name}: tweaked depth {after}"))?;
        }
    }
    Ok(format!("{} fixtures classified, tweaks noncritical", catalogue.len()))
}

fn criterion_7() -> Outcome {
    let threshold = pow2(-40);
    let mut ones = 0;
    let mut zeros = 0;
    for seed in 0..200u64 {
        let mut r = common::rng(7_000 + seed);
        let p = common::random_pps(&mut r);
        let oracle = kleene_rounded(&p, 10_000, 2048);
        let zero_oracle: BTreeSet<usize> = (0..p.len()).filter(|&i| oracle[i].is_zero()).collect();
        let one_oracle: BTreeSet<usize> = (0..p.len()).filter(|&i| Rational::one() - &oracle[i] < threshold).collect();
        let z = zero_variables(&p);
        let o = one_variables(&p).map_err(|e| e.to_string())?;
        check(z == zero_oracle, || format!("seed {seed}: zero {z:?} vs oracle {zero_oracle:?}"))?;
        check(o == one_oracle, || format!("seed {seed}: one {o:?} vs oracle {one_oracle:?}"))?;
        ones += o.len();
        zeros += z.len();
    }
    Ok(format!("200 systems agree ({zeros} zero and {ones} one variables in total)"))
}

fn criterion_8() -> Outcome {
    let mut done = 0;
    let mut seed = 0u64;
    while done < 100 {
        seed += 1;
        let mut r = common::rng(8_000 + seed);
        let size = r.gen_range(1..=4);
        let g = common::random_general_proper(&mut r, size);
        let entries = r.gen_range(1..=12);
        let corpus = match sample_corpus(&g, entries, 200, seed) {
            Ok(c) => c,
            Err(regprob::estimation::EstimationError::SamplingFailed(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        let est = estimate(&corpus).map_err(|e| e.to_string())?;
        check(classify(&est) == GrammarClass::ProperScfg, || format!("seed {seed}: estimate not proper"))?;
        let v = verify_estimated(&est).map_err(|e| e.to_string())?;
        check(v.consistent && v.noncritical, || format!("seed {seed}: verdict {v:?}"))?;
        done += 1;
    }
    Ok(format!("100 corpora consistent and noncritical ({} seeds drawn)", seed))
}

fn criterion_10() -> Outcome {
    let mut strings = 0;
    for seed in 0..50u64 {
        let mut r = common::rng(10_000 + seed);
        let size = r.gen_range(1..=4);
        let g = common::random_general_proper(&mut r, size);
        let before = common::string_weights(&g, 5);
        let after = common::string_weights(&to_snf(&g), 5);
        check(before == after, || format!("seed {seed}: string weights differ"))?;
        strings += before.len();
    }
    Ok(format!("50 grammars, {strings} strings with identical weights"))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, title: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = t.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= limit {
                Ok(msg)
            } else {
                Err(format!("{msg}, but took {elapsed:.1?} (limit {limit:?})"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {id:>2} {title}: {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {id:>2} {title}: {msg} [{elapsed:.2?}]");
            }
        }
    };
    let secs = Duration::from_secs;
    let mut ledger = RoundingLedger::default();
    report(1, "bad_family infix-aa probabilities", secs(30), &mut || criterion_1(&mut ledger));
    report(2, "bad_family termination exactly 1", secs(1), &mut criterion_2);
    let set = instances();
    let t = Instant::now();
    let runs = newton_runs(&set);
    let shared = t.elapsed();
    report(3, "collapse commutes with Newton", secs(60).saturating_sub(shared), &mut || criterion_3(&set, &runs));
    report(4, "product iterates stay balanced", secs(60).saturating_sub(shared), &mut || criterion_4(&set, &runs));
    report(5, "closed-form fixtures", secs(60), &mut || criterion_5(&mut ledger));
    report(6, "criticality catalogue and tweak", secs(10), &mut criterion_6);
    report(7, "zero/one vs Kleene oracle", secs(120), &mut criterion_7);
    report(8, "estimated grammars noncritical", secs(60), &mut criterion_8);
    let (runs_checked, iterates_checked) = (ledger.runs, ledger.iterates);
    let violations = ledger.violations.clone();
    report(9, "rounding contract", secs(1), &mut || {
        check(violations.is_empty(), || violations.join("; "))?;
        check(runs_checked > 0, || "no rounded runs were audited".into())?;
        Ok(format!("{runs_checked} rounded runs, {iterates_checked} iterates audited during criteria 1 and 5"))
    });
    report(10, "SNF preserves string weights", secs(60), &mut criterion_10);
    let _ = std::fs::remove_dir_all(workdir());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
