//! Complete deterministic finite automata and the pattern automata used for
//! exact-string, prefix, infix and universal languages.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DfaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing transition from state {state:?} on {symbol:?}")]
    PartialTransition { state: String, symbol: String },
    #[error("duplicate transition from state {state:?} on {symbol:?}")]
    DuplicateTransition { state: String, symbol: String },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
}

/// Complete DFA `(Q, Sigma, delta, s0, F)` with a total transition table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    delta: Vec<usize>,
    start: usize,
    accepting: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Exact,
    Prefix,
    Infix,
    All,
}

impl Dfa {
    /// Builds a DFA from a total transition table indexed `state * |alphabet| + symbol`.
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        delta: Vec<usize>,
        start: usize,
        accepting: Vec<bool>,
    ) -> Result<Self, DfaError> {
        unique(&states)?;
        unique(&alphabet)?;
        assert_eq!(delta.len(), states.len() * alphabet.len(), "transition table must be total");
        assert_eq!(accepting.len(), states.len());
        assert!(start < states.len() && delta.iter().all(|&t| t < states.len()));
        Ok(Dfa { states, alphabet, delta, start, accepting })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&q| self.accepting[q]).collect()
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// `delta(q, a)` on indices.
    pub fn step(&self, q: usize, a: usize) -> usize {
        self.delta[q * self.alphabet.len() + a]
    }

    /// Runs the automaton from the start state over symbol names.
    pub fn run<S: AsRef<str>>(&self, word: &[S]) -> Result<(usize, bool), DfaError> {
        let mut q = self.start;
        for s in word {
            let a = self.symbol_index(s.as_ref()).ok_or_else(|| DfaError::UnknownSymbol(s.as_ref().to_string()))?;
            q = self.step(q, a);
        }
        Ok((q, self.accepting[q]))
    }

    /// Runs the automaton over symbol indices starting in `q`.
    pub fn run_indices(&self, mut q: usize, word: &[usize]) -> usize {
        for &a in word {
            q = self.step(q, a);
        }
        q
    }
}

fn unique(names: &[String]) -> Result<(), DfaError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(DfaError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "alphabet: {}", self.alphabet.join(" "))?;
        writeln!(f, "start: {}", self.states[self.start])?;
        let acc: Vec<&str> = self.accepting_states().into_iter().map(|q| self.states[q].as_str()).collect();
        writeln!(f, "accept: {}", acc.join(" "))?;
        writeln!(f, "delta:")?;
        for q in 0..self.states.len() {
            for a in 0..self.alphabet.len() {
                writeln!(f, "{} {} {}", self.states[q], self.alphabet[a], self.states[self.step(q, a)])?;
            }
        }
        Ok(())
    }
}

/// Parses the DFA text format. With `complete`, missing transitions go to a
/// fresh rejecting sink; otherwise a partial table is an error.
pub fn parse_dfa(text: &str, complete: bool) -> Result<Dfa, DfaError> {
    let mut states: Option<Vec<String>> = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut start: Option<String> = None;
    let mut accept: Vec<String> = Vec::new();
    let mut rows: Vec<(usize, String, String, String)> = Vec::new();
    let mut in_delta = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |m: &str| DfaError::Syntax { line: line_no, message: m.to_string() };
        if let Some((key, rest)) = line.split_once(':') {
            let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            match key.trim() {
                "states" => states = Some(names),
                "alphabet" => alphabet = Some(names),
                "start" => {
                    if names.len() != 1 {
                        return Err(syntax("start needs exactly one state"));
                    }
                    start = Some(names[0].clone());
                }
                "accept" => accept = names,
                "delta" => {
                    if !names.is_empty() {
                        return Err(syntax("delta: must be followed by one transition per line"));
                    }
                    in_delta = true;
                }
                other => return Err(syntax(&format!("unknown section {other:?}"))),
            }
            continue;
        }
        if !in_delta {
            return Err(syntax("transition row before delta:"));
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [from, sym, to] = parts.as_slice() else {
            return Err(syntax("transition rows are \"<state> <symbol> <state>\""));
        };
        rows.push((line_no, from.to_string(), sym.to_string(), to.to_string()));
    }
    let mut states = states.ok_or(DfaError::Syntax { line: 0, message: "missing states:".into() })?;
    let alphabet = alphabet.ok_or(DfaError::Syntax { line: 0, message: "missing alphabet:".into() })?;
    let start = start.ok_or(DfaError::Syntax { line: 0, message: "missing start:".into() })?;
    unique(&states)?;
    unique(&alphabet)?;
    let s_index: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let a_index: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let k = alphabet.len();
    let mut table: Vec<Option<usize>> = vec![None; states.len() * k];
    for (_, from, sym, to) in &rows {
        let f = *s_index.get(from.as_str()).ok_or_else(|| DfaError::UnknownState(from.clone()))?;
        let a = *a_index.get(sym.as_str()).ok_or_else(|| DfaError::UnknownSymbol(sym.clone()))?;
        let t = *s_index.get(to.as_str()).ok_or_else(|| DfaError::UnknownState(to.clone()))?;
        let slot = &mut table[f * k + a];
        if slot.is_some() {
            return Err(DfaError::DuplicateTransition { state: from.clone(), symbol: sym.clone() });
        }
        *slot = Some(t);
    }
    let start = *s_index.get(start.as_str()).ok_or(DfaError::UnknownState(start.clone()))?;
    let mut accepting = vec![false; states.len()];
    for a in &accept {
        accepting[*s_index.get(a.as_str()).ok_or_else(|| DfaError::UnknownState(a.clone()))?] = true;
    }
    if let Some(missing) = table.iter().position(Option::is_none) {
        if !complete {
            return Err(DfaError::PartialTransition {
                state: states[missing / k].clone(),
                symbol: alphabet[missing % k].clone(),
            });
        }
        let mut sink = "sink".to_string();
        while states.contains(&sink) {
            sink.push('\'');
        }
        let sink_index = states.len();
        states.push(sink);
        accepting.push(false);
        table.extend(std::iter::repeat(Some(sink_index)).take(k));
        for slot in table.iter_mut() {
            slot.get_or_insert(sink_index);
        }
    }
    let delta = table.into_iter().map(|t| t.expect("table completed")).collect();
    Dfa::new(states, alphabet, delta, start, accepting)
}

/// Automaton for `{w}`, `w Sigma*`, `Sigma* w Sigma*` or `Sigma*`.
///
/// States are named `t1, t2, ...` along the pattern, plus `dead` where needed.
/// The infix automaton is the string-matching automaton with `|w| + 1` states.
pub fn build_pattern_dfa<S: AsRef<str>>(kind: PatternKind, word: &[S], alphabet: &[S]) -> Result<Dfa, DfaError> {
    let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
    unique(&alphabet)?;
    let k = alphabet.len();
    let w: Vec<usize> = word
        .iter()
        .map(|s| {
            alphabet
                .iter()
                .position(|a| a == s.as_ref())
                .ok_or_else(|| DfaError::UnknownSymbol(s.as_ref().to_string()))
        })
        .collect::<Result<_, _>>()?;
    let m = w.len();
    let name = |i: usize| format!("t{}", i + 1);
    if kind == PatternKind::All || (m == 0 && matches!(kind, PatternKind::Prefix | PatternKind::Infix)) {
        return Dfa::new(vec![name(0)], alphabet, vec![0; k], 0, vec![true]);
    }
    match kind {
        PatternKind::Exact | PatternKind::Prefix => {
            let dead = m + 1;
            let mut states: Vec<String> = (0..=m).map(name).collect();
            states.push("dead".to_string());
            let mut delta = vec![dead; (m + 2) * k];
            for (i, &c) in w.iter().enumerate() {
                delta[i * k + c] = i + 1;
            }
            if kind == PatternKind::Prefix {
                for a in 0..k {
                    delta[m * k + a] = m;
                }
            }
            let mut accepting = vec![false; m + 2];
            accepting[m] = true;
            Dfa::new(states, alphabet, delta, 0, accepting)
        }
        PatternKind::Infix => {
            let mut delta = vec![0; (m + 1) * k];
            delta[w[0]] = 1;
            let mut restart = 0;
            for j in 1..m {
                for a in 0..k {
                    delta[j * k + a] = delta[restart * k + a];
                }
                delta[j * k + w[j]] = j + 1;
                restart = delta[restart * k + w[j]];
            }
            for a in 0..k {
                delta[m * k + a] = m;
            }
            let mut accepting = vec![false; m + 1];
            accepting[m] = true;
            Dfa::new((0..=m).map(name).collect(), alphabet, delta, 0, accepting)
        }
        PatternKind::All => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIGURE_ONE: &str = "\
states: t1 t2 t3
alphabet: a b c
start: t1
accept: t3
delta:
t1 a t2
t1 b t1
t1 c t1
t2 a t3
t2 b t1
t2 c t1
t3 a t3
t3 b t3
t3 c t3
";

    fn chars(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn parse_figure_one() {
        let d = parse_dfa(FIGURE_ONE, false).unwrap();
        assert_eq!(d.num_states(), 3);
        let (q, acc) = d.run(&chars("baab")).unwrap();
        assert_eq!(d.states()[q], "t3");
        assert!(acc);
        let (q, acc) = d.run(&chars("abab")).unwrap();
        assert_eq!(d.states()[q], "t1");
        assert!(!acc);
        assert_eq!(d.run::<&str>(&[]).unwrap(), (0, false));
        assert_eq!(parse_dfa(&d.to_string(), false).unwrap(), d);
    }

    #[test]
    fn completion_adds_sink() {
        let partial = FIGURE_ONE.replace("t2 c t1\n", "");
        assert_eq!(
            parse_dfa(&partial, false),
            Err(DfaError::PartialTransition { state: "t2".into(), symbol: "c".into() })
        );
        let d = parse_dfa(&partial, true).unwrap();
        assert_eq!(d.num_states(), 4);
        assert_eq!(d.states()[3], "sink");
        let (q, acc) = d.run(&chars("acaa")).unwrap();
        assert_eq!(q, 3);
        assert!(!acc);
    }

    #[test]
    fn duplicate_and_unknown() {
        let dup = format!("{FIGURE_ONE}t1 a t3\n");
        assert!(matches!(parse_dfa(&dup, false), Err(DfaError::DuplicateTransition { .. })));
        let unknown = FIGURE_ONE.replace("t1 a t2", "t1 a t9");
        assert_eq!(parse_dfa(&unknown, false), Err(DfaError::UnknownState("t9".into())));
        let d = parse_dfa(FIGURE_ONE, false).unwrap();
        assert_eq!(d.run(&["z"]), Err(DfaError::UnknownSymbol("z".into())));
    }

    #[test]
    fn infix_matches_figure_one() {
        let d = build_pattern_dfa(PatternKind::Infix, &chars("aa"), &chars("abc")).unwrap();
        assert_eq!(d, parse_dfa(FIGURE_ONE, false).unwrap());
    }

    #[test]
    fn universal_and_exact() {
        let all = build_pattern_dfa::<String>(PatternKind::All, &[], &chars("ab")).unwrap();
        assert_eq!(all.num_states(), 1);
        assert!(all.is_accepting(0));
        let exact = build_pattern_dfa(PatternKind::Exact, &chars("ab"), &chars("ab")).unwrap();
        assert_eq!(exact.num_states(), 4);
        for len in 0..=3 {
            for code in 0..(1usize << len) {
                let word: Vec<String> = (0..len).map(|i| if code >> i & 1 == 1 { "b" } else { "a" }.to_string()).collect();
                let accepted = exact.run(&word).unwrap().1;
                assert_eq!(accepted, word.concat() == "ab", "{word:?}");
            }
        }
    }

    #[test]
    fn pattern_symbol_must_exist() {
        assert_eq!(
            build_pattern_dfa(PatternKind::Infix, &chars("ad"), &chars("abc")),
            Err(DfaError::UnknownSymbol("d".into()))
        );
    }
}
