//! Muller specifications stored as JSON.
//!
//! ```json
//! {
//!   "propositions": [{"name": "done", "kind": "all_halted", "args": []}],
//!   "states": ["wait", "done"],
//!   "initial": "wait",
//!   "delta": [{"from": "wait", "letter": "0", "to": "wait"}, ...],
//!   "accept": [["done"]]
//! }
//! ```
//!
//! Proposition arguments may be strings or integers. A letter has one
//! character per proposition: `1`, `0` or `-` for either.

use serde::Deserialize;
use wmfair_core::omega::{PropKind, Proposition, Rule, SpecError};
use wmfair_core::{MullerSpec, Program};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    propositions: Vec<PropFile>,
    states: Vec<String>,
    initial: String,
    delta: Vec<RuleFile>,
    accept: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropFile {
    name: String,
    kind: String,
    #[serde(default)]
    args: Vec<Arg>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Arg {
    Text(String),
    Int(i64),
}

impl Arg {
    fn into_string(self) -> String {
        match self {
            Arg::Text(s) => s,
            Arg::Int(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    from: String,
    letter: String,
    to: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecFileError {
    #[error("malformed specification: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid specification: {0}")]
    Spec(#[from] SpecError),
}

/// Parses and validates a specification against the program whose
/// processes, labels and registers its propositions mention.
pub fn parse_spec(text: &str, prog: &Program) -> Result<MullerSpec, SpecFileError> {
    let file: SpecFile = serde_json::from_str(text)?;
    let props = file
        .propositions
        .into_iter()
        .map(|p| {
            let args: Vec<String> = p.args.into_iter().map(Arg::into_string).collect();
            let kind = PropKind::resolve(&p.name, &p.kind, &args, prog)?;
            Ok(Proposition { name: p.name, kind })
        })
        .collect::<Result<Vec<_>, SpecError>>()?;
    let rules: Vec<Rule> = file
        .delta
        .into_iter()
        .map(|r| Rule { from: r.from, letter: r.letter, to: r.to })
        .collect();
    Ok(MullerSpec::new(props, file.states, &file.initial, &rules, &file.accept)?)
}

/// The automaton that accepts every run; used when no specification is
/// given.
pub fn accept_all() -> MullerSpec {
    MullerSpec::new(
        Vec::new(),
        vec!["run".into()],
        "run",
        &[Rule { from: "run".into(), letter: String::new(), to: "run".into() }],
        &[vec!["run".into()]],
    )
    .expect("valid automaton")
}

#[cfg(test)]
mod tests {
    use super::*;
    use wmfair_core::parse_program;

    fn prog() -> Program {
        parse_program("locations x\nprocess p0 { L: a = x; if a == 0 goto L; }\nprocess p1 { x = 1; }").unwrap()
    }

    const EVENTUALLY: &str = r#"{
        "propositions": [{"name": "h", "kind": "halted", "args": ["p0"]}],
        "states": ["q0", "q1"],
        "initial": "q0",
        "delta": [
            {"from": "q0", "letter": "0", "to": "q0"},
            {"from": "q0", "letter": "1", "to": "q1"},
            {"from": "q1", "letter": "-", "to": "q1"}
        ],
        "accept": [["q1"]]
    }"#;

    #[test]
    fn eventually_halted() {
        let spec = parse_spec(EVENTUALLY, &prog()).unwrap();
        assert_eq!(spec.accept, vec![0b10]);
        assert_eq!(spec.step(0, 1), 1);
        assert!(spec.check_stutter_insensitive(None).is_ok());
    }

    #[test]
    fn repeated_label_visits() {
        let text = r#"{
            "propositions": [{"name": "l", "kind": "at", "args": ["p0", "L"]}],
            "states": ["away", "at"],
            "initial": "away",
            "delta": [
                {"from": "away", "letter": "0", "to": "away"},
                {"from": "away", "letter": "1", "to": "at"},
                {"from": "at", "letter": "1", "to": "at"},
                {"from": "at", "letter": "0", "to": "away"}
            ],
            "accept": [["away", "at"], ["at"]]
        }"#;
        let spec = parse_spec(text, &prog()).unwrap();
        // hand trace: away -L-> at -L-> at -not L-> away
        let trace = [1, 1, 0];
        let mut q = spec.initial;
        let mut seen = vec![];
        for a in trace {
            q = spec.step(q, a);
            seen.push(q);
        }
        assert_eq!(seen, vec![1, 1, 0]);
        assert!(spec.accepts(0b11) && spec.accepts(0b10) && !spec.accepts(0b01));
    }

    #[test]
    fn rejects_partial_delta_and_unknown_names() {
        let partial = EVENTUALLY.replace(r#"{"from": "q1", "letter": "-", "to": "q1"}"#, r#"{"from": "q1", "letter": "1", "to": "q1"}"#);
        assert!(matches!(parse_spec(&partial, &prog()), Err(SpecFileError::Spec(SpecError::NotTotal { .. }))));
        let unknown = EVENTUALLY.replace("\"halted\"", "\"finished\"");
        assert!(matches!(parse_spec(&unknown, &prog()), Err(SpecFileError::Spec(SpecError::UnknownKind(_)))));
        let empty = EVENTUALLY.replace(r#"[["q1"]]"#, "[[]]");
        assert!(matches!(parse_spec(&empty, &prog()), Err(SpecFileError::Spec(SpecError::EmptyAcceptingSet(_)))));
        assert!(matches!(parse_spec("{", &prog()), Err(SpecFileError::Json(_))));
    }

    #[test]
    fn numeric_arguments() {
        let text = r#"{
            "propositions": [{"name": "a", "kind": "reg", "args": ["p0", "a", "==", 1]}],
            "states": ["q"], "initial": "q",
            "delta": [{"from": "q", "letter": "-", "to": "q"}],
            "accept": [["q"]]
        }"#;
        assert!(parse_spec(text, &prog()).is_ok());
    }

    #[test]
    fn accept_all_is_trivial() {
        assert!(accept_all().is_trivial());
    }
}
