//! Deterministic Muller automata over control-state letters, and their
//! synchronous composition with the machine.
//!
//! A letter is the truth vector of the specification's propositions,
//! packed into the low bits of a `u32` (proposition `i` is bit `i`).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::litmus::{ControlState, Pid, Program, Reg, Value};
use crate::machine::{Configuration, Machine};

pub type Letter = u32;
/// Set of automaton states, one bit per state.
pub type StateSet = u64;

pub const MAX_PROPS: usize = 12;
pub const MAX_STATES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn parse(s: &str) -> Option<CmpOp> {
        Some(match s {
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub fn holds(self, a: Value, b: Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// An atomic proposition over control states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropKind {
    /// The process's program counter is at a source instruction index.
    At { pid: Pid, pc: u32 },
    Halted(Pid),
    AllHalted,
    Reg { pid: Pid, reg: Reg, op: CmpOp, value: Value },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("unknown proposition kind `{0}`")]
    UnknownKind(String),
    #[error("proposition `{name}`: {msg}")]
    BadArgs { name: String, msg: String },
    #[error("unknown automaton state `{0}`")]
    UnknownState(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("letter `{0}` does not match the {1} declared propositions")]
    BadLetter(String, usize),
    #[error("transition from `{state}` on letter {letter:0w$b} is missing", w = *width)]
    NotTotal { state: String, letter: Letter, width: usize },
    #[error("transitions from `{state}` on letter {letter:0w$b} disagree", w = *width)]
    NotDeterministic { state: String, letter: Letter, width: usize },
    #[error("accepting set {0} is empty")]
    EmptyAcceptingSet(usize),
    #[error("too many {0}")]
    TooMany(&'static str),
}

impl PropKind {
    /// Resolves a proposition given by kind name and string arguments.
    ///
    /// * `at p L` — process `p` is at label `L`
    /// * `halted p`
    /// * `all_halted`
    /// * `reg p r op v` — register `r` of `p` compared with constant `v`
    pub fn resolve(name: &str, kind: &str, args: &[String], prog: &Program) -> Result<PropKind, SpecError> {
        let bad = |msg: &str| SpecError::BadArgs {
            name: name.to_string(),
            msg: msg.to_string(),
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(&alloc::format!("expected {n} arguments, got {}", args.len())))
            }
        };
        let pid = |s: &str| prog.process(s).ok_or_else(|| bad(&alloc::format!("unknown process `{s}`")));
        match kind {
            "at" => {
                arity(2)?;
                let p = pid(&args[0])?;
                let pc = prog.processes[p.idx()]
                    .label(&args[1])
                    .ok_or_else(|| bad(&alloc::format!("unknown label `{}`", args[1])))?;
                Ok(PropKind::At { pid: p, pc: pc as u32 })
            }
            "halted" => {
                arity(1)?;
                Ok(PropKind::Halted(pid(&args[0])?))
            }
            "all_halted" => {
                arity(0)?;
                Ok(PropKind::AllHalted)
            }
            "reg" => {
                arity(4)?;
                let p = pid(&args[0])?;
                let r = prog.processes[p.idx()]
                    .regs
                    .iter()
                    .position(|r| *r == args[1])
                    .ok_or_else(|| bad(&alloc::format!("unknown register `{}`", args[1])))?;
                let op = CmpOp::parse(&args[2]).ok_or_else(|| bad("bad comparison"))?;
                let value = args[3].parse::<Value>().map_err(|_| bad("bad value"))?;
                Ok(PropKind::Reg {
                    pid: p,
                    reg: Reg(r as u16),
                    op,
                    value,
                })
            }
            other => Err(SpecError::UnknownKind(other.to_string())),
        }
    }

    pub fn holds(&self, c: &ControlState, prog: &Program) -> bool {
        match *self {
            PropKind::At { pid, pc } => c.pcs[pid.idx()] == pc,
            PropKind::Halted(pid) => c.halted(prog, pid),
            PropKind::AllHalted => c.all_halted(prog),
            PropKind::Reg { pid, reg, op, value } => op.holds(c.regs[pid.idx()][reg.idx()], value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposition {
    pub name: String,
    pub kind: PropKind,
}

/// A transition rule as written: `letter` has one character per
/// proposition, `1`, `0`, or `-` for either.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub from: String,
    pub letter: String,
    pub to: String,
}

/// Deterministic Muller automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MullerSpec {
    pub props: Vec<Proposition>,
    pub states: Vec<String>,
    pub initial: usize,
    /// `delta[q * 2^k + a]` for `k` propositions.
    delta: Vec<u8>,
    pub accept: Vec<StateSet>,
}

/// Expands a letter pattern into the letters it matches. Character `i` of
/// the pattern is proposition `i`.
fn expand(pattern: &str, k: usize) -> Option<Vec<Letter>> {
    if pattern.chars().count() != k {
        return None;
    }
    let mut out = alloc::vec![0];
    for (i, ch) in pattern.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => out.iter_mut().for_each(|a| *a |= 1 << i),
            '-' => {
                let n = out.len();
                for j in 0..n {
                    out.push(out[j] | 1 << i);
                }
            }
            _ => return None,
        }
    }
    Some(out)
}

impl MullerSpec {
    pub fn new(
        props: Vec<Proposition>,
        states: Vec<String>,
        initial: &str,
        rules: &[Rule],
        accept: &[Vec<String>],
    ) -> Result<MullerSpec, SpecError> {
        if props.len() > MAX_PROPS {
            return Err(SpecError::TooMany("propositions"));
        }
        if states.len() > MAX_STATES || states.is_empty() {
            return Err(SpecError::TooMany("states"));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(SpecError::Duplicate(s.clone()));
            }
        }
        for (i, p) in props.iter().enumerate() {
            if props[..i].iter().any(|q| q.name == p.name) {
                return Err(SpecError::Duplicate(p.name.clone()));
            }
        }
        let state = |s: &str| {
            states
                .iter()
                .position(|t| t == s)
                .ok_or_else(|| SpecError::UnknownState(s.to_string()))
        };
        let k = props.len();
        let width = 1usize << k;
        const UNSET: u8 = u8::MAX;
        let mut delta = alloc::vec![UNSET; states.len() * width];
        for r in rules {
            let from = state(&r.from)?;
            let to = state(&r.to)? as u8;
            let letters = expand(&r.letter, k).ok_or_else(|| SpecError::BadLetter(r.letter.clone(), k))?;
            for a in letters {
                let slot = &mut delta[from * width + a as usize];
                if *slot != UNSET && *slot != to {
                    return Err(SpecError::NotDeterministic {
                        state: r.from.clone(),
                        letter: a,
                        width: k,
                    });
                }
                *slot = to;
            }
        }
        if let Some(i) = delta.iter().position(|&t| t == UNSET) {
            return Err(SpecError::NotTotal {
                state: states[i / width].clone(),
                letter: (i % width) as Letter,
                width: k,
            });
        }
        let mut acc = Vec::new();
        for (i, set) in accept.iter().enumerate() {
            if set.is_empty() {
                return Err(SpecError::EmptyAcceptingSet(i));
            }
            let mut bits: StateSet = 0;
            for s in set {
                bits |= 1 << state(s)?;
            }
            if !acc.contains(&bits) {
                acc.push(bits);
            }
        }
        Ok(MullerSpec {
            initial: state(initial)?,
            props,
            states,
            delta,
            accept: acc,
        })
    }

    /// Builds a spec from a raw transition table, `table[q][a]`.
    pub fn from_table(
        props: Vec<Proposition>,
        nstates: usize,
        table: &[Vec<usize>],
        accept: Vec<StateSet>,
    ) -> MullerSpec {
        let width = 1usize << props.len();
        assert!(nstates <= MAX_STATES && table.len() == nstates);
        let delta = table
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), width);
                row.iter().map(|&q| q as u8)
            })
            .collect();
        MullerSpec {
            props,
            states: (0..nstates).map(|i| alloc::format!("q{i}")).collect(),
            initial: 0,
            delta,
            accept,
        }
    }

    pub fn nletters(&self) -> usize {
        1 << self.props.len()
    }

    pub fn step(&self, q: usize, a: Letter) -> usize {
        self.delta[q * self.nletters() + a as usize] as usize
    }

    pub fn letter(&self, c: &ControlState, prog: &Program) -> Letter {
        self.props
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind.holds(c, prog))
            .fold(0, |a, (i, _)| a | 1 << i)
    }

    /// Muller acceptance of the set of states visited infinitely often.
    pub fn accepts(&self, inf: StateSet) -> bool {
        self.accept.contains(&inf)
    }

    /// Whether every nonempty state set is accepting.
    pub fn is_trivial(&self) -> bool {
        let n = self.states.len();
        let mut count = 0u128;
        for &s in &self.accept {
            if s != 0 && (n == 64 || s >> n == 0) {
                count += 1;
            }
        }
        count == (1u128 << n) - 1
    }

    /// Sufficient check for stutter insensitivity: reading a letter twice
    /// leads where reading it once does. Only `letters` are considered
    /// (all letters when `None`). Returns a violating `(q, a)` otherwise.
    pub fn check_stutter_insensitive(&self, letters: Option<&[Letter]>) -> Result<(), (usize, Letter)> {
        let all: Vec<Letter> = (0..self.nletters() as Letter).collect();
        let letters = letters.unwrap_or(&all);
        for q in 0..self.states.len() {
            for &a in letters {
                let q1 = self.step(q, a);
                if self.step(q1, a) != q1 {
                    return Err((q, a));
                }
            }
        }
        Ok(())
    }

    pub fn state_names(&self, set: StateSet) -> Vec<&str> {
        (0..self.states.len())
            .filter(|&q| set >> q & 1 == 1)
            .map(|q| self.states[q].as_str())
            .collect()
    }
}

/// A state of the synchronous composition of automaton and machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnnotatedState {
    pub q: u8,
    pub config: Configuration,
}

/// Initial annotated state: the automaton has already read the initial
/// control state.
pub fn initial(spec: &MullerSpec, m: &Machine) -> AnnotatedState {
    let config = m.initial();
    let a = spec.letter(&m.control_state(&config), &m.program().source);
    AnnotatedState {
        q: spec.step(spec.initial, a) as u8,
        config,
    }
}

/// Moves the automaton along a machine step to `next`.
pub fn product_step(spec: &MullerSpec, m: &Machine, q: u8, next: Configuration) -> AnnotatedState {
    let a = spec.letter(&m.control_state(&next), &m.program().source);
    AnnotatedState {
        q: spec.step(q as usize, a) as u8,
        config: next,
    }
}
