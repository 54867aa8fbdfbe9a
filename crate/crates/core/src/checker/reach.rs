//! Bounded reachability of final control states.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::litmus::{ControlState, Instr, Pid};
use crate::machine::{Configuration, Machine, Transition};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcomes {
    /// Control states in which every process has halted.
    pub finals: BTreeSet<ControlState>,
    pub states: usize,
    /// The state cap was hit; `finals` may be incomplete.
    pub truncated: bool,
}

/// Processes whose code only jumps forward. Their local steps cannot form
/// a cycle: each one advances the PC, extends the buffer or resolves an
/// entry, and the resulting order on process states is well founded.
pub(crate) fn forward_only(m: &Machine) -> Vec<bool> {
    m.program()
        .processes
        .iter()
        .map(|p| {
            p.code.iter().enumerate().all(|(i, instr)| match instr {
                Instr::Goto(t) | Instr::CondGoto { target: t, .. } => *t > i,
                Instr::Choice(a, b) => *a > i && *b > i,
                _ => true,
            })
        })
        .collect()
}

/// Successors restricted to an ample set: the local steps of the first
/// forward-only process whose enabled non-update steps are all local.
/// Falls back to the full set when the reduced set would leave the bound.
pub(crate) fn reduced_successors(
    m: &Machine,
    c: &Configuration,
    bound: usize,
    forward: &[bool],
) -> Vec<(Transition, Configuration)> {
    let all = m.successors(c);
    for (p, _) in forward.iter().enumerate().take(c.procs.len()).filter(|(_, &f)| f) {
        let pid = Pid(p as u16);
        let own: Vec<_> = all
            .iter()
            .filter(|(t, _)| {
                t.pid() == pid && !matches!(t, Transition::Update { .. } | Transition::Forget { .. })
            })
            .collect();
        if own.is_empty() || !own.iter().all(|(t, _)| m.is_local(c, t)) {
            continue;
        }
        if own.iter().any(|(_, n)| m.size(n) > bound) {
            break;
        }
        return own.into_iter().cloned().collect();
    }
    all
}

/// Explores every configuration of size at most `bound` and collects the
/// final control states. With `reduce`, interleavings of local steps are
/// pruned; final states are preserved.
pub fn outcomes(m: &Machine, bound: usize, reduce: bool, cap: usize) -> Outcomes {
    let prog = &m.program().source;
    let init = m.initial();
    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut out = Outcomes::default();
    let forward = forward_only(m);
    seen.insert(init.clone());
    queue.push_back(init);
    while let Some(c) = queue.pop_front() {
        let cs = m.control_state(&c);
        if cs.all_halted(prog) {
            out.finals.insert(cs);
        }
        let succ = if reduce {
            reduced_successors(m, &c, bound, &forward)
        } else {
            m.successors(&c)
        };
        for (_, n) in succ {
            if m.size(&n) > bound || seen.contains(&n) {
                continue;
            }
            if seen.len() >= cap {
                out.truncated = true;
                continue;
            }
            seen.insert(n.clone());
            queue.push_back(n);
        }
    }
    out.states = seen.len();
    out
}
