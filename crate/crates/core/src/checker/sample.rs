//! Random runs under uniform choice among the enabled transitions.

use rand::Rng;

use crate::litmus::ControlState;
use crate::machine::Machine;
use crate::omega::{self, AnnotatedState, MullerSpec, StateSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunAudit {
    pub steps: usize,
    /// Plain configurations visited, counting the initial one.
    pub plain_hits: usize,
    pub max_size: usize,
    /// Nothing was enabled at the end.
    pub deadlocked: bool,
    /// Transitions were enabled at the end but all exceeded the bound.
    pub stuck: bool,
    pub final_control: ControlState,
    pub last: AnnotatedState,
    /// Automaton states the run settles in: the stutter cycle after a
    /// deadlock, otherwise the states of the second half of the run.
    pub tail: StateSet,
}

impl RunAudit {
    /// Whether the tail is an accepting set. Runs that got stuck at the
    /// bound are not judged.
    pub fn verdict(&self, spec: &MullerSpec) -> Option<bool> {
        (!self.stuck).then(|| spec.accepts(self.tail))
    }
}

/// Runs at most `steps` transitions, each chosen uniformly among those
/// leading to configurations of size at most `bound`.
pub fn fair_sample<R: Rng>(m: &Machine, spec: &MullerSpec, bound: usize, steps: usize, rng: &mut R) -> RunAudit {
    let mut st = omega::initial(spec, m);
    let mut plain_hits = usize::from(m.is_plain(&st.config));
    let mut max_size = m.size(&st.config);
    let mut taken = 0;
    let mut deadlocked = false;
    let mut stuck = false;
    let mut qs = alloc::vec![st.q];
    while taken < steps {
        let mut succ = m.successors(&st.config);
        if succ.is_empty() {
            deadlocked = true;
            break;
        }
        succ.retain(|(_, n)| m.size(n) <= bound);
        if succ.is_empty() {
            stuck = true;
            break;
        }
        let (_, next) = succ.swap_remove(rng.gen_range(0..succ.len()));
        st = omega::product_step(spec, m, st.q, next);
        taken += 1;
        max_size = max_size.max(m.size(&st.config));
        plain_hits += usize::from(m.is_plain(&st.config));
        qs.push(st.q);
    }
    let mut tail: StateSet = 0;
    if deadlocked {
        // the automaton keeps reading the final letter and cycles within
        // |Q| steps
        let n = spec.states.len();
        for i in 0..2 * n {
            st = omega::product_step(spec, m, st.q, st.config.clone());
            if i >= n {
                tail |= 1 << st.q;
            }
        }
    } else {
        tail = qs[qs.len() / 2..].iter().fold(0, |s, &q| s | 1 << q);
    }
    RunAudit {
        steps: taken,
        plain_hits,
        max_size,
        deadlocked,
        stuck,
        final_control: m.control_state(&st.config),
        last: st,
        tail,
    }
}
