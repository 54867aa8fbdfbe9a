//! Human-readable names for control states and automaton state sets.

use wmfair_core::omega::StateSet;
use wmfair_core::{ControlState, MullerSpec, Program};

/// `p0@L a=1 b=0 | p1@3 c=2`: a process is shown at its label when the pc
/// carries one, or as `halt`.
pub fn control(c: &ControlState, prog: &Program) -> String {
    let mut parts = Vec::with_capacity(prog.nprocs());
    for (i, p) in prog.processes.iter().enumerate() {
        let pc = c.pcs[i] as usize;
        let at = match p.labels.iter().find(|(_, j)| *j == pc) {
            Some((l, _)) => l.clone(),
            None if matches!(p.code[pc], wmfair_core::Instr::Halt) => "halt".to_string(),
            None => pc.to_string(),
        };
        let mut s = format!("{}@{at}", p.name);
        for (r, v) in p.regs.iter().zip(&c.regs[i]) {
            s.push_str(&format!(" {r}={v}"));
        }
        parts.push(s);
    }
    parts.join(" | ")
}

pub fn states(spec: &MullerSpec, set: StateSet) -> Vec<String> {
    spec.state_names(set).into_iter().map(String::from).collect()
}
