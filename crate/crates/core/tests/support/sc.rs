// Control states of plain SC configurations against a direct interleaving
// interpreter that has no buffers and a flat memory. Non-plain
// configurations are skipped: their pcs trail operations already in flight.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;

use wmfair_core::litmus::RmwKind;
use wmfair_core::{compile, ControlState, Instr, Machine, MachineOptions, ModelId, Program, Value};

pub fn corpus_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "lit"))
        .collect();
    v.sort();
    v
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    pcs: Vec<usize>,
    regs: Vec<Vec<Value>>,
    mem: Vec<Value>,
}

pub fn interleavings(prog: &Program) -> BTreeSet<ControlState> {
    let dmax = prog.domain_max;
    let init = State {
        pcs: vec![0; prog.nprocs()],
        regs: prog.processes.iter().map(|p| vec![0; p.regs.len()]).collect(),
        mem: vec![0; prog.locations.len()],
    };
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([init.clone()]);
    seen.insert(init);
    while let Some(s) = queue.pop_front() {
        for p in 0..prog.nprocs() {
            let regs = &s.regs[p];
            let env = |_: Option<wmfair_core::Pid>, r: wmfair_core::Reg| Some(regs[r.idx()]);
            let val = |e: &wmfair_core::Expr| e.eval(&env, dmax).unwrap();
            let truth = |e: &wmfair_core::Expr| e.eval_raw(&env).unwrap() != 0;
            let pc = s.pcs[p];
            let mut next = Vec::new();
            let mut go = |f: &dyn Fn(&mut State), to: usize| {
                let mut n = s.clone();
                f(&mut n);
                n.pcs[p] = to;
                next.push(n);
            };
            match &prog.processes[p].code[pc] {
                Instr::Halt => {}
                Instr::Load { reg, loc, .. } => go(&|n| n.regs[p][reg.idx()] = n.mem[loc.idx()], pc + 1),
                Instr::Store { loc, expr, .. } => {
                    let v = val(expr);
                    go(&|n| n.mem[loc.idx()] = v, pc + 1)
                }
                Instr::Assign { reg, expr } => {
                    let v = val(expr);
                    go(&|n| n.regs[p][reg.idx()] = v, pc + 1)
                }
                Instr::Fence(_) => go(&|_| {}, pc + 1),
                Instr::Rmw { reg, loc, kind } => {
                    let old = s.mem[loc.idx()];
                    let new = match kind {
                        RmwKind::Cas(a, b) => (old == val(a)).then(|| val(b)),
                        RmwKind::Fadd(d) => Some(((old as u64 + val(d) as u64) % (dmax as u64 + 1)) as Value),
                        RmwKind::Swap(e) => Some(val(e)),
                    };
                    go(
                        &|n| {
                            if let Some(v) = new {
                                n.mem[loc.idx()] = v;
                            }
                            if let Some(r) = reg {
                                n.regs[p][r.idx()] = old;
                            }
                        },
                        pc + 1,
                    )
                }
                Instr::Goto(t) => go(&|_| {}, *t),
                Instr::CondGoto { cond, target } => go(&|_| {}, if truth(cond) { *target } else { pc + 1 }),
                Instr::Choice(a, b) => {
                    go(&|_| {}, *a);
                    go(&|_| {}, *b);
                }
            }
            for n in next {
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    seen.into_iter()
        .map(|s| ControlState {
            pcs: s.pcs.iter().map(|&p| p as u32).collect(),
            regs: s.regs,
        })
        .collect()
}

pub fn machine_control_states(prog: &Program) -> BTreeSet<ControlState> {
    let m = Machine::new(compile(prog, ModelId::Sc).unwrap(), MachineOptions::default());
    let bound = m.default_bound();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([m.initial()]);
    let mut out = BTreeSet::new();
    seen.insert(m.initial());
    while let Some(c) = queue.pop_front() {
        if m.is_plain(&c) {
            out.insert(m.control_state(&c));
        }
        for (_, n) in m.successors(&c) {
            assert!(m.size(&n) <= bound, "SC run exceeded the bound");
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    out
}
