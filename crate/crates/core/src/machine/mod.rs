//! The executing machine: configurations, enabled transitions, size and
//! plainness.

mod model;

use alloc::vec::Vec;

pub use model::{ModelId, UnknownModel};

use crate::buffer::{Ctx, Flushed, ProcState, ReadSource, RmwOp};
use crate::litmus::{CompiledProgram, ControlState, FenceKind, Instr, Loc, Pid, Value};
use crate::propagation::{Policy, PropOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MachineOptions {
    /// Maximum number of buffer entries ahead of the program counter.
    pub spec_depth: usize,
    /// Enables the optional forgetting update.
    pub allow_forget: bool,
    /// Execute instructions atomically against the propagation unit.
    /// `None` picks the model's default.
    pub fused: Option<bool>,
}

impl Default for MachineOptions {
    fn default() -> Self {
        MachineOptions {
            spec_depth: 8,
            allow_forget: false,
            fused: None,
        }
    }
}

/// Whole-system state. Derived equality is equality up to renaming, since
/// the propagation unit is kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub procs: Vec<ProcState>,
    pub po: PropOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Local(u8),
    Global(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transition {
    Speculate { pid: Pid, branch: u8 },
    Satisfy { pid: Pid, entry: u8, source: Source },
    FlushWrite { pid: Pid, entry: u8 },
    FlushFence { pid: Pid, entry: u8, msg: u8 },
    Rmw { pid: Pid, entry: u8, msg: u8 },
    AdvancePc { pid: Pid },
    /// One whole instruction against the propagation unit (fused models).
    Step { pid: Pid, choice: u8 },
    Update { pid: Pid, msg: u8 },
    Forget { pid: Pid, msg: u8 },
}

impl Transition {
    pub fn pid(&self) -> Pid {
        match *self {
            Transition::Speculate { pid, .. }
            | Transition::Satisfy { pid, .. }
            | Transition::FlushWrite { pid, .. }
            | Transition::FlushFence { pid, .. }
            | Transition::Rmw { pid, .. }
            | Transition::AdvancePc { pid }
            | Transition::Step { pid, .. }
            | Transition::Update { pid, .. }
            | Transition::Forget { pid, .. } => pid,
        }
    }

    /// Transitions that only drain buffers or propagate messages.
    pub fn is_draining(&self) -> bool {
        !matches!(self, Transition::Speculate { .. } | Transition::Step { .. })
    }
}

/// Compact rendering such as `p1 satisfy #2 from msg 0`. Processes are
/// shown by index.
impl core::fmt::Display for Transition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let p = self.pid().0;
        match *self {
            Transition::Speculate { branch, .. } => write!(f, "p{p} speculate/{branch}"),
            Transition::Satisfy { entry, source: Source::Local(k), .. } => {
                write!(f, "p{p} satisfy #{entry} from buffer #{k}")
            }
            Transition::Satisfy { entry, source: Source::Global(m), .. } => {
                write!(f, "p{p} satisfy #{entry} from msg {m}")
            }
            Transition::FlushWrite { entry, .. } => write!(f, "p{p} flush #{entry}"),
            Transition::FlushFence { entry, msg, .. } => write!(f, "p{p} flush fence #{entry} after msg {msg}"),
            Transition::Rmw { entry, msg, .. } => write!(f, "p{p} rmw #{entry} on msg {msg}"),
            Transition::AdvancePc { .. } => write!(f, "p{p} advance"),
            Transition::Step { choice, .. } => write!(f, "p{p} step/{choice}"),
            Transition::Update { msg, .. } => write!(f, "p{p} update msg {msg}"),
            Transition::Forget { msg, .. } => write!(f, "p{p} forget msg {msg}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Machine {
    prog: CompiledProgram,
    opts: MachineOptions,
    fused: bool,
}

impl Machine {
    pub fn new(prog: CompiledProgram, opts: MachineOptions) -> Machine {
        let fused = opts.fused.unwrap_or(prog.model.fusable());
        Machine { prog, opts, fused }
    }

    pub fn program(&self) -> &CompiledProgram {
        &self.prog
    }

    pub fn options(&self) -> MachineOptions {
        self.opts
    }

    pub fn model(&self) -> ModelId {
        self.prog.model
    }

    pub fn is_fused(&self) -> bool {
        self.fused
    }

    pub fn nlocs(&self) -> usize {
        self.prog.nlocs()
    }

    /// Default size bound for bounded exploration: the initial size plus two
    /// slots per instruction of the longest process, counting at most eight
    /// instructions.
    pub fn default_bound(&self) -> usize {
        let longest = self.prog.source.processes.iter().map(|p| p.code.len()).max().unwrap_or(0);
        self.nlocs() + 2 * longest.min(8)
    }

    /// First bound tried when searching for a stable connectivity graph.
    /// Smaller bounds leave at most one transaction in flight.
    pub fn default_start(&self) -> usize {
        self.nlocs() + 2
    }

    pub fn ctx(&self, p: usize) -> Ctx<'_> {
        Ctx {
            code: &self.prog.processes[p].code,
            model: self.prog.model,
            dmax: self.prog.domain_max,
            spec_depth: self.opts.spec_depth,
        }
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            procs: self
                .prog
                .processes
                .iter()
                .map(|p| ProcState::new(p.nregs))
                .collect(),
            po: PropOrder::new(self.prog.model.policy(), self.prog.nprocs(), self.nlocs()),
        }
    }

    /// Buffered transactions plus propagation messages.
    pub fn size(&self, c: &Configuration) -> usize {
        c.procs.iter().map(ProcState::size).sum::<usize>() + c.po.len()
    }

    pub fn is_plain(&self, c: &Configuration) -> bool {
        c.procs.iter().all(ProcState::is_empty) && c.po.is_plain(self.nlocs())
    }

    /// Values held by the source locations of a plain configuration.
    pub fn plain_memory(&self, c: &Configuration) -> Option<Vec<Value>> {
        if !self.is_plain(c) {
            return None;
        }
        let n = self.prog.source.locations.len();
        let mut mem = alloc::vec![0; n];
        for node in c.po.nodes() {
            if let (Some(x), Some(v)) = (node.loc(), node.value()) {
                if x.idx() < n {
                    mem[x.idx()] = v;
                }
            }
        }
        Some(mem)
    }

    /// The letter exposed to the specification automaton.
    pub fn control_state(&self, c: &Configuration) -> ControlState {
        ControlState {
            pcs: c
                .procs
                .iter()
                .zip(&self.prog.processes)
                .map(|(s, p)| p.origin[s.pc as usize])
                .collect(),
            regs: c.procs.iter().map(|s| s.regs.clone()).collect(),
        }
    }

    /// Canonical hashable key; configurations are stored canonically.
    pub fn canonical_key(&self, c: &Configuration) -> Configuration {
        c.clone()
    }

    /// Whether `t` touches nothing but its own process's buffer and
    /// registers. Such steps commute with every step of other processes.
    pub fn is_local(&self, c: &Configuration, t: &Transition) -> bool {
        match *t {
            Transition::Speculate { .. }
            | Transition::AdvancePc { .. }
            | Transition::Satisfy { source: Source::Local(_), .. } => true,
            Transition::Step { pid, .. } => {
                let pc = c.procs[pid.idx()].pc as usize;
                match &self.prog.processes[pid.idx()].code[pc] {
                    Instr::Fence(k) => !k.is_cumulative(),
                    i => !i.is_memory(),
                }
            }
            _ => false,
        }
    }

    pub fn enabled(&self, c: &Configuration) -> Vec<Transition> {
        self.successors(c).into_iter().map(|(t, _)| t).collect()
    }

    pub fn apply(&self, c: &Configuration, t: Transition) -> Option<Configuration> {
        self.successors(c)
            .into_iter()
            .find(|(u, _)| *u == t)
            .map(|(_, n)| n)
    }

    /// All enabled transitions with their successors, ordered by process,
    /// then rule kind, then queue position.
    pub fn successors(&self, c: &Configuration) -> Vec<(Transition, Configuration)> {
        let mut out = Vec::new();
        for p in 0..c.procs.len() {
            if self.fused {
                self.fused_steps(c, p, &mut out);
            } else {
                self.buffer_steps(c, p, &mut out);
            }
            let pid = Pid(p as u16);
            for msg in c.po.update_candidates(pid) {
                let mut next = c.clone();
                if next.po.silent_update(pid, msg).is_ok() {
                    out.push((Transition::Update { pid, msg: msg as u8 }, next));
                }
            }
            if self.opts.allow_forget {
                for msg in c.po.forget_candidates(pid) {
                    let mut next = c.clone();
                    if next.po.forget(pid, msg).is_ok() {
                        out.push((Transition::Forget { pid, msg: msg as u8 }, next));
                    }
                }
            }
        }
        out
    }

    /// Full fence as a read-modify-write of the hidden location; one
    /// successor unit per admissible source.
    fn full_fence_effects(&self, po: &PropOrder, pid: Pid) -> Vec<(u8, PropOrder)> {
        match self.prog.fence_loc {
            Some(f) if po.policy() != Policy::TrivialMca => po
                .rmw_sources(pid, f)
                .into_iter()
                .filter_map(|src| {
                    let mut next = po.clone();
                    next.rmw(pid, src, Some(0)).ok().map(|_| (src as u8, next))
                })
                .collect(),
            _ => alloc::vec![(0, po.clone())],
        }
    }

    fn rmw_effects(&self, po: &PropOrder, pid: Pid, loc: Loc, op: RmwOp) -> Vec<(u8, Value, PropOrder)> {
        po.rmw_sources(pid, loc)
            .into_iter()
            .filter_map(|src| {
                let mut next = po.clone();
                let old = po.value(src);
                next.rmw(pid, src, op.apply(old, self.prog.domain_max))
                    .ok()
                    .map(|v| (src as u8, v, next))
            })
            .collect()
    }

    fn buffer_steps(&self, c: &Configuration, p: usize, out: &mut Vec<(Transition, Configuration)>) {
        let pid = Pid(p as u16);
        let ctx = self.ctx(p);
        let st = &c.procs[p];
        let with = |s: ProcState, po: PropOrder| {
            let mut procs = c.procs.clone();
            procs[p] = s;
            Configuration { procs, po }
        };
        for (b, next) in st.speculate(&ctx).into_iter().enumerate() {
            out.push((Transition::Speculate { pid, branch: b as u8 }, with(next, c.po.clone())));
        }
        for (i, src) in st.eligible_reads(&ctx) {
            match src {
                ReadSource::Local(j) => {
                    let mut s = st.clone();
                    s.satisfy(&ctx, i, st.local_value(j));
                    let source = Source::Local(j as u8);
                    out.push((Transition::Satisfy { pid, entry: i as u8, source }, with(s, c.po.clone())));
                }
                ReadSource::Global => {
                    for msg in c.po.read_sources(pid, st.read_loc(&ctx, i)) {
                        let mut po = c.po.clone();
                        let Ok(v) = po.read(pid, msg) else { continue };
                        let mut s = st.clone();
                        s.satisfy(&ctx, i, v);
                        let source = Source::Global(msg as u8);
                        out.push((Transition::Satisfy { pid, entry: i as u8, source }, with(s, po)));
                    }
                }
            }
        }
        for i in st.eligible_flushes(&ctx) {
            let mut s = st.clone();
            match s.flush(&ctx, i) {
                Flushed::Write { loc, value } => {
                    let mut po = c.po.clone();
                    if po.insert_write(pid, loc, value).is_ok() {
                        out.push((Transition::FlushWrite { pid, entry: i as u8 }, with(s, po)));
                    }
                }
                Flushed::Fence(FenceKind::Full) => {
                    for (msg, po) in self.full_fence_effects(&c.po, pid) {
                        out.push((Transition::FlushFence { pid, entry: i as u8, msg }, with(s.clone(), po)));
                    }
                }
                Flushed::Fence(_) => {
                    let mut po = c.po.clone();
                    if po.insert_fence(pid).is_ok() {
                        out.push((Transition::FlushFence { pid, entry: i as u8, msg: 0 }, with(s, po)));
                    }
                }
            }
        }
        if let Some((i, loc, op)) = st.eligible_rmw(&ctx) {
            for (msg, v, po) in self.rmw_effects(&c.po, pid, loc, op) {
                let mut s = st.clone();
                s.complete_rmw(&ctx, i, v);
                out.push((Transition::Rmw { pid, entry: i as u8, msg }, with(s, po)));
            }
        }
        let mut s = st.clone();
        if s.advance_pc(&ctx) {
            out.push((Transition::AdvancePc { pid }, with(s, c.po.clone())));
        }
    }

    fn fused_steps(&self, c: &Configuration, p: usize, out: &mut Vec<(Transition, Configuration)>) {
        let pid = Pid(p as u16);
        let st = &c.procs[p];
        let pc = st.pc as usize;
        let dmax = self.prog.domain_max;
        let view: Vec<Option<Value>> = st.regs.iter().map(|&v| Some(v)).collect();
        let eval = |e: &crate::litmus::Expr| e.eval_local(&view, dmax).expect("registers are known");
        let mut push = |choice: u8, jump: usize, def: Option<(crate::litmus::Reg, Value)>, po: PropOrder| {
            let mut s = st.clone();
            s.pc = jump as u16;
            s.st = jump as u16;
            if let Some((r, v)) = def {
                s.regs[r.idx()] = v;
            }
            let mut procs = c.procs.clone();
            procs[p] = s;
            out.push((Transition::Step { pid, choice }, Configuration { procs, po }));
        };
        match &self.prog.processes[p].code[pc] {
            Instr::Halt => {}
            Instr::Load { reg, loc, .. } => {
                for msg in c.po.read_sources(pid, *loc) {
                    let mut po = c.po.clone();
                    if let Ok(v) = po.read(pid, msg) {
                        push(msg as u8, pc + 1, Some((*reg, v)), po);
                    }
                }
            }
            Instr::Store { loc, expr, .. } => {
                let mut po = c.po.clone();
                if po.insert_write(pid, *loc, eval(expr)).is_ok() {
                    push(0, pc + 1, None, po);
                }
            }
            Instr::Fence(FenceKind::Full) => {
                for (msg, po) in self.full_fence_effects(&c.po, pid) {
                    push(msg, pc + 1, None, po);
                }
            }
            Instr::Fence(FenceKind::Lwsync) => {
                let mut po = c.po.clone();
                if po.insert_fence(pid).is_ok() {
                    push(0, pc + 1, None, po);
                }
            }
            Instr::Fence(_) => push(0, pc + 1, None, c.po.clone()),
            Instr::Rmw { reg, loc, kind } => {
                let op = match kind {
                    crate::litmus::RmwKind::Cas(a, b) => RmwOp::Cas {
                        expected: eval(a),
                        new: eval(b),
                    },
                    crate::litmus::RmwKind::Fadd(e) => RmwOp::Fadd(eval(e)),
                    crate::litmus::RmwKind::Swap(e) => RmwOp::Swap(eval(e)),
                };
                for (msg, v, po) in self.rmw_effects(&c.po, pid, *loc, op) {
                    push(msg, pc + 1, reg.map(|r| (r, v)), po);
                }
            }
            Instr::Assign { reg, expr } => push(0, pc + 1, Some((*reg, eval(expr))), c.po.clone()),
            Instr::Goto(t) => push(0, *t, None, c.po.clone()),
            Instr::CondGoto { cond, target } => {
                let holds = cond.holds_local(&view).expect("registers are known");
                let t = if holds { *target } else { pc + 1 };
                push(0, t, None, c.po.clone());
            }
            Instr::Choice(a, b) => {
                push(0, *a, None, c.po.clone());
                if a != b {
                    push(1, *b, None, c.po.clone());
                }
            }
        }
    }
}
