//! Per-process transaction buffers with a speculation tracker.
//!
//! Entries are kept in speculated program order. `pc_index` splits the
//! queue: entries before it have been crossed by the program counter (only
//! unflushed writes and the store-ordering barriers that still constrain
//! them), entries from it onward run up to the speculation tracker.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::litmus::{expr::wrap, FenceKind, Instr, LoadMode, Loc, Reg, RmwKind, StoreMode, Value};
use crate::machine::ModelId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntryState {
    /// Satisfied once the value is known.
    Read(Option<Value>),
    Write { value: Option<Value>, flushed: bool },
    Fence { flushed: bool },
    /// Executed once the value read is known.
    Rmw(Option<Value>),
    Assign(Option<Value>),
    Branch { taken: bool, resolved: bool },
    Jump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    /// Compiled instruction index.
    pub at: u16,
    pub state: EntryState,
}

impl Entry {
    /// Memory transactions count towards the configuration size.
    pub fn is_transaction(&self) -> bool {
        matches!(
            self.state,
            EntryState::Read(_) | EntryState::Write { .. } | EntryState::Fence { .. } | EntryState::Rmw(_)
        )
    }
}

/// Static context a buffer operates in.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub code: &'a [Instr],
    pub model: ModelId,
    pub dmax: Value,
    pub spec_depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReadSource {
    /// The buffered write at this queue position.
    Local(usize),
    Global,
}

/// Effect handed to the propagation unit by a flush.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flushed {
    Write { loc: Loc, value: Value },
    Fence(FenceKind),
}

/// Resolved operands of a read-modify-write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmwOp {
    Cas { expected: Value, new: Value },
    Fadd(Value),
    Swap(Value),
}

impl RmwOp {
    /// Value written after reading `old`, or `None` for a failed CAS.
    pub fn apply(self, old: Value, dmax: Value) -> Option<Value> {
        match self {
            RmwOp::Cas { expected, new } => (old == expected).then_some(new),
            RmwOp::Fadd(d) => Some(wrap(old as i64 + d as i64, dmax)),
            RmwOp::Swap(v) => Some(v),
        }
    }
}

/// Control state and transaction buffer of one process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcState {
    pub pc: u16,
    pub regs: Vec<Value>,
    pub entries: Vec<Entry>,
    pub pc_index: u8,
    /// Next instruction the speculation tracker will cross.
    pub st: u16,
}

fn load_of(instr: &Instr) -> (Loc, Reg, LoadMode) {
    match instr {
        Instr::Load { reg, loc, mode } => (*loc, *reg, *mode),
        _ => unreachable!("entry is not a load"),
    }
}

impl ProcState {
    pub fn new(nregs: usize) -> ProcState {
        ProcState {
            pc: 0,
            regs: alloc::vec![0; nregs],
            entries: Vec::new(),
            pc_index: 0,
            st: 0,
        }
    }

    fn pci(&self) -> usize {
        self.pc_index as usize
    }

    pub fn size(&self) -> usize {
        self.entries.iter().filter(|e| e.is_transaction()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Register valuation just before queue position `upto`.
    pub fn view(&self, ctx: &Ctx, upto: usize) -> Vec<Option<Value>> {
        let mut regs: Vec<Option<Value>> = self.regs.iter().map(|&v| Some(v)).collect();
        for e in &self.entries[self.pci().min(upto)..upto] {
            let value = match e.state {
                EntryState::Read(v) | EntryState::Rmw(v) | EntryState::Assign(v) => v,
                _ => continue,
            };
            if let Some(r) = ctx.code[e.at as usize].defines() {
                regs[r.idx()] = value;
            }
        }
        regs
    }

    fn instr<'a>(&self, ctx: &Ctx<'a>, k: usize) -> &'a Instr {
        &ctx.code[self.entries[k].at as usize]
    }

    fn fence_kind(&self, ctx: &Ctx, k: usize) -> Option<FenceKind> {
        match self.instr(ctx, k) {
            Instr::Fence(kind) => Some(*kind),
            _ => None,
        }
    }

    fn entry_loc(&self, ctx: &Ctx, k: usize) -> Option<Loc> {
        match self.instr(ctx, k) {
            Instr::Load { loc, .. } | Instr::Store { loc, .. } | Instr::Rmw { loc, .. } => Some(*loc),
            _ => None,
        }
    }

    fn active_read(&self, k: usize) -> bool {
        matches!(self.entries[k].state, EntryState::Read(None))
    }

    fn active_write(&self, k: usize) -> bool {
        matches!(self.entries[k].state, EntryState::Write { flushed: false, .. })
    }

    fn any_before(&self, k: usize, pred: impl Fn(usize) -> bool) -> bool {
        (0..k).any(pred)
    }

    /// Whether `k` still holds up memory transactions behind it.
    fn unsettled(&self, ctx: &Ctx, k: usize) -> bool {
        match self.entries[k].state {
            EntryState::Read(None) | EntryState::Rmw(None) => true,
            EntryState::Write { flushed, .. } => !flushed,
            EntryState::Fence { flushed } => match self.fence_kind(ctx, k) {
                Some(FenceKind::Isync) => true,
                Some(k) if k.is_cumulative() => !flushed,
                _ => false,
            },
            EntryState::Branch { resolved, .. } => !resolved,
            _ => false,
        }
    }

    fn clogged(&self, ctx: &Ctx) -> bool {
        let tail = &self.entries[self.pci()..];
        tail.iter().enumerate().any(|(i, e)| match &ctx.code[e.at as usize] {
            // the FIFO protocol performs memory operations strictly in order
            _ if ctx.model == ModelId::Fifo => e.is_transaction(),
            Instr::Fence(FenceKind::Full | FenceKind::Isync) | Instr::Rmw { .. } => true,
            Instr::Load { mode: LoadMode::Acquire, .. } => true,
            Instr::Fence(FenceKind::MembarLL) => tail.get(i + 1).is_some_and(|n| {
                ctx.code[n.at as usize] == Instr::Fence(FenceKind::MembarLS)
            }),
            _ => false,
        })
    }

    /// Successor states of one speculation step, in canonical order.
    pub fn speculate(&self, ctx: &Ctx) -> Vec<ProcState> {
        if self.clogged(ctx) || self.entries.len() - self.pci() >= ctx.spec_depth {
            return Vec::new();
        }
        let at = self.st;
        let view = self.view(ctx, self.entries.len());
        let push = |state: EntryState, st: u16| {
            let mut next = self.clone();
            next.entries.push(Entry { at, state });
            next.st = st;
            next
        };
        let eval = |e: &crate::litmus::Expr| e.eval_local(&view, ctx.dmax);
        match &ctx.code[at as usize] {
            Instr::Halt => Vec::new(),
            Instr::Load { .. } => alloc::vec![push(EntryState::Read(None), at + 1)],
            Instr::Store { expr, .. } => alloc::vec![push(
                EntryState::Write {
                    value: eval(expr),
                    flushed: false
                },
                at + 1
            )],
            Instr::Fence(_) => alloc::vec![push(EntryState::Fence { flushed: false }, at + 1)],
            Instr::Rmw { .. } => alloc::vec![push(EntryState::Rmw(None), at + 1)],
            Instr::Assign { expr, .. } => alloc::vec![push(EntryState::Assign(eval(expr)), at + 1)],
            Instr::Goto(t) => alloc::vec![push(EntryState::Jump, *t as u16)],
            Instr::CondGoto { cond, target } => {
                let t = *target as u16;
                match cond.holds_local(&view) {
                    Some(c) => alloc::vec![push(EntryState::Jump, if c { t } else { at + 1 })],
                    None if t == at + 1 => alloc::vec![push(EntryState::Jump, t)],
                    None => alloc::vec![
                        push(EntryState::Branch { taken: true, resolved: false }, t),
                        push(EntryState::Branch { taken: false, resolved: false }, at + 1),
                    ],
                }
            }
            Instr::Choice(a, b) => {
                let mut out = alloc::vec![push(EntryState::Jump, *a as u16)];
                if a != b {
                    out.push(push(EntryState::Jump, *b as u16));
                }
                out
            }
        }
    }

    fn read_blocked_by(&self, ctx: &Ctx, i: usize, k: usize) -> bool {
        let (loc, _, mode) = load_of(self.instr(ctx, i));
        match self.entries[k].state {
            EntryState::Read(None) => {
                let (kloc, _, kmode) = load_of(self.instr(ctx, k));
                kmode == LoadMode::Acquire
                    || (kloc == loc && !(mode == LoadMode::Racing && kmode == LoadMode::Racing))
            }
            EntryState::Write { flushed: false, .. } => {
                let release = matches!(
                    self.instr(ctx, k),
                    Instr::Store { mode: StoreMode::Release, .. }
                );
                self.entry_loc(ctx, k) == Some(loc)
                    || (release && mode == LoadMode::Acquire && ctx.model == ModelId::Armv8)
            }
            EntryState::Fence { flushed } => match self.fence_kind(ctx, k).unwrap() {
                FenceKind::Full => !flushed,
                FenceKind::Lwsync => !flushed && self.any_before(k, |j| self.active_read(j)),
                FenceKind::Isync => true,
                FenceKind::MembarLL => self.any_before(k, |j| self.active_read(j)),
                FenceKind::MembarSL => self.any_before(k, |j| self.active_write(j)),
                FenceKind::MembarLS | FenceKind::MembarSS => false,
            },
            EntryState::Rmw(None) => true,
            _ => false,
        }
    }

    /// Reads that may be satisfied now, with their source.
    pub fn eligible_reads(&self, ctx: &Ctx) -> Vec<(usize, ReadSource)> {
        let mut out = Vec::new();
        for i in self.pci()..self.entries.len() {
            if !self.active_read(i) {
                continue;
            }
            let (loc, _, _) = load_of(self.instr(ctx, i));
            let local = (0..i).rev().find(|&j| {
                matches!(self.entries[j].state, EntryState::Write { .. })
                    && self.entry_loc(ctx, j) == Some(loc)
            });
            let (from, source) = match local {
                Some(j) => match self.entries[j].state {
                    EntryState::Write { flushed: false, value } => {
                        if value.is_none() {
                            continue;
                        }
                        (j + 1, ReadSource::Local(j))
                    }
                    _ => (0, ReadSource::Global),
                },
                None => (0, ReadSource::Global),
            };
            if (from..i).all(|k| !self.read_blocked_by(ctx, i, k)) {
                out.push((i, source));
            }
        }
        out
    }

    pub fn local_value(&self, j: usize) -> Value {
        match self.entries[j].state {
            EntryState::Write { value: Some(v), .. } => v,
            _ => panic!("not a resolved write"),
        }
    }

    /// Location read by the entry at `i`.
    pub fn read_loc(&self, ctx: &Ctx, i: usize) -> Loc {
        load_of(self.instr(ctx, i)).0
    }

    pub fn satisfy(&mut self, ctx: &Ctx, i: usize, value: Value) {
        debug_assert!(self.active_read(i));
        self.entries[i].state = EntryState::Read(Some(value));
        self.refresh(ctx);
    }

    fn write_blocked_by(&self, ctx: &Ctx, i: usize, k: usize) -> bool {
        let loc = self.entry_loc(ctx, i);
        let release = matches!(
            self.instr(ctx, i),
            Instr::Store { mode: StoreMode::Release, .. }
        );
        match self.entries[k].state {
            EntryState::Read(None) => {
                release
                    || self.entry_loc(ctx, k) == loc
                    || load_of(self.instr(ctx, k)).2 == LoadMode::Acquire
            }
            EntryState::Write { flushed: false, .. } => release || self.entry_loc(ctx, k) == loc,
            EntryState::Fence { flushed } => match self.fence_kind(ctx, k).unwrap() {
                FenceKind::Full | FenceKind::Lwsync => !flushed,
                FenceKind::Isync => true,
                FenceKind::MembarSS => self.any_before(k, |j| self.active_write(j)),
                FenceKind::MembarLS => self.any_before(k, |j| self.active_read(j)),
                FenceKind::MembarLL | FenceKind::MembarSL => false,
            },
            EntryState::Rmw(None) => true,
            EntryState::Branch { resolved, .. } => !resolved,
            _ => false,
        }
    }

    /// Writes and cumulative fences that may be flushed now.
    pub fn eligible_flushes(&self, ctx: &Ctx) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.entries.len() {
            let ok = match self.entries[i].state {
                EntryState::Write {
                    value: Some(_),
                    flushed: false,
                } => (0..i).all(|k| !self.write_blocked_by(ctx, i, k)),
                EntryState::Fence { flushed: false } => {
                    self.fence_kind(ctx, i).unwrap().is_cumulative()
                        && (0..i).all(|k| !self.unsettled(ctx, k))
                }
                _ => false,
            };
            if ok {
                out.push(i);
            }
        }
        out
    }

    pub fn flush(&mut self, ctx: &Ctx, i: usize) -> Flushed {
        match (self.entries[i].state, self.instr(ctx, i)) {
            (EntryState::Write { value: Some(value), flushed: false }, Instr::Store { loc, .. }) => {
                let loc = *loc;
                if i < self.pci() {
                    self.entries.remove(i);
                    self.pc_index -= 1;
                    self.purge_crossed_barriers(ctx);
                } else {
                    self.entries[i].state = EntryState::Write {
                        value: Some(value),
                        flushed: true,
                    };
                }
                Flushed::Write { loc, value }
            }
            (EntryState::Fence { flushed: false }, Instr::Fence(kind)) => {
                self.entries[i].state = EntryState::Fence { flushed: true };
                Flushed::Fence(*kind)
            }
            _ => panic!("entry {i} is not flushable"),
        }
    }

    /// Crossed store barriers with no unflushed write before them no longer
    /// constrain anything.
    fn purge_crossed_barriers(&mut self, ctx: &Ctx) {
        let mut k = 0;
        while k < self.pci() {
            let keep = matches!(self.entries[k].state, EntryState::Write { .. })
                || (0..k).any(|j| self.active_write(j));
            if keep {
                k += 1;
            } else {
                debug_assert!(self.fence_kind(ctx, k).is_some());
                self.entries.remove(k);
                self.pc_index -= 1;
            }
        }
    }

    /// The read-modify-write that may execute now, with its operands.
    pub fn eligible_rmw(&self, ctx: &Ctx) -> Option<(usize, Loc, RmwOp)> {
        let i = (self.pci()..self.entries.len())
            .find(|&i| matches!(self.entries[i].state, EntryState::Rmw(None)))?;
        if (0..i).any(|k| self.unsettled(ctx, k)) {
            return None;
        }
        let view = self.view(ctx, i);
        let eval = |e: &crate::litmus::Expr| e.eval_local(&view, ctx.dmax);
        let Instr::Rmw { loc, kind, .. } = self.instr(ctx, i) else {
            unreachable!()
        };
        let op = match kind {
            RmwKind::Cas(a, b) => RmwOp::Cas {
                expected: eval(a)?,
                new: eval(b)?,
            },
            RmwKind::Fadd(e) => RmwOp::Fadd(eval(e)?),
            RmwKind::Swap(e) => RmwOp::Swap(eval(e)?),
        };
        Some((i, *loc, op))
    }

    pub fn complete_rmw(&mut self, ctx: &Ctx, i: usize, read: Value) {
        self.entries[i].state = EntryState::Rmw(Some(read));
        self.refresh(ctx);
    }

    /// A full fence that may take effect now.
    pub fn eligible_full_fence(&self, ctx: &Ctx) -> Option<usize> {
        self.eligible_flushes(ctx)
            .into_iter()
            .find(|&i| self.fence_kind(ctx, i) == Some(FenceKind::Full))
    }

    /// Moves the program counter across the next entry, if allowed.
    pub fn advance_pc(&mut self, ctx: &Ctx) -> bool {
        let k = self.pci();
        let Some(e) = self.entries.get(k).copied() else {
            return false;
        };
        let instr = &ctx.code[e.at as usize];
        enum Step {
            Remove,
            Keep,
        }
        let step = match e.state {
            EntryState::Read(Some(v)) | EntryState::Rmw(Some(v)) | EntryState::Assign(Some(v)) => {
                if let Some(r) = instr.defines() {
                    self.regs[r.idx()] = v;
                }
                Step::Remove
            }
            EntryState::Read(None) | EntryState::Rmw(None) | EntryState::Assign(None) => {
                return false
            }
            EntryState::Write { flushed, .. } => {
                if flushed {
                    Step::Remove
                } else {
                    Step::Keep
                }
            }
            EntryState::Fence { flushed } => match self.fence_kind(ctx, k).unwrap() {
                FenceKind::Full | FenceKind::Lwsync => {
                    if !flushed {
                        return false;
                    }
                    Step::Remove
                }
                FenceKind::MembarSS | FenceKind::MembarSL
                    if (0..k).any(|j| self.active_write(j)) =>
                {
                    Step::Keep
                }
                _ => Step::Remove,
            },
            EntryState::Branch { resolved, .. } => {
                if !resolved {
                    return false;
                }
                Step::Remove
            }
            EntryState::Jump => Step::Remove,
        };
        match step {
            Step::Remove => {
                self.entries.remove(k);
            }
            Step::Keep => self.pc_index += 1,
        }
        self.pc = self.entries.get(self.pci()).map_or(self.st, |e| e.at);
        true
    }

    /// Propagates newly known values along the speculated suffix and
    /// discards mispredicted paths.
    fn refresh(&mut self, ctx: &Ctx) {
        let mut view: Vec<Option<Value>> = self.regs.iter().map(|&v| Some(v)).collect();
        let mut k = self.pci();
        while k < self.entries.len() {
            let e = self.entries[k];
            let instr = &ctx.code[e.at as usize];
            match (e.state, instr) {
                (EntryState::Write { value: None, flushed }, Instr::Store { expr, .. }) => {
                    self.entries[k].state = EntryState::Write {
                        value: expr.eval_local(&view, ctx.dmax),
                        flushed,
                    };
                }
                (EntryState::Assign(v), Instr::Assign { reg, expr }) => {
                    let v = v.or_else(|| expr.eval_local(&view, ctx.dmax));
                    self.entries[k].state = EntryState::Assign(v);
                    view[reg.idx()] = v;
                }
                (EntryState::Read(v) | EntryState::Rmw(v), _) => {
                    if let Some(r) = instr.defines() {
                        view[r.idx()] = v;
                    }
                }
                (
                    EntryState::Branch {
                        taken,
                        resolved: false,
                    },
                    Instr::CondGoto { cond, target },
                ) => {
                    if let Some(actual) = cond.holds_local(&view) {
                        self.entries[k].state = EntryState::Branch {
                            taken: actual,
                            resolved: true,
                        };
                        if actual != taken {
                            self.entries.truncate(k + 1);
                            self.st = if actual { *target as u16 } else { e.at + 1 };
                            break;
                        }
                    }
                }
                _ => {}
            }
            k += 1;
        }
        self.pc = self.entries.get(self.pci()).map_or(self.st, |e| e.at);
    }

    /// Human-readable rendering for debugging.
    pub fn describe(&self, ctx: &Ctx) -> String {
        let mut s = String::new();
        let _ = write!(s, "pc={} st={} regs={:?} [", self.pc, self.st, self.regs);
        for (k, e) in self.entries.iter().enumerate() {
            if k == self.pci() {
                s.push_str(" |");
            }
            let _ = write!(s, " {}:{:?}", e.at, e.state);
            let _ = ctx;
        }
        s.push_str(" ]");
        s
    }
}
