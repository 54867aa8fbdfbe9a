//! Litmus-style concurrent programs: representation, a small text DSL,
//! per-model compilation, and the plain-configuration turnstile transform.
//!
//! ```text
//! model TSO
//! domain 1
//! locations x y
//! process p0 { y = 1; fence isync; a = x; }
//! process p1 { x = 1; fence isync; b = y; }
//! expect allowed : p0.a == 0 && p1.b == 0
//! ```

mod compile;
pub mod expr;
mod parse;
mod print;
pub mod turnstile;

use alloc::string::String;
use alloc::vec::Vec;

pub use compile::{compile, CompileError, CompiledProcess, CompiledProgram};
pub use expr::{BinOp, Expr, UnOp};
pub use parse::{parse_program, ParseError, ParseErrorKind};
pub use print::print_program;

use crate::machine::ModelId;

/// Element of the finite data domain `{0, .., dmax}`.
pub type Value = u32;

macro_rules! index_newtype {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u16);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }
    };
}

index_newtype!(
    /// Shared memory location.
    Loc
);
index_newtype!(
    /// Process-local register.
    Reg
);
index_newtype!(
    /// Process identifier.
    Pid
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoadMode {
    /// May be overtaken by later loads to the same location.
    Racing,
    HazardFree,
    Acquire,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoreMode {
    Plain,
    Release,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FenceKind {
    Full,
    Lwsync,
    Isync,
    MembarLL,
    MembarLS,
    MembarSS,
    MembarSL,
}

impl FenceKind {
    pub const ALL: [FenceKind; 7] = [
        FenceKind::Full,
        FenceKind::Lwsync,
        FenceKind::Isync,
        FenceKind::MembarLL,
        FenceKind::MembarLS,
        FenceKind::MembarSS,
        FenceKind::MembarSL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FenceKind::Full => "full",
            FenceKind::Lwsync => "lwsync",
            FenceKind::Isync => "isync",
            FenceKind::MembarLL => "membarLL",
            FenceKind::MembarLS => "membarLS",
            FenceKind::MembarSS => "membarSS",
            FenceKind::MembarSL => "membarSL",
        }
    }

    pub fn from_name(s: &str) -> Option<FenceKind> {
        FenceKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Cumulative fences are flushed into the propagation unit.
    pub fn is_cumulative(self) -> bool {
        matches!(self, FenceKind::Full | FenceKind::Lwsync)
    }

    pub fn is_membar(self) -> bool {
        matches!(
            self,
            FenceKind::MembarLL | FenceKind::MembarLS | FenceKind::MembarSS | FenceKind::MembarSL
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RmwKind {
    /// Writes the second operand iff the location holds the first.
    Cas(Expr, Expr),
    Fadd(Expr),
    /// Unconditional exchange; produced by compilation, not by the DSL.
    Swap(Expr),
}

/// Jump targets are instruction indices within the owning process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instr {
    Load { reg: Reg, loc: Loc, mode: LoadMode },
    Store { loc: Loc, expr: Expr, mode: StoreMode },
    Assign { reg: Reg, expr: Expr },
    Fence(FenceKind),
    Rmw { reg: Option<Reg>, loc: Loc, kind: RmwKind },
    Goto(usize),
    CondGoto { cond: Expr, target: usize },
    Choice(usize, usize),
    Halt,
}

impl Instr {
    pub fn is_memory(&self) -> bool {
        matches!(
            self,
            Instr::Load { .. } | Instr::Store { .. } | Instr::Fence(_) | Instr::Rmw { .. }
        )
    }

    /// Registers read by this instruction.
    pub fn uses(&self) -> Vec<Reg> {
        match self {
            Instr::Store { expr, .. } | Instr::Assign { expr, .. } => expr.regs(),
            Instr::CondGoto { cond, .. } => cond.regs(),
            Instr::Rmw { kind, .. } => match kind {
                RmwKind::Cas(a, b) => {
                    let mut v = a.regs();
                    for r in b.regs() {
                        if !v.contains(&r) {
                            v.push(r);
                        }
                    }
                    v
                }
                RmwKind::Fadd(e) | RmwKind::Swap(e) => e.regs(),
            },
            _ => Vec::new(),
        }
    }

    pub fn defines(&self) -> Option<Reg> {
        match self {
            Instr::Load { reg, .. } | Instr::Assign { reg, .. } => Some(*reg),
            Instr::Rmw { reg, .. } => *reg,
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Process {
    pub name: String,
    pub code: Vec<Instr>,
    /// Labels in instruction order; several labels may share an index.
    pub labels: Vec<(String, usize)>,
    pub regs: Vec<String>,
}

impl Process {
    pub fn label(&self, name: &str) -> Option<usize> {
        self.labels.iter().find(|(l, _)| l == name).map(|&(_, i)| i)
    }

    pub fn reg(&self, name: &str) -> Option<Reg> {
        self.regs.iter().position(|r| r == name).map(|i| Reg(i as u16))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub allowed: bool,
    /// Models the expectation is stated for; empty means every model.
    pub models: Vec<ModelId>,
    /// Predicate over final registers, using [`Expr::Qual`] atoms.
    pub pred: Expr,
}

impl Expectation {
    pub fn applies_to(&self, model: ModelId) -> bool {
        self.models.is_empty() || self.models.contains(&model)
    }
}

/// Source program as written, before compilation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub model: Option<ModelId>,
    pub domain_max: Value,
    pub locations: Vec<String>,
    pub processes: Vec<Process>,
    pub expects: Vec<Expectation>,
}

impl Program {
    pub fn loc(&self, name: &str) -> Option<Loc> {
        self.locations.iter().position(|l| l == name).map(|i| Loc(i as u16))
    }

    pub fn process(&self, name: &str) -> Option<Pid> {
        self.processes
            .iter()
            .position(|p| p.name == name)
            .map(|i| Pid(i as u16))
    }

    pub fn nprocs(&self) -> usize {
        self.processes.len()
    }
}

/// The letter alphabet of the program: per-process source program counter
/// and register valuation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ControlState {
    pub pcs: Vec<u32>,
    pub regs: Vec<Vec<Value>>,
}

impl ControlState {
    pub fn initial(prog: &Program) -> ControlState {
        ControlState {
            pcs: alloc::vec![0; prog.nprocs()],
            regs: prog.processes.iter().map(|p| alloc::vec![0; p.regs.len()]).collect(),
        }
    }

    pub fn halted(&self, prog: &Program, p: Pid) -> bool {
        matches!(
            prog.processes[p.idx()].code.get(self.pcs[p.idx()] as usize),
            Some(Instr::Halt) | None
        )
    }

    pub fn all_halted(&self, prog: &Program) -> bool {
        (0..prog.nprocs()).all(|p| self.halted(prog, Pid(p as u16)))
    }

    /// Evaluates a predicate over qualified registers.
    pub fn satisfies(&self, pred: &Expr) -> bool {
        pred.eval_raw(&|p, r| {
            let p = p?;
            self.regs.get(p.idx())?.get(r.idx()).copied()
        })
        .is_some_and(|v| v != 0)
    }
}
