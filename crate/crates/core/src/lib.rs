//! A generic operational machine for concurrent programs under weak memory,
//! instantiable to ten memory models, plus fair model checking of
//! deterministic Muller properties over the program's control states.
//!
//! The machine pairs per-process transaction buffers ([`buffer`]) with a
//! partially ordered message propagation unit ([`propagation`]). The
//! [`checker`] builds the connectivity graph over plain configurations and
//! derives qualitative verdicts and quantitative acceptance brackets from its
//! bottom strongly connected components.

#![no_std]

extern crate alloc;

pub mod buffer;
pub mod checker;
pub mod litmus;
pub mod machine;
pub mod omega;
pub mod propagation;

pub use litmus::{
    compile, parse_program, CompiledProgram, ControlState, Expr, Instr, Loc, Pid, Program, Reg,
    Value,
};
pub use machine::{Configuration, Machine, MachineOptions, ModelId, Transition};
pub use omega::MullerSpec;
