//! Reduction of plain-configuration reachability to control-state
//! reachability.
//!
//! Every stored value is tagged with its writer, processes may leave for a
//! two-round barrier on a fresh counter once they sit at their target with
//! the target registers, and after the barrier each process reads every
//! location and compares it with the target memory. The target is
//! reachable as a plain configuration iff all processes can reach their
//! `success` label.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::expr::{BinOp, Expr};
use super::{ControlState, Instr, Loc, Process, Program, Reg, RmwKind, Value};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TurnstileError {
    #[error("target has {got} {what}, program has {want}")]
    Shape { what: &'static str, got: usize, want: usize },
    #[error("target position {pc} is outside process `{process}`")]
    Position { process: String, pc: u32 },
    #[error("read-modify-writes in the source program are not supported")]
    Rmw,
    #[error("augmented domain is too large")]
    Domain,
}

/// Labels of the augmented program that callers look for.
pub const SUCCESS: &str = "success";

fn fresh(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

fn c(v: Value) -> Expr {
    Expr::Const(v)
}

fn r(reg: Reg) -> Expr {
    Expr::Reg(reg)
}

/// Builds the augmented program for the given target control state and
/// memory (one value per source location).
pub fn augment_with_turnstile(
    source: &Program,
    target: &ControlState,
    memory: &[Value],
) -> Result<Program, TurnstileError> {
    let n = source.nprocs();
    let shape = |what, got, want| {
        if got == want {
            Ok(())
        } else {
            Err(TurnstileError::Shape { what, got, want })
        }
    };
    shape("processes", target.pcs.len(), n)?;
    shape("memory values", memory.len(), source.locations.len())?;
    let k = n as Value + 1;
    let dmax = source.domain_max;
    let new_dmax = (dmax as u64 + 1)
        .checked_mul(k as u64)
        .map(|d| (d - 1).max(2 * n as u64))
        .filter(|&d| d <= Value::MAX as u64)
        .ok_or(TurnstileError::Domain)? as Value;
    let mut locations = source.locations.clone();
    let counter = Loc(locations.len() as u16);
    locations.push(fresh(&source.locations, "turnstile"));

    let mut processes = Vec::with_capacity(n);
    for (i, p) in source.processes.iter().enumerate() {
        shape("register vectors", target.regs[i].len(), p.regs.len())?;
        let at = target.pcs[i] as usize;
        if at >= p.code.len() {
            return Err(TurnstileError::Position {
                process: p.name.clone(),
                pc: target.pcs[i],
            });
        }
        let mut regs = p.regs.clone();
        let tmp = Reg(regs.len() as u16);
        regs.push(fresh(&p.regs, "t"));

        // Rewritten original code, one block per source instruction. The
        // block of the target instruction starts with the exit test.
        let mut blocks: Vec<Vec<Instr>> = Vec::new();
        let wrap = |e: &Expr| Expr::bin(BinOp::Mod, e.clone(), c(dmax + 1));
        for (j, instr) in p.code.iter().enumerate() {
            let mut b = Vec::new();
            if j == at {
                let mut cond = c(1);
                for (ri, &v) in target.regs[i].iter().enumerate() {
                    let eq = Expr::bin(BinOp::Eq, r(Reg(ri as u16)), c(v));
                    cond = Expr::bin(BinOp::And, cond, eq);
                }
                // placeholders, patched below
                b.push(Instr::CondGoto {
                    cond: Expr::Un(super::expr::UnOp::Not, alloc::boxed::Box::new(cond)),
                    target: usize::MAX - 1,
                });
                b.push(Instr::Choice(usize::MAX - 1, usize::MAX));
            }
            match instr {
                Instr::Load { reg, loc, mode } => {
                    b.push(Instr::Load { reg: *reg, loc: *loc, mode: *mode });
                    b.push(Instr::Assign {
                        reg: *reg,
                        expr: Expr::bin(BinOp::Div, r(*reg), c(k)),
                    });
                }
                Instr::Store { loc, expr, mode } => {
                    let tagged = Expr::bin(
                        BinOp::Add,
                        Expr::bin(BinOp::Mul, wrap(expr), c(k)),
                        c(i as Value + 1),
                    );
                    b.push(Instr::Store { loc: *loc, expr: tagged, mode: *mode });
                }
                Instr::Assign { reg, expr } => b.push(Instr::Assign { reg: *reg, expr: wrap(expr) }),
                Instr::Rmw { .. } => return Err(TurnstileError::Rmw),
                other => b.push(other.clone()),
            }
            blocks.push(b);
        }
        let mut start = Vec::with_capacity(blocks.len());
        let mut len = 0;
        for b in &blocks {
            start.push(len);
            len += b.len();
        }
        let exit_block = len;
        let test_len = 2;
        let remap = |t: usize| start[t];
        let mut code = Vec::new();
        for (j, b) in blocks.into_iter().enumerate() {
            for instr in b {
                code.push(match instr {
                    Instr::Goto(t) => Instr::Goto(remap(t)),
                    Instr::CondGoto { cond, target } if target == usize::MAX - 1 => Instr::CondGoto {
                        cond,
                        target: start[j] + test_len,
                    },
                    Instr::CondGoto { cond, target } => Instr::CondGoto { cond, target: remap(target) },
                    Instr::Choice(a, _) if a == usize::MAX - 1 => Instr::Choice(start[j] + test_len, exit_block),
                    Instr::Choice(a, b) => Instr::Choice(remap(a), remap(b)),
                    other => other,
                });
            }
        }

        // Two barrier rounds, then the memory check.
        for round in 1..=2u32 {
            code.push(Instr::Rmw {
                reg: Some(tmp),
                loc: counter,
                kind: RmwKind::Fadd(c(1)),
            });
            let goal = c(round * n as Value);
            let wait = code.len();
            code.push(Instr::Rmw {
                reg: Some(tmp),
                loc: counter,
                kind: RmwKind::Cas(goal.clone(), goal.clone()),
            });
            code.push(Instr::CondGoto {
                cond: Expr::bin(BinOp::Ne, r(tmp), goal),
                target: wait,
            });
        }
        let mut fail_jumps = Vec::new();
        for (x, &v) in memory.iter().enumerate() {
            code.push(Instr::Load {
                reg: tmp,
                loc: Loc(x as u16),
                mode: super::LoadMode::HazardFree,
            });
            fail_jumps.push(code.len());
            code.push(Instr::CondGoto {
                cond: Expr::bin(BinOp::Ne, Expr::bin(BinOp::Div, r(tmp), c(k)), c(v)),
                target: 0,
            });
        }
        let success = code.len();
        code.push(Instr::Halt);
        let fail = code.len();
        code.push(Instr::Halt);
        for j in fail_jumps {
            if let Instr::CondGoto { target, .. } = &mut code[j] {
                *target = fail;
            }
        }

        let mut labels: Vec<(String, usize)> = p.labels.iter().map(|(l, t)| (l.clone(), start[*t])).collect();
        let names: Vec<String> = labels.iter().map(|(l, _)| l.clone()).collect();
        labels.push((fresh(&names, "barrier"), exit_block));
        labels.push((fresh(&names, SUCCESS), success));
        labels.push((fresh(&names, "fail"), fail));
        processes.push(Process {
            name: p.name.clone(),
            code,
            labels,
            regs,
        });
    }
    Ok(Program {
        model: source.model,
        domain_max: new_dmax,
        locations,
        processes,
        expects: Vec::new(),
    })
}

/// Index of the success label in each process of an augmented program.
pub fn success_positions(augmented: &Program) -> Vec<usize> {
    augmented
        .processes
        .iter()
        .map(|p| {
            p.labels
                .iter()
                .rev()
                .find(|(l, _)| l.starts_with(SUCCESS))
                .map(|&(_, i)| i)
                .expect("augmented program")
        })
        .collect()
}
