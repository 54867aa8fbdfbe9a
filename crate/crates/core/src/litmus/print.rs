use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::expr::ExprDisplay;
use super::{Expr, Instr, LoadMode, Pid, Process, Program, Reg, RmwKind, StoreMode};

fn expr_str(e: &Expr, prog: &Program, proc: Option<&Process>) -> String {
    let names = |p: Option<Pid>, r: Reg| match p {
        Some(p) => {
            let q = &prog.processes[p.idx()];
            format!("{}.{}", q.name, q.regs[r.idx()])
        }
        None => proc.map_or_else(|| format!("r{}", r.0), |q| q.regs[r.idx()].clone()),
    };
    ExprDisplay {
        expr: e,
        reg_name: &names,
    }
    .to_string()
}

/// Renders a source program in the DSL accepted by
/// [`parse_program`](super::parse_program). Jump targets without a user label
/// get a synthetic `L<index>` label.
pub fn print_program(prog: &Program) -> String {
    let mut out = String::new();
    if let Some(m) = prog.model {
        let _ = writeln!(out, "model {m}");
    }
    let _ = writeln!(out, "domain {}", prog.domain_max);
    let _ = writeln!(out, "locations {}", prog.locations.join(" "));
    for proc in &prog.processes {
        let mut labels: Vec<Option<String>> = alloc::vec![None; proc.code.len()];
        for (l, i) in &proc.labels {
            if let Some(slot) = labels.get_mut(*i) {
                slot.get_or_insert_with(|| l.clone());
            }
        }
        for instr in &proc.code {
            let targets: Vec<usize> = match instr {
                Instr::Goto(t) | Instr::CondGoto { target: t, .. } => alloc::vec![*t],
                Instr::Choice(a, b) => alloc::vec![*a, *b],
                _ => Vec::new(),
            };
            for t in targets {
                if labels[t].is_none() {
                    labels[t] = Some(format!("L{t}"));
                }
            }
        }
        let label = |t: usize| labels[t].clone().unwrap_or_default();
        let _ = writeln!(out, "process {} {{", proc.name);
        for (i, instr) in proc.code.iter().enumerate() {
            out.push_str("  ");
            if let Some(l) = &labels[i] {
                let _ = write!(out, "{l}: ");
            }
            let e = |x: &Expr| expr_str(x, prog, Some(proc));
            let reg = |r: Reg| proc.regs[r.idx()].clone();
            match instr {
                Instr::Load { reg: r, loc, mode } => {
                    let _ = write!(out, "{} = {}", reg(*r), prog.locations[loc.idx()]);
                    match mode {
                        LoadMode::Racing => out.push_str(" racing"),
                        LoadMode::Acquire => out.push_str(" acq"),
                        LoadMode::HazardFree => {}
                    }
                }
                Instr::Store { loc, expr, mode } => {
                    let _ = write!(out, "{} = {}", prog.locations[loc.idx()], e(expr));
                    if *mode == StoreMode::Release {
                        out.push_str(" rel");
                    }
                }
                Instr::Assign { reg: r, expr } => {
                    let _ = write!(out, "{} = {}", reg(*r), e(expr));
                }
                Instr::Fence(k) => {
                    let _ = write!(out, "fence {}", k.name());
                }
                Instr::Rmw { reg: r, loc, kind } => {
                    if let Some(r) = r {
                        let _ = write!(out, "{} = ", reg(*r));
                    }
                    let l = &prog.locations[loc.idx()];
                    let _ = match kind {
                        RmwKind::Cas(a, b) => write!(out, "cas({l}, {}, {})", e(a), e(b)),
                        RmwKind::Fadd(a) => write!(out, "fadd({l}, {})", e(a)),
                        RmwKind::Swap(a) => write!(out, "swap({l}, {})", e(a)),
                    };
                }
                Instr::Goto(t) => {
                    let _ = write!(out, "goto {}", label(*t));
                }
                Instr::CondGoto { cond, target } => {
                    let _ = write!(out, "if {} goto {}", e(cond), label(*target));
                }
                Instr::Choice(a, b) => {
                    let _ = write!(out, "choice {} {}", label(*a), label(*b));
                }
                Instr::Halt => out.push_str("halt"),
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    for ex in &prog.expects {
        let _ = write!(out, "expect {}", if ex.allowed { "allowed" } else { "forbidden" });
        if !ex.models.is_empty() {
            out.push_str(" on");
            for m in &ex.models {
                let _ = write!(out, " {}", m.name());
            }
        }
        let _ = writeln!(out, " : {}", expr_str(&ex.pred, prog, None));
    }
    out
}
