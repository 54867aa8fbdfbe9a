use alloc::string::String;
use alloc::vec::Vec;

use super::{FenceKind, Instr, LoadMode, Loc, Program, RmwKind, Value};
use crate::machine::ModelId;
use crate::propagation::Policy;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("process `{process}`, instruction {pc}: `fence {}` is not available under {model}", .kind.name())]
    Fence {
        model: ModelId,
        process: String,
        pc: usize,
        kind: FenceKind,
    },
    #[error("process `{process}`, instruction {pc}: acquire/release accesses are not available under {model}")]
    AccessMode {
        model: ModelId,
        process: String,
        pc: usize,
    },
    #[error("process `{process}`, instruction {pc}: read-modify-write is not available under {model}")]
    Rmw {
        model: ModelId,
        process: String,
        pc: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledProcess {
    pub name: String,
    pub code: Vec<Instr>,
    /// Source program counter exposed while the compiled PC sits on each
    /// instruction.
    pub origin: Vec<u32>,
    pub inserted: Vec<bool>,
    /// Static data and control dependency predecessors (compiled indices).
    pub deps: Vec<Vec<usize>>,
    /// Compiled index at which each source instruction's block starts.
    pub block: Vec<usize>,
    pub nregs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledProgram {
    pub model: ModelId,
    pub domain_max: Value,
    /// Source locations, followed by the hidden full-fence location if any.
    pub locations: Vec<String>,
    pub processes: Vec<CompiledProcess>,
    /// Location used to realize full fences as RMWs on non-MCA models.
    pub fence_loc: Option<Loc>,
    pub source: Program,
}

impl CompiledProgram {
    pub fn nprocs(&self) -> usize {
        self.processes.len()
    }

    pub fn nlocs(&self) -> usize {
        self.locations.len()
    }
}

fn expand(model: ModelId, instr: &Instr) -> (Vec<Instr>, Instr, Vec<Instr>) {
    use FenceKind::*;
    let mut pre = Vec::new();
    let mut post = Vec::new();
    let mut main = instr.clone();
    match (model, &mut main) {
        (ModelId::Sc, i) if i.is_memory() => post.push(Instr::Fence(Full)),
        (ModelId::Tso, Instr::Load { .. }) | (ModelId::Pso, Instr::Load { .. }) => {
            post.extend([Instr::Fence(MembarLL), Instr::Fence(MembarLS)])
        }
        (ModelId::Tso, Instr::Store { .. }) => post.push(Instr::Fence(MembarSS)),
        (ModelId::Rmo, Instr::Load { mode, .. }) => *mode = LoadMode::Racing,
        (ModelId::Sra | ModelId::Wra, Instr::Store { .. }) => pre.push(Instr::Fence(Lwsync)),
        (ModelId::Sra | ModelId::Psi | ModelId::Wra, Instr::Load { .. }) => {
            post.push(Instr::Fence(Isync))
        }
        (ModelId::Psi, Instr::Store { loc, expr, .. }) => {
            pre.push(Instr::Fence(Lwsync));
            main = Instr::Rmw {
                reg: None,
                loc: *loc,
                kind: RmwKind::Swap(expr.clone()),
            };
        }
        _ => {}
    }
    (pre, main, post)
}

fn static_deps(code: &[Instr]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(code.len());
    let mut last_def: Vec<(super::Reg, usize)> = Vec::new();
    let mut last_branch: Option<usize> = None;
    for (i, instr) in code.iter().enumerate() {
        let mut d: Vec<usize> = instr
            .uses()
            .iter()
            .filter_map(|r| last_def.iter().find(|(x, _)| x == r).map(|&(_, j)| j))
            .collect();
        if let Some(b) = last_branch {
            d.push(b);
        }
        d.sort_unstable();
        d.dedup();
        out.push(d);
        if let Some(r) = instr.defines() {
            last_def.retain(|(x, _)| *x != r);
            last_def.push((r, i));
        }
        if matches!(instr, Instr::CondGoto { .. }) {
            last_branch = Some(i);
        }
    }
    out
}

/// Compiles a source program for `model`: inserts the model's fences,
/// normalizes access modes and records static dependencies.
pub fn compile(source: &Program, model: ModelId) -> Result<CompiledProgram, CompileError> {
    let mut processes = Vec::with_capacity(source.processes.len());
    let mut has_full = false;
    for proc in &source.processes {
        let mut code = Vec::new();
        let mut origin = Vec::new();
        let mut inserted = Vec::new();
        let mut block = Vec::with_capacity(proc.code.len());
        for (pc, instr) in proc.code.iter().enumerate() {
            if !model.admits(instr) {
                let process = proc.name.clone();
                return Err(match instr {
                    Instr::Fence(kind) => CompileError::Fence {
                        model,
                        process,
                        pc,
                        kind: *kind,
                    },
                    Instr::Rmw { .. } => CompileError::Rmw { model, process, pc },
                    _ => CompileError::AccessMode { model, process, pc },
                });
            }
            let (pre, main, post) = expand(model, instr);
            block.push(code.len());
            for f in pre {
                code.push(f);
                origin.push(pc as u32);
                inserted.push(true);
            }
            code.push(main);
            origin.push(pc as u32);
            inserted.push(false);
            for f in post {
                code.push(f);
                origin.push(pc as u32 + 1);
                inserted.push(true);
            }
        }
        for instr in code.iter_mut() {
            match instr {
                Instr::Goto(t) | Instr::CondGoto { target: t, .. } => *t = block[*t],
                Instr::Choice(a, b) => {
                    *a = block[*a];
                    *b = block[*b];
                }
                _ => {}
            }
        }
        has_full |= code.contains(&Instr::Fence(FenceKind::Full));
        processes.push(CompiledProcess {
            name: proc.name.clone(),
            deps: static_deps(&code),
            code,
            origin,
            inserted,
            block,
            nregs: proc.regs.len(),
        });
    }
    let mut locations = source.locations.clone();
    let fence_loc = if has_full && model.policy() != Policy::TrivialMca {
        locations.push(String::from("$fence"));
        Some(Loc(locations.len() as u16 - 1))
    } else {
        None
    };
    Ok(CompiledProgram {
        model,
        domain_max: source.domain_max,
        locations,
        processes,
        fence_loc,
        source: source.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::parse_program;

    const SB: &str = "locations x y\n\
        process p0 { x = 1; fence isync; a = y; }\n\
        process p1 { y = 1; fence isync; b = x; }\n";

    fn kinds(p: &CompiledProcess) -> Vec<&str> {
        p.code
            .iter()
            .map(|i| match i {
                Instr::Load { .. } => "ld",
                Instr::Store { .. } => "st",
                Instr::Fence(k) => k.name(),
                Instr::Rmw { .. } => "rmw",
                Instr::Halt => "halt",
                _ => "other",
            })
            .collect()
    }

    #[test]
    fn tso_barriers() {
        let prog = compile(&parse_program(SB).unwrap(), ModelId::Tso).unwrap();
        assert_eq!(
            kinds(&prog.processes[0]),
            ["st", "membarSS", "isync", "ld", "membarLL", "membarLS", "halt"]
        );
        assert_eq!(prog.processes[0].origin, [0, 1, 1, 2, 3, 3, 3]);
    }

    #[test]
    fn rmo_makes_loads_racing() {
        let prog = compile(&parse_program(SB).unwrap(), ModelId::Rmo).unwrap();
        assert_eq!(kinds(&prog.processes[0]), ["st", "isync", "ld", "halt"]);
        assert!(matches!(
            prog.processes[0].code[2],
            Instr::Load { mode: LoadMode::Racing, .. }
        ));
    }

    #[test]
    fn sra_scheme() {
        let prog = compile(&parse_program(SB).unwrap(), ModelId::Sra).unwrap();
        assert_eq!(
            kinds(&prog.processes[0]),
            ["lwsync", "st", "isync", "ld", "isync", "halt"]
        );
        let psi = compile(&parse_program(SB).unwrap(), ModelId::Psi).unwrap();
        assert_eq!(
            kinds(&psi.processes[0]),
            ["lwsync", "rmw", "isync", "ld", "isync", "halt"]
        );
    }

    #[test]
    fn jump_targets_skip_previous_postfences() {
        let src = "locations x\nprocess p { L: a = x; if a == 0 goto L; }";
        let prog = compile(&parse_program(src).unwrap(), ModelId::Sc).unwrap();
        let p = &prog.processes[0];
        assert!(matches!(p.code[2], Instr::CondGoto { target: 0, .. }));
        assert_eq!(p.block, [0, 2, 3]);
    }

    #[test]
    fn rejects_foreign_instructions() {
        let src = "locations x\nprocess p { fence lwsync; }";
        assert!(matches!(
            compile(&parse_program(src).unwrap(), ModelId::Tso),
            Err(CompileError::Fence { .. })
        ));
        let src = "locations x\nprocess p { a = fadd(x, 1); }";
        assert!(matches!(
            compile(&parse_program(src).unwrap(), ModelId::Fifo),
            Err(CompileError::Rmw { .. })
        ));
        let src = "locations x\nprocess p { x = 1 rel; }";
        assert!(compile(&parse_program(src).unwrap(), ModelId::Sra).is_err());
    }

    #[test]
    fn hidden_fence_location() {
        let src = "locations x\nprocess p { x = 1; fence full; }";
        let prog = parse_program(src).unwrap();
        assert_eq!(compile(&prog, ModelId::Power).unwrap().fence_loc, Some(Loc(1)));
        assert_eq!(compile(&prog, ModelId::Tso).unwrap().fence_loc, None);
    }

    #[test]
    fn deps_point_backwards() {
        let src = "domain 2\nlocations x y\nprocess p { a = x; if a == 1 goto E; y = a + 1; E: halt; }";
        let prog = compile(&parse_program(src).unwrap(), ModelId::Power).unwrap();
        let p = &prog.processes[0];
        for (i, d) in p.deps.iter().enumerate() {
            assert!(d.iter().all(|&j| j < i));
        }
        assert_eq!(p.deps[2], [0, 1]);
    }
}
