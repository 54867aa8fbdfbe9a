use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wmfair_core::checker::{self, Components, Expander, ProductGraph, SaturationError};
use wmfair_core::litmus::expr::ExprDisplay;
use wmfair_core::{compile, parse_program, Machine, MachineOptions, ModelId, MullerSpec, Program};

use crate::cli::{CheckArgs, Cli, Command, GraphArgs, LitmusArgs, MachineArgs, QuantArgs, SampleArgs};
use crate::pool::Pool;
use crate::report::{
    BoundRow, BracketReport, Body, ExpectationRow, Input, LitmusResult, RunReport, RunRow, SampleSummary, Saturation,
    VerdictReport, Witness,
};
use crate::{dot, render, spec_file};

/// What a successful invocation prints, and its exit code: 0 for a
/// positive result, 1 for a negative one, 3 when a resource cap cut the
/// work short.
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
    pub report: RunReport,
}

/// Invocations that produce no report.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }
}

pub fn run(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Litmus(a) => litmus(&a),
        Command::Check(a) => check(&a),
        Command::Quant(a) => quant(&a),
        Command::Sample(a) => sample(&a),
    }
}

struct Loaded {
    input: Input,
    model: ModelId,
    machine: Machine,
    pool: Pool,
}

impl Loaded {
    fn prog(&self) -> &Program {
        &self.machine.program().source
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<(Input, String), Failure> {
    Input::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(args: &MachineArgs) -> Result<Loaded, Failure> {
    let (input, text) = read(&args.file)?;
    let prog = parse_program(&text).map_err(|e| usage(format!("{}:{e}", args.file.display())))?;
    let model = args
        .model
        .or(prog.model)
        .ok_or_else(|| usage("no model given; pass --model or add a `model` line"))?;
    let compiled = compile(&prog, model).map_err(|e| usage(format!("{}: {e}", args.file.display())))?;
    let opts = MachineOptions {
        spec_depth: args.spec_depth,
        allow_forget: args.allow_forget,
        fused: None,
    };
    if args.spec_depth == 0 {
        return Err(usage("--spec-depth must be at least 1"));
    }
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = Pool::new(jobs.max(1)).map_err(usage)?;
    Ok(Loaded {
        input,
        model,
        machine: Machine::new(compiled, opts),
        pool,
    })
}

/// Flags shared by every command. The worker count is left out on purpose:
/// it never changes a result.
fn machine_flags(args: &MachineArgs) -> BTreeMap<String, serde_json::Value> {
    BTreeMap::from([
        ("specDepth".to_string(), json!(args.spec_depth)),
        ("allowForget".to_string(), json!(args.allow_forget)),
        ("maxStates".to_string(), json!(args.max_states)),
    ])
}

fn report(command: &str, l: &Loaded, inputs: Vec<Input>, flags: BTreeMap<String, serde_json::Value>, states: usize, result: Body) -> RunReport {
    let mut all = vec![l.input.clone()];
    all.extend(inputs);
    RunReport {
        tool: format!("wmfair {}", env!("CARGO_PKG_VERSION")),
        command: command.to_string(),
        inputs: all,
        model: l.model.name().to_string(),
        flags,
        states,
        result,
        wall_ms: None,
    }
}

fn finish(mut report: RunReport, text: String, code: i32, args: &MachineArgs, started: Instant) -> Output {
    if args.timing {
        report.wall_ms = Some(started.elapsed().as_millis() as u64);
    }
    let stdout = if args.json { report.to_json() } else { text };
    Output { stdout, code, report }
}

fn check_bound(m: &Machine, bound: usize) -> Result<(), Failure> {
    let initial = m.size(&m.initial());
    if bound < initial {
        return Err(usage(format!("bound {bound} is below the initial size {initial}")));
    }
    Ok(())
}

fn litmus(a: &LitmusArgs) -> Result<Output, Failure> {
    let started = Instant::now();
    let l = load(&a.machine)?;
    let m = &l.machine;
    let prog = l.prog();
    let bound = a.bound.unwrap_or_else(|| m.default_bound());
    check_bound(m, bound)?;
    let o = checker::outcomes(m, bound, !a.no_reduction, a.machine.max_states);
    let names = |p: Option<wmfair_core::Pid>, r: wmfair_core::Reg| {
        let q = &prog.processes[p.map_or(0, |p| p.idx())];
        format!("{}.{}", q.name, q.regs[r.idx()])
    };
    let rows: Vec<ExpectationRow> = prog
        .expects
        .iter()
        .filter(|e| e.applies_to(l.model))
        .map(|e| {
            let reachable = o.finals.iter().any(|c| c.satisfies(&e.pred));
            ExpectationRow {
                expect: if e.allowed { "allowed" } else { "forbidden" }.to_string(),
                predicate: ExprDisplay { expr: &e.pred, reg_name: &names }.to_string(),
                reachable,
                ok: reachable == e.allowed,
            }
        })
        .collect();
    let finals: Vec<String> = if rows.is_empty() {
        o.finals.iter().map(|c| render::control(c, prog)).collect()
    } else {
        Vec::new()
    };
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} under {} (bound {bound}, {} configurations{})",
        a.machine.file.display(),
        l.model,
        o.states,
        if o.truncated { ", TRUNCATED" } else { "" }
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "  expect {:9} {} : {} {}",
            r.expect,
            r.predicate,
            if r.reachable { "reachable" } else { "unreachable" },
            if r.ok { "ok" } else { "VIOLATED" }
        );
    }
    for f in &finals {
        let _ = writeln!(text, "  final {f}");
    }
    let code = if o.truncated {
        3
    } else if rows.iter().all(|r| r.ok) {
        0
    } else {
        1
    };
    let mut flags = machine_flags(&a.machine);
    flags.insert("bound".into(), json!(bound));
    flags.insert("reduction".into(), json!(!a.no_reduction));
    let body = Body::Litmus(LitmusResult {
        bound,
        reduced: !a.no_reduction,
        truncated: o.truncated,
        finals,
        expectations: rows,
    });
    let rep = report("litmus", &l, Vec::new(), flags, o.states, body);
    Ok(finish(rep, text, code, &a.machine, started))
}

struct Analysis {
    verdict: VerdictReport,
    states: usize,
    spec_input: Input,
    text: String,
    converged: bool,
}

fn analyse(l: &Loaded, g: &GraphArgs, quant: Option<(f64, usize)>, max_states: usize) -> Result<Analysis, Failure> {
    if g.unfair {
        return Err(usage("fairness is not optional: --unfair is not supported"));
    }
    if let Some((eps, _)) = quant {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(usage(format!("invalid epsilon {eps}: must lie strictly between 0 and 1")));
        }
    }
    let m = &l.machine;
    let prog = l.prog();
    let (spec_input, spec_text) = read(&g.spec)?;
    let spec = spec_file::parse_spec(&spec_text, prog).map_err(|e| usage(format!("{}: {e}", g.spec.display())))?;
    let window = g.window as usize;
    let start = g.start.unwrap_or_else(|| m.default_start());
    let (product, saturation) = match g.bound {
        Some(b) => {
            check_bound(m, b)?;
            let p = build(m, &spec, b, max_states, &l.pool)?;
            let cs = Components::new(&p);
            let graph = checker::ConnectivityGraph::from_product(&cs);
            let row = BoundRow { bound: b, states: p.len(), vertices: graph.vertices.len(), edges: graph.edges.len() };
            drop(cs);
            let sat = Saturation {
                mode: "exact".into(),
                start: b,
                window: 1,
                history: vec![row],
                note: format!("verdict holds for runs bounded by {b}"),
            };
            (p, sat)
        }
        None => {
            check_bound(m, start)?;
            let s = checker::saturate(m, &spec, start, window, g.max_bound, max_states, &l.pool).map_err(|e| match e {
                SaturationError::StateLimit(e) => Failure::Resource(e.to_string()),
                e @ SaturationError::BoundCap { .. } => Failure::Resource(e.to_string()),
            })?;
            let history = s
                .history
                .iter()
                .map(|h| BoundRow { bound: h.bound, states: h.states, vertices: h.vertices, edges: h.edges })
                .collect();
            let sat = Saturation {
                mode: "heuristic".into(),
                start,
                window,
                history,
                note: format!(
                    "graph unchanged over {window} consecutive bounds; taken as saturated, which is evidence rather than proof"
                ),
            };
            (s.product, sat)
        }
    };
    let cs = Components::new(&product);
    let v = checker::qualitative(&cs, &spec);
    if let Some(path) = &g.dot {
        let graph = checker::ConnectivityGraph::from_product(&cs);
        std::fs::write(path, dot::connectivity_dot(&graph, &spec, m)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let label = |l: &checker::Label| l.map_or_else(|| "stutter".to_string(), |t| t.to_string());
    let witnesses: Vec<Witness> = v
        .witnesses
        .iter()
        .map(|w| Witness {
            states: render::states(&spec, w.states),
            entry: render::control(&m.control_state(&product.states[w.entry].config), prog),
            stem: w.stem.iter().map(label).collect(),
            cycle: w.cycle.iter().map(label).collect(),
        })
        .collect();
    let warning = spec.check_stutter_insensitive(None).err().map(|(q, a)| {
        format!(
            "specification may be stutter-sensitive: state {} moves on letter {a:0width$b} and does not stay",
            spec.states[q],
            width = spec.props.len().max(1)
        )
    });
    let bracket = quant.map(|(eps, max_iter)| {
        let b = checker::quantitative(&cs, &spec, eps, max_iter);
        BracketReport { lo: b.lo, hi: b.hi, eps, iterations: b.iterations, converged: b.converged }
    });
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} under {} with {}",
        l.input.path,
        l.model,
        g.spec.display()
    );
    let _ = writeln!(
        text,
        "  bound {} ({}, {} configurations)",
        v.bound,
        saturation.mode,
        product.len()
    );
    for h in &saturation.history {
        let _ = writeln!(text, "    N={:<3} states={:<8} vertices={:<6} edges={}", h.bound, h.states, h.vertices, h.edges);
    }
    for (i, s) in v.bscc_sets.iter().enumerate() {
        let ok = spec.accepts(*s);
        let _ = writeln!(
            text,
            "  bottom component {i}: {{{}}} {}",
            render::states(&spec, *s).join(", "),
            if ok { "accepting" } else { "rejecting" }
        );
    }
    if v.dead_ends > 0 {
        let _ = writeln!(text, "  {} bottom component(s) cannot stay within the bound", v.dead_ends);
    }
    for (w, lasso) in witnesses.iter().zip(&v.witnesses) {
        if spec.accepts(lasso.states) {
            continue;
        }
        let _ = writeln!(text, "  witness for {{{}}}: stem of {} steps, then cycle", w.states.join(", "), w.stem.len());
        let _ = writeln!(text, "    entry {}", w.entry);
        for t in &w.cycle {
            let _ = writeln!(text, "    {t}");
        }
    }
    if g.dump_po {
        for (w, lasso) in witnesses.iter().zip(&v.witnesses) {
            let _ = writeln!(text, "  propagation at entry of {{{}}}:", w.states.join(", "));
            let _ = writeln!(text, "{}", product.states[lasso.entry].config.po);
        }
    }
    if let Some(w) = &warning {
        let _ = writeln!(text, "  warning: {w}");
    }
    let converged = bracket.as_ref().is_none_or(|b| b.converged);
    if let Some(b) = &bracket {
        let _ = writeln!(
            text,
            "  probability in [{:.6}, {:.6}] after {} layers{}",
            b.lo,
            b.hi,
            b.iterations,
            if b.converged { "" } else { " (NOT CONVERGED)" }
        );
    }
    let _ = writeln!(text, "{}", if v.accepted { "ACCEPTED" } else { "REJECTED" });
    let verdict = VerdictReport {
        model: l.model.name().to_string(),
        spec: g.spec.display().to_string(),
        bound: v.bound,
        saturation,
        bscc_sets: v.bscc_sets.iter().map(|&s| render::states(&spec, s)).collect(),
        accepted: v.accepted,
        dead_ends: v.dead_ends,
        bracket,
        witnesses,
        warning,
    };
    Ok(Analysis { verdict, states: product.len(), spec_input, text, converged })
}

fn build<E: Expander>(m: &Machine, spec: &MullerSpec, bound: usize, limit: usize, ex: &E) -> Result<ProductGraph, Failure> {
    ProductGraph::build(m, spec, bound, limit, ex).map_err(|e| Failure::Resource(e.to_string()))
}

fn graph_flags(a: &MachineArgs, g: &GraphArgs) -> BTreeMap<String, serde_json::Value> {
    let mut flags = machine_flags(a);
    flags.insert("bound".into(), json!(g.bound));
    flags.insert("start".into(), json!(g.start));
    flags.insert("window".into(), json!(g.window));
    flags.insert("maxBound".into(), json!(g.max_bound));
    flags
}

fn check(a: &CheckArgs) -> Result<Output, Failure> {
    let started = Instant::now();
    let l = load(&a.machine)?;
    let an = analyse(&l, &a.graph, None, a.machine.max_states)?;
    let code = if an.verdict.accepted { 0 } else { 1 };
    let flags = graph_flags(&a.machine, &a.graph);
    let rep = report("check", &l, vec![an.spec_input], flags, an.states, Body::Verdict(Box::new(an.verdict)));
    Ok(finish(rep, an.text, code, &a.machine, started))
}

fn quant(a: &QuantArgs) -> Result<Output, Failure> {
    let started = Instant::now();
    let l = load(&a.machine)?;
    let an = analyse(&l, &a.graph, Some((a.eps, a.max_iter)), a.machine.max_states)?;
    let code = if an.converged { 0 } else { 3 };
    let mut flags = graph_flags(&a.machine, &a.graph);
    flags.insert("eps".into(), json!(a.eps));
    flags.insert("maxIter".into(), json!(a.max_iter));
    let rep = report("quant", &l, vec![an.spec_input], flags, an.states, Body::Verdict(Box::new(an.verdict)));
    Ok(finish(rep, an.text, code, &a.machine, started))
}

fn sample(a: &SampleArgs) -> Result<Output, Failure> {
    let started = Instant::now();
    let l = load(&a.machine)?;
    let m = &l.machine;
    let prog = l.prog();
    let (spec, inputs) = match &a.spec {
        Some(path) => {
            let (input, text) = read(path)?;
            let spec = spec_file::parse_spec(&text, prog).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            (spec, vec![input])
        }
        None => (spec_file::accept_all(), Vec::new()),
    };
    let bound = a.bound.unwrap_or_else(|| m.default_bound());
    check_bound(m, bound)?;
    let audits = l.pool.map(a.runs, |i| {
        let seed = a.seed.wrapping_add(i as u64);
        (seed, checker::fair_sample(m, &spec, bound, a.steps, &mut ChaCha8Rng::seed_from_u64(seed)))
    });
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} under {}: {} run(s) of up to {} steps, bound {bound}",
        l.input.path, l.model, a.runs, a.steps
    );
    let rows: Vec<RunRow> = audits
        .iter()
        .map(|(seed, au)| RunRow {
            seed: *seed,
            steps: au.steps,
            plain_hits: au.plain_hits,
            max_size: au.max_size,
            deadlocked: au.deadlocked,
            stuck: au.stuck,
            tail: render::states(&spec, au.tail),
            accepted: au.verdict(&spec),
            final_control: render::control(&au.final_control, prog),
        })
        .collect();
    let count = |v: Option<bool>| rows.iter().filter(|r| r.accepted == v).count();
    let (accepted, rejected, inconclusive) = (count(Some(true)), count(Some(false)), count(None));
    let show = rows.len() <= 20;
    for ((r, (_, au)), i) in rows.iter().zip(&audits).zip(0..) {
        if show || r.accepted == Some(false) {
            let verdict = match r.accepted {
                Some(true) => "accepted",
                Some(false) => "REJECTED",
                None => "stuck at bound",
            };
            let _ = writeln!(
                text,
                "  seed {}: {} steps, {} plain, max size {}, tail {{{}}} {verdict}\n    {}",
                r.seed,
                r.steps,
                r.plain_hits,
                r.max_size,
                r.tail.join(", "),
                r.final_control
            );
        }
        if a.dump_po && (show || i == 0) {
            let _ = writeln!(text, "{}", au.last.config.po);
        }
    }
    let _ = writeln!(text, "accepted {accepted}, rejected {rejected}, inconclusive {inconclusive}");
    let mut flags = machine_flags(&a.machine);
    flags.insert("bound".into(), json!(bound));
    flags.insert("seed".into(), json!(a.seed));
    flags.insert("steps".into(), json!(a.steps));
    flags.insert("runs".into(), json!(a.runs));
    let total = rows.iter().map(|r| r.steps).sum();
    let body = Body::Samples(SampleSummary { bound, steps: a.steps, runs: rows, accepted, rejected, inconclusive });
    let rep = report("sample", &l, inputs, flags, total, body);
    let code = if rejected > 0 { 1 } else { 0 };
    Ok(finish(rep, text, code, &a.machine, started))
}
