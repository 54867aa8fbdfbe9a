use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wmfair_core::checker::{self, Components, ConnectivityGraph, Label, Lasso, ProductGraph, Sequential};
use wmfair_core::omega::{self, AnnotatedState, MullerSpec, PropKind, Proposition, Rule};
use wmfair_core::{compile, parse_program, Machine, MachineOptions, ModelId};

const LIMIT: usize = 2_000_000;

fn machine(file: &str, model: ModelId) -> Machine {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file);
    let prog = parse_program(&std::fs::read_to_string(p).unwrap()).unwrap();
    Machine::new(compile(&prog, model).unwrap(), MachineOptions::default())
}

fn rule(from: &str, letter: &str, to: &str) -> Rule {
    Rule { from: from.into(), letter: letter.into(), to: to.into() }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Eventually every process halts.
fn termination() -> MullerSpec {
    let props = vec![Proposition { name: "done".into(), kind: PropKind::AllHalted }];
    MullerSpec::new(
        props,
        names(&["wait", "done"]),
        "wait",
        &[rule("wait", "0", "wait"), rule("wait", "1", "done"), rule("done", "-", "done")],
        &[names(&["done"])],
    )
    .unwrap()
}

/// p0 eventually halts and p1 never does.
fn p0_alone(m: &Machine) -> MullerSpec {
    let prog = &m.program().source;
    let halted = |p: &str| PropKind::resolve(p, "halted", &[p.to_string()], prog).unwrap();
    let props = vec![
        Proposition { name: "h0".into(), kind: halted("p0") },
        Proposition { name: "h1".into(), kind: halted("p1") },
    ];
    MullerSpec::new(
        props,
        names(&["none", "only0", "p1"]),
        "none",
        &[
            rule("none", "00", "none"),
            rule("none", "10", "only0"),
            rule("none", "-1", "p1"),
            rule("only0", "-0", "only0"),
            rule("only0", "-1", "p1"),
            rule("p1", "--", "p1"),
        ],
        &[names(&["only0"])],
    )
    .unwrap()
}

fn saturated(m: &Machine, spec: &MullerSpec) -> checker::Saturated {
    checker::saturate(m, spec, m.default_start(), 2, m.nlocs() + 16, LIMIT, &Sequential).unwrap()
}

fn step(m: &Machine, spec: &MullerSpec, bound: usize, at: &AnnotatedState, label: &Label) -> AnnotatedState {
    let mut succ = m.successors(&at.config);
    succ.retain(|(_, n)| m.size(n) <= bound);
    match label {
        Some(t) => {
            let (_, next) = succ.into_iter().find(|(u, _)| u == t).expect("transition not enabled");
            omega::product_step(spec, m, at.q, next)
        }
        None => {
            assert!(succ.is_empty(), "stutter step with enabled transitions");
            omega::product_step(spec, m, at.q, at.config.clone())
        }
    }
}

/// Replays a lasso from the initial state and checks that its cycle closes
/// and visits exactly the claimed automaton states.
fn replay(m: &Machine, spec: &MullerSpec, g: &ProductGraph, w: &Lasso) {
    let mut at = omega::initial(spec, m);
    for l in &w.stem {
        at = step(m, spec, g.bound, &at, l);
    }
    assert_eq!(at, g.states[w.entry]);
    assert!(!w.cycle.is_empty());
    let mut seen = 0u64;
    for l in &w.cycle {
        at = step(m, spec, g.bound, &at, l);
        seen |= 1 << at.q;
    }
    assert_eq!(at, g.states[w.entry], "cycle does not close");
    assert_eq!(seen, w.states);
}

#[test]
fn fair_termination_is_accepted_and_unfair_mode_rejects() {
    let spec = termination();
    for (file, model) in [("transfair.lit", ModelId::Sc), ("memfair.lit", ModelId::Tso), ("memfair.lit", ModelId::Sra)] {
        let m = machine(file, model);
        let sat = saturated(&m, &spec);
        let cs = Components::new(&sat.product);
        let v = checker::qualitative(&cs, &spec);
        assert!(v.accepted, "{file} under {model}");
        assert!(!v.bscc_sets.is_empty());
        for w in &v.witnesses {
            replay(&m, &spec, &sat.product, w);
        }
        let u = checker::unfair(&cs, &spec);
        assert!(!u.accepted, "{file} under {model} without fairness");
    }
}

#[test]
fn starving_one_process_is_rejected_with_witness() {
    let m = machine("memfair.lit", ModelId::Tso);
    let spec = p0_alone(&m);
    let sat = saturated(&m, &spec);
    let cs = Components::new(&sat.product);
    let v = checker::qualitative(&cs, &spec);
    assert!(!v.accepted);
    // every bottom component has p1 halted
    let p1 = 1 << 2;
    assert!(v.bscc_sets.iter().all(|&s| s == p1), "{:?}", v.bscc_sets);
    for w in &v.witnesses {
        replay(&m, &spec, &sat.product, w);
    }
}

#[test]
fn full_acceptance_family_accepts_everything() {
    let props = vec![Proposition { name: "done".into(), kind: PropKind::AllHalted }];
    let spec = MullerSpec::new(
        props,
        names(&["a", "b"]),
        "a",
        &[rule("a", "0", "b"), rule("a", "1", "a"), rule("b", "0", "a"), rule("b", "1", "b")],
        &[names(&["a"]), names(&["b"]), names(&["a", "b"])],
    )
    .unwrap();
    for (file, model) in [("transfair.lit", ModelId::Tso), ("coin.lit", ModelId::Sc), ("sb.lit", ModelId::Pso)] {
        let m = machine(file, model);
        let sat = saturated(&m, &spec);
        let cs = Components::new(&sat.product);
        assert!(checker::qualitative(&cs, &spec).accepted);
        let b = checker::quantitative(&cs, &spec, 0.01, 1_000_000);
        assert!(b.lo >= 0.99, "{file}: {b:?}");
    }
}

#[test]
fn connectivity_graph_grows_with_the_bound() {
    let spec = termination();
    let cases = [
        ("sb.lit", ModelId::Tso),
        ("loadbuffer.lit", ModelId::Power),
        ("mp.lit", ModelId::Sra),
        ("memfair.lit", ModelId::Tso),
        ("memfair.lit", ModelId::Wra),
        ("transfair.lit", ModelId::Sc),
        ("mrelay.lit", ModelId::Fifo),
        ("coin.lit", ModelId::Rmo),
    ];
    for (file, model) in cases {
        let m = machine(file, model);
        let mut prev: Option<ConnectivityGraph> = None;
        for bound in m.nlocs()..=m.nlocs() + 5 {
            let g = ProductGraph::build(&m, &spec, bound, LIMIT, &Sequential).unwrap();
            let graph = ConnectivityGraph::from_product(&Components::new(&g));
            if let Some(p) = &prev {
                assert!(p.is_subgraph_of(&graph), "{file} under {model} at bound {bound}");
            }
            prev = Some(graph);
        }
    }
}

// The read of one process has to pass the other's buffered store. Under TSO
// that store is followed by a buffered membarSS, and the reading process
// holds its load, so three transactions sit in the buffers at once.
#[test]
fn store_buffering_graph_is_stable_from_three_extra() {
    let spec = termination();
    let m = machine("sb.lit", ModelId::Tso);
    let build = |b| {
        let g = ProductGraph::build(&m, &spec, b, LIMIT, &Sequential).unwrap();
        ConnectivityGraph::from_product(&Components::new(&g))
    };
    let below = build(m.nlocs() + 2);
    let graphs: Vec<_> = (m.nlocs() + 3..=m.nlocs() + 7).map(build).collect();
    for g in &graphs[1..] {
        assert_eq!((&g.vertices, &g.edges, &g.rsets), (&graphs[0].vertices, &graphs[0].edges, &graphs[0].rsets));
    }
    assert!(below.vertices.len() < graphs[0].vertices.len());
}

#[test]
fn wider_window_keeps_the_stabilized_graph() {
    let spec = termination();
    for (file, model) in [("memfair.lit", ModelId::Tso), ("transfair.lit", ModelId::Sc), ("sb.lit", ModelId::Tso)] {
        let m = machine(file, model);
        let a = checker::saturate(&m, &spec, m.default_start(), 2, m.nlocs() + 16, LIMIT, &Sequential).unwrap();
        let b = checker::saturate(&m, &spec, m.default_start(), 4, m.nlocs() + 16, LIMIT, &Sequential).unwrap();
        assert_eq!(a.graph.vertices, b.graph.vertices);
        assert_eq!(a.graph.edges, b.graph.edges);
        assert_eq!(a.graph.rsets, b.graph.rsets);
    }
}

fn coin_heads(m: &Machine) -> MullerSpec {
    let prog = &m.program().source;
    let heads = PropKind::resolve("heads", "at", &["p0".into(), "H".into()], prog).unwrap();
    MullerSpec::new(
        vec![Proposition { name: "heads".into(), kind: heads }],
        names(&["q0", "yes"]),
        "q0",
        &[rule("q0", "0", "q0"), rule("q0", "1", "yes"), rule("yes", "-", "yes")],
        &[names(&["yes"])],
    )
    .unwrap()
}

#[test]
fn coin_bracket_contains_one_half() {
    for model in [ModelId::Sc, ModelId::Tso, ModelId::Sra] {
        let m = machine("coin.lit", model);
        let spec = coin_heads(&m);
        let sat = saturated(&m, &spec);
        let cs = Components::new(&sat.product);
        assert!(!checker::qualitative(&cs, &spec).accepted);
        let b = checker::quantitative(&cs, &spec, 0.01, 1_000_000);
        assert!(b.converged);
        assert!(b.lo <= 0.5 && 0.5 <= b.hi, "{model}: [{}, {}]", b.lo, b.hi);
        assert!(b.hi - b.lo <= 0.01);
        let mut last = (0.0, 0.0);
        for &(acc, rej) in &b.history {
            assert!(acc >= last.0 && rej >= last.1, "aggregate decreased");
            assert!(acc + rej <= 1.0 + 1e-12);
            last = (acc, rej);
        }
    }
}

#[test]
fn sampler_is_seed_deterministic_and_bounded() {
    let spec = termination();
    for (file, model) in [("memfair.lit", ModelId::Tso), ("iriw.lit", ModelId::Power), ("transfair.lit", ModelId::Wra)] {
        let m = machine(file, model);
        let bound = m.nlocs() + 4;
        for seed in 0..20 {
            let a = checker::fair_sample(&m, &spec, bound, 2_000, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = checker::fair_sample(&m, &spec, bound, 2_000, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(a.last, b.last);
            assert_eq!((a.steps, a.plain_hits, a.max_size), (b.steps, b.plain_hits, b.max_size));
            assert!(a.max_size <= bound);
        }
    }
}
