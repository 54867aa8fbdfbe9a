// Turnstile augmentation against direct plain-configuration reachability.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmfair_core::litmus::turnstile::{augment_with_turnstile, success_positions};
use wmfair_core::{checker, compile, parse_program, ControlState, Machine, MachineOptions, ModelId, Value};

const BOUND: usize = 64;

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(p).unwrap()
}

/// Plain configurations reachable in the original program, as control
/// state and memory.
fn plain_targets(m: &Machine) -> BTreeSet<(ControlState, Vec<Value>)> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut out = BTreeSet::new();
    seen.insert(m.initial());
    queue.push_back(m.initial());
    while let Some(c) = queue.pop_front() {
        if let Some(mem) = m.plain_memory(&c) {
            out.insert((m.control_state(&c), mem));
        }
        for (_, n) in m.successors(&c) {
            if m.size(&n) <= BOUND && seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    out
}

fn success_reachable(src: &wmfair_core::Program, target: &(ControlState, Vec<Value>), model: ModelId) -> bool {
    let aug = augment_with_turnstile(src, &target.0, &target.1).unwrap();
    let goal: Vec<u32> = success_positions(&aug).into_iter().map(|p| p as u32).collect();
    let m = Machine::new(compile(&aug, model).unwrap(), MachineOptions::default());
    let o = checker::outcomes(&m, BOUND, true, 3_000_000);
    assert!(!o.truncated);
    o.finals.iter().any(|c| c.pcs == goal)
}

/// Checks 20 targets, half of them perturbed away from a reachable one, and
/// returns how many were unreachable.
pub fn cross_check(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut unreachable = 0;
    for model in [ModelId::Sra, ModelId::Tso] {
        for f in ["loadbuffer.lit", "sb.lit", "sf.lit", "loadload.lit", "mrelay.lit"] {
            let src = parse_program(&corpus(f)).unwrap();
            let m = Machine::new(compile(&src, model).unwrap(), MachineOptions::default());
            let reachable = plain_targets(&m);
            let mut pool: Vec<_> = reachable.iter().cloned().collect();
            pool.shuffle(&mut rng);
            let hit = pool[0].clone();
            let mut miss = hit.clone();
            let x = rng.gen_range(0..miss.1.len());
            miss.1[x] = (miss.1[x] + 1) % (src.domain_max + 1);
            for target in [hit, miss] {
                let direct = reachable.contains(&target);
                let via = success_reachable(&src, &target, model);
                if direct != via {
                    return Err(format!("{f} under {model}: {target:?} direct {direct}, turnstile {via}"));
                }
                checked += 1;
                unreachable += usize::from(!direct);
            }
        }
    }
    assert_eq!(checked, 20);
    Ok(unreachable)
}
