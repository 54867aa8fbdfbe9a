// Random operation sequences against the propagation order.

use proptest::prelude::*;
use wmfair_core::propagation::{Policy, PropOrder};
use wmfair_core::{Loc, Pid};

pub const NPROCS: usize = 3;
const NLOCS: usize = 2;

/// One abstract operation; indices are reduced modulo the candidates
/// available when it is applied.
#[derive(Clone, Debug)]
pub enum Op {
    Read(u8, u8, u8),
    Update(u8, u8),
    Forget(u8, u8),
    Write(u8, u8, u8),
    Fence(u8),
    Rmw(u8, u8, u8, bool),
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (any::<u8>(), any::<u8>(), any::<u8>()).prop_map(|(p, x, k)| Op::Read(p, x, k)),
        (any::<u8>(), any::<u8>()).prop_map(|(p, k)| Op::Update(p, k)),
        (any::<u8>(), any::<u8>()).prop_map(|(p, k)| Op::Forget(p, k)),
        (any::<u8>(), any::<u8>(), 0u8..3).prop_map(|(p, x, v)| Op::Write(p, x, v)),
        any::<u8>().prop_map(Op::Fence),
        (any::<u8>(), any::<u8>(), any::<u8>(), any::<bool>()).prop_map(|(p, x, k, w)| Op::Rmw(p, x, k, w)),
    ]
}

fn pick(v: &[usize], k: u8) -> Option<usize> {
    (!v.is_empty()).then(|| v[k as usize % v.len()])
}

fn apply(po: &mut PropOrder, op: &Op) {
    let pid = |p: u8| Pid((p as usize % NPROCS) as u16);
    let loc = |x: u8| Loc((x as usize % NLOCS) as u16);
    match *op {
        Op::Read(p, x, k) => {
            if po.policy() == Policy::Fifo {
                let _ = po.fifo_read(pid(p), loc(x));
            } else if let Some(m) = pick(&po.read_sources(pid(p), loc(x)), k) {
                po.read(pid(p), m).unwrap();
            }
        }
        Op::Update(p, k) => {
            if let Some(m) = pick(&po.update_candidates(pid(p)), k) {
                po.silent_update(pid(p), m).unwrap();
            }
        }
        Op::Forget(p, k) => {
            if let Some(m) = pick(&po.forget_candidates(pid(p)), k) {
                po.forget(pid(p), m).unwrap();
            }
        }
        Op::Write(p, x, v) => {
            let _ = po.insert_write(pid(p), loc(x), v as u32);
        }
        Op::Fence(p) => {
            let _ = po.insert_fence(pid(p));
        }
        Op::Rmw(p, x, k, w) => {
            if let Some(m) = pick(&po.rmw_sources(pid(p), loc(x)), k) {
                let _ = po.rmw(pid(p), m, w.then_some(1));
            }
        }
    }
}

pub fn run(policy: Policy, ops: &[Op]) -> Result<(), TestCaseError> {
    let mut po = PropOrder::new(policy, NPROCS, NLOCS);
    for (i, op) in ops.iter().enumerate() {
        apply(&mut po, op);
        let v = po.check_invariants(NLOCS);
        prop_assert!(v.is_empty(), "step {i} {op:?}: {v:?}\n{po}");
    }
    Ok(())
}
