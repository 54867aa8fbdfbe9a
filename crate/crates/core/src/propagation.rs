//! The partially ordered message propagation unit.
//!
//! Nodes are write messages and cumulative fence declarations. The order is
//! stored transitively closed: each node carries the bitset of nodes strictly
//! below it. After every mutation the unit garbage-collects and re-sorts its
//! nodes into a canonical order, so structurally equal units compare equal.

use alloc::vec::Vec;
use core::fmt;

use crate::litmus::{Loc, Pid, Value};

/// Set of processes, one bit per [`Pid`].
pub type ProcSet = u32;
/// Set of nodes, one bit per node index.
pub type NodeSet = u128;
pub const MAX_NODES: usize = 128;
pub const MAX_PROCS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    /// Exactly one globally visible write per location.
    TrivialMca,
    /// Writes to each location are totally ordered.
    Coherent,
    /// Only each process's own writes to a location are ordered.
    PoLoc,
    /// One chain per process; every process sees exactly one write per
    /// location.
    Fifo,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::TrivialMca => "trivialMCA",
            Policy::Coherent => "coherent",
            Policy::PoLoc => "poloc",
            Policy::Fifo => "fifo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Write {
        loc: Loc,
        /// `None` for the initialization write.
        writer: Option<Pid>,
        value: Value,
        rmw_eligible: bool,
    },
    Fence {
        issuer: Pid,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub kind: NodeKind,
    pub seen: ProcSet,
    pub redundant: ProcSet,
    /// Nodes strictly below this one.
    pub below: NodeSet,
    /// The write this RMW write overwrote, while it is alive.
    pub overwrites: Option<u8>,
}

impl Node {
    pub fn loc(&self) -> Option<Loc> {
        match self.kind {
            NodeKind::Write { loc, .. } => Some(loc),
            NodeKind::Fence { .. } => None,
        }
    }

    pub fn value(&self) -> Option<Value> {
        match self.kind {
            NodeKind::Write { value, .. } => Some(value),
            NodeKind::Fence { .. } => None,
        }
    }

    pub fn is_write(&self) -> bool {
        matches!(self.kind, NodeKind::Write { .. })
    }

    fn writes_to(&self, x: Loc) -> bool {
        self.loc() == Some(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PropError {
    #[error("message is redundant to the process")]
    Redundant,
    #[error("message is not a readable source")]
    NotSource,
    #[error("operation not supported by the {} policy", .0.name())]
    Policy(Policy),
    #[error("propagation unit capacity exceeded")]
    Capacity,
    #[error("forgetting would violate the enabled-read invariant")]
    WouldDisableRead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    EnabledRead { pid: Pid, loc: Loc },
    Coherence { loc: Loc },
    PoLoc { pid: Pid, loc: Loc },
    CausalPropagation { pid: Pid, loc: Loc },
    CoherentObservation { pid: Pid, loc: Loc },
    Atomicity { loc: Loc },
    WeakAtomicity { loc: Loc },
    NoGarbage { node: usize },
    FifoView { pid: Pid, loc: Loc },
    Order,
    Mca { loc: Loc },
}

#[inline]
fn bit(i: usize) -> NodeSet {
    1 << i
}

fn bits(mut s: NodeSet) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if s == 0 {
            None
        } else {
            let i = s.trailing_zeros() as usize;
            s &= s - 1;
            Some(i)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropOrder {
    policy: Policy,
    nprocs: u8,
    nodes: Vec<Node>,
}

impl PropOrder {
    /// One initialization write of 0 per location, seen by everyone.
    pub fn new(policy: Policy, nprocs: usize, nlocs: usize) -> PropOrder {
        assert!(nprocs <= MAX_PROCS && nlocs <= MAX_NODES);
        let all = Self::mask(nprocs);
        let nodes = (0..nlocs)
            .map(|l| Node {
                kind: NodeKind::Write {
                    loc: Loc(l as u16),
                    writer: None,
                    value: 0,
                    rmw_eligible: true,
                },
                seen: all,
                redundant: 0,
                below: 0,
                overwrites: None,
            })
            .collect();
        PropOrder {
            policy,
            nprocs: nprocs as u8,
            nodes,
        }
    }

    fn mask(nprocs: usize) -> ProcSet {
        if nprocs == 32 {
            u32::MAX
        } else {
            (1u32 << nprocs) - 1
        }
    }

    fn all(&self) -> ProcSet {
        Self::mask(self.nprocs as usize)
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn nprocs(&self) -> usize {
        self.nprocs as usize
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, i: usize) -> Value {
        self.nodes[i].value().expect("write message")
    }

    /// `a < b` in the propagation order.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.nodes[b].below & bit(a) != 0
    }

    pub fn seen(&self, i: usize, p: Pid) -> bool {
        self.nodes[i].seen & (1 << p.0) != 0
    }

    pub fn redundant(&self, i: usize, p: Pid) -> bool {
        self.nodes[i].redundant & (1 << p.0) != 0
    }

    fn writes(&self, x: Loc) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].writes_to(x))
    }

    /// Sources available to a read of `x` by `p`.
    pub fn read_sources(&self, p: Pid, x: Loc) -> Vec<usize> {
        self.writes(x)
            .filter(|&i| self.seen(i, p) && !self.redundant(i, p))
            .collect()
    }

    /// Messages `p` may silently mark as seen.
    pub fn update_candidates(&self, p: Pid) -> Vec<usize> {
        if self.policy == Policy::TrivialMca {
            return Vec::new();
        }
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_write() && !self.seen(i, p) && !self.redundant(i, p))
            .collect()
    }

    /// Messages `p` may mark redundant without disabling reads.
    pub fn forget_candidates(&self, p: Pid) -> Vec<usize> {
        if matches!(self.policy, Policy::TrivialMca | Policy::Fifo) {
            return Vec::new();
        }
        (0..self.nodes.len())
            .filter(|&i| {
                let Some(x) = self.nodes[i].loc() else {
                    return false;
                };
                if self.redundant(i, p) {
                    return false;
                }
                let closed = self.redundant_closure(i, x);
                self.writes(x).any(|j| {
                    closed & bit(j) == 0
                        && !self.redundant(j, p)
                        && matches!(self.nodes[j].kind, NodeKind::Write { rmw_eligible: true, .. })
                })
            })
            .collect()
    }

    /// Sources a read-modify-write on `x` by `p` may read from.
    pub fn rmw_sources(&self, p: Pid, x: Loc) -> Vec<usize> {
        match self.policy {
            Policy::Fifo => Vec::new(),
            Policy::TrivialMca | Policy::Coherent => self
                .writes(x)
                .filter(|&i| !self.writes(x).any(|j| self.precedes(i, j)))
                .collect(),
            Policy::PoLoc => self
                .writes(x)
                .filter(|&i| {
                    !self.redundant(i, p)
                        && matches!(self.nodes[i].kind, NodeKind::Write { rmw_eligible: true, .. })
                })
                .collect(),
        }
    }

    fn mark_redundant(&mut self, p: Pid, set: NodeSet) {
        for i in bits(set) {
            self.nodes[i].redundant |= 1 << p.0;
        }
    }

    /// `i` together with the same-location writes below it.
    fn redundant_closure(&self, i: usize, x: Loc) -> NodeSet {
        bits(self.nodes[i].below)
            .filter(|&u| self.nodes[u].writes_to(x))
            .fold(bit(i), |s, u| s | bit(u))
    }

    fn below_same_loc(&self, v: usize) -> NodeSet {
        match self.nodes[v].loc() {
            Some(x) => self.redundant_closure(v, x) & !bit(v),
            None => 0,
        }
    }

    /// `{u : u < v <= v0, u and v write the same location}`.
    fn join_set(&self, v0: usize) -> NodeSet {
        bits(self.nodes[v0].below | bit(v0))
            .filter(|&v| self.nodes[v].is_write())
            .fold(0, |s, v| s | self.below_same_loc(v))
    }

    /// Under FIFO, makes `v` the only message to its location that `p`
    /// sees without it being redundant.
    fn displace(&mut self, p: Pid, v: usize) {
        let x = self.nodes[v].loc().unwrap();
        let others: Vec<usize> = self
            .writes(x)
            .filter(|&u| u != v && self.seen(u, p) && !self.redundant(u, p))
            .collect();
        for u in others {
            let closed = self.redundant_closure(u, x);
            self.mark_redundant(p, closed);
        }
    }

    /// Satisfies a read of `p` from message `v0` and returns its value.
    pub fn read(&mut self, p: Pid, v0: usize) -> Result<Value, PropError> {
        let node = &self.nodes[v0];
        if !node.is_write() || !self.seen(v0, p) || self.redundant(v0, p) {
            return Err(PropError::NotSource);
        }
        let value = self.value(v0);
        let join = self.join_set(v0);
        self.mark_redundant(p, join);
        self.normalize();
        Ok(value)
    }

    /// Marks `v` as seen by `p`.
    pub fn silent_update(&mut self, p: Pid, v: usize) -> Result<(), PropError> {
        if self.policy == Policy::Fifo {
            return self.fifo_update(p, v);
        }
        if !self.nodes[v].is_write() {
            return Err(PropError::NotSource);
        }
        if self.redundant(v, p) {
            return Err(PropError::Redundant);
        }
        self.nodes[v].seen |= 1 << p.0;
        let below = self.below_same_loc(v);
        self.mark_redundant(p, below);
        self.normalize();
        Ok(())
    }

    /// Marks `v` (and same-location writes below it) redundant to `p`.
    pub fn forget(&mut self, p: Pid, v: usize) -> Result<(), PropError> {
        if !self.forget_candidates(p).contains(&v) {
            return Err(PropError::WouldDisableRead);
        }
        let x = self.nodes[v].loc().unwrap();
        let closed = self.redundant_closure(v, x);
        self.mark_redundant(p, closed);
        self.normalize();
        Ok(())
    }

    pub fn fifo_update(&mut self, p: Pid, v0: usize) -> Result<(), PropError> {
        if self.policy != Policy::Fifo {
            return Err(PropError::Policy(self.policy));
        }
        if !self.nodes[v0].is_write() {
            return Err(PropError::NotSource);
        }
        if self.redundant(v0, p) {
            return Err(PropError::Redundant);
        }
        self.nodes[v0].seen |= 1 << p.0;
        self.displace(p, v0);
        let join = self.join_set(v0);
        self.mark_redundant(p, join);
        for v in bits(self.nodes[v0].below) {
            if self.nodes[v].is_write() && !self.redundant(v, p) {
                self.nodes[v].seen |= 1 << p.0;
                self.displace(p, v);
            }
        }
        self.normalize();
        Ok(())
    }

    /// The value `p` currently holds for `x` under FIFO.
    pub fn fifo_read(&self, p: Pid, x: Loc) -> Result<Value, PropError> {
        if self.policy != Policy::Fifo {
            return Err(PropError::Policy(self.policy));
        }
        let src = self.read_sources(p, x);
        debug_assert_eq!(src.len(), 1);
        Ok(self.value(src[0]))
    }

    fn latest_fence(&self, p: Pid) -> Option<usize> {
        let fences: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind == NodeKind::Fence { issuer: p })
            .collect();
        fences
            .iter()
            .copied()
            .find(|&f| fences.iter().all(|&g| g == f || self.precedes(g, f)))
    }

    fn push(&mut self, node: Node) -> Result<usize, PropError> {
        if self.nodes.len() >= MAX_NODES {
            return Err(PropError::Capacity);
        }
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }

    fn closure_of(&self, set: NodeSet) -> NodeSet {
        bits(set).fold(set, |s, i| s | self.nodes[i].below)
    }

    /// Inserts a fresh write of `value` to `x` by `p`.
    pub fn insert_write(&mut self, p: Pid, x: Loc, value: Value) -> Result<usize, PropError> {
        self.insert_write_inner(p, x, value, None)
    }

    fn insert_write_inner(
        &mut self,
        p: Pid,
        x: Loc,
        value: Value,
        overwrites: Option<usize>,
    ) -> Result<usize, PropError> {
        let kind = NodeKind::Write {
            loc: x,
            writer: Some(p),
            value,
            rmw_eligible: true,
        };
        if self.policy == Policy::TrivialMca {
            let old: Vec<usize> = self.writes(x).collect();
            for i in old {
                self.nodes[i].redundant = self.all();
            }
            let all = self.all();
            let v = self.push(Node {
                kind,
                seen: all,
                redundant: 0,
                below: 0,
                overwrites: None,
            })?;
            let k = self.normalize_tracking(v);
            return Ok(k);
        }
        let mut preds: NodeSet = 0;
        if let Some(f) = self.latest_fence(p) {
            preds |= bit(f);
        }
        for u in 0..self.nodes.len() {
            let n = &self.nodes[u];
            let ordered = match self.policy {
                Policy::Coherent => n.writes_to(x),
                Policy::PoLoc => {
                    n.writes_to(x)
                        && matches!(n.kind, NodeKind::Write { writer, .. } if writer.is_none() || writer == Some(p))
                }
                Policy::Fifo => matches!(n.kind, NodeKind::Write { writer: Some(w), .. } if w == p),
                Policy::TrivialMca => false,
            };
            if ordered {
                preds |= bit(u);
            }
        }
        let below = self.closure_of(preds);
        let v = self.push(Node {
            kind,
            seen: 1 << p.0,
            redundant: 0,
            below,
            overwrites: overwrites.map(|o| o as u8),
        })?;
        let under = self.below_same_loc(v);
        self.mark_redundant(p, under);
        if self.policy == Policy::Fifo {
            self.displace(p, v);
        }
        Ok(self.normalize_tracking(v))
    }

    /// Inserts a cumulative fence declaration issued by `p`.
    pub fn insert_fence(&mut self, p: Pid) -> Result<(), PropError> {
        self.insert_fence_raw(p)?;
        self.normalize();
        Ok(())
    }

    fn insert_fence_raw(&mut self, p: Pid) -> Result<(), PropError> {
        if matches!(self.policy, Policy::TrivialMca | Policy::Fifo) {
            return Ok(());
        }
        let preds = (0..self.nodes.len())
            .filter(|&i| match self.nodes[i].kind {
                NodeKind::Write { .. } => self.seen(i, p),
                NodeKind::Fence { issuer } => issuer == p,
            })
            .fold(0, |s, i| s | bit(i));
        let below = self.closure_of(preds);
        self.push(Node {
            kind: NodeKind::Fence { issuer: p },
            seen: 0,
            redundant: 0,
            below,
            overwrites: None,
        })?;
        Ok(())
    }

    /// Atomic read-modify-write by `p` reading from `src`. Writes `new`
    /// if given; a failed compare-and-swap passes `None`. Returns the value
    /// read.
    pub fn rmw(&mut self, p: Pid, src: usize, new: Option<Value>) -> Result<Value, PropError> {
        if self.policy == Policy::Fifo {
            return Err(PropError::Policy(self.policy));
        }
        let x = self.nodes[src].loc().ok_or(PropError::NotSource)?;
        if !self.rmw_sources(p, x).contains(&src) {
            return Err(PropError::NotSource);
        }
        let value = self.value(src);
        self.nodes[src].seen |= 1 << p.0;
        let join = self.join_set(src) | self.below_same_loc(src);
        self.mark_redundant(p, join);
        self.insert_fence_raw(p)?;
        if let Some(new) = new {
            if let NodeKind::Write { rmw_eligible, .. } = &mut self.nodes[src].kind {
                *rmw_eligible = false;
            }
            self.insert_write_inner(p, x, new, Some(src))?;
        } else {
            self.normalize();
        }
        Ok(value)
    }

    fn normalize(&mut self) {
        self.normalize_tracking(usize::MAX);
    }

    /// Garbage-collects and canonically re-sorts the nodes. Returns the new
    /// index of `track` (or `usize::MAX` if it was deleted or not given).
    fn normalize_tracking(&mut self, track: usize) -> usize {
        let all = self.all();
        let n = self.nodes.len();
        let mut dead: NodeSet = 0;
        for i in 0..n {
            if self.nodes[i].is_write() && self.nodes[i].redundant == all {
                dead |= bit(i);
            }
        }
        let writes_alive = (0..n)
            .filter(|&i| self.nodes[i].is_write() && dead & bit(i) == 0)
            .fold(0, |s, i| s | bit(i));
        for i in 0..n {
            if let NodeKind::Fence { issuer } = self.nodes[i].kind {
                let w = self.nodes[i].below & writes_alive;
                let superseded = (0..n).any(|j| {
                    j != i && self.nodes[j].kind == (NodeKind::Fence { issuer }) && self.precedes(i, j)
                });
                let settled = self.policy == Policy::Coherent
                    && bits(w).all(|u| self.nodes[u].seen == all);
                if w == 0 || superseded || settled {
                    dead |= bit(i);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).filter(|&i| dead & bit(i) == 0).collect();
        order.sort_by(|&a, &b| {
            let (na, nb) = (&self.nodes[a], &self.nodes[b]);
            (na.kind, na.seen, na.redundant, (na.below & !dead).count_ones()).cmp(&(
                nb.kind,
                nb.seen,
                nb.redundant,
                (nb.below & !dead).count_ones(),
            ))
        });
        let mut new_index = [u8::MAX; MAX_NODES];
        for (k, &i) in order.iter().enumerate() {
            new_index[i] = k as u8;
        }
        let remap = |s: NodeSet| {
            bits(s & !dead).fold(0 as NodeSet, |acc, i| acc | bit(new_index[i] as usize))
        };
        let nodes: Vec<Node> = order
            .iter()
            .map(|&i| {
                let node = &self.nodes[i];
                Node {
                    kind: node.kind,
                    seen: node.seen,
                    redundant: node.redundant,
                    below: remap(node.below),
                    overwrites: node
                        .overwrites
                        .filter(|&o| dead & bit(o as usize) == 0)
                        .map(|o| new_index[o as usize]),
                }
            })
            .collect();
        self.nodes = nodes;
        if track < n && dead & bit(track) == 0 {
            new_index[track] as usize
        } else {
            usize::MAX
        }
    }

    /// Exactly one write per location, seen by all, and no fences.
    pub fn is_plain(&self, nlocs: usize) -> bool {
        let all = self.all();
        self.nodes.len() == nlocs
            && self.nodes.iter().all(|n| n.is_write() && n.seen == all)
            && (0..nlocs).all(|l| self.writes(Loc(l as u16)).count() == 1)
    }

    /// Checks every invariant applicable to the policy.
    pub fn check_invariants(&self, nlocs: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        let procs = (0..self.nprocs).map(|p| Pid(p as u16));
        for i in 0..n {
            let below = self.nodes[i].below;
            if below & bit(i) != 0
                || bits(below).any(|j| j >= n || self.nodes[j].below & !below != 0)
            {
                out.push(Violation::Order);
                return out;
            }
        }
        for l in 0..nlocs {
            let x = Loc(l as u16);
            let ws: Vec<usize> = self.writes(x).collect();
            for p in procs.clone() {
                let enabled = ws.iter().any(|&v| {
                    !self.redundant(v, p)
                        && matches!(self.nodes[v].kind, NodeKind::Write { rmw_eligible: true, .. })
                });
                if !enabled {
                    out.push(Violation::EnabledRead { pid: p, loc: x });
                }
                let closed = ws.iter().all(|&v| {
                    !self.redundant(v, p)
                        || ws.iter().all(|&u| !self.precedes(u, v) || self.redundant(u, p))
                });
                if !closed {
                    out.push(Violation::CausalPropagation { pid: p, loc: x });
                }
                let observed = ws.iter().all(|&v| {
                    self.redundant(v, p)
                        || !self.seen(v, p)
                        || ws.iter().all(|&u| self.redundant(u, p) || !self.precedes(u, v))
                });
                if !observed {
                    out.push(Violation::CoherentObservation { pid: p, loc: x });
                }
                let own: Vec<usize> = ws
                    .iter()
                    .copied()
                    .filter(|&v| matches!(self.nodes[v].kind, NodeKind::Write { writer: Some(w), .. } if w == p))
                    .collect();
                let chain = own
                    .iter()
                    .all(|&a| own.iter().all(|&b| a == b || self.precedes(a, b) || self.precedes(b, a)));
                if !chain {
                    out.push(Violation::PoLoc { pid: p, loc: x });
                }
                if self.policy == Policy::Fifo {
                    let views = ws
                        .iter()
                        .filter(|&&v| self.seen(v, p) && !self.redundant(v, p))
                        .count();
                    if views != 1 {
                        out.push(Violation::FifoView { pid: p, loc: x });
                    }
                }
            }
            match self.policy {
                Policy::TrivialMca => {
                    if ws.len() != 1 || self.nodes[ws[0]].seen != self.all() {
                        out.push(Violation::Mca { loc: x });
                    }
                }
                Policy::Coherent => {
                    let total = ws
                        .iter()
                        .all(|&a| ws.iter().all(|&b| a == b || self.precedes(a, b) || self.precedes(b, a)));
                    if !total {
                        out.push(Violation::Coherence { loc: x });
                    }
                    if !self.atomic(&ws) {
                        out.push(Violation::Atomicity { loc: x });
                    }
                }
                Policy::PoLoc => {
                    let mut targets: Vec<u8> =
                        ws.iter().filter_map(|&v| self.nodes[v].overwrites).collect();
                    let len = targets.len();
                    targets.sort_unstable();
                    targets.dedup();
                    if targets.len() != len {
                        out.push(Violation::WeakAtomicity { loc: x });
                    }
                }
                Policy::Fifo => {}
            }
        }
        if self.policy == Policy::Fifo {
            for p in procs {
                let chain: Vec<usize> = (0..n)
                    .filter(|&v| matches!(self.nodes[v].kind, NodeKind::Write { writer: Some(w), .. } if w == p))
                    .collect();
                let ok = chain
                    .iter()
                    .all(|&a| chain.iter().all(|&b| a == b || self.precedes(a, b) || self.precedes(b, a)))
                    && chain.iter().all(|&a| {
                        bits(self.nodes[a].below).all(|b| chain.contains(&b))
                    });
                if !ok {
                    out.push(Violation::Order);
                }
            }
        }
        for i in 0..n {
            let garbage = match self.nodes[i].kind {
                NodeKind::Write { .. } => self.nodes[i].redundant == self.all(),
                NodeKind::Fence { .. } => {
                    !bits(self.nodes[i].below).any(|u| self.nodes[u].is_write())
                }
            };
            if garbage {
                out.push(Violation::NoGarbage { node: i });
            }
        }
        out
    }

    fn atomic(&self, ws: &[usize]) -> bool {
        for &top in ws {
            if self.nodes[top].overwrites.is_none() {
                continue;
            }
            let mut chain = alloc::vec![top];
            let mut cur = top;
            while let Some(o) = self.nodes[cur].overwrites {
                cur = o as usize;
                chain.push(cur);
            }
            let bottom = cur;
            for &u in ws {
                if chain.contains(&u) {
                    continue;
                }
                if (self.precedes(u, top) && !self.precedes(u, bottom))
                    || (self.precedes(bottom, u) && !self.precedes(top, u))
                {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for PropOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            match n.kind {
                NodeKind::Write {
                    loc,
                    writer,
                    value,
                    rmw_eligible,
                } => {
                    write!(f, "#{i} W(l{}={value})", loc.0)?;
                    match writer {
                        Some(p) => write!(f, " by p{}", p.0)?,
                        None => f.write_str(" init")?,
                    }
                    if !rmw_eligible {
                        f.write_str(" consumed")?;
                    }
                    write!(f, " seen={:b} red={:b}", n.seen, n.redundant)?;
                }
                NodeKind::Fence { issuer } => write!(f, "#{i} F by p{}", issuer.0)?,
            }
            let below: Vec<usize> = bits(n.below).collect();
            writeln!(f, " above {below:?}")?;
        }
        Ok(())
    }
}
