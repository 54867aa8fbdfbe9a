//! Connectivity graph, bottom components and verdicts.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use crate::omega::{AnnotatedState, MullerSpec, StateSet};

use super::graph::{scc, Label, ProductGraph};

/// Components of a product graph together with liveness: a state is live
/// when some plain configuration is reachable from it within the bound.
pub struct Components<'g> {
    pub g: &'g ProductGraph,
    pub comp: Vec<u32>,
    pub ncomp: usize,
    pub live: Vec<bool>,
    /// States of each component, in index order.
    pub members: Vec<Vec<u32>>,
}

impl<'g> Components<'g> {
    pub fn new(g: &'g ProductGraph) -> Components<'g> {
        let (comp, ncomp) = scc(g.len(), |v| g.succ(v).iter().map(|&w| w as usize).collect());
        let rev = g.reverse();
        let mut live = g.plain.clone();
        let mut queue: VecDeque<usize> = (0..g.len()).filter(|&v| live[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &u in &rev[v] {
                if !live[u as usize] {
                    live[u as usize] = true;
                    queue.push_back(u as usize);
                }
            }
        }
        let mut members = alloc::vec![Vec::new(); ncomp];
        for v in 0..g.len() {
            members[comp[v] as usize].push(v as u32);
        }
        Components {
            g,
            comp,
            ncomp,
            live,
            members,
        }
    }

    fn qset(&self, c: usize) -> StateSet {
        self.members[c]
            .iter()
            .fold(0, |s, &v| s | 1 << self.g.states[v as usize].q)
    }

    /// Whether component `c` has an edge inside itself.
    fn has_cycle(&self, c: usize) -> bool {
        self.members[c]
            .iter()
            .any(|&v| self.g.succ(v as usize).iter().any(|&w| self.comp[w as usize] as usize == c))
    }

    /// Components with no edge to another component, optionally ignoring
    /// edges into dead states.
    fn bottoms(&self, live_only: bool) -> Vec<usize> {
        (0..self.ncomp)
            .filter(|&c| {
                let v0 = self.members[c][0] as usize;
                (!live_only || self.live[v0])
                    && self.members[c].iter().all(|&v| {
                        self.g.succ(v as usize).iter().all(|&w| {
                            self.comp[w as usize] as usize == c || (live_only && !self.live[w as usize])
                        })
                    })
            })
            .collect()
    }

    /// Automaton states reachable from each component through live states.
    fn rsets(&self) -> Vec<StateSet> {
        let mut r = alloc::vec![0 as StateSet; self.ncomp];
        // components are numbered sinks first
        for c in 0..self.ncomp {
            if !self.live[self.members[c][0] as usize] {
                continue;
            }
            let mut s = self.qset(c);
            for &v in &self.members[c] {
                for &w in self.g.succ(v as usize) {
                    let d = self.comp[w as usize] as usize;
                    if d != c && self.live[w as usize] {
                        s |= r[d];
                    }
                }
            }
            r[c] = s;
        }
        r
    }
}

/// The graph over annotated plain configurations. There is an edge from
/// one vertex to another iff the second is reachable from the first by a
/// nonempty bounded path through configurations from which a plain one
/// stays reachable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityGraph {
    pub bound: usize,
    /// Sorted, so that graphs for different bounds compare directly.
    pub vertices: Vec<AnnotatedState>,
    pub edges: Vec<(u32, u32)>,
    pub rsets: Vec<StateSet>,
}

impl ConnectivityGraph {
    pub fn from_product(cs: &Components) -> ConnectivityGraph {
        let g = cs.g;
        let mut order: Vec<usize> = (0..g.len()).filter(|&v| g.plain[v]).collect();
        order.sort_by(|&a, &b| g.states[a].cmp(&g.states[b]));
        let mut vid = BTreeMap::new();
        for (i, &v) in order.iter().enumerate() {
            vid.insert(v, i as u32);
        }
        let rc = cs.rsets();
        let mut edges = Vec::new();
        let mut mark = alloc::vec![u32::MAX; g.len()];
        for (i, &v) in order.iter().enumerate() {
            let mut queue = VecDeque::new();
            for &w in g.succ(v) {
                if mark[w as usize] != i as u32 && cs.live[w as usize] {
                    mark[w as usize] = i as u32;
                    queue.push_back(w as usize);
                }
            }
            while let Some(u) = queue.pop_front() {
                if g.plain[u] {
                    edges.push((i as u32, vid[&u]));
                    continue;
                }
                for &w in g.succ(u) {
                    if mark[w as usize] != i as u32 && cs.live[w as usize] {
                        mark[w as usize] = i as u32;
                        queue.push_back(w as usize);
                    }
                }
            }
        }
        // close the direct edges under composition
        let n = order.len();
        let mut direct = alloc::vec![Vec::new(); n];
        for &(a, b) in &edges {
            direct[a as usize].push(b);
        }
        let mut edges = Vec::new();
        let mut seen = alloc::vec![u32::MAX; n];
        for a in 0..n {
            let mut stack: Vec<u32> = direct[a].clone();
            while let Some(b) = stack.pop() {
                if seen[b as usize] == a as u32 {
                    continue;
                }
                seen[b as usize] = a as u32;
                edges.push((a as u32, b));
                stack.extend(direct[b as usize].iter().copied().filter(|&c| seen[c as usize] != a as u32));
            }
        }
        edges.sort_unstable();
        ConnectivityGraph {
            bound: g.bound,
            rsets: order.iter().map(|&v| rc[cs.comp[v] as usize]).collect(),
            vertices: order.into_iter().map(|v| g.states[v].clone()).collect(),
            edges,
        }
    }

    /// Whether every vertex, edge and R-set of `self` also occurs in `other`.
    pub fn is_subgraph_of(&self, other: &ConnectivityGraph) -> bool {
        let map: Option<Vec<usize>> = self
            .vertices
            .iter()
            .map(|v| other.vertices.binary_search(v).ok())
            .collect();
        let Some(map) = map else { return false };
        self.edges
            .iter()
            .all(|&(a, b)| other.edges.binary_search(&(map[a as usize] as u32, map[b as usize] as u32)).is_ok())
            && map
                .iter()
                .enumerate()
                .all(|(i, &j)| self.rsets[i] & !other.rsets[j] == 0)
    }
}

/// A run prefix leading into a bottom component, and a closed walk inside
/// it that visits exactly the component's automaton states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<Label>,
    pub cycle: Vec<Label>,
    /// Product state where the cycle starts and ends.
    pub entry: usize,
    pub states: StateSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub bound: usize,
    /// Automaton states of each bottom component.
    pub bscc_sets: Vec<StateSet>,
    pub accepted: bool,
    pub witnesses: Vec<Lasso>,
    /// Live bottom components without an inner cycle; runs through them
    /// cannot stay within the bound.
    pub dead_ends: usize,
}

/// Shortest path inside component `c` from `from` to a state satisfying
/// `goal`, as edge labels and visited states.
fn path_within(
    cs: &Components,
    c: usize,
    from: usize,
    goal: impl Fn(usize) -> bool,
    nonempty: bool,
) -> Vec<(Label, usize)> {
    let g = cs.g;
    let mut prev: BTreeMap<usize, (usize, Label)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    if !nonempty && goal(from) {
        return Vec::new();
    }
    for (l, w) in g.edges(from) {
        if cs.comp[w] as usize == c && !prev.contains_key(&w) {
            prev.insert(w, (from, l));
            queue.push_back(w);
        }
    }
    while let Some(u) = queue.pop_front() {
        if goal(u) {
            let mut out = Vec::new();
            let mut x = u;
            loop {
                let (p, l) = prev[&x];
                out.push((l, x));
                if p == from {
                    break;
                }
                x = p;
            }
            out.reverse();
            return out;
        }
        for (l, w) in g.edges(u) {
            if cs.comp[w] as usize == c && !prev.contains_key(&w) {
                prev.insert(w, (u, l));
                queue.push_back(w);
            }
        }
    }
    unreachable!("goal not reachable inside a strongly connected component")
}

fn lasso(cs: &Components, c: usize) -> Lasso {
    let g = cs.g;
    let entry = cs.members[c]
        .iter()
        .map(|&v| v as usize)
        .find(|&v| g.plain[v])
        .unwrap_or(cs.members[c][0] as usize);
    let states = cs.qset(c);
    let mut cycle = Vec::new();
    let mut at = entry;
    let mut todo = states & !(1 << g.states[entry].q);
    while todo != 0 {
        let seg = path_within(cs, c, at, |v| todo >> g.states[v].q & 1 == 1, true);
        for &(_, v) in &seg {
            todo &= !(1 << g.states[v].q);
        }
        at = seg.last().unwrap().1;
        cycle.extend(seg.into_iter().map(|(l, _)| l));
    }
    let back = path_within(cs, c, at, |v| v == entry, true);
    cycle.extend(back.into_iter().map(|(l, _)| l));
    Lasso {
        stem: g.stem(entry).into_iter().map(|(l, _)| l).collect(),
        cycle,
        entry,
        states,
    }
}

/// Fair qualitative verdict: accepted iff the automaton states of every
/// bottom component of the connectivity graph form an accepting set.
pub fn qualitative(cs: &Components, spec: &MullerSpec) -> Verdict {
    let mut bscc_sets = Vec::new();
    let mut witnesses = Vec::new();
    let mut dead_ends = 0;
    for c in cs.bottoms(true) {
        if !cs.has_cycle(c) {
            dead_ends += 1;
            continue;
        }
        bscc_sets.push(cs.qset(c));
        witnesses.push(lasso(cs, c));
    }
    Verdict {
        bound: cs.g.bound,
        accepted: bscc_sets.iter().all(|&s| spec.accepts(s)),
        bscc_sets,
        witnesses,
        dead_ends,
    }
}

/// Verdict without any fairness: rejected as soon as some cycle of the
/// product visits a non-accepting set of automaton states.
pub fn unfair(cs: &Components, spec: &MullerSpec) -> Verdict {
    let g = cs.g;
    let mut bad = Vec::new();
    for c in 0..cs.ncomp {
        if !cs.has_cycle(c) {
            continue;
        }
        let q = cs.qset(c);
        if !spec.accepts(q) {
            bad.push((c, q));
            continue;
        }
        // a cycle staying within one automaton state
        for s in 0..spec.states.len() {
            if q >> s & 1 == 0 || spec.accepts(1 << s) {
                continue;
            }
            let inside: Vec<usize> = cs.members[c]
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| g.states[v].q as usize == s)
                .collect();
            let local: BTreeMap<usize, usize> = inside.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let (sub, _) = scc(inside.len(), |i| {
                g.succ(inside[i]).iter().filter_map(|&w| local.get(&(w as usize)).copied()).collect()
            });
            let cyclic = (0..inside.len()).any(|i| {
                g.succ(inside[i])
                    .iter()
                    .filter_map(|&w| local.get(&(w as usize)))
                    .any(|&j| sub[j] == sub[i])
            });
            if cyclic {
                bad.push((c, 1 << s));
                break;
            }
        }
    }
    let mut sets: Vec<StateSet> = bad.iter().map(|&(_, s)| s).collect();
    sets.sort_unstable();
    sets.dedup();
    Verdict {
        bound: g.bound,
        accepted: bad.is_empty(),
        bscc_sets: sets,
        witnesses: Vec::new(),
        dead_ends: 0,
    }
}

/// Progress of the quantitative approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Acceptance and rejection mass after each iteration.
    pub history: Vec<(f64, f64)>,
}

/// Approximates the probability of acceptance under uniform choice among
/// the transitions enabled within the bound.
pub fn quantitative(cs: &Components, spec: &MullerSpec, eps: f64, max_iter: usize) -> Bracket {
    let g = cs.g;
    let bottoms = cs.bottoms(false);
    let mut good = alloc::vec![false; cs.ncomp];
    let mut bad = alloc::vec![false; cs.ncomp];
    for &c in &bottoms {
        if spec.accepts(cs.qset(c)) {
            good[c] = true;
        } else {
            bad[c] = true;
        }
    }
    // reachability of accepting and rejecting bottoms, sinks first
    for c in 0..cs.ncomp {
        for &v in &cs.members[c] {
            for &w in g.succ(v as usize) {
                let d = cs.comp[w as usize] as usize;
                if d != c {
                    good[c] |= good[d];
                    bad[c] |= bad[d];
                }
            }
        }
    }
    let mut acc = 0.0f64;
    let mut rej = 0.0f64;
    let mut history = Vec::new();
    let mut layer: BTreeMap<usize, f64> = BTreeMap::new();
    layer.insert(0, 1.0);
    let mut iterations = 0;
    loop {
        let mut next: BTreeMap<usize, f64> = BTreeMap::new();
        for (&v, &p) in &layer {
            let c = cs.comp[v] as usize;
            if !bad[c] {
                acc += p;
            } else if !good[c] {
                rej += p;
            } else {
                let out = g.succ(v);
                let share = p / out.len() as f64;
                for &w in out {
                    *next.entry(w as usize).or_insert(0.0) += share;
                }
            }
        }
        history.push((acc, rej));
        layer = next;
        let open: f64 = layer.values().sum();
        if open <= eps || layer.is_empty() {
            return Bracket {
                lo: acc,
                hi: (1.0 - rej).max(acc),
                iterations,
                converged: true,
                history,
            };
        }
        iterations += 1;
        if iterations >= max_iter {
            return Bracket {
                lo: acc,
                hi: (1.0 - rej).max(acc),
                iterations,
                converged: false,
                history,
            };
        }
    }
}
