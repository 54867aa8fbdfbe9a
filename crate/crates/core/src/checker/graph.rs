//! The size-bounded product of machine and automaton, stored explicitly.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::machine::{Machine, Transition};
use crate::omega::{self, AnnotatedState, MullerSpec};

/// Maps a function over `0..n`, possibly in parallel. Implementations must
/// return results in index order so that exploration is deterministic.
pub trait Expander: Sync {
    fn map<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T>;
}

/// Runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Expander for Sequential {
    fn map<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        (0..n).map(f).collect()
    }
}

/// Edge label; `None` is the stutter step of a configuration with nothing
/// enabled at all. Configurations whose every successor exceeds the bound
/// get no edge.
pub type Label = Option<Transition>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("state limit of {limit} configurations exceeded")]
pub struct StateLimit {
    pub limit: usize,
}

/// Every annotated state reachable from the initial one through
/// configurations of size at most `bound`, with its edges.
#[derive(Clone, Debug)]
pub struct ProductGraph {
    pub bound: usize,
    pub states: Vec<AnnotatedState>,
    pub plain: Vec<bool>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    labels: Vec<Label>,
    /// BFS tree parent of every state but the root, for witness stems.
    parent: Vec<(u32, Label)>,
}

impl ProductGraph {
    pub fn build<E: Expander>(
        m: &Machine,
        spec: &MullerSpec,
        bound: usize,
        limit: usize,
        ex: &E,
    ) -> Result<ProductGraph, StateLimit> {
        let init = omega::initial(spec, m);
        assert!(m.size(&init.config) <= bound, "bound below the initial size");
        let mut index: HashMap<AnnotatedState, u32> = HashMap::new();
        let mut states = Vec::new();
        let mut parent = Vec::new();
        let mut succ: Vec<Vec<(Label, u32)>> = Vec::new();
        index.insert(init.clone(), 0);
        states.push(init);
        parent.push((0, None));
        let mut frontier = alloc::vec![0u32];
        while !frontier.is_empty() {
            let expanded = ex.map(frontier.len(), |i| {
                let s = &states[frontier[i] as usize];
                let succ = m.successors(&s.config);
                if succ.is_empty() {
                    return alloc::vec![(None, omega::product_step(spec, m, s.q, s.config.clone()))];
                }
                succ.into_iter()
                    .filter(|(_, n)| m.size(n) <= bound)
                    .map(|(t, n)| (Some(t), omega::product_step(spec, m, s.q, n)))
                    .collect::<Vec<(Label, AnnotatedState)>>()
            });
            let mut next = Vec::new();
            for (&from, outs) in frontier.iter().zip(expanded) {
                let mut edges = Vec::with_capacity(outs.len());
                for (label, n) in outs {
                    let id = match index.get(&n) {
                        Some(&id) => id,
                        None => {
                            if states.len() >= limit {
                                return Err(StateLimit { limit });
                            }
                            let id = states.len() as u32;
                            index.insert(n.clone(), id);
                            states.push(n);
                            parent.push((from, label));
                            next.push(id);
                            id
                        }
                    };
                    edges.push((label, id));
                }
                if succ.len() <= from as usize {
                    succ.resize(from as usize + 1, Vec::new());
                }
                succ[from as usize] = edges;
            }
            frontier = next;
        }
        succ.resize(states.len(), Vec::new());
        let mut offsets = Vec::with_capacity(states.len() + 1);
        let mut targets = Vec::new();
        let mut labels = Vec::new();
        offsets.push(0);
        for edges in succ {
            for (l, t) in edges {
                labels.push(l);
                targets.push(t);
            }
            offsets.push(targets.len() as u32);
        }
        let plain = states.iter().map(|s| m.is_plain(&s.config)).collect();
        Ok(ProductGraph {
            bound,
            states,
            plain,
            offsets,
            targets,
            labels,
            parent,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn succ(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn edges(&self, v: usize) -> impl Iterator<Item = (Label, usize)> + '_ {
        let r = self.offsets[v] as usize..self.offsets[v + 1] as usize;
        self.labels[r.clone()]
            .iter()
            .copied()
            .zip(self.targets[r].iter().map(|&t| t as usize))
    }

    pub fn nedges(&self) -> usize {
        self.targets.len()
    }

    /// Labels along the BFS tree from the initial state to `v`.
    pub fn stem(&self, mut v: usize) -> Vec<(Label, usize)> {
        let mut out = Vec::new();
        while v != 0 {
            let (p, l) = self.parent[v];
            out.push((l, v));
            v = p as usize;
        }
        out.reverse();
        out
    }

    /// Predecessor lists.
    pub fn reverse(&self) -> Vec<Vec<u32>> {
        let mut rev = alloc::vec![Vec::new(); self.len()];
        for v in 0..self.len() {
            for &w in self.succ(v) {
                rev[w as usize].push(v as u32);
            }
        }
        rev
    }
}

/// Strongly connected components, numbered in reverse topological order
/// (every edge goes from a higher or equal component to a lower or equal
/// one).
pub fn scc(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> (Vec<u32>, usize) {
    const NONE: u32 = u32::MAX;
    let mut index = alloc::vec![NONE; n];
    let mut low = alloc::vec![0u32; n];
    let mut on_stack = alloc::vec![false; n];
    let mut comp = alloc::vec![NONE; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next = 0u32;
    let mut ncomp = 0usize;
    // explicit DFS stack of (node, successors, position)
    let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        call.push((root, succ(root), 0));
        while let Some((v, ws, pos)) = call.last_mut() {
            let v = *v;
            if *pos < ws.len() {
                let w = ws[*pos];
                *pos += 1;
                if index[w] == NONE {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some((u, _, _)) = call.last() {
                low[*u] = low[*u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap() as usize;
                    on_stack[w] = false;
                    comp[w] = ncomp as u32;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    (comp, ncomp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn scc_reverse_topological() {
        // 0 -> 1 <-> 2 -> 3, 3 -> 3
        let g: Vec<Vec<usize>> = vec![vec![1], vec![2], vec![1, 3], vec![3]];
        let (comp, n) = scc(4, |v| g[v].clone());
        assert_eq!(n, 3);
        assert_eq!(comp[1], comp[2]);
        assert!(comp[3] < comp[1] && comp[1] < comp[0]);
    }
}
