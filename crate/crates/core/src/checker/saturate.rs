//! Raising the bound until the connectivity graph stops changing.

use alloc::vec::Vec;

use crate::machine::Machine;
use crate::omega::MullerSpec;

use super::analysis::{Components, ConnectivityGraph};
use super::graph::{Expander, ProductGraph, StateLimit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundStat {
    pub bound: usize,
    pub states: usize,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Clone, Debug)]
pub struct Saturated {
    pub product: ProductGraph,
    pub graph: ConnectivityGraph,
    /// One entry per bound tried, in increasing order.
    pub history: Vec<BoundStat>,
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SaturationError {
    #[error(transparent)]
    StateLimit(#[from] StateLimit),
    #[error("no stable window of {window} bounds up to bound {max_bound}")]
    BoundCap { window: usize, max_bound: usize },
}

/// Builds the graph for bounds `n0, n0 + 1, ...` until `window` consecutive
/// bounds give identical connectivity graphs. Stabilization is evidence of
/// saturation, not a proof.
pub fn saturate<E: Expander>(
    m: &Machine,
    spec: &MullerSpec,
    n0: usize,
    window: usize,
    max_bound: usize,
    limit: usize,
    ex: &E,
) -> Result<Saturated, SaturationError> {
    let window = window.max(1);
    let mut history = Vec::new();
    let mut prev: Option<ConnectivityGraph> = None;
    let mut same = 0;
    for bound in n0..=max_bound {
        let product = ProductGraph::build(m, spec, bound, limit, ex)?;
        let cs = Components::new(&product);
        let mut graph = ConnectivityGraph::from_product(&cs);
        history.push(BoundStat {
            bound,
            states: product.len(),
            vertices: graph.vertices.len(),
            edges: graph.edges.len(),
        });
        same = match &prev {
            Some(p) if p.vertices == graph.vertices && p.edges == graph.edges && p.rsets == graph.rsets => same + 1,
            _ => 1,
        };
        if same >= window {
            drop(cs);
            return Ok(Saturated {
                product,
                graph,
                history,
                window,
            });
        }
        graph.bound = bound;
        prev = Some(graph);
    }
    Err(SaturationError::BoundCap { window, max_bound })
}
