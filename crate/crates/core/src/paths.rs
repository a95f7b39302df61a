//! Exact single-source shortest paths and minimum-weight route queries.
//!
//! Distances are integer [`Weight`]s, so two paths tie only when their
//! weights are equal to the unit. The predecessor sets of a
//! [`ShortestPathDag`] hold every tied predecessor.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::graph::{TaxGraph, Weight};
use crate::rate::Rate;

/// Default cap on the number of tied routes [`best_routes`] will enumerate.
pub const DEFAULT_ROUTE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("vertex {vertex} out of range for graph of {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("degenerate query: source and target are both vertex {0}")]
    Degenerate(usize),
    #[error("{count} minimum-weight routes exceed the cap of {cap}; raise the cap to list them")]
    TooManyRoutes { count: u128, cap: usize },
}

/// Distances and tie-complete predecessor sets from one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPathDag {
    source: usize,
    dist: Vec<Option<Weight>>,
    hops: Vec<Option<u32>>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl ShortestPathDag {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn dist(&self, v: usize) -> Option<Weight> {
        self.dist[v]
    }

    /// Fewest hops among the minimum-weight paths to `v`.
    pub fn hops(&self, v: usize) -> Option<u32> {
        self.hops[v]
    }

    /// Predecessors of `v` on minimum-weight paths, ascending.
    pub fn preds(&self, v: usize) -> &[usize] {
        &self.preds[v]
    }

    /// Successors of `v` in the DAG, ascending.
    pub fn succs(&self, v: usize) -> &[usize] {
        &self.succs[v]
    }

    /// Reachable vertices in the order they were settled (non-decreasing distance).
    /// This is a topological order of the DAG.
    pub fn settled_order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_reachable(&self, v: usize) -> bool {
        self.dist[v].is_some()
    }
}

/// Runs Dijkstra over `adj` (either out- or in-adjacency) from `source`.
pub(crate) fn dijkstra_on<'a, A>(n: usize, adj: A, source: usize) -> ShortestPathDag
where
    A: Fn(usize) -> &'a [(usize, Weight)],
{
    let mut dist: Vec<Option<Weight>> = vec![None; n];
    let mut hops: Vec<Option<u32>> = vec![None; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::new();
    // (distance, vertex) min-heap: equal distances pop in vertex-id order
    let mut heap = BinaryHeap::new();
    dist[source] = Some(Weight::ZERO);
    hops[source] = Some(0);
    heap.push(Reverse((Weight::ZERO, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v] || dist[v] != Some(d) {
            continue;
        }
        settled[v] = true;
        order.push(v);
        let h = hops[v].expect("settled vertex has hops") + 1;
        for &(w, wt) in adj(v) {
            let nd = d + wt;
            match dist[w] {
                Some(cur) if nd > cur => {}
                Some(cur) if nd == cur => {
                    preds[w].push(v);
                    if hops[w].is_some_and(|hw| h < hw) {
                        hops[w] = Some(h);
                    }
                }
                _ => {
                    // weights are >= 1, so w cannot already be settled here
                    dist[w] = Some(nd);
                    hops[w] = Some(h);
                    preds[w].clear();
                    preds[w].push(v);
                    heap.push(Reverse((nd, w)));
                }
            }
        }
    }
    let mut succs = vec![Vec::new(); n];
    for (w, ps) in preds.iter_mut().enumerate() {
        ps.sort_unstable();
        for &p in ps.iter() {
            succs[p].push(w);
        }
    }
    ShortestPathDag { source, dist, hops, preds, succs, order }
}

/// Minimum-weight-path DAG from `source`.
pub fn dijkstra_dag(graph: &TaxGraph, source: usize) -> Result<ShortestPathDag, PathError> {
    check_vertex(graph, source)?;
    Ok(dijkstra_on(graph.n(), |v| graph.out_arcs(v), source))
}

fn check_vertex(graph: &TaxGraph, v: usize) -> Result<(), PathError> {
    if v >= graph.n() {
        Err(PathError::VertexOutOfRange { vertex: v, n: graph.n() })
    } else {
        Ok(())
    }
}

/// Cheapest total rate from one vertex to another, with its hop count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinCost {
    pub weight: Weight,
    pub rate: Rate,
    pub hops: u32,
}

impl MinCost {
    fn from_parts(weight: Weight, hops: u32) -> Self {
        MinCost { weight, rate: Rate::from_units(weight.units() - u64::from(hops)), hops }
    }
}

/// Minimum cost of sending a payment from `i` to `j`, or `None` if unreachable.
///
/// When minimum-weight paths of different lengths tie, the fewest-hop one is
/// reported; its rate is then the weight minus that hop count.
pub fn min_cost(graph: &TaxGraph, i: usize, j: usize) -> Result<Option<MinCost>, PathError> {
    check_vertex(graph, j)?;
    if i == j {
        return Err(PathError::Degenerate(i));
    }
    let dag = dijkstra_dag(graph, i)?;
    Ok(min_cost_in(&dag, j))
}

pub fn min_cost_in(dag: &ShortestPathDag, j: usize) -> Option<MinCost> {
    Some(MinCost::from_parts(dag.dist(j)?, dag.hops(j)?))
}

/// One minimum-weight route and what it saves against paying directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub path: Vec<usize>,
    pub total_rate: Rate,
    pub hop_count: u32,
    /// Rate of the direct arc, if the graph still has one.
    pub direct_rate: Option<Rate>,
    /// `direct_rate - total_rate`; never negative.
    pub saving: Option<Rate>,
}

/// Number of minimum-weight paths from the DAG source to every vertex.
pub fn path_counts(dag: &ShortestPathDag) -> Vec<u128> {
    let mut sigma = vec![0u128; dag.n()];
    sigma[dag.source()] = 1;
    for &v in dag.settled_order() {
        if v != dag.source() {
            sigma[v] = dag.preds(v).iter().map(|&p| sigma[p]).fold(0u128, u128::saturating_add);
        }
    }
    sigma
}

/// Every minimum-weight route from `i` to `j`, lexicographic by vertex sequence.
pub fn best_routes(graph: &TaxGraph, i: usize, j: usize, cap: usize) -> Result<Vec<Route>, PathError> {
    check_vertex(graph, j)?;
    if i == j {
        return Err(PathError::Degenerate(i));
    }
    let dag = dijkstra_dag(graph, i)?;
    if !dag.is_reachable(j) {
        return Ok(Vec::new());
    }
    let count = path_counts(&dag)[j];
    if count > cap as u128 {
        return Err(PathError::TooManyRoutes { count, cap });
    }

    // vertices from which j is reachable inside the DAG
    let mut reaches = vec![false; dag.n()];
    reaches[j] = true;
    for &v in dag.settled_order().iter().rev() {
        if dag.succs(v).iter().any(|&w| reaches[w]) {
            reaches[v] = true;
        }
    }

    let direct_rate = graph.rate(i, j);
    let total_weight = dag.dist(j).expect("reachable");
    let mut routes = Vec::with_capacity(count as usize);
    let mut stack = vec![i];
    collect_routes(&dag, j, &reaches, &mut stack, &mut |path| {
        let hop_count = (path.len() - 1) as u32;
        let total_rate = Rate::from_units(total_weight.units() - u64::from(hop_count));
        routes.push(Route {
            path: path.to_vec(),
            total_rate,
            hop_count,
            direct_rate,
            saving: direct_rate.map(|d| d.checked_sub(total_rate).expect("route never costs more than the direct arc")),
        });
    });
    Ok(routes)
}

fn collect_routes(
    dag: &ShortestPathDag,
    target: usize,
    reaches: &[bool],
    stack: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let v = *stack.last().expect("non-empty");
    if v == target {
        emit(stack);
        return;
    }
    for &w in dag.succs(v) {
        if reaches[w] {
            stack.push(w);
            collect_routes(dag, target, reaches, stack, emit);
            stack.pop();
        }
    }
}
