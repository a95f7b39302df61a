//! Weighted modularity and Louvain community detection.
//!
//! Modularity follows the ordered-pair convention:
//! `Q = 1/(2M) * sum_ij (a_ij - k_i k_j / 2M) [c_i == c_j]`, where `k_i` is
//! the strength of `i` and `2M` the sum of all strengths. Flat graphs have no
//! self-affinity. Aggregated graphs carry the ordered intra-community sum of
//! a super-vertex on its diagonal, so `Q` is preserved across levels.

mod louvain;
mod report;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::UndirectedTaxGraph;
use crate::scalar::{sum_in_order, Scalar};

pub use louvain::{louvain, LouvainConfig, LouvainState};
pub use report::{
    community_report, sweep_modularity, CommunityGroup, CommunityReport, CurvePoint, ModularityCurve, ReportMember,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommunityError {
    #[error("empty graph, modularity undefined")]
    EmptyGraph,
    #[error("total affinity is zero, modularity undefined")]
    ZeroTotalWeight,
    #[error("assignment has {found} entries, graph has {expected} vertices")]
    AssignmentLength { expected: usize, found: usize },
    #[error("vertex {vertex} out of range for graph of {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
}

/// How an undirected tax graph's edges become modularity affinities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AffinityMode {
    /// Every surviving edge has affinity 1.
    #[default]
    Unweighted,
    /// Affinity equals the edge's rate in percent.
    #[serde(rename = "rate")]
    RateAsWeight,
}

impl std::str::FromStr for AffinityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unweighted" => Ok(AffinityMode::Unweighted),
            "rate" | "rate-as-weight" => Ok(AffinityMode::RateAsWeight),
            other => Err(format!("unknown affinity mode `{other}`")),
        }
    }
}

impl AffinityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AffinityMode::Unweighted => "unweighted",
            AffinityMode::RateAsWeight => "rate",
        }
    }
}

/// Symmetric non-negative affinities with cached strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph<S> {
    mode: AffinityMode,
    // sorted by neighbour id; a diagonal entry only on aggregated graphs
    adj: Vec<Vec<(usize, S)>>,
    strength: Vec<S>,
    two_m: S,
}

impl<S: Scalar> AffinityGraph<S> {
    /// Builds from undirected edges `(i, j, a_ij)`. Repeated pairs are summed, self-pairs ignored.
    pub fn from_edges<I>(n: usize, mode: AffinityMode, edges: I) -> Result<Self, CommunityError>
    where
        I: IntoIterator<Item = (usize, usize, S)>,
    {
        let mut rows: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); n];
        let mut any = false;
        for (i, j, a) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(CommunityError::VertexOutOfRange { vertex: v, n });
                }
            }
            if i == j {
                continue;
            }
            any = true;
            for (x, y) in [(i, j), (j, i)] {
                let slot = rows[x].entry(y).or_insert_with(S::zero);
                *slot = slot.clone() + a.clone();
            }
        }
        if !any {
            return Err(CommunityError::EmptyGraph);
        }
        let g = Self::from_rows(mode, rows);
        if g.two_m.is_zero() {
            return Err(CommunityError::ZeroTotalWeight);
        }
        Ok(g)
    }

    pub(crate) fn from_rows(mode: AffinityMode, rows: Vec<BTreeMap<usize, S>>) -> Self {
        let adj: Vec<Vec<(usize, S)>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
        let strength: Vec<S> = adj.iter().map(|row| sum_in_order(row.iter().map(|(_, a)| a.clone()))).collect();
        let two_m = sum_in_order(strength.iter().cloned());
        AffinityGraph { mode, adj, strength, two_m }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn mode(&self) -> AffinityMode {
        self.mode
    }

    /// Neighbours of `v` with their affinity, ascending; may include `v` itself on aggregated graphs.
    pub fn neighbors(&self, v: usize) -> &[(usize, S)] {
        &self.adj[v]
    }

    /// Affinity `a_ij` (zero when absent).
    pub fn affinity(&self, i: usize, j: usize) -> S {
        self.adj[i]
            .binary_search_by_key(&j, |&(u, _)| u)
            .map(|k| self.adj[i][k].1.clone())
            .unwrap_or_else(|_| S::zero())
    }

    /// `k_i`, the sum of row `i`.
    pub fn strength(&self, v: usize) -> S {
        self.strength[v].clone()
    }

    /// `M`, total affinity over unordered pairs.
    pub fn total_weight(&self) -> S {
        self.two_m.clone() / S::from_count(2)
    }

    /// `2M`, the sum of all strengths.
    pub fn two_m(&self) -> S {
        self.two_m.clone()
    }

    pub fn has_links(&self, v: usize) -> bool {
        self.adj[v].iter().any(|&(u, _)| u != v)
    }
}

/// Affinity graph of the surviving edges of an undirected tax graph.
pub fn to_affinity<S: Scalar>(graph: &UndirectedTaxGraph, mode: AffinityMode) -> Result<AffinityGraph<S>, CommunityError> {
    let per_percent = S::from_u64(crate::rate::UNITS_PER_PERCENT).expect("scalar holds 10^6");
    AffinityGraph::from_edges(
        graph.n(),
        mode,
        graph.edges().map(|(i, j, r)| {
            let a = match mode {
                AffinityMode::Unweighted => S::one(),
                AffinityMode::RateAsWeight => {
                    S::from_u64(r.units()).expect("scalar holds rate units") / per_percent.clone()
                }
            };
            (i, j, a)
        }),
    )
}

/// Vertex to community assignment with its modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<S> {
    /// Dense community ids, numbered by first appearance in vertex order.
    pub assignment: Vec<usize>,
    pub community_count: usize,
    pub modularity: S,
    /// False when the pass limit stopped the optimisation early.
    pub converged: bool,
    /// Number of move/aggregate passes run.
    pub passes: usize,
}

impl<S: Scalar> Partition<S> {
    /// Wraps an arbitrary labelling, relabelling densely and evaluating its modularity.
    pub fn evaluate(aff: &AffinityGraph<S>, labels: &[usize]) -> Result<Self, CommunityError> {
        let assignment = relabel_dense(labels);
        let modularity = modularity(aff, &assignment)?;
        let community_count = assignment.iter().max().map_or(0, |m| m + 1);
        Ok(Partition { assignment, community_count, modularity, converged: true, passes: 0 })
    }

    pub fn members(&self, community: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(move |&(_, &c)| c == community).map(|(v, _)| v)
    }
}

/// Renumbers labels `0..k` in order of first appearance.
pub fn relabel_dense(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Modularity of an assignment (any labels, not necessarily dense).
pub fn modularity<S: Scalar>(aff: &AffinityGraph<S>, assignment: &[usize]) -> Result<S, CommunityError> {
    let n = aff.n();
    if assignment.len() != n {
        return Err(CommunityError::AssignmentLength { expected: n, found: assignment.len() });
    }
    if aff.two_m.is_zero() {
        return Err(CommunityError::ZeroTotalWeight);
    }
    let dense = relabel_dense(assignment);
    let k = dense.iter().max().map_or(0, |m| m + 1);
    let mut inner = vec![S::zero(); k];
    let mut tot = vec![S::zero(); k];
    for v in 0..n {
        let c = dense[v];
        let internal = sum_in_order(aff.adj[v].iter().filter(|&&(u, _)| dense[u] == c).map(|(_, a)| a.clone()));
        inner[c] = inner[c].clone() + internal;
        tot[c] = tot[c].clone() + aff.strength[v].clone();
    }
    Ok(modularity_from_sums(&inner, &tot, &aff.two_m))
}

pub(crate) fn modularity_from_sums<S: Scalar>(inner: &[S], tot: &[S], two_m: &S) -> S {
    sum_in_order(inner.iter().zip(tot).map(|(i, t)| {
        let frac = t.clone() / two_m.clone();
        i.clone() / two_m.clone() - frac.clone() * frac
    }))
}
