//! Directed and undirected tax graphs built from a rate matrix.

use std::fmt;
use std::ops::Add;

use thiserror::Error;

use crate::ingest::RateMatrix;
use crate::rate::{IncomeType, Rate};

/// Default threshold ladder, highest first.
pub const DEFAULT_THRESHOLDS: [u64; 8] = [35, 30, 25, 20, 15, 10, 5, 0];

pub fn default_thresholds() -> Vec<Rate> {
    DEFAULT_THRESHOLDS.iter().map(|&p| Rate::from_percent(p)).collect()
}

/// Exact arc or path cost in units of 10^-6 percent.
///
/// An arc costs its rate plus one unit of sanction, so a path's weight is its
/// total rate plus its hop count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(pub u64);

impl Weight {
    pub const ZERO: Weight = Weight(0);
    pub const SANCTION: Weight = Weight(1);

    pub fn for_rate(rate: Rate) -> Self {
        Weight(rate.units() + Self::SANCTION.0)
    }

    pub fn units(self) -> u64 {
        self.0
    }

    /// Rate part of a single arc weight.
    pub fn arc_rate(self) -> Rate {
        Rate::from_units(self.0 - Self::SANCTION.0)
    }
}

impl Add for Weight {
    type Output = Weight;

    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0.checked_add(rhs.0).expect("path weight overflow"))
    }
}

impl fmt::Display for Weight {
    /// Decimal percent including the sanction, e.g. `20.000001`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Rate::from_units(self.0).fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("undirected projection needs the unfiltered graph (this one was filtered at {0})")]
    FilteredInput(Rate),
    #[error("vertex {vertex} out of range for graph of {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
}

/// Weighted digraph over jurisdictions for one income type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxGraph {
    n: usize,
    income: IncomeType,
    threshold: Option<Rate>,
    // dense n*n, diagonal always None
    arcs: Vec<Option<Weight>>,
    out_adj: Vec<Vec<(usize, Weight)>>,
    in_adj: Vec<Vec<(usize, Weight)>>,
}

impl TaxGraph {
    fn from_dense(n: usize, income: IncomeType, threshold: Option<Rate>, arcs: Vec<Option<Weight>>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if let Some(w) = arcs[i * n + j] {
                    out_adj[i].push((j, w));
                    in_adj[j].push((i, w));
                }
            }
        }
        Self { n, income, threshold, arcs, out_adj, in_adj }
    }

    /// Graph from an explicit arc list, for hand-built instances.
    ///
    /// Missing pairs have no arc; the result counts as unfiltered only if it is complete.
    pub fn from_arcs<I>(n: usize, income: IncomeType, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, Rate)>,
    {
        let mut dense = vec![None; n * n];
        for (i, j, r) in arcs {
            for v in [i, j] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if i != j {
                dense[i * n + j] = Some(Weight::for_rate(r));
            }
        }
        Ok(Self::from_dense(n, income, None, dense))
    }

    /// Records the threshold that produced this graph, without filtering.
    pub(crate) fn with_threshold(mut self, threshold: Option<Rate>) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn income(&self) -> IncomeType {
        self.income
    }

    pub fn threshold(&self) -> Option<Rate> {
        self.threshold
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<Weight> {
        self.arcs[i * self.n + j]
    }

    pub fn rate(&self, i: usize, j: usize) -> Option<Rate> {
        self.weight(i, j).map(Weight::arc_rate)
    }

    /// Outgoing arcs of `v` in ascending target order.
    pub fn out_arcs(&self, v: usize) -> &[(usize, Weight)] {
        &self.out_adj[v]
    }

    /// Incoming arcs of `v` in ascending source order.
    pub fn in_arcs(&self, v: usize) -> &[(usize, Weight)] {
        &self.in_adj[v]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, Weight)> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(i, adj)| adj.iter().map(move |&(j, w)| (i, j, w)))
    }

    pub fn arc_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.arc_count() == self.n * self.n.saturating_sub(1)
    }
}

/// Complete digraph: arc `(i, j)` weighs `rate(i, j)` plus one sanction unit.
pub fn build_directed(matrix: &RateMatrix) -> TaxGraph {
    let n = matrix.n();
    let arcs = (0..n * n).map(|k| matrix.get(k / n, k % n).map(Weight::for_rate)).collect();
    TaxGraph::from_dense(n, matrix.income(), None, arcs)
}

/// Drops arcs whose rate exceeds `threshold`. The sanction is not part of the comparison.
pub fn apply_threshold(graph: &TaxGraph, threshold: Rate) -> TaxGraph {
    let arcs = graph.arcs.iter().map(|a| a.filter(|w| w.arc_rate() <= threshold)).collect();
    let threshold = Some(graph.threshold.map_or(threshold, |t| t.min(threshold)));
    TaxGraph::from_dense(graph.n, graph.income, threshold, arcs)
}

/// Undirected projection; each pair carries the higher of its two directional rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedTaxGraph {
    n: usize,
    income: IncomeType,
    threshold: Option<Rate>,
    // dense symmetric n*n, diagonal None
    edges: Vec<Option<Rate>>,
}

impl UndirectedTaxGraph {
    /// Graph from an explicit edge list; later duplicates overwrite earlier ones.
    pub fn from_edges<I>(n: usize, income: IncomeType, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, Rate)>,
    {
        let mut dense = vec![None; n * n];
        for (i, j, r) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if i != j {
                dense[i * n + j] = Some(r);
                dense[j * n + i] = Some(r);
            }
        }
        Ok(Self { n, income, threshold: None, edges: dense })
    }

    pub(crate) fn with_threshold(mut self, threshold: Option<Rate>) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn income(&self) -> IncomeType {
        self.income
    }

    pub fn threshold(&self) -> Option<Rate> {
        self.threshold
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<Rate> {
        self.edges[i * self.n + j]
    }

    /// Edges as `(i, j, rate)` with `i < j`, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Rate)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).filter_map(move |j| self.edge(i, j).map(|r| (i, j, r))))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.edge(v, u).is_some()).count()
    }
}

/// Max-rate projection of the unfiltered digraph.
pub fn to_undirected(graph: &TaxGraph) -> Result<UndirectedTaxGraph, GraphError> {
    if let Some(t) = graph.threshold {
        return Err(GraphError::FilteredInput(t));
    }
    let n = graph.n;
    let mut edges = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // a hand-built incomplete graph projects only pairs linked both ways
            edges[i * n + j] = match (graph.rate(i, j), graph.rate(j, i)) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
        }
    }
    Ok(UndirectedTaxGraph { n, income: graph.income, threshold: None, edges })
}

pub fn apply_threshold_undirected(graph: &UndirectedTaxGraph, threshold: Rate) -> UndirectedTaxGraph {
    let edges = graph.edges.iter().map(|e| e.filter(|&r| r <= threshold)).collect();
    let threshold = Some(graph.threshold.map_or(threshold, |t| t.min(threshold)));
    UndirectedTaxGraph { n: graph.n, income: graph.income, threshold, edges }
}

/// Anything with vertices that can be checked for incident links.
pub trait Incidence {
    fn vertex_count(&self) -> usize;
    fn has_incident(&self, v: usize) -> bool;
}

impl Incidence for TaxGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn has_incident(&self, v: usize) -> bool {
        !self.out_adj[v].is_empty() || !self.in_adj[v].is_empty()
    }
}

impl Incidence for UndirectedTaxGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn has_incident(&self, v: usize) -> bool {
        self.edges[v * self.n..(v + 1) * self.n].iter().any(Option::is_some)
    }
}

/// Vertices with no incident arcs or edges, ascending.
pub fn isolated_vertices<G: Incidence>(graph: &G) -> Vec<usize> {
    (0..graph.vertex_count()).filter(|&v| !graph.has_incident(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SyntheticProfile};

    fn pct(p: u64) -> Rate {
        Rate::from_percent(p)
    }

    fn two_vertex(ab: Rate, ba: Rate) -> TaxGraph {
        let m = RateMatrix::from_fn(2, IncomeType::Dividends, |i, _| if i == 0 { ab } else { ba }).unwrap();
        build_directed(&m)
    }

    #[test]
    fn arc_weights_include_sanction() {
        let g = two_vertex(pct(20), pct(30));
        assert_eq!(g.weight(0, 1), Some(Weight(20_000_001)));
        assert_eq!(g.weight(1, 0), Some(Weight(30_000_001)));
        assert_eq!(g.weight(0, 0), None);
        assert!(g.is_complete());
        assert_eq!(two_vertex(Rate::ZERO, Rate::ZERO).weight(0, 1), Some(Weight(1)));
        assert_eq!(Weight(20_000_001).to_string(), "20.000001");
    }

    #[test]
    fn decimal_rate_weight() {
        let g = two_vertex("12.5".parse().unwrap(), Rate::ZERO);
        assert_eq!(g.weight(0, 1), Some(Weight(12_500_001)));
    }

    #[test]
    fn threshold_compares_base_rate() {
        let g = two_vertex(pct(20), pct(30));
        let t25 = apply_threshold(&g, pct(25));
        assert!(t25.weight(0, 1).is_some());
        assert!(t25.weight(1, 0).is_none());
        assert_eq!(t25.threshold(), Some(pct(25)));
        let t20 = apply_threshold(&g, pct(20));
        assert!(t20.weight(0, 1).is_some());
        assert_eq!(apply_threshold(&g, pct(100)).arc_count(), 2);
    }

    #[test]
    fn threshold_boundary_enumeration() {
        let rates = ["0", "5", "5.000001", "10"].map(|s| s.parse::<Rate>().unwrap());
        let g = TaxGraph::from_arcs(5, IncomeType::Royalties, rates.iter().enumerate().map(|(k, &r)| (0, k + 1, r)))
            .unwrap();
        let kept: Vec<_> = apply_threshold(&g, pct(5)).arcs().map(|(_, j, _)| j).collect();
        assert_eq!(kept, vec![1, 2]);
    }

    #[test]
    fn undirected_takes_max() {
        let g = two_vertex(Rate::ZERO, pct(20));
        let u = to_undirected(&g).unwrap();
        assert_eq!(u.edge(0, 1), Some(pct(20)));
        assert_eq!(u.edge(1, 0), Some(pct(20)));
        assert_eq!(u.edge_count(), 1);
        assert!(apply_threshold_undirected(&u, pct(20)).edge(0, 1).is_some());
        assert!(apply_threshold_undirected(&u, pct(15)).edge(0, 1).is_none());
        let sym = to_undirected(&two_vertex(pct(7), pct(7))).unwrap();
        assert_eq!(sym.edge(0, 1), Some(pct(7)));
    }

    #[test]
    fn undirected_rejects_filtered() {
        let g = apply_threshold(&two_vertex(pct(1), pct(2)), pct(50));
        assert_eq!(to_undirected(&g), Err(GraphError::FilteredInput(pct(50))));
    }

    #[test]
    fn undirected_matches_scan_oracle() {
        let m = generate_synthetic(5, 3, SyntheticProfile::Uniform).unwrap();
        let u = to_undirected(&build_directed(&m)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    let expect = if m.rate(i, j) > m.rate(j, i) { m.rate(i, j) } else { m.rate(j, i) };
                    assert_eq!(u.edge(i, j), Some(expect));
                }
            }
        }
    }

    #[test]
    fn threshold_zero_keeps_only_zero_pairs() {
        let m = generate_synthetic(6, 9, SyntheticProfile::ZeroHeavy).unwrap();
        let u = apply_threshold_undirected(&to_undirected(&build_directed(&m)).unwrap(), Rate::ZERO);
        for (i, j, r) in u.edges() {
            assert_eq!(r, Rate::ZERO);
            assert_eq!(m.rate(i, j), Rate::ZERO);
            assert_eq!(m.rate(j, i), Rate::ZERO);
        }
    }

    #[test]
    fn isolates() {
        let m = generate_synthetic(4, 0, SyntheticProfile::Uniform).unwrap();
        let g = build_directed(&m);
        assert!(isolated_vertices(&g).is_empty());
        assert!(isolated_vertices(&to_undirected(&g).unwrap()).is_empty());

        // vertex 2 has every incident rate at 30, the rest at 5
        let m = RateMatrix::from_fn(3, IncomeType::Dividends, |i, j| pct(if i == 2 || j == 2 { 30 } else { 5 })).unwrap();
        let g = build_directed(&m);
        assert_eq!(isolated_vertices(&apply_threshold(&g, pct(10))), vec![2]);
        let u = apply_threshold_undirected(&to_undirected(&g).unwrap(), pct(10));
        assert_eq!(isolated_vertices(&u), vec![2]);
    }

    #[test]
    fn planted_isolates_match_scan() {
        let m = generate_synthetic(12, 4, SyntheticProfile::PlantedCommunities { blocks: 3 }).unwrap();
        let u = to_undirected(&build_directed(&m)).unwrap();
        for t in [0, 1, 2] {
            let t = pct(t);
            let got = isolated_vertices(&apply_threshold_undirected(&u, t));
            let expect: Vec<usize> = (0..12)
                .filter(|&v| {
                    (0..12).filter(|&w| w != v).map(|w| m.rate(v, w).max(m.rate(w, v))).min().unwrap() > t
                })
                .collect();
            assert_eq!(got, expect);
        }
    }
}
