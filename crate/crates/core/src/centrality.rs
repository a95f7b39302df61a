//! Load and betweenness centrality on minimum-weight paths.
//!
//! Load centrality sends one unit from every source to every target. At each
//! vertex the packet splits equally among the next hops that stay on a
//! minimum-weight path to the target. Betweenness instead weights each
//! minimum-weight path equally. The two agree when no pair has more than one
//! minimum-weight path.
//!
//! For the whole-graph scores, load is computed per target. The next hops of a
//! vertex toward `t` do not depend on where the packet started, so one unit is
//! injected at every vertex at once and pushed toward `t` in order of
//! decreasing distance. The flow leaving `k`, minus its own unit, is what all
//! other sources route through `k`.

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{apply_threshold, build_directed, TaxGraph};
use crate::ingest::RateMatrix;
use crate::paths::{dijkstra_on, path_counts, ShortestPathDag};
use crate::rate::{IncomeType, Rate};
use crate::registry::JurisdictionRegistry;
use crate::scalar::{sum_in_order, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityKind {
    Load,
    Betweenness,
}

impl CentralityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CentralityKind::Load => "load",
            CentralityKind::Betweenness => "betweenness",
        }
    }
}

impl std::str::FromStr for CentralityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "load" => Ok(CentralityKind::Load),
            "betweenness" => Ok(CentralityKind::Betweenness),
            other => Err(format!("unknown centrality kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphMeta {
    pub income: IncomeType,
    pub threshold: Option<Rate>,
    pub n: usize,
}

impl GraphMeta {
    pub fn of(graph: &TaxGraph) -> Self {
        GraphMeta { income: graph.income(), threshold: graph.threshold(), n: graph.n() }
    }
}

/// Per-vertex centrality, raw and normalized by `(n - 1)(n - 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores<S> {
    pub kind: CentralityKind,
    pub raw: Vec<S>,
    pub normalized: Vec<S>,
    pub meta: GraphMeta,
}

impl<S: Scalar> CentralityScores<S> {
    fn from_raw(kind: CentralityKind, raw: Vec<S>, meta: GraphMeta) -> Self {
        let n = raw.len();
        let normalized = if n < 3 {
            vec![S::zero(); n]
        } else {
            let pairs = S::from_count((n - 1) * (n - 2));
            raw.iter().map(|r| r.clone() / pairs.clone()).collect()
        };
        CentralityScores { kind, raw, normalized, meta }
    }
}

/// Vertices of the DAG from which `target` is reachable along DAG arcs.
fn reaches_target(dag: &ShortestPathDag, target: usize) -> Vec<bool> {
    let mut reaches = vec![false; dag.n()];
    if !dag.is_reachable(target) {
        return reaches;
    }
    reaches[target] = true;
    for &v in dag.settled_order().iter().rev() {
        if !reaches[v] && dag.succs(v).iter().any(|&w| reaches[w]) {
            reaches[v] = true;
        }
    }
    reaches
}

/// Flow through every vertex when one unit travels from the DAG source to
/// `target`, splitting equally at each fork. Source and target carry 1;
/// unreachable targets give all zeros.
pub fn pair_load<S: Scalar>(dag: &ShortestPathDag, target: usize) -> Vec<S> {
    let mut flow = vec![S::zero(); dag.n()];
    if target == dag.source() || !dag.is_reachable(target) {
        if target == dag.source() {
            flow[target] = S::one();
        }
        return flow;
    }
    let reaches = reaches_target(dag, target);
    flow[dag.source()] = S::one();
    for &v in dag.settled_order() {
        if v == target || !reaches[v] {
            continue;
        }
        let next: Vec<usize> = dag.succs(v).iter().copied().filter(|&w| reaches[w]).collect();
        let share = flow[v].clone() / S::from_count(next.len());
        for w in next {
            flow[w] = flow[w].clone() + share.clone();
        }
    }
    flow
}

/// Fraction of minimum-weight source→`target` paths through each vertex.
pub fn pair_dependency<S: Scalar>(dag: &ShortestPathDag, target: usize) -> Vec<S> {
    let n = dag.n();
    let mut out = vec![S::zero(); n];
    if !dag.is_reachable(target) {
        return out;
    }
    let from_source = path_counts(dag);
    let reaches = reaches_target(dag, target);
    // paths from v to target inside the DAG
    let mut to_target = vec![0u128; n];
    to_target[target] = 1;
    for &v in dag.settled_order().iter().rev() {
        if v != target && reaches[v] {
            to_target[v] = dag.succs(v).iter().map(|&w| to_target[w]).fold(0, u128::saturating_add);
        }
    }
    let total = count_scalar::<S>(from_source[target]);
    for v in 0..n {
        if reaches[v] && dag.is_reachable(v) {
            let through = from_source[v].saturating_mul(to_target[v]);
            out[v] = count_scalar::<S>(through) / total.clone();
        }
    }
    out
}

fn count_scalar<S: Scalar>(c: u128) -> S {
    S::from_u128(c).expect("path count representable in scalar type")
}

/// Load contributions of all sources toward one target, endpoints excluded.
fn load_toward<S: Scalar>(graph: &TaxGraph, target: usize) -> Vec<S> {
    let n = graph.n();
    let rev = dijkstra_on(n, |v| graph.in_arcs(v), target);
    let mut flow = vec![S::zero(); n];
    let mut contrib = vec![S::zero(); n];
    // farthest from the target first
    for &v in rev.settled_order().iter().rev() {
        if v == target {
            continue;
        }
        let through = flow[v].clone() + S::one();
        contrib[v] = flow[v].clone();
        // reverse-search predecessors of v are its next hops toward the target
        let next = rev.preds(v);
        let share = through / S::from_count(next.len());
        for &w in next {
            flow[w] = flow[w].clone() + share.clone();
        }
    }
    contrib
}

/// Brandes dependency accumulation for one source, endpoints excluded.
fn dependency_from<S: Scalar>(graph: &TaxGraph, source: usize) -> Vec<S> {
    let n = graph.n();
    let dag = dijkstra_on(n, |v| graph.out_arcs(v), source);
    let sigma: Vec<S> = path_counts(&dag).into_iter().map(count_scalar).collect();
    let mut delta = vec![S::zero(); n];
    for &w in dag.settled_order().iter().rev() {
        let coeff = (S::one() + delta[w].clone()) / sigma[w].clone();
        for &v in dag.preds(w) {
            delta[v] = delta[v].clone() + sigma[v].clone() * coeff.clone();
        }
    }
    delta[source] = S::zero();
    delta
}

/// Sums per-root vectors in root-id order so the result does not depend on scheduling.
fn reduce_in_order<S: Scalar>(parts: Vec<Vec<S>>, n: usize) -> Vec<S> {
    (0..n).map(|k| sum_in_order(parts.iter().map(|p| p[k].clone()))).collect()
}

/// Load centrality of every vertex over all ordered reachable pairs.
pub fn load_centrality<S: Scalar>(graph: &TaxGraph) -> CentralityScores<S> {
    let n = graph.n();
    let parts: Vec<Vec<S>> = (0..n).into_par_iter().map(|t| load_toward(graph, t)).collect();
    CentralityScores::from_raw(CentralityKind::Load, reduce_in_order(parts, n), GraphMeta::of(graph))
}

/// Betweenness centrality over the exact tie DAGs (ordered pairs).
pub fn betweenness_centrality<S: Scalar>(graph: &TaxGraph) -> CentralityScores<S> {
    let n = graph.n();
    let parts: Vec<Vec<S>> = (0..n).into_par_iter().map(|s| dependency_from(graph, s)).collect();
    CentralityScores::from_raw(CentralityKind::Betweenness, reduce_in_order(parts, n), GraphMeta::of(graph))
}

pub fn centrality<S: Scalar>(graph: &TaxGraph, kind: CentralityKind) -> CentralityScores<S> {
    match kind {
        CentralityKind::Load => load_centrality(graph),
        CentralityKind::Betweenness => betweenness_centrality(graph),
    }
}

/// Sorts thresholds highest first and removes duplicates.
pub fn normalize_thresholds(thresholds: &[Rate]) -> Vec<Rate> {
    let mut ts = thresholds.to_vec();
    ts.sort_unstable_by(|a, b| b.cmp(a));
    ts.dedup();
    ts
}

/// One score vector per threshold, highest threshold first.
pub fn sweep_centrality<S: Scalar>(
    matrix: &RateMatrix,
    thresholds: &[Rate],
    kind: CentralityKind,
) -> Vec<(Rate, CentralityScores<S>)> {
    let base = build_directed(matrix);
    normalize_thresholds(thresholds)
        .into_iter()
        .map(|t| (t, centrality(&apply_threshold(&base, t), kind)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow<S> {
    pub rank: usize,
    pub id: usize,
    pub code: String,
    pub raw: S,
    pub normalized: S,
}

/// Scores sorted by normalized value, highest first, ties by code.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable<S> {
    pub kind: CentralityKind,
    pub meta: GraphMeta,
    pub rows: Vec<RankRow<S>>,
}

pub fn rank<S: Scalar>(
    scores: &CentralityScores<S>,
    registry: &JurisdictionRegistry,
    top_k: Option<usize>,
) -> RankingTable<S> {
    let mut ids: Vec<usize> = (0..scores.raw.len()).collect();
    ids.sort_by(|&a, &b| {
        scores.normalized[b]
            .partial_cmp(&scores.normalized[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| registry.code(a).cmp(registry.code(b)))
    });
    let take = top_k.unwrap_or(ids.len());
    let rows = ids
        .into_iter()
        .take(take)
        .enumerate()
        .map(|(pos, id)| RankRow {
            rank: pos + 1,
            id,
            code: registry.code(id).to_string(),
            raw: scores.raw[id].clone(),
            normalized: scores.normalized[id].clone(),
        })
        .collect();
    RankingTable { kind: scores.kind, meta: scores.meta, rows }
}
