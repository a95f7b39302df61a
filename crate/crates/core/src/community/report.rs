use rayon::prelude::*;

use super::{louvain, to_affinity, AffinityMode, LouvainConfig, Partition};
use crate::centrality::{normalize_thresholds, CentralityScores};
use crate::graph::{apply_threshold_undirected, build_directed, isolated_vertices, to_undirected};
use crate::ingest::RateMatrix;
use crate::rate::Rate;
use crate::registry::JurisdictionRegistry;
use crate::scalar::Scalar;

/// Result of community detection at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<S> {
    pub threshold: Rate,
    /// `None` when no edge (or no affinity) survives the threshold.
    pub modularity: Option<S>,
    /// Communities with at least one linked member; isolates are not counted.
    pub community_count: usize,
    pub isolate_count: usize,
    pub isolates: Vec<usize>,
    pub partition: Option<Partition<S>>,
}

/// Modularity per threshold, highest threshold first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularityCurve<S> {
    pub points: Vec<CurvePoint<S>>,
}

impl<S: Scalar> ModularityCurve<S> {
    /// Index of the highest modularity; ties go to the higher threshold.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, &S)> = None;
        for (k, p) in self.points.iter().enumerate() {
            if let Some(q) = &p.modularity {
                if best.is_none_or(|(_, b)| q > b) {
                    best = Some((k, q));
                }
            }
        }
        best.map(|(k, _)| k)
    }

    pub fn argmax_threshold(&self) -> Option<Rate> {
        self.argmax().map(|k| self.points[k].threshold)
    }
}

/// Louvain on the max-rate undirected graph filtered at each threshold.
/// Isolated vertices stay in the graph as singleton communities.
pub fn sweep_modularity<S: Scalar>(
    matrix: &RateMatrix,
    thresholds: &[Rate],
    mode: AffinityMode,
    config: &LouvainConfig,
) -> ModularityCurve<S> {
    let base = to_undirected(&build_directed(matrix)).expect("fresh digraph is unfiltered");
    let points = normalize_thresholds(thresholds)
        .into_par_iter()
        .map(|t| {
            let g = apply_threshold_undirected(&base, t);
            let isolates = isolated_vertices(&g);
            let partition = to_affinity::<S>(&g, mode).ok().and_then(|aff| louvain(&aff, config).ok());
            let community_count = partition.as_ref().map_or(0, |p| {
                let mut linked = vec![false; p.community_count];
                for (v, &c) in p.assignment.iter().enumerate() {
                    if isolates.binary_search(&v).is_err() {
                        linked[c] = true;
                    }
                }
                linked.into_iter().filter(|&b| b).count()
            });
            CurvePoint {
                threshold: t,
                modularity: partition.as_ref().map(|p| p.modularity.clone()),
                community_count,
                isolate_count: isolates.len(),
                isolates,
                partition,
            }
        })
        .collect();
    ModularityCurve { points }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMember<S> {
    pub id: usize,
    pub code: String,
    pub score: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityGroup<S> {
    /// 1-based label in report order.
    pub label: usize,
    pub members: Vec<ReportMember<S>>,
}

/// Communities with members by descending centrality, plus the unlinked vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityReport<S> {
    pub communities: Vec<CommunityGroup<S>>,
    pub no_link: Vec<ReportMember<S>>,
}

fn by_score_then_code<S: Scalar>(a: &ReportMember<S>, b: &ReportMember<S>) -> std::cmp::Ordering {
    b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.code.cmp(&b.code))
}

/// Groups vertices by community, ordered the way the ranking tables are:
/// members by descending normalized centrality (ties by code), communities by
/// their leading member, then by size. `isolates` go to the "no link" group.
pub fn community_report<S: Scalar>(
    partition: &Partition<S>,
    scores: &CentralityScores<S>,
    registry: &JurisdictionRegistry,
    isolates: &[usize],
) -> CommunityReport<S> {
    let member = |v: usize| ReportMember { id: v, code: registry.code(v).to_string(), score: scores.normalized[v].clone() };
    let mut groups: Vec<Vec<ReportMember<S>>> = vec![Vec::new(); partition.community_count];
    let mut no_link = Vec::new();
    for (v, &c) in partition.assignment.iter().enumerate() {
        if isolates.contains(&v) {
            no_link.push(member(v));
        } else {
            groups[c].push(member(v));
        }
    }
    no_link.sort_by(by_score_then_code);
    let mut groups: Vec<_> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    for g in &mut groups {
        g.sort_by(by_score_then_code);
    }
    groups.sort_by(|a, b| by_score_then_code(&a[0], &b[0]).then_with(|| b.len().cmp(&a.len())));
    CommunityReport {
        communities: groups.into_iter().enumerate().map(|(k, members)| CommunityGroup { label: k + 1, members }).collect(),
        no_link,
    }
}
