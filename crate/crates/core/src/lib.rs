//! Withholding-tax network analysis.
//!
//! Jurisdictions are vertices; a rate matrix per income type gives a complete
//! weighted digraph whose arcs cost the withholding rate plus a one-unit
//! sanction (10^-6 percent). On top of that graph the crate computes exact
//! minimum-weight routes, load and betweenness centrality, and Louvain
//! communities on the max-rate undirected projection, each across a ladder of
//! rate thresholds.
//!
//! Path weights are integers, so ties between routes are exact. Flow and
//! modularity arithmetic is generic over [`Scalar`]; the aliases below fix it
//! to `f64`, and tests also run it over exact rationals.

pub mod centrality;
pub mod community;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod paths;
pub mod rate;
pub mod registry;
pub mod scalar;
pub mod synth;

pub use centrality::{
    betweenness_centrality, centrality, load_centrality, pair_dependency, pair_load, rank, sweep_centrality,
    CentralityKind, GraphMeta,
};
pub use community::{
    community_report, louvain, modularity, sweep_modularity, to_affinity, AffinityMode, CommunityError, LouvainConfig,
};
pub use graph::{
    apply_threshold, apply_threshold_undirected, build_directed, default_thresholds, isolated_vertices, to_undirected,
    GraphError, TaxGraph, UndirectedTaxGraph, Weight,
};
pub use ingest::{parse_rate_matrix, validate, IngestError, RateMatrix, ValidationReport};
pub use paths::{best_routes, dijkstra_dag, min_cost, PathError, Route, ShortestPathDag};
pub use rate::{IncomeType, Rate};
pub use registry::{load_registry, JurisdictionRegistry};
pub use scalar::Scalar;
pub use synth::{generate_synthetic, SyntheticProfile};

pub type CentralityScores = centrality::CentralityScores<f64>;
pub type CentralityScoresF32 = centrality::CentralityScores<f32>;
pub type RankingTable = centrality::RankingTable<f64>;
pub type AffinityGraph = community::AffinityGraph<f64>;
pub type Partition = community::Partition<f64>;
pub type ModularityCurve = community::ModularityCurve<f64>;
pub type CommunityReport = community::CommunityReport<f64>;
