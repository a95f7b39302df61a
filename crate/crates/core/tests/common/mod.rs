//! Brute-force reference implementations used by the integration tests.
//!
//! Everything here works from explicit simple-path enumeration, never from a
//! shortest-path tree, so it shares no logic with the crate under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use conduit_core::{IncomeType, Rate, TaxGraph};
use num_rational::Ratio;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub type Q = Ratio<i64>;

/// Arc weight in rate units plus the one-unit sanction.
pub fn arc_weight(g: &TaxGraph, i: usize, j: usize) -> Option<u64> {
    g.rate(i, j).map(|r| r.units() + 1)
}

/// All simple paths from `s` to `t` with their total weight.
pub fn simple_paths(g: &TaxGraph, s: usize, t: usize) -> Vec<(Vec<usize>, u64)> {
    fn walk(g: &TaxGraph, t: usize, path: &mut Vec<usize>, w: u64, on: &mut [bool], out: &mut Vec<(Vec<usize>, u64)>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push((path.clone(), w));
            return;
        }
        for u in 0..g.n() {
            if on[u] {
                continue;
            }
            if let Some(a) = arc_weight(g, v, u) {
                on[u] = true;
                path.push(u);
                walk(g, t, path, w + a, on, out);
                path.pop();
                on[u] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; g.n()];
    on[s] = true;
    walk(g, t, &mut vec![s], 0, &mut on, &mut out);
    out
}

/// Minimum-weight simple paths from `s` to `t`.
pub fn min_paths(g: &TaxGraph, s: usize, t: usize) -> Vec<Vec<usize>> {
    let all = simple_paths(g, s, t);
    let Some(best) = all.iter().map(|(_, w)| *w).min() else {
        return Vec::new();
    };
    let mut v: Vec<Vec<usize>> = all.into_iter().filter(|(_, w)| *w == best).map(|(p, _)| p).collect();
    v.sort();
    v
}

/// (weight, fewest hops among minimum-weight paths), if reachable.
pub fn min_cost_oracle(g: &TaxGraph, s: usize, t: usize) -> Option<(u64, u32)> {
    let all = simple_paths(g, s, t);
    let best = all.iter().map(|(_, w)| *w).min()?;
    let hops = all.iter().filter(|(_, w)| *w == best).map(|(p, _)| p.len() as u32 - 1).min()?;
    Some((best, hops))
}

fn prefix_weight(g: &TaxGraph, path: &[usize], upto: usize) -> u64 {
    path[..=upto].windows(2).map(|w| arc_weight(g, w[0], w[1]).unwrap()).sum()
}

/// Unit packet from `s` to `t` split equally at every fork of the union of
/// minimum-weight paths. Endpoints carry 1; unreachable gives zeros.
pub fn pair_flow_oracle(g: &TaxGraph, s: usize, t: usize) -> Vec<Q> {
    let n = g.n();
    let mut flow = vec![Q::from_integer(0); n];
    let paths = min_paths(g, s, t);
    if paths.is_empty() {
        return flow;
    }
    let mut next: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut dist: BTreeMap<usize, u64> = BTreeMap::new();
    for p in &paths {
        for k in 0..p.len() {
            dist.insert(p[k], prefix_weight(g, p, k));
            if k + 1 < p.len() {
                next.entry(p[k]).or_default().insert(p[k + 1]);
            }
        }
    }
    let mut order: Vec<usize> = dist.keys().copied().collect();
    order.sort_by_key(|v| dist[v]);
    flow[s] = Q::from_integer(1);
    for v in order {
        if let Some(succ) = next.get(&v) {
            let share = flow[v] / Q::from_integer(succ.len() as i64);
            for &w in succ {
                flow[w] += share;
            }
        }
    }
    flow
}

/// Fraction of minimum-weight `s`-`t` paths through each vertex.
pub fn pair_dependency_oracle(g: &TaxGraph, s: usize, t: usize) -> Vec<Q> {
    let mut dep = vec![Q::from_integer(0); g.n()];
    let paths = min_paths(g, s, t);
    if paths.is_empty() {
        return dep;
    }
    let total = paths.len() as i64;
    for p in &paths {
        for &v in p {
            dep[v] += Q::new(1, total);
        }
    }
    dep
}

fn whole_graph(g: &TaxGraph, pair: impl Fn(&TaxGraph, usize, usize) -> Vec<Q>) -> Vec<Q> {
    let n = g.n();
    let mut raw = vec![Q::from_integer(0); n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let f = pair(g, s, t);
            for v in (0..n).filter(|&v| v != s && v != t) {
                raw[v] += f[v];
            }
        }
    }
    raw
}

pub fn load_oracle(g: &TaxGraph) -> Vec<Q> {
    whole_graph(g, pair_flow_oracle)
}

pub fn betweenness_oracle(g: &TaxGraph) -> Vec<Q> {
    whole_graph(g, pair_dependency_oracle)
}

/// Rate palette with exact ties across route lengths: an arc one unit dearer
/// costs the same as an extra hop.
const TIE_UNITS: [u64; 6] = [0, 1, 1_000_000, 1_000_001, 2_000_000, 2_000_001];

/// Sparse random digraph whose rates come from a small palette, so ties are common.
pub fn random_tie_graph(seed: u64, n: usize) -> TaxGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density: f64 = rng.gen_range(0.3..0.9);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                arcs.push((i, j, Rate::from_units(*TIE_UNITS.choose(&mut rng).unwrap())));
            }
        }
    }
    TaxGraph::from_arcs(n, IncomeType::Dividends, arcs).unwrap()
}

/// Random digraph with widely spread rates; ties are unlikely but possible.
pub fn random_spread_graph(seed: u64, n: usize) -> TaxGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density: f64 = rng.gen_range(0.3..1.0);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                arcs.push((i, j, Rate::from_units(rng.gen_range(0..40_000_000))));
            }
        }
    }
    TaxGraph::from_arcs(n, IncomeType::Dividends, arcs).unwrap()
}

/// True when every reachable ordered pair has exactly one minimum-weight path.
pub fn has_unique_paths(g: &TaxGraph) -> bool {
    (0..g.n()).all(|s| (0..g.n()).filter(|&t| t != s).all(|t| min_paths(g, s, t).len() <= 1))
}

pub fn to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Modularity straight from the double sum over ordered vertex pairs.
pub fn direct_modularity(n: usize, edges: &[(usize, usize, f64)], assignment: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        if i != j {
            a[i][j] += w;
            a[j][i] += w;
        }
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Random simple undirected graph with unit or small integer affinities.
pub fn random_edges(seed: u64, n: usize, weighted: bool) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: f64 = rng.gen_range(0.2..0.8);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j, if weighted { f64::from(rng.gen_range(1..=5u8)) } else { 1.0 }));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    edges
}

/// Every set partition of `0..n` as a restricted-growth label vector.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(labels: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            out.push(labels.clone());
            return;
        }
        for c in 0..=max + 1 {
            labels.push(c);
            grow(labels, n, max.max(c), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        grow(&mut vec![0], n, 0, &mut out);
    }
    out
}

/// Two 4-cliques joined by a single bridge.
pub fn two_k4() -> Vec<(usize, usize, f64)> {
    let mut e = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                e.push((base + i, base + j, 1.0));
            }
        }
    }
    e.push((3, 4, 1.0));
    e
}
