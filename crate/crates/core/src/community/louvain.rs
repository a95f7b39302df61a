use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{modularity, modularity_from_sums, relabel_dense, AffinityGraph, CommunityError, Partition};
use crate::scalar::{sum_in_order, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LouvainConfig {
    pub seed: u64,
    /// Upper bound on move/aggregate passes.
    pub max_passes: usize,
    /// A pass that raises modularity by less than this ends the run.
    pub min_gain: f64,
    /// Upper bound on vertex sweeps inside one pass.
    pub max_sweeps: usize,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig { seed: 0, max_passes: 64, min_gain: 1e-9, max_sweeps: 1024 }
    }
}

impl LouvainConfig {
    pub fn with_seed(seed: u64) -> Self {
        LouvainConfig { seed, ..Self::default() }
    }
}

/// Community bookkeeping for one level of the Louvain method.
///
/// `inner[c]` is the ordered-pair affinity sum inside `c` (self-affinity
/// included), `tot[c]` the summed strength of its members.
#[derive(Debug, Clone)]
pub struct LouvainState<S> {
    community: Vec<usize>,
    inner: Vec<S>,
    tot: Vec<S>,
}

impl<S: Scalar> LouvainState<S> {
    /// Every vertex in its own community.
    pub fn singletons(aff: &AffinityGraph<S>) -> Self {
        let n = aff.n();
        LouvainState {
            community: (0..n).collect(),
            inner: (0..n).map(|v| aff.affinity(v, v)).collect(),
            tot: (0..n).map(|v| aff.strength(v)).collect(),
        }
    }

    /// State for an arbitrary labelling (labels are relabelled densely).
    pub fn from_assignment(aff: &AffinityGraph<S>, labels: &[usize]) -> Result<Self, CommunityError> {
        let n = aff.n();
        if labels.len() != n {
            return Err(CommunityError::AssignmentLength { expected: n, found: labels.len() });
        }
        let community = relabel_dense(labels);
        // room for every vertex to sit alone
        let mut inner = vec![S::zero(); n];
        let mut tot = vec![S::zero(); n];
        for v in 0..n {
            let c = community[v];
            let internal = sum_in_order(
                aff.neighbors(v).iter().filter(|&&(u, _)| community[u] == c).map(|(_, a)| a.clone()),
            );
            inner[c] = inner[c].clone() + internal;
            tot[c] = tot[c].clone() + aff.strength(v);
        }
        Ok(LouvainState { community, inner, tot })
    }

    pub fn community_of(&self, v: usize) -> usize {
        self.community[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.community
    }

    /// Summed affinity from `v` into each community, excluding `v`'s self-affinity.
    fn links(&self, aff: &AffinityGraph<S>, v: usize) -> BTreeMap<usize, S> {
        let mut out = BTreeMap::new();
        for (u, a) in aff.neighbors(v) {
            if *u != v {
                let slot = out.entry(self.community[*u]).or_insert_with(S::zero);
                *slot = slot.clone() + a.clone();
            }
        }
        out
    }

    /// Modularity change from moving `v` out of its community into `to`.
    ///
    /// With `A` the current community minus `v`:
    /// `dQ = 2 (k_v,to - k_v,A) / 2M - 2 k_v (tot_to - tot_A) / (2M)^2`
    /// where `tot_A` already excludes `k_v`.
    pub fn delta_q(&self, aff: &AffinityGraph<S>, v: usize, to: usize) -> S {
        let from = self.community[v];
        if from == to {
            return S::zero();
        }
        let links = self.links(aff, v);
        let k_to = links.get(&to).cloned().unwrap_or_else(S::zero);
        let k_from = links.get(&from).cloned().unwrap_or_else(S::zero);
        let k_v = aff.strength(v);
        let tot_from = self.tot[from].clone() - k_v.clone();
        self.gain(aff, &k_v, k_to, self.tot[to].clone()) - self.gain(aff, &k_v, k_from, tot_from)
    }

    /// Modularity contribution of joining a community, `v` already removed from it.
    fn gain(&self, aff: &AffinityGraph<S>, k_v: &S, k_in: S, tot: S) -> S {
        let two = S::from_count(2);
        let two_m = aff.two_m();
        two.clone() * k_in / two_m.clone() - two * k_v.clone() * tot / (two_m.clone() * two_m)
    }

    /// Moves `v` into community `to`, updating the cached sums.
    pub fn move_vertex(&mut self, aff: &AffinityGraph<S>, v: usize, to: usize) {
        let from = self.community[v];
        if from == to {
            return;
        }
        let links = self.links(aff, v);
        let two = S::from_count(2);
        let self_aff = aff.affinity(v, v);
        let k_v = aff.strength(v);
        let k_from = links.get(&from).cloned().unwrap_or_else(S::zero);
        let k_to = links.get(&to).cloned().unwrap_or_else(S::zero);
        self.inner[from] = self.inner[from].clone() - two.clone() * k_from - self_aff.clone();
        self.tot[from] = self.tot[from].clone() - k_v.clone();
        self.inner[to] = self.inner[to].clone() + two * k_to + self_aff;
        self.tot[to] = self.tot[to].clone() + k_v;
        self.community[v] = to;
    }

    /// Modularity of the current assignment from the cached sums.
    pub fn modularity(&self, aff: &AffinityGraph<S>) -> S {
        modularity_from_sums(&self.inner, &self.tot, &aff.two_m())
    }

    /// Sweeps vertices in shuffled order, moving each to the neighbouring
    /// community with the largest positive gain, until a sweep moves nothing.
    /// Returns whether any vertex moved.
    fn local_moves(&mut self, aff: &AffinityGraph<S>, rng: &mut ChaCha8Rng, max_sweeps: usize) -> bool {
        let mut order: Vec<usize> = (0..aff.n()).collect();
        let mut moved_any = false;
        for _ in 0..max_sweeps {
            order.shuffle(rng);
            let mut moved = false;
            for &v in &order {
                let from = self.community[v];
                let links = self.links(aff, v);
                if links.is_empty() {
                    continue;
                }
                let k_v = aff.strength(v);
                let k_from = links.get(&from).cloned().unwrap_or_else(S::zero);
                let mut best = from;
                let mut best_gain = self.gain(aff, &k_v, k_from, self.tot[from].clone() - k_v.clone());
                // ascending community id: equal gains keep the smaller id
                for (c, k_in) in links {
                    if c == from {
                        continue;
                    }
                    let g = self.gain(aff, &k_v, k_in, self.tot[c].clone());
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                if best != from {
                    self.move_vertex(aff, v, best);
                    moved = true;
                }
            }
            if !moved {
                return moved_any;
            }
            moved_any = true;
        }
        moved_any
    }
}

/// Collapses each community into one vertex. Intra-community affinity
/// (ordered pairs, self-affinity included) lands on the new diagonal.
fn aggregate<S: Scalar>(aff: &AffinityGraph<S>, community: &[usize], count: usize) -> AffinityGraph<S> {
    let mut rows: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); count];
    for v in 0..aff.n() {
        let cv = community[v];
        for (u, a) in aff.neighbors(v) {
            let slot = rows[cv].entry(community[*u]).or_insert_with(S::zero);
            *slot = slot.clone() + a.clone();
        }
    }
    AffinityGraph::from_rows(aff.mode(), rows)
}

/// Louvain modularity maximisation starting from singletons.
pub fn louvain<S: Scalar>(aff: &AffinityGraph<S>, config: &LouvainConfig) -> Result<Partition<S>, CommunityError> {
    if aff.two_m().is_zero() {
        return Err(CommunityError::ZeroTotalWeight);
    }
    let min_gain = S::from_f64(config.min_gain).unwrap_or_else(S::zero);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut flat: Vec<usize> = (0..aff.n()).collect();
    let mut level = aff.clone();
    let mut q_prev = LouvainState::singletons(aff).modularity(aff);
    let mut passes = 0;
    let mut converged = false;

    while passes < config.max_passes {
        let mut state = LouvainState::singletons(&level);
        let moved = state.local_moves(&level, &mut rng, config.max_sweeps);
        passes += 1;
        if !moved {
            converged = true;
            break;
        }
        let labels = relabel_dense(state.assignment());
        let count = labels.iter().max().map_or(0, |m| m + 1);
        for c in flat.iter_mut() {
            *c = labels[*c];
        }
        let q = state.modularity(&level);
        level = aggregate(&level, &labels, count);
        let gain = q.clone() - q_prev;
        q_prev = q;
        if gain < min_gain {
            converged = true;
            break;
        }
    }

    let assignment = relabel_dense(&flat);
    let community_count = assignment.iter().max().map_or(0, |m| m + 1);
    let modularity = modularity(aff, &assignment)?;
    Ok(Partition { assignment, community_count, modularity, converged, passes })
}
