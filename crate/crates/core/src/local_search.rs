//! Local search that regrows a few neighboring subgraphs at a time.
//!
//! Subgraphs are linked in a neighbor graph when they touch directly or
//! through a path of unassigned nodes. A regrow set is either drawn at
//! random ([`SearchMode::GrowR`]) or grown as a connected piece of the
//! neighbor graph ([`SearchMode::GrowN`]). The chosen subgraphs are dissolved
//! and regrown over their own nodes plus all unassigned ones; the result
//! replaces the best solution when it is at least as good.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::solver::{generate_solution, grow_subgraphs, Solution, SolverConfig};
use crate::{Error, NodeId, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchMode {
    #[serde(rename = "R", alias = "grow-r", alias = "GrowR")]
    GrowR,
    #[serde(rename = "N", alias = "grow-n", alias = "GrowN")]
    GrowN,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GrowR => "R",
            Self::GrowN => "N",
        })
    }
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "grow-r" | "GrowR" => Ok(Self::GrowR),
            "N" | "n" | "grow-n" | "GrowN" => Ok(Self::GrowN),
            other => Err(Error::InvalidConfig(format!("unknown search mode {other:?}"))),
        }
    }
}

/// Adjacency between subgraphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NeighborGraph {
    subgraph_count: usize,
    /// Pairs `(i, j)`, `i < j`, joined by a graph edge.
    direct: BTreeSet<(usize, usize)>,
    /// Pairs joined by a path whose inner nodes are all unassigned.
    through_nonloc: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn subgraph_count(&self) -> usize {
        self.subgraph_count
    }

    pub fn direct_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.direct
    }

    pub fn nonloc_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.through_nonloc
    }

    pub fn all_edges(&self) -> BTreeSet<(usize, usize)> {
        self.direct.union(&self.through_nonloc).copied().collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegrowSet {
    pub members: Vec<usize>,
}

impl RegrowSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchStats {
    pub best_objective: usize,
    pub iterations: usize,
    /// Iteration of the last strict improvement (0 = initial solution).
    pub iteration_of_best: usize,
    pub wall_millis: f64,
    pub millis_to_best: f64,
    pub seed: u64,
    pub mode: SearchMode,
}

/// Unassigned nodes, ascending.
pub fn nonlocated<T>(instance: &Instance<T>, solution: &Solution) -> Vec<NodeId> {
    (0..instance.node_count())
        .filter(|&u| solution.subgraph_of(u).is_none())
        .collect()
}

/// Nodes outside subgraph `i` adjacent to one of its nodes, ascending.
pub fn subgraph_frontier<T>(instance: &Instance<T>, solution: &Solution, i: usize) -> Vec<NodeId> {
    let g = instance.graph();
    let mut out = BTreeSet::new();
    for u in (0..g.node_count()).filter(|&u| solution.subgraph_of(u) == Some(i)) {
        out.extend(
            g.neighbors(u)
                .iter()
                .copied()
                .filter(|&v| solution.subgraph_of(v) != Some(i)),
        );
    }
    out.into_iter().collect()
}

pub fn build_neighbor_graph<T>(instance: &Instance<T>, solution: &Solution) -> NeighborGraph {
    let g = instance.graph();
    let n = instance.root_count();
    let pair = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut direct = BTreeSet::new();
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (solution.subgraph_of(u), solution.subgraph_of(v)) {
            if a != b {
                direct.insert(pair(a, b));
            }
        }
    }
    let mut through_nonloc = BTreeSet::new();
    let mut touching = BTreeSet::new();
    for comp in g.components(&nonlocated(instance, solution)) {
        touching.clear();
        for &w in &comp {
            touching.extend(g.neighbors(w).iter().filter_map(|&v| solution.subgraph_of(v)));
        }
        let t: Vec<usize> = touching.iter().copied().collect();
        for (k, &a) in t.iter().enumerate() {
            for &b in &t[k + 1..] {
                through_nonloc.insert((a, b));
            }
        }
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in direct.union(&through_nonloc) {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    NeighborGraph {
        subgraph_count: n,
        direct,
        through_nonloc,
        adjacency,
    }
}

/// `touches[i]` iff subgraph `i` has an unassigned node on its frontier.
fn touches_nonloc<T>(instance: &Instance<T>, solution: &Solution) -> Vec<bool> {
    let mut out = vec![false; instance.root_count()];
    for w in nonlocated(instance, solution) {
        for &v in instance.graph().neighbors(w) {
            if let Some(i) = solution.subgraph_of(v) {
                out[i] = true;
            }
        }
    }
    out
}

/// Picks the subgraphs to regrow, seeded at a random subgraph below capacity.
///
/// `GrowR` adds one subgraph bordering unassigned nodes and fills up with
/// random others. `GrowN` grows a connected set in the neighbor graph until
/// it reaches size `m` and keeps it if some member borders unassigned nodes;
/// after `grow_n_attempts` failures `m` is increased.
pub fn select_regrow_set<T, R: Rng + ?Sized>(
    instance: &Instance<T>,
    solution: &Solution,
    neighbors: &NeighborGraph,
    m: usize,
    mode: SearchMode,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<RegrowSet> {
    let n = instance.root_count();
    let sizes = solution.sizes(n);
    let open: Vec<usize> = (0..n).filter(|&i| sizes[i] < instance.capacity()).collect();
    let touches = touches_nonloc(instance, solution);
    if open.is_empty() || !touches.contains(&true) {
        return Err(Error::NoRegrowableSubset);
    }
    let m = m.clamp(1, n);
    let seed = open[rng.gen_range(0..open.len())];
    match mode {
        SearchMode::GrowR => {
            let mut members = vec![seed];
            if m >= 2 {
                let bordering: Vec<usize> =
                    (0..n).filter(|&j| j != seed && touches[j]).collect();
                let j = if bordering.is_empty() {
                    let others: Vec<usize> = (0..n).filter(|&j| j != seed).collect();
                    others[rng.gen_range(0..others.len())]
                } else {
                    bordering[rng.gen_range(0..bordering.len())]
                };
                members.push(j);
                let mut rest: Vec<usize> = (0..n).filter(|i| !members.contains(i)).collect();
                let (picked, _) = rest.partial_shuffle(rng, m - 2);
                members.extend_from_slice(picked);
            }
            if !members.iter().any(|&i| touches[i]) {
                return Err(Error::NoRegrowableSubset);
            }
            Ok(RegrowSet { members })
        }
        SearchMode::GrowN => {
            let mut target = m;
            loop {
                for _ in 0..config.grow_n_attempts {
                    let members = connected_piece(neighbors, seed, target, rng);
                    let exhausted = members.len() < target;
                    if members.iter().any(|&i| touches[i]) {
                        return Ok(RegrowSet { members });
                    }
                    if exhausted {
                        // the whole neighbor component was taken and none of
                        // it borders unassigned nodes
                        return Err(Error::NoRegrowableSubset);
                    }
                }
                target += 1;
                if target > n {
                    return Err(Error::NoRegrowableSubset);
                }
            }
        }
    }
}

/// Random connected set of up to `target` subgraphs containing `seed`.
fn connected_piece<R: Rng + ?Sized>(
    neighbors: &NeighborGraph,
    seed: usize,
    target: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut members = vec![seed];
    let mut frontier: Vec<usize> = Vec::new();
    let mut seen = BTreeSet::from([seed]);
    let mut push_neighbors = |i: usize, frontier: &mut Vec<usize>| {
        for &j in neighbors.neighbors(i) {
            if seen.insert(j) {
                frontier.push(j);
            }
        }
    };
    push_neighbors(seed, &mut frontier);
    while members.len() < target && !frontier.is_empty() {
        let k = rng.gen_range(0..frontier.len());
        let next = frontier.swap_remove(k);
        members.push(next);
        push_neighbors(next, &mut frontier);
    }
    members
}

/// Dissolves the subgraphs in `set` and regrows them over their own nodes
/// plus every unassigned node. All other subgraphs are copied unchanged.
pub fn regrow_partial<T, R: Rng + ?Sized>(
    instance: &Instance<T>,
    best: &Solution,
    set: &RegrowSet,
    config: &SolverConfig,
    rng: &mut R,
) -> Solution {
    let mut in_set = vec![false; instance.root_count()];
    for &i in &set.members {
        in_set[i] = true;
    }
    let pool: Vec<bool> = best
        .assignment()
        .iter()
        .map(|a| a.is_none_or(|i| in_set[i]))
        .collect();
    let mut assignment: Vec<Option<usize>> = best
        .assignment()
        .iter()
        .map(|a| a.filter(|&i| !in_set[i]))
        .collect();
    for (i, members) in grow_subgraphs(instance, &set.members, Some(&pool), config, rng) {
        for u in members {
            assignment[u] = Some(i);
        }
    }
    Solution::new(assignment)
}

/// One local search iteration, as seen by an observer.
pub struct SearchStep<'a> {
    pub iteration: usize,
    pub regrow_set: &'a RegrowSet,
    pub candidate: &'a Solution,
    pub accepted: bool,
    pub best: &'a Solution,
}

pub fn local_search<T>(
    instance: &Instance<T>,
    config: &SolverConfig,
    mode: SearchMode,
) -> (Solution, SearchStats) {
    local_search_observed(instance, config, mode, |_| {})
}

/// [`local_search`] with a callback after every regrow.
pub fn local_search_observed<T>(
    instance: &Instance<T>,
    config: &SolverConfig,
    mode: SearchMode,
    mut observe: impl FnMut(&SearchStep<'_>),
) -> (Solution, SearchStats) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best = generate_solution(instance, config, &mut rng);
    let mut neighbors = build_neighbor_graph(instance, &best);
    let mut stats = SearchStats {
        best_objective: best.objective(),
        iterations: 0,
        iteration_of_best: 0,
        wall_millis: 0.0,
        millis_to_best: started.elapsed().as_secs_f64() * 1e3,
        seed: config.seed,
        mode,
    };
    let regrow_hi = config.regrow_size.max(2);
    let mut stagnation = 0;
    while stats.iterations < config.max_iterations && stagnation < config.stagnation_limit {
        if best.objective() == instance.node_count() {
            break;
        }
        stats.iterations += 1;
        let m = rng.gen_range(2..=regrow_hi);
        let set = match select_regrow_set(instance, &best, &neighbors, m, mode, config, &mut rng) {
            Ok(set) => set,
            Err(_) if is_saturated(instance, &best) => break,
            Err(_) => {
                stagnation += 1;
                continue;
            }
        };
        let candidate = regrow_partial(instance, &best, &set, config, &mut rng);
        let accepted = candidate.objective() >= best.objective();
        let improved = candidate.objective() > best.objective();
        observe(&SearchStep {
            iteration: stats.iterations,
            regrow_set: &set,
            candidate: &candidate,
            accepted,
            best: &best,
        });
        if accepted {
            best = candidate;
            neighbors = build_neighbor_graph(instance, &best);
        }
        if improved {
            stagnation = 0;
            stats.best_objective = best.objective();
            stats.iteration_of_best = stats.iterations;
            stats.millis_to_best = started.elapsed().as_secs_f64() * 1e3;
        } else {
            stagnation += 1;
        }
    }
    stats.wall_millis = started.elapsed().as_secs_f64() * 1e3;
    (best, stats)
}

/// No subgraph can take another node: all are full or nothing is left.
fn is_saturated<T>(instance: &Instance<T>, solution: &Solution) -> bool {
    let sizes = solution.sizes(instance.root_count());
    sizes.iter().all(|&s| s >= instance.capacity()) || !touches_nonloc(instance, solution).contains(&true)
}
