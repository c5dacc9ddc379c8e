//! Randomized parallel growth of all subgraphs into one solution.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ear::GrowthState;
use crate::instance::Instance;
use crate::{Error, NodeId, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverConfig {
    /// Probability of accepting an admissible ear.
    pub p0: f64,
    /// Upper end of the per-turn expansion length, drawn from `[2, max_exp_length]`.
    pub max_exp_length: usize,
    /// Upper end of the regrow set size, drawn from `[2, regrow_size]`.
    pub regrow_size: usize,
    pub max_iterations: usize,
    /// Consecutive iterations without a strict improvement before stopping.
    pub stagnation_limit: usize,
    pub seed: u64,
    /// Neighbor-based regrow sets tried per size before the size is bumped.
    pub grow_n_attempts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p0: 0.5,
            max_exp_length: 12,
            regrow_size: 9,
            max_iterations: 10_000,
            stagnation_limit: 2_000,
            seed: 0,
            grow_n_attempts: 50,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::InvalidConfig(format!("p0 = {} not in [0, 1]", self.p0)));
        }
        let positive = [
            ("maxExpLength", self.max_exp_length),
            ("regrowSize", self.regrow_size),
            ("maxIterations", self.max_iterations),
            ("stagnationLimit", self.stagnation_limit),
            ("growNAttempts", self.grow_n_attempts),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Node-to-subgraph assignment. Subgraph `i` is the one holding root `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    assignment: Vec<Option<usize>>,
    objective: usize,
}

impl Solution {
    pub fn new(assignment: Vec<Option<usize>>) -> Self {
        let objective = assignment.iter().filter(|a| a.is_some()).count();
        Self {
            assignment,
            objective,
        }
    }

    /// Only the roots assigned, each to its own subgraph.
    pub fn roots_only<T>(instance: &Instance<T>) -> Self {
        let mut assignment = vec![None; instance.node_count()];
        for (i, &r) in instance.roots().iter().enumerate() {
            assignment[r] = Some(i);
        }
        Self::new(assignment)
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn subgraph_of(&self, u: NodeId) -> Option<usize> {
        self.assignment[u]
    }

    /// Total number of assigned nodes.
    pub fn objective(&self) -> usize {
        self.objective
    }

    /// Members of every subgraph, each in ascending node order.
    pub fn subgraphs(&self, count: usize) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); count];
        for (u, a) in self.assignment.iter().enumerate() {
            if let Some(i) = *a {
                if i < count {
                    out[i].push(u);
                }
            }
        }
        out
    }

    pub fn sizes(&self, count: usize) -> Vec<usize> {
        let mut out = vec![0; count];
        for &i in self.assignment.iter().flatten() {
            if i < count {
                out[i] += 1;
            }
        }
        out
    }

    pub fn to_json_string(&self, seed: Option<u64>) -> Result<String> {
        let file = SolutionFile {
            assignment: self
                .assignment
                .iter()
                .map(|a| a.map_or(-1, |i| i as i64))
                .collect(),
            objective: self.objective,
            seed,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>, seed: Option<u64>) -> Result<()> {
        std::fs::write(path, self.to_json_string(seed)?)?;
        Ok(())
    }

    /// Parses the solution file format. The stored objective is ignored in
    /// favor of the recount; a mismatch is an error.
    pub fn from_json_str(s: &str) -> Result<(Self, Option<u64>)> {
        let file: SolutionFile = serde_json::from_str(s)?;
        let assignment = file
            .assignment
            .iter()
            .map(|&a| match a {
                -1 => Ok(None),
                a if a >= 0 => Ok(Some(a as usize)),
                a => Err(Error::LabelOutOfRange { label: a, roots: 0 }),
            })
            .collect::<Result<Vec<_>>>()?;
        let sol = Self::new(assignment);
        if sol.objective != file.objective {
            return Err(Error::InvalidInstance(format!(
                "solution file claims objective {} but assigns {} nodes",
                file.objective, sol.objective
            )));
        }
        Ok((sol, file.seed))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<(Self, Option<u64>)> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionFile {
    assignment: Vec<i64>,
    objective: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    seed: Option<u64>,
}

/// Grows every subgraph of the instance from its root and returns the result.
///
/// Each turn draws an expansion length from `[2, max_exp_length]`, picks one
/// still-expandable subgraph uniformly, and feeds it single ears until it has
/// grown by at least that much or cannot grow further. Every accepted ear is
/// withdrawn from all other subgraphs' states.
pub fn generate_solution<T, R: Rng + ?Sized>(
    instance: &Instance<T>,
    config: &SolverConfig,
    rng: &mut R,
) -> Solution {
    let all: Vec<usize> = (0..instance.root_count()).collect();
    let mut assignment = vec![None; instance.node_count()];
    for (i, members) in grow_subgraphs(instance, &all, None, config, rng) {
        for u in members {
            assignment[u] = Some(i);
        }
    }
    Solution::new(assignment)
}

/// Grows the listed subgraphs (by root index) over the nodes allowed by
/// `pool` (all nodes when `None`). Roots other than a state's own are always
/// off limits to it.
pub(crate) fn grow_subgraphs<T, R: Rng + ?Sized>(
    instance: &Instance<T>,
    subgraphs: &[usize],
    pool: Option<&[bool]>,
    config: &SolverConfig,
    rng: &mut R,
) -> Vec<(usize, Vec<NodeId>)> {
    let graph = instance.graph();
    let is_root = instance.root_mask();
    let mut states: Vec<GrowthState<'_, T>> = subgraphs
        .iter()
        .map(|&i| {
            let root = instance.roots()[i];
            GrowthState::with_availability(graph, root, instance.capacity(), config.p0, |v| {
                !is_root[v] && pool.is_none_or(|p| p[v])
            })
        })
        .collect();

    let max_len_hi = config.max_exp_length.max(2);
    let mut expandable: Vec<usize> = (0..states.len())
        .filter(|&k| states[k].can_expand())
        .collect();
    while !expandable.is_empty() {
        let max_len = rng.gen_range(2..=max_len_hi);
        let pick = rng.gen_range(0..expandable.len());
        let k = expandable[pick];
        let mut grown = 0;
        while let Some(ear) = states[k].next_ear(rng) {
            grown += ear.interior().len();
            for (j, other) in states.iter_mut().enumerate() {
                if j != k {
                    other.make_unavailable(ear.interior());
                }
            }
            if grown >= max_len || !states[k].can_expand() {
                break;
            }
        }
        if !states[k].can_expand() {
            expandable.remove(pick);
        }
    }

    subgraphs
        .iter()
        .zip(states)
        .map(|(&i, s)| (i, s.members().to_vec()))
        .collect()
}
