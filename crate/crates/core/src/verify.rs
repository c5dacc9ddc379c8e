//! Feasibility checking and exhaustive optima for tiny instances.

use std::fmt;

use crate::instance::Instance;
use crate::solver::Solution;
use crate::{Error, NodeId, Result};

/// Largest instance [`brute_force_optimum`] agrees to enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    RootCount,
    Capacity,
    Overlap,
    Biconnectivity,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RootCount => "root-count",
            Self::Capacity => "capacity",
            Self::Overlap => "overlap",
            Self::Biconnectivity => "biconnectivity",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subgraph: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Checks every subgraph for: exactly one root (its own), at most `capacity`
/// nodes, and a bi-connected induced subgraph.
pub fn verify_solution<T>(instance: &Instance<T>, solution: &Solution) -> Result<VerifyReport> {
    let n = instance.root_count();
    let assignment = solution.assignment();
    if assignment.len() != instance.node_count() {
        return Err(Error::AssignmentLength {
            got: assignment.len(),
            expected: instance.node_count(),
        });
    }
    if let Some(&label) = assignment.iter().flatten().find(|&&i| i >= n) {
        return Err(Error::LabelOutOfRange {
            label: label as i64,
            roots: n,
        });
    }

    let mut report = VerifyReport::default();
    let mut push = |kind, subgraph, detail: String| {
        report.violations.push(Violation {
            kind,
            subgraph,
            detail,
        })
    };
    let groups = solution.subgraphs(n);
    let placed: usize = groups.iter().map(Vec::len).sum();
    if placed != solution.objective() {
        push(
            ViolationKind::Overlap,
            0,
            format!("{placed} placements for {} assigned nodes", solution.objective()),
        );
    }
    let roots = instance.roots();
    let root_mask = instance.root_mask();
    for (i, members) in groups.iter().enumerate() {
        let held: Vec<NodeId> = members.iter().copied().filter(|&u| root_mask[u]).collect();
        if held != [roots[i]] {
            push(
                ViolationKind::RootCount,
                i,
                format!("holds roots {held:?}, expected exactly [{}]", roots[i]),
            );
        }
        if members.len() > instance.capacity() {
            push(
                ViolationKind::Capacity,
                i,
                format!("{} nodes exceed capacity {}", members.len(), instance.capacity()),
            );
        }
        if !members.is_empty() && !instance.graph().is_biconnected(members) {
            push(
                ViolationKind::Biconnectivity,
                i,
                format!("{} nodes do not induce a bi-connected subgraph", members.len()),
            );
        }
    }
    Ok(report)
}

/// Exact optimum by exhaustive search, for instances of at most
/// [`BRUTE_FORCE_LIMIT`] nodes.
pub fn brute_force_optimum<T>(instance: &Instance<T>) -> Result<usize> {
    Ok(brute_force_best(instance, BRUTE_FORCE_LIMIT)?.objective())
}

/// An optimal solution, found by enumerating for each root every connected
/// node set that contains it and fits the capacity, keeping the bi-connected
/// ones, and combining disjoint choices across roots.
///
/// Restricting to connected sets and cutting branches that cannot beat the
/// incumbent does not change the maximum. `max_nodes` caps the instance size;
/// sparse instances well above [`BRUTE_FORCE_LIMIT`] are still tractable.
pub fn brute_force_best<T>(instance: &Instance<T>, max_nodes: usize) -> Result<Solution> {
    if instance.node_count() > max_nodes {
        return Err(Error::TooLarge {
            nodes: instance.node_count(),
            limit: max_nodes,
        });
    }
    let mut search = Exhaustive {
        instance,
        used: instance.root_mask(),
        current: vec![None; instance.node_count()],
        best: Solution::roots_only(instance),
    };
    for (i, &r) in instance.roots().iter().enumerate() {
        search.current[r] = Some(i);
    }
    let free = instance.node_count() - instance.root_count();
    search.descend(0, instance.root_count(), free);
    Ok(search.best)
}

struct Exhaustive<'a, T> {
    instance: &'a Instance<T>,
    used: Vec<bool>,
    current: Vec<Option<usize>>,
    best: Solution,
}

impl<T> Exhaustive<'_, T> {
    fn descend(&mut self, i: usize, placed: usize, free: usize) {
        let inst = self.instance;
        if i == inst.root_count() {
            if placed > self.best.objective() {
                self.best = Solution::new(self.current.clone());
            }
            return;
        }
        let remaining = inst.root_count() - i;
        let bound = placed + free.min(remaining * (inst.capacity() - 1));
        if bound <= self.best.objective() {
            return;
        }
        let root = inst.roots()[i];
        let mut sets = Vec::new();
        let mut set = vec![root];
        let mut in_set = vec![false; inst.node_count()];
        in_set[root] = true;
        let mut banned = self.used.clone();
        let ext: Vec<NodeId> = inst
            .graph()
            .neighbors(root)
            .iter()
            .copied()
            .filter(|&v| !banned[v])
            .collect();
        connected_sets(
            inst,
            &mut set,
            &mut in_set,
            &mut banned,
            ext,
            &mut |s: &[NodeId]| {
                if s.len() != 2 && inst.graph().is_biconnected(s) {
                    sets.push(s.to_vec());
                }
            },
        );
        // larger sets first: finds good incumbents early
        sets.sort_by_key(|s| std::cmp::Reverse(s.len()));
        for s in sets {
            let extra = s.len() - 1;
            for &u in &s[1..] {
                self.used[u] = true;
                self.current[u] = Some(i);
            }
            self.descend(i + 1, placed + extra, free - extra);
            for &u in &s[1..] {
                self.used[u] = false;
                self.current[u] = None;
            }
        }
    }
}

/// Reports every connected superset of `set` within the allowed nodes
/// (not `banned`) of size at most the capacity, exactly once each.
fn connected_sets<T>(
    inst: &Instance<T>,
    set: &mut Vec<NodeId>,
    in_set: &mut [bool],
    banned: &mut [bool],
    mut ext: Vec<NodeId>,
    report: &mut dyn FnMut(&[NodeId]),
) {
    report(set);
    if set.len() >= inst.capacity() {
        return;
    }
    let mut excluded = Vec::new();
    while let Some(w) = ext.pop() {
        set.push(w);
        in_set[w] = true;
        let mut next = ext.clone();
        for &x in inst.graph().neighbors(w) {
            if !in_set[x] && !banned[x] && !next.contains(&x) {
                next.push(x);
            }
        }
        connected_sets(inst, set, in_set, banned, next, report);
        set.pop();
        in_set[w] = false;
        banned[w] = true;
        excluded.push(w);
    }
    for w in excluded {
        banned[w] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Graph64, Instance64};
    use proptest::prelude::*;

    fn inst(n: usize, edges: &[(usize, usize)], roots: Vec<usize>, m: usize) -> Instance64 {
        Instance::new(Graph64::from_edges(n, edges).unwrap(), roots, m).unwrap()
    }

    fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    /// Tries every labelling of the non-root nodes.
    fn naive_optimum(instance: &Instance64) -> usize {
        let n = instance.root_count();
        let root_mask = instance.root_mask();
        let free: Vec<usize> = (0..instance.node_count()).filter(|&v| !root_mask[v]).collect();
        let mut labels = vec![0usize; free.len()];
        let mut best = 0;
        loop {
            let mut assignment = vec![None; instance.node_count()];
            for (i, &r) in instance.roots().iter().enumerate() {
                assignment[r] = Some(i);
            }
            for (k, &v) in free.iter().enumerate() {
                assignment[v] = (labels[k] < n).then_some(labels[k]);
            }
            let sol = Solution::new(assignment);
            if verify_solution(instance, &sol).unwrap().feasible() {
                best = best.max(sol.objective());
            }
            let mut k = 0;
            loop {
                if k == labels.len() {
                    return best;
                }
                labels[k] += 1;
                if labels[k] <= n {
                    break;
                }
                labels[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let two = inst(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], vec![0, 3], 3);
        assert_eq!(brute_force_optimum(&two).unwrap(), 6);
        let c5 = inst(5, &cycle_edges(5), vec![0], 4);
        assert_eq!(brute_force_optimum(&c5).unwrap(), 1);
        assert_eq!(naive_optimum(&c5), 1);
        let k4: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let k4 = inst(4, &k4, vec![0], 3);
        assert_eq!(brute_force_optimum(&k4).unwrap(), 3);
        assert_eq!(naive_optimum(&k4), 3);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let big = inst(17, &cycle_edges(17), vec![0], 5);
        assert!(matches!(
            brute_force_optimum(&big),
            Err(Error::TooLarge { nodes: 17, limit: 16 })
        ));
    }

    #[test]
    fn verify_flags_each_violation() {
        let c6 = inst(6, &cycle_edges(6), vec![0, 3], 4);
        let ok = Solution::new(vec![Some(0), None, None, Some(1), None, None]);
        assert!(verify_solution(&c6, &ok).unwrap().feasible());

        let path = Solution::new(vec![Some(0), Some(0), Some(0), Some(1), None, None]);
        let r = verify_solution(&c6, &path).unwrap();
        assert!(r.has(ViolationKind::Biconnectivity));
        assert_eq!(r.violations.len(), 1);

        let c5 = inst(5, &cycle_edges(5), vec![0], 4);
        let over = Solution::new(vec![Some(0); 5]);
        let r = verify_solution(&c5, &over).unwrap();
        assert!(r.has(ViolationKind::Capacity));
        assert!(!r.has(ViolationKind::Biconnectivity));

        let swapped = Solution::new(vec![Some(1), None, None, Some(0), None, None]);
        let r = verify_solution(&c6, &swapped).unwrap();
        assert!(r.has(ViolationKind::RootCount));

        let missing = Solution::new(vec![Some(0), None, None, None, None, None]);
        let r = verify_solution(&c6, &missing).unwrap();
        assert_eq!(r.violations[0].kind, ViolationKind::RootCount);
        assert_eq!(r.violations[0].subgraph, 1);

        assert!(matches!(
            verify_solution(&c6, &Solution::new(vec![None; 3])),
            Err(Error::AssignmentLength { got: 3, expected: 6 })
        ));
        assert!(matches!(
            verify_solution(&c6, &Solution::new(vec![Some(5), None, None, Some(1), None, None])),
            Err(Error::LabelOutOfRange { label: 5, .. })
        ));
    }

    fn arb_instance() -> impl Strategy<Value = Instance64> {
        (3usize..=7, 1usize..=2, 3usize..=5).prop_flat_map(|(n, roots, cap)| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let k = pairs.len();
            (proptest::collection::vec(proptest::bool::weighted(0.5), k), Just(roots.min(n)))
                .prop_map(move |(keep, roots)| {
                    let edges: Vec<_> = pairs
                        .iter()
                        .zip(&keep)
                        .filter(|(_, &k)| k)
                        .map(|(&e, _)| e)
                        .collect();
                    inst(n, &edges, (0..roots).collect(), cap)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]
        #[test]
        fn pruned_search_equals_naive(instance in arb_instance()) {
            let best = brute_force_best(&instance, BRUTE_FORCE_LIMIT).unwrap();
            prop_assert!(verify_solution(&instance, &best).unwrap().feasible());
            prop_assert_eq!(best.objective(), naive_optimum(&instance));
        }
    }
}
