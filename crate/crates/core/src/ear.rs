//! Growing a single bi-connected subgraph by attaching open ears.
//!
//! A modified BFS runs from the subgraph's root. Instead of the distance to
//! the root, every tree node tracks `dist`, the length of its tree path up to
//! the nearest ancestor already in `S` (its `ear_root`). A non-tree edge
//! `(u, v)` whose endpoints hang below different ear roots closes an open
//! ear: `ear_root(u) .. u, v .. ear_root(v)`. The very first ear is a cycle
//! through the root, which is why the root's neighbors start out as their own
//! ear roots.
//!
//! After an ear is added, the branches below its nodes are re-rooted and
//! re-enqueued level by level, so shorter candidate ears are looked at first.
//! The stored `dist` is an overestimate of the true distance to `S`, which
//! keeps the size check conservative.

use std::collections::VecDeque;

use rand::Rng;

use crate::graph::Graph;
use crate::NodeId;

/// Sentinel for "not in the BFS tree".
pub const INF: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Per-node bookkeeping of one growth state.
///
/// Children are kept as an intrusive doubly linked sibling list so that
/// detaching a node is O(1).
#[derive(Clone, Copy, Debug)]
pub struct NodeState {
    parent: u32,
    first_child: u32,
    next_sibling: u32,
    prev_sibling: u32,
    ear_root: u32,
    dist: u32,
    eval: bool,
    available: bool,
    in_s: bool,
}

impl NodeState {
    fn fresh(id: NodeId, available: bool) -> Self {
        Self {
            parent: NONE,
            first_child: NONE,
            next_sibling: NONE,
            prev_sibling: NONE,
            ear_root: id as u32,
            dist: INF,
            eval: true,
            available,
            in_s: false,
        }
    }

    pub fn parent(&self) -> Option<NodeId> {
        (self.parent != NONE).then_some(self.parent as NodeId)
    }

    pub fn ear_root(&self) -> NodeId {
        self.ear_root as NodeId
    }

    /// `None` when the node is not in the BFS tree.
    pub fn dist(&self) -> Option<u32> {
        (self.dist != INF).then_some(self.dist)
    }

    pub fn needs_eval(&self) -> bool {
        self.eval
    }

    pub fn is_available(&self) -> bool {
        self.available
    }

    pub fn in_subgraph(&self) -> bool {
        self.in_s
    }

    pub fn in_tree(&self) -> bool {
        self.dist != INF
    }
}

/// An ear as an ordered node sequence.
///
/// For an open ear the two ends are distinct nodes of `S` and everything in
/// between is new. The first ear is a cycle through the root, stored with the
/// root at both ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ear {
    path: Vec<NodeId>,
}

impl Ear {
    pub fn path(&self) -> &[NodeId] {
        &self.path
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.path[0], self.path[self.path.len() - 1])
    }

    /// The nodes this ear adds to the subgraph.
    pub fn interior(&self) -> &[NodeId] {
        &self.path[1..self.path.len() - 1]
    }

    pub fn is_cycle(&self) -> bool {
        let (a, b) = self.endpoints();
        a == b
    }
}

/// Outcome of [`GrowthState::step`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Queue empty or subgraph full.
    Exhausted,
    Scanned,
    Accepted(Ear),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowMode {
    /// Keep adding ears until the subgraph is full or the queue runs dry.
    ToCapacity,
    /// Stop after the first accepted ear.
    SingleEar,
}

/// Growth of one bi-connected subgraph `S` around a root.
#[derive(Clone, Debug)]
pub struct GrowthState<'g, T = f64> {
    graph: &'g Graph<T>,
    root: NodeId,
    capacity: usize,
    accept_prob: f64,
    nodes: Vec<NodeState>,
    queue: VecDeque<u32>,
    members: Vec<NodeId>,
}

impl<'g, T> GrowthState<'g, T> {
    /// Fresh state with every node available.
    pub fn new(graph: &'g Graph<T>, root: NodeId, capacity: usize, accept_prob: f64) -> Self {
        Self::with_availability(graph, root, capacity, accept_prob, |_| true)
    }

    /// Fresh state where only nodes passing `available` may join. The root is
    /// always available to its own state.
    pub fn with_availability(
        graph: &'g Graph<T>,
        root: NodeId,
        capacity: usize,
        accept_prob: f64,
        available: impl Fn(NodeId) -> bool,
    ) -> Self {
        assert!(capacity >= 1, "capacity must be positive");
        let mut nodes: Vec<NodeState> = (0..graph.node_count())
            .map(|v| NodeState::fresh(v, v == root || available(v)))
            .collect();
        let mut queue = VecDeque::with_capacity(graph.degree(root));
        {
            let r = &mut nodes[root];
            r.dist = 0;
            r.in_s = true;
        }
        let mut state_links = Vec::new();
        for &u in graph.neighbors(root) {
            let s = &mut nodes[u];
            if !s.available {
                continue;
            }
            s.dist = 0;
            s.ear_root = u as u32;
            state_links.push(u);
            queue.push_back(u as u32);
        }
        let mut state = Self {
            graph,
            root,
            capacity,
            accept_prob,
            nodes,
            queue,
            members: vec![root],
        };
        for u in state_links {
            state.attach(u, root);
        }
        state
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Nodes of `S` in the order they joined.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    /// Whether another call to [`next_ear`](Self::next_ear) may still succeed.
    pub fn can_expand(&self) -> bool {
        !self.is_full() && !self.queue.is_empty()
    }

    pub fn node(&self, u: NodeId) -> &NodeState {
        &self.nodes[u]
    }

    pub fn queued(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.queue.iter().map(|&u| u as NodeId)
    }

    /// Tree children of `u`, most recently attached first.
    pub fn children(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let mut cur = self.nodes[u].first_child;
        std::iter::from_fn(move || {
            if cur == NONE {
                return None;
            }
            let out = cur as NodeId;
            cur = self.nodes[out].next_sibling;
            Some(out)
        })
    }

    /// The ear closed by the non-tree edge `(u, v)`, if it is admissible.
    ///
    /// Admissible means the two ends hang below different ear roots, the ear
    /// brings at least one new node, and `S` stays within capacity. While
    /// `S = {root}` the result is the initial cycle through the root.
    pub fn try_make_ear(&self, u: NodeId, v: NodeId) -> Option<Ear> {
        let (su, sv) = (&self.nodes[u], &self.nodes[v]);
        if !su.available || !sv.available || su.dist == INF || sv.dist == INF {
            return None;
        }
        if su.ear_root == sv.ear_root {
            return None;
        }
        let initial = self.members.len() == 1;
        // While S = {root}, the branch heads are ear roots outside S and are
        // part of the cycle as well.
        let fresh = su.dist as usize + sv.dist as usize + if initial { 2 } else { 0 };
        if fresh == 0 || self.members.len() + fresh > self.capacity {
            return None;
        }
        let mut path = Vec::with_capacity(fresh + 3);
        if initial {
            path.push(self.root);
        }
        let start = path.len();
        self.push_tree_path(u, &mut path);
        path[start..].reverse();
        self.push_tree_path(v, &mut path);
        if initial {
            path.push(self.root);
        }
        let ear = Ear { path };
        debug_assert_eq!(ear.interior().len(), fresh);
        Some(ear)
    }

    /// Pushes `x, parent(x), ..., ear_root(x)`.
    fn push_tree_path(&self, mut x: NodeId, out: &mut Vec<NodeId>) {
        let stop = self.nodes[x].ear_root as NodeId;
        loop {
            out.push(x);
            if x == stop {
                break;
            }
            x = self.nodes[x].parent as NodeId;
        }
    }

    /// Grows `S` and returns the number of nodes added.
    pub fn grow<R: Rng + ?Sized>(&mut self, mode: GrowMode, rng: &mut R) -> usize {
        let mut added = 0;
        while let Some(ear) = self.next_ear(rng) {
            added += ear.interior().len();
            if mode == GrowMode::SingleEar {
                break;
            }
        }
        added
    }

    /// Runs the queue until one ear is accepted and returns it. `None` once
    /// the subgraph is full or the queue is exhausted.
    pub fn next_ear<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Ear> {
        loop {
            match self.step(rng) {
                Step::Exhausted => return None,
                Step::Scanned => {}
                Step::Accepted(ear) => return Some(ear),
            }
        }
    }

    /// Processes a single queued node.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Step {
        if self.is_full() {
            return Step::Exhausted;
        }
        match self.queue.pop_front() {
            None => Step::Exhausted,
            Some(current) => match self.process(current as NodeId, rng) {
                Some(ear) => Step::Accepted(ear),
                None => Step::Scanned,
            },
        }
    }

    fn process<R: Rng + ?Sized>(&mut self, current: NodeId, rng: &mut R) -> Option<Ear> {
        let st = self.nodes[current];
        let slack = (self.capacity - self.members.len()) as u32;
        if !st.eval || !st.available || st.dist > slack {
            return None;
        }
        let graph = self.graph;
        for &w in graph.neighbors(current) {
            let ws = self.nodes[w];
            if !ws.available {
                continue;
            }
            if ws.dist == INF {
                let cs = self.nodes[current];
                let s = &mut self.nodes[w];
                s.dist = cs.dist + 1;
                s.ear_root = cs.ear_root;
                s.eval = true;
                self.attach(w, current);
                self.queue.push_back(w as u32);
                continue;
            }
            if ws.parent as NodeId == current || self.nodes[current].parent as NodeId == w {
                continue;
            }
            if let Some(ear) = self.try_make_ear(current, w) {
                // A skipped ear leaves no trace; the edge can be found again
                // when either end is re-enqueued.
                if rng.gen::<f64>() < self.accept_prob {
                    // `current` is on the ear and gets re-enqueued with its
                    // evaluation flag set, so the remaining neighbors are
                    // looked at against the updated roots.
                    self.add_ear(&ear);
                    return Some(ear);
                }
            }
        }
        self.nodes[current].eval = false;
        None
    }

    /// Adds the ear's nodes to `S`, then re-roots the tree branches hanging
    /// below them and re-enqueues everything in increasing distance.
    pub fn add_ear(&mut self, ear: &Ear) {
        let mut level: VecDeque<NodeId> = VecDeque::new();
        if ear.is_cycle() {
            level.push_back(self.root);
        }
        for &u in ear.interior() {
            debug_assert!(!self.nodes[u].in_s);
            let s = &mut self.nodes[u];
            s.in_s = true;
            s.dist = 0;
            s.ear_root = u as u32;
            self.members.push(u);
            level.push_back(u);
        }
        while let Some(a) = level.pop_front() {
            let (root, dist) = {
                let s = &mut self.nodes[a];
                s.eval = true;
                (s.ear_root, s.dist)
            };
            self.queue.push_back(a as u32);
            let mut c = self.nodes[a].first_child;
            while c != NONE {
                let cs = &mut self.nodes[c as NodeId];
                if !cs.in_s {
                    cs.ear_root = root;
                    cs.dist = dist + 1;
                    level.push_back(c as NodeId);
                }
                c = cs.next_sibling;
            }
        }
    }

    /// Takes `nodes` (just claimed by another subgraph) out of this state.
    ///
    /// Their tree branches are cut off and reset so they can be rediscovered,
    /// and the ancestors between each removed node and its ear root are
    /// re-enqueued if they had already been evaluated: their back edges with
    /// the same ear root were ignored before and may now become tree edges.
    pub fn make_unavailable(&mut self, nodes: &[NodeId]) {
        for &u in nodes {
            let st = self.nodes[u];
            if !st.available {
                continue;
            }
            debug_assert!(!st.in_s, "node {u} is already part of this subgraph");
            if st.dist != INF {
                if st.ear_root as NodeId != u {
                    let mut a = st.parent;
                    while a != NONE {
                        let s = &mut self.nodes[a as NodeId];
                        if !s.eval {
                            s.eval = true;
                            self.queue.push_back(a);
                        }
                        if a == st.ear_root {
                            break;
                        }
                        a = s.parent;
                    }
                }
                self.detach(u);
                self.clear_branch(u);
            }
            let s = &mut self.nodes[u];
            s.available = false;
            s.dist = INF;
            s.eval = false;
            s.ear_root = u as u32;
        }
    }

    /// Resets every descendant of `u` to "unseen" and drops `u`'s child list.
    fn clear_branch(&mut self, u: NodeId) {
        let mut stack = vec![self.nodes[u].first_child];
        self.nodes[u].first_child = NONE;
        while let Some(mut c) = stack.pop() {
            while c != NONE {
                let s = &mut self.nodes[c as NodeId];
                let next = s.next_sibling;
                if s.first_child != NONE {
                    stack.push(s.first_child);
                }
                *s = NodeState::fresh(c as NodeId, s.available);
                c = next;
            }
        }
    }

    fn attach(&mut self, child: NodeId, parent: NodeId) {
        let head = self.nodes[parent].first_child;
        {
            let c = &mut self.nodes[child];
            c.parent = parent as u32;
            c.next_sibling = head;
            c.prev_sibling = NONE;
        }
        if head != NONE {
            self.nodes[head as NodeId].prev_sibling = child as u32;
        }
        self.nodes[parent].first_child = child as u32;
    }

    fn detach(&mut self, child: NodeId) {
        let c = self.nodes[child];
        if c.parent == NONE {
            return;
        }
        if c.prev_sibling != NONE {
            self.nodes[c.prev_sibling as NodeId].next_sibling = c.next_sibling;
        } else {
            self.nodes[c.parent as NodeId].first_child = c.next_sibling;
        }
        if c.next_sibling != NONE {
            self.nodes[c.next_sibling as NodeId].prev_sibling = c.prev_sibling;
        }
        let s = &mut self.nodes[child];
        s.parent = NONE;
        s.next_sibling = NONE;
        s.prev_sibling = NONE;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Graph64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> Graph64 {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph64::from_edges(n, &edges).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    /// Processes queue entries without accepting anything (p0 = 0) until the
    /// back edge `(u, v)` of the tree is visible.
    fn explore(state: &mut GrowthState<'_, f64>, steps: usize) {
        let mut r = rng();
        for _ in 0..steps {
            let Some(c) = state.queue.pop_front() else { break };
            assert!(state.process(c as NodeId, &mut r).is_none());
        }
    }

    #[test]
    fn init_on_five_cycle() {
        let g = cycle(5);
        let s = GrowthState::new(&g, 0, 5, 1.0);
        assert_eq!(s.members(), &[0]);
        assert_eq!(s.queued().collect::<Vec<_>>(), vec![1, 4]);
        for u in [1, 4] {
            assert_eq!(s.node(u).ear_root(), u);
            assert_eq!(s.node(u).dist(), Some(0));
            assert_eq!(s.node(u).parent(), Some(0));
        }
        assert_eq!(s.node(2).dist(), None);
        assert!(s.node(2).needs_eval());
    }

    #[test]
    fn init_on_star_and_isolated_root() {
        let star = Graph64::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = GrowthState::new(&star, 0, 4, 1.0);
        assert_eq!(s.queued().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!((1..4).all(|u| s.node(u).ear_root() == u));

        let lonely = Graph64::from_edges(2, &[]).unwrap();
        let mut s = GrowthState::new(&lonely, 0, 3, 1.0);
        assert!(!s.can_expand());
        assert_eq!(s.grow(GrowMode::ToCapacity, &mut rng()), 0);
        assert_eq!(s.members(), &[0]);
    }

    #[test]
    fn first_ear_on_five_cycle() {
        let g = cycle(5);
        let mut s = GrowthState::new(&g, 0, 5, 0.0);
        // 1 and 4 extend the tree to 2 and 3
        explore(&mut s, 2);
        assert_eq!(s.node(2).ear_root(), 1);
        assert_eq!(s.node(3).ear_root(), 4);
        let ear = s.try_make_ear(2, 3).expect("cycle closes");
        assert_eq!(ear.path(), &[0, 1, 2, 3, 4, 0]);
        assert!(ear.is_cycle());
        assert_eq!(ear.interior(), &[1, 2, 3, 4]);

        let mut tight = GrowthState::new(&g, 0, 4, 0.0);
        explore(&mut tight, 2);
        assert!(tight.try_make_ear(2, 3).is_none());
        // same root on both sides
        assert!(s.try_make_ear(1, 2).is_none());
    }

    #[test]
    fn grow_five_cycle_to_capacity() {
        let g = cycle(5);
        let mut s = GrowthState::new(&g, 0, 5, 1.0);
        assert_eq!(s.grow(GrowMode::ToCapacity, &mut rng()), 4);
        assert_eq!(s.size(), 5);
        assert!(g.is_biconnected(s.members()));

        let mut s = GrowthState::new(&g, 0, 4, 1.0);
        assert_eq!(s.grow(GrowMode::ToCapacity, &mut rng()), 0);
    }

    #[test]
    fn grow_complete_graph() {
        let edges: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let k4 = Graph64::from_edges(4, &edges).unwrap();
        for seed in 0..20 {
            let mut s = GrowthState::new(&k4, seed % 4, 4, 1.0);
            s.grow(GrowMode::ToCapacity, &mut ChaCha8Rng::seed_from_u64(seed as u64));
            assert_eq!(s.size(), 4);
        }
        let mut s = GrowthState::new(&k4, 0, 4, 1.0);
        let first = s.grow(GrowMode::SingleEar, &mut rng());
        assert_eq!(first, 2, "triangle through the root");
        assert_eq!(s.grow(GrowMode::SingleEar, &mut rng()), 1);
    }

    #[test]
    fn paths_never_grow() {
        let path = Graph64::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        for r in 0..6 {
            let mut s = GrowthState::new(&path, r, 6, 1.0);
            assert_eq!(s.grow(GrowMode::ToCapacity, &mut rng()), 0);
            assert_eq!(s.size(), 1);
        }
    }

    /// 0 - {1, 2} triangle; 1 - 3 - 4 chain below node 1; node 5 under 4.
    fn three_level_tree() -> Graph64 {
        Graph64::from_edges(6, &[(0, 1), (0, 2), (1, 2), (1, 3), (3, 4), (4, 5)]).unwrap()
    }

    #[test]
    fn adding_an_ear_reroots_branches_by_level() {
        let g = three_level_tree();
        let mut s = GrowthState::new(&g, 0, 6, 0.0);
        explore(&mut s, 3);
        assert_eq!(s.node(3).ear_root(), 1);
        assert_eq!(s.node(4).ear_root(), 1);
        assert_eq!(s.node(4).dist(), Some(2));
        let ear = s.try_make_ear(1, 2).unwrap();
        assert_eq!(ear.path(), &[0, 1, 2, 0]);
        s.queue.clear();
        s.add_ear(&ear);
        assert_eq!(s.members(), &[0, 1, 2]);
        assert_eq!(s.node(1).dist(), Some(0));
        assert_eq!(s.node(1).ear_root(), 1);
        assert_eq!(s.node(3).ear_root(), 1);
        assert_eq!(s.node(3).dist(), Some(1));
        // depth 2 below the ear node: old d' (2) minus d'(ear root) (0)
        assert_eq!(s.node(4).dist(), Some(2));
        assert!(s.node(4).needs_eval());
        // root first (cycle), then ear nodes, then children level by level
        assert_eq!(s.queued().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn ear_without_outside_descendants_only_requeues_ear_nodes() {
        let g = cycle(4);
        let mut s = GrowthState::new(&g, 0, 4, 0.0);
        explore(&mut s, 2);
        assert!(s.try_make_ear(1, 2).is_none());
        let ear = s.try_make_ear(2, 3).unwrap();
        assert_eq!(ear.path(), &[0, 1, 2, 3, 0]);
        s.queue.clear();
        s.add_ear(&ear);
        assert_eq!(s.queued().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(s.size(), 4);
    }

    #[test]
    fn removing_a_node_clears_its_branch() {
        // 0 - 1 - 2 - 3 with 2 - 4 as well; 0 - 5 closes nothing
        let g = Graph64::from_edges(6, &[(0, 1), (1, 2), (2, 3), (2, 4), (0, 5)]).unwrap();
        let mut s = GrowthState::new(&g, 0, 6, 0.0);
        explore(&mut s, 10);
        assert_eq!(s.node(3).parent(), Some(2));
        assert!(!s.node(1).needs_eval());
        s.make_unavailable(&[2]);
        assert!(!s.node(2).is_available());
        assert_eq!(s.node(2).dist(), None);
        for v in [3, 4] {
            assert_eq!(s.node(v).dist(), None);
            assert_eq!(s.node(v).parent(), None);
            assert!(s.node(v).needs_eval());
        }
        assert_eq!(s.children(1).count(), 0);
        // ancestor 1 (= ear root of 2) had been evaluated: re-enqueued once
        assert!(s.node(1).needs_eval());
        assert_eq!(s.queued().filter(|&u| u == 1).count(), 1);
        s.make_unavailable(&[3]);
        assert_eq!(s.queued().filter(|&u| u == 1).count(), 1);
    }

    #[test]
    fn removing_a_leaf_with_pending_ancestors_enqueues_nothing() {
        let g = Graph64::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let mut s = GrowthState::new(&g, 0, 4, 0.0);
        explore(&mut s, 1);
        s.make_unavailable(&[2]);
        assert!(s.node(1).needs_eval());
        let before: Vec<_> = s.queued().collect();
        s.make_unavailable(&[3]);
        assert_eq!(s.queued().collect::<Vec<_>>(), before);
    }

    #[test]
    fn unavailable_nodes_are_never_used() {
        let g = cycle(5);
        let mut s = GrowthState::with_availability(&g, 0, 5, 1.0, |v| v != 3);
        assert_eq!(s.grow(GrowMode::ToCapacity, &mut rng()), 0);
        assert_eq!(s.node(3).dist(), None);
    }

    #[test]
    fn seeded_growth_is_deterministic() {
        let g = three_level_tree();
        let run = |seed| {
            let mut s = GrowthState::new(&g, 0, 6, 0.5);
            s.grow(GrowMode::ToCapacity, &mut ChaCha8Rng::seed_from_u64(seed));
            s.members().to_vec()
        };
        for seed in 0..10 {
            assert_eq!(run(seed), run(seed));
        }
    }
}
