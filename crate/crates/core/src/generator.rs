//! Random unit-disc instances with a known optimum, and star-shaped
//! reduction instances with an independent subset-sum oracle.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{CellGrid, Graph};
use crate::instance::{Instance, InstanceMeta};
use crate::scalar::{Point, Scalar};
use crate::solver::Solution;
use crate::verify::verify_solution;
use crate::{Error, NodeId, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GenConfig {
    pub n: usize,
    #[serde(rename = "M")]
    pub capacity: usize,
    pub alpha: f64,
    /// Oversampling factor: each block starts from ⌈M·delta⌉ points.
    pub delta: f64,
    pub gamma: f64,
    pub position_trials: usize,
    /// Point proposals allowed per block before giving up.
    pub block_attempts: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n: 5,
            capacity: 10,
            alpha: 2.0,
            delta: 1.1,
            gamma: 0.2,
            position_trials: 1000,
            block_attempts: 100_000,
            restarts: 10,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn new(n: usize, capacity: usize, alpha: f64, seed: u64) -> Self {
        Self {
            n,
            capacity,
            alpha,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.capacity < 3 {
            return bad("M must be at least 3");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.delta >= 1.0 && self.delta.is_finite()) {
            return bad("delta must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.position_trials == 0 || self.block_attempts == 0 || self.restarts == 0 {
            return bad("trial budgets must be positive");
        }
        Ok(())
    }

    /// Disc radius `1/√(α·n·M)`.
    pub fn radius(&self) -> f64 {
        1.0 / (self.alpha * self.n as f64 * self.capacity as f64).sqrt()
    }

    /// Minimum number of cross edges for a block with `block_edges` edges.
    pub fn min_connections(&self, block_edges: usize) -> usize {
        3.max((self.gamma * block_edges as f64).ceil() as usize)
    }
}

/// One bi-connected block in local coordinates.
#[derive(Clone, Debug)]
pub struct Block<T = f64> {
    pub points: Vec<Point<T>>,
    pub root: usize,
    pub width: T,
    pub height: T,
    pub edge_count: usize,
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance<T = f64> {
    pub instance: Instance<T>,
    /// Block index of each node; this is an optimal solution.
    pub block_membership: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CertificateFile {
    block_membership: Vec<usize>,
}

impl<T: Scalar> GeneratedInstance<T> {
    pub fn certificate(&self) -> Solution {
        Solution::new(self.block_membership.iter().map(|&b| Some(b)).collect())
    }

    pub fn certificate_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CertificateFile {
            block_membership: self.block_membership.clone(),
        })?)
    }

    pub fn write_certificate(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.certificate_json()? + "\n")?;
        Ok(())
    }

    pub fn read_certificate(path: impl AsRef<Path>) -> Result<Vec<usize>> {
        let file: CertificateFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Ok(file.block_membership)
    }
}

/// Block box `(1/(√n·R), R/√n)`; if the width overflows the unit box it is
/// clamped to 1 and the height rescaled to keep area `1/n`.
fn block_box(n: usize, shape: f64) -> (f64, f64) {
    let sn = (n as f64).sqrt();
    let w = 1.0 / (sn * shape);
    if w > 1.0 {
        (1.0, 1.0 / n as f64)
    } else {
        (w, shape / sn)
    }
}

/// Draws a bi-connected block of exactly `cfg.capacity` nodes.
///
/// Points are proposed uniformly in the block box. After the first point a
/// proposal is kept only if it lies within the disc radius of at least two
/// kept points (of the single kept point for the second one), so the disc
/// graph stays bi-connected. Once ⌈M·δ⌉ points are kept, random non-cut
/// nodes are removed until M remain.
pub fn generate_block<T: Scalar, R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<Block<T>> {
    cfg.validate()?;
    let m = cfg.capacity;
    let target = ((m as f64 * cfg.delta).ceil() as usize).max(m);
    let d = T::of(cfg.radius());
    let d_sq = d * d;
    let mut proposals = 0usize;
    loop {
        let shape = rng.gen_range(0.5..1.0);
        let (w, h) = block_box(cfg.n, shape);
        let (w, h) = (T::of(w), T::of(h));
        let mut points: Vec<Point<T>> = Vec::with_capacity(target);
        let mut grid = CellGrid::new(&[], d);
        while points.len() < target {
            if proposals >= cfg.block_attempts {
                return Err(Error::Generation(format!(
                    "no {m}-node block after {proposals} point proposals"
                )));
            }
            proposals += 1;
            let p = Point::new(T::of(rng.gen::<f64>()) * w, T::of(rng.gen::<f64>()) * h);
            let need = points.len().min(2);
            let mut close = 0;
            grid.for_each_near(&p, |j| {
                if points[j].within(&p, d_sq) {
                    close += 1;
                }
            });
            if close >= need {
                grid.insert(points.len(), &p);
                points.push(p);
            }
        }
        if let Some(kept) = trim_block(&points, d, m, rng) {
            let points: Vec<Point<T>> = kept.iter().map(|&i| points[i]).collect();
            let graph = Graph::unit_disc(&points, d)?;
            debug_assert!(graph.is_biconnected(&(0..m).collect::<Vec<_>>()));
            return Ok(Block {
                root: rng.gen_range(0..m),
                edge_count: graph.edge_count(),
                points,
                width: w,
                height: h,
            });
        }
    }
}

/// Removes random non-cut nodes until `m` remain and the rest is still
/// bi-connected. `None` when every candidate removal breaks it.
fn trim_block<T: Scalar, R: Rng + ?Sized>(
    points: &[Point<T>],
    d: T,
    m: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let graph = Graph::unit_disc(points, d).ok()?;
    let mut kept: Vec<NodeId> = (0..points.len()).collect();
    while kept.len() > m {
        let mut order = kept.clone();
        order.shuffle(rng);
        let mut removed = false;
        for u in order {
            let rest: Vec<NodeId> = kept.iter().copied().filter(|&v| v != u).collect();
            if graph.is_biconnected(&rest) {
                kept = rest;
                removed = true;
                break;
            }
        }
        if !removed {
            return None;
        }
    }
    Some(kept)
}

/// Places blocks one after another in the unit box and assembles the final
/// unit-disc instance.
///
/// Block 0 goes to a random position. Every later block tries
/// `position_trials` random translations; a position is valid when it adds
/// at least `min_connections` cross edges, and the valid position with the
/// smallest resulting maximum degree wins. Node ids are permuted at the end.
pub fn assemble_instance<T: Scalar, R: Rng + ?Sized>(
    blocks: &[Block<T>],
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<GeneratedInstance<T>> {
    cfg.validate()?;
    let d = T::of(cfg.radius());
    let d_sq = d * d;
    let mut placed: Vec<Point<T>> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut degree: Vec<usize> = Vec::new();
    let mut grid = CellGrid::new(&[], d);
    let mut roots = Vec::with_capacity(blocks.len());
    let offset = |b: &Block<T>, rng: &mut R| {
        let dx = T::of(rng.gen::<f64>()) * (T::one() - b.width).max(T::zero());
        let dy = T::of(rng.gen::<f64>()) * (T::one() - b.height).max(T::zero());
        (dx, dy)
    };

    for (bi, block) in blocks.iter().enumerate() {
        let local = Graph::unit_disc(&block.points, d)?;
        let (dx, dy) = if bi == 0 {
            offset(block, rng)
        } else {
            let need = cfg.min_connections(block.edge_count);
            let mut best: Option<(usize, T, T)> = None;
            let mut bumps: Vec<(usize, usize)> = Vec::new();
            for _ in 0..cfg.position_trials {
                let (dx, dy) = offset(block, rng);
                bumps.clear();
                let mut cross = 0;
                let mut max_deg = 0;
                for (k, p) in block.points.iter().enumerate() {
                    let q = p.translated(dx, dy);
                    let mut own = local.degree(k);
                    grid.for_each_near(&q, |j| {
                        if placed[j].within(&q, d_sq) {
                            own += 1;
                            cross += 1;
                            bumps.push((j, 1));
                        }
                    });
                    max_deg = max_deg.max(own);
                }
                if cross < need {
                    continue;
                }
                bumps.sort_unstable();
                let mut i = 0;
                while i < bumps.len() {
                    let j = bumps[i].0;
                    let mut add = 0;
                    while i < bumps.len() && bumps[i].0 == j {
                        add += bumps[i].1;
                        i += 1;
                    }
                    max_deg = max_deg.max(degree[j] + add);
                }
                if best.is_none_or(|(b, _, _)| max_deg < b) {
                    best = Some((max_deg, dx, dy));
                }
            }
            match best {
                Some((_, dx, dy)) => (dx, dy),
                None => {
                    return Err(Error::Generation(format!(
                        "block {bi}: no position with {need} cross edges in {} trials",
                        cfg.position_trials
                    )))
                }
            }
        };
        let base = placed.len();
        for (k, p) in block.points.iter().enumerate() {
            let q = p.translated(dx, dy);
            let mut deg = local.degree(k);
            grid.for_each_near(&q, |j| {
                if placed[j].within(&q, d_sq) {
                    deg += 1;
                    degree[j] += 1;
                }
            });
            degree.push(deg);
            owner.push(bi);
        }
        for p in &block.points {
            let q = p.translated(dx, dy);
            grid.insert(placed.len(), &q);
            placed.push(q);
        }
        roots.push(base + block.root);
    }

    let mut perm: Vec<NodeId> = (0..placed.len()).collect();
    perm.shuffle(rng);
    let mut points = vec![Point::new(T::zero(), T::zero()); placed.len()];
    let mut membership = vec![0; placed.len()];
    for (old, &new) in perm.iter().enumerate() {
        points[new] = placed[old];
        membership[new] = owner[old];
    }
    let roots: Vec<NodeId> = roots.iter().map(|&r| perm[r]).collect();
    let graph = Graph::unit_disc(&points, d)?;
    let capacity = cfg.capacity;
    let total = placed.len();
    let instance = Instance::new(graph, roots, capacity)?
        .with_known_optimum(total)?
        .with_meta(InstanceMeta {
            alpha: cfg.alpha,
            seed: cfg.seed,
        });
    let generated = GeneratedInstance {
        instance,
        block_membership: membership,
    };
    let report = verify_solution(&generated.instance, &generated.certificate())?;
    if !report.feasible() {
        return Err(Error::Generation(format!(
            "certificate broke after placement: {}",
            report.violations[0].detail
        )));
    }
    Ok(generated)
}

/// Generates an instance with `n` blocks of `M` nodes and optimum `n·M`,
/// restarting the whole construction up to `cfg.restarts` times.
pub fn generate_instance<T: Scalar>(cfg: &GenConfig) -> Result<GeneratedInstance<T>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last = None;
    for attempt in 0..cfg.restarts {
        let blocks = (0..cfg.n)
            .map(|_| generate_block::<T, _>(cfg, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        match assemble_instance(&blocks, cfg, &mut rng) {
            Ok(g) => return Ok(g),
            Err(e) => {
                log::debug!("seed {}: assembly attempt {attempt} failed: {e}", cfg.seed);
                last = Some(e);
            }
        }
    }
    Err(last.unwrap_or_else(|| Error::Generation("no assembly attempt".into())))
}

/// Largest subset sum of `demands` not exceeding `sup`.
pub fn max_subset_sum(sup: usize, demands: &[usize]) -> usize {
    let mut reach = vec![false; sup + 1];
    reach[0] = true;
    for &dm in demands {
        for s in (dm..=sup).rev() {
            reach[s] |= reach[s - dm];
        }
    }
    (0..=sup).rev().find(|&s| reach[s]).unwrap_or(0)
}

/// Star reduction instance: root 0 joined to nodes 1 (`s`) and 2 (`e`); each
/// demand `d_i` becomes a path of `d_i` nodes hanging off `s` whose far end
/// is joined to `e`. One root, capacity `sup + 3`. Returns the instance and
/// the optimum predicted by subset sum.
pub fn reduce_mpgsd_star(sup: usize, demands: &[usize]) -> Result<(Instance, usize)> {
    if sup == 0 {
        return Err(Error::InvalidConfig("sup must be positive".into()));
    }
    if demands.is_empty() || demands.contains(&0) {
        return Err(Error::InvalidConfig("demands must be nonempty and positive".into()));
    }
    let (r, s, e) = (0, 1, 2);
    let mut edges = vec![(r, s), (r, e)];
    let mut next = 3;
    for &dm in demands {
        let mut prev = s;
        for _ in 0..dm {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((e, prev));
    }
    let graph = Graph::from_edges(next, &edges)?;
    let best = max_subset_sum(sup, demands);
    let optimum = if best > 0 { best + 3 } else { 1 };
    Ok((Instance::new(graph, vec![r], sup + 3)?, optimum))
}
