//! Batch experiments: generate instances per `(n, M)` pair, run the local
//! search on each and aggregate normalized errors into CSV rows.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generator::{generate_instance, GenConfig};
use crate::local_search::{local_search, SearchMode};
use crate::solver::SolverConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Modes {
    One(SearchMode),
    Many(Vec<SearchMode>),
}

impl Modes {
    pub fn to_vec(&self) -> Vec<SearchMode> {
        match self {
            Self::One(m) => vec![*m],
            Self::Many(ms) => ms.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchSpec {
    /// `(n, M)` pairs.
    pub pairs: Vec<(usize, usize)>,
    pub alpha: f64,
    pub instances_per_pair: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub mode: Modes,
    #[serde(default)]
    pub config: SolverConfig,
    /// Record wall-clock times. Off keeps the CSV byte-reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() || self.instances_per_pair == 0 {
            return Err(Error::InvalidConfig("bench spec needs pairs and instances".into()));
        }
        if self.mode.to_vec().is_empty() {
            return Err(Error::InvalidConfig("bench spec needs a mode".into()));
        }
        self.config.validate()?;
        for &(n, m) in &self.pairs {
            GenConfig::new(n, m, self.alpha, 0).validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    #[serde(rename = "M")]
    pub capacity: usize,
    pub alpha: f64,
    pub mode: SearchMode,
    #[serde(rename = "avgErrPct")]
    pub avg_err_pct: f64,
    #[serde(rename = "stdevErrPct")]
    pub stdev_err_pct: f64,
    #[serde(rename = "maxErrPct")]
    pub max_err_pct: f64,
    pub hits: usize,
    #[serde(rename = "avgIter")]
    pub avg_iter: f64,
    #[serde(rename = "stdevIter")]
    pub stdev_iter: f64,
    /// Mean time to the best solution, when timing is on.
    #[serde(rename = "avgTimeMs")]
    pub avg_time_ms: Option<f64>,
    /// Instances that were generated and solved.
    #[serde(skip)]
    pub solved: usize,
}

/// Per-instance outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub err_pct: f64,
    pub iterations: usize,
    pub millis_to_best: f64,
    pub wall_millis: f64,
}

fn mean_stdev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn aggregate(n: usize, capacity: usize, alpha: f64, mode: SearchMode, runs: &[RunRecord], timing: bool) -> BenchRow {
    let errs: Vec<f64> = runs.iter().map(|r| r.err_pct).collect();
    let iters: Vec<f64> = runs.iter().map(|r| r.iterations as f64).collect();
    let (avg_err, sd_err) = mean_stdev(&errs);
    let (avg_iter, sd_iter) = mean_stdev(&iters);
    let times: Vec<f64> = runs.iter().map(|r| r.millis_to_best).collect();
    BenchRow {
        n,
        capacity,
        alpha,
        mode,
        avg_err_pct: avg_err,
        stdev_err_pct: sd_err,
        max_err_pct: errs.iter().copied().fold(0.0, f64::max),
        hits: errs.iter().filter(|&&e| e == 0.0).count(),
        avg_iter,
        stdev_iter: sd_iter,
        avg_time_ms: timing.then(|| mean_stdev(&times).0),
        solved: runs.len(),
    }
}

/// Runs the batch. Rows come out ordered by pair, then mode.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let modes = spec.mode.to_vec();
    let mut rows = Vec::new();
    for &(n, m) in &spec.pairs {
        let instances: Vec<_> = (0..spec.instances_per_pair as u64)
            .into_par_iter()
            .map(|k| {
                let seed = spec.base_seed + k;
                match generate_instance::<f64>(&GenConfig::new(n, m, spec.alpha, seed)) {
                    Ok(g) => Some((seed, g)),
                    Err(e) => {
                        log::warn!("skipping instance n={n} M={m} seed={seed}: {e}");
                        None
                    }
                }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        for &mode in &modes {
            let runs: Vec<RunRecord> = instances
                .par_iter()
                .map(|(seed, g)| {
                    let cfg = spec.config.clone().with_seed(*seed);
                    let (best, stats) = local_search(&g.instance, &cfg, mode);
                    let opt = g.instance.known_optimum().unwrap_or(g.instance.node_count()) as f64;
                    RunRecord {
                        err_pct: (opt - best.objective() as f64) / opt * 100.0,
                        iterations: stats.iteration_of_best,
                        millis_to_best: stats.millis_to_best,
                        wall_millis: stats.wall_millis,
                    }
                })
                .collect();
            if spec.timing {
                let total: Vec<f64> = runs.iter().map(|r| r.wall_millis).collect();
                log::info!("n={n} M={m} mode={mode}: mean total time {:.3} ms", mean_stdev(&total).0);
            }
            rows.push(aggregate(n, m, spec.alpha, mode, &runs, spec.timing));
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 11] = [
    "n", "M", "alpha", "mode", "avgErrPct", "stdevErrPct", "maxErrPct", "hits", "avgIter",
    "stdevIter", "avgTimeMs",
];

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let f = |x: f64| format!("{x:.4}");
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.capacity.to_string(),
            f(r.alpha),
            r.mode.to_string(),
            f(r.avg_err_pct),
            f(r.stdev_err_pct),
            f(r.max_err_pct),
            r.hits.to_string(),
            f(r.avg_iter),
            f(r.stdev_iter),
            r.avg_time_ms.map(f).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[BenchRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
