use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bcpart::bench::{run_bench, write_csv, BenchSpec};
use bcpart::local_search::local_search;
use bcpart::verify::BRUTE_FORCE_LIMIT;
use bcpart::{
    brute_force_optimum, generate_instance, generate_solution, reduce_mpgsd_star, verify_solution,
    GenConfig, Instance64, SearchMode, Solution, SolverConfig,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "bcpart", version, about = "Size-constrained bi-connected graph partitioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    GrowR,
    GrowN,
    SinglePass,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a unit-disc instance with a known optimum.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance JSON; the certificate goes next to it as `<stem>.cert.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "grow-n")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long, default_value_t = 12)]
        max_exp_length: usize,
        #[arg(long, default_value_t = 9)]
        regrow_size: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 2000)]
        stagnation: usize,
        /// Solution JSON; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Build the star reduction instance for a subset-sum problem.
    Reduce {
        #[arg(long)]
        sup: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        demands: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch experiment and write CSV.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        /// CSV file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum of a tiny instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
}

fn certificate_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    out.with_file_name(format!("{stem}.cert.json"))
}

fn emit(value: serde_json::Value) -> anyhow::Result<()> {
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{value}")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate { n, m, alpha, seed, out } => {
            let cfg = GenConfig::new(n, m, alpha, seed);
            let g = generate_instance::<f64>(&cfg)?;
            g.instance.write_json(&out)?;
            let cert = certificate_path(&out);
            g.write_certificate(&cert)?;
            emit(json!({
                "instance": out,
                "certificate": cert,
                "nodes": g.instance.node_count(),
                "edges": g.instance.graph().edge_count(),
                "optimum": g.instance.known_optimum(),
                "radius": cfg.radius(),
            }))?;
        }
        Command::Solve {
            instance,
            mode,
            seed,
            p0,
            max_exp_length,
            regrow_size,
            max_iters,
            stagnation,
            out,
        } => {
            let inst = Instance64::read_json(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let config = SolverConfig {
                p0,
                max_exp_length,
                regrow_size,
                max_iterations: max_iters,
                stagnation_limit: stagnation,
                seed,
                ..SolverConfig::default()
            };
            config.validate()?;
            let solution = match mode {
                Mode::SinglePass => {
                    generate_solution(&inst, &config, &mut ChaCha8Rng::seed_from_u64(seed))
                }
                Mode::GrowR | Mode::GrowN => {
                    let mode = if matches!(mode, Mode::GrowR) { SearchMode::GrowR } else { SearchMode::GrowN };
                    let (best, stats) = local_search(&inst, &config, mode);
                    log::info!(
                        "objective {} after {} iterations (best at {}), {:.1} ms",
                        stats.best_objective,
                        stats.iterations,
                        stats.iteration_of_best,
                        stats.wall_millis
                    );
                    best
                }
            };
            match out {
                Some(path) => {
                    solution.write_json(&path, Some(seed))?;
                    emit(json!({"solution": path, "objective": solution.objective()}))?;
                }
                None => emit(serde_json::from_str(&solution.to_json_string(Some(seed))?)?)?,
            }
        }
        Command::Verify { instance, solution } => {
            let inst = Instance64::read_json(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let (sol, _) = Solution::read_json(&solution)
                .with_context(|| format!("reading {}", solution.display()))?;
            let report = verify_solution(&inst, &sol)?;
            let violations: Vec<_> = report
                .violations
                .iter()
                .map(|v| json!({"kind": v.kind.to_string(), "subgraph": v.subgraph, "detail": v.detail}))
                .collect();
            emit(json!({
                "feasible": report.feasible(),
                "objective": sol.objective(),
                "violations": violations,
            }))?;
            if !report.feasible() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Reduce { sup, demands, out } => {
            let (inst, optimum) = reduce_mpgsd_star(sup, &demands)?;
            inst.write_json(&out)?;
            emit(json!({
                "instance": out,
                "nodes": inst.node_count(),
                "capacity": inst.capacity(),
                "oracle": optimum,
            }))?;
        }
        Command::Bench { spec, out } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: BenchSpec = serde_json::from_str(&text).context("parsing bench spec")?;
            let rows = run_bench(&spec)?;
            match out {
                Some(path) => write_csv(&rows, fs::File::create(&path)?)?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
        }
        Command::Oracle { instance } => {
            let inst = Instance64::read_json(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            if inst.node_count() > BRUTE_FORCE_LIMIT {
                bail!("oracle needs at most {BRUTE_FORCE_LIMIT} nodes, got {}", inst.node_count());
            }
            emit(json!({"optimum": brute_force_optimum(&inst)?}))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let msg = json!({"error": format!("{e:#}")});
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
