use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bmrf::decomp::{build_cover, solve_decomposition, DualConfig, IterationRecord};
use bmrf::exact::{solve_chain, solve_unary};
use bmrf::oracle::{brute_force, default_seeds, generate, greedy_track, InstanceKind};
use bmrf::rounding::OrderKind;
use bmrf::{load_instance, save_instance, BottleneckInstance, Execution};

#[derive(Parser)]
#[command(name = "bmrf", version, about = "Bottleneck MRF labeling solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print one JSON record.
    Solve(SolveArgs),
    /// Write a generated instance.
    Generate {
        /// e.g. `random_grid(3,3,3)`, `random_chain(10,4)`, `counterexample(1,0.5)`
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Validate an instance file.
    Check {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Order::RowMajor)]
    order: Order,
    /// JSON lines, one per dual iteration (decomp only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Worker threads; falls back to BMRF_THREADS, then 1.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Unary,
    Chain,
    Decomp,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    RowMajor,
    Bfs,
}

#[derive(Serialize)]
struct Record {
    method: &'static str,
    energy: f64,
    lower_bound: Option<f64>,
    gap: Option<f64>,
    bottleneck: f64,
    labeling: Vec<usize>,
    wall_time_ms: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct TraceLine {
    iter: usize,
    bound: f64,
    best_bound: f64,
    step: f64,
}

#[derive(Serialize)]
struct Summary {
    nodes: usize,
    edges: usize,
    total_labels: usize,
    bottleneck_values: usize,
    zeta: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let threads = thread_count(args.threads)?;
            with_threads(threads, || solve(&args, threads))
        }
        Command::Generate { kind, seed, output } => {
            let kind: InstanceKind = kind.parse()?;
            let inst = generate(kind, seed)?;
            save_instance(&inst, &output).with_context(|| format!("writing {}", output.display()))
        }
        Command::Check { input } => {
            let inst = load(&input)?;
            let summary = Summary {
                nodes: inst.node_count(),
                edges: inst.graph().edge_count(),
                total_labels: inst.total_labels(),
                bottleneck_values: inst.bottleneck_values().values().len(),
                zeta: format!("{:?}", inst.zeta()),
            };
            println!("{}", serde_json::to_string(&summary)?);
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<BottleneckInstance> {
    load_instance(path).with_context(|| format!("loading {}", path.display()))
}

fn thread_count(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("BMRF_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("BMRF_THREADS=`{v}` is not a count"))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        bail!("thread count must be positive");
    }
    Ok(n)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: usize, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f()
}

fn solve(args: &SolveArgs, threads: usize) -> Result<()> {
    let inst = load(&args.input)?;
    let exec = if threads > 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let start = Instant::now();
    let mut record = match args.method {
        Method::Brute => {
            let r = brute_force(&inst)?;
            exact_record("brute", r.energy, r.bottleneck, r.labeling.0)
        }
        Method::Unary => {
            let s = solve_unary(&inst)?;
            exact_record("unary", s.energy, s.bottleneck, s.labeling.0)
        }
        Method::Chain => {
            let s = solve_chain(&inst)?;
            exact_record("chain", s.energy, s.bottleneck, s.labeling.0)
        }
        Method::Greedy => {
            let x = greedy_track(&inst, &default_seeds(&inst))?;
            Record {
                method: "greedy",
                energy: inst.evaluate_energy(&x)?,
                lower_bound: None,
                gap: None,
                bottleneck: inst.bottleneck_of(&x)?,
                labeling: x.0,
                wall_time_ms: 0.0,
                iterations: 0,
            }
        }
        Method::Decomp => {
            if args.tol.is_nan() || args.tol < 0.0 {
                bail!("--tol must be non-negative");
            }
            let cover = build_cover(inst.graph())?;
            let config = DualConfig {
                max_iters: args.max_iters,
                tol: args.tol,
                order: match args.order {
                    Order::RowMajor => OrderKind::RowMajor,
                    Order::Bfs => OrderKind::Bfs,
                },
                exec,
                ..DualConfig::default()
            };
            let s = solve_decomposition(&inst, &cover, &config)?;
            if let Some(path) = &args.trace {
                write_trace(path, &s.report.trace)?;
            }
            Record {
                method: "decomp",
                energy: s.energy,
                lower_bound: Some(s.report.lower_bound),
                gap: Some(s.gap),
                bottleneck: inst.bottleneck_of(&s.labeling)?,
                labeling: s.labeling.0,
                wall_time_ms: 0.0,
                iterations: s.report.iterations,
            }
        }
    };
    record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn exact_record(
    method: &'static str,
    energy: f64,
    bottleneck: f64,
    labeling: Vec<usize>,
) -> Record {
    Record {
        method,
        energy,
        lower_bound: None,
        gap: Some(0.0),
        bottleneck,
        labeling,
        wall_time_ms: 0.0,
        iterations: 0,
    }
}

fn write_trace(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for r in trace {
        let line = TraceLine {
            iter: r.iter,
            bound: r.bound,
            best_bound: r.best_bound,
            step: r.step,
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    out.flush()?;
    Ok(())
}
