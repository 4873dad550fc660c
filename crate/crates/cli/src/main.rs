//! Command-line front end: scenario generation, single planner runs, the
//! benchmark suite, and the store-share profile report.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mortonrrt::bench::{
    emit_csv, emit_times_csv, geomean, profile_shares, render_report, run_suite, SuiteConfig,
};
use mortonrrt::{
    generate_synthetic_with, load_scenario, morton, plan, save_scenario, CostModel, PlanResult,
    PlannerConfig, Variant,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "mortonrrt",
    version,
    about = "Space-time RRT planner with Morton-store memoization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario file
    Gen(GenArgs),
    /// Run the planner once on a scenario file
    Plan(PlanArgs),
    /// Run the cross-configuration benchmark suite and emit CSV
    Bench(BenchArgs),
    /// Report the software store's share of modeled operations per config
    Profile(ProfileArgs),
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

#[derive(Args)]
struct GenArgs {
    /// Map edge length in map units
    #[arg(long, default_value_t = 100.0)]
    edge: f64,
    #[arg(long, default_value_t = 20)]
    timesteps: u32,
    #[arg(long, default_value_t = 5)]
    obstacles: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Obstacle disc radius
    #[arg(long, default_value_t = mortonrrt::scenario::DEFAULT_OBSTACLE_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = mortonrrt::scenario::DEFAULT_GOAL_RADIUS)]
    goal_radius: f64,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file produced by `gen`
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "baseline", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Masked low bits of the Morton code
    #[arg(long, default_value_t = morton::DEFAULT_MASK_BITS)]
    k: u32,
    /// Quantization scale in subunits per map unit (power of two)
    #[arg(long, default_value_t = morton::DEFAULT_SCALE)]
    scale: u32,
    /// Store capacity in bytes; 0 disables the store
    #[arg(long, default_value_t = 32 * 1024)]
    store_capacity: usize,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    time_weight: f64,
    /// Sample spacing for exact segment collision checks
    #[arg(long, default_value_t = mortonrrt::collision::DEFAULT_COLLISION_SPACING)]
    spacing: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: u64,
    #[arg(long, default_value_t = 0.05)]
    goal_bias: f64,
    /// TOML file overriding cost model fields
    #[arg(long)]
    cost_model: Option<PathBuf>,
    /// Write the run document here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Map edge lengths of the grid
    #[arg(long, value_delimiter = ',', default_values_t = [100.0, 200.0])]
    edge: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [10u32, 100])]
    timesteps: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [5u32, 10, 20])]
    obstacles: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    trials: u32,
    /// Trim to 3 trials per config for a fast run
    #[arg(long)]
    quick: bool,
    /// Base seed the per-trial scenario and planner seeds derive from
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = morton::DEFAULT_MASK_BITS)]
    k: u32,
    #[arg(long, default_value_t = morton::DEFAULT_SCALE)]
    scale: u32,
    #[arg(long, default_value_t = 32 * 1024)]
    store_capacity: usize,
    #[arg(long)]
    cost_model: Option<PathBuf>,
}

impl GridArgs {
    fn suite(&self, variants: Vec<Variant>) -> SuiteConfig {
        let mut sc = SuiteConfig {
            edge_lengths: self.edge.clone(),
            timestep_counts: self.timesteps.clone(),
            obstacle_counts: self.obstacles.clone(),
            trials: self.trials,
            base_seed: self.seed,
            variants,
            mask_bits: self.k,
            scale: self.scale,
            store_capacity_bytes: self.store_capacity,
            ..SuiteConfig::default()
        };
        if self.quick {
            sc = sc.quick();
        }
        sc
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',', value_parser = parse_variant,
          default_values_t = [Variant::Baseline, Variant::SwMorton, Variant::HwMorton])]
    variants: Vec<Variant>,
    /// Deterministic results CSV
    #[arg(long)]
    out: PathBuf,
    /// Optional wall-clock CSV (not byte-stable across runs)
    #[arg(long)]
    times: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    grid: GridArgs,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Plan(args) => run_plan(args),
        Command::Bench(args) => bench(args),
        Command::Profile(args) => profile(args),
    }
}

fn load_cost_model(path: &Option<PathBuf>) -> Result<CostModel> {
    match path {
        Some(p) => {
            CostModel::from_file(p).with_context(|| format!("loading cost model {}", p.display()))
        }
        None => Ok(CostModel::default()),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let scenario = generate_synthetic_with(
        args.edge,
        args.timesteps,
        args.obstacles,
        args.seed,
        args.radius,
        args.goal_radius,
    )?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            save_scenario(&scenario, BufWriter::new(file))?;
            println!(
                "wrote {} ({} obstacles, edge {}, {} timesteps)",
                path.display(),
                scenario.obstacles.len(),
                scenario.edge_length,
                scenario.timesteps,
            );
        }
        None => save_scenario(&scenario, std::io::stdout().lock())?,
    }
    Ok(())
}

fn render_plan_document(args: &PlanArgs, result: &PlanResult) -> String {
    use std::fmt::Write as _;
    let stats = &result.stats;
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", args.scenario.display());
    let _ = writeln!(out, "variant: {}", args.variant);
    let _ = writeln!(out, "seed: {}", args.seed);
    let _ = writeln!(
        out,
        "result: {}",
        if result.reached() {
            "reached"
        } else {
            "unreachable"
        }
    );
    let _ = writeln!(out, "iterations: {}", stats.iterations);
    let _ = writeln!(out, "extensions: {}", stats.extensions);
    let _ = writeln!(out, "nodes: {}", stats.nodes);
    let _ = writeln!(out, "obstacles: {}", stats.obstacle_count);
    let _ = writeln!(out, "alpha: {}", stats.alpha);
    let _ = writeln!(out, "beta: {}", stats.beta);
    let _ = writeln!(out, "nn_store_hits: {}", stats.nn_store_hits);
    let _ = writeln!(out, "col_store_hits: {}", stats.col_store_hits);
    let _ = writeln!(out, "modeled_ops: {}", stats.modeled_ops);
    let _ = writeln!(out, "modeled_store_ops: {}", stats.modeled_store_ops);
    let _ = writeln!(out, "modeled_cycles: {}", stats.modeled_cycles);
    let _ = writeln!(out, "wall_time_s: {:.6}", stats.wall_time_s);
    if let Some(len) = stats.path_len {
        let _ = writeln!(out, "path_len: {len}");
    }
    if let Some(path) = &result.path {
        let _ = writeln!(out, "path:");
        for p in path {
            let _ = writeln!(out, "  {} {} {}", p.x, p.y, p.t);
        }
    }
    out
}

fn run_plan(args: PlanArgs) -> Result<()> {
    let scenario = {
        let file = File::open(&args.scenario)
            .with_context(|| format!("opening {}", args.scenario.display()))?;
        load_scenario(file)?
    };
    let cost = load_cost_model(&args.cost_model)?;
    let mut cfg = PlannerConfig::new(args.variant, args.seed);
    cfg.step = args.step;
    cfg.time_weight = args.time_weight;
    cfg.collision_spacing = args.spacing;
    cfg.max_iters = args.max_iters;
    cfg.goal_bias = args.goal_bias;
    cfg.store.capacity_bytes = args.store_capacity;
    cfg.store.quant = morton::QuantConfig::new(args.scale, args.k)?;
    let result = plan(&scenario, &cfg, &cost)?;
    let document = render_plan_document(&args, &result);
    match &args.out {
        Some(path) => {
            std::fs::write(path, document).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{document}"),
    }
    Ok(())
}

fn write_csv(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut sink = BufWriter::new(file);
    write(&mut sink)?;
    sink.flush()?;
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let cost = load_cost_model(&args.grid.cost_model)?;
    let sc = args.grid.suite(args.variants);
    let outcome = run_suite(&sc, &cost)?;
    write_csv(&args.out, |sink| {
        emit_csv(&outcome.rows, Some(&outcome.summary), sink)?;
        Ok(())
    })?;
    if let Some(times) = &args.times {
        write_csv(times, |sink| {
            emit_times_csv(&outcome.rows, sink)?;
            Ok(())
        })?;
    }
    print!("{}", render_report(&outcome));
    println!("results: {}", args.out.display());
    Ok(())
}

fn profile(args: ProfileArgs) -> Result<()> {
    let cost = load_cost_model(&args.grid.cost_model)?;
    let sc = args.grid.suite(vec![Variant::SwMorton]);
    let outcome = run_suite(&sc, &cost)?;
    let shares = profile_shares(&outcome);
    println!("{:<16} {:>12}", "config", "store share");
    for (config, share) in &shares {
        println!("{config:<16} {:>11.1}%", share * 100.0);
    }
    let values: Vec<f64> = shares.iter().map(|(_, s)| *s).collect();
    if let Ok(g) = geomean(&values) {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0f64, f64::max);
        println!(
            "geomean {:.1}%  min {:.1}%  max {:.1}%",
            g * 100.0,
            lo * 100.0,
            hi * 100.0
        );
    }
    Ok(())
}
