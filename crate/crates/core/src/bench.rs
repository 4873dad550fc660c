//! The evaluation pipeline: a cross-configuration suite with paired trials,
//! per-config aggregates, geometric means, and CSV emission.
//!
//! Every (config, trial) pair generates one scenario and one planner seed,
//! shared by all variants, so speedups and length ratios compare like with
//! like. The CSV written by [`emit_csv`] contains only deterministic fields
//! (modeled costs, counters, hit fractions); wall-clock measurements live in
//! the run report and the optional timings CSV, which are not byte-stable by
//! nature.

use crate::cost::CostModel;
use crate::memostore::StoreConfig;
use crate::morton;
use crate::planner::{plan, PlanError, PlanStats, PlannerConfig, Variant};
use crate::scenario::{generate_synthetic_with, ScenarioError};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("geomean needs a non-empty list of positive values")]
    GeomeanDomain,
    #[error("store share is undefined for a run with zero modeled ops")]
    ShareDomain,
    #[error("speedup is undefined against zero modeled cycles")]
    SpeedupDomain,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Morton(#[from] morton::MortonError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One point of the evaluation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigPoint {
    pub id: String,
    pub edge: f64,
    pub timesteps: u32,
    pub obstacles: u32,
}

/// The suite: a grid of map sizes, horizons, and obstacle counts, with a
/// fixed trial count per point.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub edge_lengths: Vec<f64>,
    pub timestep_counts: Vec<u32>,
    pub obstacle_counts: Vec<u32>,
    pub trials: u32,
    pub base_seed: u64,
    pub variants: Vec<Variant>,
    pub mask_bits: u32,
    pub scale: u32,
    pub store_capacity_bytes: usize,
    pub step: f64,
    pub time_weight: f64,
    pub collision_spacing: f64,
    pub max_iters: u64,
    pub goal_bias: f64,
    pub obstacle_radius: f64,
    pub goal_radius: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let planner = PlannerConfig::new(Variant::Baseline, 0);
        let store = StoreConfig::default();
        SuiteConfig {
            edge_lengths: vec![100.0, 200.0],
            timestep_counts: vec![10, 100],
            obstacle_counts: vec![5, 10, 20],
            trials: 10,
            base_seed: 1,
            variants: Variant::ALL.to_vec(),
            mask_bits: 18,
            scale: morton::DEFAULT_SCALE,
            store_capacity_bytes: store.capacity_bytes,
            step: planner.step,
            time_weight: planner.time_weight,
            collision_spacing: planner.collision_spacing,
            max_iters: planner.max_iters,
            goal_bias: planner.goal_bias,
            obstacle_radius: crate::scenario::DEFAULT_OBSTACLE_RADIUS,
            goal_radius: crate::scenario::DEFAULT_GOAL_RADIUS,
        }
    }
}

impl SuiteConfig {
    /// Trimmed trial count for a fast desk run.
    pub fn quick(mut self) -> Self {
        self.trials = 3;
        self
    }

    /// The grid in emission order: edge, then timesteps, then obstacles.
    pub fn configs(&self) -> Vec<ConfigPoint> {
        let mut out = Vec::new();
        for &edge in &self.edge_lengths {
            for &timesteps in &self.timestep_counts {
                for &obstacles in &self.obstacle_counts {
                    out.push(ConfigPoint {
                        id: format!("l{edge}-t{timesteps}-o{obstacles}"),
                        edge,
                        timesteps,
                        obstacles,
                    });
                }
            }
        }
        out
    }

    fn planner_config(&self, variant: Variant, seed: u64) -> Result<PlannerConfig, BenchError> {
        let mut cfg = PlannerConfig::new(variant, seed);
        cfg.step = self.step;
        cfg.time_weight = self.time_weight;
        cfg.collision_spacing = self.collision_spacing;
        cfg.max_iters = self.max_iters;
        cfg.goal_bias = self.goal_bias;
        cfg.store.capacity_bytes = self.store_capacity_bytes;
        cfg.store.quant = morton::QuantConfig::new(self.scale, self.mask_bits)?;
        Ok(cfg)
    }
}

/// One planner run inside the suite.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub config: ConfigPoint,
    pub config_index: usize,
    pub variant: Variant,
    pub trial: u32,
    pub scenario_seed: u64,
    pub plan_seed: u64,
    pub success: bool,
    pub stats: PlanStats,
    pub store_share: f64,
}

/// Per-config, per-variant aggregate over trials.
#[derive(Clone, Debug, PartialEq)]
pub struct VariantAgg {
    pub variant: Variant,
    pub trials: u32,
    pub successes: u32,
    pub mean_wall_s: f64,
    pub mean_modeled_ops: f64,
    pub mean_modeled_cycles: f64,
    /// Mean over successful trials; `None` when none succeeded.
    pub mean_path_len: Option<f64>,
    pub mean_alpha: f64,
    pub mean_beta: f64,
    pub mean_store_share: f64,
    /// Baseline mean cycles over this variant's mean cycles.
    pub modeled_speedup: Option<f64>,
    pub wall_speedup: Option<f64>,
    /// This variant's mean length over the baseline's.
    pub length_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigSummary {
    pub config: ConfigPoint,
    pub per_variant: Vec<VariantAgg>,
}

/// Cross-config geomeans, one entry per non-baseline variant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteSummary {
    pub per_config: Vec<ConfigSummary>,
    pub modeled_speedup_geomean: Vec<(Variant, f64)>,
    pub wall_speedup_geomean: Vec<(Variant, f64)>,
    pub length_ratio_geomean: Vec<(Variant, f64)>,
    pub store_share_geomean: Vec<(Variant, f64)>,
}

pub struct SuiteOutcome {
    pub rows: Vec<BenchRow>,
    pub summary: SuiteSummary,
}

/// exp(mean(log v)) over strictly positive values.
pub fn geomean(values: &[f64]) -> Result<f64, BenchError> {
    if values.is_empty() || !values.iter().all(|&v| v > 0.0) {
        return Err(BenchError::GeomeanDomain);
    }
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    Ok((log_sum / values.len() as f64).exp())
}

/// Fraction of a run's modeled ops spent on store lookups and updates.
pub fn store_share(stats: &PlanStats) -> Result<f64, BenchError> {
    if stats.modeled_ops == 0 {
        return Err(BenchError::ShareDomain);
    }
    Ok(stats.modeled_store_ops as f64 / stats.modeled_ops as f64)
}

/// Modeled cycles of `a` over modeled cycles of `b`: how much faster `b` is.
pub fn modeled_speedup(a: &PlanStats, b: &PlanStats) -> Result<f64, BenchError> {
    if b.modeled_cycles <= 0.0 {
        return Err(BenchError::SpeedupDomain);
    }
    Ok(a.modeled_cycles / b.modeled_cycles)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-(config, trial) seed; `salt` separates the scenario
/// stream from the planner stream.
fn derive_seed(base: u64, config_index: usize, trial: u32, salt: u64) -> u64 {
    splitmix64(base ^ splitmix64((config_index as u64) << 32 | trial as u64) ^ splitmix64(salt))
}

/// Runs the whole grid. Trials that exhaust their iteration budget are
/// recorded with `success = false`; they stay in the time and cycle averages
/// but are excluded from length statistics.
pub fn run_suite(sc: &SuiteConfig, cm: &CostModel) -> Result<SuiteOutcome, BenchError> {
    let configs = sc.configs();
    let mut rows = Vec::with_capacity(configs.len() * sc.variants.len() * sc.trials as usize);
    for (config_index, config) in configs.iter().enumerate() {
        for trial in 0..sc.trials {
            let scenario_seed = derive_seed(sc.base_seed, config_index, trial, 0x5ce9);
            let plan_seed = derive_seed(sc.base_seed, config_index, trial, 0x91a7);
            let scenario = generate_synthetic_with(
                config.edge,
                config.timesteps,
                config.obstacles,
                scenario_seed,
                sc.obstacle_radius,
                sc.goal_radius,
            )?;
            for &variant in &sc.variants {
                let cfg = sc.planner_config(variant, plan_seed)?;
                let result = plan(&scenario, &cfg, cm)?;
                let share = store_share(&result.stats).unwrap_or(0.0);
                rows.push(BenchRow {
                    config: config.clone(),
                    config_index,
                    variant,
                    trial,
                    scenario_seed,
                    plan_seed,
                    success: result.reached(),
                    stats: result.stats,
                    store_share: share,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.config_index, a.variant, a.trial).cmp(&(b.config_index, b.variant, b.trial))
    });
    let summary = summarize(&configs, &sc.variants, &rows);
    Ok(SuiteOutcome { rows, summary })
}

fn summarize(configs: &[ConfigPoint], variants: &[Variant], rows: &[BenchRow]) -> SuiteSummary {
    let mean = |values: &[f64]| values.iter().sum::<f64>() / values.len().max(1) as f64;
    let aggregate = |config_index: usize, variant: Variant| -> Option<VariantAgg> {
        let trials: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.config_index == config_index && r.variant == variant)
            .collect();
        if trials.is_empty() {
            return None;
        }
        let wall: Vec<f64> = trials.iter().map(|r| r.stats.wall_time_s).collect();
        let cycles: Vec<f64> = trials.iter().map(|r| r.stats.modeled_cycles).collect();
        let ops: Vec<f64> = trials.iter().map(|r| r.stats.modeled_ops as f64).collect();
        let lens: Vec<f64> = trials.iter().filter_map(|r| r.stats.path_len).collect();
        let alphas: Vec<f64> = trials.iter().map(|r| r.stats.alpha).collect();
        let betas: Vec<f64> = trials.iter().map(|r| r.stats.beta).collect();
        let shares: Vec<f64> = trials.iter().map(|r| r.store_share).collect();
        Some(VariantAgg {
            variant,
            trials: trials.len() as u32,
            successes: trials.iter().filter(|r| r.success).count() as u32,
            mean_wall_s: mean(&wall),
            mean_modeled_ops: mean(&ops),
            mean_modeled_cycles: mean(&cycles),
            mean_path_len: (!lens.is_empty()).then(|| mean(&lens)),
            mean_alpha: mean(&alphas),
            mean_beta: mean(&betas),
            mean_store_share: mean(&shares),
            modeled_speedup: None,
            wall_speedup: None,
            length_ratio: None,
        })
    };

    let mut per_config = Vec::new();
    for (config_index, config) in configs.iter().enumerate() {
        let baseline = aggregate(config_index, Variant::Baseline);
        let mut per_variant = Vec::new();
        for &variant in variants {
            let Some(mut agg) = aggregate(config_index, variant) else {
                continue;
            };
            if variant != Variant::Baseline {
                if let Some(base) = &baseline {
                    if agg.mean_modeled_cycles > 0.0 {
                        agg.modeled_speedup =
                            Some(base.mean_modeled_cycles / agg.mean_modeled_cycles);
                    }
                    if agg.mean_wall_s > 0.0 {
                        agg.wall_speedup = Some(base.mean_wall_s / agg.mean_wall_s);
                    }
                    if let (Some(base_len), Some(len)) = (base.mean_path_len, agg.mean_path_len) {
                        if base_len > 0.0 {
                            agg.length_ratio = Some(len / base_len);
                        }
                    }
                }
            }
            per_variant.push(agg);
        }
        per_config.push(ConfigSummary {
            config: config.clone(),
            per_variant,
        });
    }

    let mut summary = SuiteSummary {
        per_config,
        ..SuiteSummary::default()
    };
    for &variant in variants {
        if variant == Variant::Baseline {
            continue;
        }
        let collect = |pick: fn(&VariantAgg) -> Option<f64>| -> Vec<f64> {
            summary
                .per_config
                .iter()
                .flat_map(|c| c.per_variant.iter())
                .filter(|a| a.variant == variant)
                .filter_map(pick)
                .collect()
        };
        if let Ok(g) = geomean(&collect(|a| a.modeled_speedup)) {
            summary.modeled_speedup_geomean.push((variant, g));
        }
        if let Ok(g) = geomean(&collect(|a| a.wall_speedup)) {
            summary.wall_speedup_geomean.push((variant, g));
        }
        if let Ok(g) = geomean(&collect(|a| a.length_ratio)) {
            summary.length_ratio_geomean.push((variant, g));
        }
        if let Ok(g) = geomean(&collect(|a| Some(a.mean_store_share))) {
            summary.store_share_geomean.push((variant, g));
        }
    }
    summary
}

/// Column order of the deterministic results CSV.
pub const CSV_COLUMNS: &[&str] = &[
    "config",
    "edge",
    "timesteps",
    "obstacles",
    "variant",
    "trial",
    "scenario_seed",
    "plan_seed",
    "success",
    "iterations",
    "extensions",
    "nodes",
    "alpha",
    "beta",
    "nn_store_hits",
    "col_store_hits",
    "col_store_no_collision_hits",
    "store_nn_lookups",
    "store_col_lookups",
    "store_updates",
    "nn_queries",
    "nn_visits",
    "collision_samples",
    "samples",
    "steers",
    "modeled_ops",
    "modeled_store_ops",
    "modeled_cycles",
    "store_share",
    "path_len",
];

/// Writes the header, one line per row, and `#`-prefixed summary lines.
/// Contains no wall-clock fields, so reruns with the same inputs emit
/// identical bytes.
pub fn emit_csv<W: Write>(
    rows: &[BenchRow],
    summary: Option<&SuiteSummary>,
    mut sink: W,
) -> Result<(), BenchError> {
    writeln!(sink, "{}", CSV_COLUMNS.join(","))?;
    for row in rows {
        let s = &row.stats;
        let c = &s.counters;
        let path_len = s.path_len.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.config.id,
            row.config.edge,
            row.config.timesteps,
            row.config.obstacles,
            row.variant,
            row.trial,
            row.scenario_seed,
            row.plan_seed,
            row.success,
            s.iterations,
            s.extensions,
            s.nodes,
            s.alpha,
            s.beta,
            s.nn_store_hits,
            s.col_store_hits,
            s.col_store_no_collision_hits,
            c.store_nn_lookups,
            c.store_col_lookups,
            c.store_updates,
            c.nn_queries,
            c.nn_visits,
            c.collision_samples,
            c.samples,
            c.steers,
            s.modeled_ops,
            s.modeled_store_ops,
            s.modeled_cycles,
            row.store_share,
            path_len,
        )?;
    }
    if rows.is_empty() {
        return Ok(());
    }
    if let Some(summary) = summary {
        for (variant, g) in &summary.modeled_speedup_geomean {
            writeln!(sink, "# geomean,modeled_speedup,{variant},{g}")?;
        }
        for (variant, g) in &summary.length_ratio_geomean {
            writeln!(sink, "# geomean,length_ratio,{variant},{g}")?;
        }
        for (variant, g) in &summary.store_share_geomean {
            writeln!(sink, "# geomean,store_share,{variant},{g}")?;
        }
    }
    Ok(())
}

/// Wall-clock companion CSV; not byte-stable across runs.
pub fn emit_times_csv<W: Write>(rows: &[BenchRow], mut sink: W) -> Result<(), BenchError> {
    writeln!(sink, "config,variant,trial,wall_time_s")?;
    for row in rows {
        writeln!(
            sink,
            "{},{},{},{}",
            row.config.id, row.variant, row.trial, row.stats.wall_time_s
        )?;
    }
    Ok(())
}

/// Human-readable run report: per-config means plus the cross-config
/// geomeans, with the reference comparison numbers for orientation.
pub fn render_report(outcome: &SuiteOutcome) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<10} {:>5} {:>10} {:>14} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "config",
        "variant",
        "ok",
        "wall ms",
        "cycles",
        "speedup",
        "wall x",
        "len x",
        "alpha",
        "beta"
    );
    for config in &outcome.summary.per_config {
        for agg in &config.per_variant {
            let fmt_opt =
                |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<16} {:<10} {:>2}/{:<2} {:>10.2} {:>14.0} {:>8} {:>8} {:>8} {:>8.3} {:>8.3}",
                config.config.id,
                agg.variant.to_string(),
                agg.successes,
                agg.trials,
                agg.mean_wall_s * 1e3,
                agg.mean_modeled_cycles,
                fmt_opt(agg.modeled_speedup),
                fmt_opt(agg.wall_speedup),
                fmt_opt(agg.length_ratio),
                agg.mean_alpha,
                agg.mean_beta,
            );
        }
    }
    let render_geo = |label: &str, pairs: &[(Variant, f64)], reference: &str| {
        let mut line = format!("geomean {label}:");
        for (variant, g) in pairs {
            line.push_str(&format!(" {variant} {g:.2}x"));
        }
        if !reference.is_empty() {
            line.push_str(&format!(" ({reference})"));
        }
        line
    };
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{}",
        render_geo(
            "modeled speedup",
            &outcome.summary.modeled_speedup_geomean,
            "reference: sw 2.28x, hw 8x",
        )
    );
    let _ = writeln!(
        out,
        "{}",
        render_geo(
            "wall speedup",
            &outcome.summary.wall_speedup_geomean,
            "reference: sw 1.96x",
        )
    );
    let _ = writeln!(
        out,
        "{}",
        render_geo(
            "length ratio",
            &outcome.summary.length_ratio_geomean,
            "reference: sw 1.42x, hw 1.65x",
        )
    );
    let _ = writeln!(
        out,
        "{}",
        render_geo("store share", &outcome.summary.store_share_geomean, "")
    );
    out
}

/// Per-config software store share, for the profile report.
pub fn profile_shares(outcome: &SuiteOutcome) -> Vec<(String, f64)> {
    outcome
        .summary
        .per_config
        .iter()
        .filter_map(|c| {
            c.per_variant
                .iter()
                .find(|a| a.variant == Variant::SwMorton)
                .map(|a| (c.config.id.clone(), a.mean_store_share))
        })
        .collect()
}
