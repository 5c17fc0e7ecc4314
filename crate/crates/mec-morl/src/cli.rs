//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mec_morl_core::reward::calibrate_scales;
use mec_morl_core::train::{preference_grid, ActionMode, TrainConfig};
use mec_morl_core::{Preference, RewardScales, SystemConfig};

use crate::config_file;
use crate::experiment::{self, Context, Target, TracePolicy, TrainPlan};
use crate::{Failure, Result};

#[derive(Debug, Parser)]
#[command(name = "mec-morl", version, about = "Multi-objective RL task offloading for edge computing")]
pub struct Cli {
    /// `key = value` config file applied over the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Preset::Table1)]
    pub preset: Preset,
    /// Number of edge servers (overrides the preset before the config file).
    #[arg(long, global = true)]
    pub edges: Option<usize>,
    /// Run everything on one thread. Execution is already serial, so this
    /// only documents intent.
    #[arg(long, global = true)]
    pub single_thread: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Reference parameters (10 users, 100 steps).
    Table1,
    /// Two edges, four users, 50 steps, small network.
    Smoke,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one preference or sweep the grid.
    Train(TrainArgs),
    /// Evaluate checkpoints or a baseline scheme.
    Evaluate(EvaluateArgs),
    /// Pareto fronts, hypervolumes and gains from results files.
    Front(FrontArgs),
    /// Derive reward scales from uniform-random episodes.
    Calibrate(CalibrateArgs),
    /// Export the event trace of one episode.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScaleArgs {
    /// Scales file written by `calibrate`.
    #[arg(long, conflicts_with_all = ["alpha_t", "alpha_e"])]
    pub scales: Option<PathBuf>,
    #[arg(long, requires = "alpha_e")]
    pub alpha_t: Option<f64>,
    #[arg(long, requires = "alpha_t")]
    pub alpha_e: Option<f64>,
    /// Episodes used to calibrate when no scales are given.
    #[arg(long, default_value_t = 200)]
    pub calibrate_episodes: usize,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["preference", "sweep"]))]
pub struct TrainArgs {
    /// Delay weight of a single policy.
    #[arg(long)]
    pub preference: Option<f64>,
    /// Train every preference on the grid.
    #[arg(long)]
    pub sweep: bool,
    /// Grid spacing for `--sweep`.
    #[arg(long, default_value_t = 0.02)]
    pub interval: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Episodes for the first (or only) preference.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Episodes for each later preference of a sweep.
    #[arg(long)]
    pub rest_episodes: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub episodes_per_update: Option<usize>,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Linucb,
    Heuristic,
    Random,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Checkpoints to evaluate.
    #[arg(required_unless_present = "scheme", conflicts_with = "scheme")]
    pub checkpoints: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, default_value_t = 1000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Act on the most probable server instead of sampling.
    #[arg(long)]
    pub greedy: bool,
    /// Preference spacing for the LinUCB and heuristic schemes.
    #[arg(long, default_value_t = 0.02)]
    pub interval: f64,
    /// Cloud-probability spacing for the random scheme.
    #[arg(long, default_value_t = 0.1)]
    pub p_step: f64,
    /// Learning episodes per preference before LinUCB is frozen.
    #[arg(long, default_value_t = 100)]
    pub linucb_episodes: usize,
    #[arg(long, default_value_t = 1.0)]
    pub exploration: f64,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    /// Results files from `evaluate`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Divide both axes by the Mbit processed per episode.
    #[arg(long)]
    pub per_mbit: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = 200)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write `scales.txt` and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Random,
    Heuristic,
    Checkpoint,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = PolicyArg::Random)]
    pub policy: PolicyArg,
    #[arg(long, required_if_eq("policy", "checkpoint"))]
    pub checkpoint: Option<PathBuf>,
    /// Cloud probability for the random policy (default uniform).
    #[arg(long)]
    pub p_cloud: Option<f64>,
    /// Delay weight for the heuristic.
    #[arg(long, default_value_t = 0.5)]
    pub preference: f64,
    #[arg(long)]
    pub greedy: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

fn preset_config(cli: &Cli) -> SystemConfig {
    let mut cfg = match cli.preset {
        Preset::Table1 => SystemConfig::table1(8),
        Preset::Smoke => SystemConfig::smoke(),
    };
    if let Some(e) = cli.edges {
        cfg.num_edge_servers = e;
    }
    cfg
}

fn preset_train(p: Preset) -> TrainConfig {
    match p {
        Preset::Table1 => TrainConfig::default(),
        Preset::Smoke => TrainConfig::smoke(),
    }
}

/// Load the config from preset, file and `MECMORL_*` variables.
pub fn context(cli: &Cli, vars: impl IntoIterator<Item = (String, String)>) -> Result<Context> {
    let cfg = config_file::load(preset_config(cli), cli.config.as_deref(), vars)?;
    Ok(Context::new(cfg, cli.config.as_ref().map(|p| p.display().to_string())))
}

fn resolve_scales(ctx: &Context, a: &ScaleArgs, seed: u64) -> Result<RewardScales> {
    if let Some(path) = &a.scales {
        return experiment::read_scales(path);
    }
    if let (Some(t), Some(e)) = (a.alpha_t, a.alpha_e) {
        return Ok(RewardScales::new(t, e)?);
    }
    Ok(calibrate_scales(&ctx.cfg, a.calibrate_episodes, seed)?)
}

fn preference(w: f64) -> Result<Preference> {
    Preference::new(w).map_err(|e| Failure::Usage(e.to_string()))
}

fn p_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Failure::Usage(format!("p step {step} outside (0, 1]")));
    }
    let n = (1.0 / step).round() as usize;
    Ok((0..=n).map(|i| (i as f64 * step).min(1.0)).collect())
}

fn mode(greedy: bool) -> ActionMode {
    if greedy {
        ActionMode::Greedy
    } else {
        ActionMode::Sample
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = context(&cli, std::env::vars())?;
    match &cli.command {
        Command::Train(a) => {
            let mut tcfg = preset_train(cli.preset);
            if let Some(v) = a.episodes {
                tcfg.episodes = v;
            }
            if let Some(v) = a.batch {
                tcfg.batch = v;
            }
            if let Some(v) = a.learning_rate {
                tcfg.learning_rate = v;
            }
            if let Some(v) = a.episodes_per_update {
                tcfg.episodes_per_update = v;
            }
            let grid = match a.preference {
                Some(w) => vec![preference(w)?],
                None => preference_grid(a.interval)?,
            };
            let plan = TrainPlan {
                rest_episodes: a.rest_episodes.unwrap_or(tcfg.episodes),
                scales: resolve_scales(&ctx, &a.scales, a.seed)?,
                tcfg,
                grid,
                seed: a.seed,
            };
            let report = experiment::train(&ctx, &plan, &a.out, |m| eprintln!("{m}"))?;
            println!(
                "wrote {} checkpoints to {}",
                report.checkpoints.len(),
                a.out.display()
            );
            if report.checkpoints.is_empty() {
                return Err(Failure::Numeric("every preference failed to train".into()));
            }
            Ok(())
        }
        Command::Evaluate(a) => {
            let target = match a.scheme {
                None => Target::Checkpoints(a.checkpoints.clone()),
                Some(SchemeArg::Random) => Target::Random { p_grid: p_grid(a.p_step)? },
                Some(SchemeArg::Heuristic) => Target::Heuristic {
                    grid: preference_grid(a.interval)?,
                    scales: resolve_scales(&ctx, &a.scales, a.seed)?,
                },
                Some(SchemeArg::Linucb) => Target::LinUcb {
                    grid: preference_grid(a.interval)?,
                    scales: resolve_scales(&ctx, &a.scales, a.seed)?,
                    train_episodes: a.linucb_episodes,
                    exploration: a.exploration,
                },
            };
            let (rows, _) = experiment::evaluate(&ctx, &target, a.episodes, a.seed, mode(a.greedy), &a.out)?;
            for r in &rows {
                println!("{}\t{}\t{:.6}\t{:.6}", r.scheme, r.label, r.mean_delay_s, r.mean_energy_j);
            }
            Ok(())
        }
        Command::Front(a) => {
            let (report, _) = experiment::front(&a.inputs, a.per_mbit, &a.out)?;
            println!("reference ({:?}, {:?})", report.reference.0, report.reference.1);
            for s in &report.schemes {
                println!("{}\thypervolume {:?}\tfront size {}", s.scheme, s.hypervolume, s.front.len());
            }
            for g in &report.gains {
                match g.gain_pct {
                    Some(v) => println!("{} over {}: {v:+.2}%", g.scheme, g.over),
                    None => println!("{} over {}: undefined", g.scheme, g.over),
                }
            }
            Ok(())
        }
        Command::Calibrate(a) => {
            let s = experiment::calibrate(&ctx, a.episodes, a.seed, a.out.as_deref())?;
            println!("alpha_t = {:?}\nalpha_e = {:?}", s.delay, s.energy);
            Ok(())
        }
        Command::Simulate(a) => {
            let policy = match a.policy {
                PolicyArg::Random => TracePolicy::Random {
                    p_cloud: a
                        .p_cloud
                        .unwrap_or(1.0 / ctx.cfg.num_servers() as f64),
                },
                PolicyArg::Heuristic => TracePolicy::Heuristic {
                    preference: preference(a.preference)?,
                    scales: resolve_scales(&ctx, &a.scales, a.seed)?,
                },
                PolicyArg::Checkpoint => TracePolicy::Checkpoint {
                    path: a.checkpoint.clone().expect("required by clap"),
                    mode: mode(a.greedy),
                },
            };
            if let TracePolicy::Random { p_cloud } = policy {
                if !(0.0..=1.0).contains(&p_cloud) {
                    return Err(Failure::Usage(format!("cloud probability {p_cloud} outside [0, 1]")));
                }
            }
            experiment::simulate(&ctx, &policy, a.seed, &a.out)?;
            println!("wrote trace to {}", a.out.display());
            Ok(())
        }
    }
}
