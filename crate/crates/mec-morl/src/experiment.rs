//! Train / evaluate / front / calibrate / simulate, shared by the binary and
//! the integration tests. Every command writes through an
//! [`ArtifactWriter`] so its outputs end up in the manifest.

use std::path::{Path, PathBuf};

use mec_morl_core::baselines::{HeuristicScheduler, LinUcbScheduler, RandomScheduler};
use mec_morl_core::nn::Network;
use mec_morl_core::pareto::{self, compare_fronts, pareto_filter, PerformancePoint};
use mec_morl_core::policy::run_episode;
use mec_morl_core::reward::calibrate_scales;
use mec_morl_core::rng::{derive_seed, stream_rng, Stream};
use mec_morl_core::sim::{init_episode, OffloadEnv};
use mec_morl_core::train::{sweep_preferences, ActionMode, NetworkScheduler, TrainConfig};
use mec_morl_core::{DecisionContext, Preference, RewardScales, Scheduler, SystemConfig};

use crate::checkpoint::{self, Checkpoint};
use crate::config_file::config_hash;
use crate::manifest::{ArtifactWriter, Manifest};
use crate::records::{self, FrontEntry, GainRow, HypervolumeRow, ResultRow};
use crate::{Failure, Result};

/// A validated system config and where it came from.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: SystemConfig,
    pub config_path: Option<String>,
    pub config_hash: String,
}

impl Context {
    pub fn new(cfg: SystemConfig, config_path: Option<String>) -> Self {
        let config_hash = config_hash(&cfg);
        Context {
            cfg,
            config_path,
            config_hash,
        }
    }

    fn manifest(&self, command: &str, seed: u64, scheme: &str, grid: Vec<f64>, out: &Path) -> Manifest {
        Manifest {
            command: command.to_string(),
            config_path: self.config_path.clone(),
            config_hash: self.config_hash.clone(),
            seed,
            scheme: scheme.to_string(),
            preference_grid: grid,
            output_dir: out.display().to_string(),
            artifacts: Vec::new(),
        }
    }

    /// Tasks per episode times the mean task size, in Mbit.
    pub fn mbits_per_episode(&self) -> Result<f64> {
        let l = self.cfg.resolved_mean_task_size()?;
        Ok(self.cfg.steps_per_episode as f64 * l / 1e6)
    }
}

pub fn checkpoint_name(k: usize, pref: Preference) -> String {
    format!("policy_{k:03}_wT{:.4}.ckpt", pref.delay)
}

pub fn log_name(k: usize) -> String {
    format!("train_log_{k:03}.csv")
}

#[derive(Debug, Clone)]
pub struct TrainPlan {
    pub tcfg: TrainConfig,
    pub grid: Vec<Preference>,
    /// Budget of every preference after the first.
    pub rest_episodes: usize,
    pub scales: RewardScales,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub checkpoints: Vec<PathBuf>,
    /// `(omega_T, message)` for every preference that failed.
    pub failures: Vec<(f64, String)>,
    pub manifest: Manifest,
}

pub fn train(
    ctx: &Context,
    plan: &TrainPlan,
    out: &Path,
    mut progress: impl FnMut(&str),
) -> Result<TrainReport> {
    plan.tcfg.validate(&ctx.cfg)?;
    let mut w = ArtifactWriter::new(out)?;
    let init = Network::init(
        ctx.cfg.num_edge_servers,
        ctx.cfg.histogram_bins,
        plan.tcfg.arch,
        plan.seed,
    )?;
    let mut checkpoints = Vec::new();
    let mut failures = Vec::new();
    let mut io_error = None;
    let mut status = String::from("omega_T,status,message\n");
    sweep_preferences(
        &ctx.cfg,
        &plan.tcfg,
        &plan.grid,
        plan.scales,
        &init,
        plan.rest_episodes,
        plan.seed,
        |k, entry| {
            let omega = entry.preference.delay;
            match &entry.outcome {
                Ok(profile) => {
                    let ck = Checkpoint {
                        network: profile.network.clone(),
                        preference: entry.preference,
                        scales: plan.scales,
                        config_hash: ctx.config_hash.clone(),
                    };
                    let written = w
                        .write(&checkpoint_name(k, entry.preference), &checkpoint::encode(&ck))
                        .and_then(|p| {
                            let log = records::training_log_csv(&profile.curve)?;
                            w.write(&log_name(k), &log)?;
                            Ok(p)
                        });
                    match written {
                        Ok(p) => checkpoints.push(p),
                        Err(e) => {
                            io_error.get_or_insert(e);
                        }
                    }
                    status.push_str(&format!("{omega:?},ok,\n"));
                    let last = profile.curve.last().map_or(f64::NAN, |c| c.mean_scalarized_return);
                    progress(&format!(
                        "omega_T={omega:.4}: {} episodes, final mean return {last:.4}",
                        profile.episodes
                    ));
                }
                Err(e) => {
                    let msg = e.to_string();
                    status.push_str(&format!("{omega:?},failed,\"{}\"\n", msg.replace('"', "'")));
                    progress(&format!("omega_T={omega:.4}: failed: {msg}"));
                    failures.push((omega, msg));
                }
            }
        },
    )?;
    if let Some(e) = io_error {
        return Err(e);
    }
    w.write("sweep_status.csv", status.as_bytes())?;
    let grid = plan.grid.iter().map(|p| p.delay).collect();
    let manifest = w.finish(ctx.manifest("train", plan.seed, "morl", grid, out))?;
    Ok(TrainReport {
        checkpoints,
        failures,
        manifest,
    })
}

/// What to evaluate.
#[derive(Debug, Clone)]
pub enum Target {
    Checkpoints(Vec<PathBuf>),
    LinUcb {
        grid: Vec<Preference>,
        scales: RewardScales,
        train_episodes: usize,
        exploration: f64,
    },
    Heuristic {
        grid: Vec<Preference>,
        scales: RewardScales,
    },
    /// Cloud probabilities.
    Random { p_grid: Vec<f64> },
}

impl Target {
    pub fn scheme(&self) -> &'static str {
        match self {
            Target::Checkpoints(_) => "morl",
            Target::LinUcb { .. } => "linucb",
            Target::Heuristic { .. } => "heuristic",
            Target::Random { .. } => "random",
        }
    }
}

fn row(ctx: &Context, scheme: &str, label: String, pref: Option<Preference>, p: PerformancePoint) -> Result<ResultRow> {
    Ok(ResultRow {
        scheme: scheme.to_string(),
        label,
        omega_t: pref.map(|w| w.delay),
        omega_e: pref.map(|w| w.energy),
        mean_delay_s: p.delay,
        mean_energy_j: p.energy,
        stderr_t: p.stderr_delay,
        stderr_e: p.stderr_energy,
        n_episodes: p.n_episodes,
        mbits_per_episode: ctx.mbits_per_episode()?,
        config_hash: ctx.config_hash.clone(),
    })
}

/// Read a checkpoint and check it was trained on this config.
pub fn load_checkpoint(ctx: &Context, path: &Path) -> Result<Checkpoint> {
    let ck = checkpoint::read(path)?;
    if ck.config_hash != ctx.config_hash {
        return Err(Failure::Data(format!(
            "{}: trained with config {} but evaluating with {}",
            path.display(),
            ck.config_hash,
            ctx.config_hash
        )));
    }
    Ok(ck)
}

/// Online LinUCB: learn for `train_episodes`, then evaluate frozen.
pub fn trained_linucb(
    cfg: &SystemConfig,
    pref: Preference,
    scales: RewardScales,
    train_episodes: usize,
    exploration: f64,
    seed: u64,
) -> Result<LinUcbScheduler> {
    let mut s = LinUcbScheduler::new(cfg, exploration, pref, scales);
    for i in 0..train_episodes {
        let mut rng = stream_rng(seed, Stream::Baseline, i as u64);
        run_episode(cfg, derive_seed(seed, Stream::Baseline, i as u64), &mut s, &mut rng, |_, _| {})?;
    }
    s.learn = false;
    Ok(s)
}

pub fn evaluate_rows(ctx: &Context, target: &Target, n_episodes: usize, seed: u64, mode: ActionMode) -> Result<Vec<ResultRow>> {
    if n_episodes == 0 {
        return Err(Failure::Usage("need at least one evaluation episode".into()));
    }
    let cfg = &ctx.cfg;
    let scheme = target.scheme();
    let mut rows = Vec::new();
    match target {
        Target::Checkpoints(paths) => {
            for path in paths {
                let ck = load_checkpoint(ctx, path)?;
                let mut s = NetworkScheduler::new(ck.network, mode);
                let p = pareto::evaluate_policy(cfg, &mut s, n_episodes, seed)?;
                let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
                rows.push(row(ctx, scheme, label, Some(ck.preference), p)?);
            }
        }
        Target::LinUcb {
            grid,
            scales,
            train_episodes,
            exploration,
        } => {
            for &w in grid {
                let mut s = trained_linucb(cfg, w, *scales, *train_episodes, *exploration, seed)?;
                let p = pareto::evaluate_policy(cfg, &mut s, n_episodes, seed)?;
                rows.push(row(ctx, scheme, format!("{:.4}", w.delay), Some(w), p)?);
            }
        }
        Target::Heuristic { grid, scales } => {
            for &w in grid {
                let mut s = HeuristicScheduler::new(w, *scales);
                let p = pareto::evaluate_policy(cfg, &mut s, n_episodes, seed)?;
                rows.push(row(ctx, scheme, format!("{:.4}", w.delay), Some(w), p)?);
            }
        }
        Target::Random { p_grid } => {
            for &pc in p_grid {
                if !(0.0..=1.0).contains(&pc) {
                    return Err(Failure::Usage(format!("cloud probability {pc} outside [0, 1]")));
                }
                let mut s = RandomScheduler::new(pc, cfg.num_edge_servers);
                let p = pareto::evaluate_policy(cfg, &mut s, n_episodes, seed)?;
                rows.push(row(ctx, scheme, format!("p={pc:.4}"), None, p)?);
            }
        }
    }
    Ok(rows)
}

pub fn evaluate(
    ctx: &Context,
    target: &Target,
    n_episodes: usize,
    seed: u64,
    mode: ActionMode,
    out: &Path,
) -> Result<(Vec<ResultRow>, Manifest)> {
    let rows = evaluate_rows(ctx, target, n_episodes, seed, mode)?;
    let mut w = ArtifactWriter::new(out)?;
    let name = format!("results_{}.csv", target.scheme());
    w.write(&name, &records::results_csv(&rows)?)?;
    let grid = rows.iter().filter_map(|r| r.omega_t).collect();
    let manifest = w.finish(ctx.manifest("evaluate", seed, target.scheme(), grid, out))?;
    Ok((rows, manifest))
}

#[derive(Debug, Clone)]
pub struct SchemeFront {
    pub scheme: String,
    pub rows: Vec<ResultRow>,
    pub front: Vec<usize>,
    pub hypervolume: f64,
}

#[derive(Debug, Clone)]
pub struct FrontReport {
    pub reference: (f64, f64),
    pub schemes: Vec<SchemeFront>,
    pub gains: Vec<GainRow>,
}

/// Group rows by scheme (first-appearance order), optionally rescaled per
/// Mbit, then filter and score them against a shared reference corner.
pub fn build_fronts(rows: Vec<ResultRow>, per_mbit: bool) -> Result<FrontReport> {
    let first = rows.first().ok_or_else(|| Failure::Usage("no result rows".into()))?;
    let (hash, mbits) = (first.config_hash.clone(), first.mbits_per_episode);
    for r in &rows {
        if r.config_hash != hash {
            return Err(Failure::Data(format!(
                "results from different configs ({} vs {hash})",
                r.config_hash
            )));
        }
        if r.mbits_per_episode != mbits {
            return Err(Failure::Data(format!(
                "results with different Mbit per episode ({} vs {mbits})",
                r.mbits_per_episode
            )));
        }
    }
    let mut groups: Vec<(String, Vec<ResultRow>)> = Vec::new();
    for mut r in rows {
        if per_mbit {
            r.mean_delay_s /= mbits;
            r.mean_energy_j /= mbits;
            r.stderr_t /= mbits;
            r.stderr_e /= mbits;
        }
        match groups.iter_mut().find(|g| g.0 == r.scheme) {
            Some(g) => g.1.push(r),
            None => groups.push((r.scheme.clone(), vec![r])),
        }
    }
    let points: Vec<Vec<PerformancePoint>> = groups
        .iter()
        .map(|g| g.1.iter().map(ResultRow::point).collect())
        .collect();
    for (g, ps) in groups.iter().zip(&points) {
        if ps.iter().any(|p| !(p.delay.is_finite() && p.energy.is_finite())) {
            return Err(Failure::Numeric(format!("non-finite point in scheme {}", g.0)));
        }
    }
    let fronts: Vec<_> = points.iter().map(|ps| pareto_filter(ps)).collect();
    let front_points: Vec<Vec<PerformancePoint>> = fronts.iter().map(|f| f.points()).collect();
    let refs: Vec<&[PerformancePoint]> = front_points.iter().map(Vec::as_slice).collect();
    let cmp = compare_fronts(&refs);
    let mut schemes = Vec::new();
    for (i, (scheme, rows)) in groups.into_iter().enumerate() {
        schemes.push(SchemeFront {
            front: fronts[i].indices(),
            hypervolume: cmp.hypervolumes[i],
            scheme,
            rows,
        });
    }
    let mut gains = Vec::new();
    for (i, a) in schemes.iter().enumerate() {
        for (j, b) in schemes.iter().enumerate() {
            if i != j {
                gains.push(GainRow {
                    scheme: a.scheme.clone(),
                    over: b.scheme.clone(),
                    gain_pct: cmp.gains[i][j].map(|g| 100.0 * g),
                });
            }
        }
    }
    Ok(FrontReport {
        reference: cmp.reference,
        schemes,
        gains,
    })
}

pub fn front(inputs: &[PathBuf], per_mbit: bool, out: &Path) -> Result<(FrontReport, Manifest)> {
    if inputs.is_empty() {
        return Err(Failure::Usage("front needs at least one results file".into()));
    }
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(records::read_results(p)?);
    }
    let hash = rows.first().map(|r| r.config_hash.clone()).unwrap_or_default();
    let report = build_fronts(rows, per_mbit)?;
    let mut w = ArtifactWriter::new(out)?;
    let mut hv = Vec::new();
    for s in &report.schemes {
        let entries: Vec<FrontEntry> = s
            .front
            .iter()
            .map(|&i| {
                let r = &s.rows[i];
                FrontEntry {
                    omega_t: r.omega_t,
                    label: r.label.clone(),
                    y_t_s: r.mean_delay_s,
                    y_e_j: r.mean_energy_j,
                    stderr_t: r.stderr_t,
                    stderr_e: r.stderr_e,
                }
            })
            .collect();
        w.write(&format!("front_{}.json", s.scheme), &records::front_json(&entries)?)?;
        let pts: Vec<PerformancePoint> = s.front.iter().map(|&i| s.rows[i].point()).collect();
        w.write(&format!("plot_{}.dat", s.scheme), &records::plot_data(&pts))?;
        hv.push(HypervolumeRow {
            scheme: s.scheme.clone(),
            hypervolume: s.hypervolume,
            ref_t: report.reference.0,
            ref_e: report.reference.1,
        });
    }
    w.write("hypervolume.csv", &records::hypervolume_csv(&hv)?)?;
    w.write("gains.csv", &records::gains_csv(&report.gains)?)?;
    let names: Vec<&str> = report.schemes.iter().map(|s| s.scheme.as_str()).collect();
    let manifest = Manifest {
        command: if per_mbit { "front --per-mbit" } else { "front" }.to_string(),
        config_path: None,
        config_hash: hash,
        seed: 0,
        scheme: names.join(","),
        preference_grid: Vec::new(),
        output_dir: out.display().to_string(),
        artifacts: Vec::new(),
    };
    let manifest = w.finish(manifest)?;
    Ok((report, manifest))
}

/// Reward scales from uniform-random episodes, written as `key = value`.
pub fn calibrate(ctx: &Context, n_episodes: usize, seed: u64, out: Option<&Path>) -> Result<RewardScales> {
    let scales = calibrate_scales(&ctx.cfg, n_episodes, seed)?;
    if let Some(dir) = out {
        let mut w = ArtifactWriter::new(dir)?;
        let text = format!("alpha_t = {:?}\nalpha_e = {:?}\n", scales.delay, scales.energy);
        w.write("scales.txt", text.as_bytes())?;
        w.finish(ctx.manifest("calibrate", seed, "random", Vec::new(), dir))?;
    }
    Ok(scales)
}

/// Parse the output of [`calibrate`].
pub fn read_scales(path: &Path) -> Result<RewardScales> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let pairs = crate::config_file::parse_pairs(&text)?;
    let get = |k: &str| -> Result<f64> {
        pairs
            .iter()
            .find(|p| p.0 == k)
            .ok_or_else(|| Failure::Data(format!("{}: missing {k}", path.display())))?
            .1
            .parse()
            .map_err(|e| Failure::Data(format!("{}: {k}: {e}", path.display())))
    };
    Ok(RewardScales::new(get("alpha_t")?, get("alpha_e")?)?)
}

pub enum TracePolicy {
    Random { p_cloud: f64 },
    Heuristic { preference: Preference, scales: RewardScales },
    Checkpoint { path: PathBuf, mode: ActionMode },
}

/// One traced episode.
pub fn simulate(ctx: &Context, policy: &TracePolicy, seed: u64, out: &Path) -> Result<Manifest> {
    let cfg = &ctx.cfg;
    let mut sched: Box<dyn Scheduler> = match policy {
        TracePolicy::Random { p_cloud } => Box::new(RandomScheduler::new(*p_cloud, cfg.num_edge_servers)),
        TracePolicy::Heuristic { preference, scales } => Box::new(HeuristicScheduler::new(*preference, *scales)),
        TracePolicy::Checkpoint { path, mode } => {
            Box::new(NetworkScheduler::new(load_checkpoint(ctx, path)?.network, *mode))
        }
    };
    let mut st = init_episode(cfg, derive_seed(seed, Stream::Environment, 0))?;
    st.enable_trace();
    let mut env = OffloadEnv::from_state(st)?;
    let mut rng = stream_rng(seed, Stream::Policy, 0);
    let mut steps = String::from("step,action,r_T,r_E\n");
    let mut k = 0;
    while !env.is_done() {
        let obs = env.observation();
        let a = {
            let ctx = DecisionContext { env: &env, obs: &obs };
            sched.select(&ctx, &mut rng)
        };
        let o = env.step(a)?;
        sched.feedback(&obs, a, o.reward);
        steps.push_str(&format!("{k},{a},{:?},{:?}\n", o.reward.delay, o.reward.energy));
        k += 1;
        if o.done {
            break;
        }
    }
    let trace = env.state().trace().unwrap_or(&[]);
    let mut w = ArtifactWriter::new(out)?;
    w.write("trace.tsv", &records::trace_text(trace))?;
    w.write("steps.csv", steps.as_bytes())?;
    let scheme = match policy {
        TracePolicy::Random { .. } => "random",
        TracePolicy::Heuristic { .. } => "heuristic",
        TracePolicy::Checkpoint { .. } => "morl",
    };
    w.finish(ctx.manifest("simulate", seed, scheme, Vec::new(), out))
}
