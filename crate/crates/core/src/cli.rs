//! `safebench` command-line front end.
//!
//! Exit status: 0 on success, 1 on runtime failure, 2 on usage errors.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::agents::{run_experiment, RunConfig};
use crate::analysis::{
    curve_rows, curves_to_csv, part_grids, render_curves_svg, render_heatmap_svg, HeatmapGrid,
    DEFAULT_RESOLUTION,
};
use crate::circle2d::{EnvConfig, Geometry};
use crate::metrics::{aggregate_rows, rows_to_csv, MetricReport, ReportSettings};
use crate::rollout_log::{group_rollouts, read_log_file, LoggedEpisode};
use crate::server::{serve_stream, serve_tcp};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "safebench", version, about = "Circle2D safe-exploration benchmark tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run experiments and write one log per seed plus a manifest.
    Run(RunArgs),
    /// Compute the metric table from logs.
    Metrics(MetricsArgs),
    /// Render per-part visitation heatmaps.
    Heatmap(HeatmapArgs),
    /// Emit per-rollout training curves.
    Curves(CurvesArgs),
    /// Serve environments over TCP or stdio.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = "SAFEBENCH_LOG_DIR", default_value = "runs")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run configuration (flat environment keys plus `policy` and `experiment`).
    #[arg(long)]
    config: PathBuf,
    /// Number of seeds; seeds 0..N are run.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Override the environment level.
    #[arg(long)]
    level: Option<u8>,
    /// Override the policy's cost limit.
    #[arg(long = "cost-limit")]
    cost_limit: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct LogInputs {
    /// Log files, or directories whose `.jsonl` files are all used.
    #[arg(required = true)]
    logs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    inputs: LogInputs,
    /// EMCC tail levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    alpha: Vec<f64>,
    /// CVaR levels for the cost return, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    cvar: Vec<f64>,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long = "cost-limit", default_value_t = 5.0)]
    cost_limit: f64,
    /// Evaluation uses the last N episodes of each log.
    #[arg(long = "eval-episodes", default_value_t = 100)]
    eval_episodes: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct HeatmapArgs {
    #[command(flatten)]
    inputs: LogInputs,
    /// Environment level whose default geometry applies.
    #[arg(long)]
    level: Option<u8>,
    /// Run or environment configuration describing the geometry.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct CurvesArgs {
    #[command(flatten)]
    inputs: LogInputs,
    #[arg(long = "cost-limit", default_value_t = 5.0)]
    cost_limit: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 7878)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Default environment configuration for sessions.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Serve a single session on standard input/output instead of TCP.
    #[arg(long)]
    stdio: bool,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_run_config(path: &Path) -> Result<RunConfig> {
    RunConfig::from_json(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut config = load_run_config(&args.config)?;
    if let Some(level) = args.level {
        config.env.level = level;
        config.env.validate()?;
    }
    if let Some(limit) = args.cost_limit {
        config.policy.cost_limit = limit;
        config.policy.validate()?;
    }
    if args.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    fs::create_dir_all(&args.out.out)
        .with_context(|| format!("creating {}", args.out.out.display()))?;

    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for seed in 0..args.seeds {
        let name = format!("seed_{seed}.jsonl");
        let path = args.out.out.join(&name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut sink = BufWriter::new(file);
        let summary = run_experiment(
            &config.env,
            &config.policy,
            config.experiment.episodes_per_rollout,
            config.experiment.total_steps,
            seed,
            &mut sink,
        )
        .with_context(|| format!("seed {seed}"))?;
        sink.flush()?;
        summaries.push(json!({
            "seed": seed,
            "rollouts": summary.rollouts,
            "episodes": summary.episodes,
            "steps": summary.steps,
        }));
        files.push(name);
    }
    let manifest = json!({
        "config": config.to_json(),
        "env_config_digest": config.env.digest(),
        "seeds": (0..args.seeds).collect::<Vec<_>>(),
        "files": files,
        "runs": summaries,
    });
    write_text(
        &args.out.out.join(MANIFEST),
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;
    println!("wrote {} log(s) to {}", args.seeds, args.out.out.display());
    Ok(())
}

/// Expand directories to their `.jsonl` files, sorted by name.
fn expand_inputs(inputs: &LogInputs) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for p in &inputs.logs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            if found.is_empty() {
                bail!("{} contains no .jsonl logs", p.display());
            }
            paths.extend(found);
        } else {
            paths.push(p.clone());
        }
    }
    Ok(paths)
}

fn load_logs(inputs: &LogInputs) -> Result<Vec<(PathBuf, Vec<LoggedEpisode>)>> {
    expand_inputs(inputs)?
        .into_iter()
        .map(|path| {
            let episodes =
                read_log_file(&path).with_context(|| format!("reading {}", path.display()))?;
            if episodes.is_empty() {
                bail!("{} contains no episodes", path.display());
            }
            Ok((path, episodes))
        })
        .collect()
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    if args.eval_episodes == 0 {
        bail!("--eval-episodes must be at least 1");
    }
    let settings = ReportSettings {
        emcc_alphas: args.alpha.clone(),
        cvar_alphas: args.cvar.clone(),
        gamma: args.gamma,
        cost_limit: args.cost_limit,
    };
    let mut per_seed = Vec::new();
    for (path, episodes) in load_logs(&args.inputs)? {
        let stream = group_rollouts(&episodes)?;
        let skip = episodes.len().saturating_sub(args.eval_episodes);
        let evaluation: Vec<_> = episodes[skip..].iter().map(LoggedEpisode::outcome).collect();
        let report = MetricReport::build(&stream, &evaluation, &settings)
            .with_context(|| format!("metrics for {}", path.display()))?;
        per_seed.push(report.rows());
    }
    let csv = if per_seed.len() == 1 {
        rows_to_csv(&per_seed[0], None)
    } else {
        let (rows, std) = aggregate_rows(&per_seed);
        rows_to_csv(&rows, Some(&std))
    };
    fs::create_dir_all(&args.out.out)?;
    write_text(&args.out.out.join("metrics.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

/// Parse either a run configuration or a bare environment configuration.
fn env_config_from_file(path: &Path) -> Result<EnvConfig> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
    if value.get("policy").is_some() || value.get("experiment").is_some() {
        Ok(load_run_config(path)?.env)
    } else {
        EnvConfig::from_json(&text).with_context(|| format!("in {}", path.display()))
    }
}

/// Configuration for `digest`: from the manifest next to a log, or one of
/// the default level configurations.
fn config_for_digest(digest: &str, log_dirs: &[PathBuf]) -> Option<EnvConfig> {
    for dir in log_dirs {
        let Ok(text) = fs::read_to_string(dir.join(MANIFEST)) else {
            continue;
        };
        let Ok(manifest) = serde_json::from_str::<Value>(&text) else {
            continue;
        };
        if let Some(config) = manifest.get("config") {
            if let Ok(run) = RunConfig::from_json(&config.to_string()) {
                if run.env.digest() == digest {
                    return Some(run.env);
                }
            }
        }
    }
    (0..=3)
        .map(EnvConfig::with_level)
        .find(|c| c.digest() == digest)
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<()> {
    let logs = load_logs(&args.inputs)?;
    let config = match (&args.config, args.level) {
        (Some(path), _) => env_config_from_file(path)?,
        (None, Some(level)) => {
            let config = EnvConfig::with_level(level);
            config.validate()?;
            config
        }
        (None, None) => {
            let digest = &logs[0].1[0].header.env_config_digest;
            let dirs: Vec<PathBuf> = logs
                .iter()
                .filter_map(|(p, _)| p.parent().map(Path::to_path_buf))
                .collect();
            config_for_digest(digest, &dirs).ok_or_else(|| {
                anyhow!("unknown geometry for config digest {digest}; pass --level or --config")
            })?
        }
    };
    let geometry = Geometry::build(&config)?;
    let mut totals: Option<Vec<HeatmapGrid>> = None;
    for (path, episodes) in &logs {
        let grids = part_grids(episodes, &config, args.resolution)
            .with_context(|| format!("heatmap for {}", path.display()))?;
        totals = Some(match totals {
            None => grids,
            Some(mut acc) => {
                for (a, g) in acc.iter_mut().zip(&grids) {
                    a.merge(g);
                }
                acc
            }
        });
    }
    fs::create_dir_all(&args.out.out)?;
    for (i, grid) in totals.expect("at least one log").iter().enumerate() {
        let part = i + 1;
        let title = format!("level {} training part {part}, {} visits", config.level, grid.total());
        write_text(
            &args.out.out.join(format!("heatmap_part{part}.svg")),
            &render_heatmap_svg(grid, &geometry, &title),
        )?;
        write_text(&args.out.out.join(format!("heatmap_part{part}.csv")), &grid.to_csv())?;
    }
    println!("wrote heatmaps to {}", args.out.out.display());
    Ok(())
}

fn cmd_curves(args: CurvesArgs) -> Result<()> {
    let logs: Vec<Vec<LoggedEpisode>> = load_logs(&args.inputs)?.into_iter().map(|(_, e)| e).collect();
    let rows = curve_rows(&logs)?;
    fs::create_dir_all(&args.out.out)?;
    write_text(&args.out.out.join("curves.csv"), &curves_to_csv(&rows))?;
    write_text(
        &args.out.out.join("curves.svg"),
        &render_curves_svg(&rows, args.cost_limit),
    )?;
    println!("wrote {} rollout(s) to {}", rows.len(), args.out.out.display());
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => env_config_from_file(path)?,
        None => EnvConfig::default(),
    };
    config.validate()?;
    if args.stdio {
        let stdin = std::io::stdin();
        serve_stream(BufReader::new(stdin.lock()), std::io::stdout().lock(), config)?;
        return Ok(());
    }
    let listener = TcpListener::bind((args.host.as_str(), args.port))
        .with_context(|| format!("binding {}:{}", args.host, args.port))?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve_tcp(listener, config)?;
    Ok(())
}
