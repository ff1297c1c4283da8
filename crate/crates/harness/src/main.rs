//! `pursuit`: batch experiments, golden observation dumps, baseline gain
//! tuning, and trajectory replay.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pursuit_harness::rollouts::{run_rollouts, RolloutSpec};
use pursuit_harness::scene::encode_scene_to_files;
use pursuit_harness::table::{render_csv, render_text};
use pursuit_harness::trajectory::read_trajectory;
use pursuit_harness::tune::tune_policy;

#[derive(Parser)]
#[command(name = "pursuit", version, about = "Planar pursuit-evasion experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a rollout grid from a TOML spec and print the metrics table.
    Run {
        /// Rollout spec file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for episode execution.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the spec's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the metrics as CSV to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-episode trajectory logs.
        #[arg(long)]
        traj_dir: Option<PathBuf>,
        /// Table format printed to stdout.
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Encode a static scene file into a golden observation dump.
    Encode {
        /// Scene description (JSON).
        #[arg(long)]
        scene: PathBuf,
        /// Output prefix; writes `<prefix>.bin` and `<prefix>.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search baseline gains at the reference condition.
    Tune {
        /// Policy to tune: apf | angelani | janosov.
        #[arg(long)]
        policy: String,
        /// Episodes per candidate.
        #[arg(long, default_value_t = 40)]
        rollouts: usize,
        /// Base seed for the evaluation episodes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the winning gains as TOML.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a trajectory file; optionally export per-cycle plot data.
    Replay {
        /// Trajectory file (JSON lines).
        #[arg(long)]
        traj: PathBuf,
        /// Write per-cycle plot data (cycle, min distance, reward) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            jobs,
            seed,
            out,
            traj_dir,
            format,
        } => {
            let mut spec = RolloutSpec::load_toml(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(seed) = seed {
                spec.base_seed = seed;
            }
            let table = run_rollouts(&spec, jobs, traj_dir.as_deref())?;
            match format {
                OutputFormat::Text => print!("{}", render_text(&table)),
                OutputFormat::Csv => print!("{}", render_csv(&table)),
            }
            if let Some(path) = out {
                std::fs::write(&path, render_csv(&table))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let faults: usize = table.cells.iter().map(|c| c.harness_faults).sum();
            if faults > 0 {
                bail!("{faults} episodes faulted; metrics are incomplete");
            }
            Ok(())
        }
        Command::Encode { scene, out } => {
            encode_scene_to_files(&scene, &out)
                .with_context(|| format!("encoding {}", scene.display()))?;
            println!(
                "wrote {} and {}",
                out.with_extension("bin").display(),
                out.with_extension("json").display()
            );
            Ok(())
        }
        Command::Tune {
            policy,
            rollouts,
            seed,
            out,
        } => {
            let (params, score) = tune_policy(&policy, rollouts, seed, |label, s| {
                println!(
                    "{label}: SR={:.2} CT={}",
                    s.success_rate,
                    s.capture_time
                        .map(|c| format!("{c:.1}"))
                        .unwrap_or_else(|| "-".into())
                );
            })?;
            let toml_text = toml::to_string_pretty(&params).context("serializing gains")?;
            println!("# best: SR={:.2}\n{toml_text}", score.success_rate);
            if let Some(path) = out {
                std::fs::write(&path, toml_text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        Command::Replay { traj, csv } => {
            let log = read_trajectory(&traj)
                .with_context(|| format!("reading {}", traj.display()))?;
            let last = log
                .records
                .last()
                .context("trajectory has no records")?;
            println!(
                "policy {} seed {} team {} speed {} obstacles {}",
                log.header.policy,
                log.header.seed,
                log.header.n_pursuers,
                log.header.evader_speed,
                log.header.obstacle_count
            );
            println!(
                "outcome {} after {} cycles; final min distance {:.3} m; total reward {:.2}",
                last.outcome,
                last.cycle,
                last.min_capture_distance,
                log.records.iter().map(|r| r.reward.total).sum::<f64>()
            );
            if let Some(path) = csv {
                let mut out = String::from("cycle,min_distance,reward_total,outcome\n");
                for r in &log.records {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        r.cycle, r.min_capture_distance, r.reward.total, r.outcome
                    ));
                }
                std::fs::write(&path, out)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
    }
}
