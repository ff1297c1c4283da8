//! Batch rollout execution and Success-Rate / Capture-Time aggregation.
//!
//! A rollout spec spans a grid of conditions (evader speeds x obstacle
//! counts x team sizes); every cell runs the same number of seeded
//! episodes. Episode seeds derive from `base_seed + global episode index`,
//! so results are independent of worker count and bit-reproducible.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pursuit_core::episode::{run_episode, EpisodeOptions};
use pursuit_core::{EpisodeConfig, Outcome, PursuerPolicyKind};

use crate::trajectory::{self, TrajectoryHeader, TrajectoryLog};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid rollout spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Experiment description, loadable from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RolloutSpec {
    pub schema_version: u32,
    pub label: String,
    pub evader_speeds: Vec<f64>,
    pub obstacle_counts: Vec<usize>,
    pub team_sizes: Vec<usize>,
    /// Episodes per grid cell.
    pub rollouts: usize,
    pub base_seed: u64,
    /// Pursuer policy: `apf`, `angelani`, `janosov`, or
    /// `external:<endpoint>`.
    pub pursuer_policy: String,
    /// Base episode configuration; the grid axes override
    /// `evader_speed`, `obstacle_count`, and `n_pursuers` per cell.
    pub episode: EpisodeConfig,
}

impl Default for RolloutSpec {
    fn default() -> Self {
        Self {
            schema_version: 1,
            label: String::new(),
            evader_speeds: vec![pursuit_core::constants::EVADER_SPEED_MPS],
            obstacle_counts: vec![0],
            team_sizes: vec![2],
            rollouts: 150,
            base_seed: 0,
            pursuer_policy: "apf".to_string(),
            episode: EpisodeConfig::default(),
        }
    }
}

impl RolloutSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != 1 {
            return Err(HarnessError::InvalidSpec(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.rollouts == 0 {
            return Err(HarnessError::InvalidSpec("rollouts must be >= 1".into()));
        }
        if self.evader_speeds.is_empty()
            || self.obstacle_counts.is_empty()
            || self.team_sizes.is_empty()
        {
            return Err(HarnessError::InvalidSpec(
                "every grid axis needs at least one value".into(),
            ));
        }
        self.pursuer_policy
            .parse::<PursuerPolicyKind>()
            .map_err(HarnessError::InvalidSpec)?;
        Ok(())
    }

    pub fn load_toml(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let spec: Self = toml::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Grid cells in deterministic order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &team_size in &self.team_sizes {
            for &evader_speed in &self.evader_speeds {
                for &obstacles in &self.obstacle_counts {
                    out.push(CellKey {
                        evader_speed,
                        obstacles,
                        team_size,
                    });
                }
            }
        }
        out
    }

    fn episode_config(&self, cell: &CellKey, seed: u64) -> EpisodeConfig {
        EpisodeConfig {
            evader_speed: cell.evader_speed,
            obstacle_count: cell.obstacles,
            n_pursuers: cell.team_size,
            seed,
            ..self.episode.clone()
        }
    }
}

/// One grid condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub evader_speed: f64,
    pub obstacles: usize,
    pub team_size: usize,
}

/// Aggregated results of one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub key: CellKey,
    pub rollouts: usize,
    pub captures: usize,
    pub collisions: usize,
    pub escapes: usize,
    pub timeouts: usize,
    /// Fraction of rollouts ending in capture.
    pub success_rate: f64,
    /// Mean capture time in control steps over successful episodes;
    /// absent when no episode succeeded.
    pub capture_time: Option<f64>,
    pub collision_rate: f64,
    /// Episodes aborted by external-policy faults, excluded from the rates.
    pub bridge_faults: usize,
    /// Episodes that panicked; the cell is suspect if nonzero.
    pub harness_faults: usize,
}

/// Full results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub policy: String,
    pub label: String,
    pub base_seed: u64,
    pub cells: Vec<CellMetrics>,
}

/// Outcome of one episode as the aggregator sees it.
#[derive(Debug, Clone, PartialEq)]
pub enum EpisodeOutput {
    Done { outcome: Outcome, cycles: u32 },
    BridgeFault(String),
    HarnessFault(String),
}

/// Fold per-episode outputs into cell metrics. Capture time averages over
/// captures only; faulted episodes never count toward the rates.
pub fn aggregate_cell(key: CellKey, outputs: &[EpisodeOutput]) -> CellMetrics {
    let mut captures = 0usize;
    let mut collisions = 0usize;
    let mut escapes = 0usize;
    let mut timeouts = 0usize;
    let mut bridge_faults = 0usize;
    let mut harness_faults = 0usize;
    let mut capture_cycles = 0u64;
    for out in outputs {
        match out {
            EpisodeOutput::Done { outcome, cycles } => match outcome {
                Outcome::Capture => {
                    captures += 1;
                    capture_cycles += *cycles as u64;
                }
                Outcome::Collision { .. } => collisions += 1,
                Outcome::Escape => escapes += 1,
                Outcome::Timeout => timeouts += 1,
                Outcome::Running => unreachable!("episodes finish terminal"),
            },
            EpisodeOutput::BridgeFault(_) => bridge_faults += 1,
            EpisodeOutput::HarnessFault(_) => harness_faults += 1,
        }
    }
    let completed = captures + collisions + escapes + timeouts;
    CellMetrics {
        key,
        rollouts: outputs.len(),
        captures,
        collisions,
        escapes,
        timeouts,
        success_rate: if completed > 0 {
            captures as f64 / completed as f64
        } else {
            0.0
        },
        capture_time: (captures > 0).then(|| capture_cycles as f64 / captures as f64),
        collision_rate: if completed > 0 {
            collisions as f64 / completed as f64
        } else {
            0.0
        },
        bridge_faults,
        harness_faults,
    }
}

fn run_one(
    spec: &RolloutSpec,
    kind: &PursuerPolicyKind,
    cell: &CellKey,
    global_index: usize,
    traj_dir: Option<&Path>,
) -> EpisodeOutput {
    let seed = spec.base_seed.wrapping_add(global_index as u64);
    let cfg = spec.episode_config(cell, seed);
    let opts = EpisodeOptions {
        record_trajectory: traj_dir.is_some(),
        build_observations: false,
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        run_episode(cfg.clone(), kind, opts)
    }));
    match result {
        Ok(Ok(ep)) => {
            if let Some(dir) = traj_dir {
                let log = TrajectoryLog {
                    header: TrajectoryHeader {
                        schema_version: 1,
                        kind: "trajectory".to_string(),
                        seed,
                        policy: spec.pursuer_policy.clone(),
                        n_pursuers: cfg.n_pursuers,
                        evader_speed: cfg.evader_speed,
                        obstacle_count: cfg.obstacle_count,
                    },
                    records: ep.records.clone(),
                };
                let path = dir.join(format!("episode_{global_index:05}.jsonl"));
                if let Err(e) = trajectory::export_trajectory(&log, &path) {
                    return EpisodeOutput::HarnessFault(format!("trajectory export: {e}"));
                }
            }
            EpisodeOutput::Done {
                outcome: ep.outcome,
                cycles: ep.cycles,
            }
        }
        Ok(Err(e)) if e.is_bridge_fault() => EpisodeOutput::BridgeFault(e.to_string()),
        Ok(Err(e)) => EpisodeOutput::HarnessFault(e.to_string()),
        Err(_) => EpisodeOutput::HarnessFault("episode panicked".to_string()),
    }
}

/// Execute every cell of the spec over `jobs` workers and aggregate.
/// Results are identical for any worker count.
pub fn run_rollouts(
    spec: &RolloutSpec,
    jobs: usize,
    traj_dir: Option<&Path>,
) -> Result<MetricsTable, HarnessError> {
    spec.validate()?;
    if let Some(dir) = traj_dir {
        std::fs::create_dir_all(dir)?;
    }
    let kind: PursuerPolicyKind = spec
        .pursuer_policy
        .parse()
        .map_err(HarnessError::InvalidSpec)?;

    let cells = spec.cells();
    let total = cells.len() * spec.rollouts;
    let jobs = jobs.max(1);

    // Work items in index order; rayon's collect preserves it, so the
    // sequential reduce below is deterministic.
    let traj_dir: Option<PathBuf> = traj_dir.map(Path::to_path_buf);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let outputs: Vec<EpisodeOutput> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|global_index| {
                let cell = &cells[global_index / spec.rollouts];
                run_one(spec, &kind, cell, global_index, traj_dir.as_deref())
            })
            .collect()
    });

    let mut table = MetricsTable {
        policy: spec.pursuer_policy.clone(),
        label: spec.label.clone(),
        base_seed: spec.base_seed,
        cells: Vec::with_capacity(cells.len()),
    };
    for (i, cell) in cells.iter().enumerate() {
        let slice = &outputs[i * spec.rollouts..(i + 1) * spec.rollouts];
        table.cells.push(aggregate_cell(*cell, slice));
    }
    Ok(table)
}
