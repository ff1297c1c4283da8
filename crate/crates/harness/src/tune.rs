//! Coarse grid search over baseline gains at the reference condition
//! (evader speed 0.8 m/s, open arena). The winning gains for each policy
//! are committed as the `Default` impls in the policies module; this
//! command re-derives them.

use serde::Serialize;

use pursuit_core::episode::{Episode, EpisodeOptions, ScriptedPursuer, TeamController};
use pursuit_core::policies::{AngelaniParams, ApfParams, JanosovParams};
use pursuit_core::{EpisodeConfig, Outcome};

use crate::rollouts::HarnessError;

/// Score of one candidate: success rate first, then mean capture time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TuneScore {
    pub success_rate: f64,
    pub capture_time: Option<f64>,
}

fn evaluate(policy: &ScriptedPursuer, rollouts: usize, base_seed: u64) -> TuneScore {
    let mut captures = 0usize;
    let mut cycles = 0u64;
    for i in 0..rollouts {
        let cfg = EpisodeConfig {
            seed: base_seed.wrapping_add(i as u64),
            ..EpisodeConfig::default()
        };
        let ep = Episode::new(
            cfg,
            TeamController::Scripted(policy.clone()),
            EpisodeOptions::default(),
        )
        .and_then(Episode::run);
        if let Ok(r) = ep {
            if r.outcome == Outcome::Capture {
                captures += 1;
                cycles += r.cycles as u64;
            }
        }
    }
    TuneScore {
        success_rate: captures as f64 / rollouts as f64,
        capture_time: (captures > 0).then(|| cycles as f64 / captures as f64),
    }
}

fn better(a: TuneScore, b: TuneScore) -> bool {
    if (a.success_rate - b.success_rate).abs() > 1e-9 {
        return a.success_rate > b.success_rate;
    }
    match (a.capture_time, b.capture_time) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Result of a tuning run, serializable to TOML.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum TunedParams {
    Apf(ApfParams),
    Angelani(AngelaniParams),
    Janosov(JanosovParams),
}

/// Grid-search one policy's key gains.
pub fn tune_policy(
    policy: &str,
    rollouts: usize,
    base_seed: u64,
    mut progress: impl FnMut(&str, TuneScore),
) -> Result<(TunedParams, TuneScore), HarnessError> {
    match policy {
        "apf" => {
            let mut best: Option<(ApfParams, TuneScore)> = None;
            for k_obstacle in [0.25, 0.35, 0.5] {
                for k_teammate in [0.4, 0.7, 1.0] {
                    for teammate_cutoff in [2.5, 3.5] {
                        let cand = ApfParams {
                            k_obstacle,
                            k_teammate,
                            teammate_cutoff,
                            ..ApfParams::default()
                        };
                        let score =
                            evaluate(&ScriptedPursuer::Apf(cand), rollouts, base_seed);
                        progress(
                            &format!(
                                "apf k_obs={k_obstacle} k_tm={k_teammate} cut={teammate_cutoff}"
                            ),
                            score,
                        );
                        if best.as_ref().is_none_or(|(_, b)| better(score, *b)) {
                            best = Some((cand, score));
                        }
                    }
                }
            }
            let (params, score) = best.expect("non-empty grid");
            Ok((TunedParams::Apf(params), score))
        }
        "angelani" => {
            let mut best: Option<(AngelaniParams, TuneScore)> = None;
            for w_align in [0.0, 0.1, 0.3] {
                for w_separation in [0.2, 0.4, 0.7] {
                    for separation_radius in [1.5, 2.5] {
                        let cand = AngelaniParams {
                            w_align,
                            w_separation,
                            separation_radius,
                            ..AngelaniParams::default()
                        };
                        let score =
                            evaluate(&ScriptedPursuer::Angelani(cand), rollouts, base_seed);
                        progress(
                            &format!(
                                "angelani w_a={w_align} w_s={w_separation} r={separation_radius}"
                            ),
                            score,
                        );
                        if best.as_ref().is_none_or(|(_, b)| better(score, *b)) {
                            best = Some((cand, score));
                        }
                    }
                }
            }
            let (params, score) = best.expect("non-empty grid");
            Ok((TunedParams::Angelani(params), score))
        }
        "janosov" => {
            let mut best: Option<(JanosovParams, TuneScore)> = None;
            for k_attraction in [1.5, 2.5, 3.5] {
                for prediction_cap_s in [1.5, 3.0, 4.5] {
                    for k_damping in [0.15, 0.3] {
                        let cand = JanosovParams {
                            k_attraction,
                            prediction_cap_s,
                            k_damping,
                            ..JanosovParams::default()
                        };
                        let score =
                            evaluate(&ScriptedPursuer::Janosov(cand), rollouts, base_seed);
                        progress(
                            &format!(
                                "janosov k={k_attraction} cap={prediction_cap_s} damp={k_damping}"
                            ),
                            score,
                        );
                        if best.as_ref().is_none_or(|(_, b)| better(score, *b)) {
                            best = Some((cand, score));
                        }
                    }
                }
            }
            let (params, score) = best.expect("non-empty grid");
            Ok((TunedParams::Janosov(params), score))
        }
        other => Err(HarnessError::InvalidSpec(format!(
            "unknown tunable policy '{other}'"
        ))),
    }
}
