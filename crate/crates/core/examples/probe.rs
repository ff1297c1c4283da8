//! Dev probe: outcome distribution of the scripted baselines across seeds,
//! with gain overrides from the environment for tuning sweeps.

use pursuit_core::episode::{Episode, EpisodeOptions, ScriptedPursuer, TeamController};
use pursuit_core::policies::{AngelaniParams, ApfParams, EvaderParams, JanosovParams};
use pursuit_core::{EpisodeConfig, Outcome};

fn envf(key: &str, default: f64) -> f64 {
    std::env::var(key)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let policy = args.get(1).cloned().unwrap_or_else(|| "apf".into());
    let speed: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let n: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(50);
    let obstacles: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0);

    let make = || -> ScriptedPursuer {
        match policy.as_str() {
            "apf" => {
                let d = ApfParams::default();
                ScriptedPursuer::Apf(ApfParams {
                    k_attraction: envf("K_ATT", d.k_attraction),
                    k_obstacle: envf("K_OBS", d.k_obstacle),
                    obstacle_cutoff: envf("OBS_CUT", d.obstacle_cutoff),
                    k_teammate: envf("K_TM", d.k_teammate),
                    teammate_cutoff: envf("TM_CUT", d.teammate_cutoff),
                    saturation_force: envf("F_SAT", d.saturation_force),
                })
            }
            "angelani" => {
                let d = AngelaniParams::default();
                ScriptedPursuer::Angelani(AngelaniParams {
                    w_target: envf("W_T", d.w_target),
                    w_align: envf("W_A", d.w_align),
                    w_separation: envf("W_S", d.w_separation),
                    separation_radius: envf("SEP_R", d.separation_radius),
                    w_surface: envf("W_SURF", d.w_surface),
                    surface_cutoff: envf("SURF_CUT", d.surface_cutoff),
                })
            }
            "janosov" => {
                let d = JanosovParams::default();
                ScriptedPursuer::Janosov(JanosovParams {
                    k_attraction: envf("K_ATT", d.k_attraction),
                    prediction_cap_s: envf("PRED_CAP", d.prediction_cap_s),
                    k_damping: envf("K_DAMP", d.k_damping),
                    k_obstacle: envf("K_OBS", d.k_obstacle),
                    obstacle_cutoff: envf("OBS_CUT", d.obstacle_cutoff),
                    k_teammate: envf("K_TM", d.k_teammate),
                    teammate_cutoff: envf("TM_CUT", d.teammate_cutoff),
                })
            }
            other => panic!("unknown policy {other}"),
        }
    };

    let mut captures = 0;
    let mut collisions = 0;
    let mut timeouts = 0;
    let mut ct_sum = 0u64;
    for seed in 0..n {
        let cfg = EpisodeConfig {
            seed,
            evader_speed: speed,
            obstacle_count: obstacles,
            ..EpisodeConfig::default()
        };
        let de = EvaderParams::default();
        let evader = EvaderParams {
            k_pursuer: envf("EV_KP", de.k_pursuer),
            k_surface: envf("EV_KS", de.k_surface),
            surface_cutoff: envf("EV_SCUT", de.surface_cutoff),
            k_tangent: envf("EV_KT", de.k_tangent),
            tangent_cutoff: envf("EV_TCUT", de.tangent_cutoff),
            flip_margin: envf("EV_FLIP", de.flip_margin),
            wall_guard: envf("EV_GUARD", de.wall_guard),
        };
        let mut ep = Episode::new(
            cfg,
            TeamController::Scripted(make()),
            EpisodeOptions::default(),
        )
        .unwrap();
        ep.set_evader_params(evader);
        let r = ep.run().unwrap();
        match r.outcome {
            Outcome::Capture => {
                captures += 1;
                ct_sum += r.cycles as u64;
            }
            Outcome::Collision { .. } => collisions += 1,
            Outcome::Timeout => timeouts += 1,
            _ => {}
        }
    }
    let sr = captures as f64 / n as f64;
    let ct = if captures > 0 {
        ct_sum as f64 / captures as f64
    } else {
        f64::NAN
    };
    println!(
        "{policy} speed={speed} obs={obstacles}: SR={sr:.2} CT={ct:.1} collisions={collisions} timeouts={timeouts}"
    );
}
