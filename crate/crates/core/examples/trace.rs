//! Dev probe: print a coarse trajectory of one episode.

use pursuit_core::episode::{run_episode, EpisodeOptions};
use pursuit_core::{EpisodeConfig, PursuerPolicyKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let policy: PursuerPolicyKind = args
        .get(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(PursuerPolicyKind::Apf);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let speed: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.8);

    let cfg = EpisodeConfig {
        seed,
        evader_speed: speed,
        ..EpisodeConfig::default()
    };
    let r = run_episode(
        cfg,
        &policy,
        EpisodeOptions {
            record_trajectory: true,
            build_observations: false,
        },
    )
    .unwrap();
    println!("outcome: {:?} after {} cycles", r.outcome, r.cycles);
    for rec in r.records.iter().step_by(20) {
        let e = &rec.evader;
        let er = (e.position[0].powi(2) + e.position[1].powi(2)).sqrt();
        print!(
            "c{:3} d={:5.2} | E ({:5.2},{:5.2}) r={:4.2} |",
            rec.cycle, rec.min_capture_distance, e.position[0], e.position[1], er
        );
        for p in &rec.pursuers {
            let pr = (p.position[0].powi(2) + p.position[1].powi(2)).sqrt();
            print!(" P ({:5.2},{:5.2}) r={:4.2}", p.position[0], p.position[1], pr);
        }
        println!();
    }
}
