//! Shared team reward: five dense shaping terms plus sparse terminal
//! signals. Every pursuer receives the identical scalar.

use serde::{Deserialize, Serialize};

use crate::geometry::{Arena, Vec3};
use crate::sim::{AgentState, Outcome};

/// Weights, scales, and terminal values of the reward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub w_purs: f64,
    pub w_coord: f64,
    pub w_form: f64,
    pub w_obs: f64,
    pub w_time: f64,
    /// Desired inter-pursuer spacing, meters.
    pub d_des: f64,
    /// Bandwidth of the spacing potential, meters.
    pub sigma_coord: f64,
    /// Clearance below which the safety penalty activates, meters.
    pub d_safety: f64,
    pub r_cap: f64,
    pub r_coll: f64,
    pub r_esc: f64,
    pub r_out: f64,
    /// Use the minimum sensed LiDAR range instead of exact clearance for
    /// the safety term.
    pub sensed_clearance: bool,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w_purs: 1.0,
            w_coord: 0.3,
            w_form: 0.3,
            w_obs: 0.5,
            w_time: 0.05,
            d_des: 3.0,
            sigma_coord: 1.0,
            d_safety: 1.0,
            r_cap: 100.0,
            r_coll: -100.0,
            r_esc: -100.0,
            r_out: -50.0,
            sensed_clearance: false,
        }
    }
}

/// Per-term values of one reward evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_purs: f64,
    pub r_coord: f64,
    pub r_form: f64,
    pub r_obs: f64,
    pub r_time: f64,
    pub r_sparse: f64,
    pub total: f64,
}

fn unit_towards(from: Vec3, to: Vec3) -> Vec3 {
    (to - from).try_normalized().unwrap_or(Vec3::zero())
}

/// Projected closing velocity term: the mean over pursuers of
/// `(v_i - v_e) . u_ie` plus the minimum over pursuers, balancing swarm
/// progress with the weakest member. A pursuer coincident with the evader
/// contributes zero (capture has already fired in that situation).
pub fn pursuit_reward(pursuers: &[AgentState], evader: &AgentState) -> f64 {
    assert!(!pursuers.is_empty(), "pursuit reward needs at least one pursuer");
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for p in pursuers {
        let u = unit_towards(p.position, evader.position);
        let closing = (p.velocity - evader.velocity).dot(u);
        sum += closing;
        min = min.min(closing);
    }
    sum / pursuers.len() as f64 + min
}

/// Gaussian potential over the mean pairwise pursuer distance, peaking at
/// the desired spacing. Returns 1 for a single pursuer.
pub fn coordination_reward(pursuers: &[AgentState], d_des: f64, sigma: f64) -> f64 {
    if pursuers.len() < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..pursuers.len() {
        for j in i + 1..pursuers.len() {
            sum += pursuers[i].position.distance(pursuers[j].position);
            pairs += 1;
        }
    }
    let mean = sum / pairs as f64;
    (-(mean - d_des).powi(2) / (2.0 * sigma * sigma)).exp()
}

/// Encirclement term: mean over pursuers of the angle between the
/// direction to the closest teammate and the direction to the evader.
/// Returns 0 for a single pursuer; coincident agents contribute 0.
pub fn formation_reward(pursuers: &[AgentState], evader: &AgentState) -> f64 {
    if pursuers.len() < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (i, p) in pursuers.iter().enumerate() {
        let closest = pursuers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .min_by(|(_, a), (_, b)| {
                let da = p.position.distance(a.position);
                let db = p.position.distance(b.position);
                da.partial_cmp(&db).expect("finite distances")
            })
            .map(|(_, a)| a)
            .expect("at least two pursuers");
        let u_teammate = unit_towards(p.position, closest.position);
        let u_evader = unit_towards(p.position, evader.position);
        let dot = if u_teammate == Vec3::zero() || u_evader == Vec3::zero() {
            1.0
        } else {
            u_teammate.dot(u_evader).clamp(-1.0, 1.0)
        };
        sum += dot.acos();
    }
    sum / pursuers.len() as f64
}

/// Floor applied to the normalized clearance ratio before the log, keeping
/// the barrier finite when an agent touches a surface.
const SAFETY_RATIO_FLOOR: f64 = 1e-3;

/// Log-barrier on normalized clearances: mean over agents of
/// `log(min(1, d_min / d_safety))`. Zero when everyone is safe, never
/// positive.
pub fn safety_reward(clearances: &[f64], d_safety: f64) -> f64 {
    assert!(!clearances.is_empty(), "safety reward needs at least one clearance");
    let sum: f64 = clearances
        .iter()
        .map(|&d| (d / d_safety).min(1.0).max(SAFETY_RATIO_FLOOR).ln())
        .sum();
    sum / clearances.len() as f64
}

/// Exact clearance of each pursuer from the nearest solid (pillar or wall).
pub fn true_clearances(pursuers: &[AgentState], arena: &Arena) -> Vec<f64> {
    pursuers
        .iter()
        .map(|p| arena.distance_to_nearest_obstacle(p.position))
        .collect()
}

fn sparse_term(outcome: Outcome, w: &RewardWeights) -> f64 {
    match outcome {
        Outcome::Running => 0.0,
        Outcome::Capture => w.r_cap,
        Outcome::Collision { .. } => w.r_coll,
        Outcome::Escape => w.r_esc,
        Outcome::Timeout => w.r_out,
    }
}

/// Full reward evaluation with caller-provided clearances (used when the
/// safety term should reflect sensed ranges instead of exact geometry).
pub fn total_reward_with_clearances(
    pursuers: &[AgentState],
    evader: &AgentState,
    clearances: &[f64],
    weights: &RewardWeights,
    outcome: Outcome,
) -> RewardBreakdown {
    let r_purs = pursuit_reward(pursuers, evader);
    let r_coord = coordination_reward(pursuers, weights.d_des, weights.sigma_coord);
    let r_form = formation_reward(pursuers, evader);
    let r_obs = safety_reward(clearances, weights.d_safety);
    let r_time = -1.0;
    let r_sparse = sparse_term(outcome, weights);
    let total = weights.w_purs * r_purs
        + weights.w_coord * r_coord
        + weights.w_form * r_form
        + weights.w_obs * r_obs
        + weights.w_time * r_time
        + r_sparse;
    RewardBreakdown {
        r_purs,
        r_coord,
        r_form,
        r_obs,
        r_time,
        r_sparse,
        total,
    }
}

/// Full reward evaluation using exact clearances from the arena geometry.
pub fn total_reward(
    pursuers: &[AgentState],
    evader: &AgentState,
    arena: &Arena,
    weights: &RewardWeights,
    outcome: Outcome,
) -> RewardBreakdown {
    let clearances = true_clearances(pursuers, arena);
    total_reward_with_clearances(pursuers, evader, &clearances, weights, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn agent(pos: (f64, f64), vel: (f64, f64)) -> AgentState {
        let mut a = AgentState::at_rest(Vec3::new(pos.0, pos.1, 1.0), 0.0);
        a.velocity = Vec3::new(vel.0, vel.1, 0.0);
        a
    }

    #[test]
    fn pursuit_both_closing() {
        let evader = agent((5.0, 0.0), (0.0, 0.0));
        // Both closing at exactly 0.5 m/s: mean 0.5 plus min 0.5.
        let aligned = [agent((0.0, 0.0), (0.5, 0.0)), agent((1.0, 0.0), (0.5, 0.0))];
        assert!((pursuit_reward(&aligned, &evader) - 1.0).abs() < 1e-12);
        let offset = [agent((0.0, 0.0), (0.5, 0.0)), agent((0.0, 1.0), (0.5, -0.1))];
        let r = pursuit_reward(&offset, &evader);
        assert!(r > 0.9 && r < 1.1);
    }

    #[test]
    fn pursuit_all_static_is_zero() {
        let evader = agent((5.0, 0.0), (0.0, 0.0));
        let pursuers = [agent((0.0, 0.0), (0.0, 0.0)), agent((0.0, 1.0), (0.0, 0.0))];
        assert_eq!(pursuit_reward(&pursuers, &evader), 0.0);
    }

    #[test]
    fn pursuit_mixed_closing_and_opening() {
        let evader = agent((5.0, 0.0), (0.0, 0.0));
        let pursuers = [agent((0.0, 0.0), (0.5, 0.0)), agent((10.0, 0.0), (0.5, 0.0))];
        // Mean (0.5 - 0.5)/2 = 0 plus min -0.5.
        assert!((pursuit_reward(&pursuers, &evader) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn coordination_peaks_at_desired_spacing() {
        let pursuers = [agent((0.0, 0.0), (0.0, 0.0)), agent((3.0, 0.0), (0.0, 0.0))];
        assert!((coordination_reward(&pursuers, 3.0, 1.0) - 1.0).abs() < 1e-12);
        let offset = [agent((0.0, 0.0), (0.0, 0.0)), agent((4.0, 0.0), (0.0, 0.0))];
        let r = coordination_reward(&offset, 3.0, 1.0);
        assert!((r - (-0.5_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn coordination_stays_in_unit_interval() {
        for d in [0.1, 1.0, 2.5, 3.0, 7.0, 20.0] {
            let pursuers = [agent((0.0, 0.0), (0.0, 0.0)), agent((d, 0.0), (0.0, 0.0))];
            let r = coordination_reward(&pursuers, 3.0, 1.0);
            assert!(r > 0.0 && r <= 1.0);
        }
        assert_eq!(coordination_reward(&[agent((0.0, 0.0), (0.0, 0.0))], 3.0, 1.0), 1.0);
    }

    #[test]
    fn formation_antipodal_teammate_scores_pi() {
        let evader = agent((2.0, 0.0), (0.0, 0.0));
        let pursuers = [agent((0.0, 0.0), (0.0, 0.0)), agent((-2.0, 0.0), (0.0, 0.0))];
        // Agent 0: teammate opposite the evader -> pi. Agent 1: teammate
        // exactly toward the evader -> 0. Mean pi/2.
        let r = formation_reward(&pursuers, &evader);
        assert!((r - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn formation_right_angle_scores_half_pi() {
        // A distant evader broadside of the pair puts each teammate at a
        // right angle to the evader direction for both agents.
        let evader = agent((0.0, 1.0e6), (0.0, 0.0));
        let pursuers = [agent((-1.0, 0.0), (0.0, 0.0)), agent((1.0, 0.0), (0.0, 0.0))];
        let r = formation_reward(&pursuers, &evader);
        assert!((r - FRAC_PI_2).abs() < 1e-5);
        assert!(r >= 0.0 && r <= PI);
    }

    #[test]
    fn formation_single_pursuer_is_zero() {
        let evader = agent((2.0, 0.0), (0.0, 0.0));
        assert_eq!(formation_reward(&[agent((0.0, 0.0), (0.0, 0.0))], &evader), 0.0);
    }

    #[test]
    fn safety_zero_when_everyone_clear() {
        assert_eq!(safety_reward(&[1.0, 2.0, 5.0], 1.0), 0.0);
    }

    #[test]
    fn safety_log_barrier_at_half_distance() {
        let r = safety_reward(&[0.5, 2.0], 1.0);
        assert!((r - 0.5_f64.ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn safety_never_positive_and_floored() {
        for d in [0.0, 1e-6, 0.1, 0.5, 1.0, 3.0] {
            let r = safety_reward(&[d], 1.0);
            assert!(r <= 0.0);
            assert!(r >= SAFETY_RATIO_FLOOR.ln());
        }
    }

    #[test]
    fn total_reward_outcome_terms() {
        let arena = Arena::new(9.0);
        let evader = agent((4.0, 0.0), (0.0, 0.0));
        let pursuers = vec![agent((0.0, 0.0), (0.0, 0.0)), agent((0.0, 3.0), (0.0, 0.0))];
        let w = RewardWeights::default();

        let running = total_reward(&pursuers, &evader, &arena, &w, Outcome::Running);
        assert_eq!(running.r_sparse, 0.0);
        assert_eq!(running.r_time, -1.0);

        let capture = total_reward(&pursuers, &evader, &arena, &w, Outcome::Capture);
        assert_eq!(capture.r_sparse, w.r_cap);
        assert!((capture.total - running.total - w.r_cap).abs() < 1e-12);

        let coll = total_reward(&pursuers, &evader, &arena, &w, Outcome::Collision { agent: 0 });
        assert_eq!(coll.r_sparse, w.r_coll);
    }

    #[test]
    fn total_is_the_weighted_sum() {
        let arena = Arena::new(9.0);
        let evader = agent((4.0, 1.0), (0.2, 0.0));
        let pursuers = vec![agent((0.0, 0.0), (0.4, 0.1)), agent((1.0, 2.0), (0.3, -0.2))];
        let w = RewardWeights::default();
        let b = total_reward(&pursuers, &evader, &arena, &w, Outcome::Running);
        let expected = w.w_purs * b.r_purs
            + w.w_coord * b.r_coord
            + w.w_form * b.r_form
            + w.w_obs * b.r_obs
            + w.w_time * b.r_time
            + b.r_sparse;
        assert!((b.total - expected).abs() < 1e-12);
    }

    #[test]
    fn coordination_argmax_sweep() {
        // The maximizer over a swept mean distance grid sits at d_des.
        let d_des = 3.0;
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut d = 0.2;
        while d < 8.0 {
            let pursuers = [agent((0.0, 0.0), (0.0, 0.0)), agent((d, 0.0), (0.0, 0.0))];
            let r = coordination_reward(&pursuers, d_des, 1.0);
            if r > best.0 {
                best = (r, d);
            }
            d += 0.05;
        }
        assert!((best.1 - d_des).abs() < 0.051);
    }

    #[test]
    fn safety_zero_iff_all_clear() {
        let d_safety = 1.0;
        assert_eq!(safety_reward(&[1.0, 1.5], d_safety), 0.0);
        assert!(safety_reward(&[0.999, 1.5], d_safety) < 0.0);
    }

    #[test]
    fn total_is_linear_in_each_weight() {
        let arena = Arena::new(9.0);
        let evader = agent((4.0, 1.0), (0.2, 0.0));
        let pursuers = vec![agent((0.5, 0.0), (0.4, 0.1)), agent((1.0, 2.0), (0.3, -0.2))];
        let base = RewardWeights::default();
        let b0 = total_reward(&pursuers, &evader, &arena, &base, Outcome::Running);

        let fields: [(&str, fn(&mut RewardWeights, f64), f64); 5] = [
            ("w_purs", |w, x| w.w_purs = x, b0.r_purs),
            ("w_coord", |w, x| w.w_coord = x, b0.r_coord),
            ("w_form", |w, x| w.w_form = x, b0.r_form),
            ("w_obs", |w, x| w.w_obs = x, b0.r_obs),
            ("w_time", |w, x| w.w_time = x, b0.r_time),
        ];
        for (name, set, term) in fields {
            let mut w1 = base;
            set(&mut w1, 2.0);
            let mut w0 = base;
            set(&mut w0, 1.0);
            let t1 = total_reward(&pursuers, &evader, &arena, &w1, Outcome::Running).total;
            let t0 = total_reward(&pursuers, &evader, &arena, &w0, Outcome::Running).total;
            assert!(
                ((t1 - t0) - term).abs() < 1e-9,
                "finite difference in {name} should equal its term"
            );
        }
    }
}
