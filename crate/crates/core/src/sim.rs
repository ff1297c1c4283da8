//! Kinematic agent dynamics, episode spawning, termination logic,
//! observability, and the proprioceptive observation vector.
//!
//! Agents track body-frame velocity commands through a first-order lag
//! (time constant `tau`; `tau -> 0` gives ideal kinematics) at the physics
//! rate, while policies run at the slower control rate. All agents fly at
//! a fixed altitude.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;
use crate::geometry::{wrap_angle, AgentPose, Arena, GeometryError, LidarConfig, Obstacle, Vec3};
use crate::policies::bridge::BridgeError;
use crate::psto::{GridConfig, IntentParams, PstoError};
use crate::rewards::RewardWeights;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("agent placement failed after {attempts} layout attempts ({detail})")]
    Placement { attempts: usize, detail: String },
    #[error("non-finite velocity command for agent {agent}")]
    NonFiniteCommand { agent: usize },
    #[error("command count {got} does not match pursuer count {expected}")]
    CommandCount { got: usize, expected: usize },
    #[error("invalid episode config: {0}")]
    InvalidConfig(String),
    #[error("control cycle requested on a terminal episode")]
    TerminalState,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Psto(#[from] PstoError),
    #[error("policy bridge fault: {0}")]
    Bridge(#[from] BridgeError),
}

impl SimError {
    /// Bridge faults are infrastructure failures, reported separately from
    /// task outcomes.
    pub fn is_bridge_fault(&self) -> bool {
        matches!(self, SimError::Bridge(_))
    }
}

/// Kinematic state of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    /// World position, meters.
    pub position: Vec3,
    /// World velocity, m/s.
    pub velocity: Vec3,
    /// Heading, radians in `[-pi, pi)`.
    pub yaw: f64,
    /// Heading rate, rad/s.
    pub yaw_rate: f64,
    /// Previous body-frame velocity command.
    pub prev_action: [f64; 2],
}

impl AgentState {
    pub fn at_rest(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zero(),
            yaw,
            yaw_rate: 0.0,
            prev_action: [0.0, 0.0],
        }
    }

    pub fn pose(&self) -> AgentPose {
        AgentPose::new(self.position, self.yaw)
    }
}

/// 12-dimensional proprioceptive observation:
/// attitude quaternion (4), body-frame linear velocity (3),
/// angular velocity (3), previous action (2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProprioVector(pub [f64; 12]);

impl ProprioVector {
    pub fn as_array(&self) -> [f64; 12] {
        self.0
    }
}

/// Build the proprioceptive vector for one agent.
pub fn build_proprio(agent: &AgentState) -> ProprioVector {
    let (half_sin, half_cos) = (agent.yaw * 0.5).sin_cos();
    let v_body = agent.pose().rotate_world_to_body(agent.velocity);
    ProprioVector([
        half_cos,
        0.0,
        0.0,
        half_sin,
        v_body.x,
        v_body.y,
        v_body.z,
        0.0,
        0.0,
        agent.yaw_rate,
        agent.prev_action[0],
        agent.prev_action[1],
    ])
}

/// Global simulation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub pursuers: Vec<AgentState>,
    pub evader: AgentState,
    pub arena: Arena,
    /// Physics step counter.
    pub tick: u64,
}

impl WorldState {
    /// Minimum pursuer-evader distance.
    pub fn min_capture_distance(&self) -> f64 {
        self.pursuers
            .iter()
            .map(|p| p.position.distance(self.evader.position))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Terminal status of an episode. Terminal outcomes are absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Running,
    Capture,
    Collision { agent: usize },
    Escape,
    Timeout,
}

impl Outcome {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Outcome::Running)
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Running => write!(f, "running"),
            Outcome::Capture => write!(f, "capture"),
            Outcome::Collision { agent } => write!(f, "collision(agent {agent})"),
            Outcome::Escape => write!(f, "escape"),
            Outcome::Timeout => write!(f, "timeout"),
        }
    }
}

/// Full per-episode configuration. Defaults reproduce the reference
/// scenario; every field can be overridden from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub n_pursuers: usize,
    /// Evader speed limit, m/s.
    pub evader_speed: f64,
    /// Pursuer speed limit, m/s.
    pub pursuer_v_max: f64,
    pub obstacle_count: usize,
    /// Capture radius, meters.
    pub d_cap: f64,
    /// Episode time limit, seconds.
    pub t_max_s: f64,
    pub control_hz: u32,
    pub physics_hz: u32,
    pub seed: u64,
    /// Evader-escape distance threshold; disabled when absent.
    pub escape_dist: Option<f64>,
    pub arena_radius: f64,
    pub obstacle_half_extent: f64,
    /// First-order velocity-tracking time constant, seconds.
    pub tau: f64,
    /// Collision inflation radius around solids, meters.
    pub agent_radius: f64,
    /// Center distance below which two pursuers collide, meters.
    pub inter_pursuer_collision: f64,
    pub altitude: f64,
    /// Pursuer line distance behind the evader at spawn, meters.
    pub spawn_back: f64,
    /// Pursuer lateral spacing at spawn, meters.
    pub spawn_spacing: f64,
    pub lidar: LidarConfig,
    pub grid: GridConfig,
    pub intent: IntentParams,
    pub rewards: RewardWeights,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            n_pursuers: 2,
            evader_speed: constants::EVADER_SPEED_MPS,
            pursuer_v_max: constants::PURSUER_MAX_SPEED_MPS,
            obstacle_count: 0,
            d_cap: constants::CAPTURE_RADIUS_M,
            t_max_s: constants::EPISODE_TIME_LIMIT_S,
            control_hz: constants::CONTROL_HZ,
            physics_hz: constants::PHYSICS_HZ,
            seed: 0,
            escape_dist: None,
            arena_radius: constants::ARENA_RADIUS_M,
            obstacle_half_extent: constants::OBSTACLE_HALF_EXTENT_M,
            tau: constants::VELOCITY_TIME_CONSTANT_S,
            agent_radius: constants::AGENT_RADIUS_M,
            inter_pursuer_collision: constants::INTER_PURSUER_COLLISION_M,
            altitude: constants::FLIGHT_ALTITUDE_M,
            spawn_back: constants::SPAWN_BACK_DISTANCE_M,
            spawn_spacing: constants::SPAWN_LATERAL_SPACING_M,
            lidar: LidarConfig::default(),
            grid: GridConfig::default(),
            intent: IntentParams::default(),
            rewards: RewardWeights::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_pursuers == 0 || self.n_pursuers > 4 {
            return Err(SimError::InvalidConfig(format!(
                "n_pursuers must be in [1, 4], got {}",
                self.n_pursuers
            )));
        }
        if self.control_hz == 0 || self.physics_hz % self.control_hz != 0 {
            return Err(SimError::InvalidConfig(format!(
                "physics_hz ({}) must be a positive multiple of control_hz ({})",
                self.physics_hz, self.control_hz
            )));
        }
        if self.d_cap <= 0.0 {
            return Err(SimError::InvalidConfig("d_cap must be positive".into()));
        }
        if self.arena_radius <= 0.0 {
            return Err(SimError::InvalidConfig("arena_radius must be positive".into()));
        }
        Ok(())
    }

    /// Physics substeps per control cycle.
    pub fn substeps(&self) -> u32 {
        self.physics_hz / self.control_hz
    }

    pub fn physics_dt(&self) -> f64 {
        1.0 / self.physics_hz as f64
    }

    pub fn control_dt(&self) -> f64 {
        1.0 / self.control_hz as f64
    }

    /// Control cycles until timeout.
    pub fn max_cycles(&self) -> u32 {
        (self.t_max_s * self.control_hz as f64).round() as u32
    }
}

/// Mix a base seed with stream identifiers into an independent RNG seed
/// (splitmix64 finalizer).
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(b.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const LAYOUT_ATTEMPTS: usize = 100;
const OBSTACLE_ATTEMPTS: usize = 200;
/// Spawn clearance between any agent and an obstacle face, meters.
const SPAWN_OBSTACLE_CLEARANCE: f64 = 0.5;
/// Minimum face-to-face gap between obstacles, meters.
const OBSTACLE_GAP: f64 = 0.2;
/// Evader spawn margin from the boundary wall, meters.
const EVADER_WALL_MARGIN: f64 = 0.5;
/// Pursuer spawn margin from the boundary wall, meters.
const PURSUER_WALL_MARGIN: f64 = 0.3;

/// Spawn a fresh episode: evader at a uniform random free position,
/// pursuers in a lateral line `spawn_back` meters behind it, all agents
/// facing +x, and obstacles placed uniformly subject to non-overlap with
/// the agents and each other. Deterministic for a fixed seed.
pub fn spawn_episode(cfg: &EpisodeConfig) -> Result<WorldState, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xA5, 0));
    let he = cfg.obstacle_half_extent;

    for _ in 0..LAYOUT_ATTEMPTS {
        // Evader anywhere in the interior minus a wall margin.
        let r = (cfg.arena_radius - EVADER_WALL_MARGIN) * rng.random::<f64>().sqrt();
        let ang = rng.random_range(0.0..std::f64::consts::TAU);
        let evader_pos = Vec3::new(r * ang.cos(), r * ang.sin(), cfg.altitude);

        // Pursuer line behind the evader along -x.
        let mut pursuer_pos = Vec::with_capacity(cfg.n_pursuers);
        let mut feasible = true;
        for i in 0..cfg.n_pursuers {
            let lateral = (i as f64 - (cfg.n_pursuers as f64 - 1.0) / 2.0) * cfg.spawn_spacing;
            let p = Vec3::new(evader_pos.x - cfg.spawn_back, evader_pos.y + lateral, cfg.altitude);
            if p.xy_norm() > cfg.arena_radius - PURSUER_WALL_MARGIN {
                feasible = false;
                break;
            }
            pursuer_pos.push(p);
        }
        if !feasible {
            continue;
        }

        // Obstacles avoid the agents and each other.
        let max_center = cfg.arena_radius - he * std::f64::consts::SQRT_2 - 0.05;
        let mut obstacles: Vec<Obstacle> = Vec::with_capacity(cfg.obstacle_count);
        let mut layout_ok = true;
        'place: for _ in 0..cfg.obstacle_count {
            for _ in 0..OBSTACLE_ATTEMPTS {
                let r = max_center * rng.random::<f64>().sqrt();
                let ang = rng.random_range(0.0..std::f64::consts::TAU);
                let cand = Obstacle::new(r * ang.cos(), r * ang.sin(), he);

                let clears_agents = std::iter::once(&evader_pos)
                    .chain(pursuer_pos.iter())
                    .all(|p| cand.exterior_distance_xy(*p) >= SPAWN_OBSTACLE_CLEARANCE);
                let clears_obstacles = obstacles.iter().all(|o| {
                    let dx = (cand.center.x - o.center.x).abs();
                    let dy = (cand.center.y - o.center.y).abs();
                    dx.max(dy) >= 2.0 * he + OBSTACLE_GAP
                });
                if clears_agents && clears_obstacles {
                    obstacles.push(cand);
                    continue 'place;
                }
            }
            layout_ok = false;
            break;
        }
        if !layout_ok {
            continue;
        }

        return Ok(WorldState {
            pursuers: pursuer_pos
                .into_iter()
                .map(|p| AgentState::at_rest(p, 0.0))
                .collect(),
            evader: AgentState::at_rest(evader_pos, 0.0),
            arena: Arena::with_obstacles(cfg.arena_radius, obstacles),
            tick: 0,
        });
    }

    Err(SimError::Placement {
        attempts: LAYOUT_ATTEMPTS,
        detail: format!(
            "{} obstacles in radius {}",
            cfg.obstacle_count, cfg.arena_radius
        ),
    })
}

/// Threshold below which heading is held rather than re-aligned, m/s.
const YAW_ALIGN_MIN_SPEED: f64 = 1e-2;

fn integrate_agent(
    agent: &mut AgentState,
    cmd_body: [f64; 2],
    v_max: f64,
    tau: f64,
    dt: f64,
    altitude: f64,
) {
    let cmd = clamp_to_disc(cmd_body, v_max);
    agent.prev_action = cmd;

    let desired = agent
        .pose()
        .rotate_body_to_world(Vec3::new(cmd[0], cmd[1], 0.0));
    let alpha = if tau <= f64::EPSILON {
        1.0
    } else {
        1.0 - (-dt / tau).exp()
    };
    agent.velocity += (desired - agent.velocity) * alpha;
    agent.velocity.z = 0.0;
    let speed = agent.velocity.norm();
    if speed > v_max {
        agent.velocity = agent.velocity * (v_max / speed);
    }
    agent.position += agent.velocity * dt;
    agent.position.z = altitude;

    if agent.velocity.norm() > YAW_ALIGN_MIN_SPEED {
        let new_yaw = agent.velocity.y.atan2(agent.velocity.x);
        agent.yaw_rate = wrap_angle(new_yaw - agent.yaw) / dt;
        agent.yaw = new_yaw;
    } else {
        agent.yaw_rate = 0.0;
    }
}

/// Clamp a body-frame command to the closed speed disc of radius `v_max`.
pub fn clamp_to_disc(cmd: [f64; 2], v_max: f64) -> [f64; 2] {
    let norm = (cmd[0] * cmd[0] + cmd[1] * cmd[1]).sqrt();
    if norm > v_max && norm > 0.0 {
        let s = v_max / norm;
        [cmd[0] * s, cmd[1] * s]
    } else {
        cmd
    }
}

/// The evader is scripted, not evaluated: wall or pillar contact pushes it
/// back into free space tangentially instead of terminating the episode.
fn resolve_evader_contacts(evader: &mut AgentState, arena: &Arena, body_radius: f64) {
    let limit = arena.radius - body_radius;
    let d = evader.position.xy_norm();
    if d > limit && d > 0.0 {
        let scale = limit / d;
        evader.position.x *= scale;
        evader.position.y *= scale;
        let radial = Vec3::new(evader.position.x, evader.position.y, 0.0)
            .try_normalized()
            .unwrap_or(Vec3::zero());
        let outward = evader.velocity.dot(radial);
        if outward > 0.0 {
            evader.velocity -= radial * outward;
        }
    }
    for o in &arena.obstacles {
        let inflated = o.half_extent + body_radius;
        let dx = evader.position.x - o.center.x;
        let dy = evader.position.y - o.center.y;
        if dx.abs() < inflated && dy.abs() < inflated {
            // Push out along the axis of least penetration.
            if inflated - dx.abs() < inflated - dy.abs() {
                evader.position.x = o.center.x + inflated * dx.signum();
                if (evader.velocity.x * dx.signum()) < 0.0 {
                    evader.velocity.x = 0.0;
                }
            } else {
                evader.position.y = o.center.y + inflated * dy.signum();
                if (evader.velocity.y * dy.signum()) < 0.0 {
                    evader.velocity.y = 0.0;
                }
            }
        }
    }
}

/// Advance the world by one physics step. Commands are body-frame
/// `(v_x, v_y)` pairs; the evader command comes last as a separate
/// argument. Commands are clamped to each agent's speed disc.
pub fn step_physics(
    state: &mut WorldState,
    pursuer_cmds: &[[f64; 2]],
    evader_cmd: [f64; 2],
    cfg: &EpisodeConfig,
    dt: f64,
) -> Result<(), SimError> {
    if pursuer_cmds.len() != state.pursuers.len() {
        return Err(SimError::CommandCount {
            got: pursuer_cmds.len(),
            expected: state.pursuers.len(),
        });
    }
    for (i, cmd) in pursuer_cmds.iter().enumerate() {
        if !cmd[0].is_finite() || !cmd[1].is_finite() {
            return Err(SimError::NonFiniteCommand { agent: i });
        }
    }
    if !evader_cmd[0].is_finite() || !evader_cmd[1].is_finite() {
        return Err(SimError::NonFiniteCommand {
            agent: state.pursuers.len(),
        });
    }

    for (agent, &cmd) in state.pursuers.iter_mut().zip(pursuer_cmds) {
        integrate_agent(agent, cmd, cfg.pursuer_v_max, cfg.tau, dt, cfg.altitude);
    }
    integrate_agent(
        &mut state.evader,
        evader_cmd,
        cfg.evader_speed,
        cfg.tau,
        dt,
        cfg.altitude,
    );
    resolve_evader_contacts(&mut state.evader, &state.arena, cfg.agent_radius);
    state.tick += 1;
    Ok(())
}

/// Evaluate the episode status at a control boundary.
///
/// Priority within one cycle: collision, then capture, then escape, then
/// timeout.
pub fn check_termination(state: &WorldState, cfg: &EpisodeConfig) -> Outcome {
    for (i, p) in state.pursuers.iter().enumerate() {
        if state.arena.distance_to_nearest_obstacle(p.position) < cfg.agent_radius {
            return Outcome::Collision { agent: i };
        }
    }
    for i in 0..state.pursuers.len() {
        for j in i + 1..state.pursuers.len() {
            let d = state.pursuers[i]
                .position
                .distance(state.pursuers[j].position);
            if d < cfg.inter_pursuer_collision {
                return Outcome::Collision { agent: i };
            }
        }
    }

    let min_dist = state.min_capture_distance();
    if min_dist < cfg.d_cap {
        return Outcome::Capture;
    }
    if let Some(escape) = cfg.escape_dist {
        if min_dist > escape {
            return Outcome::Escape;
        }
    }
    let cycles_done = state.tick / cfg.substeps() as u64;
    if cycles_done >= cfg.max_cycles() as u64 {
        return Outcome::Timeout;
    }
    Outcome::Running
}

/// True iff some pursuer has an unobstructed line of sight to the evader
/// within sensing range. Team-level: one sighting serves the whole team.
pub fn observable(
    evader_pos: Vec3,
    pursuers: &[AgentState],
    arena: &Arena,
    r_max: f64,
) -> bool {
    pursuers.iter().any(|p| {
        p.position.distance(evader_pos) <= r_max && arena.line_of_sight(p.position, evader_pos)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn spawn_places_pursuers_behind_evader() {
        let cfg = EpisodeConfig {
            seed: 7,
            n_pursuers: 2,
            ..EpisodeConfig::default()
        };
        let state = spawn_episode(&cfg).unwrap();
        for p in &state.pursuers {
            assert!((state.evader.position.x - p.position.x - 3.5).abs() < 1e-12);
            assert_eq!(p.yaw, 0.0);
        }
        let lateral: Vec<f64> = state
            .pursuers
            .iter()
            .map(|p| p.position.y - state.evader.position.y)
            .collect();
        assert!((lateral[0] + 0.5).abs() < 1e-12);
        assert!((lateral[1] - 0.5).abs() < 1e-12);
        assert_eq!(state.evader.yaw, 0.0);
    }

    #[test]
    fn spawn_is_deterministic_per_seed() {
        let cfg = EpisodeConfig {
            seed: 99,
            obstacle_count: 5,
            ..EpisodeConfig::default()
        };
        let a = spawn_episode(&cfg).unwrap();
        let b = spawn_episode(&cfg).unwrap();
        assert_eq!(a, b);
        let c = spawn_episode(&EpisodeConfig {
            seed: 100,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spawn_obstacles_respect_clearances() {
        let cfg = EpisodeConfig {
            seed: 3,
            obstacle_count: 9,
            n_pursuers: 3,
            ..EpisodeConfig::default()
        };
        let state = spawn_episode(&cfg).unwrap();
        assert_eq!(state.arena.obstacles.len(), 9);
        for o in &state.arena.obstacles {
            for agent in state.pursuers.iter().chain(std::iter::once(&state.evader)) {
                assert!(o.exterior_distance_xy(agent.position) >= 0.5 - 1e-12);
            }
        }
    }

    #[test]
    fn spawn_fails_when_overcrowded() {
        let cfg = EpisodeConfig {
            seed: 1,
            arena_radius: 3.0,
            obstacle_count: 500,
            ..EpisodeConfig::default()
        };
        assert!(matches!(
            spawn_episode(&cfg),
            Err(SimError::Placement { .. })
        ));
    }

    #[test]
    fn zero_command_from_rest_is_a_fixed_point() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        let before = state.clone();
        for _ in 0..50 {
            step_physics(&mut state, &[[0.0; 2]; 2], [0.0; 2], &cfg, cfg.physics_dt()).unwrap();
        }
        for (a, b) in state.pursuers.iter().zip(before.pursuers.iter()) {
            assert_eq!(a.position, b.position);
        }
        assert_eq!(state.evader.position, before.evader.position);
        assert_eq!(state.tick, 50);
    }

    #[test]
    fn full_command_converges_to_v_max_heading_x() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        // 6 s, twenty time constants.
        for _ in 0..600 {
            step_physics(
                &mut state,
                &[[cfg.pursuer_v_max, 0.0]; 2],
                [0.0; 2],
                &cfg,
                cfg.physics_dt(),
            )
            .unwrap();
        }
        let p = &state.pursuers[0];
        assert!((p.velocity.norm() - cfg.pursuer_v_max).abs() < 1e-6);
        assert!(p.velocity.x > 0.0 && p.velocity.y.abs() < 1e-9);
        assert!(p.yaw.abs() < 1e-9);
    }

    #[test]
    fn oversized_command_is_clamped() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        for _ in 0..200 {
            step_physics(&mut state, &[[10.0, 10.0]; 2], [0.0; 2], &cfg, cfg.physics_dt()).unwrap();
            for p in &state.pursuers {
                assert!(p.velocity.norm() <= cfg.pursuer_v_max + 1e-12);
            }
        }
        let p = &state.pursuers[0];
        assert!((p.prev_action[0].powi(2) + p.prev_action[1].powi(2)).sqrt() <= cfg.pursuer_v_max + 1e-12);
    }

    #[test]
    fn nan_command_is_rejected() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        let err = step_physics(
            &mut state,
            &[[f64::NAN, 0.0], [0.0, 0.0]],
            [0.0; 2],
            &cfg,
            cfg.physics_dt(),
        )
        .unwrap_err();
        assert!(matches!(err, SimError::NonFiniteCommand { agent: 0 }));
    }

    #[test]
    fn capture_fires_below_threshold() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        state.pursuers[0].position = state.evader.position + Vec3::new(-1.39, 0.0, 0.0);
        assert_eq!(check_termination(&state, &cfg), Outcome::Capture);
        state.pursuers[0].position = state.evader.position + Vec3::new(-1.41, 0.0, 0.0);
        assert_eq!(check_termination(&state, &cfg), Outcome::Running);
    }

    #[test]
    fn collision_fires_inside_inflation_radius() {
        let cfg = EpisodeConfig {
            obstacle_count: 0,
            ..EpisodeConfig::default()
        };
        let mut state = spawn_episode(&cfg).unwrap();
        state.arena.obstacles.push(Obstacle::new(
            state.pursuers[1].position.x + 0.3,
            state.pursuers[1].position.y,
            0.2,
        ));
        assert_eq!(
            check_termination(&state, &cfg),
            Outcome::Collision { agent: 1 }
        );
    }

    #[test]
    fn collision_outranks_capture() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        // Pursuer 0 both captures and collides with its teammate.
        state.pursuers[0].position = state.evader.position + Vec3::new(-1.0, 0.0, 0.0);
        state.pursuers[1].position = state.pursuers[0].position + Vec3::new(0.3, 0.0, 0.0);
        assert_eq!(
            check_termination(&state, &cfg),
            Outcome::Collision { agent: 0 }
        );
    }

    #[test]
    fn timeout_fires_exactly_at_the_cycle_limit() {
        let cfg = EpisodeConfig::default();
        let mut state = spawn_episode(&cfg).unwrap();
        state.tick = (cfg.max_cycles() as u64 - 1) * cfg.substeps() as u64;
        assert_eq!(check_termination(&state, &cfg), Outcome::Running);
        state.tick = cfg.max_cycles() as u64 * cfg.substeps() as u64;
        assert_eq!(check_termination(&state, &cfg), Outcome::Timeout);
    }

    #[test]
    fn escape_distance_when_enabled() {
        let cfg = EpisodeConfig {
            escape_dist: Some(5.0),
            ..EpisodeConfig::default()
        };
        let mut state = spawn_episode(&cfg).unwrap();
        assert_eq!(check_termination(&state, &cfg), Outcome::Running); // spawn at 3.5 m
        state.evader.position += Vec3::new(2.0, 0.0, 0.0);
        assert_eq!(check_termination(&state, &cfg), Outcome::Escape);
    }

    #[test]
    fn observable_respects_range_and_occlusion() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(0.0, 0.0, 0.2)]);
        let pursuer = AgentState::at_rest(Vec3::new(-2.0, 0.0, 1.0), 0.0);
        // Adjacent, clear line.
        assert!(observable(
            Vec3::new(-1.0, 0.5, 1.0),
            &[pursuer],
            &arena,
            10.0
        ));
        // Behind the pillar.
        assert!(!observable(
            Vec3::new(2.0, 0.0, 1.0),
            &[pursuer],
            &arena,
            10.0
        ));
        // Beyond range in an empty arena.
        let open = Arena::new(30.0);
        assert!(!observable(
            Vec3::new(9.0, 0.0, 1.0),
            &[pursuer],
            &open,
            10.0
        ));
    }

    #[test]
    fn proprio_identity_attitude_at_rest() {
        let agent = AgentState::at_rest(Vec3::new(1.0, 2.0, 1.0), 0.0);
        let v = build_proprio(&agent).as_array();
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
        assert_eq!(v.len(), 12);
    }

    #[test]
    fn proprio_rotates_velocity_into_body_frame() {
        let mut agent = AgentState::at_rest(Vec3::zero(), FRAC_PI_2);
        agent.velocity = Vec3::new(0.0, 1.0, 0.0);
        let v = build_proprio(&agent).as_array();
        assert!((v[4] - 1.0).abs() < 1e-12); // body v_x
        assert!(v[5].abs() < 1e-12); // body v_y
    }

    #[test]
    fn proprio_quaternion_is_unit_norm() {
        for yaw in [-3.0, -0.4, 0.0, 0.9, 2.7] {
            let agent = AgentState::at_rest(Vec3::zero(), yaw);
            let v = build_proprio(&agent).as_array();
            let q_norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
            assert!((q_norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn evader_contact_slides_along_wall() {
        let cfg = EpisodeConfig::default();
        let arena = Arena::new(9.0);
        let mut state = WorldState {
            pursuers: vec![AgentState::at_rest(Vec3::new(0.0, 0.0, 1.0), 0.0)],
            evader: AgentState::at_rest(Vec3::new(8.75, 0.0, 1.0), 0.0),
            arena,
            tick: 0,
        };
        let cfg = EpisodeConfig {
            n_pursuers: 1,
            ..cfg
        };
        // Command straight into the wall.
        for _ in 0..100 {
            step_physics(&mut state, &[[0.0; 2]], [cfg.evader_speed, 0.0], &cfg, cfg.physics_dt())
                .unwrap();
            assert!(state.evader.position.xy_norm() <= 9.0 - cfg.agent_radius + 1e-9);
        }
    }
}
