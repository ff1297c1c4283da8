//! Scripted pursuer baselines, the scripted evader, and the external-policy
//! bridge.
//!
//! Scripted controllers receive ground-truth positions and velocities
//! within the sensing horizon (they model state-based heuristics, unlike
//! the grid-observation pipeline) and emit body-frame velocity commands
//! clamped to the agent's speed disc.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{Arena, Vec3};
use crate::psto::TeammateState;

pub mod bridge;

/// Body-frame velocity command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
}

impl VelocityCommand {
    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn norm(&self) -> f64 {
        (self.vx * self.vx + self.vy * self.vy).sqrt()
    }

    /// Clamp to the closed disc of radius `v_max`.
    pub fn clamped(self, v_max: f64) -> Self {
        let n = self.norm();
        if n > v_max && n > 0.0 {
            let s = v_max / n;
            Self::new(self.vx * s, self.vy * s)
        } else {
            self
        }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.vx, self.vy]
    }
}

/// Ground-truth estimate of the evader available to scripted pursuers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaderEstimate {
    pub position: Vec3,
    pub velocity: Vec3,
}

/// Everything a scripted pursuer sees for one decision.
#[derive(Debug, Clone)]
pub struct PursuerView<'a> {
    pub position: Vec3,
    pub velocity: Vec3,
    pub yaw: f64,
    /// `None` when the evader is beyond the sensing horizon.
    pub evader: Option<EvaderEstimate>,
    pub teammates: Vec<TeammateState>,
    pub arena: &'a Arena,
    pub v_max: f64,
}

/// Everything the scripted evader sees for one decision. The evader is
/// omniscient within the arena.
#[derive(Debug, Clone)]
pub struct EvaderView<'a> {
    pub position: Vec3,
    pub velocity: Vec3,
    pub yaw: f64,
    pub pursuers: Vec<TeammateState>,
    pub arena: &'a Arena,
    pub speed: f64,
}

/// Which controller drives the pursuer team.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PursuerPolicyKind {
    Apf,
    Angelani,
    Janosov,
    /// External policy served over the bridge; the payload is the endpoint
    /// (`tcp://host:port` or `stdio:<command ...>`).
    External(String),
}

impl FromStr for PursuerPolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apf" => Ok(Self::Apf),
            "angelani" => Ok(Self::Angelani),
            "janosov" => Ok(Self::Janosov),
            other => match other.strip_prefix("external:") {
                Some(endpoint) if !endpoint.is_empty() => {
                    Ok(Self::External(endpoint.to_string()))
                }
                _ => Err(format!(
                    "unknown pursuer policy '{other}' (expected apf | angelani | janosov | external:<endpoint>)"
                )),
            },
        }
    }
}

impl std::fmt::Display for PursuerPolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Apf => write!(f, "apf"),
            Self::Angelani => write!(f, "angelani"),
            Self::Janosov => write!(f, "janosov"),
            Self::External(endpoint) => write!(f, "external:{endpoint}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Force-field helpers shared by the heuristics.
// ---------------------------------------------------------------------------

/// Classic repulsion profile: `(1/d - 1/cutoff) / d^2` inside the cutoff,
/// zero outside. `d` is floored to keep the profile finite.
fn repulsion_magnitude(d: f64, cutoff: f64) -> f64 {
    let d = d.max(1e-3);
    if d >= cutoff {
        0.0
    } else {
        (1.0 / d - 1.0 / cutoff) / (d * d)
    }
}

/// Sum of repulsive contributions from every pillar and the boundary wall.
/// Distances are measured to the nearest face; directions point away from
/// the pillar center, so an off-axis approach is deflected sideways rather
/// than pushed straight back.
fn surface_repulsion(position: Vec3, arena: &Arena, gain: f64, cutoff: f64) -> Vec3 {
    let mut force = Vec3::zero();
    for o in &arena.obstacles {
        let d = o.exterior_distance_xy(position);
        let dir = (position - Vec3::new(o.center.x, o.center.y, position.z))
            .try_normalized()
            .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        force += dir * (gain * repulsion_magnitude(d, cutoff));
    }
    let radial = Vec3::new(position.x, position.y, 0.0);
    let wall_d = (arena.radius - radial.norm()).max(0.0);
    if let Some(inward) = (-radial).try_normalized() {
        force += inward * (gain * repulsion_magnitude(wall_d, cutoff));
    }
    force
}

fn world_to_body_cmd(force_world: Vec3, yaw: f64, speed: f64) -> VelocityCommand {
    let Some(dir) = force_world.try_normalized() else {
        return VelocityCommand::zero();
    };
    let (s, c) = yaw.sin_cos();
    let bx = c * dir.x + s * dir.y;
    let by = -s * dir.x + c * dir.y;
    VelocityCommand::new(bx * speed, by * speed)
}

// ---------------------------------------------------------------------------
// APF pursuer
// ---------------------------------------------------------------------------

/// Artificial-potential-field gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApfParams {
    pub k_attraction: f64,
    pub k_obstacle: f64,
    pub obstacle_cutoff: f64,
    pub k_teammate: f64,
    pub teammate_cutoff: f64,
    /// Net force at which the command saturates at full speed; weaker net
    /// fields command proportionally slower motion, which is what exposes
    /// potential-field local minima.
    pub saturation_force: f64,
}

impl Default for ApfParams {
    fn default() -> Self {
        // Tuned by grid search at evader speed 0.8 m/s in the open arena
        // (`pursuit tune --policy apf`), then frozen for all conditions.
        Self {
            k_attraction: 1.0,
            k_obstacle: 0.35,
            obstacle_cutoff: 1.5,
            k_teammate: 0.7,
            teammate_cutoff: 3.5,
            saturation_force: 0.5,
        }
    }
}

/// Attract toward the evader, repel from surfaces and teammates, and move
/// along the net field. With no visible evader the command is zero.
pub fn apf_pursuer(view: &PursuerView, params: &ApfParams) -> VelocityCommand {
    let Some(evader) = view.evader else {
        return VelocityCommand::zero();
    };
    let mut force = (evader.position - view.position)
        .try_normalized()
        .unwrap_or(Vec3::zero())
        * params.k_attraction;
    force += surface_repulsion(
        view.position,
        view.arena,
        params.k_obstacle,
        params.obstacle_cutoff,
    );
    for tm in &view.teammates {
        let away = view.position - tm.position;
        let dir = away.try_normalized().unwrap_or(Vec3::zero());
        force += dir * (params.k_teammate * repulsion_magnitude(away.norm(), params.teammate_cutoff));
    }

    let magnitude = force.norm();
    if magnitude < 1e-12 {
        return VelocityCommand::zero();
    }
    let speed = view.v_max * (magnitude / params.saturation_force).min(1.0);
    world_to_body_cmd(force, view.yaw, speed)
}

// ---------------------------------------------------------------------------
// Angelani-style collective pursuer
// ---------------------------------------------------------------------------

/// Collective-motion weights: target attraction, neighbor alignment, and
/// short-range separation (teammates and surfaces alike).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AngelaniParams {
    pub w_target: f64,
    pub w_align: f64,
    pub w_separation: f64,
    pub separation_radius: f64,
    pub w_surface: f64,
    pub surface_cutoff: f64,
}

impl Default for AngelaniParams {
    fn default() -> Self {
        // Tuned by grid search at evader speed 0.8 m/s in the open arena
        // (`pursuit tune --policy angelani`), then frozen.
        Self {
            w_target: 1.0,
            w_align: 0.1,
            w_separation: 0.4,
            separation_radius: 2.5,
            w_surface: 0.4,
            surface_cutoff: 1.2,
        }
    }
}

/// Weighted sum of target attraction, mean teammate heading, and
/// short-range separation, normalized to full speed.
pub fn angelani_pursuer(view: &PursuerView, params: &AngelaniParams) -> VelocityCommand {
    let Some(evader) = view.evader else {
        return VelocityCommand::zero();
    };
    let target = (evader.position - view.position)
        .try_normalized()
        .unwrap_or(Vec3::zero());

    let mut align = Vec3::zero();
    let mut heading_count = 0usize;
    let mut separation = Vec3::zero();
    for tm in &view.teammates {
        if let Some(h) = tm.velocity.try_normalized() {
            align += h;
            heading_count += 1;
        }
        let away = view.position - tm.position;
        let d = away.norm();
        if d < params.separation_radius {
            let dir = away.try_normalized().unwrap_or(Vec3::new(0.0, 1.0, 0.0));
            separation += dir * (1.0 / d.max(1e-3));
        }
    }
    if heading_count > 0 {
        align = align * (1.0 / heading_count as f64);
    }

    let surface = surface_repulsion(view.position, view.arena, 1.0, params.surface_cutoff);

    let force = target * params.w_target
        + align * params.w_align
        + separation * params.w_separation
        + surface * params.w_surface;
    world_to_body_cmd(force, view.yaw, view.v_max)
}

// ---------------------------------------------------------------------------
// Janosov-style predictive pursuer
// ---------------------------------------------------------------------------

/// Predictive-chase gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JanosovParams {
    pub k_attraction: f64,
    /// Upper bound on the prediction lead time, seconds.
    pub prediction_cap_s: f64,
    /// Viscous damping on the pursuer's own velocity.
    pub k_damping: f64,
    pub k_obstacle: f64,
    pub obstacle_cutoff: f64,
    pub k_teammate: f64,
    pub teammate_cutoff: f64,
}

impl Default for JanosovParams {
    fn default() -> Self {
        // Tuned by grid search at evader speed 0.8 m/s in the open arena
        // (`pursuit tune --policy janosov`), then frozen.
        Self {
            k_attraction: 2.5,
            prediction_cap_s: 3.0,
            k_damping: 0.3,
            k_obstacle: 0.3,
            obstacle_cutoff: 1.2,
            k_teammate: 0.3,
            teammate_cutoff: 2.0,
        }
    }
}

/// Lead time toward the intercept point, from closing geometry and capped.
pub fn janosov_prediction_time(distance: f64, v_max: f64, cap_s: f64) -> f64 {
    (distance / v_max.max(1e-6)).min(cap_s)
}

/// Chase the evader's linearly extrapolated future position with viscous
/// damping and simple repulsive constraints.
pub fn janosov_pursuer(view: &PursuerView, params: &JanosovParams) -> VelocityCommand {
    let Some(evader) = view.evader else {
        return VelocityCommand::zero();
    };
    let distance = view.position.distance(evader.position);
    let t_pred = janosov_prediction_time(distance, view.v_max, params.prediction_cap_s);
    let aim = evader.position + evader.velocity * t_pred;

    let mut force = (aim - view.position)
        .try_normalized()
        .unwrap_or(Vec3::zero())
        * (params.k_attraction * view.v_max);
    force += surface_repulsion(
        view.position,
        view.arena,
        params.k_obstacle,
        params.obstacle_cutoff,
    );
    for tm in &view.teammates {
        let away = view.position - tm.position;
        let dir = away.try_normalized().unwrap_or(Vec3::zero());
        force += dir * (params.k_teammate * repulsion_magnitude(away.norm(), params.teammate_cutoff));
    }
    force -= view.velocity * params.k_damping;

    // Damped command keeps its magnitude (up to v_max) instead of being
    // renormalized, so the damping term has effect.
    let (s, c) = view.yaw.sin_cos();
    let bx = c * force.x + s * force.y;
    let by = -s * force.x + c * force.y;
    VelocityCommand::new(bx, by).clamped(view.v_max)
}

// ---------------------------------------------------------------------------
// Scripted evader
// ---------------------------------------------------------------------------

/// Evader gains: pursuer repulsion, surface handling, and the tangential
/// wall-following field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaderParams {
    pub k_pursuer: f64,
    pub k_surface: f64,
    pub surface_cutoff: f64,
    pub k_tangent: f64,
    /// Distance to a surface below which the tangential field engages.
    pub tangent_cutoff: f64,
    /// Circulation flips only when the forward threat exceeds the backward
    /// threat by this factor.
    pub flip_margin: f64,
    /// Wall distance below which outward radial motion is suppressed.
    pub wall_guard: f64,
}

impl Default for EvaderParams {
    fn default() -> Self {
        Self {
            k_pursuer: 6.0,
            k_surface: 0.35,
            surface_cutoff: 1.2,
            k_tangent: 2.5,
            tangent_cutoff: 2.0,
            flip_margin: 1.5,
            wall_guard: 0.5,
        }
    }
}

/// Adversarial scripted evader: flees pursuer pressure, repels from
/// surfaces, and follows walls at speed through a tangential field whose
/// circulation direction is kept by hysteresis.
#[derive(Debug, Clone)]
pub struct ScriptedEvader {
    pub params: EvaderParams,
    /// +1 counterclockwise, -1 clockwise, 0 until first engaged.
    circulation: f64,
}

impl ScriptedEvader {
    pub fn new(params: EvaderParams) -> Self {
        Self {
            params,
            circulation: 0.0,
        }
    }

    /// Nearest surface to `p`: `(distance, direction away from surface)`.
    fn nearest_surface(p: Vec3, arena: &Arena) -> (f64, Vec3) {
        let radial = Vec3::new(p.x, p.y, 0.0);
        let wall_d = (arena.radius - radial.norm()).max(0.0);
        let mut best = (
            wall_d,
            (-radial).try_normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0)),
        );
        for o in &arena.obstacles {
            let (cx, cy) = o.closest_point_xy(p);
            let away = Vec3::new(p.x - cx, p.y - cy, 0.0);
            let d = away.norm();
            if d < best.0 {
                let dir = away
                    .try_normalized()
                    .or_else(|| (p - o.center).try_normalized())
                    .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
                best = (d, dir);
            }
        }
        best
    }

    /// Threat density along a direction: pursuers roughly ahead of `dir`,
    /// weighted by inverse distance.
    fn threat_along(p: Vec3, pursuers: &[TeammateState], dir: Vec3) -> f64 {
        pursuers
            .iter()
            .map(|pu| {
                let to = pu.position - p;
                let d = to.norm().max(1e-3);
                let ahead = to.try_normalized().map_or(0.0, |u| u.dot(dir)).max(0.0);
                ahead / d
            })
            .sum()
    }

    pub fn command(&mut self, view: &EvaderView) -> VelocityCommand {
        let p = self.params;
        let mut force = Vec3::zero();
        for pu in &view.pursuers {
            let away = view.position - pu.position;
            let d = away.norm().max(1e-3);
            if let Some(dir) = away.try_normalized() {
                force += dir * (p.k_pursuer / (d * d));
            }
        }

        // A linear ramp keeps the surface push comparable to the tangential
        // field near the wall, so wall-following stays fast instead of
        // diving inward toward the pursuers.
        let (surface_d, away_dir) = Self::nearest_surface(view.position, view.arena);
        if surface_d < p.surface_cutoff {
            force += away_dir * (p.k_surface * (1.0 - surface_d / p.surface_cutoff));
        }

        if surface_d < p.tangent_cutoff {
            // Tangent is perpendicular to the away direction; circulation
            // sign persists until the path ahead is clearly worse.
            let t_ccw = away_dir.perp_xy();
            if self.circulation == 0.0 {
                let along_velocity = view.velocity.dot(t_ccw);
                self.circulation = if along_velocity.abs() > 1e-6 {
                    along_velocity.signum()
                } else {
                    let ahead = Self::threat_along(view.position, &view.pursuers, t_ccw);
                    let behind = Self::threat_along(view.position, &view.pursuers, -t_ccw);
                    if ahead > behind {
                        -1.0
                    } else {
                        1.0
                    }
                };
            } else {
                let t = t_ccw * self.circulation;
                let ahead = Self::threat_along(view.position, &view.pursuers, t);
                let behind = Self::threat_along(view.position, &view.pursuers, -t);
                if ahead > behind * p.flip_margin {
                    self.circulation = -self.circulation;
                }
            }
            let engage = 1.0 - surface_d / p.tangent_cutoff;
            force += away_dir.perp_xy() * (self.circulation * p.k_tangent * engage);
        }

        let Some(dir) = force.try_normalized() else {
            return VelocityCommand::zero();
        };
        let mut cmd_world = dir * view.speed;

        // Never command into the wall when pressed against it.
        let radial = Vec3::new(view.position.x, view.position.y, 0.0);
        let wall_d = view.arena.radius - radial.norm();
        if wall_d < p.wall_guard {
            if let Some(outward) = radial.try_normalized() {
                let out_component = cmd_world.dot(outward);
                if out_component > 0.0 {
                    cmd_world -= outward * out_component;
                }
            }
        }

        let (s, c) = view.yaw.sin_cos();
        VelocityCommand::new(
            c * cmd_world.x + s * cmd_world.y,
            -s * cmd_world.x + c * cmd_world.y,
        )
        .clamped(view.speed)
    }
}
