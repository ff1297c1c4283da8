//! Planar world geometry: frames and rigid transforms, the circular arena
//! with square pillar obstacles, clearance and visibility queries, and the
//! simulated LiDAR raycaster.
//!
//! Conventions: world and body frames are right-handed with x forward,
//! y left, z up. Azimuth is `atan2(y, x)` in `[-pi, pi)`. The world is
//! 2.5-D: agents fly at a fixed altitude, obstacles and the boundary wall
//! are infinitely tall, and there are no ground returns.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// A direction was requested for a point with (near-)zero norm.
    #[error("degenerate zero-norm point")]
    DegeneratePoint,
    /// A sensor pose lies outside the arena boundary.
    #[error("pose at ({x:.3}, {y:.3}) is outside the arena (radius {radius})")]
    PoseOutsideArena { x: f64, y: f64, radius: f64 },
}

/// 3-D point or vector in meters; the frame is given by context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Norm of the horizontal (xy) projection.
    pub fn xy_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Unit vector, or `None` when the norm is below `1e-12`.
    pub fn try_normalized(self) -> Option<Self> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    /// Horizontal 90-degree counterclockwise rotation (z untouched).
    pub fn perp_xy(self) -> Self {
        Self::new(-self.y, self.x, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(std::f64::consts::TAU);
    if w >= std::f64::consts::PI {
        w -= std::f64::consts::TAU;
    }
    w
}

/// Pose of an agent: world position plus heading about the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub position: Vec3,
    /// Heading in radians, `[-pi, pi)`.
    pub yaw: f64,
}

impl AgentPose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self { position, yaw }
    }

    /// Transform a world-frame point into this pose's body frame:
    /// `R(yaw)^T (p - position)`.
    pub fn world_to_body(&self, p: Vec3) -> Vec3 {
        let d = p - self.position;
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Inverse of [`world_to_body`](Self::world_to_body).
    pub fn body_to_world(&self, p: Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z) + self.position
    }

    /// Rotate a free world-frame vector (e.g. a velocity) into the body frame.
    pub fn rotate_world_to_body(&self, v: Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
    }

    /// Rotate a free body-frame vector into the world frame.
    pub fn rotate_body_to_world(&self, v: Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
    }
}

/// Spherical coordinates of a body-frame point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    /// Euclidean norm, meters.
    pub range: f64,
    /// Azimuth in `[-pi, pi)`.
    pub azimuth: f64,
    /// Elevation in `[-pi/2, pi/2]`.
    pub elevation: f64,
}

/// Convert a body-frame point to `(r, phi, theta)`.
///
/// Azimuth is defined as 0 on the poles (x = y = 0), which are unreachable
/// within the sensor's vertical field of view.
pub fn cartesian_to_spherical(p: Vec3) -> Result<Spherical, GeometryError> {
    let r = p.norm();
    if r < 1e-12 {
        return Err(GeometryError::DegeneratePoint);
    }
    let azimuth = if p.x == 0.0 && p.y == 0.0 {
        0.0
    } else {
        wrap_angle(p.y.atan2(p.x))
    };
    let elevation = (p.z / r).clamp(-1.0, 1.0).asin();
    Ok(Spherical {
        range: r,
        azimuth,
        elevation,
    })
}

/// Axis-aligned square pillar. `center.z` is ignored; the pillar is
/// infinitely tall for sensing and collision purposes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ObstacleRepr", into = "ObstacleRepr")]
pub struct Obstacle {
    pub center: Vec3,
    pub half_extent: f64,
}

/// On-disk form of [`Obstacle`] used by arena description files.
#[derive(Serialize, Deserialize)]
struct ObstacleRepr {
    cx: f64,
    cy: f64,
    half_extent: f64,
}

impl From<ObstacleRepr> for Obstacle {
    fn from(r: ObstacleRepr) -> Self {
        Obstacle {
            center: Vec3::new(r.cx, r.cy, 0.0),
            half_extent: r.half_extent,
        }
    }
}

impl From<Obstacle> for ObstacleRepr {
    fn from(o: Obstacle) -> Self {
        ObstacleRepr {
            cx: o.center.x,
            cy: o.center.y,
            half_extent: o.half_extent,
        }
    }
}

impl Obstacle {
    pub fn new(cx: f64, cy: f64, half_extent: f64) -> Self {
        Self {
            center: Vec3::new(cx, cy, 0.0),
            half_extent,
        }
    }

    fn min_corner(&self) -> (f64, f64) {
        (self.center.x - self.half_extent, self.center.y - self.half_extent)
    }

    fn max_corner(&self) -> (f64, f64) {
        (self.center.x + self.half_extent, self.center.y + self.half_extent)
    }

    /// Closest point of the footprint to `p`, in the xy plane.
    pub fn closest_point_xy(&self, p: Vec3) -> (f64, f64) {
        let (minx, miny) = self.min_corner();
        let (maxx, maxy) = self.max_corner();
        (p.x.clamp(minx, maxx), p.y.clamp(miny, maxy))
    }

    /// Exterior distance from `p` to the footprint; 0 inside.
    pub fn exterior_distance_xy(&self, p: Vec3) -> f64 {
        let (cx, cy) = self.closest_point_xy(p);
        ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
    }

    pub fn contains_xy(&self, p: Vec3) -> bool {
        let (minx, miny) = self.min_corner();
        let (maxx, maxy) = self.max_corner();
        p.x >= minx && p.x <= maxx && p.y >= miny && p.y <= maxy
    }
}

/// Circular arena bounded by an opaque vertical wall, populated with
/// square pillar obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub radius: f64,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

impl Arena {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            obstacles: Vec::new(),
        }
    }

    pub fn with_obstacles(radius: f64, obstacles: Vec<Obstacle>) -> Self {
        Self { radius, obstacles }
    }

    /// True when the xy projection of `p` is strictly inside the boundary.
    pub fn contains(&self, p: Vec3) -> bool {
        p.xy_norm() < self.radius
    }

    /// Distance from `p` to the nearest solid: the minimum over pillar
    /// exterior distances and the remaining distance to the boundary wall.
    /// Zero inside a solid, never negative.
    pub fn distance_to_nearest_obstacle(&self, p: Vec3) -> f64 {
        let wall = (self.radius - p.xy_norm()).max(0.0);
        self.obstacles
            .iter()
            .map(|o| o.exterior_distance_xy(p))
            .fold(wall, f64::min)
    }

    /// True iff the segment `a -> b` crosses no pillar footprint.
    /// The boundary wall is not considered: both endpoints are expected
    /// to be inside the arena.
    pub fn line_of_sight(&self, a: Vec3, b: Vec3) -> bool {
        !self
            .obstacles
            .iter()
            .any(|o| segment_intersects_aabb_xy(a, b, o))
    }

    pub fn load_json(path: impl AsRef<std::path::Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn save_json(&self, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }
}

/// 2-D slab test for a segment against a pillar footprint.
fn segment_intersects_aabb_xy(a: Vec3, b: Vec3, o: &Obstacle) -> bool {
    let (minx, miny) = o.min_corner();
    let (maxx, maxy) = o.max_corner();
    let d = (b.x - a.x, b.y - a.y);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (origin, dir, lo, hi) in [(a.x, d.0, minx, maxx), (a.y, d.1, miny, maxy)] {
        if dir.abs() < 1e-15 {
            if origin < lo || origin > hi {
                return false;
            }
        } else {
            let inv = 1.0 / dir;
            let (ta, tb) = ((lo - origin) * inv, (hi - origin) * inv);
            let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Nearest positive parameter `t` at which the xy ray `origin + t * dir`
/// enters the pillar footprint, if any.
fn ray_aabb_entry_xy(origin: Vec3, dir: (f64, f64), o: &Obstacle) -> Option<f64> {
    let (minx, miny) = o.min_corner();
    let (maxx, maxy) = o.max_corner();
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (start, d, lo, hi) in [(origin.x, dir.0, minx, maxx), (origin.y, dir.1, miny, maxy)] {
        if d.abs() < 1e-15 {
            if start < lo || start > hi {
                return None;
            }
        } else {
            let inv = 1.0 / d;
            let (ta, tb) = ((lo - start) * inv, (hi - start) * inv);
            let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
    }
    (t1 >= 0.0 && t0 > 1e-9).then_some(t0)
}

/// Positive parameter at which the xy ray exits through the boundary
/// circle. The origin must be inside the circle.
fn ray_circle_exit_xy(origin: Vec3, dir: (f64, f64), radius: f64) -> f64 {
    // Unit direction assumed: t^2 + 2 (o.d) t + (|o|^2 - R^2) = 0.
    let od = origin.x * dir.0 + origin.y * dir.1;
    let c = origin.x * origin.x + origin.y * origin.y - radius * radius;
    let disc = (od * od - c).max(0.0);
    -od + disc.sqrt()
}

/// Simulated LiDAR parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarConfig {
    /// Maximum sensing range, meters.
    pub r_max: f64,
    /// Rays per revolution.
    pub azimuth_samples: usize,
    /// Horizontal field of view, degrees (full revolution).
    pub horizontal_fov_deg: f64,
    /// Vertical field of view, degrees (min, max).
    pub vertical_fov_deg: (f64, f64),
    /// Elevation rows replicated per azimuth hit.
    pub elevation_samples: usize,
    /// Standard deviation of optional zero-mean Gaussian range noise,
    /// meters. Zero disables noise.
    pub range_noise_std: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            r_max: constants::LIDAR_RANGE_M,
            azimuth_samples: constants::LIDAR_AZIMUTH_SAMPLES,
            horizontal_fov_deg: constants::LIDAR_HORIZONTAL_FOV_DEG,
            vertical_fov_deg: constants::LIDAR_VERTICAL_FOV_DEG,
            elevation_samples: constants::LIDAR_ELEVATION_SAMPLES,
            range_noise_std: 0.0,
        }
    }
}

/// Body-frame point cloud produced by one sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Cast one revolution of rays from `pose` and return the body-frame cloud.
///
/// For each azimuth the nearest intersection among pillar footprints and the
/// boundary wall is found in the horizontal plane; because all surfaces are
/// vertical, the hit is replicated across the configured elevation rows at
/// the matching slant range. Rays whose nearest surface lies beyond `r_max`
/// return nothing, as do elevation rows whose slant range exceeds `r_max`.
/// Deterministic for fixed `(pose, arena, cfg, noise_seed)`.
pub fn raycast_lidar(
    pose: &AgentPose,
    arena: &Arena,
    cfg: &LidarConfig,
    noise_seed: u64,
) -> Result<PointCloud, GeometryError> {
    if !arena.contains(pose.position) {
        return Err(GeometryError::PoseOutsideArena {
            x: pose.position.x,
            y: pose.position.y,
            radius: arena.radius,
        });
    }

    let mut noise = (cfg.range_noise_std > 0.0).then(|| {
        let rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let dist = Normal::new(0.0, cfg.range_noise_std).expect("valid noise std");
        (rng, dist)
    });

    let fov_rad = cfg.horizontal_fov_deg.to_radians();
    let step = fov_rad / cfg.azimuth_samples as f64;
    let (theta_min, theta_max) = (
        cfg.vertical_fov_deg.0.to_radians(),
        cfg.vertical_fov_deg.1.to_radians(),
    );
    let theta_step = (theta_max - theta_min) / cfg.elevation_samples as f64;

    let mut points = Vec::new();
    for i in 0..cfg.azimuth_samples {
        // Body azimuth of ray i; ray 0 points straight ahead.
        let phi = wrap_angle(i as f64 * step);
        let world_angle = pose.yaw + phi;
        let dir = (world_angle.cos(), world_angle.sin());

        let mut t_hit = ray_circle_exit_xy(pose.position, dir, arena.radius);
        for o in &arena.obstacles {
            if let Some(t) = ray_aabb_entry_xy(pose.position, dir, o) {
                t_hit = t_hit.min(t);
            }
        }
        if t_hit > cfg.r_max {
            continue;
        }

        let mut d = t_hit;
        if let Some((rng, dist)) = noise.as_mut() {
            d = (d + dist.sample(rng)).max(1e-3);
        }

        let (sin_phi, cos_phi) = phi.sin_cos();
        for j in 0..cfg.elevation_samples {
            let theta = theta_min + (j as f64 + 0.5) * theta_step;
            let slant = d / theta.cos();
            if slant > cfg.r_max {
                continue;
            }
            points.push(Vec3::new(d * cos_phi, d * sin_phi, d * theta.tan()));
        }
    }
    Ok(PointCloud { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn world_to_body_self_maps_to_origin() {
        let pose = AgentPose::new(Vec3::new(3.0, -2.0, 1.0), 0.7);
        let p = pose.world_to_body(pose.position);
        assert!(p.norm() < 1e-12);
    }

    #[test]
    fn world_to_body_identity_rotation() {
        let pose = AgentPose::new(Vec3::zero(), 0.0);
        assert_eq!(pose.world_to_body(Vec3::new(1.0, 2.0, 0.0)), Vec3::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn world_to_body_quarter_turn() {
        let pose = AgentPose::new(Vec3::zero(), FRAC_PI_2);
        let p = pose.world_to_body(Vec3::new(0.0, 1.0, 0.0));
        assert!(close(p.x, 1.0, 1e-12) && close(p.y, 0.0, 1e-12));
    }

    #[test]
    fn spherical_forward_axis() {
        let s = cartesian_to_spherical(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((s.range, s.azimuth, s.elevation), (1.0, 0.0, 0.0));
    }

    #[test]
    fn spherical_left_axis() {
        let s = cartesian_to_spherical(Vec3::new(0.0, 2.0, 0.0)).unwrap();
        assert!(close(s.range, 2.0, 1e-12));
        assert!(close(s.azimuth, FRAC_PI_2, 1e-12));
        assert!(close(s.elevation, 0.0, 1e-12));
    }

    #[test]
    fn spherical_pole_uses_zero_azimuth() {
        let s = cartesian_to_spherical(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(s.azimuth, 0.0);
        assert!(close(s.elevation, FRAC_PI_2, 1e-12));
    }

    #[test]
    fn spherical_rejects_zero_norm() {
        assert_eq!(
            cartesian_to_spherical(Vec3::zero()),
            Err(GeometryError::DegeneratePoint)
        );
    }

    #[test]
    fn spherical_azimuth_is_half_open() {
        // atan2 returns +pi for (-1, 0); the wrap must map it to -pi.
        let s = cartesian_to_spherical(Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        assert_eq!(s.azimuth, -PI);
    }

    #[test]
    fn nearest_obstacle_distance_center_of_empty_arena() {
        let arena = Arena::new(9.0);
        assert_eq!(arena.distance_to_nearest_obstacle(Vec3::zero()), 9.0);
    }

    #[test]
    fn nearest_obstacle_distance_one_meter_from_face() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(3.0, 0.0, 0.2)]);
        let d = arena.distance_to_nearest_obstacle(Vec3::new(1.8, 0.0, 0.0));
        assert!(close(d, 1.0, 1e-12));
    }

    #[test]
    fn nearest_obstacle_distance_clamps_inside_solid() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(3.0, 0.0, 0.2)]);
        assert_eq!(arena.distance_to_nearest_obstacle(Vec3::new(3.05, 0.05, 0.0)), 0.0);
        assert_eq!(arena.distance_to_nearest_obstacle(Vec3::new(20.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn line_of_sight_degenerate_segment() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(0.0, 0.0, 0.2)]);
        let a = Vec3::new(2.0, 2.0, 0.0);
        assert!(arena.line_of_sight(a, a));
    }

    #[test]
    fn line_of_sight_blocked_by_midpoint_pillar() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(0.0, 0.0, 0.2)]);
        assert!(!arena.line_of_sight(Vec3::new(-3.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0)));
    }

    #[test]
    fn line_of_sight_open_arena() {
        let arena = Arena::new(9.0);
        assert!(arena.line_of_sight(Vec3::new(-8.0, 1.0, 0.0), Vec3::new(7.0, -2.0, 0.0)));
    }

    #[test]
    fn raycast_center_sees_boundary_every_azimuth() {
        let arena = Arena::new(9.0);
        let pose = AgentPose::new(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let cfg = LidarConfig::default();
        let cloud = raycast_lidar(&pose, &arena, &cfg, 0).unwrap();
        // Every azimuth contributes every elevation row (slant < r_max here).
        assert_eq!(cloud.len(), cfg.azimuth_samples * cfg.elevation_samples);
        for p in &cloud.points {
            assert!(close(p.xy_norm(), 9.0, 1e-9));
        }
    }

    #[test]
    fn raycast_hits_pillar_face_two_meters_ahead() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(2.2, 0.0, 0.2)]);
        let pose = AgentPose::new(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let cfg = LidarConfig::default();
        let cloud = raycast_lidar(&pose, &arena, &cfg, 0).unwrap();
        let ahead: Vec<&Vec3> = cloud
            .points
            .iter()
            .filter(|p| p.y.abs() < 1e-9 && p.x > 0.0)
            .collect();
        assert_eq!(ahead.len(), cfg.elevation_samples);
        for p in ahead {
            assert!(close(p.x, 2.0, 1e-9));
        }
    }

    #[test]
    fn raycast_drops_rays_beyond_max_range() {
        let arena = Arena::new(30.0);
        let pose = AgentPose::new(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let cfg = LidarConfig::default(); // r_max = 10 < 30
        let cloud = raycast_lidar(&pose, &arena, &cfg, 0).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn raycast_rejects_outside_pose() {
        let arena = Arena::new(9.0);
        let pose = AgentPose::new(Vec3::new(10.0, 0.0, 1.0), 0.0);
        let err = raycast_lidar(&pose, &arena, &LidarConfig::default(), 0).unwrap_err();
        assert!(matches!(err, GeometryError::PoseOutsideArena { .. }));
    }

    #[test]
    fn raycast_is_deterministic_with_noise() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(3.0, 1.0, 0.2)]);
        let pose = AgentPose::new(Vec3::new(-1.0, 0.5, 1.0), 0.3);
        let cfg = LidarConfig {
            range_noise_std: 0.05,
            ..LidarConfig::default()
        };
        let a = raycast_lidar(&pose, &arena, &cfg, 1234).unwrap();
        let b = raycast_lidar(&pose, &arena, &cfg, 1234).unwrap();
        assert_eq!(a, b);
        let c = raycast_lidar(&pose, &arena, &cfg, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn arena_json_round_trip() {
        let arena = Arena::with_obstacles(9.0, vec![Obstacle::new(1.0, -2.0, 0.2)]);
        let text = serde_json::to_string(&arena).unwrap();
        assert!(text.contains("\"cx\""));
        let back: Arena = serde_json::from_str(&text).unwrap();
        assert_eq!(arena, back);
    }
}
