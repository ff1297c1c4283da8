//! Named defaults for every scenario constant used across the workspace.
//!
//! Config types pull their `Default` impls from here so that no numeric
//! scenario parameter is ever hard-coded at a call site.

/// Arena boundary radius in meters.
pub const ARENA_RADIUS_M: f64 = 9.0;
/// Half extent of a square pillar obstacle (0.4 x 0.4 m footprint).
pub const OBSTACLE_HALF_EXTENT_M: f64 = 0.2;
/// Pursuer speed limit in m/s.
pub const PURSUER_MAX_SPEED_MPS: f64 = 0.8;
/// Default evader speed in m/s.
pub const EVADER_SPEED_MPS: f64 = 0.8;
/// Maximum LiDAR sensing range in meters.
pub const LIDAR_RANGE_M: f64 = 10.0;
/// LiDAR rays per revolution (1 degree spacing).
pub const LIDAR_AZIMUTH_SAMPLES: usize = 360;
/// LiDAR horizontal field of view in degrees.
pub const LIDAR_HORIZONTAL_FOV_DEG: f64 = 360.0;
/// LiDAR vertical field of view in degrees (min, max).
pub const LIDAR_VERTICAL_FOV_DEG: (f64, f64) = (-10.0, 20.0);
/// Elevation rows synthesized per azimuth hit.
pub const LIDAR_ELEVATION_SAMPLES: usize = 6;
/// Observation grid rows (elevation bins).
pub const GRID_ROWS: usize = 6;
/// Observation grid columns (azimuth bins).
pub const GRID_COLS: usize = 120;
/// Capture radius in meters: an episode ends in capture when any pursuer
/// closes within this distance of the evader.
pub const CAPTURE_RADIUS_M: f64 = 1.4;
/// Episode time limit in seconds.
pub const EPISODE_TIME_LIMIT_S: f64 = 30.0;
/// Control (policy) rate in Hz.
pub const CONTROL_HZ: u32 = 10;
/// Physics integration rate in Hz.
pub const PHYSICS_HZ: u32 = 100;
/// Distance behind the evader at which the pursuer line spawns, meters.
pub const SPAWN_BACK_DISTANCE_M: f64 = 3.5;
/// Lateral spacing between spawned pursuers, meters.
pub const SPAWN_LATERAL_SPACING_M: f64 = 1.0;
/// Agent body radius used for collision inflation, meters.
pub const AGENT_RADIUS_M: f64 = 0.2;
/// Center-to-center distance below which two pursuers collide, meters.
pub const INTER_PURSUER_COLLISION_M: f64 = 0.4;
/// First-order velocity-tracking time constant, seconds.
pub const VELOCITY_TIME_CONSTANT_S: f64 = 0.3;
/// Fixed flight altitude of all agents, meters.
pub const FLIGHT_ALTITUDE_M: f64 = 1.0;
/// Prediction horizon in control steps.
pub const PREDICTION_HORIZON_STEPS: usize = 10;
/// Control step duration in seconds.
pub const CONTROL_DT_S: f64 = 0.1;
/// Evader position history window, in control steps.
pub const TRACK_HISTORY_WINDOW: usize = 10;
/// Distance floor for the 1/r intent values, meters.
pub const INTENT_DISTANCE_FLOOR_M: f64 = 0.1;
/// Default deadline for one external-policy round trip, milliseconds.
pub const BRIDGE_DEADLINE_MS: u64 = 50;
