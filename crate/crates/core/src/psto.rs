//! Two-channel egocentric observation encoder.
//!
//! Channel 0 (`M_LiDAR`) is an inverted-range obstacle proximity map built
//! from the current point cloud: each cell holds `r_max - min range` over
//! the points projecting into it, so higher values mean nearer geometry.
//! Channel 1 (`H_intent`) is a predictive intent heatmap: positive
//! attraction values toward the evader's current and predicted positions,
//! plus negative repulsion values toward teammates' current and
//! extrapolated positions. Both channels share one spherical-grid
//! projection onto a `rows x cols` (elevation x azimuth) pseudo-image.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;
use crate::geometry::{cartesian_to_spherical, AgentPose, PointCloud, Vec3};

pub mod dump;

#[derive(Debug, Error)]
pub enum PstoError {
    #[error("point range {range:.6} exceeds sensor maximum {r_max:.6}")]
    RangeExceedsMax { range: f64, r_max: f64 },
    #[error("grid shape mismatch: {a_rows}x{a_cols} vs {b_rows}x{b_cols}")]
    ShapeMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },
    #[error("evader track is empty and no observation is available; seed the track first")]
    ColdStart,
    #[error("predictor '{predictor}' needs at least {needed} history samples, have {have}")]
    InsufficientHistory {
        predictor: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("unknown predictor '{0}'")]
    UnknownPredictor(String),
    #[error("dump payload length {got} bytes does not match {expected} for shape 2x{rows}x{cols}")]
    DumpLength {
        got: usize,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("dump sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

/// Boundary-exact angles land in the upper (half-open) cell; this nudge, a
/// billionth of a cell, keeps that stable against floating-point division.
const CELL_EPS: f64 = 1e-9;

/// Tolerance for the `range <= r_max` input contract, absorbing rounding
/// in slant-range reconstruction.
const RANGE_TOL: f64 = 1e-9;

/// Spherical-grid quantization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Elevation rows.
    pub rows: usize,
    /// Azimuth columns.
    pub cols: usize,
    /// Lower azimuth bound, radians.
    pub phi_min: f64,
    /// Lower elevation bound, radians.
    pub theta_min: f64,
    /// Azimuth cell width, radians.
    pub d_phi: f64,
    /// Elevation cell height, radians.
    pub d_theta: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let rows = constants::GRID_ROWS;
        let cols = constants::GRID_COLS;
        let (theta_lo, theta_hi) = constants::LIDAR_VERTICAL_FOV_DEG;
        Self {
            rows,
            cols,
            phi_min: -std::f64::consts::PI,
            theta_min: theta_lo.to_radians(),
            d_phi: std::f64::consts::TAU / cols as f64,
            d_theta: (theta_hi - theta_lo).to_radians() / rows as f64,
        }
    }
}

impl GridConfig {
    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Quantize `(azimuth, elevation)` to `(v, h)`; `None` outside the
    /// half-open field of view.
    pub fn quantize(&self, azimuth: f64, elevation: f64) -> Option<(usize, usize)> {
        let th = (azimuth - self.phi_min) / self.d_phi + CELL_EPS;
        let tv = (elevation - self.theta_min) / self.d_theta + CELL_EPS;
        if th < 0.0 || tv < 0.0 {
            return None;
        }
        let (h, v) = (th.floor() as usize, tv.floor() as usize);
        if h >= self.cols || v >= self.rows {
            return None;
        }
        Some((v, h))
    }
}

/// Project a body-frame point onto the grid. Zero-norm points and points
/// outside the field of view are disregarded.
pub fn project_to_grid(p: Vec3, cfg: &GridConfig) -> Option<(usize, usize)> {
    let s = cartesian_to_spherical(p).ok()?;
    cfg.quantize(s.azimuth, s.elevation)
}

/// Dense row-major `rows x cols` scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, v: usize, h: usize) -> f64 {
        self.data[v * self.cols + h]
    }

    #[inline]
    pub fn set(&mut self, v: usize, h: usize, value: f64) {
        self.data[v * self.cols + h] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Iterate `((v, h), value)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &x)| ((i / self.cols, i % self.cols), x))
    }
}

/// The stacked two-channel observation tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PstoTensor {
    /// Channel 0: obstacle proximity map, values in `[0, r_max]`.
    pub lidar: Grid,
    /// Channel 1: intent heatmap (evader attraction + teammate repulsion).
    pub intent: Grid,
}

impl PstoTensor {
    /// `(channels, rows, cols)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (2, self.lidar.rows(), self.lidar.cols())
    }

    /// Row-major little-endian `f32` bytes, channel 0 then channel 1.
    pub fn to_f32_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * self.lidar.data().len());
        for channel in [&self.lidar, &self.intent] {
            for &x in channel.data() {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        out
    }

    /// Inverse of [`to_f32_bytes`](Self::to_f32_bytes).
    pub fn from_f32_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<Self, PstoError> {
        let expected = 2 * rows * cols * 4;
        if bytes.len() != expected {
            return Err(PstoError::DumpLength {
                got: bytes.len(),
                expected,
                rows,
                cols,
            });
        }
        let mut channels = Vec::with_capacity(2);
        for c in 0..2 {
            let mut grid = Grid::zeros(rows, cols);
            for i in 0..rows * cols {
                let off = (c * rows * cols + i) * 4;
                let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
                grid.data[i] = v as f64;
            }
            channels.push(grid);
        }
        let intent = channels.pop().unwrap();
        let lidar = channels.pop().unwrap();
        Ok(Self { lidar, intent })
    }
}

/// Intent-heatmap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntentParams {
    /// Evader attraction strength (positive).
    pub v_evader: f64,
    /// Teammate repulsion strength (positive; the value itself is negated).
    pub v_teammate: f64,
    /// Temporal decay per prediction step for the evader, in (0, 1].
    pub lambda_e: f64,
    /// Temporal decay per prediction step for teammates, in (0, 1].
    pub lambda_t: f64,
    /// Prediction horizon in control steps.
    pub t_future: usize,
    /// Control step duration, seconds.
    pub dt: f64,
    /// Evader history window, in control steps.
    pub history_window: usize,
    /// Range floor shielding the 1/r singularity, meters.
    pub distance_floor: f64,
}

impl Default for IntentParams {
    fn default() -> Self {
        Self {
            v_evader: 1.0,
            v_teammate: 1.0,
            lambda_e: 0.9,
            lambda_t: 0.9,
            t_future: constants::PREDICTION_HORIZON_STEPS,
            dt: constants::CONTROL_DT_S,
            history_window: constants::TRACK_HISTORY_WINDOW,
            distance_floor: constants::INTENT_DISTANCE_FLOOR_M,
        }
    }
}

/// Build the obstacle proximity channel from a body-frame cloud.
///
/// Each cell holds `r_max - min range` over the points that project into it
/// (nearest geometry wins) and 0 when empty. Points with range beyond
/// `r_max` violate the input contract.
pub fn encode_lidar_channel(
    cloud: &PointCloud,
    cfg: &GridConfig,
    r_max: f64,
) -> Result<Grid, PstoError> {
    let mut min_range = vec![f64::INFINITY; cfg.cell_count()];
    for &p in &cloud.points {
        let Ok(s) = cartesian_to_spherical(p) else {
            continue;
        };
        if s.range > r_max + RANGE_TOL {
            return Err(PstoError::RangeExceedsMax {
                range: s.range,
                r_max,
            });
        }
        if let Some((v, h)) = cfg.quantize(s.azimuth, s.elevation) {
            let slot = &mut min_range[v * cfg.cols + h];
            *slot = slot.min(s.range);
        }
    }
    let mut grid = Grid::zeros(cfg.rows, cfg.cols);
    for (i, &r) in min_range.iter().enumerate() {
        if r.is_finite() {
            grid.data[i] = (r_max - r).max(0.0);
        }
    }
    Ok(grid)
}

/// Attraction value of a body-frame evader point at prediction step `k`.
pub fn evader_attraction(p: Vec3, k: usize, params: &IntentParams) -> f64 {
    let r = p.norm().max(params.distance_floor);
    params.v_evader / r * params.lambda_e.powi(k as i32)
}

/// Repulsion value of a body-frame teammate point at prediction step `k`;
/// strictly negative.
pub fn teammate_repulsion(p: Vec3, k: usize, params: &IntentParams) -> f64 {
    let r = p.norm().max(params.distance_floor);
    -params.v_teammate / r * params.lambda_t.powi(k as i32)
}

/// Linear extrapolation of a teammate `k` steps ahead, `k in [1, t_future]`.
pub fn extrapolate_teammate(position: Vec3, velocity: Vec3, k: usize, dt: f64) -> Vec3 {
    debug_assert!(k >= 1, "step 0 is the current position, not an extrapolation");
    position + velocity * (k as f64 * dt)
}

/// Max-aggregate evader attraction over body-frame `(point, step)` pairs.
pub fn encode_evader_channel(
    points: &[(Vec3, usize)],
    cfg: &GridConfig,
    params: &IntentParams,
) -> Grid {
    let mut grid = Grid::zeros(cfg.rows, cfg.cols);
    for &(p, k) in points {
        if let Some((v, h)) = project_to_grid(p, cfg) {
            let value = evader_attraction(p, k, params);
            let slot = &mut grid.data[v * cfg.cols + h];
            if value > *slot {
                *slot = value;
            }
        }
    }
    grid
}

/// Min-aggregate teammate repulsion over body-frame `(point, step)` pairs;
/// the most constraining (most negative) value is retained per cell.
pub fn encode_teammate_channel(
    points: &[(Vec3, usize)],
    cfg: &GridConfig,
    params: &IntentParams,
) -> Grid {
    let mut grid = Grid::zeros(cfg.rows, cfg.cols);
    for &(p, k) in points {
        if let Some((v, h)) = project_to_grid(p, cfg) {
            let value = teammate_repulsion(p, k, params);
            let slot = &mut grid.data[v * cfg.cols + h];
            if value < *slot {
                *slot = value;
            }
        }
    }
    grid
}

/// Elementwise sum of the evader and teammate maps.
pub fn compose_intent(evader: &Grid, teammate: &Grid) -> Result<Grid, PstoError> {
    if evader.rows != teammate.rows || evader.cols != teammate.cols {
        return Err(PstoError::ShapeMismatch {
            a_rows: evader.rows,
            a_cols: evader.cols,
            b_rows: teammate.rows,
            b_cols: teammate.cols,
        });
    }
    let mut out = evader.clone();
    for (slot, &t) in out.data.iter_mut().zip(teammate.data.iter()) {
        *slot += t;
    }
    Ok(out)
}

/// Predicted world-frame waypoints, indexed `k = 1..=horizon`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Prediction {
    pub waypoints: Vec<Vec3>,
}

/// Pluggable trajectory predictor over a world-frame position history.
pub trait TrajectoryPredictor: Send + Sync {
    fn name(&self) -> &'static str;
    /// Predict `horizon` waypoints from `history` (oldest first), sampled
    /// one control step (`dt`) apart.
    fn predict(&self, history: &[Vec3], horizon: usize, dt: f64) -> Result<Prediction, PstoError>;
}

/// Constant-velocity extrapolation from the last two history samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantVelocityPredictor;

impl TrajectoryPredictor for ConstantVelocityPredictor {
    fn name(&self) -> &'static str {
        "constant-velocity"
    }

    fn predict(&self, history: &[Vec3], horizon: usize, dt: f64) -> Result<Prediction, PstoError> {
        if history.len() < 2 {
            return Err(PstoError::InsufficientHistory {
                predictor: self.name(),
                needed: 2,
                have: history.len(),
            });
        }
        let last = history[history.len() - 1];
        let prev = history[history.len() - 2];
        let velocity = (last - prev) * (1.0 / dt);
        let waypoints = (1..=horizon)
            .map(|k| last + velocity * (k as f64 * dt))
            .collect();
        Ok(Prediction { waypoints })
    }
}

/// Degenerate predictor that repeats the latest position.
#[derive(Debug, Clone, Copy, Default)]
pub struct HoldPositionPredictor;

impl TrajectoryPredictor for HoldPositionPredictor {
    fn name(&self) -> &'static str {
        "hold-position"
    }

    fn predict(&self, history: &[Vec3], horizon: usize, _dt: f64) -> Result<Prediction, PstoError> {
        let Some(&last) = history.last() else {
            return Err(PstoError::InsufficientHistory {
                predictor: self.name(),
                needed: 1,
                have: 0,
            });
        };
        Ok(Prediction {
            waypoints: vec![last; horizon],
        })
    }
}

/// Look up a registered predictor by name. Learned predictors are expected
/// to be served externally over the policy bridge rather than registered
/// here.
pub fn predictor_by_name(name: &str) -> Result<Box<dyn TrajectoryPredictor>, PstoError> {
    match name {
        "constant-velocity" => Ok(Box::new(ConstantVelocityPredictor)),
        "hold-position" => Ok(Box::new(HoldPositionPredictor)),
        other => Err(PstoError::UnknownPredictor(other.to_string())),
    }
}

/// Run a predictor over a track's history.
pub fn predict_evader(
    track: &EvaderTrack,
    predictor: &dyn TrajectoryPredictor,
    horizon: usize,
    dt: f64,
) -> Result<Prediction, PstoError> {
    predictor.predict(&track.history_vec(), horizon, dt)
}

/// Shared per-team evader track: position history, the latest prediction,
/// and the current observability flag.
///
/// When the evader is unobservable, the effective position falls back to
/// the first waypoint of the prediction made on the previous step, keeping
/// the intent channel populated through occlusions.
#[derive(Debug, Clone, Default)]
pub struct EvaderTrack {
    history: VecDeque<Vec3>,
    last_prediction: Vec<Vec3>,
    observable_now: bool,
    window: usize,
}

impl EvaderTrack {
    pub fn new(window: usize) -> Self {
        Self {
            history: VecDeque::with_capacity(window),
            last_prediction: Vec::new(),
            observable_now: false,
            window: window.max(1),
        }
    }

    /// Push a known position directly (episode start seeding).
    pub fn seed(&mut self, position: Vec3) {
        self.push_history(position);
        self.observable_now = true;
    }

    fn push_history(&mut self, p: Vec3) {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(p);
    }

    /// Resolve the effective evader position for this step: the observation
    /// when present, otherwise the first waypoint of the prior prediction.
    /// The resolved position is appended to the history.
    pub fn effective_position(&mut self, observed: Option<Vec3>) -> Result<Vec3, PstoError> {
        let eff = match observed {
            Some(p) => {
                self.observable_now = true;
                p
            }
            None => {
                self.observable_now = false;
                *self.last_prediction.first().ok_or(PstoError::ColdStart)?
            }
        };
        self.push_history(eff);
        Ok(eff)
    }

    pub fn set_prediction(&mut self, prediction: Prediction) {
        self.last_prediction = prediction.waypoints;
    }

    pub fn prediction(&self) -> &[Vec3] {
        &self.last_prediction
    }

    pub fn observable_now(&self) -> bool {
        self.observable_now
    }

    pub fn latest(&self) -> Option<Vec3> {
        self.history.back().copied()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn history_vec(&self) -> Vec<Vec3> {
        self.history.iter().copied().collect()
    }

    /// World-frame `(point, step)` set for the intent channel: the latest
    /// effective position at step 0 followed by the prediction at 1..
    pub fn intent_points(&self) -> Result<Vec<(Vec3, usize)>, PstoError> {
        let current = self.latest().ok_or(PstoError::ColdStart)?;
        let mut points = Vec::with_capacity(1 + self.last_prediction.len());
        points.push((current, 0));
        points.extend(
            self.last_prediction
                .iter()
                .enumerate()
                .map(|(i, &p)| (p, i + 1)),
        );
        Ok(points)
    }
}

/// World-frame kinematic state shared by a teammate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeammateState {
    pub position: Vec3,
    pub velocity: Vec3,
}

/// Assemble the full two-channel observation for one agent.
///
/// The cloud is already in the agent's body frame; evader track points and
/// teammate states are world-frame and are transformed through `ego_pose`.
pub fn build_psto(
    cloud: &PointCloud,
    track: &EvaderTrack,
    teammates: &[TeammateState],
    ego_pose: &AgentPose,
    cfg: &GridConfig,
    params: &IntentParams,
    r_max: f64,
) -> Result<PstoTensor, PstoError> {
    let lidar = encode_lidar_channel(cloud, cfg, r_max)?;

    let evader_points: Vec<(Vec3, usize)> = track
        .intent_points()?
        .into_iter()
        .map(|(p, k)| (ego_pose.world_to_body(p), k))
        .collect();
    let evader_map = encode_evader_channel(&evader_points, cfg, params);

    let mut teammate_points = Vec::with_capacity(teammates.len() * (1 + params.t_future));
    for tm in teammates {
        teammate_points.push((ego_pose.world_to_body(tm.position), 0));
        for k in 1..=params.t_future {
            let world = extrapolate_teammate(tm.position, tm.velocity, k, params.dt);
            teammate_points.push((ego_pose.world_to_body(world), k));
        }
    }
    let teammate_map = encode_teammate_channel(&teammate_points, cfg, params);

    let intent = compose_intent(&evader_map, &teammate_map)?;
    Ok(PstoTensor { lidar, intent })
}
