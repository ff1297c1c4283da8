//! Static scene files for golden observation dumps: JSON describing the
//! arena, the observing agent, the evader track, and teammate states.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pursuit_core::geometry::{raycast_lidar, AgentPose, Arena, LidarConfig, Vec3};
use pursuit_core::psto::dump::{write_dump, DumpMeta};
use pursuit_core::psto::{
    build_psto, ConstantVelocityPredictor, EvaderTrack, GridConfig, HoldPositionPredictor,
    IntentParams, PstoTensor, TeammateState, TrajectoryPredictor,
};

use crate::rollouts::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneAgent {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneEvader {
    pub position: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 3],
    /// When false, the effective position falls back to the prediction
    /// made from the history, exercising the occlusion path.
    #[serde(default = "default_true")]
    pub observable: bool,
    /// Optional explicit position history (oldest first); synthesized from
    /// the velocity when absent.
    #[serde(default)]
    pub history: Vec<[f64; 3]>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneTeammate {
    pub position: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 3],
}

/// One encodable scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub arena: Arena,
    pub ego: SceneAgent,
    pub evader: SceneEvader,
    #[serde(default)]
    pub teammates: Vec<SceneTeammate>,
    #[serde(default)]
    pub lidar: LidarConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub intent: IntentParams,
    #[serde(default)]
    pub noise_seed: u64,
}

impl SceneFile {
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::InvalidSpec(format!("scene parse: {e}")))
    }
}

/// Encode a scene into the observation tensor.
pub fn encode_scene(scene: &SceneFile) -> Result<(PstoTensor, DumpMeta), HarnessError> {
    let pose = AgentPose::new(Vec3::from_array(scene.ego.position), scene.ego.yaw);
    let cloud = raycast_lidar(&pose, &scene.arena, &scene.lidar, scene.noise_seed)
        .map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;

    let mut track = EvaderTrack::new(scene.intent.history_window);
    let evader_pos = Vec3::from_array(scene.evader.position);
    let evader_vel = Vec3::from_array(scene.evader.velocity);
    if scene.evader.history.is_empty() {
        // Two synthetic samples one control step apart reproduce the
        // declared velocity under the constant-velocity predictor.
        track.seed(evader_pos - evader_vel * scene.intent.dt);
        track.seed(evader_pos);
    } else {
        for p in &scene.evader.history {
            track.seed(Vec3::from_array(*p));
        }
    }

    let predict = |track: &EvaderTrack| {
        let history = track.history_vec();
        if history.len() >= 2 {
            ConstantVelocityPredictor.predict(&history, scene.intent.t_future, scene.intent.dt)
        } else {
            HoldPositionPredictor.predict(&history, scene.intent.t_future, scene.intent.dt)
        }
    };
    // Prior prediction, then the effective-position rule, then the
    // prediction actually used for the intent channel.
    track.set_prediction(predict(&track).map_err(|e| HarnessError::InvalidSpec(e.to_string()))?);
    track
        .effective_position(scene.evader.observable.then_some(evader_pos))
        .map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
    track.set_prediction(predict(&track).map_err(|e| HarnessError::InvalidSpec(e.to_string()))?);

    let teammates: Vec<TeammateState> = scene
        .teammates
        .iter()
        .map(|t| TeammateState {
            position: Vec3::from_array(t.position),
            velocity: Vec3::from_array(t.velocity),
        })
        .collect();

    let tensor = build_psto(
        &cloud,
        &track,
        &teammates,
        &pose,
        &scene.grid,
        &scene.intent,
        scene.lidar.r_max,
    )
    .map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
    let meta = DumpMeta {
        v_d: scene.grid.rows,
        h_d: scene.grid.cols,
        r_max: scene.lidar.r_max,
        params: scene.intent,
    };
    Ok((tensor, meta))
}

/// Encode a scene file and write the golden dump pair
/// (`<prefix>.bin`, `<prefix>.json`).
pub fn encode_scene_to_files(
    scene_path: impl AsRef<Path>,
    out_prefix: impl AsRef<Path>,
) -> Result<(), HarnessError> {
    let scene = SceneFile::load_json(scene_path)?;
    let (tensor, meta) = encode_scene(&scene)?;
    let prefix = out_prefix.as_ref();
    let bin = prefix.with_extension("bin");
    let json = prefix.with_extension("json");
    write_dump(&tensor, &meta, bin, json).map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
    Ok(())
}
