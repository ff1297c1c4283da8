//! Deterministic planar pursuit-evasion simulation with an egocentric
//! spherical-grid perception encoder.
//!
//! The crate is organized around six pieces:
//!
//! - [`geometry`]: frames, transforms, the circular arena, and the
//!   simulated LiDAR raycaster;
//! - [`psto`]: the two-channel observation encoder (obstacle proximity +
//!   predictive intent heatmap) and the evader track with its occlusion
//!   fallback;
//! - [`sim`]: agent kinematics, episode spawning, termination, and the
//!   12-dimensional proprioceptive vector;
//! - [`rewards`]: the shared dense + sparse team reward;
//! - [`policies`]: scripted pursuer heuristics, the scripted wall-following
//!   evader, and the JSON-lines bridge for external policies;
//! - [`episode`]: the 10 Hz control loop over the 100 Hz physics.
//!
//! Everything is deterministic for a fixed seed: episodes, point clouds,
//! observations, and outcomes reproduce bit-for-bit.

pub mod constants;
pub mod episode;
pub mod geometry;
pub mod policies;
pub mod psto;
pub mod rewards;
pub mod sim;

pub use episode::{run_episode, Episode, EpisodeOptions, EpisodeResult, TeamController};
pub use geometry::{Arena, Obstacle, Vec3};
pub use policies::PursuerPolicyKind;
pub use psto::{GridConfig, IntentParams, PstoTensor};
pub use sim::{EpisodeConfig, Outcome};
