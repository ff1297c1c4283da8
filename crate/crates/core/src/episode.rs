//! The control-cycle loop: observation assembly, policy queries, physics
//! substeps, termination, and reward bookkeeping for one episode.

use serde::{Deserialize, Serialize};

use crate::geometry::raycast_lidar;
use crate::policies::bridge::{BridgeClient, GridShape, ObsFrame};
use crate::policies::{
    angelani_pursuer, apf_pursuer, janosov_pursuer, AngelaniParams, ApfParams, EvaderEstimate,
    EvaderParams, EvaderView, JanosovParams, PursuerPolicyKind, PursuerView, ScriptedEvader,
    VelocityCommand,
};
use crate::psto::{
    build_psto, ConstantVelocityPredictor, EvaderTrack, HoldPositionPredictor, PstoTensor,
    TeammateState, TrajectoryPredictor,
};
use crate::rewards::{total_reward, total_reward_with_clearances, RewardBreakdown};
use crate::sim::{
    build_proprio, check_termination, derive_seed, observable, spawn_episode, step_physics,
    EpisodeConfig, Outcome, ProprioVector, SimError, WorldState,
};

/// Scripted pursuer controller with its frozen gains.
#[derive(Debug, Clone)]
pub enum ScriptedPursuer {
    Apf(ApfParams),
    Angelani(AngelaniParams),
    Janosov(JanosovParams),
}

impl ScriptedPursuer {
    pub fn command(&self, view: &PursuerView) -> VelocityCommand {
        match self {
            Self::Apf(p) => apf_pursuer(view, p),
            Self::Angelani(p) => angelani_pursuer(view, p),
            Self::Janosov(p) => janosov_pursuer(view, p),
        }
    }
}

/// Team controller: scripted heuristics run in-process, external policies
/// are queried over the bridge.
pub enum TeamController {
    Scripted(ScriptedPursuer),
    External(BridgeClient),
}

impl TeamController {
    /// Build the default controller for a policy kind. External endpoints
    /// connect with the default deadline and framed payloads.
    pub fn from_kind(kind: &PursuerPolicyKind) -> Result<Self, SimError> {
        Ok(match kind {
            PursuerPolicyKind::Apf => Self::Scripted(ScriptedPursuer::Apf(ApfParams::default())),
            PursuerPolicyKind::Angelani => {
                Self::Scripted(ScriptedPursuer::Angelani(AngelaniParams::default()))
            }
            PursuerPolicyKind::Janosov => {
                Self::Scripted(ScriptedPursuer::Janosov(JanosovParams::default()))
            }
            PursuerPolicyKind::External(endpoint) => Self::External(BridgeClient::connect(
                endpoint,
                BridgeClient::default_deadline(),
                crate::policies::bridge::PayloadMode::Framed,
            )?),
        })
    }
}

/// Per-pursuer observation handed to learned policies and golden dumps.
#[derive(Debug, Clone)]
pub struct Observation {
    pub psto: PstoTensor,
    pub proprio: ProprioVector,
}

/// Kinematic snapshot of one agent inside a trajectory record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub yaw: f64,
}

impl AgentSnapshot {
    fn of(agent: &crate::sim::AgentState) -> Self {
        Self {
            position: agent.position.to_array(),
            velocity: agent.velocity.to_array(),
            yaw: agent.yaw,
        }
    }
}

/// One control cycle in a trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u32,
    pub tick: u64,
    pub pursuers: Vec<AgentSnapshot>,
    pub evader: AgentSnapshot,
    pub commands: Vec<[f64; 2]>,
    pub evader_command: [f64; 2],
    pub reward: RewardBreakdown,
    pub outcome: Outcome,
    pub evader_observable: bool,
    pub min_capture_distance: f64,
}

/// Loop options orthogonal to the episode config.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeOptions {
    /// Keep per-cycle records (trajectory logging and analysis).
    pub record_trajectory: bool,
    /// Build grid observations even for scripted teams that do not consume
    /// them. Always on for external controllers.
    pub build_observations: bool,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        Self {
            record_trajectory: false,
            build_observations: false,
        }
    }
}

/// Result of a completed episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub outcome: Outcome,
    /// Control cycles executed.
    pub cycles: u32,
    pub records: Vec<CycleRecord>,
}

/// Output of one control cycle.
pub struct CycleSummary {
    pub outcome: Outcome,
    pub reward: RewardBreakdown,
    /// Present when observation building is enabled.
    pub observations: Option<Vec<Observation>>,
}

/// A running episode. One logical thread of execution; the shared evader
/// track is mutated only here.
pub struct Episode {
    cfg: EpisodeConfig,
    state: WorldState,
    track: EvaderTrack,
    evader_policy: ScriptedEvader,
    controller: TeamController,
    opts: EpisodeOptions,
    last_reward: RewardBreakdown,
    outcome: Outcome,
    cycle: u32,
    records: Vec<CycleRecord>,
}

impl Episode {
    pub fn new(
        cfg: EpisodeConfig,
        controller: TeamController,
        opts: EpisodeOptions,
    ) -> Result<Self, SimError> {
        let state = spawn_episode(&cfg)?;
        let mut track = EvaderTrack::new(cfg.intent.history_window);
        // The track starts from the spawn handoff so the occlusion fallback
        // is well defined from cycle 0.
        track.seed(state.evader.position);

        let mut controller = controller;
        if let TeamController::External(client) = &mut controller {
            if !client.is_handshaken() {
                client.handshake(
                    cfg.n_pursuers,
                    GridShape {
                        v_d: cfg.grid.rows,
                        h_d: cfg.grid.cols,
                    },
                )?;
            }
        }

        Ok(Self {
            evader_policy: ScriptedEvader::new(EvaderParams::default()),
            opts,
            cfg,
            state,
            track,
            controller,
            last_reward: RewardBreakdown::default(),
            outcome: Outcome::Running,
            cycle: 0,
            records: Vec::new(),
        })
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn cycles(&self) -> u32 {
        self.cycle
    }

    pub fn track(&self) -> &EvaderTrack {
        &self.track
    }

    /// Replace the scripted evader's gains (robustness studies).
    pub fn set_evader_params(&mut self, params: EvaderParams) {
        self.evader_policy = ScriptedEvader::new(params);
    }

    fn teammates_of(&self, idx: usize) -> Vec<TeammateState> {
        self.state
            .pursuers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != idx)
            .map(|(_, a)| TeammateState {
                position: a.position,
                velocity: a.velocity,
            })
            .collect()
    }

    fn build_observation(&self, idx: usize) -> Result<Observation, SimError> {
        let agent = &self.state.pursuers[idx];
        let pose = agent.pose();
        let noise_seed = derive_seed(self.cfg.seed, self.state.tick, idx as u64 + 1);
        let cloud = raycast_lidar(&pose, &self.state.arena, &self.cfg.lidar, noise_seed)?;
        let psto = build_psto(
            &cloud,
            &self.track,
            &self.teammates_of(idx),
            &pose,
            &self.cfg.grid,
            &self.cfg.intent,
            self.cfg.lidar.r_max,
        )?;
        Ok(Observation {
            psto,
            proprio: build_proprio(agent),
        })
    }

    /// Run one control cycle: update the shared evader track, build
    /// observations, query the team policy once, apply the commands for
    /// `physics_hz / control_hz` substeps, then evaluate termination and
    /// the shared reward.
    pub fn step_cycle(&mut self) -> Result<CycleSummary, SimError> {
        if self.outcome.is_terminal() {
            return Err(SimError::TerminalState);
        }

        // Track update: observation if any pursuer sees the evader, prior
        // prediction otherwise; then re-predict from the updated history.
        let seen = observable(
            self.state.evader.position,
            &self.state.pursuers,
            &self.state.arena,
            self.cfg.lidar.r_max,
        );
        self.track
            .effective_position(seen.then_some(self.state.evader.position))?;
        let prediction = {
            let history = self.track.history_vec();
            let horizon = self.cfg.intent.t_future;
            let dt = self.cfg.intent.dt;
            if history.len() >= 2 {
                ConstantVelocityPredictor.predict(&history, horizon, dt)?
            } else {
                HoldPositionPredictor.predict(&history, horizon, dt)?
            }
        };
        self.track.set_prediction(prediction);

        let need_observations =
            self.opts.build_observations || matches!(self.controller, TeamController::External(_));
        let observations = if need_observations {
            let mut all = Vec::with_capacity(self.state.pursuers.len());
            for idx in 0..self.state.pursuers.len() {
                all.push(self.build_observation(idx)?);
            }
            Some(all)
        } else {
            None
        };

        // One policy query per pursuer.
        let commands = if let TeamController::Scripted(policy) = &self.controller {
            let r_max = self.cfg.lidar.r_max;
            let mut cmds = Vec::with_capacity(self.state.pursuers.len());
            for idx in 0..self.state.pursuers.len() {
                let agent = &self.state.pursuers[idx];
                let in_range = agent.position.distance(self.state.evader.position) <= r_max;
                let view = PursuerView {
                    position: agent.position,
                    velocity: agent.velocity,
                    yaw: agent.yaw,
                    evader: in_range.then_some(EvaderEstimate {
                        position: self.state.evader.position,
                        velocity: self.state.evader.velocity,
                    }),
                    teammates: self.teammates_of(idx),
                    arena: &self.state.arena,
                    v_max: self.cfg.pursuer_v_max,
                };
                cmds.push(policy.command(&view).clamped(self.cfg.pursuer_v_max).to_array());
            }
            cmds
        } else {
            let TeamController::External(client) = &mut self.controller else {
                unreachable!("controller is scripted or external");
            };
            let observations = observations.as_ref().expect("built for external teams");
            let mut cmds = Vec::with_capacity(observations.len());
            for (idx, obs) in observations.iter().enumerate() {
                let cmd = client.request_command(ObsFrame {
                    agent_id: idx,
                    tick: self.state.tick,
                    psto: &obs.psto,
                    proprio: obs.proprio.as_array().to_vec(),
                    reward: self.last_reward,
                    outcome: self.outcome,
                })?;
                let clamped = VelocityCommand::new(cmd[0], cmd[1])
                    .clamped(self.cfg.pursuer_v_max)
                    .to_array();
                cmds.push(clamped);
            }
            cmds
        };

        let evader_cmd = {
            let view = EvaderView {
                position: self.state.evader.position,
                velocity: self.state.evader.velocity,
                yaw: self.state.evader.yaw,
                pursuers: self
                    .state
                    .pursuers
                    .iter()
                    .map(|a| TeammateState {
                        position: a.position,
                        velocity: a.velocity,
                    })
                    .collect(),
                arena: &self.state.arena,
                speed: self.cfg.evader_speed,
            };
            self.evader_policy
                .command(&view)
                .clamped(self.cfg.evader_speed)
                .to_array()
        };

        let dt = self.cfg.physics_dt();
        for _ in 0..self.cfg.substeps() {
            step_physics(&mut self.state, &commands, evader_cmd, &self.cfg, dt)?;
        }

        self.cycle += 1;
        let outcome = check_termination(&self.state, &self.cfg);
        let reward = if self.cfg.rewards.sensed_clearance {
            let mut clearances = Vec::with_capacity(self.state.pursuers.len());
            for idx in 0..self.state.pursuers.len() {
                let pose = self.state.pursuers[idx].pose();
                let noise_seed = derive_seed(self.cfg.seed, self.state.tick, idx as u64 + 1);
                let cloud = raycast_lidar(&pose, &self.state.arena, &self.cfg.lidar, noise_seed)?;
                let min_range = cloud
                    .points
                    .iter()
                    .map(|p| p.norm())
                    .fold(self.cfg.lidar.r_max, f64::min);
                clearances.push(min_range);
            }
            total_reward_with_clearances(
                &self.state.pursuers,
                &self.state.evader,
                &clearances,
                &self.cfg.rewards,
                outcome,
            )
        } else {
            total_reward(
                &self.state.pursuers,
                &self.state.evader,
                &self.state.arena,
                &self.cfg.rewards,
                outcome,
            )
        };
        self.outcome = outcome;
        self.last_reward = reward;

        if self.opts.record_trajectory {
            self.records.push(CycleRecord {
                cycle: self.cycle,
                tick: self.state.tick,
                pursuers: self.state.pursuers.iter().map(AgentSnapshot::of).collect(),
                evader: AgentSnapshot::of(&self.state.evader),
                commands: commands.clone(),
                evader_command: evader_cmd,
                reward,
                outcome,
                evader_observable: seen,
                min_capture_distance: self.state.min_capture_distance(),
            });
        }

        Ok(CycleSummary {
            outcome,
            reward,
            observations,
        })
    }

    /// Run to termination.
    pub fn run(mut self) -> Result<EpisodeResult, SimError> {
        while !self.outcome.is_terminal() {
            self.step_cycle()?;
        }
        Ok(EpisodeResult {
            outcome: self.outcome,
            cycles: self.cycle,
            records: self.records,
        })
    }
}

/// Spawn and run a whole episode under a policy kind.
pub fn run_episode(
    cfg: EpisodeConfig,
    kind: &PursuerPolicyKind,
    opts: EpisodeOptions,
) -> Result<EpisodeResult, SimError> {
    let controller = TeamController::from_kind(kind)?;
    Episode::new(cfg, controller, opts)?.run()
}
