//! Run configuration: one TOML file covers the scenario (workspace, motion,
//! tolerances), the reward shape, the curriculum schedule and PPO
//! hyperparameters. Every value has a default; shipped files under
//! `configs/` spell them out. A resolved copy is written into every run
//! directory as the reproducibility manifest.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Shipped chain profile name (`ur6dof` or `kin7dof`) or a path to a
    /// profile file.
    pub profile: String,
    pub workspace: WorkspaceConfig,
    pub simulation: SimConfig,
    pub motion: MotionConfig,
    pub grasp: GraspConfig,
    pub servo: ServoConfig,
    pub reward: RewardParams,
    pub curriculum: CurriculumConfig,
    pub ppo: PpoConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            profile: "ur6dof".into(),
            workspace: WorkspaceConfig::default(),
            simulation: SimConfig::default(),
            motion: MotionConfig::default(),
            grasp: GraspConfig::default(),
            servo: ServoConfig::default(),
            reward: RewardParams::default(),
            curriculum: CurriculumConfig::default(),
            ppo: PpoConfig::default(),
        }
    }
}

/// Axis-aligned cubic workspace, placed relative to the robot base.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceConfig {
    /// Side lengths in meters.
    pub size: [f64; 3],
    /// Cube center relative to the robot base.
    pub center: [f64; 3],
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        WorkspaceConfig {
            size: [0.40, 0.40, 0.40],
            center: [0.50, 0.0, 0.30],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Control and integration tick in seconds (pipeline rate 15 Hz).
    pub dt: f64,
    /// Episode timeout in seconds.
    pub timeout: f64,
    /// Out-of-view threshold from the camera's principal axis, degrees.
    pub view_threshold_deg: f64,
    /// Grasp success position tolerance in meters.
    pub grasp_pos_tol: f64,
    /// Grasp success angular tolerance in radians.
    pub grasp_ang_tol: f64,
    /// Bounding-sphere radius of the target object, meters.
    pub object_radius: f64,
    /// Capsule radius of every arm link, meters.
    pub link_radius: f64,
    /// Floor half-space height, meters.
    pub floor_z: f64,
    /// Minimum initial gripper-object distance for distant spawns, meters.
    pub min_spawn_distance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1.0 / 15.0,
            timeout: 35.0,
            view_threshold_deg: 20.0,
            grasp_pos_tol: 0.015,
            grasp_ang_tol: 0.15,
            object_radius: 0.04,
            link_radius: 0.05,
            floor_z: 0.0,
            min_spawn_distance: 0.25,
        }
    }
}

impl SimConfig {
    pub fn timeout_steps(&self) -> u32 {
        (self.timeout / self.dt).round() as u32
    }
    pub fn view_threshold(&self) -> f64 {
        self.view_threshold_deg.to_radians()
    }
}

/// Object motion generation parameters. Speed caps are the evaluation
/// defaults; curriculum stages override the translation cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionConfig {
    /// Max translation speed, m/s.
    pub translation_cap: f64,
    /// Max rotation speed, rad/s.
    pub rotation_cap: f64,
    /// Per-episode speed drawn uniformly from this fraction of the cap.
    pub speed_fraction: [f64; 2],
    /// Random-walk bout duration range, seconds.
    pub bout_duration: [f64; 2],
    /// Pause between random-walk bouts, seconds.
    pub pause_duration: f64,
    /// Positional vibration amplitude while paused, meters.
    pub vibration_amp: f64,
    /// Vibration frequency, Hz.
    pub vibration_freq: f64,
    /// Per-bout rotation target angle range, radians.
    pub bout_angle: [f64; 2],
    /// Minimum length of a linear path, meters.
    pub min_linear_length: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            translation_cap: 0.05,
            rotation_cap: 0.1,
            speed_fraction: [0.4, 1.0],
            bout_duration: [2.0, 6.0],
            pause_duration: 5.0,
            vibration_amp: 0.005,
            vibration_freq: 2.0,
            bout_angle: [0.2, 0.6],
            min_linear_length: 0.15,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspConfig {
    /// Pool size used during training.
    pub train_pool_size: usize,
    /// Pool size used during evaluation (one grasp per trial).
    pub eval_pool_size: usize,
    /// Max tilt of sampled approach directions from vertical, degrees.
    pub max_tilt_deg: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            train_pool_size: 4,
            eval_pool_size: 1,
            max_tilt_deg: 40.0,
        }
    }
}

/// Baseline servo controller parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServoConfig {
    /// Z-axis alignment threshold, radians.
    pub theta_align: f64,
    /// Sphere radius ceiling, meters.
    pub r_max: f64,
    /// Sphere radius floor, meters.
    pub r_min: f64,
    /// Radius step per tick, meters.
    pub delta_r: f64,
    /// Great-circle angular step cap per tick, radians.
    pub max_arc_step: f64,
    /// Proportional gain on the twist error, 1/s.
    pub kp: f64,
    /// Derivative gain on the twist error rate.
    pub kd: f64,
    /// Close-trigger position tolerance, meters.
    pub close_pos_tol: f64,
    /// Close-trigger angular tolerance, radians.
    pub close_ang_tol: f64,
    /// DLS damping factor.
    pub damping: f64,
}

impl Default for ServoConfig {
    fn default() -> Self {
        ServoConfig {
            theta_align: 0.175,
            r_max: 0.30,
            r_min: 0.0,
            delta_r: 0.005,
            max_arc_step: 0.1,
            kp: 2.0,
            kd: 0.1,
            close_pos_tol: 0.012,
            close_ang_tol: 0.12,
            damping: 0.05,
        }
    }
}

/// Scales and thresholds for the seven reward terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    pub w_dist: f64,
    pub w_view: f64,
    pub w_coll: f64,
    pub w_over: f64,
    pub w_align: f64,
    pub w_move: f64,
    pub w_grasp: f64,
    /// Keep-away distance: the move penalty fires inside this radius, meters.
    pub theta_d: f64,
    /// Object speed above which the move penalty arms, m/s.
    pub nu_o: f64,
    /// Gripper-grasp mean corner distance above which the hover penalty
    /// fires, meters.
    pub over_threshold: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            w_dist: 1.0,
            w_view: 1.0,
            w_coll: 5.0,
            w_over: 0.5,
            w_align: 0.1,
            w_move: 0.5,
            w_grasp: 50.0,
            theta_d: 0.20,
            nu_o: 0.04,
            over_threshold: 0.35,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumConfig {
    /// Success rate over the window that advances stage 1 to 2.
    pub advance_threshold_1: f64,
    /// Success rate that advances stage 2 to 3.
    pub advance_threshold_2: f64,
    /// Rolling success window, episodes.
    pub window: usize,
    /// Multiplicative growth of the four gated penalty scales per growth
    /// interval while in stage 2.
    pub growth: f64,
    /// Cap on the accumulated growth multiplier.
    pub growth_cap: f64,
    /// Episodes between growth steps in stage 2.
    pub growth_interval: usize,
    /// Object speed cap in stages 1 and 2, m/s.
    pub stage12_speed: f64,
    /// Object speed cap in stage 3, m/s.
    pub stage3_speed: f64,
    /// Near-grasp spawn: max initial gripper-grasp distance, meters.
    pub near_spawn_radius: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            advance_threshold_1: 0.7,
            advance_threshold_2: 0.7,
            window: 500,
            growth: 1.1,
            growth_cap: 5.0,
            growth_interval: 500,
            stage12_speed: 0.04,
            stage3_speed: 0.085,
            near_spawn_radius: 0.15,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    /// Linearly decay the learning rate to zero over `total_updates`.
    pub lr_decay: bool,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Parallel environments.
    pub envs: usize,
    /// Rollout horizon per environment, steps.
    pub horizon: usize,
    pub total_updates: usize,
    pub checkpoint_every: usize,
    /// Optional KL early stop per update.
    pub target_kl: Option<f64>,
    /// Initial per-joint log standard deviation.
    pub log_std_init: f64,
    /// Initial gripper-logit bias; negative keeps early close attempts rare.
    pub gripper_bias_init: f64,
    /// Abort if the stage-1 windowed success rate stays below 1% for this
    /// many updates.
    pub divergence_patience: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            epochs: 5,
            minibatch: 4096,
            learning_rate: 3e-4,
            lr_decay: true,
            entropy_coef: 0.005,
            value_coef: 0.5,
            envs: 256,
            horizon: 128,
            total_updates: 1000,
            checkpoint_every: 50,
            target_kl: None,
            log_std_init: -0.5,
            gripper_bias_init: -2.0,
            divergence_patience: 200,
        }
    }
}

impl Config {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(v: f64, name: &str) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        }
        positive(self.simulation.dt, "simulation.dt")?;
        positive(self.simulation.timeout, "simulation.timeout")?;
        if !(0.0..90.0).contains(&self.simulation.view_threshold_deg)
            || self.simulation.view_threshold_deg == 0.0
        {
            return Err(Error::Config(
                "simulation.view_threshold_deg must be in (0, 90)".into(),
            ));
        }
        positive(self.simulation.grasp_pos_tol, "simulation.grasp_pos_tol")?;
        positive(self.simulation.grasp_ang_tol, "simulation.grasp_ang_tol")?;
        positive(self.motion.translation_cap, "motion.translation_cap")?;
        positive(self.motion.rotation_cap, "motion.rotation_cap")?;
        for (range, name) in [
            (self.motion.speed_fraction, "motion.speed_fraction"),
            (self.motion.bout_duration, "motion.bout_duration"),
            (self.motion.bout_angle, "motion.bout_angle"),
        ] {
            if range[0] > range[1] || range[0] < 0.0 {
                return Err(Error::Config(format!("{name} must be an ordered range")));
            }
        }
        if self.workspace.size.iter().any(|&s| s <= 0.0) {
            return Err(Error::Config("workspace.size must be positive".into()));
        }
        if self.grasp.train_pool_size == 0 || self.grasp.eval_pool_size == 0 {
            return Err(Error::Config("grasp pool sizes must be >= 1".into()));
        }
        if self.servo.r_max <= self.servo.r_min || self.servo.r_min < 0.0 {
            return Err(Error::Config("servo radius bounds invalid".into()));
        }
        positive(self.servo.theta_align, "servo.theta_align")?;
        positive(self.servo.damping, "servo.damping")?;
        for (v, name) in [
            (self.curriculum.advance_threshold_1, "advance_threshold_1"),
            (self.curriculum.advance_threshold_2, "advance_threshold_2"),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("curriculum.{name} not in [0,1]")));
            }
        }
        if self.curriculum.growth < 1.0 || self.curriculum.growth_cap < 1.0 {
            return Err(Error::Config("curriculum growth must be >= 1".into()));
        }
        if self.ppo.envs == 0 || self.ppo.horizon == 0 || self.ppo.minibatch == 0 {
            return Err(Error::Config("ppo sizes must be >= 1".into()));
        }
        if self.ppo.gamma <= 0.0 || self.ppo.gamma > 1.0 {
            return Err(Error::Config("ppo.gamma must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.ppo.gae_lambda) {
            return Err(Error::Config("ppo.gae_lambda must be in [0, 1]".into()));
        }
        positive(self.ppo.clip_epsilon, "ppo.clip_epsilon")?;
        positive(self.ppo.learning_rate, "ppo.learning_rate")?;
        Ok(())
    }
}
