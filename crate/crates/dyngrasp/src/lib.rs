//! Deterministic kinematic workbench for eye-on-hand dynamic grasping.
//!
//! The crate simulates a wrist-camera manipulator chasing a moving object at
//! desk scale: a damped-least-squares servo baseline, object-relative grasp
//! pools with per-tick selection, a shaped-reward reinforcement-learning
//! environment with a three-stage curriculum, and a self-contained PPO
//! trainer (no external ML framework). Ground-truth object poses stand in
//! for a vision stack, so every episode is a pure function of its seed.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example fk_jacobian        # chain model, FK, Jacobian
//! cargo run --release --example ik_servoing        # DLS-IK convergence trace
//! cargo run --release --example motion_preview     # the four object motion kinds
//! cargo run --release --example grasp_selection    # pool realization + switching
//! cargo run --release --example baseline_episode   # full servo episode vs a mover
//! cargo run --release --example reward_breakdown   # the seven reward terms
//! cargo run --release --example train_minimal      # a tiny PPO run end to end
//! cargo run --release --example eval_suite         # baseline vs learned table
//! cargo run --release --example replay_plot        # episode logs to SVG plots
//! ```
//!
//! The `dyngrasp` binary wraps the same machinery behind `train`, `eval`,
//! `replay`, `plot` and `validate-config` subcommands.

pub mod bench;
pub mod config;
pub mod geometry;
pub mod grasping;
pub mod kinematics;
pub mod policy;
pub mod rl_env;
pub mod seeding;
pub mod servo;
pub mod world;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("quaternion is not unit norm (|q| = {norm})")]
    NonUnitQuaternion { norm: f64 },
    #[error("joint {joint} position {value} outside limits [{lo}, {hi}]")]
    JointLimit {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("stepped a terminal environment; call reset first")]
    TerminalStep,
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
