//! The simulated environment: workspace geometry, visibility and collision
//! checks, geometric grasp-success determination, and the episode clock with
//! its terminal taxonomy (Success, Timeout, Collision, OutOfView).

pub mod collision;
pub mod motion;

pub use collision::{check_collision, check_collision_fk, CollisionGeometry};
pub use motion::{sample_motion, MotionCaps, MotionKind, ObjectMotion};

use nalgebra::{DVector, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{SimConfig, WorkspaceConfig};
use crate::geometry::{angular_distance, KeypointSet, Pose};
use crate::kinematics::{FkResult, JointState, KinematicChain};
use crate::{Error, Result};

/// Axis-aligned cubic workspace placed relative to the robot base.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub size: Vector3<f64>,
    pub placement: Pose,
}

impl Workspace {
    pub fn from_config(cfg: &WorkspaceConfig) -> Self {
        Workspace {
            size: Vector3::from(cfg.size),
            placement: Pose::from_translation(Vector3::from(cfg.center)),
        }
    }

    pub fn half_size(&self) -> Vector3<f64> {
        self.size / 2.0
    }

    pub fn min_corner(&self) -> Vector3<f64> {
        self.placement.position - self.half_size()
    }

    pub fn max_corner(&self) -> Vector3<f64> {
        self.placement.position + self.half_size()
    }

    pub fn contains(&self, p: &Vector3<f64>, tol: f64) -> bool {
        let local = self.placement.inverse().transform_point(p);
        let h = self.half_size();
        (0..3).all(|i| local[i].abs() <= h[i] + tol)
    }

    pub fn clamp_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let mut local = self.placement.inverse().transform_point(p);
        let h = self.half_size();
        for i in 0..3 {
            local[i] = local[i].clamp(-h[i], h[i]);
        }
        self.placement.transform_point(&local)
    }

    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let h = self.half_size();
        let local = Vector3::new(
            rng.gen_range(-h.x..h.x),
            rng.gen_range(-h.y..h.y),
            rng.gen_range(-h.z..h.z),
        );
        self.placement.transform_point(&local)
    }

    /// Uniform point on the cube surface (faces picked uniformly; the cube's
    /// faces have equal area).
    pub fn sample_boundary_point(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let h = self.half_size();
        let face = rng.gen_range(0..6usize);
        let axis = face / 2;
        let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
        let mut local = Vector3::new(
            rng.gen_range(-h.x..h.x),
            rng.gen_range(-h.y..h.y),
            rng.gen_range(-h.z..h.z),
        );
        local[axis] = sign * h[axis];
        self.placement.transform_point(&local)
    }
}

/// Why an episode ended (or that it has not).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalStatus {
    Running,
    Success,
    Timeout,
    Collision,
    OutOfView,
}

impl TerminalStatus {
    pub fn is_terminal(&self) -> bool {
        *self != TerminalStatus::Running
    }

    pub fn name(&self) -> &'static str {
        match self {
            TerminalStatus::Running => "running",
            TerminalStatus::Success => "success",
            TerminalStatus::Timeout => "timeout",
            TerminalStatus::Collision => "collision",
            TerminalStatus::OutOfView => "out_of_view",
        }
    }
}

/// Full per-environment snapshot; stepping is pure (state in, state out).
#[derive(Debug, Clone)]
pub struct EnvState {
    pub joints: JointState,
    pub object: Pose,
    /// Commanded gripper state `c` exposed to the policy.
    pub gripper_closed: bool,
    /// Keypoints of the previously selected grasp, for the frame delta.
    pub prev_grasp_keypoints: Option<KeypointSet>,
    /// Steps elapsed since reset; sim time is `steps * dt`.
    pub steps: u32,
    /// Curriculum stage id (1..=3); evaluation runs use 3.
    pub stage: u8,
    pub status: TerminalStatus,
    /// The object has been inside the view cone at least once. Losing track
    /// only counts once there was track to lose.
    pub seen: bool,
}

impl EnvState {
    pub fn time(&self, dt: f64) -> f64 {
        f64::from(self.steps) * dt
    }
}

/// What happened during one world step, for reward shaping and logging.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StepEvents {
    pub in_view: bool,
    pub collision: bool,
    pub close_attempt: bool,
    pub grasp_success: bool,
    /// Object translation speed over this step, m/s.
    pub object_speed: f64,
}

/// Terminal record of one episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub status: TerminalStatus,
    pub steps: u32,
    /// Wall-clock-equivalent sim seconds to grasp, on success.
    pub time_to_grasp: Option<f64>,
    /// Pool index of the grasp selected at the terminal step.
    pub grasp_index: usize,
}

/// Fixed world parameters for an episode.
#[derive(Debug, Clone, Copy)]
pub struct WorldParams {
    pub dt: f64,
    pub timeout_steps: u32,
    /// Out-of-view angle threshold, radians.
    pub view_threshold: f64,
    /// Whether going out of view terminates the episode (stage >= 2, eval).
    pub oov_terminates: bool,
    pub grasp_pos_tol: f64,
    pub grasp_ang_tol: f64,
    pub geometry: CollisionGeometry,
}

impl WorldParams {
    pub fn from_sim(sim: &SimConfig, oov_terminates: bool) -> Self {
        WorldParams {
            dt: sim.dt,
            timeout_steps: sim.timeout_steps(),
            view_threshold: sim.view_threshold(),
            oov_terminates,
            grasp_pos_tol: sim.grasp_pos_tol,
            grasp_ang_tol: sim.grasp_ang_tol,
            geometry: CollisionGeometry {
                link_radius: sim.link_radius,
                object_radius: sim.object_radius,
                floor_z: sim.floor_z,
            },
        }
    }
}

/// True iff the object center sits within `threshold` of the camera's
/// principal (+z) axis and in front of the camera. A coincident object is
/// a degenerate ray and reported as not in view.
pub fn object_in_view(camera: &Pose, object: &Pose, threshold: f64) -> bool {
    debug_assert!(threshold > 0.0 && threshold < std::f64::consts::FRAC_PI_2);
    let v = object.position - camera.position;
    let dist = v.norm();
    if dist < 1e-9 {
        return false;
    }
    let cos_angle = v.dot(&camera.orientation.z_axis()) / dist;
    if cos_angle <= 0.0 {
        return false;
    }
    cos_angle.clamp(-1.0, 1.0).acos() <= threshold
}

/// Geometric grasp-success predicate: gripper closed at a pose within the
/// position and angular tolerances of the target grasp. Lifting is modeled
/// as pose attachment, so the decision is made at the closing moment.
pub fn check_grasp_success(
    ee: &Pose,
    target_grasp: &Pose,
    closed: bool,
    pos_tol: f64,
    ang_tol: f64,
) -> bool {
    if !closed {
        return false;
    }
    if (ee.position - target_grasp.position).norm() > pos_tol {
        return false;
    }
    let ang = angular_distance(
        &ee.orientation.normalized(),
        &target_grasp.orientation.normalized(),
    )
    .expect("normalized quaternions");
    ang <= ang_tol
}

/// Output of [`step_world`]: the new state, the step events, and the FK of
/// the new configuration (reused by encoding and reward).
pub struct WorldStep {
    pub state: EnvState,
    pub events: StepEvents,
    pub fk: FkResult,
}

/// Advances the world by one tick.
///
/// Joints integrate by explicit Euler with position and velocity clamping;
/// the object follows its sampled motion (gravity plays no role); terminal
/// conditions are evaluated in fixed priority
/// Success > Collision > OutOfView > failed close / Timeout.
pub fn step_world(
    state: &EnvState,
    chain: &KinematicChain,
    joint_vel_cmd: &DVector<f64>,
    gripper_cmd: bool,
    target_grasp: &Pose,
    motion: &ObjectMotion,
    params: &WorldParams,
) -> Result<WorldStep> {
    if state.status.is_terminal() {
        return Err(Error::TerminalStep);
    }
    if joint_vel_cmd.len() != chain.dof() {
        return Err(Error::InvalidArgument(format!(
            "command width {} does not match {} joints",
            joint_vel_cmd.len(),
            chain.dof()
        )));
    }

    let mut qd = joint_vel_cmd.clone();
    for v in qd.iter_mut() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "joint velocity command",
            });
        }
    }
    chain.clamp_velocities(&mut qd);

    let mut q = &state.joints.positions + &qd * params.dt;
    chain.clamp_positions(&mut q);
    // Achieved velocity after limit clamping, what the policy observes.
    let achieved = (&q - &state.joints.positions) / params.dt;

    let steps = state.steps + 1;
    let object = motion.pose_at_step(steps);
    let object_speed = (object.position - state.object.position).norm() / params.dt;

    let fk = chain.fk_full(&q)?;
    let in_view = object_in_view(&fk.camera, &object, params.view_threshold);
    let collision = check_collision_fk(&fk, &object, &params.geometry);
    let close_attempt = gripper_cmd && !state.gripper_closed;
    let grasp_success = close_attempt
        && check_grasp_success(
            &fk.ee,
            target_grasp,
            true,
            params.grasp_pos_tol,
            params.grasp_ang_tol,
        );

    let status = if grasp_success {
        TerminalStatus::Success
    } else if collision {
        TerminalStatus::Collision
    } else if params.oov_terminates && state.seen && !in_view {
        TerminalStatus::OutOfView
    } else if close_attempt {
        // A close at the wrong moment ends the episode; it is bucketed with
        // timeouts in the failure taxonomy.
        TerminalStatus::Timeout
    } else if steps >= params.timeout_steps {
        TerminalStatus::Timeout
    } else {
        TerminalStatus::Running
    };

    let events = StepEvents {
        in_view,
        collision,
        close_attempt,
        grasp_success,
        object_speed,
    };
    let state = EnvState {
        joints: JointState {
            positions: q,
            velocities: achieved,
        },
        object,
        gripper_closed: gripper_cmd,
        prev_grasp_keypoints: state.prev_grasp_keypoints,
        steps,
        stage: state.stage,
        status,
        seen: state.seen || in_view,
    };
    Ok(WorldStep { state, events, fk })
}
