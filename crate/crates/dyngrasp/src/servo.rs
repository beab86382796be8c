//! Baseline (non-learned) control policy: sphere-approach waypoint
//! generation plus PD-on-twist velocity commands through the damped
//! least-squares solve.
//!
//! The gripper rides a sphere of radius `r` centered on the target grasp,
//! sliding along the great circle toward the approach axis; `r` shrinks
//! while the tool z-axis is aligned with the grasp z-axis and grows
//! (capped) otherwise. The waypoint orientation faces the grasp.

use nalgebra::{DVector, Vector3, Vector6};

use crate::config::ServoConfig;
use crate::geometry::{angular_distance, Pose, Quat};
use crate::kinematics::{dls_solve, pose_twist_error, KinematicChain};
use crate::Result;

pub use crate::config::ServoConfig as ServoParams;

/// Per-episode controller memory: sphere radius and the previous twist
/// error for the derivative term.
#[derive(Debug, Clone)]
pub struct ServoState {
    pub radius: f64,
    prev_error: Option<Vector6<f64>>,
}

impl ServoState {
    /// Starts the sphere at the current gripper distance, capped to
    /// `[r_min, r_max]`.
    pub fn new(gripper: &Pose, grasp: &Pose, params: &ServoParams) -> Self {
        let d = (gripper.position - grasp.position).norm();
        ServoState {
            radius: d.clamp(params.r_min, params.r_max),
            prev_error: None,
        }
    }
}

/// Radius update rule: aligned (z-angle <= theta_align, boundary counts as
/// aligned) shrinks toward `r_min`, misaligned grows toward `r_max`.
pub fn update_radius(r: f64, z_angle: f64, params: &ServoParams) -> f64 {
    if z_angle <= params.theta_align {
        (r - params.delta_r).max(params.r_min)
    } else {
        (r + params.delta_r).min(params.r_max)
    }
}

/// Next gripper waypoint on the sphere of radius `r` around the grasp.
///
/// The radial direction steps along the great circle toward the approach
/// axis (the grasp's -z); the waypoint orientation looks at the grasp with
/// its y-axis matched to the grasp's (projected). At `r = 0` the waypoint
/// is the grasp pose itself.
pub fn waypoint(gripper: &Pose, grasp: &Pose, r: f64, params: &ServoParams) -> Pose {
    if r < 1e-6 {
        return *grasp;
    }
    let approach_out = -grasp.orientation.z_axis(); // outward radial target
    let radial = gripper.position - grasp.position;
    let u = if radial.norm() < 1e-9 {
        // Degenerate: gripper at the grasp point; place on the approach axis.
        approach_out
    } else {
        radial.normalize()
    };
    let u_next = rotate_toward(&u, &approach_out, params.max_arc_step);
    let position = grasp.position + u_next * r;
    let orientation = look_at_orientation(&position, grasp);
    Pose::new(position, orientation)
}

/// Rotates unit vector `u` toward unit vector `w` by at most `max_step`
/// radians along their great circle.
fn rotate_toward(u: &Vector3<f64>, w: &Vector3<f64>, max_step: f64) -> Vector3<f64> {
    let cos = u.dot(w).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle < 1e-12 {
        return *w;
    }
    let step = angle.min(max_step);
    let mut axis = u.cross(w);
    if axis.norm() < 1e-9 {
        // Antipodal: any perpendicular axis works; pick one deterministically.
        let seed = if u.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        axis = u.cross(&seed);
    }
    let q = Quat::from_axis_angle(&axis.normalize(), step);
    q.rotate(u).normalize()
}

/// Orientation whose z-axis points from `position` at the grasp center,
/// with the y-axis matched to the grasp's y-axis (projected).
fn look_at_orientation(position: &Vector3<f64>, grasp: &Pose) -> Quat {
    let to_grasp = grasp.position - position;
    if to_grasp.norm() < 1e-9 {
        return grasp.orientation;
    }
    let z = to_grasp.normalize();
    let y_hint = grasp.orientation.y_axis();
    let mut y = y_hint - z * y_hint.dot(&z);
    if y.norm() < 1e-6 {
        let x_hint = grasp.orientation.x_axis();
        y = x_hint - z * x_hint.dot(&z);
    }
    let y = y.normalize();
    let x = y.cross(&z);
    Quat::from_rotation_matrix(&nalgebra::Matrix3::from_columns(&[x, y, z]))
}

/// Joint velocity command toward the waypoint plus the close decision.
///
/// PD on the 6-vector twist error feeds the DLS solve; the gripper closes
/// when the tool is inside the close-trigger tolerances of the actual
/// grasp pose.
pub fn servo_command(
    chain: &KinematicChain,
    q: &DVector<f64>,
    waypoint: &Pose,
    grasp: &Pose,
    state: &mut ServoState,
    params: &ServoParams,
    dt: f64,
) -> Result<(DVector<f64>, bool)> {
    let (ee, _) = chain.forward_kinematics(q)?;
    let e = pose_twist_error(&ee, waypoint);
    let de = match state.prev_error {
        Some(prev) => (e - prev) / dt,
        None => Vector6::zeros(),
    };
    state.prev_error = Some(e);
    let twist = e * params.kp + de * params.kd;
    let jac = chain.jacobian(q)?;
    let mut qd = dls_solve(&jac, &twist, params.damping);
    chain.clamp_velocities(&mut qd);

    let pos_err = (ee.position - grasp.position).norm();
    let ang_err = angular_distance(
        &ee.orientation.normalized(),
        &grasp.orientation.normalized(),
    )
    .expect("unit quaternions");
    let close = pos_err <= params.close_pos_tol && ang_err <= params.close_ang_tol;
    Ok((qd, close))
}

/// The baseline policy: one tick = align check, radius update, waypoint,
/// PD servo command.
#[derive(Debug, Clone)]
pub struct BaselineController {
    pub params: ServoConfig,
    state: Option<ServoState>,
}

impl BaselineController {
    pub fn new(params: ServoConfig) -> Self {
        BaselineController {
            params,
            state: None,
        }
    }

    pub fn reset(&mut self) {
        self.state = None;
    }

    pub fn radius(&self) -> Option<f64> {
        self.state.as_ref().map(|s| s.radius)
    }

    /// Computes the joint velocity command and gripper decision for the
    /// currently selected world-frame grasp.
    pub fn tick(
        &mut self,
        chain: &KinematicChain,
        q: &DVector<f64>,
        grasp: &Pose,
        dt: f64,
    ) -> Result<(DVector<f64>, bool)> {
        let (ee, _) = chain.forward_kinematics(q)?;
        if self.state.is_none() {
            self.state = Some(ServoState::new(&ee, grasp, &self.params));
        }
        let state = self.state.as_mut().expect("initialized above");
        let z_angle = angular_z_angle(&ee, grasp);
        state.radius = update_radius(state.radius, z_angle, &self.params);
        let wp = waypoint(&ee, grasp, state.radius, &self.params);
        servo_command(chain, q, &wp, grasp, state, &self.params, dt)
    }
}

/// Angle between the gripper z-axis and the grasp z-axis.
pub fn angular_z_angle(gripper: &Pose, grasp: &Pose) -> f64 {
    gripper
        .orientation
        .z_axis()
        .dot(&grasp.orientation.z_axis())
        .clamp(-1.0, 1.0)
        .acos()
}
