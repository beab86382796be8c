//! Serial-chain arm model: forward kinematics, geometric Jacobian and the
//! damped-least-squares differential IK step used by the servo baseline.
//!
//! Chains are described by structured-text profile files (see
//! `profiles/*.toml`); two desk-scale profiles ship with the crate, a 6-DoF
//! UR-class geometry and a 7-DoF Kinova-class geometry.

use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use serde::Deserialize;

use crate::geometry::{Pose, Quat};
use crate::{Error, Result};

/// One revolute joint: fixed parent transform, rotation axis, limits.
#[derive(Debug, Clone)]
pub struct Joint {
    pub origin: Pose,
    pub axis: Vector3<f64>,
    /// Position limits [lo, hi] in radians.
    pub limits: [f64; 2],
    /// Velocity limit in rad/s, > 0.
    pub vel_limit: f64,
}

/// Immutable serial chain; shareable across threads.
#[derive(Debug, Clone)]
pub struct KinematicChain {
    pub name: String,
    pub joints: Vec<Joint>,
    pub ee_offset: Pose,
    /// Camera mount relative to the end-effector frame.
    pub camera_offset: Pose,
    /// Home configuration used for distant spawns.
    pub home: Vec<f64>,
}

/// Joint positions and velocities of a chain at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub positions: DVector<f64>,
    pub velocities: DVector<f64>,
}

impl JointState {
    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        JointState {
            positions: q,
            velocities: DVector::zeros(n),
        }
    }
}

/// Forward-kinematics result: every joint frame origin plus the tool and
/// camera poses. Joint origins feed the collision capsules.
#[derive(Debug, Clone)]
pub struct FkResult {
    pub joint_origins: Vec<Vector3<f64>>,
    pub ee: Pose,
    pub camera: Pose,
}

impl KinematicChain {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn within_limits(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::InvalidArgument(format!(
                "expected {} joint values, got {}",
                self.dof(),
                q.len()
            )));
        }
        for (j, joint) in self.joints.iter().enumerate() {
            let v = q[j];
            if !v.is_finite() || v < joint.limits[0] - 1e-9 || v > joint.limits[1] + 1e-9 {
                return Err(Error::JointLimit {
                    joint: j,
                    value: v,
                    lo: joint.limits[0],
                    hi: joint.limits[1],
                });
            }
        }
        Ok(())
    }

    pub fn clamp_positions(&self, q: &mut DVector<f64>) {
        for (j, joint) in self.joints.iter().enumerate() {
            q[j] = q[j].clamp(joint.limits[0], joint.limits[1]);
        }
    }

    /// Scales the whole velocity vector uniformly so no joint exceeds its
    /// limit; direction (and so every component's sign) is preserved.
    pub fn clamp_velocities(&self, qd: &mut DVector<f64>) {
        let mut worst: f64 = 1.0;
        for (j, joint) in self.joints.iter().enumerate() {
            let r = qd[j].abs() / joint.vel_limit;
            if r > worst {
                worst = r;
            }
        }
        if worst > 1.0 {
            *qd /= worst;
        }
    }

    /// End-effector and camera poses at configuration `q`.
    pub fn forward_kinematics(&self, q: &DVector<f64>) -> Result<(Pose, Pose)> {
        let fk = self.fk_full(q)?;
        Ok((fk.ee, fk.camera))
    }

    /// Full chain sweep: joint frame origins (for collision geometry) plus
    /// end-effector and camera poses.
    pub fn fk_full(&self, q: &DVector<f64>) -> Result<FkResult> {
        self.within_limits(q)?;
        let mut t = Pose::IDENTITY;
        let mut origins = Vec::with_capacity(self.dof());
        for (j, joint) in self.joints.iter().enumerate() {
            t = t.compose(&joint.origin);
            origins.push(t.position);
            let rot = Pose::new(Vector3::zeros(), Quat::from_axis_angle(&joint.axis, q[j]));
            t = t.compose(&rot);
        }
        let ee = t.compose(&self.ee_offset);
        let camera = ee.compose(&self.camera_offset);
        Ok(FkResult {
            joint_origins: origins,
            ee,
            camera,
        })
    }

    /// Geometric Jacobian at the end-effector, rows (linear; angular).
    pub fn jacobian(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.within_limits(q)?;
        let n = self.dof();
        let mut t = Pose::IDENTITY;
        let mut axes = Vec::with_capacity(n);
        let mut origins = Vec::with_capacity(n);
        for (j, joint) in self.joints.iter().enumerate() {
            t = t.compose(&joint.origin);
            origins.push(t.position);
            axes.push(t.orientation.rotate(&joint.axis));
            let rot = Pose::new(Vector3::zeros(), Quat::from_axis_angle(&joint.axis, q[j]));
            t = t.compose(&rot);
        }
        let p_ee = t.compose(&self.ee_offset).position;
        let mut jac = DMatrix::zeros(6, n);
        for j in 0..n {
            let lin = axes[j].cross(&(p_ee - origins[j]));
            for r in 0..3 {
                jac[(r, j)] = lin[r];
                jac[(r + 3, j)] = axes[j][r];
            }
        }
        Ok(jac)
    }
}

/// 6-vector twist error from `current` to `target`: position difference and
/// the rotation vector of the relative rotation.
pub fn pose_twist_error(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dp = target.position - current.position;
    let rel = target.orientation.mul(&current.orientation.inverse());
    let rv = rel.to_rotation_vector();
    Vector6::new(dp.x, dp.y, dp.z, rv.x, rv.y, rv.z)
}

/// Damped least squares map from a desired twist to joint velocities:
/// `qd = J^T (J J^T + lambda^2 I)^-1 twist`. The damping keeps the solve
/// well-posed at singular configurations.
pub fn dls_solve(jacobian: &DMatrix<f64>, twist: &Vector6<f64>, damping: f64) -> DVector<f64> {
    let jjt = jacobian * jacobian.transpose();
    let damped = jjt + DMatrix::identity(6, 6) * (damping * damping);
    let e = DVector::from_row_slice(twist.as_slice());
    match damped.clone().try_inverse() {
        Some(inv) => jacobian.transpose() * (inv * e),
        // Unreachable for damping > 0; kept as a hard fallback.
        None => DVector::zeros(jacobian.ncols()),
    }
}

/// One differential IK step toward `target`, clamped to velocity limits.
pub fn dls_ik_step(
    chain: &KinematicChain,
    q: &DVector<f64>,
    target: &Pose,
    damping: f64,
) -> Result<DVector<f64>> {
    if !target.position.iter().all(|v| v.is_finite()) || !target.orientation.norm().is_finite() {
        return Err(Error::NonFinite {
            context: "dls_ik_step target",
        });
    }
    let (ee, _) = chain.forward_kinematics(q)?;
    let twist = pose_twist_error(&ee, target);
    let jac = chain.jacobian(q)?;
    let mut qd = dls_solve(&jac, &twist, damping);
    chain.clamp_velocities(&mut qd);
    Ok(qd)
}

// ---------------------------------------------------------------------------
// Profile files

#[derive(Debug, Deserialize)]
struct OffsetSpec {
    xyz: [f64; 3],
    quat: [f64; 4],
}

#[derive(Debug, Deserialize)]
struct JointSpec {
    origin: OffsetSpec,
    axis: [f64; 3],
    limits: [f64; 2],
    vel_limit: f64,
}

#[derive(Debug, Deserialize)]
struct ProfileSpec {
    name: String,
    joints: Vec<JointSpec>,
    ee_offset: OffsetSpec,
    camera_offset: OffsetSpec,
    home: Vec<f64>,
}

fn pose_from_spec(s: &OffsetSpec) -> Result<Pose> {
    let q = Quat::new(s.quat[0], s.quat[1], s.quat[2], s.quat[3]);
    if (q.norm() - 1.0).abs() > 1e-3 {
        return Err(Error::Config(format!(
            "offset quaternion {:?} is far from unit norm",
            s.quat
        )));
    }
    Ok(Pose::new(Vector3::from(s.xyz), q.normalized()))
}

impl KinematicChain {
    /// Parses a chain profile from structured text (TOML).
    pub fn from_profile_str(text: &str) -> Result<Self> {
        let spec: ProfileSpec =
            toml::from_str(text).map_err(|e| Error::Config(format!("chain profile: {e}")))?;
        if spec.joints.is_empty() {
            return Err(Error::Config("chain profile has no joints".into()));
        }
        if spec.home.len() != spec.joints.len() {
            return Err(Error::Config(format!(
                "home has {} entries for {} joints",
                spec.home.len(),
                spec.joints.len()
            )));
        }
        let mut joints = Vec::with_capacity(spec.joints.len());
        for (i, j) in spec.joints.iter().enumerate() {
            let axis = Vector3::from(j.axis);
            if axis.norm() < 1e-9 {
                return Err(Error::Config(format!("joint {i}: zero axis")));
            }
            if j.limits[0] >= j.limits[1] {
                return Err(Error::Config(format!("joint {i}: limits lo >= hi")));
            }
            if j.vel_limit <= 0.0 {
                return Err(Error::Config(format!("joint {i}: vel_limit <= 0")));
            }
            joints.push(Joint {
                origin: pose_from_spec(&j.origin)?,
                axis: axis.normalize(),
                limits: j.limits,
                vel_limit: j.vel_limit,
            });
        }
        let chain = KinematicChain {
            name: spec.name,
            joints,
            ee_offset: pose_from_spec(&spec.ee_offset)?,
            camera_offset: pose_from_spec(&spec.camera_offset)?,
            home: spec.home,
        };
        chain.within_limits(&DVector::from_vec(chain.home.clone()))?;
        Ok(chain)
    }

    pub fn from_profile_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_profile_str(&text)
    }

    /// The shipped 6-DoF UR-class profile.
    pub fn ur6dof() -> Self {
        Self::from_profile_str(include_str!("../profiles/ur6dof.toml"))
            .expect("shipped ur6dof profile is valid")
    }

    /// The shipped 7-DoF Kinova-class profile.
    pub fn kin7dof() -> Self {
        Self::from_profile_str(include_str!("../profiles/kin7dof.toml"))
            .expect("shipped kin7dof profile is valid")
    }

    /// Looks up a shipped profile by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ur6dof" => Ok(Self::ur6dof()),
            "kin7dof" => Ok(Self::kin7dof()),
            other => Err(Error::Config(format!(
                "unknown profile '{other}' (expected ur6dof or kin7dof)"
            ))),
        }
    }
}
