//! Rigid-body pose algebra: quaternions, pose composition, the keypoint
//! encoding used as the learning state, and the angular-distance metric that
//! drives grasp selection.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Norm deviation beyond which a quaternion is rejected as non-unit.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Unit quaternion (w, x, y, z). `q` and `-q` denote the same rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (angle / 2.0).sin_cos();
        Quat::new(c, a.x * s, a.y * s, a.z * s)
    }

    /// Rotation vector (axis * angle) to quaternion; the exp map.
    pub fn from_rotation_vector(rv: &Vector3<f64>) -> Self {
        let theta = rv.norm();
        if theta < 1e-12 {
            // First-order expansion keeps the map smooth through zero.
            Quat::new(1.0, rv.x / 2.0, rv.y / 2.0, rv.z / 2.0).normalized()
        } else {
            Quat::from_axis_angle(&(rv / theta), theta)
        }
    }

    /// Rotation vector of this quaternion; the log map. Angle in [0, pi].
    pub fn to_rotation_vector(&self) -> Vector3<f64> {
        let q = if self.w < 0.0 { -*self } else { *self };
        let v = Vector3::new(q.x, q.y, q.z);
        let s = v.norm();
        if s < 1e-12 {
            v * 2.0
        } else {
            let angle = 2.0 * s.min(1.0).asin();
            v * (angle / s)
        }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Quat {
        let n = self.norm();
        if n < f64::EPSILON {
            Quat::IDENTITY
        } else {
            Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
        }
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    /// Conjugate; for unit quaternions this is the inverse.
    pub fn inverse(&self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product `self * rhs` (apply `rhs` first, then `self`).
    pub fn mul(&self, rhs: &Quat) -> Quat {
        Quat::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        // q v q^-1 via the expanded cross-product form.
        let u = Vector3::new(self.x, self.y, self.z);
        let t = 2.0 * u.cross(v);
        v + self.w * t + u.cross(&t)
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Shepperd's method; `m` must be a rotation matrix.
    pub fn from_rotation_matrix(m: &Matrix3<f64>) -> Quat {
        let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            Quat::new(
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            Quat::new(
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            )
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            Quat::new(
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            )
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            Quat::new(
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            )
        };
        q.normalized()
    }

    /// Local frame axes as world vectors.
    pub fn x_axis(&self) -> Vector3<f64> {
        self.rotate(&Vector3::x())
    }
    pub fn y_axis(&self) -> Vector3<f64> {
        self.rotate(&Vector3::y())
    }
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotate(&Vector3::z())
    }

    /// Rotates `self` toward `target` by at most `max_angle` radians.
    pub fn step_toward(&self, target: &Quat, max_angle: f64) -> Quat {
        let mut rel = target.mul(&self.inverse());
        if rel.w < 0.0 {
            rel = -rel;
        }
        let rv = rel.to_rotation_vector();
        let angle = rv.norm();
        if angle <= max_angle || angle < 1e-12 {
            *target
        } else {
            Quat::from_rotation_vector(&(rv * (max_angle / angle)))
                .mul(self)
                .normalized()
        }
    }
}

impl std::ops::Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Rigid-body pose: position in meters plus a unit orientation quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: Quat,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vector3::new(0.0, 0.0, 0.0),
        orientation: Quat::IDENTITY,
    };

    pub fn new(position: Vector3<f64>, orientation: Quat) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn from_translation(position: Vector3<f64>) -> Self {
        Pose::new(position, Quat::IDENTITY)
    }

    /// `self ∘ rhs`: rhs expressed in self's frame, result in self's parent frame.
    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose::new(
            self.position + self.orientation.rotate(&rhs.position),
            self.orientation.mul(&rhs.orientation).normalized(),
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose::new(-inv.rotate(&self.position), inv)
    }

    /// Maps a point from this pose's frame to the parent frame.
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation.rotate(p)
    }
}

/// Geodesic angle between two unit quaternions, in [0, pi].
///
/// Computed as `2 asin(min(|vec(q_g q_i^-1)|, 1))` where `vec` is the
/// imaginary part. Symmetric and invariant under sign flips of either input.
pub fn angular_distance(q_g: &Quat, q_i: &Quat) -> Result<f64> {
    for q in [q_g, q_i] {
        let n = q.norm();
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NonUnitQuaternion { norm: n });
        }
    }
    let dq = q_g.mul(&q_i.inverse());
    let vec_norm = (dq.x * dq.x + dq.y * dq.y + dq.z * dq.z).sqrt();
    Ok(2.0 * vec_norm.min(1.0).asin())
}

/// Four ordered corners of a fixed-size square rigidly attached to a pose.
///
/// Corner order is (+ +), (+ -), (- -), (- +) in the pose's XY plane; the
/// order is part of the encoding contract and never relabeled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeypointSet(pub [Vector3<f64>; 4]);

/// Default keypoint square half-width in meters, commensurate with the
/// gripper scale so position and orientation errors carry similar weight.
pub const DEFAULT_HALF_WIDTH: f64 = 0.05;

/// Template corners for a half-width `s`, in the local frame.
pub fn keypoint_template(s: f64) -> [Vector3<f64>; 4] {
    [
        Vector3::new(s, s, 0.0),
        Vector3::new(s, -s, 0.0),
        Vector3::new(-s, -s, 0.0),
        Vector3::new(-s, s, 0.0),
    ]
}

/// Keypoints of `pose`: the template corners mapped through the pose.
pub fn keypoints_of(pose: &Pose, half_width: f64) -> KeypointSet {
    debug_assert!(half_width > 0.0);
    let t = keypoint_template(half_width);
    KeypointSet([
        pose.transform_point(&t[0]),
        pose.transform_point(&t[1]),
        pose.transform_point(&t[2]),
        pose.transform_point(&t[3]),
    ])
}

/// Elementwise `a - b`, flattened in corner order. Zero iff the poses coincide.
pub fn keypoint_delta(a: &KeypointSet, b: &KeypointSet) -> [f64; 12] {
    let mut out = [0.0; 12];
    for k in 0..4 {
        let d = a.0[k] - b.0[k];
        out[3 * k] = d.x;
        out[3 * k + 1] = d.y;
        out[3 * k + 2] = d.z;
    }
    out
}

/// Mean Euclidean corner distance between two keypoint sets, in meters.
pub fn mean_corner_distance(a: &KeypointSet, b: &KeypointSet) -> f64 {
    (0..4).map(|k| (a.0[k] - b.0[k]).norm()).sum::<f64>() / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_unit_quat(rng: &mut impl Rng) -> Quat {
        // Shoemake's uniform sampling on SO(3).
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen::<f64>() * 2.0 * PI;
        let u3: f64 = rng.gen::<f64>() * 2.0 * PI;
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        Quat::new(a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos()).normalized()
    }

    fn random_pose(rng: &mut impl Rng) -> Pose {
        Pose::new(
            Vector3::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            ),
            random_unit_quat(rng),
        )
    }

    /// Independent oracle: geodesic angle from the relative rotation matrix trace.
    fn trace_oracle(q_g: &Quat, q_i: &Quat) -> f64 {
        let r = q_g.to_rotation_matrix() * q_i.to_rotation_matrix().transpose();
        let c = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    #[test]
    fn angular_distance_identity_is_zero() {
        assert_eq!(
            angular_distance(&Quat::IDENTITY, &Quat::IDENTITY).unwrap(),
            0.0
        );
    }

    #[test]
    fn angular_distance_half_turn_is_pi() {
        let q = Quat::from_axis_angle(&Vector3::z(), PI);
        assert_relative_eq!(
            angular_distance(&Quat::IDENTITY, &q).unwrap(),
            PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn angular_distance_quarter_turn_is_half_pi() {
        let q = Quat::from_axis_angle(&Vector3::x(), FRAC_PI_2);
        assert_relative_eq!(
            angular_distance(&Quat::IDENTITY, &q).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn angular_distance_matches_trace_oracle() {
        let mut rng = crate::seeding::rng(101);
        for _ in 0..200 {
            let a = random_unit_quat(&mut rng);
            let b = random_unit_quat(&mut rng);
            let d = angular_distance(&a, &b).unwrap();
            assert_relative_eq!(d, trace_oracle(&a, &b), epsilon = 1e-9);
        }
    }

    #[test]
    fn angular_distance_symmetric_and_sign_invariant() {
        let mut rng = crate::seeding::rng(102);
        for _ in 0..200 {
            let a = random_unit_quat(&mut rng);
            let b = random_unit_quat(&mut rng);
            let d = angular_distance(&a, &b).unwrap();
            assert_relative_eq!(d, angular_distance(&b, &a).unwrap(), epsilon = 1e-12);
            assert_relative_eq!(d, angular_distance(&-a, &b).unwrap(), epsilon = 1e-12);
            assert_relative_eq!(d, angular_distance(&a, &-b).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn angular_distance_triangle_inequality() {
        let mut rng = crate::seeding::rng(103);
        for _ in 0..1000 {
            let a = random_unit_quat(&mut rng);
            let b = random_unit_quat(&mut rng);
            let c = random_unit_quat(&mut rng);
            let ab = angular_distance(&a, &b).unwrap();
            let bc = angular_distance(&b, &c).unwrap();
            let ac = angular_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-7, "triangle: {ac} > {ab} + {bc}");
            assert!(angular_distance(&a, &a).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn angular_distance_rejects_non_unit() {
        let bad = Quat::new(1.0, 0.1, 0.0, 0.0);
        assert!(matches!(
            angular_distance(&bad, &Quat::IDENTITY),
            Err(Error::NonUnitQuaternion { .. })
        ));
    }

    #[test]
    fn pose_compose_inverse_is_identity() {
        let mut rng = crate::seeding::rng(104);
        for _ in 0..100 {
            let p = random_pose(&mut rng);
            let id = p.compose(&p.inverse());
            assert!(id.position.norm() < 1e-9);
            assert!(
                angular_distance(&id.orientation, &Quat::IDENTITY).unwrap() < 1e-9,
                "residual rotation"
            );
        }
    }

    #[test]
    fn keypoints_identity_pose() {
        let k = keypoints_of(&Pose::IDENTITY, 0.05);
        assert_eq!(k.0[0], Vector3::new(0.05, 0.05, 0.0));
        assert_eq!(k.0[1], Vector3::new(0.05, -0.05, 0.0));
        assert_eq!(k.0[2], Vector3::new(-0.05, -0.05, 0.0));
        assert_eq!(k.0[3], Vector3::new(-0.05, 0.05, 0.0));
    }

    #[test]
    fn keypoints_pure_translation() {
        let p = Pose::from_translation(Vector3::new(0.0, 0.0, 0.3));
        let k = keypoints_of(&p, 0.05);
        let t = keypoint_template(0.05);
        for i in 0..4 {
            assert_relative_eq!(
                (k.0[i] - t[i] - Vector3::new(0.0, 0.0, 0.3)).norm(),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn keypoints_rotated_quarter_turn() {
        // 90 deg about z maps corner (+s, +s) to (-s, +s).
        let p = Pose::new(
            Vector3::zeros(),
            Quat::from_axis_angle(&Vector3::z(), FRAC_PI_2),
        );
        let k = keypoints_of(&p, 0.05);
        assert_relative_eq!(k.0[0].x, -0.05, epsilon = 1e-12);
        assert_relative_eq!(k.0[0].y, 0.05, epsilon = 1e-12);
        assert_relative_eq!(k.0[0].z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn keypoints_are_rigid() {
        let mut rng = crate::seeding::rng(105);
        let reference = keypoint_template(0.05);
        for _ in 0..100 {
            let k = keypoints_of(&random_pose(&mut rng), 0.05);
            for i in 0..4 {
                for j in (i + 1)..4 {
                    assert_relative_eq!(
                        (k.0[i] - k.0[j]).norm(),
                        (reference[i] - reference[j]).norm(),
                        epsilon = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn keypoints_equivariant_under_composition() {
        let mut rng = crate::seeding::rng(106);
        for _ in 0..500 {
            let t = random_pose(&mut rng);
            let p = random_pose(&mut rng);
            let lhs = keypoints_of(&t.compose(&p), 0.05);
            let base = keypoints_of(&p, 0.05);
            for k in 0..4 {
                let rhs = t.transform_point(&base.0[k]);
                assert!((lhs.0[k] - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn keypoint_delta_identical_poses_is_zero() {
        let p = Pose::from_translation(Vector3::new(0.2, -0.1, 0.4));
        let d = keypoint_delta(&keypoints_of(&p, 0.05), &keypoints_of(&p, 0.05));
        assert_eq!(d, [0.0; 12]);
    }

    #[test]
    fn keypoint_delta_vertical_shift() {
        let a = keypoints_of(&Pose::IDENTITY, 0.05);
        let b = keypoints_of(&Pose::from_translation(Vector3::new(0.0, 0.0, 0.1)), 0.05);
        let d = keypoint_delta(&a, &b);
        for k in 0..4 {
            assert_relative_eq!(d[3 * k + 2], -0.1, epsilon = 1e-15);
            assert_relative_eq!(d[3 * k], 0.0, epsilon = 1e-15);
        }
        assert_relative_eq!(mean_corner_distance(&a, &b), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn argmin_invariant_to_stored_sign_flips() {
        let mut rng = crate::seeding::rng(107);
        for _ in 0..50 {
            let gripper = random_unit_quat(&mut rng);
            let pool: Vec<Quat> = (0..5).map(|_| random_unit_quat(&mut rng)).collect();
            let argmin = |qs: &[Quat]| {
                let mut best = (0, f64::INFINITY);
                for (i, q) in qs.iter().enumerate() {
                    let d = angular_distance(&gripper, q).unwrap();
                    if d < best.1 {
                        best = (i, d);
                    }
                }
                best.0
            };
            let base = argmin(&pool);
            let mut flipped = pool.clone();
            flipped[base] = -flipped[base];
            flipped[(base + 2) % 5] = -flipped[(base + 2) % 5];
            assert_eq!(argmin(&flipped), base);
        }
    }

    #[test]
    fn rotation_vector_roundtrip() {
        let mut rng = crate::seeding::rng(108);
        for _ in 0..200 {
            let q = random_unit_quat(&mut rng);
            let rv = q.to_rotation_vector();
            let back = Quat::from_rotation_vector(&rv);
            assert!(angular_distance(&q, &back).unwrap() < 1e-9);
        }
    }
}
