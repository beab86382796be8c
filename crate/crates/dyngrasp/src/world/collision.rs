//! Capsule/sphere/half-space collision primitives for the arm broadphase.
//!
//! Each link is a capsule between consecutive joint frame origins, the
//! object is a bounding sphere, and the floor is a half-space. The terminal
//! (gripper) capsule is exempt from object contact: the fingers straddle the
//! object during any grasp approach, which is the point of grasping, not a
//! crash.

use nalgebra::Vector3;

use crate::geometry::Pose;
use crate::kinematics::{FkResult, KinematicChain};

#[derive(Debug, Clone, Copy)]
pub struct CollisionGeometry {
    pub link_radius: f64,
    pub object_radius: f64,
    pub floor_z: f64,
}

impl Default for CollisionGeometry {
    fn default() -> Self {
        CollisionGeometry {
            link_radius: 0.05,
            object_radius: 0.04,
            floor_z: 0.0,
        }
    }
}

/// Distance from point `p` to segment `ab`.
pub fn point_segment_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < 1e-18 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Capsule (segment `ab`, radius `r_capsule`) vs sphere overlap test.
pub fn capsule_sphere_overlap(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    r_capsule: f64,
    center: &Vector3<f64>,
    r_sphere: f64,
) -> bool {
    point_segment_distance(center, a, b) <= r_capsule + r_sphere
}

/// The chain's collision capsules as world-space segments: base to each
/// joint origin to the tool tip. Zero-length segments are dropped.
pub fn link_segments(fk: &FkResult) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let mut pts = Vec::with_capacity(fk.joint_origins.len() + 2);
    pts.push(Vector3::zeros());
    pts.extend_from_slice(&fk.joint_origins);
    pts.push(fk.ee.position);
    let mut segs = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        if (w[1] - w[0]).norm() > 1e-9 {
            segs.push((w[0], w[1]));
        }
    }
    segs
}

/// True when any arm link overlaps the object sphere or dips below the
/// floor. The last (gripper) link is exempt from the object check, and the
/// first (the fixed pedestal, which stands on the floor) from the floor
/// check.
pub fn check_collision_fk(fk: &FkResult, object: &Pose, geom: &CollisionGeometry) -> bool {
    let segs = link_segments(fk);
    let last = segs.len().saturating_sub(1);
    for (i, (a, b)) in segs.iter().enumerate() {
        if i != 0 && a.z.min(b.z) - geom.link_radius <= geom.floor_z {
            return true;
        }
        if i != last
            && capsule_sphere_overlap(a, b, geom.link_radius, &object.position, geom.object_radius)
        {
            return true;
        }
    }
    false
}

/// Spec-shaped entry point taking joint positions directly.
pub fn check_collision(
    chain: &KinematicChain,
    q: &nalgebra::DVector<f64>,
    object: &Pose,
    geom: &CollisionGeometry,
) -> crate::Result<bool> {
    let fk = chain.fk_full(q)?;
    Ok(check_collision_fk(&fk, object, geom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn geom() -> CollisionGeometry {
        CollisionGeometry {
            link_radius: 0.05,
            object_radius: 0.04,
            floor_z: -0.5, // keep the floor out of the way unless wanted
        }
    }

    #[test]
    fn far_object_does_not_collide() {
        let chain = crate::kinematics::KinematicChain::ur6dof();
        let q = DVector::from_vec(chain.home.clone());
        let object = Pose::from_translation(Vector3::new(2.0, 2.0, 1.0));
        assert!(!check_collision(&chain, &q, &object, &geom()).unwrap());
    }

    #[test]
    fn object_on_link_axis_collides() {
        let chain = crate::kinematics::KinematicChain::ur6dof();
        let q = DVector::from_vec(chain.home.clone());
        let fk = chain.fk_full(&q).unwrap();
        // Midpoint of the upper-arm link is guaranteed overlap.
        let segs = link_segments(&fk);
        let (a, b) = segs[1];
        let object = Pose::from_translation((a + b) / 2.0);
        assert!(check_collision_fk(&fk, &object, &geom()));
    }

    #[test]
    fn floor_contact_detected() {
        let chain = crate::kinematics::KinematicChain::ur6dof();
        let q = DVector::from_vec(chain.home.clone());
        let g = CollisionGeometry {
            floor_z: 0.2, // raise the floor above the base
            ..geom()
        };
        let object = Pose::from_translation(Vector3::new(2.0, 2.0, 1.0));
        assert!(check_collision(&chain, &q, &object, &g).unwrap());
    }

    #[test]
    fn gripper_link_is_exempt_from_object_contact() {
        let chain = crate::kinematics::KinematicChain::ur6dof();
        let q = DVector::from_vec(chain.home.clone());
        let fk = chain.fk_full(&q).unwrap();
        // Object exactly at the tool tip: inside the gripper capsule only.
        let object = Pose::from_translation(fk.ee.position);
        assert!(!check_collision_fk(&fk, &object, &geom()));
    }

    /// Sweep the object along a line through the arm: the flag must flip
    /// exactly where a dense point-sampled distance oracle crosses zero.
    #[test]
    fn sweep_matches_point_sampling_oracle() {
        let chain = crate::kinematics::KinematicChain::ur6dof();
        let q = DVector::from_vec(vec![0.0, 0.4, 0.8, 0.6, 0.0, 0.0]);
        let fk = chain.fk_full(&q).unwrap();
        let g = geom();
        let segs = link_segments(&fk);
        let last = segs.len() - 1;

        // Oracle: min distance to any non-exempt link, via dense sampling.
        let oracle_dist = |p: &Vector3<f64>| -> f64 {
            let mut best = f64::INFINITY;
            for (i, (a, b)) in segs.iter().enumerate() {
                if i == last {
                    continue;
                }
                for s in 0..=1000 {
                    let t = s as f64 / 1000.0;
                    let d = (p - (a + (b - a) * t)).norm();
                    best = best.min(d);
                }
            }
            best - (g.link_radius + g.object_radius)
        };

        let start = Vector3::new(0.8, 0.0, 0.5);
        let end = Vector3::new(-0.2, 0.0, 0.5);
        let steps = 400;
        for k in 0..steps {
            let p = start + (end - start) * (k as f64 / steps as f64);
            let flag = check_collision_fk(&fk, &Pose::from_translation(p), &g);
            let d = oracle_dist(&p);
            // Within half a millimeter of the boundary either answer is
            // accepted (the oracle samples finitely).
            if d > 5e-4 {
                assert!(!flag, "false positive at distance {d}");
            } else if d < -5e-4 {
                assert!(flag, "missed collision at depth {d}");
            }
        }
    }
}
