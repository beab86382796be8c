//! Grasp memory pool: grasp poses stored relative to the object frame,
//! realized in the world frame each tick, and selected by smallest angular
//! distance to the current gripper orientation.

use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::geometry::{angular_distance, Pose, Quat};
use crate::{Error, Result};

/// One grasp expressed in the object frame.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Grasp {
    pub pose: Pose,
    pub confidence: f64,
}

/// Object-relative grasp poses, fixed for the episode once built.
#[derive(Debug, Clone)]
pub struct GraspPool {
    grasps: Vec<Grasp>,
}

impl GraspPool {
    pub fn new(grasps: Vec<Grasp>) -> Result<Self> {
        if grasps.is_empty() {
            return Err(Error::InvalidArgument("grasp pool must be nonempty".into()));
        }
        let grasps = grasps
            .into_iter()
            .map(|mut g| {
                g.pose.orientation = g.pose.orientation.normalized();
                g
            })
            .collect();
        Ok(GraspPool { grasps })
    }

    pub fn len(&self) -> usize {
        self.grasps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grasps.is_empty()
    }

    pub fn grasps(&self) -> &[Grasp] {
        &self.grasps
    }

    /// Index of the highest-confidence grasp; ties go to the lowest index,
    /// so uniform confidences give index 0.
    pub fn highest_confidence(&self) -> usize {
        let mut best = 0;
        for (i, g) in self.grasps.iter().enumerate() {
            if g.confidence > self.grasps[best].confidence {
                best = i;
            }
        }
        best
    }

    /// World-frame grasp poses for the current object pose; order stable.
    pub fn realize(&self, object: &Pose) -> Vec<Pose> {
        self.grasps
            .iter()
            .map(|g| object.compose(&g.pose))
            .collect()
    }

    /// Synthesizes a pool for an object observed at `object` in the world.
    ///
    /// Approach directions are drawn from a cone around straight-down (the
    /// reachable side of a desk workspace): the first grasp approaches
    /// vertically, the rest tilt by up to `max_tilt` with uniform azimuth
    /// and roll. Grasp origins sit at the object center; the fingers
    /// straddle the bounding sphere. Confidences are uniform.
    pub fn synthesize(
        object: &Pose,
        k: usize,
        max_tilt: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("pool size must be >= 1".into()));
        }
        let inv = object.inverse();
        let mut grasps = Vec::with_capacity(k);
        for i in 0..k {
            let (tilt, azimuth) = if i == 0 {
                (0.0, rng.gen::<f64>() * std::f64::consts::TAU)
            } else {
                (
                    rng.gen::<f64>() * max_tilt,
                    rng.gen::<f64>() * std::f64::consts::TAU,
                )
            };
            // Approach direction: into the object, tilted off vertical.
            let approach = Vector3::new(
                tilt.sin() * azimuth.cos(),
                tilt.sin() * azimuth.sin(),
                -tilt.cos(),
            );
            let roll = rng.gen::<f64>() * std::f64::consts::TAU;
            let world = grasp_frame(&object.position, &approach, roll);
            grasps.push(Grasp {
                pose: inv.compose(&world),
                confidence: 1.0,
            });
        }
        GraspPool::new(grasps)
    }

    /// Loads a pool from structured text: a list of
    /// `{ position, quat, confidence }` entries in the object frame.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Entry {
            position: [f64; 3],
            quat: [f64; 4],
            #[serde(default = "default_confidence")]
            confidence: f64,
        }
        fn default_confidence() -> f64 {
            1.0
        }
        #[derive(Deserialize)]
        struct File {
            grasps: Vec<Entry>,
        }
        let file: File =
            toml::from_str(text).map_err(|e| Error::Config(format!("grasp pool: {e}")))?;
        GraspPool::new(
            file.grasps
                .into_iter()
                .map(|e| Grasp {
                    pose: Pose::new(
                        Vector3::from(e.position),
                        Quat::new(e.quat[0], e.quat[1], e.quat[2], e.quat[3]),
                    ),
                    confidence: e.confidence,
                })
                .collect(),
        )
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        GraspPool::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Builds a grasp frame at `origin` whose +z is the (unit) approach
/// direction; `roll` spins the finger axis about the approach.
pub fn grasp_frame(origin: &Vector3<f64>, approach: &Vector3<f64>, roll: f64) -> Pose {
    let z = approach.normalize();
    // Any perpendicular seed works; pick the least-aligned basis vector.
    let seed = if z.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let y0 = (seed - z * seed.dot(&z)).normalize();
    let x0 = y0.cross(&z);
    let (s, c) = roll.sin_cos();
    let y = y0 * c + x0 * s;
    let x = y.cross(&z);
    let m = nalgebra::Matrix3::from_columns(&[x, y, z]);
    Pose::new(*origin, Quat::from_rotation_matrix(&m))
}

/// Argmin of angular distance between the gripper orientation and the
/// realized world grasps; ties break to the lowest index. Recompute every
/// control iteration.
pub fn select(realized: &[Pose], gripper: &Pose) -> (usize, Pose) {
    assert!(!realized.is_empty(), "realized grasp list must be nonempty");
    let gq = gripper.orientation.normalized();
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, g) in realized.iter().enumerate() {
        let d = angular_distance(&gq, &g.orientation.normalized()).expect("unit quaternions");
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, realized[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pool_of(poses: Vec<Pose>) -> GraspPool {
        GraspPool::new(
            poses
                .into_iter()
                .map(|pose| Grasp {
                    pose,
                    confidence: 1.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn realize_identity_object_returns_relatives() {
        let rel = Pose::new(
            Vector3::new(0.0, 0.0, 0.1),
            Quat::from_axis_angle(&Vector3::x(), 0.4),
        );
        let pool = pool_of(vec![rel]);
        let world = pool.realize(&Pose::IDENTITY);
        assert_eq!(world[0], pool.grasps()[0].pose);
    }

    #[test]
    fn realize_translated_object_translates_grasps() {
        let rel = Pose::from_translation(Vector3::new(0.0, 0.0, 0.1));
        let pool = pool_of(vec![rel]);
        let obj = Pose::from_translation(Vector3::new(0.1, 0.0, 0.0));
        let world = pool.realize(&obj);
        assert_relative_eq!(world[0].position.x, 0.1, epsilon = 1e-15);
        assert_relative_eq!(world[0].position.z, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn realize_roundtrip_recovers_relatives() {
        let mut rng = crate::seeding::rng(301);
        let obj = Pose::new(
            Vector3::new(0.4, -0.2, 0.5),
            Quat::from_axis_angle(&Vector3::new(1.0, 2.0, -0.5), 1.1),
        );
        let pool = GraspPool::synthesize(&obj, 4, 0.7, &mut rng).unwrap();
        let world = pool.realize(&obj);
        let inv = obj.inverse();
        for (g, w) in pool.grasps().iter().zip(&world) {
            let back = inv.compose(w);
            assert!((back.position - g.pose.position).norm() < 1e-9);
            assert!(
                angular_distance(&back.orientation, &g.pose.orientation).unwrap() < 1e-9
            );
        }
    }

    #[test]
    fn select_single_grasp_is_index_zero() {
        let pool = pool_of(vec![Pose::IDENTITY]);
        let world = pool.realize(&Pose::IDENTITY);
        let gripper = Pose::new(
            Vector3::zeros(),
            Quat::from_axis_angle(&Vector3::y(), 2.0),
        );
        assert_eq!(select(&world, &gripper).0, 0);
    }

    #[test]
    fn select_picks_nearest_orientation() {
        let near = Pose::new(
            Vector3::zeros(),
            Quat::from_axis_angle(&Vector3::z(), 10.0_f64.to_radians()),
        );
        let far = Pose::new(
            Vector3::zeros(),
            Quat::from_axis_angle(&Vector3::z(), 170.0_f64.to_radians()),
        );
        let (idx, _) = select(&[far, near], &Pose::IDENTITY);
        assert_eq!(idx, 1);
    }

    #[test]
    fn select_tie_breaks_to_lowest_index() {
        let a = Pose::new(
            Vector3::zeros(),
            Quat::from_axis_angle(&Vector3::z(), 0.5),
        );
        let b = Pose::new(
            Vector3::zeros(),
            Quat::from_axis_angle(&Vector3::z(), -0.5),
        );
        let (idx, _) = select(&[a, b], &Pose::IDENTITY);
        assert_eq!(idx, 0);
    }

    #[test]
    fn selection_invariant_under_world_reorientation() {
        let mut rng = crate::seeding::rng(302);
        for _ in 0..50 {
            let obj = Pose::new(
                Vector3::new(0.5, 0.0, 0.3),
                Quat::from_axis_angle(&Vector3::z(), rng.gen::<f64>()),
            );
            let pool = GraspPool::synthesize(&obj, 5, 0.7, &mut rng).unwrap();
            let gripper = Pose::new(
                Vector3::new(0.4, 0.1, 0.6),
                Quat::from_axis_angle(
                    &Vector3::new(
                        rng.gen::<f64>() - 0.5,
                        rng.gen::<f64>() - 0.5,
                        rng.gen::<f64>() - 0.5,
                    ),
                    rng.gen::<f64>() * 3.0,
                ),
            );
            let world = pool.realize(&obj);
            let (base, _) = select(&world, &gripper);

            let t = Pose::new(
                Vector3::new(1.0, -2.0, 0.5),
                Quat::from_axis_angle(&Vector3::new(0.3, 1.0, -0.2), 1.3),
            );
            let world_t: Vec<Pose> = world.iter().map(|g| t.compose(g)).collect();
            let gripper_t = t.compose(&gripper);
            let (moved, _) = select(&world_t, &gripper_t);
            assert_eq!(base, moved);
        }
    }

    #[test]
    fn switching_happens_only_at_distance_crossings() {
        // Rotate the gripper from grasp A toward grasp B; the selected
        // index must change exactly once, where the two distances cross.
        let qa = Quat::from_axis_angle(&Vector3::z(), 0.0);
        let qb = Quat::from_axis_angle(&Vector3::z(), 1.0);
        let world = vec![
            Pose::new(Vector3::zeros(), qa),
            Pose::new(Vector3::zeros(), qb),
        ];
        let mut switches = 0;
        let mut prev = 0;
        for k in 0..=1000 {
            let ang = k as f64 / 1000.0;
            let gripper = Pose::new(
                Vector3::zeros(),
                Quat::from_axis_angle(&Vector3::z(), ang),
            );
            let (idx, _) = select(&world, &gripper);
            if idx != prev {
                switches += 1;
                assert!((ang - 0.5).abs() < 2e-3, "crossing at {ang}, expected 0.5");
                prev = idx;
            }
        }
        assert_eq!(switches, 1);
    }

    #[test]
    fn synthesized_pool_first_grasp_approaches_from_above() {
        let mut rng = crate::seeding::rng(303);
        let obj = Pose::from_translation(Vector3::new(0.5, 0.0, 0.3));
        let pool = GraspPool::synthesize(&obj, 4, 40.0_f64.to_radians(), &mut rng).unwrap();
        let world = pool.realize(&obj);
        // First grasp: approach (+z of the grasp frame) points straight down.
        assert_relative_eq!(world[0].orientation.z_axis().z, -1.0, epsilon = 1e-9);
        // All grasps sit at the object center with downward-ish approaches.
        for g in &world {
            assert!((g.position - obj.position).norm() < 1e-12);
            assert!(g.orientation.z_axis().z < -0.5);
        }
        assert_eq!(pool.highest_confidence(), 0);
    }

    #[test]
    fn pool_file_roundtrip() {
        let text = r#"
            [[grasps]]
            position = [0.0, 0.0, 0.0]
            quat = [1.0, 0.0, 0.0, 0.0]
            confidence = 0.9

            [[grasps]]
            position = [0.01, 0.0, 0.02]
            quat = [0.707106781, 0.0, 0.707106781, 0.0]
        "#;
        let pool = GraspPool::from_toml_str(text).unwrap();
        assert_eq!(pool.len(), 2);
        assert!((pool.grasps()[1].pose.orientation.norm() - 1.0).abs() < 1e-12);
        assert_eq!(pool.grasps()[1].confidence, 1.0);
        assert!(GraspPool::from_toml_str("grasps = []").is_err());
    }
}
