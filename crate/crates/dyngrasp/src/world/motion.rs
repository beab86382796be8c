//! Object motion generators: static placement, boundary-to-boundary lines,
//! planar ovals with a random halt, and a 6-DoF random-waypoint walk with
//! fixed pauses and positional vibration.
//!
//! A motion is materialized as a pose per tick at construction time, so
//! `pose_at_step` is pure and an episode is fully determined by its seed.
//! A final enforcement pass guarantees the per-step speed caps and keeps
//! the object inside the workspace whatever the generator did.

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::config::MotionConfig;
use crate::geometry::{Pose, Quat};
use crate::{Error, Result};

use super::Workspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Static,
    Linear,
    Oval,
    Random,
}

impl MotionKind {
    pub const ALL: [MotionKind; 4] = [
        MotionKind::Static,
        MotionKind::Linear,
        MotionKind::Oval,
        MotionKind::Random,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(MotionKind::Static),
            "linear" => Ok(MotionKind::Linear),
            "oval" => Ok(MotionKind::Oval),
            "random" => Ok(MotionKind::Random),
            other => Err(Error::InvalidArgument(format!(
                "unknown motion kind '{other}' (static|linear|oval|random)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MotionKind::Static => "static",
            MotionKind::Linear => "linear",
            MotionKind::Oval => "oval",
            MotionKind::Random => "random",
        }
    }
}

/// Per-step speed caps, m/s and rad/s.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MotionCaps {
    pub translation: f64,
    pub rotation: f64,
}

/// A materialized object trajectory at tick granularity.
#[derive(Debug, Clone)]
pub struct ObjectMotion {
    pub kind: MotionKind,
    pub seed: u64,
    pub caps: MotionCaps,
    dt: f64,
    poses: Vec<Pose>,
}

impl ObjectMotion {
    /// Pose at step `k`; held at the last generated pose past the horizon.
    pub fn pose_at_step(&self, k: u32) -> Pose {
        let idx = (k as usize).min(self.poses.len() - 1);
        self.poses[idx]
    }

    pub fn initial_pose(&self) -> Pose {
        self.poses[0]
    }

    pub fn horizon(&self) -> u32 {
        self.poses.len() as u32 - 1
    }

    /// Translation speed over the step ending at `k`, m/s.
    pub fn speed_at_step(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let a = self.pose_at_step(k - 1).position;
        let b = self.pose_at_step(k).position;
        (b - a).norm() / self.dt
    }
}

fn uniform_quat(rng: &mut ChaCha8Rng) -> Quat {
    // Shoemake's method: uniform over SO(3).
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen::<f64>() * 2.0 * PI;
    let u3: f64 = rng.gen::<f64>() * 2.0 * PI;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    Quat::new(a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos()).normalized()
}

fn random_unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn sample_range(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[0] >= range[1] {
        range[0]
    } else {
        rng.gen_range(range[0]..range[1])
    }
}

/// Samples a motion of the given kind. `horizon_steps` poses are generated
/// past the initial one (enough to cover the episode timeout).
pub fn sample_motion(
    kind: MotionKind,
    workspace: &Workspace,
    caps: MotionCaps,
    cfg: &MotionConfig,
    seed: u64,
    dt: f64,
    horizon_steps: u32,
) -> Result<ObjectMotion> {
    if caps.translation <= 0.0 || caps.rotation <= 0.0 {
        return Err(Error::InvalidArgument("motion caps must be positive".into()));
    }
    let mut rng = crate::seeding::rng(seed);
    let n = horizon_steps as usize + 1;
    let mut poses = match kind {
        MotionKind::Static => generate_static(workspace, &mut rng, n),
        MotionKind::Linear => generate_linear(workspace, caps, cfg, &mut rng, n, dt),
        MotionKind::Oval => generate_oval(workspace, caps, cfg, &mut rng, n, dt),
        MotionKind::Random => generate_random(workspace, caps, cfg, &mut rng, n, dt),
    };
    enforce_caps_and_bounds(&mut poses, workspace, caps, dt);
    Ok(ObjectMotion {
        kind,
        seed,
        caps,
        dt,
        poses,
    })
}

fn generate_static(ws: &Workspace, rng: &mut ChaCha8Rng, n: usize) -> Vec<Pose> {
    let pose = Pose::new(ws.sample_point(rng), uniform_quat(rng));
    vec![pose; n]
}

fn generate_linear(
    ws: &Workspace,
    caps: MotionCaps,
    cfg: &MotionConfig,
    rng: &mut ChaCha8Rng,
    n: usize,
    dt: f64,
) -> Vec<Pose> {
    let (a, b) = loop {
        let a = ws.sample_boundary_point(rng);
        let b = ws.sample_boundary_point(rng);
        if (a - b).norm() >= cfg.min_linear_length {
            break (a, b);
        }
    };
    let orientation = uniform_quat(rng);
    let speed = sample_range(rng, cfg.speed_fraction) * caps.translation;
    let length = (b - a).norm();
    let dir = (b - a) / length;
    // Constant speed, reflecting at the endpoints.
    let mut poses = Vec::with_capacity(n);
    let mut s = 0.0;
    let mut forward = true;
    for _ in 0..n {
        poses.push(Pose::new(a + dir * s, orientation));
        let mut ds = speed * dt;
        while ds > 0.0 {
            if forward {
                let room = length - s;
                if ds <= room {
                    s += ds;
                    ds = 0.0;
                } else {
                    s = length;
                    ds -= room;
                    forward = false;
                }
            } else if ds <= s {
                s -= ds;
                ds = 0.0;
            } else {
                ds -= s;
                s = 0.0;
                forward = true;
            }
        }
    }
    poses
}

fn generate_oval(
    ws: &Workspace,
    caps: MotionCaps,
    cfg: &MotionConfig,
    rng: &mut ChaCha8Rng,
    n: usize,
    dt: f64,
) -> Vec<Pose> {
    let half = ws.half_size();
    let max_semi = (half.x.min(half.y) - 0.02).max(0.03);
    let sa = rng.gen_range(0.03..max_semi);
    let sb = rng.gen_range(0.03..max_semi);
    let lo = ws.min_corner();
    let hi = ws.max_corner();
    let cx = rng.gen_range(lo.x + sa..hi.x - sa);
    let cy = rng.gen_range(lo.y + sb..hi.y - sb);
    let cz = rng.gen_range(lo.z..hi.z);
    let phase = rng.gen::<f64>() * 2.0 * PI;
    let direction = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let speed = sample_range(rng, cfg.speed_fraction) * caps.translation;
    let omega = direction * speed / sa.max(sb);
    let stop_step = rng.gen_range(0..n);
    let orientation = uniform_quat(rng);
    let mut poses = Vec::with_capacity(n);
    for k in 0..n {
        let t = (k.min(stop_step)) as f64 * dt;
        let ang = phase + omega * t;
        poses.push(Pose::new(
            Vector3::new(cx + sa * ang.cos(), cy + sb * ang.sin(), cz),
            orientation,
        ));
    }
    poses
}

fn generate_random(
    ws: &Workspace,
    caps: MotionCaps,
    cfg: &MotionConfig,
    rng: &mut ChaCha8Rng,
    n: usize,
    dt: f64,
) -> Vec<Pose> {
    let mut poses = Vec::with_capacity(n);
    let mut pos = ws.sample_point(rng);
    let mut ori = uniform_quat(rng);
    poses.push(Pose::new(pos, ori));

    #[derive(PartialEq)]
    enum Phase {
        Bout,
        Pause,
    }
    let mut phase = Phase::Bout;
    let mut phase_left = (sample_range(rng, cfg.bout_duration) / dt).round() as i64;
    let mut target_p = ws.sample_point(rng);
    let mut target_q = bout_target_orientation(&ori, cfg, rng);
    let mut lin_speed = sample_range(rng, cfg.speed_fraction).max(0.5) * caps.translation;
    let mut rot_speed = sample_range(rng, cfg.speed_fraction).max(0.5) * caps.rotation;
    let mut pause_center = pos;
    let mut vib_dir = random_unit_vector(rng);
    let mut pause_elapsed = 0.0;

    for _ in 1..n {
        match phase {
            Phase::Bout => {
                let to_target = target_p - pos;
                let dist = to_target.norm();
                let step = lin_speed * dt;
                if dist <= step {
                    pos = target_p;
                    // Pick a fresh waypoint mid-bout so the object keeps moving.
                    target_p = ws.sample_point(rng);
                } else {
                    pos += to_target * (step / dist);
                }
                ori = ori.step_toward(&target_q, rot_speed * dt);
                phase_left -= 1;
                if phase_left <= 0 {
                    phase = Phase::Pause;
                    phase_left = (cfg.pause_duration / dt).round() as i64;
                    pause_center = pos;
                    vib_dir = random_unit_vector(rng);
                    pause_elapsed = 0.0;
                }
            }
            Phase::Pause => {
                // The object never fully stops: it vibrates around its rest
                // point while paused.
                pause_elapsed += dt;
                let osc = (2.0 * PI * cfg.vibration_freq * pause_elapsed).sin();
                pos = pause_center + vib_dir * (cfg.vibration_amp * osc);
                phase_left -= 1;
                if phase_left <= 0 {
                    phase = Phase::Bout;
                    phase_left = (sample_range(rng, cfg.bout_duration) / dt).round() as i64;
                    pos = pause_center;
                    target_p = ws.sample_point(rng);
                    target_q = bout_target_orientation(&ori, cfg, rng);
                    lin_speed = sample_range(rng, cfg.speed_fraction).max(0.5) * caps.translation;
                    rot_speed = sample_range(rng, cfg.speed_fraction).max(0.5) * caps.rotation;
                }
            }
        }
        poses.push(Pose::new(pos, ori));
    }
    poses
}

fn bout_target_orientation(current: &Quat, cfg: &MotionConfig, rng: &mut ChaCha8Rng) -> Quat {
    let angle = sample_range(rng, cfg.bout_angle);
    let axis = random_unit_vector(rng);
    Quat::from_axis_angle(&axis, angle).mul(current).normalized()
}

/// Final enforcement pass: clamps every step to the speed caps and every
/// position into the workspace.
fn enforce_caps_and_bounds(poses: &mut [Pose], ws: &Workspace, caps: MotionCaps, dt: f64) {
    poses[0].position = ws.clamp_point(&poses[0].position);
    for k in 1..poses.len() {
        let prev = poses[k - 1];
        let mut p = ws.clamp_point(&poses[k].position);
        let dp = p - prev.position;
        let max_step = caps.translation * dt;
        if dp.norm() > max_step {
            p = prev.position + dp * (max_step / dp.norm());
            // Re-clamping is safe: the box is convex, so the shortened step
            // stays inside.
            p = ws.clamp_point(&p);
        }
        let q = prev
            .orientation
            .step_toward(&poses[k].orientation, caps.rotation * dt);
        poses[k] = Pose::new(p, q);
    }
}
