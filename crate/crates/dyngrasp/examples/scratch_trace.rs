use dyngrasp::geometry::Pose;
use dyngrasp::grasping::grasp_frame;
use dyngrasp::kinematics::KinematicChain;
use dyngrasp::servo::{angular_z_angle, BaselineController, ServoParams};
use nalgebra::{DVector, Vector3};

fn main() {
    let chain = KinematicChain::ur6dof();
    let dt = 1.0 / 15.0;
    let grasp = grasp_frame(&Vector3::new(0.5, 0.1, 0.3), &Vector3::new(0.0, 0.0, -1.0), 0.0);
    let mut ctl = BaselineController::new(ServoParams::default());
    let mut q = DVector::from_vec(chain.home.clone());
    let (ee0, cam0) = chain.forward_kinematics(&q).unwrap();
    println!("home ee: {:?} cam z: {:?}", ee0.position, cam0.orientation.z_axis());
    for k in 0..525 {
        let (qd, close) = ctl.tick(&chain, &q, &grasp, dt).unwrap();
        let (ee, _): (Pose, Pose) = chain.forward_kinematics(&q).unwrap();
        if k % 30 == 0 || close {
            let pos_err = (ee.position - grasp.position).norm();
            let zang = angular_z_angle(&ee, &grasp);
            let jac = chain.jacobian(&q).unwrap();
            let sv = jac.svd(false, false).singular_values;
            println!(
                "k={k:3} t={:5.2} r={:.3} pos_err={:.4} z_angle={:.3} qd_norm={:.3} close={close}",
                k as f64 * dt,
                ctl.radius().unwrap_or(f64::NAN),
                pos_err,
                zang,
                qd.norm()
            );
            println!(
                "   q={:?}",
                q.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
            );
            println!("   ee={:?} sv_min={:.4}", ee.position.as_slice(), sv[sv.len() - 1]);
        }
        if close {
            println!("CLOSED at k={k}");
            break;
        }
        q += qd * dt;
        chain.clamp_positions(&mut q);
    }
}
