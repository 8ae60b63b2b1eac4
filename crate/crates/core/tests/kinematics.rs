use artipose::kinematics::KinematicsError;
use artipose::lie::{exp_se3, exp_so3, RigidTransform};
use artipose::rng::stream;
use artipose::synth::{random_pose, PoseRanges};
use artipose::*;

/// Cumulative transforms by explicit composition along the parent chain.
fn chain_oracle(model: &SkeletalModel, pose: &Pose) -> Vec<RigidTransform> {
    let mut g: Vec<RigidTransform> = Vec::new();
    for (j, spec) in model.joints.iter().enumerate() {
        let t = match spec.parent {
            None => exp_se3(pose.twists[0]),
            Some(p) => {
                let local = RigidTransform::new(exp_so3(pose.twists[j].omega), spec.direction * (spec.bone_length * pose.scale));
                g[p] * local
            }
        };
        g.push(t);
    }
    g
}

#[test]
fn forward_kinematics_matches_chain_product() {
    for model in [SkeletalModel::fish(), SkeletalModel::mouse(), SkeletalModel::hand()] {
        let ranges = PoseRanges::for_model(&model);
        for i in 0..50 {
            let mut rng = stream(3, "fk", &[i]);
            let pose = random_pose(&model, &ranges, &mut rng);
            let (g, p) = model.forward_kinematics(&pose).unwrap();
            let want = chain_oracle(&model, &pose);
            for j in 0..model.joint_count() {
                assert!(g[j].max_abs_diff(&want[j]) < 1e-9, "{} joint {j}", model.name);
                assert_eq!(p.0[j], g[j].translation);
            }
        }
    }
}

#[test]
fn bone_lengths_scale_with_pose() {
    let model = SkeletalModel::fish();
    let ranges = PoseRanges::for_model(&model);
    let mut rng = stream(4, "bones", &[]);
    let mut pose = random_pose(&model, &ranges, &mut rng);
    pose.scale = 1.3;
    let (_, p) = model.forward_kinematics(&pose).unwrap();
    for (j, spec) in model.joints.iter().enumerate().skip(1) {
        let d = p.0[j].distance(p.0[spec.parent.unwrap()]);
        assert!((d - 1.3 * spec.bone_length).abs() < 1e-9);
    }
}

#[test]
fn preset_shapes() {
    let fish = SkeletalModel::fish();
    assert_eq!(fish.joint_count(), 21);
    assert!((fish.chain_length() - 30.0).abs() < 1e-12);
    assert_eq!(SkeletalModel::mouse().joint_count(), 5);
    let hand = SkeletalModel::hand();
    assert_eq!(hand.joint_count(), 23);
    assert_eq!(hand.dof_count(), 26);
    assert!(SkeletalModel::preset("octopus").is_none());
}

#[test]
fn dof_violations_are_rejected() {
    let model = SkeletalModel::fish();
    let mut pose = model.home_pose();
    pose.twists[3].omega.x = 0.1;
    assert!(matches!(model.forward_kinematics(&pose), Err(KinematicsError::DofViolation { joint: 3, .. })));
    let short = Pose::home(5);
    assert!(model.forward_kinematics(&short).is_err());
}

#[test]
fn state_round_trip_and_updates() {
    let model = SkeletalModel::fish();
    let ranges = PoseRanges::for_model(&model);
    let mut rng = stream(5, "state", &[]);
    let pose = random_pose(&model, &ranges, &mut rng);
    let state = PoseState::from_pose(&pose);
    let back = state.to_pose();
    for (a, b) in pose.twists.iter().zip(&back.twists) {
        assert!(a.max_abs_diff(*b) < 1e-9);
    }
    let mut s = state.clone();
    let r = TwistVector::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 2.0, 3.0));
    s.update_joint(&model, 4, r);
    // only yaw survives on a body joint
    assert_eq!(s.rotations[4], state.rotations[4] + Vec3::new(0.0, 0.0, 0.3));
    s.update_joint(&model, 0, r);
    assert_eq!(s.base, state.base * exp_se3(r));
    let before = s.clone();
    s.update_joint(&model, 20, r);
    assert_eq!(s, before);
}
