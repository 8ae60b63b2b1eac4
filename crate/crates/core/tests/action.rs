use artipose::action::*;
use artipose::lie::{exp_se3, log_se3_any};
use artipose::rng::stream;
use artipose::*;
use rand::Rng;

fn motion(class: u32, i: u64) -> PoseSequence {
    let model = SkeletalModel::fish();
    let mut rng = stream(31, "motion", &[class as u64, i]);
    motion_sequence(&model, class, &mut rng)
}

/// Means and sample deviations by nested loops over explicit segment bounds.
fn pool_oracle(frames: &[Vec<f64>]) -> Vec<f64> {
    let n = frames.len();
    let dim = frames[0].len();
    let bounds = [(0, n / 4), (n / 4, n / 2), (n / 2, 3 * n / 4), (3 * n / 4, n), (0, n / 2), (n / 2, n), (0, n)];
    let mut out = Vec::new();
    for (a, b) in bounds {
        let len = (b - a) as f64;
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for d in 0..dim {
            let m = (a..b).map(|f| frames[f][d]).sum::<f64>() / len;
            let v = (a..b).map(|f| (frames[f][d] - m).powi(2)).sum::<f64>() / (len - 1.0);
            means.push(m);
            stds.push(v.sqrt());
        }
        out.extend(means);
        out.extend(stds);
    }
    out
}

#[test]
fn pyramid_matches_loops() {
    let mut rng = stream(32, "pool", &[]);
    let frames: Vec<Vec<f64>> = (0..32).map(|_| (0..5).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let flat: Vec<f64> = frames.concat();
    let got = pyramid_pool(&flat, 5);
    let want = pool_oracle(&frames);
    assert_eq!(got.len(), 7 * 2 * 5);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn fish_feature_lengths() {
    let model = SkeletalModel::fish();
    assert_eq!(feature_len(21, FeatureMode::Tangent, true), 252);
    let seq = normalize_sequence(&motion(0, 0), NORMALIZED_LEN).unwrap();
    assert_eq!(extract_features(&model, &seq, FeatureMode::Tangent, true).unwrap().len(), 252);
    assert_eq!(extract_features(&model, &seq, FeatureMode::Tangent, false).unwrap().len(), 7 * 2 * 12 * 21);
    assert_eq!(extract_features(&model, &seq, FeatureMode::JointPosition, false).unwrap().len(), 7 * 2 * 63 + 6);
}

#[test]
fn static_sequence_has_no_motion() {
    let model = SkeletalModel::fish();
    let pose = motion(1, 3).poses[5].clone();
    let seq = PoseSequence { poses: vec![pose; 32], timestamps: (0..32).map(|t| t as f64).collect(), label: None };
    let f = extract_features(&model, &seq, FeatureMode::Tangent, true).unwrap();
    for seg in f.chunks(36) {
        // base increment means, then every deviation
        assert!(seg[..6].iter().all(|v| v.abs() < 1e-12));
        assert!(seg[18..].iter().all(|v| v.abs() < 1e-9));
    }
}

#[test]
fn tangent_features_ignore_global_rigid_motion() {
    let model = SkeletalModel::fish();
    let seq = normalize_sequence(&motion(2, 1), NORMALIZED_LEN).unwrap();
    let h = exp_se3(TwistVector::from_array([0.2, -0.4, 1.1, 30.0, -12.0, 5.0]));
    let mut moved = seq.clone();
    for p in &mut moved.poses {
        p.twists[0] = log_se3_any(&(h * exp_se3(p.twists[0])));
    }
    let a = extract_features(&model, &seq, FeatureMode::Tangent, true).unwrap();
    let b = extract_features(&model, &moved, FeatureMode::Tangent, true).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-7, "{x} {y}");
    }
    let a = extract_features(&model, &seq, FeatureMode::JointPosition, false).unwrap();
    let b = extract_features(&model, &moved, FeatureMode::JointPosition, false).unwrap();
    assert!(a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1.0));
}

#[test]
fn normalization_keeps_endpoints_and_interpolates() {
    let model = SkeletalModel::fish();
    let src = motion(0, 2);
    let two = PoseSequence { poses: vec![src.poses[0].clone(), src.poses[9].clone()], timestamps: vec![0.0, 1.0], label: Some(0) };
    let n = normalize_sequence(&two, NORMALIZED_LEN).unwrap();
    assert_eq!(n.poses.len(), 32);
    assert_eq!(n.poses[0], two.poses[0]);
    assert_eq!(n.poses[31], two.poses[1]);
    assert_eq!(n.label, Some(0));
    // the interior base positions follow the geodesic, monotonically
    let p = |k: usize| exp_se3(n.poses[k].twists[0]).translation;
    let total = p(0).distance(p(31));
    let mut prev = 0.0;
    for k in 1..32 {
        let d = p(0).distance(p(k));
        assert!(d + 1e-9 >= prev && d <= total + 1e-9);
        prev = d;
    }
    model.check_pose(&n.poses[17]).unwrap();
    let id = normalize_sequence(&n, 32).unwrap();
    assert_eq!(id.poses, n.poses);
}

#[test]
fn bad_sequences_are_rejected() {
    let p = SkeletalModel::fish().home_pose();
    let one = PoseSequence { poses: vec![p.clone()], timestamps: vec![0.0], label: None };
    assert_eq!(normalize_sequence(&one, 32), Err(ActionError::TooShort { frames: 1 }));
    let back = PoseSequence { poses: vec![p.clone(), p], timestamps: vec![1.0, 1.0], label: None };
    assert_eq!(normalize_sequence(&back, 32), Err(ActionError::BadTimestamps));
}

#[test]
fn confusion_and_accuracy() {
    let truth = [0, 0, 1, 2, 2, 2];
    let pred = [0, 1, 1, 2, 0, 2];
    let m = confusion_matrix(&truth, &pred, 3);
    assert_eq!(m, vec![vec![1, 1, 0], vec![0, 1, 0], vec![1, 0, 2]]);
    assert!((accuracy(&truth, &pred) - 4.0 / 6.0).abs() < 1e-15);
}

#[test]
fn classifier_separates_motion_classes() {
    let model = SkeletalModel::fish();
    let feats = |class: u32, i: u64| {
        let s = normalize_sequence(&motion(class, i), NORMALIZED_LEN).unwrap();
        extract_features(&model, &s, FeatureMode::Tangent, true).unwrap()
    };
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..15 {
        for c in 0..4 {
            x.push(feats(c, i));
            y.push(c);
        }
    }
    let mut config = action_train_config();
    config.n_trees = 10;
    let (clf, _) = train_action(&x, &y, 4, FeatureMode::Tangent, true, &config, 3).unwrap();
    let mut hits = 0;
    for i in 100..120 {
        for c in 0..4 {
            let (p, probs) = clf.classify(&feats(c, i)).unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            hits += (p == c) as usize;
        }
    }
    assert!(hits >= 60, "{hits}/80");
    assert!(matches!(clf.classify(&[0.0; 3]), Err(ActionError::DimensionMismatch { .. })));
}
