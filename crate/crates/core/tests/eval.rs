use artipose::eval::*;
use artipose::JointPositions;
use artipose::Vec3;

#[test]
fn ced_matches_counting() {
    let errors = [0.5, 1.0, 1.0, 2.5, 7.0, 0.0, 3.3];
    let thresholds: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
    for (t, frac) in ced(&errors, &thresholds) {
        let count = errors.iter().filter(|e| **e <= t).count();
        assert_eq!(frac, count as f64 / errors.len() as f64);
    }
    assert!(ced(&[], &[1.0]).iter().all(|p| p.1 == 0.0));
}

#[test]
fn joint_error_is_mean_distance() {
    let a = JointPositions(vec![Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0)]);
    let b = JointPositions(vec![Vec3::new(0.0, 0.0, 2.0), Vec3::new(3.0, 4.0, 0.0)]);
    assert_eq!(average_joint_error(&a, &b).unwrap(), 1.0);
    assert!(average_joint_error(&a, &JointPositions(vec![Vec3::ZERO])).is_err());
}

#[test]
fn spearman_known_values() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    assert!((spearman(&x, &[2.0, 4.0, 8.0, 16.0, 32.0]).unwrap() - 1.0).abs() < 1e-12);
    assert!((spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    // 1 − 6 Σd² / (n(n²−1)) without ties
    let y = [2.0, 1.0, 4.0, 3.0, 5.0];
    assert!((spearman(&x, &y).unwrap() - (1.0 - 6.0 * 4.0 / 120.0)).abs() < 1e-12);
    assert_eq!(average_ranks(&[10.0, 20.0, 10.0]), vec![1.5, 3.0, 1.5]);
}
