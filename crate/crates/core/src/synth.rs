//! Synthetic data: random ground-truth poses, rendered samples, smooth
//! motion sequences, and the preprocessing / initial-pose step shared by
//! training and estimation.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::camera::{CameraModel, DepthImage, PointCloud};
use crate::kinematics::{JointPositions, Pose, PoseState, SkeletalModel};
use crate::lie::{exp_so3, translation_jacobian_inverse, RigidTransform, RotationMatrix, TwistVector, Vec3};
use crate::render::{render, RenderError};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreprocessError {
    EmptyForeground,
}

impl fmt::Display for PreprocessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("depth image has no foreground pixels")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PreprocessError {}

/// Foreground point cloud and the base-joint location guess: the 2-D
/// centroid of the foreground pixels, back-projected at their mean depth.
pub fn preprocess(image: &DepthImage, camera: &CameraModel) -> Result<(PointCloud, Vec3), PreprocessError> {
    let (mut su, mut sv, mut sz, mut n) = (0.0, 0.0, 0.0, 0usize);
    for (x, y, d) in image.foreground() {
        su += x as f64;
        sv += y as f64;
        sz += d;
        n += 1;
    }
    if n == 0 {
        return Err(PreprocessError::EmptyForeground);
    }
    let k = 1.0 / n as f64;
    let base = camera.back_project(su * k, sv * k, sz * k);
    Ok((PointCloud::from_image(image, camera), base))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitialPoseConfig {
    pub count: usize,
    /// In-plane rotation range, rad.
    pub rotation_range: (f64, f64),
    pub scale_range: (f64, f64),
}

impl InitialPoseConfig {
    pub fn new(count: usize) -> Self {
        InitialPoseConfig { count, rotation_range: (-PI, PI), scale_range: (0.9, 1.1) }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Home pose moved to `base`, turned in the image plane and rescaled.
pub fn initial_pose(joint_count: usize, base: Vec3, angle: f64, scale: f64) -> Pose {
    let omega = Vec3::new(0.0, 0.0, angle);
    let mut pose = Pose::home(joint_count);
    pose.twists[0] = TwistVector::new(omega, translation_jacobian_inverse(omega).mul_vec(base));
    pose.scale = scale;
    pose
}

/// `config.count` initial poses drawn from `rng`.
pub fn generate_initial_poses<R: Rng + ?Sized>(
    model: &SkeletalModel,
    base: Vec3,
    config: &InitialPoseConfig,
    rng: &mut R,
) -> Vec<Pose> {
    (0..config.count)
        .map(|_| {
            let angle = uniform(rng, config.rotation_range);
            let scale = uniform(rng, config.scale_range);
            initial_pose(model.joint_count(), base, angle, scale)
        })
        .collect()
}

/// Where and how a preset is placed when drawing random ground truth.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoseRanges {
    /// Base depth range, mm.
    pub depth: (f64, f64),
    /// Base x and y offsets from the optical axis, ± mm.
    pub lateral: f64,
    /// Out-of-plane tilt of the base, ± rad.
    pub tilt: f64,
    /// Half-range of every non-base ω coordinate, indexed by coordinate.
    pub joint_amplitude: [f64; 3],
    pub scale: (f64, f64),
    /// Per-joint render radii, mm.
    pub radii: Vec<f64>,
}

impl PoseRanges {
    pub fn for_model(model: &SkeletalModel) -> PoseRanges {
        let radii = model.radii.clone();
        match model.name.as_str() {
            "fish" => PoseRanges {
                depth: (180.0, 220.0),
                lateral: 30.0,
                tilt: 0.1,
                joint_amplitude: [0.0, 0.0, 0.12],
                scale: (1.0, 1.0),
                radii,
            },
            "mouse" => PoseRanges {
                depth: (550.0, 650.0),
                lateral: 60.0,
                tilt: 0.1,
                joint_amplitude: [0.15, 0.0, 0.25],
                scale: (1.0, 1.0),
                radii,
            },
            _ => PoseRanges {
                depth: (450.0, 550.0),
                lateral: 60.0,
                tilt: 0.2,
                joint_amplitude: [0.4, 0.0, 0.15],
                scale: (1.0, 1.0),
                radii,
            },
        }
    }
}

/// A random pose within `ranges`: in-plane heading uniform over the circle.
pub fn random_pose<R: Rng + ?Sized>(model: &SkeletalModel, ranges: &PoseRanges, rng: &mut R) -> Pose {
    let heading = rng.random_range(-PI..PI);
    let tilt = Vec3::new(uniform(rng, (-ranges.tilt, ranges.tilt)), uniform(rng, (-ranges.tilt, ranges.tilt)), 0.0);
    let rotation = RotationMatrix::about_z(heading) * exp_so3(tilt);
    let translation = Vec3::new(
        uniform(rng, (-ranges.lateral, ranges.lateral)),
        uniform(rng, (-ranges.lateral, ranges.lateral)),
        uniform(rng, ranges.depth),
    );
    let mut state = PoseState::from_pose(&model.home_pose());
    state.base = RigidTransform::new(rotation, translation);
    state.scale = uniform(rng, ranges.scale);
    for (j, spec) in model.joints.iter().enumerate().skip(1) {
        let mut w = [0.0; 3];
        for c in spec.dof_mask.indices() {
            let a = ranges.joint_amplitude[c];
            w[c] = uniform(rng, (-a, a));
        }
        state.rotations[j] = Vec3::from_array(w);
    }
    state.to_pose()
}

/// One rendered example with its annotation.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub pose: Pose,
    pub positions: JointPositions,
    pub image: DepthImage,
}

/// Renders `pose`, adds Gaussian depth noise of `noise_mm` to foreground
/// pixels and rounds depths to whole millimetres.
pub fn render_sample<R: Rng + ?Sized>(
    model: &SkeletalModel,
    pose: &Pose,
    camera: &CameraModel,
    radii: &[f64],
    noise_mm: f64,
    rng: &mut R,
) -> Result<Sample, RenderError> {
    let mut image = render(model, pose, camera, radii)?;
    if noise_mm > 0.0 {
        add_depth_noise(&mut image, noise_mm, rng);
    }
    image.quantize_mm();
    let (_, positions) = model.forward_kinematics(pose)?;
    Ok(Sample { pose: pose.clone(), positions, image })
}

/// Adds N(0, σ²) to every foreground depth.
pub fn add_depth_noise<R: Rng + ?Sized>(image: &mut DepthImage, sigma: f64, rng: &mut R) {
    for d in image.window_mut() {
        if *d < crate::camera::BACKGROUND_MM {
            let n: f64 = rng.sample(StandardNormal);
            *d += sigma * n;
        }
    }
}

/// Sample `index` of the synthetic set generated from `seed`. Poses that
/// cannot be rendered are redrawn from a fresh sub-stream.
pub fn synth_sample(
    model: &SkeletalModel,
    ranges: &PoseRanges,
    camera: &CameraModel,
    noise_mm: f64,
    seed: u64,
    index: u64,
) -> Sample {
    for attempt in 0.. {
        let mut rng = stream(seed, "synth-sample", &[index, attempt]);
        let pose = random_pose(model, ranges, &mut rng);
        if let Ok(s) = render_sample(model, &pose, camera, &ranges.radii, noise_mm, &mut rng) {
            if s.image.foreground_count() > 0 {
                return s;
            }
        }
    }
    unreachable!()
}

/// Largest heading change of [`smooth_sequence`] per frame, rad.
pub const MAX_TURN: f64 = 0.12;

/// A smooth random trajectory: the base advances along its heading with a
/// slowly varying turn rate while the joints oscillate. The base is steered
/// back towards the optical axis when it drifts more than `0.6 · ranges.lateral`
/// away.
pub fn smooth_sequence<R: Rng + ?Sized>(
    model: &SkeletalModel,
    ranges: &PoseRanges,
    frames: usize,
    speed: f64,
    rng: &mut R,
) -> Vec<Pose> {
    let mut heading: f64 = rng.random_range(-PI..PI);
    let mut pos = Vec3::new(
        uniform(rng, (-ranges.lateral * 0.5, ranges.lateral * 0.5)),
        uniform(rng, (-ranges.lateral * 0.5, ranges.lateral * 0.5)),
        uniform(rng, ranges.depth),
    );
    let joints = model.joint_count();
    let phases: Vec<[f64; 3]> = (0..joints).map(|_| [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI), 0.0]).collect();
    let freq = rng.random_range(0.1..0.25);
    let mut turn = 0.0;
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        let mut state = PoseState::from_pose(&model.home_pose());
        // the body axis is +y, so heading 0 moves along +y
        state.base = RigidTransform::new(RotationMatrix::about_z(heading), pos);
        for (j, spec) in model.joints.iter().enumerate().skip(1) {
            let mut w = [0.0; 3];
            for c in spec.dof_mask.indices() {
                let a = ranges.joint_amplitude[c] * 0.7;
                w[c] = a * crate::math::sin(freq * t as f64 * 2.0 * PI * 0.25 + phases[j][c.min(1)] + j as f64 * 0.3);
            }
            state.rotations[j] = Vec3::from_array(w);
        }
        out.push(state.to_pose());

        let n: f64 = rng.sample(StandardNormal);
        turn = 0.9 * turn + 0.02 * n;
        let radial = Vec3::new(pos.x, pos.y, 0.0);
        if radial.norm() > 0.6 * ranges.lateral {
            // steer towards the centre
            let want = crate::math::atan2(radial.x, -radial.y);
            let mut d = want - heading;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            turn += 0.3 * ((0.5 * d).clamp(-MAX_TURN, MAX_TURN) - turn);
        }
        turn = turn.clamp(-MAX_TURN, MAX_TURN);
        heading += turn;
        let dir = RotationMatrix::about_z(heading).rotate(Vec3::new(0.0, 1.0, 0.0));
        pos += dir * speed;
        let dz: f64 = rng.sample(StandardNormal);
        pos.z = (pos.z + dz * 0.5).clamp(ranges.depth.0, ranges.depth.1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::BACKGROUND_MM;

    #[test]
    fn preprocess_single_pixel() {
        let cam = CameraModel::PRESET;
        let img = DepthImage::from_window(640, 480, 100, 50, 1, 1, alloc::vec![400.0]);
        let (cloud, base) = preprocess(&img, &cam).unwrap();
        assert_eq!(cloud.points.len(), 1);
        assert!(base.distance(cam.back_project(100.0, 50.0, 400.0)) < 1e-12);
    }

    #[test]
    fn preprocess_symmetric_pair() {
        let cam = CameraModel::PRESET;
        let img = DepthImage::from_window(640, 480, 310, 240, 21, 1, {
            let mut d = alloc::vec![BACKGROUND_MM; 21];
            d[0] = 300.0;
            d[20] = 300.0;
            d
        });
        let (_, base) = preprocess(&img, &cam).unwrap();
        assert!(base.distance(Vec3::new(0.0, 0.0, 300.0)) < 1e-12);
    }

    #[test]
    fn preprocess_empty() {
        assert_eq!(
            preprocess(&DepthImage::empty(640, 480), &CameraModel::PRESET).unwrap_err(),
            PreprocessError::EmptyForeground
        );
    }

    #[test]
    fn degenerate_initial_pose_is_home_at_base() {
        let m = SkeletalModel::fish();
        let base = Vec3::new(3.0, -2.0, 200.0);
        let cfg = InitialPoseConfig { count: 1, rotation_range: (0.0, 0.0), scale_range: (1.0, 1.0) };
        let poses = generate_initial_poses(&m, base, &cfg, &mut stream(0, "t", &[]));
        let (_, p) = m.forward_kinematics(&poses[0]).unwrap();
        for (a, h) in p.0.iter().zip(m.home_positions()) {
            assert!(a.distance(h + base) < 1e-12);
        }
    }

    #[test]
    fn initial_pose_base_lands_on_base() {
        let m = SkeletalModel::mouse();
        let base = Vec3::new(30.0, -20.0, 600.0);
        let poses = generate_initial_poses(&m, base, &InitialPoseConfig::new(40), &mut stream(1, "t", &[]));
        assert_eq!(poses.len(), 40);
        for p in &poses {
            let (g, _) = m.forward_kinematics(p).unwrap();
            assert!(g[0].translation.distance(base) < 1e-9);
            assert!((0.9..1.1).contains(&p.scale));
        }
    }

    #[test]
    fn synth_samples_are_reproducible() {
        let m = SkeletalModel::fish();
        let r = PoseRanges::for_model(&m);
        let a = synth_sample(&m, &r, &CameraModel::PRESET, 0.5, 9, 3);
        let b = synth_sample(&m, &r, &CameraModel::PRESET, 0.5, 9, 3);
        assert_eq!(a, b);
        assert!(a.image.foreground_count() > 100);
    }
}
