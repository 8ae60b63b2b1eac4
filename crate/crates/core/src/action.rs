//! Action recognition over pose sequences.
//!
//! Sequences are resampled to [`NORMALIZED_LEN`] frames, turned into one
//! descriptor per frame, and pooled over a {4, 2, 1} temporal pyramid into
//! per-segment means and standard deviations. A classification forest with
//! axis-aligned tests labels the pooled vector.
//!
//! Tangent descriptors, per frame `t` (frame 0 uses zero increments):
//! * full: the base twist `log G_0` (6), the base increment
//!   `log(G_0(t−1)⁻¹ G_0(t))` (6), then for every other joint its
//!   parent-relative twist `log(G_p⁻¹ G_j)` (6) and its own increment (6);
//!   `12·J` values in all.
//! * compact: the base increment (6), the mean parent-relative twist over
//!   joints 1..=9 (6) and over joints 10.. (6); 18 values.
//!
//! The joint-position baseline uses the `3·J` joint coordinates per frame
//! and appends the first frame's base twist after the pyramid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::forest::{train_forest, EnergyMode, Forest, ForestKind, Probe, TrainConfig, TrainStats, TrainingSet};
use crate::kinematics::{KinematicsError, Pose, PoseState, SkeletalModel};
use crate::lie::{exp_se3, log_se3_any, RigidTransform, RotationMatrix, TwistVector, Vec3};
use crate::math;

/// Frames per normalized sequence.
pub const NORMALIZED_LEN: usize = 32;
/// Pyramid segments: four of 8 frames, two of 16, one of 32.
pub const PYRAMID_SEGMENTS: usize = 7;

/// The fish action catalogue.
pub const FISH_ACTIONS: [&str; 9] = ["Scoot", "J-turn", "C-turn", "R-turn", "Surface", "Dive", "Zigzag", "Thrash", "Freeze"];
/// Classes of [`motion_sequence`].
pub const MOTION_CLASSES: [&str; 4] = ["straight", "left-turn", "right-turn", "freeze"];

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActionClass {
    pub id: u32,
    pub name: String,
}

impl ActionClass {
    pub fn fish_catalogue() -> Vec<ActionClass> {
        catalogue(&FISH_ACTIONS)
    }

    pub fn motion_catalogue() -> Vec<ActionClass> {
        catalogue(&MOTION_CLASSES)
    }
}

fn catalogue(names: &[&str]) -> Vec<ActionClass> {
    names.iter().enumerate().map(|(i, n)| ActionClass { id: i as u32, name: String::from(*n) }).collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoseSequence {
    pub poses: Vec<Pose>,
    pub timestamps: Vec<f64>,
    pub label: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionError {
    /// Fewer than two frames.
    TooShort { frames: usize },
    /// Timestamps are not strictly increasing or their count differs from
    /// the pose count.
    BadTimestamps,
    /// Feature extraction needs exactly [`NORMALIZED_LEN`] frames.
    NotNormalized { frames: usize },
    DimensionMismatch { expected: usize, found: usize },
    /// Training labels out of range or training set empty.
    BadLabels,
    Kinematics(KinematicsError),
}

impl fmt::Display for ActionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionError::TooShort { frames } => write!(f, "sequence has {frames} frames, need at least 2"),
            ActionError::BadTimestamps => f.write_str("timestamps must be strictly increasing, one per pose"),
            ActionError::NotNormalized { frames } => write!(f, "sequence has {frames} frames, expected {NORMALIZED_LEN}"),
            ActionError::DimensionMismatch { expected, found } => write!(f, "feature length {found}, expected {expected}"),
            ActionError::BadLabels => f.write_str("training labels missing or out of range"),
            ActionError::Kinematics(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ActionError {}

impl From<KinematicsError> for ActionError {
    fn from(e: KinematicsError) -> Self {
        ActionError::Kinematics(e)
    }
}

/// `a · exp(s · log(a⁻¹ b))`.
fn interpolate_base(a: &RigidTransform, b: &RigidTransform, s: f64) -> RigidTransform {
    *a * exp_se3(log_se3_any(&(a.inverse() * *b)).scale(s))
}

/// Resamples to `target_len` frames evenly spaced in time. Frames whose
/// time coincides with an input frame are copied from it.
pub fn normalize_sequence(seq: &PoseSequence, target_len: usize) -> Result<PoseSequence, ActionError> {
    let n = seq.poses.len();
    if n < 2 {
        return Err(ActionError::TooShort { frames: n });
    }
    if seq.timestamps.len() != n || seq.timestamps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ActionError::BadTimestamps);
    }
    let (t0, t1) = (seq.timestamps[0], seq.timestamps[n - 1]);
    let mut poses = Vec::with_capacity(target_len);
    let mut timestamps = Vec::with_capacity(target_len);
    let mut seg = 0usize;
    for k in 0..target_len {
        let t = if k + 1 == target_len && target_len > 1 {
            t1
        } else if target_len == 1 {
            t0
        } else {
            t0 + (t1 - t0) * k as f64 / (target_len - 1) as f64
        };
        while seg + 2 < n && seq.timestamps[seg + 1] <= t {
            seg += 1;
        }
        let (ta, tb) = (seq.timestamps[seg], seq.timestamps[seg + 1]);
        let pose = if t == ta {
            seq.poses[seg].clone()
        } else if t == tb {
            seq.poses[seg + 1].clone()
        } else {
            let s = (t - ta) / (tb - ta);
            let (pa, pb) = (&seq.poses[seg], &seq.poses[seg + 1]);
            let mut twists: Vec<TwistVector> = pa
                .twists
                .iter()
                .zip(&pb.twists)
                .map(|(a, b)| TwistVector::from_array(core::array::from_fn(|i| a.to_array()[i] * (1.0 - s) + b.to_array()[i] * s)))
                .collect();
            if let (Some(first), Some(a), Some(b)) = (twists.first_mut(), pa.twists.first(), pb.twists.first()) {
                *first = log_se3_any(&interpolate_base(&exp_se3(*a), &exp_se3(*b), s));
            }
            Pose { twists, scale: pa.scale * (1.0 - s) + pb.scale * s }
        };
        poses.push(pose);
        timestamps.push(t);
    }
    Ok(PoseSequence { poses, timestamps, label: seq.label })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FeatureMode {
    Tangent,
    JointPosition,
}

/// Per-frame descriptor length.
pub fn frame_dim(joints: usize, mode: FeatureMode, compact: bool) -> usize {
    match (mode, compact) {
        (FeatureMode::Tangent, true) => 18,
        (FeatureMode::Tangent, false) => 12 * joints,
        (FeatureMode::JointPosition, _) => 3 * joints,
    }
}

/// Length of the pooled feature vector.
pub fn feature_len(joints: usize, mode: FeatureMode, compact: bool) -> usize {
    let pooled = PYRAMID_SEGMENTS * 2 * frame_dim(joints, mode, compact);
    match mode {
        FeatureMode::Tangent => pooled,
        FeatureMode::JointPosition => pooled + 6,
    }
}

fn push_twist(out: &mut Vec<f64>, xi: TwistVector) {
    out.extend_from_slice(&xi.to_array());
}

fn mean_twist(xs: &[TwistVector]) -> TwistVector {
    let mut acc = [0.0; 6];
    for x in xs {
        for (a, v) in acc.iter_mut().zip(x.to_array()) {
            *a += v;
        }
    }
    let k = if xs.is_empty() { 0.0 } else { 1.0 / xs.len() as f64 };
    TwistVector::from_array(acc.map(|a| a * k))
}

/// One descriptor per frame, concatenated.
pub fn frame_descriptors(model: &SkeletalModel, seq: &PoseSequence, mode: FeatureMode, compact: bool) -> Result<Vec<f64>, ActionError> {
    let joints = model.joint_count();
    let transforms: Vec<Vec<RigidTransform>> = seq
        .poses
        .iter()
        .map(|p| {
            model.check_pose(p)?;
            Ok(PoseState::from_pose(p).transforms(model))
        })
        .collect::<Result<_, KinematicsError>>()?;
    let dim = frame_dim(joints, mode, compact);
    let mut out = Vec::with_capacity(dim * transforms.len());
    for (t, g) in transforms.iter().enumerate() {
        let start = out.len();
        let step = |j: usize| if t == 0 { TwistVector::ZERO } else { log_se3_any(&(transforms[t - 1][j].inverse() * g[j])) };
        let relative = |j: usize| match model.joints[j].parent {
            Some(p) => log_se3_any(&(g[p].inverse() * g[j])),
            None => TwistVector::ZERO,
        };
        match (mode, compact) {
            (FeatureMode::Tangent, true) => {
                push_twist(&mut out, step(0));
                let rel: Vec<TwistVector> = (1..joints).map(relative).collect();
                let split = rel.len().min(9);
                push_twist(&mut out, mean_twist(&rel[..split]));
                push_twist(&mut out, mean_twist(&rel[split..]));
            }
            (FeatureMode::Tangent, false) => {
                push_twist(&mut out, log_se3_any(&g[0]));
                push_twist(&mut out, step(0));
                for j in 1..joints {
                    push_twist(&mut out, relative(j));
                    push_twist(&mut out, step(j));
                }
            }
            (FeatureMode::JointPosition, _) => {
                for x in g {
                    out.extend_from_slice(&x.translation.to_array());
                }
            }
        }
        debug_assert_eq!(out.len() - start, dim);
    }
    Ok(out)
}

/// Frame ranges of the pyramid segments of an `n`-frame sequence.
pub fn pyramid_segments(n: usize) -> [(usize, usize); PYRAMID_SEGMENTS] {
    let mut out = [(0, 0); PYRAMID_SEGMENTS];
    let mut i = 0;
    for parts in [4usize, 2, 1] {
        for p in 0..parts {
            out[i] = (n * p / parts, n * (p + 1) / parts);
            i += 1;
        }
    }
    out
}

/// Per segment: the coordinate means followed by the coordinate standard
/// deviations (`n − 1` denominator, 0 for single-frame segments).
pub fn pyramid_pool(frames: &[f64], dim: usize) -> Vec<f64> {
    let n = if dim == 0 { 0 } else { frames.len() / dim };
    let mut out = Vec::with_capacity(PYRAMID_SEGMENTS * 2 * dim);
    for (a, b) in pyramid_segments(n) {
        let len = b - a;
        let mut mean = vec![0.0; dim];
        for f in a..b {
            for (m, v) in mean.iter_mut().zip(&frames[f * dim..(f + 1) * dim]) {
                *m += v;
            }
        }
        if len > 0 {
            mean.iter_mut().for_each(|m| *m /= len as f64);
        }
        let mut var = vec![0.0; dim];
        for f in a..b {
            for ((s, v), m) in var.iter_mut().zip(&frames[f * dim..(f + 1) * dim]).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        out.extend_from_slice(&mean);
        out.extend(var.iter().map(|s| if len > 1 { math::sqrt(s / (len - 1) as f64) } else { 0.0 }));
    }
    out
}

/// Pooled feature vector of a normalized sequence.
pub fn extract_features(model: &SkeletalModel, seq: &PoseSequence, mode: FeatureMode, compact: bool) -> Result<Vec<f64>, ActionError> {
    if seq.poses.len() != NORMALIZED_LEN {
        return Err(ActionError::NotNormalized { frames: seq.poses.len() });
    }
    let joints = model.joint_count();
    let dim = frame_dim(joints, mode, compact);
    let frames = frame_descriptors(model, seq, mode, compact)?;
    let mut out = pyramid_pool(&frames, dim);
    if mode == FeatureMode::JointPosition {
        push_twist(&mut out, log_se3_any(&exp_se3(seq.poses[0].twists[0])));
    }
    assert_eq!(out.len(), feature_len(joints, mode, compact));
    Ok(out)
}

/// Forest settings for action classifiers: 50 trees of depth 20, 32
/// candidate coordinates per node, nodes of fewer than 2 examples are
/// leaves.
pub fn action_train_config() -> TrainConfig {
    TrainConfig {
        n_trees: 50,
        max_depth: 20,
        features_per_node: 32,
        thresholds: 20,
        min_examples: 2,
        energy: EnergyMode::Variance,
        bootstrap: true,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionClassifier {
    pub forest: Forest,
    pub feature_len: usize,
    pub mode: FeatureMode,
    pub compact: bool,
}

struct FeatureSet<'a> {
    features: &'a [Vec<f64>],
    onehot: Vec<f64>,
    classes: usize,
}

impl TrainingSet for FeatureSet<'_> {
    fn len(&self) -> usize {
        self.features.len()
    }
    fn label_dim(&self) -> usize {
        self.classes
    }
    fn label(&self, i: usize) -> &[f64] {
        &self.onehot[i * self.classes..(i + 1) * self.classes]
    }
    fn feature(&self, i: usize, probe: &Probe) -> f64 {
        match probe {
            Probe::Axis { index } => self.features[i][*index as usize],
            _ => 0.0,
        }
    }
}

/// Trains a classifier on pooled features with labels in `0..classes`.
pub fn train_action(
    features: &[Vec<f64>],
    labels: &[u32],
    classes: usize,
    mode: FeatureMode,
    compact: bool,
    config: &TrainConfig,
    seed: u64,
) -> Result<(ActionClassifier, TrainStats), ActionError> {
    if features.is_empty() || features.len() != labels.len() || classes == 0 || labels.iter().any(|&l| l as usize >= classes) {
        return Err(ActionError::BadLabels);
    }
    let len = features[0].len();
    if let Some(f) = features.iter().find(|f| f.len() != len) {
        return Err(ActionError::DimensionMismatch { expected: len, found: f.len() });
    }
    let mut onehot = vec![0.0; features.len() * classes];
    for (i, &l) in labels.iter().enumerate() {
        onehot[i * classes + l as usize] = 1.0;
    }
    let set = FeatureSet { features, onehot, classes };
    let sampler = move |rng: &mut crate::rng::StreamRng| Probe::Axis { index: rng.random_range(0..len as u32) };
    let (forest, stats) = train_forest(ForestKind::ActionClassifier, config, &set, &sampler, seed);
    Ok((ActionClassifier { forest, feature_len: len, mode, compact }, stats))
}

impl ActionClassifier {
    /// Predicted class id and the averaged class histogram.
    pub fn classify(&self, features: &[f64]) -> Result<(u32, Vec<f64>), ActionError> {
        if features.len() != self.feature_len {
            return Err(ActionError::DimensionMismatch { expected: self.feature_len, found: features.len() });
        }
        let (c, hist) = self.forest.predict_class(|p| match p {
            Probe::Axis { index } => features[*index as usize],
            _ => 0.0,
        });
        Ok((c as u32, hist))
    }
}

/// `m[truth][predicted]` counts.
pub fn confusion_matrix(truth: &[u32], predicted: &[u32], classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; classes]; classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if (t as usize) < classes && (p as usize) < classes {
            m[t as usize][p as usize] += 1;
        }
    }
    m
}

/// Fraction of matching labels.
pub fn accuracy(truth: &[u32], predicted: &[u32]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    truth.iter().zip(predicted).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// A noisy swimming sequence of `class` (an index into
/// [`MOTION_CLASSES`]) for a single-chain yaw model such as the fish:
/// 24 to 64 frames, unit time steps, random start heading and position.
pub fn motion_sequence<R: Rng + ?Sized>(model: &SkeletalModel, class: u32, rng: &mut R) -> PoseSequence {
    let frames = rng.random_range(24..=64usize);
    let (speed, turn, amplitude, bend) = match class {
        0 => (rng.random_range(0.8..2.0), 0.0, 0.10, 0.0),
        1 => (rng.random_range(0.8..2.0), rng.random_range(0.02..0.06), 0.10, 0.04),
        2 => (rng.random_range(0.8..2.0), -rng.random_range(0.02..0.06), 0.10, -0.04),
        _ => (rng.random_range(0.0..0.1), 0.0, 0.02, 0.0),
    };
    let mut heading = rng.random_range(-PI..PI);
    let mut pos = Vec3::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0), rng.random_range(180.0..220.0));
    let freq = rng.random_range(0.5..1.0);
    let phase = rng.random_range(0.0..2.0 * PI);
    let mut poses = Vec::with_capacity(frames);
    let mut timestamps = Vec::with_capacity(frames);
    for t in 0..frames {
        let mut state = PoseState::from_pose(&model.home_pose());
        state.base = RigidTransform::new(RotationMatrix::about_z(heading), pos);
        for (j, spec) in model.joints.iter().enumerate().skip(1) {
            if spec.dof_mask.contains(2) {
                let wave = amplitude * (j as f64 / model.joint_count() as f64) * math::sin(freq * t as f64 + phase - 0.4 * j as f64);
                let n: f64 = rng.sample(StandardNormal);
                state.rotations[j] = Vec3::new(0.0, 0.0, wave - bend + 0.01 * n);
            }
        }
        poses.push(state.to_pose());
        timestamps.push(t as f64);

        let n: [f64; 4] = core::array::from_fn(|_| rng.sample(StandardNormal));
        heading += turn + 0.005 * n[0];
        // the head leads along −y of the body frame
        let dir = RotationMatrix::about_z(heading).rotate(Vec3::new(0.0, -1.0, 0.0));
        pos += dir * speed + Vec3::new(n[1], n[2], n[3]) * 0.1;
    }
    PoseSequence { poses, timestamps, label: Some(class) }
}
