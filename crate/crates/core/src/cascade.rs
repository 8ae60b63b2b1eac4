//! The per-joint regressor cascade, the learned error metric and
//! multi-hypothesis pose estimation.
//!
//! Joints are refined in order. Joint `j` gets `C` regressors; each one
//! reads pose-indexed depth features around the current `G_j` and predicts
//! a twist `r` that is right-multiplied onto it. Training follows the same
//! order: the regressor for `(j, c)` is fitted to the residual twists
//! `log(G̃_j⁻¹ G_j)` of the training states and then immediately applied to
//! them before `(j, c + 1)` is trained.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::camera::{pose_indexed_feature, probe_depth, CameraModel, DepthImage};
use crate::eval::average_joint_error;
use crate::forest::{train_forest, train_forest_with_bags, Forest, ForestKind, Probe, TrainConfig, TrainStats, TrainingSet};
use crate::kinematics::{JointPositions, Pose, PoseState, SkeletalModel};
use crate::lie::{exp_se3, log_se3, RigidTransform, TwistVector, Vec3};
use crate::rng::{derive_seed, stream, StreamRng};
use crate::math;
use crate::synth::{generate_initial_poses, preprocess, InitialPoseConfig, PreprocessError, Sample};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Gaussian pose perturbations used to build metric training examples.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerturbationConfig {
    /// σ of the in-plane base rotation, rad.
    pub base_rotation: f64,
    /// σ of each base translation coordinate, mm.
    pub base_translation: f64,
    /// σ of every non-base DoF coordinate, rad.
    pub joint: f64,
    /// Uniform scale range of perturbed poses.
    pub scale: (f64, f64),
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig { base_rotation: 0.3, base_translation: 10.0, joint: 0.15, scale: (0.9, 1.1) }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CascadeConfig {
    /// Regressors per joint (`C`).
    pub rounds: usize,
    /// Initial poses at test time (`K_t`) and their ranges.
    pub initial: InitialPoseConfig,
    /// Initial poses per training image.
    pub training_poses: usize,
    /// Half-width of the cube the regressor probe offsets are drawn from, mm.
    pub patch_mm: f64,
    /// Half-width of the metric probe cube, mm.
    pub metric_patch_mm: f64,
    pub ik: TrainConfig,
    pub metric: TrainConfig,
    /// Perturbed poses per training image for the metric (the first is the
    /// unperturbed ground truth).
    pub metric_poses: usize,
    /// Additional metric examples per image taken from the cascade's own
    /// output on random initial poses (see [`train_metric_with_cascade`]).
    #[cfg_attr(feature = "serde", serde(default))]
    pub metric_refined_poses: usize,
    /// Regress `ln(error + LOG_LABEL_OFFSET_MM)` instead of the error.
    #[cfg_attr(feature = "serde", serde(default))]
    pub metric_log_labels: bool,
    /// Draw half of the metric probes as depth residuals.
    #[cfg_attr(feature = "serde", serde(default))]
    pub metric_residual_probes: bool,
    pub perturbation: PerturbationConfig,
    /// Update training states with trees that did not see the example.
    pub out_of_bag_updates: bool,
}

impl CascadeConfig {
    /// Defaults for a preset (`fish`, `mouse`, anything else is treated as
    /// `hand`).
    pub fn for_preset(name: &str) -> CascadeConfig {
        let (rounds, k, patch, ik, metric) = match name {
            "fish" => (7, 40, 25.0, TrainConfig::new(3, 24), TrainConfig::new(20, 15)),
            "mouse" => (3, 40, 100.0, TrainConfig::new(10, 24), TrainConfig::new(20, 15)),
            _ => (3, 20, 100.0, TrainConfig::new(10, 24), TrainConfig::new(20, 20)),
        };
        CascadeConfig {
            rounds,
            initial: InitialPoseConfig::new(k),
            training_poses: k,
            patch_mm: patch,
            metric_patch_mm: patch * 0.2,
            ik,
            metric,
            metric_poses: 8,
            metric_refined_poses: 8,
            metric_log_labels: false,
            metric_residual_probes: true,
            perturbation: PerturbationConfig::default(),
            out_of_bag_updates: false,
        }
    }
}

/// Counters gathered while training.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Examples whose label hit the logarithm's π branch and were dropped.
    pub dropped_labels: usize,
    pub ik_examples: usize,
    pub ik_forests: TrainStats,
    pub metric_examples: usize,
    pub metric_forest: TrainStats,
    /// Mean joint error of the training states after each joint's last
    /// round, in joint order.
    pub training_error: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CascadeError {
    Preprocess(PreprocessError),
    /// No training images.
    EmptyDataset,
    /// Regressor grid does not match the model and round count.
    Shape,
}

impl fmt::Display for CascadeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CascadeError::Preprocess(e) => write!(f, "{e}"),
            CascadeError::EmptyDataset => f.write_str("training set is empty"),
            CascadeError::Shape => f.write_str("regressor grid does not match the model"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CascadeError {}

impl From<PreprocessError> for CascadeError {
    fn from(e: PreprocessError) -> Self {
        CascadeError::Preprocess(e)
    }
}

/// A trained regressor grid: `regressors[j][c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cascade {
    pub model: SkeletalModel,
    pub camera: CameraModel,
    pub config: CascadeConfig,
    pub regressors: Vec<Vec<Forest>>,
}

/// Forest predicting the average joint error (mm) of a pose hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedMetric {
    pub forest: Forest,
    pub perturbations: usize,
    /// The forest predicts log errors.
    pub log_labels: bool,
}

/// Keeps log-error labels finite for exact poses, mm.
pub const LOG_LABEL_OFFSET_MM: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct PoseEstimate {
    pub pose: Pose,
    pub positions: JointPositions,
    pub predicted_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    pub best: PoseEstimate,
    pub best_index: usize,
    /// Every refined hypothesis, in initial-pose order.
    pub candidates: Vec<PoseEstimate>,
}

/// A pose hypothesis with its cumulative joint transforms kept current.
#[derive(Clone, Debug)]
struct Hypothesis {
    state: PoseState,
    transforms: Vec<RigidTransform>,
}

impl Hypothesis {
    fn new(model: &SkeletalModel, pose: &Pose) -> Hypothesis {
        let state = PoseState::from_pose(pose);
        let transforms = state.transforms(model);
        Hypothesis { state, transforms }
    }

    fn refresh(&mut self, model: &SkeletalModel, j: usize) {
        self.transforms[j] = self.state.joint_transform(model, j, &self.transforms);
    }
}

#[inline]
fn depth_probe(image: &DepthImage, camera: &CameraModel, g: &RigidTransform, probe: &Probe) -> f64 {
    match probe {
        Probe::Depth { u, v } => pose_indexed_feature(image, camera, g, g.translation, *u, *v),
        _ => 0.0,
    }
}

#[inline]
fn joint_probe(image: &DepthImage, camera: &CameraModel, transforms: &[RigidTransform], probe: &Probe) -> f64 {
    match probe {
        Probe::Joint { joint, u, v } => {
            let g = &transforms[*joint as usize];
            pose_indexed_feature(image, camera, g, g.translation, *u, *v)
        }
        Probe::Residual { joint, u } => {
            let g = &transforms[*joint as usize];
            probe_depth(image, camera, g, g.translation, *u) - (g.translation + g.rotation.rotate(*u)).z
        }
        _ => 0.0,
    }
}

fn cube(rng: &mut StreamRng, half: f64) -> Vec3 {
    Vec3::new(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))
}

struct IkSet<'a> {
    images: &'a [&'a DepthImage],
    camera: &'a CameraModel,
    /// (image index, current G_j)
    contexts: Vec<(usize, RigidTransform)>,
    labels: Vec<f64>,
}

impl TrainingSet for IkSet<'_> {
    fn len(&self) -> usize {
        self.contexts.len()
    }
    fn label_dim(&self) -> usize {
        6
    }
    fn label(&self, i: usize) -> &[f64] {
        &self.labels[6 * i..6 * i + 6]
    }
    #[inline]
    fn feature(&self, i: usize, probe: &Probe) -> f64 {
        let (img, g) = &self.contexts[i];
        depth_probe(self.images[*img], self.camera, g, probe)
    }
}

struct MetricSet<'a> {
    images: &'a [&'a DepthImage],
    camera: &'a CameraModel,
    contexts: Vec<(usize, Vec<RigidTransform>)>,
    labels: Vec<f64>,
}

impl TrainingSet for MetricSet<'_> {
    fn len(&self) -> usize {
        self.contexts.len()
    }
    fn label_dim(&self) -> usize {
        1
    }
    fn label(&self, i: usize) -> &[f64] {
        &self.labels[i..i + 1]
    }
    #[inline]
    fn feature(&self, i: usize, probe: &Probe) -> f64 {
        let (img, g) = &self.contexts[i];
        joint_probe(self.images[*img], self.camera, g, probe)
    }
}

fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Joints in the order estimation visits them.
fn visit_order(model: &SkeletalModel) -> Vec<usize> {
    model.subchains_for_estimation().stages.concat()
}

/// Trains the regressor cascade on `dataset`.
pub fn train_cascade(
    dataset: &[Sample],
    model: &SkeletalModel,
    camera: &CameraModel,
    config: &CascadeConfig,
    seed: u64,
) -> Result<(Cascade, TrainReport), CascadeError> {
    if dataset.is_empty() {
        return Err(CascadeError::EmptyDataset);
    }
    let images: Vec<&DepthImage> = dataset.iter().map(|s| &s.image).collect();
    let truths: Vec<Vec<RigidTransform>> = dataset
        .iter()
        .map(|s| PoseState::from_pose(&s.pose).transforms(model))
        .collect();
    let init_cfg = InitialPoseConfig { count: config.training_poses, ..config.initial };
    let mut owners = Vec::new();
    let mut hyps = Vec::new();
    for (i, s) in dataset.iter().enumerate() {
        let (_, base) = preprocess(&s.image, camera)?;
        let mut rng = stream(seed, "train-initial", &[i as u64]);
        for pose in generate_initial_poses(model, base, &init_cfg, &mut rng) {
            owners.push(i);
            hyps.push(Hypothesis::new(model, &pose));
        }
    }

    let mut report = TrainReport::default();
    let mut regressors: Vec<Vec<Forest>> = model
        .joints
        .iter()
        .map(|_| vec![Forest::constant(ForestKind::IkRegressor, config.ik, vec![0.0; 6]); config.rounds])
        .collect();
    let probe_half = config.patch_mm;
    let sampler = move |rng: &mut StreamRng| Probe::Depth { u: cube(rng, probe_half), v: cube(rng, probe_half) };

    for j in visit_order(model) {
        for h in hyps.iter_mut() {
            h.refresh(model, j);
        }
        let mask = model.joints[j].dof_mask;
        if mask.is_empty() {
            continue;
        }
        for c in 0..config.rounds {
            // residual labels; examples on the logarithm's π branch are dropped
            let mut set = IkSet { images: &images, camera, contexts: Vec::new(), labels: Vec::new() };
            let mut example_of = vec![usize::MAX; hyps.len()];
            for (k, h) in hyps.iter().enumerate() {
                let g = h.transforms[j];
                match log_se3(&(g.inverse() * truths[owners[k]][j])) {
                    Ok(xi) => {
                        example_of[k] = set.contexts.len();
                        set.contexts.push((owners[k], g));
                        set.labels.extend_from_slice(&mask.apply(xi).to_array());
                    }
                    Err(_) => report.dropped_labels += 1,
                }
            }
            report.ik_examples += set.len();
            let forest_seed = derive_seed(seed, "ik-forest", &[j as u64, c as u64]);
            let (forest, stats, bags) = train_forest_with_bags(ForestKind::IkRegressor, &config.ik, &set, &sampler, forest_seed);
            merge_stats(&mut report.ik_forests, &stats);
            let oob = config.out_of_bag_updates;
            let updates: Vec<TwistVector> = map_indexed(hyps.len(), |k| {
                let g = hyps[k].transforms[j];
                let image = images[owners[k]];
                let e = example_of[k];
                let eval = |p: &Probe| depth_probe(image, camera, &g, p);
                let r = if oob && e != usize::MAX {
                    forest.predict_regression_subset(|t| !bags[t][e], eval)
                } else {
                    forest.predict_regression(eval)
                };
                TwistVector::from_array([r[0], r[1], r[2], r[3], r[4], r[5]])
            });
            for (h, r) in hyps.iter_mut().zip(updates) {
                h.state.update_joint(model, j, r);
                h.refresh(model, j);
            }
            regressors[j][c] = forest;
        }
        let err: f64 = hyps
            .iter()
            .zip(&owners)
            .map(|(h, &i)| h.transforms[j].translation.distance(truths[i][j].translation))
            .sum::<f64>()
            / hyps.len() as f64;
        report.training_error.push(err);
    }
    Ok((Cascade { model: model.clone(), camera: *camera, config: config.clone(), regressors }, report))
}

fn merge_stats(acc: &mut TrainStats, s: &TrainStats) {
    acc.nodes += s.nodes;
    acc.leaves += s.leaves;
    acc.degenerate_nodes += s.degenerate_nodes;
    acc.max_depth = acc.max_depth.max(s.max_depth);
}

/// `pose` with its base right-multiplied by a random twist and every
/// non-base DoF coordinate jittered.
pub fn perturb_pose<R: Rng + ?Sized>(model: &SkeletalModel, pose: &Pose, p: &PerturbationConfig, rng: &mut R) -> Pose {
    let mut state = PoseState::from_pose(pose);
    let mut n = || -> f64 { rng.sample(StandardNormal) };
    let xi = TwistVector::new(
        Vec3::new(0.0, 0.0, p.base_rotation * n()),
        Vec3::new(p.base_translation * n(), p.base_translation * n(), p.base_translation * n()),
    );
    state.base = state.base * exp_se3(xi);
    for (j, spec) in model.joints.iter().enumerate().skip(1) {
        for c in spec.dof_mask.indices() {
            let w = &mut state.rotations[j];
            let d = p.joint * n();
            match c {
                0 => w.x += d,
                1 => w.y += d,
                _ => w.z += d,
            }
        }
    }
    let (lo, hi) = p.scale;
    if hi > lo {
        state.scale = rng.random_range(lo..hi);
    }
    state.to_pose()
}

/// Trains the error metric on perturbed copies of the ground truth.
pub fn train_metric(
    dataset: &[Sample],
    model: &SkeletalModel,
    camera: &CameraModel,
    config: &CascadeConfig,
    seed: u64,
) -> Result<(LearnedMetric, TrainStats), CascadeError> {
    metric_from(dataset, model, camera, config, None, seed)
}

/// [`train_metric`] plus `config.metric_refined_poses` hypotheses per image
/// obtained by running `cascade` from random initial poses, labelled with
/// their true error.
pub fn train_metric_with_cascade(
    dataset: &[Sample],
    cascade: &Cascade,
    config: &CascadeConfig,
    seed: u64,
) -> Result<(LearnedMetric, TrainStats), CascadeError> {
    metric_from(dataset, &cascade.model, &cascade.camera, config, Some(cascade), seed)
}

fn metric_from(
    dataset: &[Sample],
    model: &SkeletalModel,
    camera: &CameraModel,
    config: &CascadeConfig,
    cascade: Option<&Cascade>,
    seed: u64,
) -> Result<(LearnedMetric, TrainStats), CascadeError> {
    if dataset.is_empty() {
        return Err(CascadeError::EmptyDataset);
    }
    let images: Vec<&DepthImage> = dataset.iter().map(|s| &s.image).collect();
    let labelled = |g: Vec<RigidTransform>, s: &Sample| {
        let pos = JointPositions(g.iter().map(|t| t.translation).collect());
        let label = average_joint_error(&pos, &s.positions).unwrap_or(0.0);
        (g, if config.metric_log_labels { math::ln(label + LOG_LABEL_OFFSET_MM) } else { label })
    };
    let per_image = map_indexed(dataset.len(), |i| {
        let s = &dataset[i];
        let mut out = Vec::new();
        let mut rng = stream(seed, "metric-perturb", &[i as u64]);
        for k in 0..config.metric_poses {
            let pose = if k == 0 { s.pose.clone() } else { perturb_pose(model, &s.pose, &config.perturbation, &mut rng) };
            out.push(labelled(PoseState::from_pose(&pose).transforms(model), s));
        }
        if let Some(c) = cascade {
            let mut rng = stream(seed, "metric-refined", &[i as u64]);
            if let Ok((_, base)) = preprocess(&s.image, camera) {
                let cfg = InitialPoseConfig { count: config.metric_refined_poses, ..config.initial };
                for pose in generate_initial_poses(model, base, &cfg, &mut rng) {
                    let mut h = Hypothesis::new(model, &pose);
                    c.refine_joints(&s.image, &mut h, &visit_order(model), c.rounds());
                    out.push(labelled(h.transforms, s));
                }
            }
        }
        out
    });
    let mut set = MetricSet { images: &images, camera, contexts: Vec::new(), labels: Vec::new() };
    for (i, examples) in per_image.into_iter().enumerate() {
        for (g, label) in examples {
            set.contexts.push((i, g));
            set.labels.push(label);
        }
    }
    let joints = model.joint_count() as u32;
    let half = config.metric_patch_mm;
    let residuals = config.metric_residual_probes;
    let sampler = move |rng: &mut StreamRng| {
        let joint = rng.random_range(0..joints);
        if residuals && rng.random_bool(0.5) {
            Probe::Residual { joint, u: cube(rng, half) }
        } else {
            Probe::Joint { joint, u: cube(rng, half), v: cube(rng, half) }
        }
    };
    let (forest, stats) = train_forest(ForestKind::Metric, &config.metric, &set, &sampler, derive_seed(seed, "metric-forest", &[]));
    Ok((LearnedMetric { forest, perturbations: config.metric_poses, log_labels: config.metric_log_labels }, stats))
}

impl LearnedMetric {
    /// Predicted average joint error of a hypothesis, mm.
    pub fn score(&self, image: &DepthImage, camera: &CameraModel, transforms: &[RigidTransform]) -> f64 {
        let eval = |p: &Probe| joint_probe(image, camera, transforms, p);
        if self.log_labels {
            (math::exp(self.forest.predict_mean(eval)) - LOG_LABEL_OFFSET_MM).max(0.0)
        } else {
            self.forest.predict_scalar(eval)
        }
    }

    pub fn score_pose(&self, model: &SkeletalModel, image: &DepthImage, camera: &CameraModel, pose: &Pose) -> f64 {
        self.score(image, camera, &PoseState::from_pose(pose).transforms(model))
    }
}

impl Cascade {
    pub fn rounds(&self) -> usize {
        self.config.rounds
    }

    pub fn check_shape(&self) -> Result<(), CascadeError> {
        if self.regressors.len() != self.model.joint_count()
            || self.regressors.iter().any(|r| r.len() != self.config.rounds)
        {
            return Err(CascadeError::Shape);
        }
        Ok(())
    }

    fn refine_joints(&self, image: &DepthImage, h: &mut Hypothesis, joints: &[usize], rounds: usize) {
        self.refine_lockstep(image, core::slice::from_mut(h), joints, rounds);
    }

    /// Refines several hypotheses forest by forest, so that consecutive
    /// traversals share the upper levels of each tree in cache. Each
    /// hypothesis goes through the same steps as when refined alone.
    fn refine_lockstep(&self, image: &DepthImage, hyps: &mut [Hypothesis], joints: &[usize], rounds: usize) {
        for &j in joints {
            for h in hyps.iter_mut() {
                h.refresh(&self.model, j);
            }
            if self.model.joints[j].dof_mask.is_empty() {
                continue;
            }
            for forest in self.regressors[j].iter().take(rounds) {
                let step = |h: &mut Hypothesis| {
                    let g = h.transforms[j];
                    let r = forest.predict_regression(|p| depth_probe(image, &self.camera, &g, p));
                    h.state.update_joint(&self.model, j, TwistVector::from_array([r[0], r[1], r[2], r[3], r[4], r[5]]));
                    h.refresh(&self.model, j);
                };
                #[cfg(feature = "parallel")]
                hyps.par_iter_mut().for_each(step);
                #[cfg(not(feature = "parallel"))]
                hyps.iter_mut().for_each(step);
            }
        }
    }

    /// Runs the first `rounds` regressors of every joint on one hypothesis.
    pub fn refine(&self, image: &DepthImage, pose: &Pose, rounds: usize) -> Pose {
        let mut h = Hypothesis::new(&self.model, pose);
        self.refine_joints(image, &mut h, &visit_order(&self.model), rounds);
        h.state.to_pose()
    }

    /// Re-infers every joint except the base, which is held fixed.
    pub fn refine_from_base(&self, image: &DepthImage, state: &PoseState) -> (PoseState, Vec<RigidTransform>) {
        self.refine_from_base_rounds(image, state, self.config.rounds)
    }

    /// [`Cascade::refine_from_base`] with the first `rounds` regressors.
    pub fn refine_from_base_rounds(&self, image: &DepthImage, state: &PoseState, rounds: usize) -> (PoseState, Vec<RigidTransform>) {
        let mut h = Hypothesis { transforms: state.transforms(&self.model), state: state.clone() };
        let order: Vec<usize> = visit_order(&self.model).into_iter().filter(|&j| j != 0).collect();
        self.refine_joints(image, &mut h, &order, rounds);
        (h.state, h.transforms)
    }

    /// Refines every initial pose, scores each with `metric` and returns the
    /// lowest-scoring one (lowest index on ties).
    pub fn estimate_from(&self, image: &DepthImage, metric: &LearnedMetric, initial: &[Pose], rounds: usize) -> EstimateResult {
        let order = visit_order(&self.model);
        let mut hyps: Vec<Hypothesis> = initial.iter().map(|p| Hypothesis::new(&self.model, p)).collect();
        self.refine_lockstep(image, &mut hyps, &order, rounds);
        let candidates: Vec<PoseEstimate> = map_indexed(hyps.len(), |k| {
            let h = &hyps[k];
            let predicted_error = metric.score(image, &self.camera, &h.transforms);
            PoseEstimate {
                pose: h.state.to_pose(),
                positions: JointPositions(h.transforms.iter().map(|g| g.translation).collect()),
                predicted_error,
            }
        });
        let mut best_index = 0;
        for (k, c) in candidates.iter().enumerate() {
            if c.predicted_error < candidates[best_index].predicted_error {
                best_index = k;
            }
        }
        EstimateResult { best: candidates[best_index].clone(), best_index, candidates }
    }

    /// Full single-image estimation: preprocessing, `k_t` random initial
    /// poses, refinement with all rounds and metric-based selection.
    pub fn estimate<R: Rng + ?Sized>(
        &self,
        image: &DepthImage,
        metric: &LearnedMetric,
        k_t: usize,
        rng: &mut R,
    ) -> Result<EstimateResult, CascadeError> {
        self.estimate_with_rounds(image, metric, k_t, self.config.rounds, rng)
    }

    /// [`Cascade::estimate`] using only the first `rounds` regressors per
    /// joint.
    pub fn estimate_with_rounds<R: Rng + ?Sized>(
        &self,
        image: &DepthImage,
        metric: &LearnedMetric,
        k_t: usize,
        rounds: usize,
        rng: &mut R,
    ) -> Result<EstimateResult, CascadeError> {
        let (_, base) = preprocess(image, &self.camera)?;
        let cfg = InitialPoseConfig { count: k_t.max(1), ..self.config.initial };
        let initial = generate_initial_poses(&self.model, base, &cfg, rng);
        Ok(self.estimate_from(image, metric, &initial, rounds.min(self.config.rounds)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_sample, PoseRanges};

    fn tiny_config() -> CascadeConfig {
        let mut c = CascadeConfig::for_preset("mouse");
        c.rounds = 1;
        c.training_poses = 2;
        c.ik = TrainConfig { features_per_node: 20, ..TrainConfig::new(2, 6) };
        c.metric = TrainConfig { features_per_node: 20, ..TrainConfig::new(2, 6) };
        c
    }

    #[test]
    fn cascade_shape_is_joints_by_rounds() {
        let m = SkeletalModel::mouse();
        let r = PoseRanges::for_model(&m);
        let cam = CameraModel::PRESET;
        let data: Vec<Sample> = (0..6).map(|i| synth_sample(&m, &r, &cam, 0.0, 1, i)).collect();
        let mut cfg = tiny_config();
        cfg.rounds = 2;
        let (cascade, report) = train_cascade(&data, &m, &cam, &cfg, 5).unwrap();
        assert_eq!(cascade.regressors.len(), 5);
        assert!(cascade.regressors.iter().all(|r| r.len() == 2));
        assert!(cascade.check_shape().is_ok());
        assert_eq!(report.training_error.len(), 4);
    }

    #[test]
    fn metric_has_eight_examples_per_image() {
        let m = SkeletalModel::mouse();
        let r = PoseRanges::for_model(&m);
        let cam = CameraModel::PRESET;
        let data: Vec<Sample> = (0..3).map(|i| synth_sample(&m, &r, &cam, 0.0, 2, i)).collect();
        let (metric, _) = train_metric(&data, &m, &cam, &tiny_config(), 3).unwrap();
        let seen: u32 = metric.forest.trees[0].leaves().map(|l| l.count).sum();
        assert_eq!(seen, 24);
    }

    #[test]
    fn empty_dataset_rejected() {
        let m = SkeletalModel::mouse();
        assert_eq!(
            train_cascade(&[], &m, &CameraModel::PRESET, &tiny_config(), 0).unwrap_err(),
            CascadeError::EmptyDataset
        );
    }
}
