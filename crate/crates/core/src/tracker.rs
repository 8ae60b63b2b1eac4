//! Particle-filter tracking.
//!
//! Each step selects particles by inverse-CDF resampling, moves the base
//! joint by a Brownian increment on SE(3), re-infers the remaining joints
//! with the cascade, and weighs every particle by a Gaussian of its
//! predicted error under the learned metric.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::Rng;

use crate::cascade::{Cascade, LearnedMetric};
use crate::camera::DepthImage;
use crate::kinematics::{JointPositions, Pose, PoseState};
use crate::lie::{brownian_step, exp_so3, log_so3_any, BrownianParams, LieError, RigidTransform, TwistVector, Vec3};
use crate::math;

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    /// Particle count `K_r`.
    pub particles: usize,
    /// Width of the weight Gaussian, mm.
    pub sigma: f64,
    /// Brownian motion of the base joint.
    pub brownian: BrownianParams,
    /// Cascade rounds used to re-infer non-base joints; all when `None`.
    pub rounds: Option<usize>,
}

impl TrackerConfig {
    pub fn new(particles: usize, sigma: f64, brownian: BrownianParams) -> Result<Self, TrackerError> {
        if !(sigma > 0.0) {
            return Err(TrackerError::InvalidSigma);
        }
        if particles == 0 {
            return Err(TrackerError::NoParticles);
        }
        Ok(TrackerConfig { particles, sigma, brownian, rounds: None })
    }
}

impl Default for TrackerConfig {
    /// 200 particles, σ = 10 mm, base covariance diag(0.05² ×3, 5² ×3), δ = 1.
    fn default() -> Self {
        let brownian = BrownianParams::diagonal(1.0, [0.0025, 0.0025, 0.0025, 25.0, 25.0, 25.0]).expect("default covariance");
        TrackerConfig { particles: 200, sigma: 10.0, brownian, rounds: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrackerError {
    InvalidSigma,
    NoParticles,
    Lie(LieError),
}

impl fmt::Display for TrackerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackerError::InvalidSigma => f.write_str("sigma must be positive"),
            TrackerError::NoParticles => f.write_str("at least one particle required"),
            TrackerError::Lie(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrackerError {}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub state: PoseState,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub timestep: usize,
}

impl ParticleSet {
    /// `count` copies of `pose` with uniform weights.
    pub fn from_pose(pose: &Pose, count: usize) -> ParticleSet {
        let state = PoseState::from_pose(pose);
        let w = 1.0 / count as f64;
        ParticleSet { particles: vec![Particle { state, weight: w }; count], timestep: 0 }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }
}

/// Weighted-average pose of a particle set.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackEstimate {
    pub pose: Pose,
    /// Weighted mean of the particles' joint positions.
    pub positions: JointPositions,
    /// Weighted mean of the particles' predicted errors, mm.
    pub predicted_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub estimate: TrackEstimate,
    pub next: ParticleSet,
    /// All weights vanished and were reset to uniform.
    pub degenerate_weights: bool,
}

/// `(1/(√(2π) σ)) exp(−m²/(2σ²))`.
pub fn weigh(m: f64, sigma: f64) -> f64 {
    math::exp(-m * m / (2.0 * sigma * sigma)) / (math::sqrt(2.0 * PI) * sigma)
}

/// Scales `weights` to sum to one. Returns `false` (and makes them
/// uniform) when they sum to zero or are not finite.
pub fn normalize(weights: &mut [f64]) -> bool {
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        let u = 1.0 / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = u);
        return false;
    }
    weights.iter_mut().for_each(|w| *w /= sum);
    true
}

/// `count` indices drawn from the categorical distribution `weights` by
/// inverting its CDF at uniform draws.
pub fn resample_cdf<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let last = weights.len().saturating_sub(1);
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            // first index whose cumulative weight exceeds u, skipping zero-weight entries
            cdf.partition_point(|c| *c <= u).min(last)
        })
        .collect()
}

/// Weighted average of particle states: base rotation by one weighted
/// log-mean step around the heaviest particle, everything else linearly.
pub fn weighted_estimate(particles: &[Particle], positions: &[Vec<Vec3>], scores: &[f64]) -> TrackEstimate {
    let mut anchor = 0;
    for (i, p) in particles.iter().enumerate() {
        if p.weight > particles[anchor].weight {
            anchor = i;
        }
    }
    let r0 = particles[anchor].state.base.rotation;
    let joints = particles[anchor].state.rotations.len();
    let mut omega = Vec3::ZERO;
    let mut t = Vec3::ZERO;
    let mut rot = vec![Vec3::ZERO; joints];
    let mut scale = 0.0;
    let mut pos = vec![Vec3::ZERO; positions[anchor].len()];
    let mut predicted = 0.0;
    for (i, p) in particles.iter().enumerate() {
        let w = p.weight;
        omega += log_so3_any(&(r0.transpose() * p.state.base.rotation)) * w;
        t += p.state.base.translation * w;
        for (acc, r) in rot.iter_mut().zip(&p.state.rotations) {
            *acc += *r * w;
        }
        scale += p.state.scale * w;
        for (acc, x) in pos.iter_mut().zip(&positions[i]) {
            *acc += *x * w;
        }
        predicted += scores[i] * w;
    }
    let state = PoseState { base: RigidTransform::new(r0 * exp_so3(omega), t), rotations: rot, scale };
    TrackEstimate { pose: state.to_pose(), positions: JointPositions(pos), predicted_error: predicted }
}

/// One select / propagate / measure / estimate cycle.
pub fn track_step<R: Rng + ?Sized>(
    prev: &ParticleSet,
    image: &DepthImage,
    cascade: &Cascade,
    metric: &LearnedMetric,
    config: &TrackerConfig,
    rng: &mut R,
) -> StepOutput {
    let picks = resample_cdf(&prev.weights(), config.particles, rng);
    let noises: Vec<TwistVector> = picks.iter().map(|_| config.brownian.sample_noise(rng)).collect();
    let rounds = config.rounds.unwrap_or(cascade.rounds());
    let propagate = |i: usize| {
        let mut state = prev.particles[picks[i]].state.clone();
        state.base = brownian_step(&state.base, &config.brownian, noises[i]);
        let (state, transforms) = cascade.refine_from_base_rounds(image, &state, rounds);
        let score = metric.score(image, &cascade.camera, &transforms);
        let positions: Vec<Vec3> = transforms.iter().map(|g| g.translation).collect();
        (state, positions, score)
    };
    #[cfg(feature = "parallel")]
    let moved: Vec<(PoseState, Vec<Vec3>, f64)> = {
        use rayon::prelude::*;
        (0..picks.len()).into_par_iter().map(propagate).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let moved: Vec<(PoseState, Vec<Vec3>, f64)> = (0..picks.len()).map(propagate).collect();

    let mut weights: Vec<f64> = moved.iter().map(|m| weigh(m.2, config.sigma)).collect();
    let ok = normalize(&mut weights);
    let mut particles = Vec::with_capacity(moved.len());
    let mut positions = Vec::with_capacity(moved.len());
    let mut scores = Vec::with_capacity(moved.len());
    for ((state, pos, score), w) in moved.into_iter().zip(weights) {
        particles.push(Particle { state, weight: w });
        positions.push(pos);
        scores.push(score);
    }
    let estimate = weighted_estimate(&particles, &positions, &scores);
    StepOutput {
        estimate,
        next: ParticleSet { particles, timestep: prev.timestep + 1 },
        degenerate_weights: !ok,
    }
}

/// Stateful wrapper around [`track_step`].
#[derive(Clone, Debug)]
pub struct Tracker {
    pub config: TrackerConfig,
    pub set: ParticleSet,
    /// Steps whose weights all vanished.
    pub degenerate_steps: usize,
}

impl Tracker {
    /// Starts from `pose` (typically a single-frame estimate of frame 0).
    pub fn new(config: TrackerConfig, pose: &Pose) -> Tracker {
        let set = ParticleSet::from_pose(pose, config.particles);
        Tracker { config, set, degenerate_steps: 0 }
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        image: &DepthImage,
        cascade: &Cascade,
        metric: &LearnedMetric,
        rng: &mut R,
    ) -> TrackEstimate {
        let out = track_step(&self.set, image, cascade, metric, &self.config, rng);
        if out.degenerate_weights {
            self.degenerate_steps += 1;
        }
        self.set = out.next;
        out.estimate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn weigh_peak_and_sigma() {
        let peak = 1.0 / (math::sqrt(2.0 * PI) * 10.0);
        assert!((weigh(0.0, 10.0) - peak).abs() < 1e-18);
        assert!((weigh(10.0, 10.0) - peak * math::exp(-0.5)).abs() < 1e-18);
    }

    #[test]
    fn normalize_sums_to_one() {
        let mut w = vec![0.3, 1e-5, 7.0, 2.5];
        assert!(normalize(&mut w));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut z = vec![0.0; 4];
        assert!(!normalize(&mut z));
        assert_eq!(z, vec![0.25; 4]);
    }

    #[test]
    fn resample_degenerate_cases() {
        let mut rng = stream(0, "t", &[]);
        assert_eq!(resample_cdf(&[1.0, 0.0, 0.0], 50, &mut rng), vec![0; 50]);
        assert_eq!(resample_cdf(&[1.0], 10, &mut rng), vec![0; 10]);
        assert!(resample_cdf(&[0.0, 0.0, 1.0], 20, &mut rng).iter().all(|&i| i == 2));
    }

    #[test]
    fn resample_frequencies() {
        let mut rng = stream(1, "t", &[]);
        let idx = resample_cdf(&[0.5, 0.5], 100_000, &mut rng);
        let ones = idx.iter().filter(|&&i| i == 1).count() as f64 / 1e5;
        assert!((ones - 0.5).abs() < 0.01);
    }
}
