//! Articulated-object pose estimation, tracking and action recognition on
//! the rigid-motion group SE(3).
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation:
//! Lie-group math, kinematic trees, a synthetic depth renderer, regression
//! forests over pose-indexed depth features, the per-joint regressor cascade,
//! a particle-filter tracker and tangent-space action features. File formats,
//! the command line and all IO live in the `artipose-cli` crate.
//!
//! Randomness is always injected: operations take an explicit RNG (or a
//! seed from which named sub-streams are derived, see [`rng`]), so every
//! result is reproducible bit-for-bit.
//!
//! Optional features:
//! * `parallel` trains forest trees and refines candidates on a rayon pool
//!   (results are identical to the sequential build).
//! * `serde` derives `Serialize`/`Deserialize` for the value types.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;

pub mod action;
pub mod camera;
pub mod cascade;
pub mod eval;
pub mod forest;
pub mod kinematics;
pub mod lie;
pub mod render;
pub mod rng;
pub mod synth;
pub mod tracker;

pub use camera::{CameraModel, DepthImage, PointCloud, BACKGROUND_MM};
pub use kinematics::{DofMask, JointPositions, JointSpec, Pose, PoseState, SkeletalModel};
pub use lie::{RigidTransform, RotationMatrix, TwistVector, Vec3};
