//! Kinematic trees, poses and forward kinematics.
//!
//! Joint `j` carries the cumulative transform
//!
//! ```text
//! G_0 = e^{θ̂_0}
//! G_j = G_parent(j) · Trans(s · o_j) · e^{ω̂_j}
//! ```
//!
//! where `o_j` is the home-pose offset from the parent (bone length times a
//! unit direction in the parent frame), `s` the pose scale and `ω_j` the
//! rotational part of the joint twist. The joint position is the
//! translation of `G_j`. Non-base joints only rotate: the translational part
//! of their twist is the fixed bone offset and never free, so their DoF
//! masks only ever select `ω` coordinates.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::lie::{exp_se3, exp_so3, log_se3_any, log_so3_any, RigidTransform, TwistVector, Vec3};

/// Subset of the six twist coordinates `(ω₁, ω₂, ω₃, ν₁, ν₂, ν₃)`; bit `i`
/// set means coordinate `i` is free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DofMask(u8);

impl DofMask {
    pub const NONE: DofMask = DofMask(0);
    pub const FULL: DofMask = DofMask(0b11_1111);
    pub const YAW: DofMask = DofMask(0b00_0100);
    pub const PITCH: DofMask = DofMask(0b00_0001);
    pub const YAW_PITCH: DofMask = DofMask(0b00_0101);

    pub const fn from_bits(bits: u8) -> Option<DofMask> {
        if bits & !0b11_1111 == 0 {
            Some(DofMask(bits))
        } else {
            None
        }
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn contains(self, coord: usize) -> bool {
        coord < 6 && self.0 & (1 << coord) != 0
    }

    pub const fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Free coordinates in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..6).filter(move |&i| self.contains(i))
    }

    /// Zeroes the coordinates outside the mask.
    pub fn apply(self, xi: TwistVector) -> TwistVector {
        let mut a = xi.to_array();
        for (i, v) in a.iter_mut().enumerate() {
            if !self.contains(i) {
                *v = 0.0;
            }
        }
        TwistVector::from_array(a)
    }

    fn apply_omega(self, w: Vec3) -> Vec3 {
        Vec3::new(
            if self.contains(0) { w.x } else { 0.0 },
            if self.contains(1) { w.y } else { 0.0 },
            if self.contains(2) { w.z } else { 0.0 },
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointSpec {
    /// `None` only for the base joint (index 0).
    pub parent: Option<usize>,
    /// Distance to the parent in the home pose, mm.
    pub bone_length: f64,
    /// Home-pose bone direction expressed in the parent frame (unit length).
    pub direction: Vec3,
    pub dof_mask: DofMask,
    pub is_end_effector: bool,
}

impl JointSpec {
    /// Home-pose offset from the parent joint at unit scale.
    pub fn offset(&self) -> Vec3 {
        self.direction * self.bone_length
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KinematicsError {
    /// A coordinate outside the joint's DoF mask is nonzero.
    DofViolation { joint: usize, coord: usize },
    /// Pose has a different joint count than the model.
    JointCountMismatch { expected: usize, found: usize },
    /// Scale outside `[0.5, 2.0]` or not finite.
    InvalidScale,
    /// The joint list does not describe a valid kinematic tree.
    InvalidModel(&'static str),
}

impl fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KinematicsError::DofViolation { joint, coord } => {
                write!(f, "joint {joint}: coordinate {coord} is outside the DoF mask but nonzero")
            }
            KinematicsError::JointCountMismatch { expected, found } => {
                write!(f, "pose has {found} joints, model has {expected}")
            }
            KinematicsError::InvalidScale => f.write_str("scale must lie in [0.5, 2.0]"),
            KinematicsError::InvalidModel(why) => write!(f, "invalid skeletal model: {why}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KinematicsError {}

pub const MIN_SCALE: f64 = 0.5;
pub const MAX_SCALE: f64 = 2.0;

/// One twist per joint plus a global bone-length scale.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose {
    pub twists: Vec<TwistVector>,
    pub scale: f64,
}

impl Pose {
    pub fn home(joint_count: usize) -> Pose {
        Pose { twists: vec![TwistVector::ZERO; joint_count], scale: 1.0 }
    }
}

/// Working form of a pose: the base as a group element, the other joints as
/// rotation vectors. Converting to [`Pose`] takes a logarithm of the base,
/// which this form avoids during iterative refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseState {
    pub base: RigidTransform,
    /// `ω_j` per joint; entry 0 is unused and kept at zero.
    pub rotations: Vec<Vec3>,
    pub scale: f64,
}

impl PoseState {
    pub fn from_pose(pose: &Pose) -> PoseState {
        let mut rotations: Vec<Vec3> = pose.twists.iter().map(|t| t.omega).collect();
        if let Some(r) = rotations.first_mut() {
            *r = Vec3::ZERO;
        }
        PoseState {
            base: pose.twists.first().map_or(RigidTransform::IDENTITY, |t| exp_se3(*t)),
            rotations,
            scale: pose.scale,
        }
    }

    /// The twist form. The base twist uses the total logarithm, so a base
    /// rotation of exactly π maps to one of its two equivalent axes.
    pub fn to_pose(&self) -> Pose {
        let mut twists: Vec<TwistVector> =
            self.rotations.iter().map(|w| TwistVector::new(*w, Vec3::ZERO)).collect();
        if let Some(t) = twists.first_mut() {
            *t = log_se3_any(&self.base);
        }
        Pose { twists, scale: self.scale }
    }

    /// Right-multiplies `e^{r}` onto joint `j`, keeping only the coordinates
    /// in the joint's mask. Exact for single-axis joints; for multi-axis
    /// joints the composed rotation is projected back onto the mask.
    pub fn update_joint(&mut self, model: &SkeletalModel, j: usize, r: TwistVector) {
        let mask = model.joints[j].dof_mask;
        if mask.is_empty() {
            return;
        }
        let r = mask.apply(r);
        if j == 0 {
            self.base = apply_joint_update(&self.base, r);
        } else if mask.count() == 1 {
            self.rotations[j] = self.rotations[j] + r.omega;
        } else {
            let composed = exp_so3(self.rotations[j]) * exp_so3(r.omega);
            self.rotations[j] = mask.apply_omega(log_so3_any(&composed));
        }
    }

    /// Cumulative transforms of every joint.
    pub fn transforms(&self, model: &SkeletalModel) -> Vec<RigidTransform> {
        let mut out = Vec::with_capacity(model.joints.len());
        for j in 0..model.joints.len() {
            let g = self.joint_transform(model, j, &out);
            out.push(g);
        }
        out
    }

    /// `G_j` given the already-computed transforms of all joints before `j`.
    #[inline]
    pub fn joint_transform(&self, model: &SkeletalModel, j: usize, earlier: &[RigidTransform]) -> RigidTransform {
        let spec = &model.joints[j];
        match spec.parent {
            None => self.base,
            Some(p) => {
                let parent = &earlier[p];
                let local = RigidTransform::new(exp_so3(self.rotations[j]), spec.offset() * self.scale);
                *parent * local
            }
        }
    }

    pub fn positions(&self, model: &SkeletalModel) -> JointPositions {
        JointPositions(self.transforms(model).iter().map(|g| g.translation).collect())
    }
}

/// 3-D joint locations (mm), one per joint.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointPositions(pub Vec<Vec3>);

impl JointPositions {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `cumulative · e^{r}`: a regressor's correction applied to a partial chain.
#[inline]
pub fn apply_joint_update(cumulative: &RigidTransform, r: TwistVector) -> RigidTransform {
    *cumulative * exp_se3(r)
}

/// How the joints are visited during estimation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstimationPlan {
    /// Joint index lists, run in order. With `shared_base` the first stage
    /// is the base alone and the remaining stages are independent sub-chains
    /// hanging from it.
    pub stages: Vec<Vec<usize>>,
    pub shared_base: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkeletalModel {
    pub name: String,
    pub joints: Vec<JointSpec>,
    /// Default rendering thickness per joint, mm.
    pub radii: Vec<f64>,
    /// Root-to-leaf joint index paths.
    #[cfg_attr(feature = "serde", serde(skip))]
    chains: Vec<Vec<usize>>,
}

impl SkeletalModel {
    /// Validates the joint list and derives the chains.
    pub fn new(name: impl Into<String>, joints: Vec<JointSpec>, radii: Vec<f64>) -> Result<Self, KinematicsError> {
        use KinematicsError::InvalidModel;
        if joints.is_empty() {
            return Err(InvalidModel("no joints"));
        }
        if radii.len() != joints.len() {
            return Err(InvalidModel("radii count differs from joint count"));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(InvalidModel("radii must be positive"));
        }
        let base = &joints[0];
        if base.parent.is_some() || base.dof_mask != DofMask::FULL {
            return Err(InvalidModel("joint 0 must be a parentless 6-DoF base"));
        }
        let mut has_child = vec![false; joints.len()];
        for (j, spec) in joints.iter().enumerate().skip(1) {
            match spec.parent {
                Some(p) if p < j => has_child[p] = true,
                _ => return Err(InvalidModel("parents must precede their children")),
            }
            if !(spec.bone_length > 0.0) || !spec.bone_length.is_finite() {
                return Err(InvalidModel("bone lengths must be positive"));
            }
            if (spec.direction.norm() - 1.0).abs() > 1e-9 {
                return Err(InvalidModel("bone directions must be unit vectors"));
            }
            if spec.dof_mask.bits() & 0b11_1000 != 0 {
                return Err(InvalidModel("non-base joints only have rotational DoF"));
            }
        }
        for (j, spec) in joints.iter().enumerate() {
            if spec.is_end_effector != (!has_child[j] && j > 0) {
                return Err(InvalidModel("end effectors must be exactly the leaves"));
            }
            if spec.is_end_effector && !spec.dof_mask.is_empty() {
                return Err(InvalidModel("end effectors have zero DoF"));
            }
        }
        let mut model = SkeletalModel { name: name.into(), joints, radii, chains: Vec::new() };
        model.chains = model.derive_chains();
        Ok(model)
    }

    fn derive_chains(&self) -> Vec<Vec<usize>> {
        let mut chains = Vec::new();
        for (j, spec) in self.joints.iter().enumerate() {
            if spec.is_end_effector || (j == 0 && self.joints.len() == 1) {
                let mut path = vec![j];
                let mut cur = spec.parent;
                while let Some(p) = cur {
                    path.push(p);
                    cur = self.joints[p].parent;
                }
                path.reverse();
                chains.push(path);
            }
        }
        chains
    }

    /// Re-derives the chains after deserialization.
    pub fn revalidate(self) -> Result<Self, KinematicsError> {
        SkeletalModel::new(self.name, self.joints, self.radii)
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn dof_count(&self) -> usize {
        self.joints.iter().map(|j| j.dof_mask.count()).sum()
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn home_pose(&self) -> Pose {
        Pose::home(self.joints.len())
    }

    /// Single-chain models run as one stage; trees run the base first and
    /// then each sub-chain with the base held fixed.
    pub fn subchains_for_estimation(&self) -> EstimationPlan {
        if self.chains.len() <= 1 {
            return EstimationPlan { stages: vec![(0..self.joints.len()).collect()], shared_base: false };
        }
        let mut stages = vec![vec![0]];
        for chain in &self.chains {
            stages.push(chain[1..].to_vec());
        }
        EstimationPlan { stages, shared_base: true }
    }

    pub fn check_pose(&self, pose: &Pose) -> Result<(), KinematicsError> {
        if pose.twists.len() != self.joints.len() {
            return Err(KinematicsError::JointCountMismatch {
                expected: self.joints.len(),
                found: pose.twists.len(),
            });
        }
        if !(MIN_SCALE..=MAX_SCALE).contains(&pose.scale) {
            return Err(KinematicsError::InvalidScale);
        }
        for (j, (t, spec)) in pose.twists.iter().zip(&self.joints).enumerate() {
            for (coord, v) in t.to_array().iter().enumerate() {
                if *v != 0.0 && !spec.dof_mask.contains(coord) {
                    return Err(KinematicsError::DofViolation { joint: j, coord });
                }
            }
        }
        Ok(())
    }

    /// Cumulative transform and position of every joint.
    pub fn forward_kinematics(&self, pose: &Pose) -> Result<(Vec<RigidTransform>, JointPositions), KinematicsError> {
        self.check_pose(pose)?;
        let g = PoseState::from_pose(pose).transforms(self);
        let p = JointPositions(g.iter().map(|t| t.translation).collect());
        Ok((g, p))
    }

    /// Home-pose joint positions relative to the base, unit scale.
    pub fn home_positions(&self) -> Vec<Vec3> {
        PoseState::from_pose(&self.home_pose()).positions(self).0
    }

    /// Total home-pose extent along the longest chain, mm.
    pub fn chain_length(&self) -> f64 {
        self.chains
            .iter()
            .map(|c| c.iter().skip(1).map(|&j| self.joints[j].bone_length).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Zebrafish larva: 21 joints along one chain, 30 mm, the base at the
    /// head. Non-base joints bend in-plane (yaw); the tail tip is fixed.
    pub fn fish() -> SkeletalModel {
        let n = 21;
        let bone = 30.0 / (n - 1) as f64;
        let up = Vec3::new(0.0, 1.0, 0.0);
        let joints = (0..n)
            .map(|j| JointSpec {
                parent: if j == 0 { None } else { Some(j - 1) },
                bone_length: if j == 0 { 0.0 } else { bone },
                direction: up,
                dof_mask: match j {
                    0 => DofMask::FULL,
                    _ if j == n - 1 => DofMask::NONE,
                    _ => DofMask::YAW,
                },
                is_end_effector: j == n - 1,
            })
            .collect();
        // head 2 mm tapering linearly to 1 mm at the tail tip
        let radii = (0..n).map(|j| 2.0 - j as f64 / (n - 1) as f64).collect();
        let m = SkeletalModel::new("fish", joints, radii).expect("fish preset");
        debug_assert_eq!(m.dof_count(), 25);
        m
    }

    /// Lab mouse: 5 joints from tail root to nose, 80 mm; body joints yaw
    /// and pitch.
    pub fn mouse() -> SkeletalModel {
        let up = Vec3::new(0.0, 1.0, 0.0);
        let joints = (0..5)
            .map(|j| JointSpec {
                parent: if j == 0 { None } else { Some(j - 1) },
                bone_length: if j == 0 { 0.0 } else { 20.0 },
                direction: up,
                dof_mask: match j {
                    0 => DofMask::FULL,
                    4 => DofMask::NONE,
                    _ => DofMask::YAW_PITCH,
                },
                is_end_effector: j == 4,
            })
            .collect();
        let m = SkeletalModel::new("mouse", joints, vec![12.0, 14.0, 13.0, 10.0, 7.0]).expect("mouse preset");
        debug_assert_eq!(m.dof_count(), 12);
        m
    }

    /// Human hand: 23 joints, wrist base and five finger chains. Each finger
    /// has a 2-DoF root (flexion + abduction), two 1-DoF flexion joints and a
    /// fixed tip; thumb and little finger each have a fixed carpometacarpal
    /// joint between the wrist and the finger root.
    pub fn hand() -> SkeletalModel {
        let mut joints = vec![JointSpec {
            parent: None,
            bone_length: 0.0,
            direction: Vec3::new(0.0, 1.0, 0.0),
            dof_mask: DofMask::FULL,
            is_end_effector: false,
        }];
        let mut radii = vec![10.0];
        let mut push = |joints: &mut Vec<JointSpec>, parent: usize, offset: Vec3, mask: DofMask, leaf: bool, r: f64| {
            let len = offset.norm();
            joints.push(JointSpec {
                parent: Some(parent),
                bone_length: len,
                direction: offset * (1.0 / len),
                dof_mask: mask,
                is_end_effector: leaf,
            });
            radii.push(r);
            joints.len() - 1
        };
        // (palm joint offset, root offset, segment direction, segment lengths, radius)
        let fingers: [(Option<Vec3>, Vec3, Vec3, [f64; 3], f64); 5] = [
            (Some(Vec3::new(-20.0, 25.0, 0.0)), Vec3::new(-20.0, 25.0, 0.0), Vec3::new(-0.5, 0.866_025_403_784_438_6, 0.0), [35.0, 30.0, 25.0], 9.0),
            (None, Vec3::new(-25.0, 88.0, 0.0), Vec3::new(0.0, 1.0, 0.0), [42.0, 25.0, 20.0], 8.0),
            (None, Vec3::new(-8.0, 92.0, 0.0), Vec3::new(0.0, 1.0, 0.0), [45.0, 27.0, 20.0], 8.0),
            (None, Vec3::new(9.0, 88.0, 0.0), Vec3::new(0.0, 1.0, 0.0), [42.0, 26.0, 20.0], 7.5),
            (Some(Vec3::new(20.0, 40.0, 0.0)), Vec3::new(7.0, 40.0, 0.0), Vec3::new(0.0, 1.0, 0.0), [33.0, 20.0, 18.0], 7.0),
        ];
        for (palm, root, dir, segs, r) in fingers {
            let mut parent = 0;
            if let Some(off) = palm {
                parent = push(&mut joints, parent, off, DofMask::NONE, false, r + 2.0);
            }
            parent = push(&mut joints, parent, root, DofMask::YAW_PITCH, false, r);
            parent = push(&mut joints, parent, dir * segs[0], DofMask::PITCH, false, r * 0.9);
            parent = push(&mut joints, parent, dir * segs[1], DofMask::PITCH, false, r * 0.8);
            push(&mut joints, parent, dir * segs[2], DofMask::NONE, true, r * 0.7);
        }
        let m = SkeletalModel::new("hand", joints, radii).expect("hand preset");
        debug_assert_eq!(m.joint_count(), 23);
        debug_assert_eq!(m.dof_count(), 26);
        m
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str) -> Option<SkeletalModel> {
        match name {
            "fish" => Some(Self::fish()),
            "mouse" => Some(Self::mouse()),
            "hand" => Some(Self::hand()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::RotationMatrix;
    use core::f64::consts::PI;

    #[test]
    fn preset_counts() {
        let fish = SkeletalModel::fish();
        assert_eq!((fish.joint_count(), fish.dof_count(), fish.chains().len()), (21, 25, 1));
        assert!((fish.chain_length() - 30.0).abs() < 1e-12);
        let mouse = SkeletalModel::mouse();
        assert_eq!((mouse.joint_count(), mouse.dof_count(), mouse.chains().len()), (5, 12, 1));
        assert!((mouse.chain_length() - 80.0).abs() < 1e-12);
        let hand = SkeletalModel::hand();
        assert_eq!((hand.joint_count(), hand.dof_count(), hand.chains().len()), (23, 26, 5));
    }

    #[test]
    fn estimation_plans() {
        let p = SkeletalModel::fish().subchains_for_estimation();
        assert_eq!(p.stages.len(), 1);
        assert_eq!(p.stages[0].len(), 21);
        assert_eq!(SkeletalModel::mouse().subchains_for_estimation().stages[0].len(), 5);
        let p = SkeletalModel::hand().subchains_for_estimation();
        assert!(p.shared_base);
        assert_eq!(p.stages.len(), 6);
        assert_eq!(p.stages[0], vec![0]);
        let covered: usize = p.stages.iter().map(|s| s.len()).sum();
        assert_eq!(covered, 23);
    }

    #[test]
    fn home_pose_is_straight_up() {
        let fish = SkeletalModel::fish();
        let p = fish.forward_kinematics(&fish.home_pose()).unwrap().1;
        for (j, x) in p.0.iter().enumerate() {
            assert!(x.distance(Vec3::new(0.0, 1.5 * j as f64, 0.0)) < 1e-12);
        }
    }

    #[test]
    fn scale_multiplies_bones() {
        let m = SkeletalModel::mouse();
        let mut pose = m.home_pose();
        pose.scale = 1.1;
        let p = m.forward_kinematics(&pose).unwrap().1;
        assert!((p.0[4].y - 88.0).abs() < 1e-12);
    }

    #[test]
    fn dof_violation_and_scale_errors() {
        let m = SkeletalModel::fish();
        let mut pose = m.home_pose();
        pose.twists[3].omega.x = 0.1;
        assert_eq!(m.forward_kinematics(&pose).unwrap_err(), KinematicsError::DofViolation { joint: 3, coord: 0 });
        let mut pose = m.home_pose();
        pose.scale = 3.0;
        assert_eq!(m.check_pose(&pose), Err(KinematicsError::InvalidScale));
    }

    #[test]
    fn two_joint_chain_against_matrix_product() {
        let joints = vec![
            JointSpec { parent: None, bone_length: 0.0, direction: Vec3::new(0.0, 1.0, 0.0), dof_mask: DofMask::FULL, is_end_effector: false },
            JointSpec { parent: Some(0), bone_length: 10.0, direction: Vec3::new(0.0, 1.0, 0.0), dof_mask: DofMask::NONE, is_end_effector: true },
        ];
        let m = SkeletalModel::new("pair", joints, vec![1.0, 1.0]).unwrap();
        let mut pose = m.home_pose();
        pose.twists[0] = TwistVector::new(Vec3::new(0.0, 0.0, PI / 2.0), Vec3::ZERO);
        let (_, p) = m.forward_kinematics(&pose).unwrap();
        assert!(p.0[1].distance(Vec3::new(-10.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn base_translation_moves_everything() {
        let m = SkeletalModel::hand();
        let home = m.home_positions();
        let mut pose = m.home_pose();
        pose.twists[0].nu = Vec3::new(5.0, -3.0, 400.0);
        let p = m.forward_kinematics(&pose).unwrap().1;
        for (a, b) in p.0.iter().zip(&home) {
            assert!(a.distance(*b + Vec3::new(5.0, -3.0, 400.0)) < 1e-12);
        }
    }

    #[test]
    fn update_joint_single_axis_adds_angles() {
        let m = SkeletalModel::fish();
        let mut s = PoseState::from_pose(&m.home_pose());
        s.update_joint(&m, 4, TwistVector::from_array([0.3, 0.2, 0.1, 5.0, 0.0, 0.0]));
        s.update_joint(&m, 4, TwistVector::from_array([0.0, 0.0, 0.05, 0.0, 0.0, 0.0]));
        assert_eq!(s.rotations[4], Vec3::new(0.0, 0.0, 0.1 + 0.05));
        let before = s.clone();
        s.update_joint(&m, 20, TwistVector::from_array([1.0; 6]));
        assert_eq!(s, before);
    }

    #[test]
    fn base_update_right_multiplies() {
        let m = SkeletalModel::mouse();
        let mut s = PoseState::from_pose(&m.home_pose());
        s.base = RigidTransform::new(RotationMatrix::about_z(0.4), Vec3::new(1.0, 2.0, 600.0));
        let r = TwistVector::from_array([0.01, -0.02, 0.1, 3.0, -1.0, 2.0]);
        let expect = apply_joint_update(&s.base, r);
        s.update_joint(&m, 0, r);
        assert_eq!(s.base, expect);
    }

    #[test]
    fn pose_state_round_trip() {
        let m = SkeletalModel::mouse();
        let mut pose = m.home_pose();
        pose.twists[0] = TwistVector::from_array([0.1, -0.2, 2.5, 10.0, 20.0, 600.0]);
        pose.twists[2].omega = Vec3::new(0.1, 0.0, -0.2);
        pose.scale = 0.95;
        let back = PoseState::from_pose(&pose).to_pose();
        assert!(back.twists[0].max_abs_diff(pose.twists[0]) < 1e-9);
        assert_eq!(back.twists[2], pose.twists[2]);
    }

    #[test]
    fn rejects_bad_trees() {
        let mut joints = SkeletalModel::fish().joints;
        joints[5].parent = Some(7);
        assert!(SkeletalModel::new("bad", joints, vec![1.0; 21]).is_err());
        let mut joints = SkeletalModel::fish().joints;
        joints[20].dof_mask = DofMask::YAW;
        assert!(SkeletalModel::new("bad", joints, vec![1.0; 21]).is_err());
    }
}
