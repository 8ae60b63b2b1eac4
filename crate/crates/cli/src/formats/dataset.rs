//! Dataset directories: `manifest.json` plus one `NNNNN.pgm` raster and
//! `NNNNN.json` sidecar per frame.

use std::fs;
use std::path::{Path, PathBuf};

use artipose::synth::Sample;
use artipose::{CameraModel, DepthImage, JointPositions, Pose, SkeletalModel, TwistVector, Vec3};
use serde::{Deserialize, Serialize};

use super::{pgm, read_json, write_atomic, write_json};
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

/// Twists as `[ωx, ωy, ωz, νx, νy, νz]` rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseJson {
    pub twists: Vec<[f64; 6]>,
    pub scale: f64,
}

impl From<&Pose> for PoseJson {
    fn from(p: &Pose) -> Self {
        PoseJson { twists: p.twists.iter().map(|t| t.to_array()).collect(), scale: p.scale }
    }
}

impl From<&PoseJson> for Pose {
    fn from(p: &PoseJson) -> Self {
        Pose { twists: p.twists.iter().map(|t| TwistVector::from_array(*t)).collect(), scale: p.scale }
    }
}

pub fn positions_json(p: &JointPositions) -> Vec<[f64; 3]> {
    p.0.iter().map(|v| v.to_array()).collect()
}

pub fn positions_from_json(p: &[[f64; 3]]) -> JointPositions {
    JointPositions(p.iter().map(|v| Vec3::from_array(*v)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    /// Independent random poses.
    Images,
    /// Consecutive frames of one smooth motion.
    Sequence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: DatasetKind,
    /// Preset name or the path the model was loaded from.
    pub preset: String,
    pub model: SkeletalModel,
    pub camera: CameraModel,
    pub count: usize,
    pub noise_mm: f64,
    pub seed: u64,
    /// Frame stems, in order.
    pub frames: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub index: usize,
    pub camera: CameraModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<PoseJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 3]>>,
}

/// One loaded frame; ground truth is present when the sidecar has it.
#[derive(Clone, Debug)]
pub struct Frame {
    pub stem: String,
    pub image: DepthImage,
    pub pose: Option<Pose>,
    pub positions: Option<JointPositions>,
}

impl Frame {
    /// The frame as a training sample; `None` without ground truth.
    pub fn sample(&self) -> Option<Sample> {
        Some(Sample { pose: self.pose.clone()?, positions: self.positions.clone()?, image: self.image.clone() })
    }
}

pub fn stem(index: usize) -> String {
    format!("{index:05}")
}

/// Writes one frame's raster and sidecar.
pub fn write_frame(dir: &Path, index: usize, camera: &CameraModel, sample: &Sample) -> Result<()> {
    let s = stem(index);
    write_atomic(&dir.join(format!("{s}.pgm")), &pgm::encode(&sample.image))?;
    let side = Sidecar {
        index,
        camera: *camera,
        pose: Some(PoseJson::from(&sample.pose)),
        positions: Some(positions_json(&sample.positions)),
    };
    write_json(&dir.join(format!("{s}.json")), &side)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    if !dir.is_dir() {
        return Err(CliError::InputNotFound(dir.to_path_buf()));
    }
    let mut m: Manifest = read_json(&dir.join(MANIFEST))?;
    m.model = m.model.revalidate().map_err(|e| CliError::corrupt(dir.join(MANIFEST), e))?;
    if m.frames.len() != m.count {
        return Err(CliError::corrupt(dir.join(MANIFEST), "frame list length differs from count"));
    }
    Ok(m)
}

pub fn read_frame(dir: &Path, stem: &str) -> Result<Frame> {
    let pgm_path: PathBuf = dir.join(format!("{stem}.pgm"));
    let bytes = fs::read(&pgm_path).map_err(|e| CliError::read(&pgm_path, e, CliError::InputNotFound))?;
    let image = pgm::decode(&bytes).map_err(|e| CliError::corrupt(&pgm_path, e))?;
    let side: Sidecar = read_json(&dir.join(format!("{stem}.json")))?;
    Ok(Frame {
        stem: stem.to_string(),
        image,
        pose: side.pose.as_ref().map(Pose::from),
        positions: side.positions.as_deref().map(positions_from_json),
    })
}

/// The manifest and every frame of a dataset directory.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, Vec<Frame>)> {
    let m = read_manifest(dir)?;
    let frames = m.frames.iter().map(|s| read_frame(dir, s)).collect::<Result<Vec<_>>>()?;
    Ok((m, frames))
}
