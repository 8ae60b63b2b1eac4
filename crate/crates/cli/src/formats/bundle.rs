//! Model bundles.
//!
//! ```text
//! magic    "LXB1"
//! version  u32 LE (1)
//! kind     u8 (0 pose estimator, 1 action classifier)
//! header   u64 LE length + JSON
//! forests  u32 LE count + that many LXF1 forest blobs back to back
//! ```
//!
//! A pose bundle's header holds the skeletal model, camera and cascade
//! configuration; its forests are the regressors joint by joint, round by
//! round, followed by the metric forest. An action bundle holds one forest.

use artipose::action::{ActionClass, ActionClassifier, FeatureMode};
use artipose::cascade::{Cascade, CascadeConfig, LearnedMetric};
use artipose::forest::{self, Forest};
use artipose::{CameraModel, SkeletalModel};
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 4] = b"LXB1";
pub const VERSION: u32 = 1;

const KIND_POSE: u8 = 0;
const KIND_ACTION: u8 = 1;

#[derive(Debug, PartialEq, Eq)]
pub struct BundleError(pub String);

impl std::fmt::Display for BundleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err(s: impl Into<String>) -> BundleError {
    BundleError(s.into())
}

#[derive(Serialize, Deserialize)]
struct PoseHeader {
    model: SkeletalModel,
    camera: CameraModel,
    config: CascadeConfig,
    metric_perturbations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionHeader {
    pub mode: FeatureMode,
    pub compact: bool,
    pub feature_len: usize,
    pub classes: Vec<ActionClass>,
    /// Name of the skeletal model the features were computed for.
    pub model: String,
}

fn write(kind: u8, header: &impl Serialize, forests: &[&Forest]) -> Vec<u8> {
    let json = serde_json::to_vec(header).expect("bundle header json");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(kind);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(forests.len() as u32).to_le_bytes());
    for f in forests {
        out.extend_from_slice(&forest::encode(f));
    }
    out
}

fn read(bytes: &[u8], want: u8) -> Result<(&[u8], Vec<Forest>), BundleError> {
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], BundleError> {
        let s = bytes.get(*pos..*pos + n).ok_or_else(|| err("truncated bundle"))?;
        *pos += n;
        Ok(s)
    };
    let mut pos = 0;
    if take(&mut pos, 4)? != MAGIC {
        return Err(err("not a model bundle"));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != VERSION {
        return Err(err(format!("bundle version {version}, expected {VERSION}")));
    }
    let kind = take(&mut pos, 1)?[0];
    if kind != want {
        return Err(err(format!("bundle kind {kind}, expected {want}")));
    }
    let len = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let len = usize::try_from(len).map_err(|_| err("header too large"))?;
    let header = take(&mut pos, len)?;
    let count = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let mut forests = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let (f, used) = forest::decode_prefix(&bytes[pos..]).map_err(|e| err(e.to_string()))?;
        pos += used;
        forests.push(f);
    }
    if pos != bytes.len() {
        return Err(err("trailing bytes after the last forest"));
    }
    Ok((header, forests))
}

pub fn encode_pose(cascade: &Cascade, metric: &LearnedMetric) -> Vec<u8> {
    let header = PoseHeader {
        model: cascade.model.clone(),
        camera: cascade.camera,
        config: cascade.config.clone(),
        metric_perturbations: metric.perturbations,
    };
    let mut forests: Vec<&Forest> = cascade.regressors.iter().flatten().collect();
    forests.push(&metric.forest);
    write(KIND_POSE, &header, &forests)
}

pub fn decode_pose(bytes: &[u8]) -> Result<(Cascade, LearnedMetric), BundleError> {
    let (header, mut forests) = read(bytes, KIND_POSE)?;
    let h: PoseHeader = serde_json::from_slice(header).map_err(|e| err(e.to_string()))?;
    let model = h.model.revalidate().map_err(|e| err(e.to_string()))?;
    let rounds = h.config.rounds;
    if forests.len() != model.joint_count() * rounds + 1 {
        return Err(err("forest count does not match the model"));
    }
    let metric = LearnedMetric { forest: forests.pop().expect("metric forest"), perturbations: h.metric_perturbations, log_labels: h.config.metric_log_labels };
    let mut it = forests.into_iter();
    let regressors = (0..model.joint_count()).map(|_| it.by_ref().take(rounds).collect()).collect();
    let cascade = Cascade { model, camera: h.camera, config: h.config, regressors };
    cascade.check_shape().map_err(|e| err(e.to_string()))?;
    Ok((cascade, metric))
}

pub fn encode_action(header: &ActionHeader, classifier: &ActionClassifier) -> Vec<u8> {
    write(KIND_ACTION, header, &[&classifier.forest])
}

pub fn decode_action(bytes: &[u8]) -> Result<(ActionHeader, ActionClassifier), BundleError> {
    let (header, mut forests) = read(bytes, KIND_ACTION)?;
    let h: ActionHeader = serde_json::from_slice(header).map_err(|e| err(e.to_string()))?;
    if forests.len() != 1 {
        return Err(err("action bundle must hold one forest"));
    }
    let forest = forests.pop().expect("one forest");
    if forest.dim != h.classes.len() {
        return Err(err("class count does not match the forest"));
    }
    let c = ActionClassifier { forest, feature_len: h.feature_len, mode: h.mode, compact: h.compact };
    Ok((h, c))
}
