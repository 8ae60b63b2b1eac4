//! Pose sequences as JSON lines, one pose per line:
//!
//! ```text
//! {"sequence":0,"timestamp":0.0,"twists":[[..6..],..],"scale":1.0,"label":"freeze"}
//! ```
//!
//! Consecutive lines with the same `sequence` id form one sequence; the
//! label of its first line is the sequence label.

use std::fs;
use std::path::Path;

use artipose::action::PoseSequence;
use artipose::Pose;
use serde::{Deserialize, Serialize};

use super::dataset::PoseJson;
use super::write_atomic;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseLine {
    pub sequence: usize,
    pub timestamp: f64,
    pub twists: Vec<[f64; 6]>,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A sequence with its label as a class name.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedSequence {
    pub poses: Vec<Pose>,
    pub timestamps: Vec<f64>,
    pub label: Option<String>,
}

impl NamedSequence {
    pub fn to_sequence(&self, label: Option<u32>) -> PoseSequence {
        PoseSequence { poses: self.poses.clone(), timestamps: self.timestamps.clone(), label }
    }
}

pub fn encode(seqs: &[NamedSequence]) -> String {
    let mut out = String::new();
    for (id, s) in seqs.iter().enumerate() {
        for (p, t) in s.poses.iter().zip(&s.timestamps) {
            let pj = PoseJson::from(p);
            let line = PoseLine { sequence: id, timestamp: *t, twists: pj.twists, scale: pj.scale, label: s.label.clone() };
            out.push_str(&serde_json::to_string(&line).expect("pose line json"));
            out.push('\n');
        }
    }
    out
}

pub fn decode(text: &str) -> std::result::Result<Vec<NamedSequence>, String> {
    let mut out: Vec<NamedSequence> = Vec::new();
    let mut current: Option<usize> = None;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: PoseLine = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        if current != Some(l.sequence) {
            current = Some(l.sequence);
            out.push(NamedSequence { poses: Vec::new(), timestamps: Vec::new(), label: l.label.clone() });
        }
        let s = out.last_mut().expect("open sequence");
        s.poses.push(Pose::from(&PoseJson { twists: l.twists, scale: l.scale }));
        s.timestamps.push(l.timestamp);
    }
    Ok(out)
}

pub fn write(path: &Path, seqs: &[NamedSequence]) -> Result<()> {
    write_atomic(path, encode(seqs).as_bytes())
}

pub fn read(path: &Path) -> Result<Vec<NamedSequence>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e, CliError::InputNotFound))?;
    decode(&text).map_err(|e| CliError::corrupt(path, e))
}
