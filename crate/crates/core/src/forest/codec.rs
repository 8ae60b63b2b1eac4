//! Little-endian binary forest format.
//!
//! ```text
//! "LXF1" u16:version u8:kind
//! u32:n_trees u32:max_depth u32:features_per_node u32:thresholds u32:min_examples u8:energy u8:bootstrap
//! u32:dim f64×dim:bandwidth
//! u32:tree_count { u32:node_count { node }* }*
//! node = 0u8 probe f64:threshold u32:left u32:right
//!      | 1u8 u32:count u32:vote_rows f64×dim:mean f64×(vote_rows·dim):votes
//! probe = 0u8 f64×3:u f64×3:v | 1u8 u32:joint f64×3:u f64×3:v | 2u8 u32:index
//! ```

use alloc::vec::Vec;
use core::fmt;

use super::{BinaryTest, EnergyMode, Forest, ForestKind, Leaf, Node, Probe, TrainConfig, Tree};
use crate::lie::Vec3;

pub const MAGIC: &[u8; 4] = b"LXF1";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodecError {
    VersionMismatch { found: u16 },
    CorruptStream,
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::VersionMismatch { found } => {
                write!(f, "forest format version {found}, expected {FORMAT_VERSION}")
            }
            CodecError::CorruptStream => f.write_str("corrupt forest stream"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CodecError {}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn vec3(&mut self, v: Vec3) {
        self.f64(v.x);
        self.f64(v.y);
        self.f64(v.z);
    }
}

pub fn encode(forest: &Forest) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u16(FORMAT_VERSION);
    w.u8(forest.kind.tag());
    let c = &forest.config;
    for v in [c.n_trees, c.max_depth, c.features_per_node, c.thresholds, c.min_examples] {
        w.u32(v as u32);
    }
    w.u8(match c.energy {
        EnergyMode::Variance => 0,
        EnergyMode::Literal => 1,
    });
    w.u8(c.bootstrap as u8);
    w.u32(forest.dim as u32);
    for b in &forest.bandwidth {
        w.f64(*b);
    }
    w.u32(forest.trees.len() as u32);
    for tree in &forest.trees {
        w.u32(tree.nodes.len() as u32);
        for node in &tree.nodes {
            match node {
                Node::Split { test, left, right } => {
                    w.u8(0);
                    match test.probe {
                        Probe::Depth { u, v } => {
                            w.u8(0);
                            w.vec3(u);
                            w.vec3(v);
                        }
                        Probe::Joint { joint, u, v } => {
                            w.u8(1);
                            w.u32(joint);
                            w.vec3(u);
                            w.vec3(v);
                        }
                        Probe::Axis { index } => {
                            w.u8(2);
                            w.u32(index);
                        }
                        Probe::Residual { joint, u } => {
                            w.u8(3);
                            w.u32(joint);
                            w.vec3(u);
                        }
                    }
                    w.f64(test.threshold);
                    w.u32(*left);
                    w.u32(*right);
                }
                Node::Leaf(leaf) => {
                    w.u8(1);
                    w.u32(leaf.count);
                    let rows = if forest.dim == 0 { 0 } else { leaf.votes.len() / forest.dim };
                    w.u32(rows as u32);
                    for m in &leaf.mean {
                        w.f64(*m);
                    }
                    for v in &leaf.votes {
                        w.f64(*v);
                    }
                }
            }
        }
    }
    w.0
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::CorruptStream)?;
        let s = self.buf.get(self.pos..end).ok_or(CodecError::CorruptStream)?;
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn vec3(&mut self) -> Result<Vec3, CodecError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
    /// A count of items that each need at least `min_bytes` more input.
    fn count(&mut self, min_bytes: usize) -> Result<usize, CodecError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_bytes) > self.buf.len() - self.pos {
            return Err(CodecError::CorruptStream);
        }
        Ok(n)
    }
}

pub fn decode(bytes: &[u8]) -> Result<Forest, CodecError> {
    let (forest, used) = decode_prefix(bytes)?;
    if used != bytes.len() {
        return Err(CodecError::CorruptStream);
    }
    Ok(forest)
}

/// Decodes one forest from the front of `bytes`, returning the number of
/// bytes consumed.
pub fn decode_prefix(bytes: &[u8]) -> Result<(Forest, usize), CodecError> {
    use CodecError::CorruptStream;
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CorruptStream);
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(CodecError::VersionMismatch { found: version });
    }
    let kind = ForestKind::from_tag(r.u8()?).ok_or(CorruptStream)?;
    let mut cfg = [0usize; 5];
    for c in cfg.iter_mut() {
        *c = r.u32()? as usize;
    }
    let energy = match r.u8()? {
        0 => EnergyMode::Variance,
        1 => EnergyMode::Literal,
        _ => return Err(CorruptStream),
    };
    let bootstrap = match r.u8()? {
        0 => false,
        1 => true,
        _ => return Err(CorruptStream),
    };
    let config = TrainConfig {
        n_trees: cfg[0],
        max_depth: cfg[1],
        features_per_node: cfg[2],
        thresholds: cfg[3],
        min_examples: cfg[4],
        energy,
        bootstrap,
    };
    let dim = r.count(8)?;
    let bandwidth = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let tree_count = r.count(4)?;
    let mut trees = Vec::with_capacity(tree_count);
    for _ in 0..tree_count {
        let node_count = r.count(1)?;
        if node_count == 0 {
            return Err(CorruptStream);
        }
        let mut nodes = Vec::with_capacity(node_count);
        for id in 0..node_count {
            let node = match r.u8()? {
                0 => {
                    let probe = match r.u8()? {
                        0 => Probe::Depth { u: r.vec3()?, v: r.vec3()? },
                        1 => Probe::Joint { joint: r.u32()?, u: r.vec3()?, v: r.vec3()? },
                        2 => Probe::Axis { index: r.u32()? },
                        3 => Probe::Residual { joint: r.u32()?, u: r.vec3()? },
                        _ => return Err(CorruptStream),
                    };
                    let threshold = r.f64()?;
                    let (left, right) = (r.u32()?, r.u32()?);
                    // children strictly after their parent rules out cycles
                    for c in [left, right] {
                        if c as usize <= id || c as usize >= node_count {
                            return Err(CorruptStream);
                        }
                    }
                    Node::Split { test: BinaryTest { probe, threshold }, left, right }
                }
                1 => {
                    let count = r.u32()?;
                    let rows = r.count(8 * dim.max(1))?;
                    let mean = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
                    let votes = (0..rows * dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
                    Node::Leaf(Leaf { mean, votes, count })
                }
                _ => return Err(CorruptStream),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes });
    }
    Ok((Forest { kind, config, dim, bandwidth, trees }, r.pos))
}
