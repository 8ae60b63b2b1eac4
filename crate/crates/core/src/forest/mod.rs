//! Random forests over binary tests.
//!
//! One implementation serves three predictors:
//! * [`ForestKind::IkRegressor`]: depth-probe tests, twist-valued leaves,
//!   mean-shift over the pooled leaf votes;
//! * [`ForestKind::Metric`]: multi-joint depth-probe tests, scalar leaves,
//!   mean over trees;
//! * [`ForestKind::ActionClassifier`]: axis-aligned tests on a feature
//!   vector, class-histogram leaves, argmax of the averaged histogram.
//!
//! An example goes to the left child iff its feature value exceeds the
//! test threshold.

use alloc::vec;
use alloc::vec::Vec;

use crate::lie::Vec3;
use crate::math;

mod codec;
mod train;

pub use codec::{decode, decode_prefix, encode, CodecError, FORMAT_VERSION, MAGIC};
pub use train::{
    best_split, node_energy, split_gain, train_forest, train_forest_with_bags, train_tree, ProbeSampler, SplitChoice, TrainStats, TrainingSet,
};

/// Default mean-shift bandwidth on rotational twist coordinates, rad.
pub const BANDWIDTH_OMEGA: f64 = 0.1;
/// Default mean-shift bandwidth on translational twist coordinates, mm.
pub const BANDWIDTH_NU: f64 = 5.0;
/// Mean-shift iteration cap.
pub const MEAN_SHIFT_ITERATIONS: usize = 20;

/// What a split test measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe {
    /// Depth difference between offsets `u` and `v` attached to the joint
    /// being regressed.
    Depth { u: Vec3, v: Vec3 },
    /// Depth difference between offsets attached to a given joint.
    Joint { joint: u32, u: Vec3, v: Vec3 },
    /// One coordinate of a feature vector.
    Axis { index: u32 },
    /// Observed depth at `x + R u` minus the z of that point, for the
    /// given joint.
    Residual { joint: u32, u: Vec3 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryTest {
    pub probe: Probe,
    pub threshold: f64,
}

impl BinaryTest {
    #[inline]
    pub fn goes_left(&self, phi: f64) -> bool {
        phi > self.threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestKind {
    IkRegressor,
    Metric,
    ActionClassifier,
}

impl ForestKind {
    pub(crate) fn tag(self) -> u8 {
        match self {
            ForestKind::IkRegressor => 0,
            ForestKind::Metric => 1,
            ForestKind::ActionClassifier => 2,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(ForestKind::IkRegressor),
            1 => Some(ForestKind::Metric),
            2 => Some(ForestKind::ActionClassifier),
            _ => None,
        }
    }
}

/// How node impurity is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EnergyMode {
    /// `Σᵢ ‖yᵢ − ȳ‖²`.
    #[default]
    Variance,
    /// `Σᵢ ‖ȳ‖ = ‖Σᵢ yᵢ‖`, the label-mean magnitude summed over the node.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub n_trees: usize,
    /// Maximum tree depth `L` (the root is depth 0).
    pub max_depth: usize,
    /// Candidate probes drawn per node (`m`).
    pub features_per_node: usize,
    /// Thresholds tried per probe (`|Λ|`).
    pub thresholds: usize,
    /// Nodes with fewer examples become leaves (`l_n`).
    pub min_examples: usize,
    pub energy: EnergyMode,
    /// Draw each tree's examples with replacement.
    pub bootstrap: bool,
}

impl TrainConfig {
    pub const fn new(n_trees: usize, max_depth: usize) -> Self {
        TrainConfig {
            n_trees,
            max_depth,
            features_per_node: 8000,
            thresholds: 20,
            min_examples: 5,
            energy: EnergyMode::Variance,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    /// Mean label of the examples that reached this leaf.
    pub mean: Vec<f64>,
    /// Every label that reached the leaf, flattened; kept for regressors
    /// that vote, empty otherwise.
    pub votes: Vec<f64>,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split { test: BinaryTest, left: u32, right: u32 },
    Leaf(Leaf),
}

/// Arena of nodes; node 0 is the root and children follow their parent.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// The leaf reached by an example whose probes evaluate via `eval`.
    #[inline]
    pub fn route<F: FnMut(&Probe) -> f64>(&self, mut eval: F) -> &Leaf {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split { test, left, right } => {
                    i = if test.goes_left(eval(&test.probe)) { *left as usize } else { *right as usize };
                }
                Node::Leaf(leaf) => return leaf,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Leaf> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf(l) => Some(l),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    pub kind: ForestKind,
    pub config: TrainConfig,
    /// Label dimension (6 for twists, 1 for the metric, class count for
    /// the classifier).
    pub dim: usize,
    /// Per-coordinate mean-shift bandwidth; `dim` entries.
    pub bandwidth: Vec<f64>,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// A forest with no trees.
    pub fn empty(kind: ForestKind, config: TrainConfig, dim: usize) -> Forest {
        Forest { kind, config, dim, bandwidth: default_bandwidth(kind, dim), trees: Vec::new() }
    }

    /// One tree holding a single leaf with the given value.
    pub fn constant(kind: ForestKind, config: TrainConfig, value: Vec<f64>) -> Forest {
        let dim = value.len();
        let votes = if kind == ForestKind::IkRegressor { value.clone() } else { Vec::new() };
        let leaf = Leaf { mean: value, votes, count: 1 };
        Forest {
            kind,
            config,
            dim,
            bandwidth: default_bandwidth(kind, dim),
            trees: vec![Tree { nodes: vec![Node::Leaf(leaf)] }],
        }
    }

    /// Twist-valued prediction: the mean-shift mode of the votes pooled
    /// from every reached leaf, started at their mean.
    pub fn predict_regression<F: FnMut(&Probe) -> f64>(&self, eval: F) -> Vec<f64> {
        self.predict_regression_subset(|_| true, eval)
    }

    /// [`Forest::predict_regression`] restricted to the trees `t` for which
    /// `use_tree(t)` holds; all trees when none qualifies.
    pub fn predict_regression_subset<U: Fn(usize) -> bool, F: FnMut(&Probe) -> f64>(
        &self,
        use_tree: U,
        mut eval: F,
    ) -> Vec<f64> {
        let any = (0..self.trees.len()).any(&use_tree);
        let mut groups: Vec<&[f64]> = Vec::with_capacity(self.trees.len());
        for (t, tree) in self.trees.iter().enumerate() {
            if any && !use_tree(t) {
                continue;
            }
            let leaf = tree.route(&mut eval);
            groups.push(if leaf.votes.is_empty() { &leaf.mean } else { &leaf.votes });
        }
        mean_shift_groups(&groups, self.dim, &self.bandwidth)
    }

    /// Mean over trees of the reached leaf means (first coordinate),
    /// clamped at zero.
    pub fn predict_scalar<F: FnMut(&Probe) -> f64>(&self, eval: F) -> f64 {
        self.predict_mean(eval).max(0.0)
    }

    /// Average of the reached leaf means of the first label coordinate.
    pub fn predict_mean<F: FnMut(&Probe) -> f64>(&self, mut eval: F) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.trees.iter().map(|t| t.route(&mut eval).mean[0]).sum();
        sum / self.trees.len() as f64
    }

    /// Averaged class histogram and its argmax (lowest id on ties).
    pub fn predict_class<F: FnMut(&Probe) -> f64>(&self, mut eval: F) -> (usize, Vec<f64>) {
        let mut hist = vec![0.0; self.dim];
        for tree in &self.trees {
            for (h, p) in hist.iter_mut().zip(&tree.route(&mut eval).mean) {
                *h += p;
            }
        }
        if !self.trees.is_empty() {
            let k = 1.0 / self.trees.len() as f64;
            for h in hist.iter_mut() {
                *h *= k;
            }
        }
        let mut best = 0;
        for (c, h) in hist.iter().enumerate() {
            if *h > hist[best] {
                best = c;
            }
        }
        (best, hist)
    }
}

pub(crate) fn default_bandwidth(kind: ForestKind, dim: usize) -> Vec<f64> {
    if kind == ForestKind::IkRegressor && dim == 6 {
        vec![BANDWIDTH_OMEGA, BANDWIDTH_OMEGA, BANDWIDTH_OMEGA, BANDWIDTH_NU, BANDWIDTH_NU, BANDWIDTH_NU]
    } else {
        vec![1.0; dim]
    }
}

/// Mode of the Gaussian kernel density of `points` (flattened, `dim` per
/// point) found by mean-shift from the points' mean. Stops after
/// [`MEAN_SHIFT_ITERATIONS`] or when a step moves less than 1e-6 bandwidths.
pub fn mean_shift(points: &[f64], dim: usize, bandwidth: &[f64]) -> Vec<f64> {
    mean_shift_groups(&[points], dim, bandwidth)
}

/// [`mean_shift`] over the concatenation of `groups`.
pub(crate) fn mean_shift_groups(groups: &[&[f64]], dim: usize, bandwidth: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    if dim == 0 {
        return x;
    }
    let n: usize = groups.iter().map(|g| g.len() / dim).sum();
    if n == 0 {
        return x;
    }
    for g in groups {
        for p in g.chunks_exact(dim) {
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi += pi;
            }
        }
    }
    for xi in x.iter_mut() {
        *xi /= n as f64;
    }
    if n == 1 {
        return x;
    }
    const STACK: usize = 64;
    let mut stack = [0.0; STACK];
    let mut heap = Vec::new();
    let need = 2 * dim + n;
    let buf: &mut [f64] = if need <= STACK {
        &mut stack[..need]
    } else {
        heap.resize(need, 0.0);
        &mut heap
    };
    let (inv_bw, rest) = buf.split_at_mut(dim);
    let (next, logw) = rest.split_at_mut(dim);
    for (i, b) in inv_bw.iter_mut().zip(bandwidth) {
        *i = 1.0 / b;
    }
    for _ in 0..MEAN_SHIFT_ITERATIONS {
        let mut max = f64::NEG_INFINITY;
        let mut i = 0;
        for g in groups {
            for p in g.chunks_exact(dim) {
                let mut d2 = 0.0;
                for k in 0..dim {
                    let z = (p[k] - x[k]) * inv_bw[k];
                    d2 += z * z;
                }
                logw[i] = -0.5 * d2;
                max = max.max(logw[i]);
                i += 1;
            }
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut total = 0.0;
        let mut i = 0;
        for g in groups {
            for p in g.chunks_exact(dim) {
                let w = math::exp(logw[i] - max);
                i += 1;
                total += w;
                for k in 0..dim {
                    next[k] += w * p[k];
                }
            }
        }
        let mut moved: f64 = 0.0;
        for k in 0..dim {
            let v = next[k] / total;
            moved = moved.max(((v - x[k]) * inv_bw[k]).abs());
            x[k] = v;
        }
        if moved < 1e-6 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(mean: Vec<f64>) -> Tree {
        Tree { nodes: vec![Node::Leaf(Leaf { mean, votes: Vec::new(), count: 1 })] }
    }

    #[test]
    fn mean_shift_identical_votes() {
        let v = [0.1, 0.2, 0.3, 1.0, 2.0, 3.0];
        let pts: Vec<f64> = v.iter().cycle().take(30).copied().collect();
        let bw = default_bandwidth(ForestKind::IkRegressor, 6);
        let m = mean_shift(&pts, 6, &bw);
        for (a, b) in m.iter().zip(v.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mean_shift_finds_major_cluster() {
        let mut pts = Vec::new();
        for i in 0..90 {
            pts.push(1.0 + 0.01 * (i % 7) as f64);
        }
        for i in 0..10 {
            pts.push(5.0 + 0.01 * (i % 3) as f64);
        }
        let m = mean_shift(&pts, 1, &[0.5]);
        assert!((m[0] - 1.03).abs() < 0.5);
    }

    #[test]
    fn class_tie_goes_to_smallest_id() {
        let f = Forest {
            kind: ForestKind::ActionClassifier,
            config: TrainConfig::new(2, 20),
            dim: 2,
            bandwidth: vec![1.0; 2],
            trees: vec![leaf(vec![0.6, 0.4]), leaf(vec![0.4, 0.6])],
        };
        let (c, h) = f.predict_class(|_| 0.0);
        assert_eq!(c, 0);
        assert_eq!(h[0], h[1]);
    }

    #[test]
    fn pure_leaf_class() {
        let f = Forest {
            kind: ForestKind::ActionClassifier,
            config: TrainConfig::new(1, 20),
            dim: 3,
            bandwidth: vec![1.0; 3],
            trees: vec![leaf(vec![0.0, 0.0, 1.0])],
        };
        assert_eq!(f.predict_class(|_| 0.0), (2, vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn scalar_is_clamped_mean() {
        let f = Forest {
            kind: ForestKind::Metric,
            config: TrainConfig::new(2, 15),
            dim: 1,
            bandwidth: vec![1.0],
            trees: vec![leaf(vec![2.0]), leaf(vec![4.0])],
        };
        assert_eq!(f.predict_scalar(|_| 0.0), 3.0);
        let neg = Forest { trees: vec![leaf(vec![-1.0])], ..f };
        assert_eq!(neg.predict_scalar(|_| 0.0), 0.0);
    }

    #[test]
    fn single_leaf_regression_is_leaf_mean() {
        let f = Forest::constant(ForestKind::IkRegressor, TrainConfig::new(1, 1), vec![0.0, 0.0, 0.2, 1.0, 0.0, 0.0]);
        assert_eq!(f.predict_regression(|_| 0.0), vec![0.0, 0.0, 0.2, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn routing_goes_left_above_threshold() {
        let t = BinaryTest { probe: Probe::Axis { index: 0 }, threshold: 1.0 };
        assert!(t.goes_left(1.5));
        assert!(!t.goes_left(1.0));
    }
}
