//! Greedy depth-first tree induction.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{default_bandwidth, BinaryTest, EnergyMode, Forest, ForestKind, Leaf, Node, Probe, TrainConfig, Tree};
use crate::math;
use crate::rng::{stream, StreamRng};

/// Labelled examples whose features are computed on demand.
pub trait TrainingSet: Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn label_dim(&self) -> usize;
    fn label(&self, i: usize) -> &[f64];
    fn feature(&self, i: usize, probe: &Probe) -> f64;
}

/// Draws candidate probes for a node.
pub trait ProbeSampler: Sync {
    fn sample(&self, rng: &mut StreamRng) -> Probe;
}

impl<F: Fn(&mut StreamRng) -> Probe + Sync> ProbeSampler for F {
    fn sample(&self, rng: &mut StreamRng) -> Probe {
        self(rng)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrainStats {
    pub nodes: usize,
    pub leaves: usize,
    /// Nodes forced to become leaves because every candidate probe took a
    /// single value over the node.
    pub degenerate_nodes: usize,
    pub max_depth: usize,
}

impl TrainStats {
    fn merge(&mut self, o: &TrainStats) {
        self.nodes += o.nodes;
        self.leaves += o.leaves;
        self.degenerate_nodes += o.degenerate_nodes;
        self.max_depth = self.max_depth.max(o.max_depth);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice {
    /// Position of the winning probe in the candidate list.
    pub probe_index: usize,
    pub probe: Probe,
    pub threshold: f64,
    pub gain: f64,
}

/// `E(S)` of a flattened label set, computed in two passes.
pub fn node_energy(labels: &[f64], dim: usize, mode: EnergyMode) -> f64 {
    let n = labels.len() / dim;
    let mut sum = vec![0.0; dim];
    for y in labels.chunks_exact(dim) {
        for (s, v) in sum.iter_mut().zip(y) {
            *s += v;
        }
    }
    match mode {
        EnergyMode::Literal => math::sqrt(sum.iter().map(|s| s * s).sum()),
        EnergyMode::Variance => {
            if n == 0 {
                return 0.0;
            }
            let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
            labels
                .chunks_exact(dim)
                .map(|y| y.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .sum()
        }
    }
}

/// `I = E(S) − (|S_l|/|S|) E(S_l) − (|S_r|/|S|) E(S_r)` by direct evaluation.
pub fn split_gain(left: &[f64], right: &[f64], dim: usize, mode: EnergyMode) -> f64 {
    let nl = (left.len() / dim) as f64;
    let nr = (right.len() / dim) as f64;
    let n = nl + nr;
    let mut all = Vec::with_capacity(left.len() + right.len());
    all.extend_from_slice(left);
    all.extend_from_slice(right);
    node_energy(&all, dim, mode) - nl / n * node_energy(left, dim, mode) - nr / n * node_energy(right, dim, mode)
}

/// `min + (max − min) k / (count + 1)` for `k = 1..=count`.
pub(crate) fn thresholds(min: f64, max: f64, count: usize, out: &mut Vec<f64>) {
    out.clear();
    let span = max - min;
    for k in 1..=count {
        out.push(min + span * k as f64 / (count + 1) as f64);
    }
}

/// Energy of a label subset from its count, (centred) sum and sum of
/// squared norms.
#[inline]
fn energy(mode: EnergyMode, n: f64, sum: &[f64], sq: f64) -> f64 {
    let s2: f64 = sum.iter().map(|s| s * s).sum();
    match mode {
        EnergyMode::Variance => (sq - s2 / n).max(0.0),
        EnergyMode::Literal => math::sqrt(s2),
    }
}

/// Scratch buffers reused across nodes.
#[derive(Default)]
struct Scratch {
    phi: Vec<f64>,
    ts: Vec<f64>,
    counts: Vec<usize>,
    sums: Vec<f64>,
    sqs: Vec<f64>,
    left_sum: Vec<f64>,
    right_sum: Vec<f64>,
    centred: Vec<f64>,
    sq_rows: Vec<f64>,
    /// `(fast gain, probe index, threshold)` of splits close to the best.
    near: Vec<(f64, usize, f64)>,
    left: Vec<f64>,
    right: Vec<f64>,
}

/// The highest-gain split of the examples `indices` among `probes`, each
/// tried at `config.thresholds` thresholds evenly spread over its observed
/// range. Returns `None` when no split has positive gain; the flag reports
/// whether every probe was constant over the node.
pub fn best_split<T: TrainingSet + ?Sized>(
    data: &T,
    indices: &[usize],
    probes: &[Probe],
    config: &TrainConfig,
) -> (Option<SplitChoice>, bool) {
    best_split_with(data, indices, probes, config, &mut Scratch::default())
}

fn best_split_with<T: TrainingSet + ?Sized>(
    data: &T,
    indices: &[usize],
    probes: &[Probe],
    config: &TrainConfig,
    s: &mut Scratch,
) -> (Option<SplitChoice>, bool) {
    let dim = data.label_dim();
    let n = indices.len();
    let nf = n as f64;
    let lambda = config.thresholds;

    // labels, centred on the node mean when the energy is translation invariant
    let mut centre = vec![0.0; dim];
    if config.energy == EnergyMode::Variance {
        for &i in indices {
            for (c, v) in centre.iter_mut().zip(data.label(i)) {
                *c += v;
            }
        }
        centre.iter_mut().for_each(|c| *c /= nf);
    }
    s.centred.clear();
    s.sq_rows.clear();
    let mut total_sum = vec![0.0; dim];
    let mut total_sq = 0.0;
    for &i in indices {
        let mut sq = 0.0;
        for (k, v) in data.label(i).iter().enumerate() {
            let y = v - centre[k];
            s.centred.push(y);
            total_sum[k] += y;
            sq += y * y;
        }
        s.sq_rows.push(sq);
        total_sq += sq;
    }
    let parent_energy = energy(config.energy, nf, &total_sum, total_sq);

    // histogram sums are accumulated in a different order than a direct
    // evaluation, so near-ties are rescored with `split_gain` below
    let tol = 1e-9 * parent_energy.abs().max(f64::MIN_POSITIVE);
    let mut best_gain = 0.0;
    let mut all_constant = true;
    s.near.clear();
    s.phi.resize(n, 0.0);
    s.left_sum.resize(dim, 0.0);
    s.right_sum.resize(dim, 0.0);
    for (pi, probe) in probes.iter().enumerate() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (k, &i) in indices.iter().enumerate() {
            let v = data.feature(i, probe);
            s.phi[k] = v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            continue;
        }
        all_constant = false;
        thresholds(lo, hi, lambda, &mut s.ts);
        s.counts.clear();
        s.counts.resize(lambda + 1, 0);
        s.sums.clear();
        s.sums.resize((lambda + 1) * dim, 0.0);
        s.sqs.clear();
        s.sqs.resize(lambda + 1, 0.0);
        let scale = (lambda + 1) as f64 / (hi - lo);
        for k in 0..n {
            let phi = s.phi[k];
            // b = number of thresholds strictly below phi
            let mut b = (math::floor((phi - lo) * scale).max(0.0) as usize).min(lambda);
            while b < lambda && phi > s.ts[b] {
                b += 1;
            }
            while b > 0 && !(phi > s.ts[b - 1]) {
                b -= 1;
            }
            s.counts[b] += 1;
            s.sqs[b] += s.sq_rows[k];
            let row = &s.centred[k * dim..(k + 1) * dim];
            for (acc, y) in s.sums[b * dim..(b + 1) * dim].iter_mut().zip(row) {
                *acc += y;
            }
        }
        // threshold t goes left for bins t+1..=lambda
        s.left_sum.iter_mut().for_each(|v| *v = 0.0);
        let (mut nl, mut sql) = (0usize, 0.0);
        for t in (0..lambda).rev() {
            let b = t + 1;
            nl += s.counts[b];
            sql += s.sqs[b];
            for (acc, y) in s.left_sum.iter_mut().zip(&s.sums[b * dim..(b + 1) * dim]) {
                *acc += y;
            }
            if nl == 0 || nl == n {
                continue;
            }
            let nr = n - nl;
            for k in 0..dim {
                s.right_sum[k] = total_sum[k] - s.left_sum[k];
            }
            let (nlf, nrf) = (nl as f64, nr as f64);
            let gain = parent_energy
                - nlf / nf * energy(config.energy, nlf, &s.left_sum, sql)
                - nrf / nf * energy(config.energy, nrf, &s.right_sum, total_sq - sql);
            if gain > best_gain - tol && gain > 0.0 {
                s.near.push((gain, pi, s.ts[t]));
                best_gain = best_gain.max(gain);
            }
        }
    }
    let mut best: Option<SplitChoice> = None;
    let mut near = core::mem::take(&mut s.near);
    near.retain(|c| c.0 >= best_gain - tol);
    for &(_, pi, threshold) in &near {
        let probe = probes[pi];
        s.left.clear();
        s.right.clear();
        for &i in indices {
            let side = if data.feature(i, &probe) > threshold { &mut s.left } else { &mut s.right };
            side.extend_from_slice(data.label(i));
        }
        let gain = split_gain(&s.left, &s.right, dim, config.energy);
        if gain > 0.0 && best.as_ref().map_or(true, |b| gain > b.gain) {
            best = Some(SplitChoice { probe_index: pi, probe, threshold, gain });
        }
    }
    s.near = near;
    (best, all_constant)
}

struct Builder<'a, T: TrainingSet + ?Sized, S: ProbeSampler + ?Sized> {
    data: &'a T,
    sampler: &'a S,
    config: &'a TrainConfig,
    keep_votes: bool,
    rng: StreamRng,
    nodes: Vec<Node>,
    stats: TrainStats,
    scratch: Scratch,
    probes: Vec<Probe>,
}

impl<T: TrainingSet + ?Sized, S: ProbeSampler + ?Sized> Builder<'_, T, S> {
    fn leaf(&mut self, indices: &[usize], depth: usize) -> Node {
        let dim = self.data.label_dim();
        let mut mean = vec![0.0; dim];
        let mut votes = Vec::new();
        for &i in indices {
            let y = self.data.label(i);
            for (m, v) in mean.iter_mut().zip(y) {
                *m += v;
            }
            if self.keep_votes {
                votes.extend_from_slice(y);
            }
        }
        if !indices.is_empty() {
            mean.iter_mut().for_each(|m| *m /= indices.len() as f64);
        }
        self.stats.leaves += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        Node::Leaf(Leaf { mean, votes, count: indices.len() as u32 })
    }

    fn build(&mut self, indices: Vec<usize>, depth: usize) -> u32 {
        let id = self.nodes.len();
        self.stats.nodes += 1;
        self.nodes.push(Node::Leaf(Leaf { mean: Vec::new(), votes: Vec::new(), count: 0 }));
        if indices.len() < self.config.min_examples.max(2) || depth >= self.config.max_depth {
            self.nodes[id] = self.leaf(&indices, depth);
            return id as u32;
        }
        self.probes.clear();
        for _ in 0..self.config.features_per_node {
            let p = self.sampler.sample(&mut self.rng);
            self.probes.push(p);
        }
        let (choice, degenerate) = best_split_with(self.data, &indices, &self.probes, self.config, &mut self.scratch);
        let Some(choice) = choice else {
            if degenerate {
                self.stats.degenerate_nodes += 1;
            }
            self.nodes[id] = self.leaf(&indices, depth);
            return id as u32;
        };
        let test = BinaryTest { probe: choice.probe, threshold: choice.threshold };
        let (left, right): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| test.goes_left(self.data.feature(i, &test.probe)));
        drop(indices);
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[id] = Node::Split { test, left: l, right: r };
        id as u32
    }
}

/// Grows one tree on the examples `indices` (repeats allowed).
pub fn train_tree<T: TrainingSet + ?Sized, S: ProbeSampler + ?Sized>(
    data: &T,
    indices: Vec<usize>,
    sampler: &S,
    config: &TrainConfig,
    keep_votes: bool,
    rng: StreamRng,
) -> (Tree, TrainStats) {
    let mut b = Builder {
        data,
        sampler,
        config,
        keep_votes,
        rng,
        nodes: Vec::new(),
        stats: TrainStats::default(),
        scratch: Scratch::default(),
        probes: Vec::with_capacity(config.features_per_node),
    };
    b.build(indices, 0);
    (Tree { nodes: b.nodes }, b.stats)
}

/// Grows `config.n_trees` trees; tree `t` draws from sub-stream `t` of
/// `seed`. Trees are grown in parallel with the `parallel` feature, with
/// identical results.
pub fn train_forest<T: TrainingSet + ?Sized, S: ProbeSampler + ?Sized>(
    kind: ForestKind,
    config: &TrainConfig,
    data: &T,
    sampler: &S,
    seed: u64,
) -> (Forest, TrainStats) {
    let (f, s, _) = train_forest_with_bags(kind, config, data, sampler, seed);
    (f, s)
}

/// [`train_forest`] that also reports, per tree, which examples were
/// drawn into its bootstrap sample.
pub fn train_forest_with_bags<T: TrainingSet + ?Sized, S: ProbeSampler + ?Sized>(
    kind: ForestKind,
    config: &TrainConfig,
    data: &T,
    sampler: &S,
    seed: u64,
) -> (Forest, TrainStats, Vec<Vec<bool>>) {
    let n = data.len();
    let dim = data.label_dim();
    let keep_votes = kind == ForestKind::IkRegressor;
    let grow = |t: usize| {
        let mut rng = stream(seed, "forest-tree", &[t as u64]);
        let indices: Vec<usize> = if config.bootstrap && n > 0 {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut bag = vec![false; n];
        for &i in &indices {
            bag[i] = true;
        }
        let (tree, stats) = train_tree(data, indices, sampler, config, keep_votes, rng);
        (tree, stats, bag)
    };
    #[cfg(feature = "parallel")]
    let grown: Vec<(Tree, TrainStats, Vec<bool>)> = {
        use rayon::prelude::*;
        (0..config.n_trees).into_par_iter().map(grow).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let grown: Vec<(Tree, TrainStats, Vec<bool>)> = (0..config.n_trees).map(grow).collect();

    let mut stats = TrainStats::default();
    let mut trees = Vec::with_capacity(grown.len());
    let mut bags = Vec::with_capacity(grown.len());
    for (t, s, b) in grown {
        stats.merge(&s);
        trees.push(t);
        bags.push(b);
    }
    (Forest { kind, config: *config, dim, bandwidth: default_bandwidth(kind, dim), trees }, stats, bags)
}
