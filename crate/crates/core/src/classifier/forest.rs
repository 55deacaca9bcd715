//! Random forest of Gini-split decision trees over sparse count features.
//!
//! Each tree is grown on a bootstrap sample to purity (or until fewer than
//! two instances remain). At every node `ceil(sqrt(d))` features are drawn
//! at random; if none of them gives a positive impurity decrease the search
//! keeps drawing features present in the node until one does.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Prediction};
use crate::error::{Error, Result};
use crate::rng;
use crate::text::FeatureVector;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// `value(feature) <= threshold` goes left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        distribution: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// A tree consisting of one leaf.
    pub fn leaf(distribution: [f64; 3]) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { distribution }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn distribution(&self, v: &FeatureVector) -> &[f64; 3] {
        self.distribution_by(|f| v.get(f))
    }

    fn distribution_by(&self, value: impl Fn(u32) -> f64) -> &[f64; 3] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if value(*feature) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Model("empty tree".into()));
        }
        for node in &self.nodes {
            match node {
                Node::Leaf { distribution } => {
                    let s: f64 = distribution.iter().sum();
                    if (s - 1.0).abs() > 1e-9 || distribution.iter().any(|p| *p < 0.0) {
                        return Err(Error::Model("leaf distribution does not sum to 1".into()));
                    }
                }
                Node::Split { left, right, .. } => {
                    if *left as usize >= self.nodes.len() || *right as usize >= self.nodes.len() {
                        return Err(Error::Model("split child out of range".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub trees: Vec<DecisionTree>,
    pub n_trees: usize,
    /// Features drawn per node.
    pub feature_subsample: usize,
    pub seed: u64,
}

impl RfModel {
    /// Mean of the trees' leaf distributions.
    pub fn predict(&self, v: &FeatureVector) -> Prediction {
        let mut mean = [0.0; 3];
        for tree in &self.trees {
            let d = tree.distribution(v);
            for c in 0..3 {
                mean[c] += d[c];
            }
        }
        let n = self.trees.len() as f64;
        Prediction::from_probabilities(mean.map(|m| m / n))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trees.is_empty() || self.trees.len() != self.n_trees {
            return Err(Error::Model("tree count mismatch".into()));
        }
        self.trees.iter().try_for_each(DecisionTree::validate)
    }
}

pub fn train_rf(data: &LabeledDataset, n_trees: usize, seed: u64) -> Result<RfModel> {
    if n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let d = data.n_features();
    let feature_subsample = ((d as f64).sqrt().ceil() as usize).max(1);
    let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); d];
    for (row, v) in data.vectors.iter().enumerate() {
        for (id, value) in v.iter() {
            postings[id as usize].push((row as u32, value));
        }
    }
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            TreeBuilder::new(data, &postings, feature_subsample, &mut rng).build()
        })
        .collect();
    Ok(RfModel {
        trees,
        n_trees,
        feature_subsample,
        seed,
    })
}

/// One instance of the bootstrap sample: dataset row and draw multiplicity.
#[derive(Clone, Copy)]
struct Draw {
    row: u32,
    weight: u32,
}

#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    class: u8,
    weight: u32,
}

struct Candidate {
    gain: f64,
    feature: u32,
    threshold: f64,
}

struct TreeBuilder<'a> {
    data: &'a LabeledDataset,
    /// Feature id → `(row, value)` for every row containing it, by row.
    postings: &'a [Vec<(u32, f64)>],
    k: usize,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
    /// Feature id → bucket slot for the node being split (`u32::MAX` = none).
    slot_of: Vec<u32>,
    /// Row → index of the node it currently sits in (`u32::MAX` = out of bag).
    node_of: Vec<u32>,
    /// Row → bootstrap multiplicity.
    weight: Vec<u32>,
}

impl<'a> TreeBuilder<'a> {
    fn new(data: &'a LabeledDataset, postings: &'a [Vec<(u32, f64)>], k: usize, rng: &'a mut ChaCha8Rng) -> Self {
        TreeBuilder {
            data,
            postings,
            k,
            rng,
            nodes: Vec::new(),
            slot_of: vec![u32::MAX; data.n_features()],
            node_of: vec![u32::MAX; data.len()],
            weight: vec![0; data.len()],
        }
    }

    fn build(mut self) -> DecisionTree {
        let n = self.data.len();
        let mut multiplicity = vec![0u32; n];
        for _ in 0..n {
            multiplicity[self.rng.random_range(0..n)] += 1;
        }
        let root: Vec<Draw> = multiplicity
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(row, &weight)| Draw {
                row: row as u32,
                weight,
            })
            .collect();

        self.nodes.push(Node::Leaf { distribution: [0.0; 3] });
        let mut stack = vec![(0usize, root)];
        while let Some((at, draws)) = stack.pop() {
            for d in &draws {
                self.node_of[d.row as usize] = at as u32;
                self.weight[d.row as usize] = d.weight;
            }
            let counts = self.class_weights(&draws);
            let total: f64 = counts.iter().sum();
            let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
            let split = if pure || total < 2.0 {
                None
            } else {
                self.best_split(&draws, &counts)
            };
            match split {
                None => {
                    self.nodes[at] = Node::Leaf {
                        distribution: counts.map(|c| c / total),
                    };
                }
                Some(best) => {
                    let (left, right): (Vec<Draw>, Vec<Draw>) = draws.iter().partition(|d| {
                        self.data.vectors[d.row as usize].get(best.feature) <= best.threshold
                    });
                    let li = self.nodes.len();
                    self.nodes.push(Node::Leaf { distribution: [0.0; 3] });
                    self.nodes.push(Node::Leaf { distribution: [0.0; 3] });
                    self.nodes[at] = Node::Split {
                        feature: best.feature,
                        threshold: best.threshold,
                        left: li as u32,
                        right: li as u32 + 1,
                    };
                    stack.push((li + 1, right));
                    stack.push((li, left));
                }
            }
        }
        DecisionTree { nodes: self.nodes }
    }

    fn class_weights(&self, draws: &[Draw]) -> [f64; 3] {
        let mut counts = [0.0; 3];
        for d in draws {
            counts[self.data.labels[d.row as usize].index()] += d.weight as f64;
        }
        counts
    }

    /// Nonzero entries of `feature` among the rows of node `at`, by row.
    fn posting_bucket(&self, feature: u32, at: u32) -> Vec<Entry> {
        self.postings[feature as usize]
            .iter()
            .filter(|&&(row, _)| self.node_of[row as usize] == at)
            .map(|&(row, value)| Entry {
                value,
                class: self.data.labels[row as usize].index() as u8,
                weight: self.weight[row as usize],
            })
            .collect()
    }

    /// Nonzero entries of `features` among `draws`, one bucket per feature.
    fn gather(&mut self, draws: &[Draw], features: &[u32]) -> Vec<Vec<Entry>> {
        for (slot, &f) in features.iter().enumerate() {
            self.slot_of[f as usize] = slot as u32;
        }
        let mut buckets = vec![Vec::new(); features.len()];
        for d in draws {
            let class = self.data.labels[d.row as usize].index() as u8;
            for (id, value) in self.data.vectors[d.row as usize].iter() {
                let slot = self.slot_of[id as usize];
                if slot != u32::MAX {
                    buckets[slot as usize].push(Entry {
                        value,
                        class,
                        weight: d.weight,
                    });
                }
            }
        }
        for &f in features {
            self.slot_of[f as usize] = u32::MAX;
        }
        buckets
    }

    fn best_split(&mut self, draws: &[Draw], counts: &[f64; 3]) -> Option<Candidate> {
        let d = self.data.n_features();
        let k = self.k.min(d);
        let sampled = sample_features(self.rng, d, k);
        let scan_cost: usize = draws.iter().map(|d| self.data.vectors[d.row as usize].nnz()).sum();
        let posting_cost: usize = sampled.iter().map(|&f| self.postings[f as usize].len()).sum();
        let buckets = if posting_cost < scan_cost {
            let at = self.node_of[draws[0].row as usize];
            sampled.iter().map(|&f| self.posting_bucket(f, at)).collect()
        } else {
            self.gather(draws, &sampled)
        };
        let mut best: Option<Candidate> = None;
        for (&feature, bucket) in sampled.iter().zip(buckets) {
            consider(&mut best, evaluate_feature(feature, bucket, counts));
        }
        if best.is_some() {
            return best;
        }

        // None of the drawn features separates this node: keep drawing from
        // the features that actually occur here until one does.
        let mut present: Vec<u32> = draws
            .iter()
            .flat_map(|d| self.data.vectors[d.row as usize].iter().map(|(id, _)| id))
            .collect();
        present.sort_unstable();
        present.dedup();
        sampled.iter().for_each(|f| {
            if let Ok(pos) = present.binary_search(f) {
                present.remove(pos);
            }
        });
        present.shuffle(self.rng);
        let buckets = self.gather(draws, &present);
        for (&feature, bucket) in present.iter().zip(buckets) {
            consider(&mut best, evaluate_feature(feature, bucket, counts));
            if best.is_some() {
                break;
            }
        }
        best
    }
}

/// `k` distinct feature ids drawn uniformly from `0..d`.
fn sample_features(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<u32> {
    if 2 * k > d {
        let mut all: Vec<u32> = (0..d as u32).collect();
        let (chosen, _) = all.partial_shuffle(rng, k);
        return chosen.to_vec();
    }
    let mut seen = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let f = rng.random_range(0..d as u32);
        if seen.insert(f) {
            out.push(f);
        }
    }
    out
}

fn consider(best: &mut Option<Candidate>, candidate: Option<Candidate>) {
    if let Some(c) = candidate {
        if best.as_ref().is_none_or(|b| c.gain > b.gain) {
            *best = Some(c);
        }
    }
}

fn gini(counts: &[f64; 3], total: f64) -> f64 {
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// Best threshold on one feature; `bucket` holds the node's nonzero values,
/// every other instance of the node has value 0.
fn evaluate_feature(feature: u32, mut bucket: Vec<Entry>, counts: &[f64; 3]) -> Option<Candidate> {
    if bucket.is_empty() {
        return None;
    }
    let total: f64 = counts.iter().sum();
    let parent = gini(counts, total);
    bucket.sort_by(|a, b| a.value.total_cmp(&b.value));

    let mut left = *counts;
    for e in &bucket {
        left[e.class as usize] -= e.weight as f64;
    }
    let mut left_total: f64 = left.iter().sum();
    let mut prev = 0.0;
    let mut best: Option<Candidate> = None;
    let mut i = 0;
    while i < bucket.len() {
        let value = bucket[i].value;
        if left_total > 0.0 {
            let right_total = total - left_total;
            let right = [counts[0] - left[0], counts[1] - left[1], counts[2] - left[2]];
            let gain = parent
                - (left_total / total) * gini(&left, left_total)
                - (right_total / total) * gini(&right, right_total);
            if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = prev + (value - prev) / 2.0;
                best = Some(Candidate {
                    gain,
                    feature,
                    threshold: if mid < value { mid } else { prev },
                });
            }
        }
        while i < bucket.len() && bucket[i].value == value {
            left[bucket[i].class as usize] += bucket[i].weight as f64;
            left_total += bucket[i].weight as f64;
            i += 1;
        }
        prev = value;
    }
    best
}
