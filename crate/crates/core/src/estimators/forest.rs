//! Random-forest classifier over the five shape classes.
//!
//! Each tree is a Gini-impurity CART grown on a bootstrap sample with a
//! random feature subset at every split. Trees vote with the argmax of their
//! leaf counts; ties go to the lower class in both stages.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::domain::ShapeClass;
use crate::{seed, Error, Result};

const CLASSES: usize = ShapeClass::COUNT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Bootstrap sample size as a fraction of the training set.
    pub bootstrap_fraction: f64,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            bootstrap_fraction: 1.0,
            max_features: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; CLASSES],
    },
}

/// Tree stored as a node arena with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

fn argmax_lowest(counts: &[usize; CLASSES]) -> usize {
    let mut best = 0;
    for c in 1..CLASSES {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

impl DecisionTree {
    pub fn leaf(counts: [usize; CLASSES]) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { counts }],
        }
    }

    pub fn leaf_counts(&self, x: &[f64]) -> &[usize; CLASSES] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn vote(&self, x: &[f64]) -> usize {
        argmax_lowest(self.leaf_counts(x))
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::domain("empty tree"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = node
            {
                if *feature >= n_features
                    || !threshold.is_finite()
                    || *left <= i
                    || *right <= i
                    || *left >= n
                    || *right >= n
                {
                    return Err(Error::domain(format!("malformed split node {i}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

impl ForestModel {
    pub fn from_trees(n_features: usize, trees: Vec<DecisionTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::domain("forest has no trees"));
        }
        for t in &trees {
            t.validate(n_features)?;
        }
        Ok(ForestModel { n_features, trees })
    }

    pub fn votes(&self, x: &[f64]) -> Result<[usize; CLASSES]> {
        if x.len() != self.n_features {
            return Err(Error::domain(format!(
                "forest expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("non-finite forest input"));
        }
        let mut votes = [0; CLASSES];
        for t in &self.trees {
            votes[t.vote(x)] += 1;
        }
        Ok(votes)
    }

    pub fn predict(&self, x: &[f64]) -> Result<ShapeClass> {
        let votes = self.votes(x)?;
        ShapeClass::new(argmax_lowest(&votes) as u8)
    }
}

struct Grower<'a> {
    xs: &'a [Vec<f64>],
    labels: &'a [usize],
    config: &'a ForestConfig,
    max_features: usize,
    nodes: Vec<Node>,
}

fn gini(counts: &[usize; CLASSES], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; CLASSES] {
        let mut c = [0; CLASSES];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    /// Best `(weighted impurity, feature, threshold)` over a random feature
    /// subset, or `None` if every tried feature is constant here.
    fn best_split(&self, idx: &[usize], rng: &mut impl Rng) -> Option<(f64, usize, f64)> {
        let n_total = self.xs[0].len();
        let total = self.counts(idx);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for feature in index::sample(rng, n_total, self.max_features).into_iter() {
            order.sort_by(|&a, &b| self.xs[a][feature].total_cmp(&self.xs[b][feature]));
            let mut left = [0; CLASSES];
            for k in 0..order.len() - 1 {
                left[self.labels[order[k]]] += 1;
                let (a, b) = (self.xs[order[k]][feature], self.xs[order[k + 1]][feature]);
                if a == b {
                    continue;
                }
                let nl = k + 1;
                let nr = order.len() - nl;
                let mut right = total;
                for c in 0..CLASSES {
                    right[c] -= left[c];
                }
                let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr))
                    / order.len() as f64;
                if best.map_or(true, |(s, _, _)| score < s) {
                    let mut t = a + (b - a) / 2.0;
                    if t >= b {
                        t = a;
                    }
                    best = Some((score, feature, t));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut impl Rng) -> usize {
        let at = self.nodes.len();
        let counts = self.counts(&idx);
        self.nodes.push(Node::Leaf { counts });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.config.max_depth || idx.len() < self.config.min_samples_split {
            return at;
        }
        let Some((_, feature, threshold)) = self.best_split(&idx, rng) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.xs[i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

/// Trains a forest. Trees are grown in parallel, each from its own seed
/// derived from `seed` and the tree index, so the result does not depend on
/// thread scheduling.
pub fn forest_train(
    xs: &[Vec<f64>],
    ys: &[ShapeClass],
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    if xs.is_empty() {
        return Err(Error::domain("no training data"));
    }
    if xs.len() != ys.len() {
        return Err(Error::domain("input and label counts differ"));
    }
    let d = xs[0].len();
    if d == 0 || xs.iter().any(|x| x.len() != d) {
        return Err(Error::domain("inconsistent feature dimensions"));
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::domain("training data has non-finite values"));
    }
    if config.n_trees == 0 || config.max_depth == 0 || !(config.bootstrap_fraction > 0.0) {
        return Err(Error::domain("invalid forest configuration"));
    }
    let max_features = config
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let labels: Vec<usize> = ys.iter().map(|c| c.index()).collect();
    let n_boot = ((xs.len() as f64 * config.bootstrap_fraction).round() as usize).max(1);

    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed, &[seed::tag("tree"), t as u64]);
            let idx: Vec<usize> = (0..n_boot).map(|_| rng.gen_range(0..xs.len())).collect();
            let mut g = Grower {
                xs,
                labels: &labels,
                config,
                max_features,
                nodes: Vec::new(),
            };
            g.grow(idx, 0, &mut rng);
            DecisionTree { nodes: g.nodes }
        })
        .collect();
    Ok(ForestModel {
        n_features: d,
        trees,
    })
}
