//! CART-style binary classification trees over ordinal codes.

mod dot;
mod split;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use dot::to_dot;
pub use split::{best_split, GAIN_EPSILON};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImpurityMetric {
    #[default]
    Gini,
    Entropy,
}

impl ImpurityMetric {
    pub fn name(self) -> &'static str {
        match self {
            ImpurityMetric::Gini => "gini",
            ImpurityMetric::Entropy => "entropy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub impurity: ImpurityMetric,
    pub max_depth: usize,
    /// A split is accepted only when its gain strictly exceeds this value.
    pub min_gain: f64,
    pub min_samples_leaf: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            impurity: ImpurityMetric::Gini,
            max_depth: 5,
            min_gain: 0.0,
            min_samples_leaf: 1,
        }
    }
}

impl TrainParams {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::config("max_depth must be at least 1"));
        }
        if self.min_gain.is_nan() || self.min_gain < 0.0 {
            return Err(Error::config("min_gain must be non-negative"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::config("min_samples_leaf must be at least 1"));
        }
        Ok(())
    }
}

/// Impurity of a class distribution: `1 - sum p^2` (Gini) or
/// `-sum p log2 p` (entropy, with `0 log 0 = 0`).
pub fn impurity(class_counts: &[usize], metric: ImpurityMetric) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::arg("impurity of an empty node"));
    }
    Ok(impurity_unchecked(class_counts, total, metric))
}

pub(crate) fn impurity_unchecked(counts: &[usize], total: usize, metric: ImpurityMetric) -> f64 {
    let n = total as f64;
    match metric {
        ImpurityMetric::Gini => 1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>(),
        ImpurityMetric::Entropy => -counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                p * p.log2()
            })
            .sum::<f64>(),
    }
}

/// Parent impurity minus the size-weighted impurity of the two children.
pub fn split_gain(parent: &[usize], left: &[usize], right: &[usize], metric: ImpurityMetric) -> Result<f64> {
    if parent.len() != left.len()
        || parent.len() != right.len()
        || parent.iter().zip(left).zip(right).any(|((p, l), r)| *p != l + r)
    {
        return Err(Error::arg("child class counts do not add up to the parent"));
    }
    let (nl, nr): (usize, usize) = (left.iter().sum(), right.iter().sum());
    if nl + nr == 0 {
        return Err(Error::arg("gain of an empty node"));
    }
    Ok(gain_unchecked(parent, left, right, nl, nr, metric))
}

pub(crate) fn gain_unchecked(
    parent: &[usize],
    left: &[usize],
    right: &[usize],
    nl: usize,
    nr: usize,
    metric: ImpurityMetric,
) -> f64 {
    let n = (nl + nr) as f64;
    let mut weighted = 0.0;
    if nl > 0 {
        weighted += nl as f64 / n * impurity_unchecked(left, nl, metric);
    }
    if nr > 0 {
        weighted += nr as f64 / n * impurity_unchecked(right, nr, metric);
    }
    impurity_unchecked(parent, nl + nr, metric) - weighted
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTest {
    /// `x <= pivot` goes left.
    Ordinal,
    /// `x == pivot` goes left.
    Nominal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub attribute: usize,
    pub attribute_name: String,
    pub pivot: u32,
    pub test: SplitTest,
    pub gain: f64,
}

impl Split {
    pub fn goes_left(&self, code: u32) -> bool {
        match self.test {
            SplitTest::Ordinal => code <= self.pivot,
            SplitTest::Nominal => code == self.pivot,
        }
    }

    /// Splits `rows` into the rows passing the test and the rest.
    pub fn partition(&self, ds: &Dataset, rows: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let codes = &ds.columns[self.attribute].codes;
        rows.iter().partition(|&&r| self.goes_left(codes[r]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Breadth-first index; equals the node's position in [`DecisionTree::nodes`].
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    /// Left (test passed) and right child ids.
    pub children: Option<[usize; 2]>,
    pub split: Option<Split>,
    pub class_counts: Vec<usize>,
    pub samples: usize,
    pub impurity: f64,
    pub decision: u32,
    /// Row indices of the training dataset that reach this node.
    #[serde(skip_serializing, default)]
    pub rows: Vec<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    fn new(
        id: usize,
        depth: usize,
        parent: Option<usize>,
        rows: Vec<usize>,
        ds: &Dataset,
        metric: ImpurityMetric,
    ) -> TreeNode {
        let class_counts = ds.class_counts(rows.iter().copied());
        let samples = rows.len();
        let impurity = if samples == 0 {
            0.0
        } else {
            impurity_unchecked(&class_counts, samples, metric)
        };
        TreeNode {
            id,
            depth,
            parent,
            children: None,
            split: None,
            decision: majority(&class_counts),
            class_counts,
            samples,
            impurity,
            rows,
        }
    }
}

/// Most frequent class; ties go to the lowest class code.
fn majority(counts: &[usize]) -> u32 {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best as u32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub params: TrainParams,
    pub class_names: Vec<String>,
}

impl DecisionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> Option<&TreeNode> {
        self.nodes.get(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// `(ancestor id, went left)` for every edge from the root down to `id`.
    pub fn path(&self, id: usize) -> Vec<(usize, bool)> {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            let went_left = self.nodes[p].children.is_some_and(|c| c[0] == cur);
            steps.push((p, went_left));
            cur = p;
        }
        steps.reverse();
        steps
    }

    /// True when `a` lies on the root path of `b` (a node is its own ancestor).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }

    /// Leaf reached by training row `row` (rows are identified by index).
    pub fn leaf_of(&self, ds: &Dataset, row: usize) -> usize {
        let mut cur = 0;
        while let (Some(split), Some([l, r])) = (&self.nodes[cur].split, self.nodes[cur].children) {
            cur = if split.goes_left(ds.columns[split.attribute].codes[row]) {
                l
            } else {
                r
            };
        }
        cur
    }
}

/// Trains on every row of `ds`.
pub fn train(ds: &Dataset, params: &TrainParams) -> Result<DecisionTree> {
    let rows: Vec<usize> = (0..ds.row_count()).collect();
    train_rows(ds, &rows, params)
}

/// Trains on the given subset of rows; node row sets keep the original indices.
pub fn train_rows(ds: &Dataset, rows: &[usize], params: &TrainParams) -> Result<DecisionTree> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::data("cannot train a tree on an empty dataset"));
    }
    if ds.n_classes() == 0 {
        return Err(Error::data("dataset has no classes"));
    }
    let mut nodes = vec![TreeNode::new(0, 0, None, rows.to_vec(), ds, params.impurity)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let node = &nodes[id];
        if node.depth >= params.max_depth || node.impurity == 0.0 {
            continue;
        }
        let Some(split) = best_split(&node.rows, ds, params) else {
            continue;
        };
        let (left, right) = split.partition(ds, &node.rows);
        let depth = node.depth + 1;
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(TreeNode::new(l, depth, Some(id), left, ds, params.impurity));
        nodes.push(TreeNode::new(r, depth, Some(id), right, ds, params.impurity));
        nodes[id].children = Some([l, r]);
        nodes[id].split = Some(split);
        queue.push_back(l);
        queue.push_back(r);
    }
    Ok(DecisionTree {
        nodes,
        params: params.clone(),
        class_names: ds.class_names.clone(),
    })
}
