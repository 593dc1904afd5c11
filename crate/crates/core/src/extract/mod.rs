//! Node ranking, cluster selection and rule extraction.

mod rule;

pub use rule::{
    apply_rule, apply_rule_to, linearize_rule, render_rule_text, Bound, Condition, Predicate, Rule, RuleStats,
};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::preprocess::{prepare, Prepared, PreprocessConfig};
use crate::tree::{train_rows, DecisionTree, TrainParams, TreeNode};

pub const DEFAULT_BETA: f64 = 0.33;

/// Harmonic F-beta. Zero when precision and recall are both zero.
pub fn fbeta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom <= 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// Same shape as [`fbeta`] with a sum in place of the product. Not an
/// F-measure; it exceeds 1 for most inputs.
pub fn fbeta_sum_form(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    (1.0 + b2) * (precision + recall) / (b2 * precision + recall)
}

/// Score of a single node for `target_class`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeScore {
    pub node_id: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub size: usize,
    pub impurity: f64,
}

impl NodeScore {
    pub fn new(node_id: usize, tp: usize, size: usize, total_in_class: usize, beta: f64, impurity: f64) -> NodeScore {
        let precision = if size == 0 { 0.0 } else { tp as f64 / size as f64 };
        let recall = if total_in_class == 0 {
            0.0
        } else {
            tp as f64 / total_in_class as f64
        };
        NodeScore {
            node_id,
            tp,
            fp: size - tp,
            fn_: total_in_class - tp,
            precision,
            recall,
            f_beta: fbeta(precision, recall, beta),
            size,
            impurity,
        }
    }

    pub fn f_for(&self, beta: f64) -> f64 {
        fbeta(self.precision, self.recall, beta)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("beta must be positive, got {beta}")))
    }
}

pub fn score_node(node: &TreeNode, target_class: u32, beta: f64, total_in_class: usize) -> Result<NodeScore> {
    check_beta(beta)?;
    let tp = *node
        .class_counts
        .get(target_class as usize)
        .ok_or_else(|| Error::arg(format!("class code {target_class} out of range")))?;
    if total_in_class == 0 {
        return Err(Error::data("target class has no rows"));
    }
    if total_in_class < tp {
        return Err(Error::arg(format!(
            "total in class ({total_in_class}) is below the node's count ({tp})"
        )));
    }
    Ok(NodeScore::new(
        node.id,
        tp,
        node.samples,
        total_in_class,
        beta,
        node.impurity,
    ))
}

pub fn node_fbeta(node: &TreeNode, target_class: u32, beta: f64, total_in_class: usize) -> Result<f64> {
    score_node(node, target_class, beta, total_in_class).map(|s| s.f_beta)
}

/// Every node of `tree`, best first. Ties go to the smaller node id.
/// Recall is measured against the tree's own training rows.
pub fn rank_nodes(tree: &DecisionTree, target_class: u32, beta: f64) -> Result<Vec<NodeScore>> {
    check_beta(beta)?;
    let total = *tree
        .root()
        .class_counts
        .get(target_class as usize)
        .ok_or_else(|| Error::arg(format!("class code {target_class} out of range")))?;
    let mut scores: Vec<NodeScore> = tree
        .nodes
        .iter()
        .map(|n| {
            NodeScore::new(
                n.id,
                n.class_counts[target_class as usize],
                n.samples,
                total,
                beta,
                n.impurity,
            )
        })
        .collect();
    sort_scores(&mut scores);
    Ok(scores)
}

fn sort_scores(scores: &mut [NodeScore]) {
    scores.sort_by(|a, b| b.f_beta.total_cmp(&a.f_beta).then(a.node_id.cmp(&b.node_id)));
}

/// Greedy pick over a ranked list, skipping nodes related to an earlier pick
/// and nodes with zero score.
pub fn select_unrelated(tree: &DecisionTree, ranked: &[NodeScore], k: usize) -> Vec<NodeScore> {
    let mut picked: Vec<NodeScore> = Vec::new();
    for s in ranked {
        if picked.len() >= k {
            break;
        }
        if s.f_beta <= 0.0 || picked.iter().any(|p| tree.related(p.node_id, s.node_id)) {
            continue;
        }
        picked.push(s.clone());
    }
    picked
}

/// Up to `k` clusters from one tree, none an ancestor of another.
pub fn select_from_single_tree(tree: &DecisionTree, target_class: u32, beta: f64, k: usize) -> Result<Vec<NodeScore>> {
    if k == 0 {
        return Err(Error::arg("number of clusters must be at least 1"));
    }
    let ranked = rank_nodes(tree, target_class, beta)?;
    Ok(select_unrelated(tree, &ranked, k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterCandidate {
    pub tree_index: usize,
    #[serde(flatten)]
    pub score: NodeScore,
    /// Recall against every row of the dataset, not just the remainder.
    pub recall_overall: f64,
    pub rule: Rule,
    pub row_ids: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub clusters: Vec<ClusterCandidate>,
    pub trees: Vec<DecisionTree>,
}

fn check_target(ds: &Dataset, target_class: u32) -> Result<()> {
    if (target_class as usize) < ds.n_classes() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "class code {target_class} out of range ({} classes)",
            ds.n_classes()
        )))
    }
}

/// Train, take the best node, remove its rows, repeat.
///
/// Scores at step k are computed against the rows still present. Stops early
/// when nothing is left or no node scores above zero.
pub fn extract_iterative(
    prepared: &Prepared,
    params: &TrainParams,
    target_class: u32,
    beta: f64,
    n_clusters: usize,
) -> Result<Extraction> {
    let ds = &prepared.data;
    check_target(ds, target_class)?;
    check_beta(beta)?;
    if n_clusters == 0 {
        return Err(Error::arg("number of clusters must be at least 1"));
    }
    if ds.row_count() == 0 {
        return Err(Error::data("dataset is empty"));
    }
    let total_overall = ds.labels.iter().filter(|&&l| l == target_class).count();
    let mut remaining: Vec<usize> = (0..ds.row_count()).collect();
    let mut clusters = Vec::new();
    let mut trees = Vec::new();
    for k in 0..n_clusters {
        if remaining.is_empty() {
            break;
        }
        let tree = train_rows(ds, &remaining, params)?;
        let ranked = rank_nodes(&tree, target_class, beta)?;
        let Some(best) = ranked.into_iter().find(|s| s.f_beta > 0.0) else {
            log::info!("iteration {}: no node scores above zero, stopping", k + 1);
            trees.push(tree);
            break;
        };
        let rule = linearize_rule(&tree, best.node_id, &prepared.log, target_class)?;
        let row_ids = tree.nodes[best.node_id].rows.clone();
        let mut taken = vec![false; ds.row_count()];
        for &r in &row_ids {
            taken[r] = true;
        }
        remaining.retain(|&r| !taken[r]);
        log::info!(
            "iteration {}: node {} with F = {:.4}, {} rows, {} left",
            k + 1,
            best.node_id,
            best.f_beta,
            row_ids.len(),
            remaining.len()
        );
        clusters.push(ClusterCandidate {
            tree_index: k,
            recall_overall: best.tp as f64 / total_overall as f64,
            score: best,
            rule,
            row_ids,
        });
        trees.push(tree);
    }
    Ok(Extraction { clusters, trees })
}

/// All clusters from one tree trained on every row.
pub fn extract_single_tree(
    prepared: &Prepared,
    params: &TrainParams,
    target_class: u32,
    beta: f64,
    n_clusters: usize,
) -> Result<Extraction> {
    let ds = &prepared.data;
    check_target(ds, target_class)?;
    let rows: Vec<usize> = (0..ds.row_count()).collect();
    let tree = train_rows(ds, &rows, params)?;
    let picked = select_from_single_tree(&tree, target_class, beta, n_clusters)?;
    let clusters = picked
        .into_iter()
        .map(|s| {
            Ok(ClusterCandidate {
                tree_index: 0,
                recall_overall: s.recall,
                rule: linearize_rule(&tree, s.node_id, &prepared.log, target_class)?,
                row_ids: tree.nodes[s.node_id].rows.clone(),
                score: s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Extraction {
        clusters,
        trees: vec![tree],
    })
}

/// Preprocessing plus iterative extraction, as one reusable recipe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pipeline {
    pub preprocess: PreprocessConfig,
    pub train: TrainParams,
    pub target_class: u32,
    pub beta: f64,
    pub n_clusters: usize,
}

impl Pipeline {
    pub fn run(&self, raw: &Dataset) -> Result<(Prepared, Extraction)> {
        let prepared = prepare(raw, &self.preprocess, self.target_class)?;
        let extraction = extract_iterative(&prepared, &self.train, self.target_class, self.beta, self.n_clusters)?;
        Ok((prepared, extraction))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, ColumnKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fbeta_values() {
        assert!(close(fbeta(0.7420, 0.68128, 1.0), 0.71037, 1e-4));
        assert!(close(fbeta(0.9523, 0.46784, 0.5), 0.7889, 1e-3));
        for x in [0.1, 0.5, 0.9] {
            for b in [0.33, 1.0, 2.0] {
                assert!(close(fbeta(x, x, b), x, 1e-15));
            }
        }
        assert_eq!(fbeta(0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn sum_form_disagrees() {
        let harmonic = fbeta(0.9523, 0.46784, 0.5);
        let summed = fbeta_sum_form(0.9523, 0.46784, 0.5);
        assert!((summed - harmonic).abs() > 0.1);
    }

    fn leaf(id: usize, counts: Vec<usize>) -> TreeNode {
        TreeNode {
            id,
            depth: 0,
            parent: None,
            children: None,
            split: None,
            samples: counts.iter().sum(),
            class_counts: counts,
            impurity: 0.0,
            decision: 0,
            rows: vec![],
        }
    }

    #[test]
    fn node_fbeta_errors() {
        let n = leaf(0, vec![81, 233]);
        assert!(node_fbeta(&n, 1, 1.0, 0).is_err());
        assert!(node_fbeta(&n, 1, 0.0, 342).is_err());
        assert!(node_fbeta(&n, 1, 1.0, 100).is_err());
        assert!(close(node_fbeta(&n, 1, 1.0, 342).unwrap(), 0.71037, 1e-3));
    }

    fn two_class(cells: &[Option<f64>], labels: Vec<u32>) -> Prepared {
        let ds = Dataset::new(
            vec![Column::numeric("x", cells)],
            labels,
            vec!["n".into(), "p".into()],
            "y",
        )
        .unwrap();
        Prepared::identity(&ds)
    }

    #[test]
    fn pure_tree_root_scores_one() {
        let p = two_class(&[Some(1.0), Some(2.0)], vec![1, 1]);
        let tree = train_rows(&p.data, &[0, 1], &TrainParams::default()).unwrap();
        let ranked = rank_nodes(&tree, 1, 0.33).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].f_beta, 1.0);
    }

    #[test]
    fn iterative_stops_when_consumed() {
        let p = two_class(&[Some(1.0), Some(2.0), Some(3.0)], vec![1, 1, 1]);
        let ex = extract_iterative(&p, &TrainParams::default(), 1, 0.33, 3).unwrap();
        assert_eq!(ex.clusters.len(), 1);
        assert_eq!(ex.clusters[0].row_ids, vec![0, 1, 2]);
        assert!(ex.clusters[0].rule.is_empty());
    }

    #[test]
    fn iterative_clusters_are_disjoint() {
        let xs: Vec<Option<f64>> = (0..40).map(|i| Some(i as f64)).collect();
        let labels = (0..40).map(|i| u32::from(i % 3 == 0 || i > 30)).collect();
        let p = two_class(&xs, labels);
        let ex = extract_iterative(&p, &TrainParams::default().with_depth(2), 1, 0.5, 3).unwrap();
        let mut seen = [false; 40];
        for c in &ex.clusters {
            for &r in &c.row_ids {
                assert!(!seen[r]);
                seen[r] = true;
            }
        }
        assert!(extract_iterative(&p, &TrainParams::default(), 5, 0.5, 1).is_err());
    }

    #[test]
    fn chain_tree_yields_one_cluster() {
        // a single split: root and both children are related only through the root
        let cells = [Some("a"), Some("b"), Some("c")];
        let col = Column::symbolic("s", ColumnKind::SymbolicOrdinal, &cells);
        let ds = Dataset::new(vec![col], vec![1, 0, 0], vec!["n".into(), "p".into()], "y").unwrap();
        let tree = train_rows(&ds, &[0, 1, 2], &TrainParams::default().with_depth(1)).unwrap();
        let picked = select_from_single_tree(&tree, 1, 1.0, 5).unwrap();
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].node_id, 1);
        assert!(select_from_single_tree(&tree, 1, 1.0, 0).is_err());
    }
}
