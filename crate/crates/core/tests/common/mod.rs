#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supclust::dataset::{dataset_from_table, Column, ColumnKind, CsvOptions, Dataset, RawTable, MISSING};
use supclust::extract::{apply_rule_to, extract_iterative, linearize_rule, rank_nodes, select_unrelated};
use supclust::preprocess::binning::BinningSpec;
use supclust::preprocess::{
    build_contingency, encode_by_class_frequency, BinMethod, BinPlan, Prepared, PreprocessConfig,
};
use supclust::tree::{DecisionTree, ImpurityMetric, TrainParams};

/// (name, size, in class, gini, precision, recall, F1, F0.5)
pub type TableRow = (&'static str, usize, usize, f64, f64, f64, f64, f64);

pub const TITANIC_NODES: [TableRow; 6] = [
    ("c1", 314, 233, 0.3828, 0.7420, 0.68128, 0.71037, 0.7290),
    ("c2", 168, 160, 0.0907, 0.9523, 0.46784, 0.62745, 0.7889),
    ("c3", 170, 161, 0.1002, 0.94706, 0.47076, 0.62891, 0.7876),
    ("c4", 23, 22, 0.0832, 0.95652, 0.06433, 0.12054, 0.2534),
    ("c5", 117, 69, 0.4839, 0.5897, 0.20175, 0.30065, 0.4259),
    ("c6", 41, 23, 0.4925, 0.5610, 0.06725, 0.12010, 0.2272),
];
pub const SURVIVORS: usize = 342;

/// Gini or entropy straight from the definition.
pub fn naive_impurity(labels: &[u32], n_classes: usize, metric: ImpurityMetric) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let mut out = match metric {
        ImpurityMetric::Gini => 1.0,
        ImpurityMetric::Entropy => 0.0,
    };
    for c in 0..n_classes as u32 {
        let p = labels.iter().filter(|&&l| l == c).count() as f64 / n;
        match metric {
            ImpurityMetric::Gini => out -= p * p,
            ImpurityMetric::Entropy if p > 0.0 => out -= p * p.log2(),
            ImpurityMetric::Entropy => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSplit {
    pub attribute: usize,
    pub pivot: u32,
    pub gain: f64,
}

/// Tries every (attribute, pivot) pair on `rows` by brute force.
/// Candidates within 1e-12 of the maximum count as tied; the first in
/// (attribute, pivot) order wins.
pub fn oracle_split(ds: &Dataset, rows: &[usize], params: &TrainParams) -> Option<OracleSplit> {
    let k = ds.n_classes();
    let labels: Vec<u32> = rows.iter().map(|&r| ds.labels[r]).collect();
    let parent = naive_impurity(&labels, k, params.impurity);
    let n = rows.len() as f64;
    let mut all = Vec::new();
    for (a, col) in ds.columns.iter().enumerate() {
        let mut pivots: Vec<u32> = rows.iter().map(|&r| col.codes[r]).collect();
        pivots.sort_unstable();
        pivots.dedup();
        for p in pivots {
            let test = |code: u32| if col.kind.is_ordinal() { code <= p } else { code == p };
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &r in rows {
                if test(col.codes[r]) {
                    left.push(ds.labels[r]);
                } else {
                    right.push(ds.labels[r]);
                }
            }
            if left.len() < params.min_samples_leaf.max(1) || right.len() < params.min_samples_leaf.max(1) {
                continue;
            }
            let gain = parent
                - left.len() as f64 / n * naive_impurity(&left, k, params.impurity)
                - right.len() as f64 / n * naive_impurity(&right, k, params.impurity);
            all.push(OracleSplit {
                attribute: a,
                pivot: p,
                gain,
            });
        }
    }
    let best = all.iter().map(|s| s.gain).fold(f64::NEG_INFINITY, f64::max);
    if best <= params.min_gain + 1e-12 {
        return None;
    }
    all.into_iter().find(|s| s.gain >= best - 1e-12)
}

/// Compares every node of `tree` with the oracle. Returns a description of
/// the first disagreement.
pub fn check_tree_against_oracle(ds: &Dataset, tree: &DecisionTree) -> Result<(), String> {
    for node in &tree.nodes {
        let pure = node.class_counts.iter().filter(|&&c| c > 0).count() <= 1;
        let expected = if node.depth >= tree.params.max_depth || pure {
            None
        } else {
            oracle_split(ds, &node.rows, &tree.params)
        };
        match (&node.split, expected) {
            (None, None) => {}
            (Some(s), Some(o)) => {
                if s.attribute != o.attribute || s.pivot != o.pivot || (s.gain - o.gain).abs() > 1e-12 {
                    return Err(format!(
                        "node {}: tree chose ({}, {}, {}), oracle ({}, {}, {})",
                        node.id, s.attribute, s.pivot, s.gain, o.attribute, o.pivot, o.gain
                    ));
                }
            }
            (s, o) => return Err(format!("node {}: tree {:?} vs oracle {:?}", node.id, s, o)),
        }
    }
    Ok(())
}

/// Checks that each node's rule, applied to the raw rows the tree was
/// trained on, selects exactly the node's rows.
pub fn check_round_trip(raw: &Dataset, prepared: &Prepared, tree: &DecisionTree, target: u32) -> Result<(), String> {
    let root_rows = &tree.root().rows;
    for node in &tree.nodes {
        let rule = linearize_rule(tree, node.id, &prepared.log, target).map_err(|e| e.to_string())?;
        let got = apply_rule_to(&rule, raw, root_rows).map_err(|e| e.to_string())?;
        if got != node.rows {
            return Err(format!(
                "node {}: rule {:?} selects {} rows, node has {}",
                node.id,
                rule,
                got.len(),
                node.rows.len()
            ));
        }
    }
    Ok(())
}

type Maker = Box<dyn Fn(&mut ChaCha8Rng) -> String>;

/// A random labelled table with up to `max_rows` rows and up to six columns
/// of mixed kinds, some with missing cells.
pub fn random_dataset(seed: u64, max_rows: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_rows = rng.gen_range(2..=max_rows);
    let n_cols = rng.gen_range(1..=6);
    let n_classes = rng.gen_range(2..=3);
    let mut header = Vec::new();
    let mut hints = BTreeMap::new();
    let mut makers: Vec<Maker> = Vec::new();
    for j in 0..n_cols {
        let name = format!("c{j}");
        let missing_rate = if rng.gen_bool(0.3) { 0.1 } else { 0.0 };
        let kind = rng.gen_range(0..5);
        let spread = rng.gen_range(2..30);
        let maker: Box<dyn Fn(&mut ChaCha8Rng) -> String> = match kind {
            0 => Box::new(move |r| format!("{}", r.gen_range(0..spread) as f64 * 0.5 - 3.0)),
            1 => Box::new(move |r| format!("v{}", r.gen_range(0..spread.min(8)))),
            2 => {
                hints.insert(name.clone(), ColumnKind::SymbolicOrdinal);
                Box::new(move |r| format!("o{:02}", r.gen_range(0..spread.min(10))))
            }
            3 => Box::new(|r| if r.gen_bool(0.5) { "true" } else { "false" }.to_string()),
            _ => Box::new(move |r| format!("2020-01-{:02}", r.gen_range(1..=spread.min(28)))),
        };
        makers.push(Box::new(move |r: &mut ChaCha8Rng| {
            if missing_rate > 0.0 && r.gen_bool(missing_rate) {
                String::new()
            } else {
                maker(r)
            }
        }));
        header.push(name);
    }
    header.push("y".into());
    let rows = (0..n_rows)
        .map(|_| {
            let mut row: Vec<String> = makers.iter().map(|m| m(&mut rng)).collect();
            row.push(format!("k{}", rng.gen_range(0..n_classes)));
            row
        })
        .collect();
    let opts = CsvOptions {
        kind_hints: hints,
        ..CsvOptions::default().with_label("y")
    };
    // label values may collapse to one class on tiny tables; that is fine
    dataset_from_table(&RawTable { header, rows }, &opts).expect("generated table is valid")
}

/// A preprocessing configuration drawn from `seed`: binning and reordering
/// switched on or off independently.
pub fn random_config(seed: u64) -> PreprocessConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut cfg = PreprocessConfig {
        reorder_symbolic: rng.gen_bool(0.5),
        ..PreprocessConfig::default()
    };
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(2..6);
        cfg.numeric = Some(BinPlan {
            method: if rng.gen_bool(0.5) {
                BinMethod::NumericPercentile
            } else {
                BinMethod::NumericEqualWidth
            },
            k,
        });
        cfg.datetime = Some(BinPlan {
            method: if rng.gen_bool(0.5) {
                BinMethod::DatetimeFrequency
            } else {
                BinMethod::DatetimeEqualWidth
            },
            k,
        });
    }
    cfg
}

pub fn random_params(seed: u64) -> TrainParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdeed);
    TrainParams {
        impurity: if rng.gen_bool(0.5) {
            ImpurityMetric::Gini
        } else {
            ImpurityMetric::Entropy
        },
        max_depth: rng.gen_range(1..=5),
        min_gain: 0.0,
        min_samples_leaf: rng.gen_range(1..=3),
    }
}

/// Weighted child impurity never exceeds the parent's.
pub fn check_purity_monotone(tree: &DecisionTree) -> Result<(), String> {
    for node in &tree.nodes {
        if let Some([l, r]) = node.children {
            let (l, r) = (&tree.nodes[l], &tree.nodes[r]);
            let n = node.samples as f64;
            let weighted = l.samples as f64 / n * l.impurity + r.samples as f64 / n * r.impurity;
            if weighted > node.impurity + 1e-12 {
                return Err(format!(
                    "node {}: children {weighted} > parent {}",
                    node.id, node.impurity
                ));
            }
        }
    }
    Ok(())
}

/// Every observed cell lands in exactly one bin, bins respect value order,
/// missing stays missing and no more than `k` bins are used.
pub fn check_binning_partition(col: &Column, spec: &BinningSpec, binned: &Column, k: usize) -> Result<(), String> {
    if spec.bins.len() > k || binned.n_codes() != spec.bins.len() {
        return Err(format!("{} bins for k = {k}", spec.bins.len()));
    }
    let keys = col.keys.as_ref().ok_or("column has no keys")?;
    let mut seen: Vec<(f64, u32)> = Vec::new();
    for (&raw, &b) in col.codes.iter().zip(&binned.codes) {
        if raw == MISSING || b == MISSING {
            if raw != b {
                return Err(format!("missing cell mapped {raw} -> {b}"));
            }
            continue;
        }
        let key = keys[raw as usize - 1];
        if b < 1 || b as usize > spec.bins.len() || spec.bin_of_key(key) != b {
            return Err(format!("value {key} in bin {b}, edges say {}", spec.bin_of_key(key)));
        }
        seen.push((key, b));
    }
    seen.sort_by(|a, b| a.0.total_cmp(&b.0));
    if seen.windows(2).any(|w| w[0].1 > w[1].1) {
        return Err("bin order does not follow value order".into());
    }
    Ok(())
}

/// After class-frequency encoding the target-class share never rises with the code.
pub fn check_frequency_order(col: &Column, labels: &[u32], target: u32) -> Result<(), String> {
    let (enc, encoded) = encode_by_class_frequency(col, labels, target);
    let table = build_contingency(&encoded, labels, target);
    if table.rows.windows(2).any(|w| w[0].frequency < w[1].frequency) {
        return Err(format!("order {:?} is not by descending frequency", enc.order));
    }
    let mut observed_before: Vec<usize> = col.code_counts();
    observed_before.remove(0);
    let mut observed_after: Vec<usize> = encoded.code_counts();
    observed_after.remove(0);
    observed_before.sort_unstable();
    observed_after.sort_unstable();
    if observed_before != observed_after {
        return Err("encoding is not a bijection on values".into());
    }
    Ok(())
}

/// Ranking is a permutation of the nodes, single-tree picks are pairwise
/// unrelated and iterative clusters are disjoint.
pub fn check_extraction(prepared: &Prepared, params: &TrainParams, target: u32, beta: f64) -> Result<(), String> {
    let tree = supclust::train(&prepared.data, params).map_err(|e| e.to_string())?;
    let ranked = rank_nodes(&tree, target, beta).map_err(|e| e.to_string())?;
    let mut ids: Vec<usize> = ranked.iter().map(|s| s.node_id).collect();
    ids.sort_unstable();
    if ids != (0..tree.len()).collect::<Vec<_>>() {
        return Err("ranking is not a permutation".into());
    }
    if ranked.iter().any(|s| !(0.0..=1.0).contains(&s.f_beta)) {
        return Err("score outside [0, 1]".into());
    }
    let picks = select_unrelated(&tree, &ranked, 4);
    for (i, a) in picks.iter().enumerate() {
        for b in &picks[i + 1..] {
            if tree.related(a.node_id, b.node_id) {
                return Err(format!("picked related nodes {} and {}", a.node_id, b.node_id));
            }
        }
    }
    let ex = extract_iterative(prepared, params, target, beta, 4).map_err(|e| e.to_string())?;
    let mut all: Vec<usize> = ex.clusters.iter().flat_map(|c| c.row_ids.iter().copied()).collect();
    let n = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != n {
        return Err("iterative clusters overlap".into());
    }
    Ok(())
}
