//! Interpretable supervised clustering with shallow decision trees.
//!
//! The pipeline loads a labelled table ([`dataset`]), reduces and reorders
//! attribute values ([`preprocess`]), trains CART trees ([`tree`]), ranks
//! every tree node by F-beta against a target class and turns the best
//! nodes into readable rules ([`extract`]). [`stability`] scores how well
//! clusters survive subsampling and [`synth`] plants hidden groups for
//! validation. [`run`] wires the stages together for the command line tool.

pub mod dataset;
pub mod error;
pub mod extract;
pub mod preprocess;
pub mod run;
pub mod stability;
pub mod synth;
pub mod tree;

pub use dataset::{load_csv, profile, read_csv, Column, ColumnKind, CsvOptions, Dataset, ProfileReport};
pub use error::{Error, Result};
pub use extract::{
    apply_rule, extract_iterative, extract_single_tree, linearize_rule, node_fbeta, rank_nodes, render_rule_text,
    select_from_single_tree, ClusterCandidate, Condition, Extraction, NodeScore, Pipeline, Predicate, Rule,
};
pub use preprocess::{prepare, Prepared, PreprocessConfig, TransformLog};
pub use run::{run, run_on, write_outputs, RunConfig, RunReport};
pub use stability::{stability_report, StabilityReport};
pub use tree::{to_dot, train, DecisionTree, ImpurityMetric, TrainParams, TreeNode};
