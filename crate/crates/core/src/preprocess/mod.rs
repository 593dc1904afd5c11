//! Data preparation: binning and class-frequency ordering.
//!
//! [`prepare`] turns a loaded [`Dataset`] into the encoded table the tree
//! trainer consumes, together with a [`TransformLog`] that maps every
//! prepared code back to original values so rules can be rendered and
//! re-applied to the raw data.

pub mod binning;
pub mod encoding;
pub mod similarity;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use binning::{
    bin_datetime, bin_numeric, bin_symbolic, Bin, BinMembers, BinMethod, BinningSpec, DatetimeBinning, NumericBinning,
    SymbolicBinning,
};
pub use encoding::{build_contingency, encode_by_class_frequency, ContingencyRow, ContingencyTable, OrdinalEncoding};
pub use similarity::{jaro, jaro_winkler, jaro_winkler_distance};

use crate::dataset::{Column, ColumnKind, Dataset, MISSING};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 20;
/// Bins for the default numeric and datetime plans.
pub const PERCENTILE_BINS: usize = 100;
pub const DEFAULT_HIGH_CARDINALITY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinPlan {
    pub method: BinMethod,
    pub k: usize,
}

/// Per-column overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnPlan {
    /// Binning method for this column; `"none"` disables binning.
    pub method: Option<ColumnMethod>,
    pub k: Option<usize>,
    /// Class-frequency ordering for this symbolic column.
    pub reorder: Option<bool>,
    pub drop: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnMethod {
    Bin(BinMethod),
    Keep(KeepMarker),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeepMarker {
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Default for numeric columns with more than `k` distinct values.
    pub numeric: Option<BinPlan>,
    /// Default for datetime columns with more than `k` distinct values.
    pub datetime: Option<BinPlan>,
    /// Default for symbolic columns above the high-cardinality threshold.
    pub symbolic: Option<BinPlan>,
    pub reorder_symbolic: bool,
    /// Symbolic columns with more distinct values than this are binned when a
    /// plan exists and dropped otherwise.
    pub high_cardinality_threshold: usize,
    pub columns: BTreeMap<String, ColumnPlan>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            numeric: Some(BinPlan {
                method: BinMethod::NumericPercentile,
                k: PERCENTILE_BINS,
            }),
            datetime: Some(BinPlan {
                method: BinMethod::DatetimeFrequency,
                k: PERCENTILE_BINS,
            }),
            symbolic: None,
            reorder_symbolic: true,
            high_cardinality_threshold: DEFAULT_HIGH_CARDINALITY,
            columns: BTreeMap::new(),
        }
    }
}

impl PreprocessConfig {
    /// No binning, no reordering, nothing dropped.
    pub fn identity() -> Self {
        PreprocessConfig {
            numeric: None,
            datetime: None,
            symbolic: None,
            reorder_symbolic: false,
            high_cardinality_threshold: usize::MAX,
            columns: BTreeMap::new(),
        }
    }

    /// Sets `k` bins for numeric and datetime columns, turning on percentile
    /// and frequency binning if no method is set; an existing symbolic plan
    /// gets `k` too.
    pub fn with_bins(mut self, k: usize) -> Self {
        self.numeric = Some(BinPlan {
            method: self.numeric.map_or(BinMethod::NumericPercentile, |p| p.method),
            k,
        });
        self.datetime = Some(BinPlan {
            method: self.datetime.map_or(BinMethod::DatetimeFrequency, |p| p.method),
            k,
        });
        if let Some(p) = self.symbolic.as_mut() {
            p.k = k;
        }
        self
    }

    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        for (name, plan) in &self.columns {
            let col = ds
                .column(name)
                .ok_or_else(|| Error::config(format!("preprocessing plan for unknown column `{name}`")))?;
            if let Some(ColumnMethod::Bin(m)) = plan.method {
                if !m.applies_to(&col.kind) {
                    return Err(Error::config(format!(
                        "method {m:?} does not apply to {} column `{name}`",
                        col.kind.label()
                    )));
                }
            }
            if plan.k.is_some_and(|k| k < 2) {
                return Err(Error::config(format!("column `{name}`: bin count must be at least 2")));
            }
        }
        for plan in [&self.numeric, &self.datetime, &self.symbolic].into_iter().flatten() {
            if plan.k < 2 {
                return Err(Error::config("bin count must be at least 2"));
            }
        }
        Ok(())
    }
}

/// How prepared codes translate back to original values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Levels {
    /// Prepared code `c` stands for the original values `members[c - 1]`.
    Values { members: Vec<Vec<String>> },
    /// Unbinned numeric or datetime column: prepared code `c` is the value `keys[c - 1]`.
    Keys { keys: Vec<f64>, labels: Vec<String> },
    /// Binned numeric or datetime column: bin `b` lies between `cuts[b - 2]` and `cuts[b - 1]`.
    Cuts {
        cuts: Vec<f64>,
        labels: Vec<String>,
        closed_right: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransform {
    pub name: String,
    pub raw_kind: ColumnKind,
    pub prepared_kind: ColumnKind,
    pub binning: Option<BinningSpec>,
    pub encoding: Option<OrdinalEncoding>,
    pub levels: Levels,
    /// Whether the source column contains missing cells.
    pub has_missing: bool,
}

impl ColumnTransform {
    pub fn n_codes(&self) -> usize {
        match &self.levels {
            Levels::Values { members } => members.len(),
            Levels::Keys { keys, .. } => keys.len(),
            Levels::Cuts { cuts, .. } => cuts.len() + 1,
        }
    }
}

/// Every transform applied by [`prepare`], in prepared-column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformLog {
    pub target_class: u32,
    pub columns: Vec<ColumnTransform>,
    pub dropped: Vec<String>,
}

impl TransformLog {
    pub fn column(&self, name: &str) -> Option<&ColumnTransform> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Encoded training table plus the log needed to decode it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub data: Dataset,
    pub log: TransformLog,
}

impl Prepared {
    /// Wraps a dataset without transforming it.
    pub fn identity(ds: &Dataset) -> Prepared {
        prepare(ds, &PreprocessConfig::identity(), 0).expect("identity preparation cannot fail")
    }
}

enum Outcome {
    Keep(Column, Box<ColumnTransform>),
    Drop(String),
}

/// Applies binning and class-frequency ordering column by column.
/// `target_class` drives the frequency ordering.
pub fn prepare(raw: &Dataset, config: &PreprocessConfig, target_class: u32) -> Result<Prepared> {
    config.validate(raw)?;
    if raw.n_classes() > 0 && target_class as usize >= raw.n_classes() {
        return Err(Error::config(format!("target class code {target_class} out of range")));
    }
    let outcomes: Vec<Outcome> = raw
        .columns
        .par_iter()
        .map(|col| prepare_column(col, &raw.labels, config, target_class))
        .collect::<Result<_>>()?;
    let mut columns = Vec::new();
    let mut transforms = Vec::new();
    let mut dropped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Keep(c, t) => {
                columns.push(c);
                transforms.push(*t);
            }
            Outcome::Drop(name) => dropped.push(name),
        }
    }
    let data = Dataset::new(
        columns,
        raw.labels.clone(),
        raw.class_names.clone(),
        raw.label_name.clone(),
    )?;
    Ok(Prepared {
        data,
        log: TransformLog {
            target_class,
            columns: transforms,
            dropped,
        },
    })
}

fn prepare_column(col: &Column, labels: &[u32], config: &PreprocessConfig, target_class: u32) -> Result<Outcome> {
    let plan = config.columns.get(&col.name).cloned().unwrap_or_default();
    if plan.drop {
        return Ok(Outcome::Drop(col.name.clone()));
    }
    let observed = col.code_counts().iter().skip(1).filter(|&&n| n > 0).count();
    let bin_plan: Option<BinPlan> = match plan.method {
        Some(ColumnMethod::Keep(_)) => None,
        Some(ColumnMethod::Bin(method)) => Some(BinPlan {
            method,
            k: plan.k.unwrap_or(DEFAULT_BINS),
        }),
        None => {
            let default = match &col.kind {
                ColumnKind::Numeric => config.numeric.filter(|p| observed > p.k),
                ColumnKind::Datetime { .. } => config.datetime.filter(|p| observed > p.k),
                k if k.is_symbolic() => config.symbolic.filter(|_| observed > config.high_cardinality_threshold),
                _ => None,
            };
            default.map(|p| BinPlan {
                method: p.method,
                k: plan.k.unwrap_or(p.k),
            })
        }
    };

    if bin_plan.is_none() && col.kind.is_symbolic() && observed > config.high_cardinality_threshold {
        log::warn!(
            "dropping column `{}`: {} distinct values exceed the threshold of {} and no binning is configured",
            col.name,
            observed,
            config.high_cardinality_threshold
        );
        return Ok(Outcome::Drop(col.name.clone()));
    }
    if observed == 0 {
        log::warn!("column `{}` has no values", col.name);
    }

    let has_missing = col.codes.contains(&MISSING);
    let (binning, binned) = match bin_plan {
        Some(p) if observed > 0 => {
            let (spec, c) = apply_bin(col, p)?;
            (Some(spec), c)
        }
        _ => (None, col.clone()),
    };

    let reorder = plan.reorder.unwrap_or(config.reorder_symbolic)
        && matches!(binned.kind, ColumnKind::SymbolicNominal | ColumnKind::SymbolicOrdinal);
    let (encoding, prepared) = if reorder {
        let (enc, c) = encode_by_class_frequency(&binned, labels, target_class);
        (Some(enc), c)
    } else {
        (None, binned)
    };

    let levels = levels_for(col, binning.as_ref(), encoding.as_ref());
    let transform = ColumnTransform {
        name: col.name.clone(),
        raw_kind: col.kind.clone(),
        prepared_kind: prepared.kind.clone(),
        binning,
        encoding,
        levels,
        has_missing,
    };
    Ok(Outcome::Keep(prepared, Box::new(transform)))
}

fn apply_bin(col: &Column, plan: BinPlan) -> Result<(BinningSpec, Column)> {
    match plan.method {
        BinMethod::NumericEqualWidth => bin_numeric(col, plan.k, NumericBinning::EqualWidth),
        BinMethod::NumericPercentile => bin_numeric(col, plan.k, NumericBinning::Percentile),
        BinMethod::SymbolicEqualWidth => bin_symbolic(col, plan.k, SymbolicBinning::EqualWidth),
        BinMethod::SymbolicFrequency => bin_symbolic(col, plan.k, SymbolicBinning::Frequency),
        BinMethod::SymbolicSimilarity => bin_symbolic(col, plan.k, SymbolicBinning::Similarity),
        BinMethod::DatetimeFrequency => bin_datetime(col, plan.k, DatetimeBinning::Frequency),
        BinMethod::DatetimeEqualWidth => bin_datetime(col, plan.k, DatetimeBinning::EqualWidth),
    }
}

fn levels_for(raw: &Column, binning: Option<&BinningSpec>, encoding: Option<&OrdinalEncoding>) -> Levels {
    if raw.kind.has_keys() {
        return match binning {
            Some(spec) => Levels::Cuts {
                cuts: spec.cuts.clone(),
                labels: spec.cuts.iter().map(|&c| format_key(raw, c)).collect(),
                closed_right: spec.closed_right,
            },
            None => Levels::Keys {
                keys: raw.keys.clone().unwrap_or_default(),
                labels: raw.dictionary.clone(),
            },
        };
    }
    // Symbolic: raw codes -> bins -> encoded order.
    let mut members: Vec<Vec<String>> = match binning {
        Some(spec) => spec
            .bins
            .iter()
            .map(|b| match &b.members {
                BinMembers::Values { values, .. } => values.clone(),
                BinMembers::Interval { .. } => vec![b.representative.clone()],
            })
            .collect(),
        None => raw.dictionary.iter().map(|v| vec![v.clone()]).collect(),
    };
    if let Some(enc) = encoding {
        let inv = enc.inverse();
        members = (1..inv.len())
            .map(|new| members[inv[new] as usize - 1].clone())
            .collect();
    }
    Levels::Values { members }
}

/// Renders a natural value the way the column displays it.
pub fn format_key(col: &Column, key: f64) -> String {
    match &col.kind {
        ColumnKind::Datetime { pattern } => crate::dataset::format_datetime_key(key, pattern),
        _ => crate::dataset::format_number(key),
    }
}
