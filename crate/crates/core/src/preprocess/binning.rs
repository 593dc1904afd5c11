//! Value binning for numeric, datetime and symbolic columns.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::similarity::jaro_winkler_distance;
use crate::dataset::{format_datetime_key, format_number, Column, ColumnKind, MISSING};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinMethod {
    NumericEqualWidth,
    NumericPercentile,
    SymbolicEqualWidth,
    SymbolicFrequency,
    SymbolicSimilarity,
    DatetimeFrequency,
    DatetimeEqualWidth,
}

impl BinMethod {
    pub fn applies_to(self, kind: &ColumnKind) -> bool {
        match self {
            BinMethod::NumericEqualWidth | BinMethod::NumericPercentile => *kind == ColumnKind::Numeric,
            BinMethod::DatetimeFrequency | BinMethod::DatetimeEqualWidth => {
                matches!(kind, ColumnKind::Datetime { .. })
            }
            _ => kind.is_symbolic(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumericBinning {
    EqualWidth,
    Percentile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolicBinning {
    EqualWidth,
    Frequency,
    Similarity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatetimeBinning {
    Frequency,
    EqualWidth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BinMembers {
    /// Original codes (and their text) grouped into one symbolic bin.
    Values { codes: Vec<u32>, values: Vec<String> },
    /// Observed range of a numeric or datetime bin.
    Interval {
        lower: f64,
        upper: f64,
        lower_closed: bool,
        upper_closed: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub id: u32,
    pub members: BinMembers,
    pub representative: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub column: String,
    pub method: BinMethod,
    pub k: usize,
    pub bins: Vec<Bin>,
    /// Interior edges of interval bins, ascending; empty for symbolic bins.
    pub cuts: Vec<f64>,
    /// `true` when an edge value belongs to the lower bin, i.e. `(lo, hi]`.
    pub closed_right: bool,
}

impl BinningSpec {
    /// Bin id (1-based) of a natural value under this spec's edges.
    pub fn bin_of_key(&self, key: f64) -> u32 {
        bin_index(&self.cuts, self.closed_right, key) + 1
    }
}

fn bin_index(cuts: &[f64], closed_right: bool, key: f64) -> u32 {
    let below = if closed_right {
        cuts.partition_point(|&c| c < key)
    } else {
        cuts.partition_point(|&c| c <= key)
    };
    below as u32
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::arg(format!("bin count must be at least 2, got {k}")));
    }
    Ok(())
}

/// Non-missing keys with multiplicity, sorted ascending.
fn observed_keys(col: &Column) -> Result<Vec<f64>> {
    let keys = col
        .keys
        .as_ref()
        .ok_or_else(|| Error::arg(format!("column `{}` has no natural values", col.name)))?;
    let mut v: Vec<f64> = col
        .codes
        .iter()
        .filter(|&&c| c != MISSING)
        .map(|&c| keys[c as usize - 1])
        .collect();
    if v.is_empty() {
        return Err(Error::data(format!("column `{}` has no non-missing values", col.name)));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn equal_width_cuts(sorted: &[f64], k: usize) -> Vec<f64> {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if hi <= lo {
        return Vec::new();
    }
    let width = (hi - lo) / k as f64;
    (1..k).map(|i| lo + i as f64 * width).collect()
}

/// Edge `i` is the smallest value whose 1-based rank reaches `i * n / k`.
fn quantile_cuts(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    (1..k).map(|i| sorted[(i * n).div_ceil(k) - 1]).collect()
}

/// Keeps only edges that leave at least one observed value on each side
/// since the previously kept edge, so every bin is non-empty.
fn prune_cuts(candidates: Vec<f64>, sorted: &[f64], closed_right: bool) -> Vec<f64> {
    let below = |c: f64| {
        if closed_right {
            sorted.partition_point(|&v| v <= c)
        } else {
            sorted.partition_point(|&v| v < c)
        }
    };
    let mut kept: Vec<f64> = Vec::new();
    let mut kept_below = 0usize;
    for c in candidates {
        if kept.last().is_some_and(|&last| c <= last) {
            continue;
        }
        let b = below(c);
        if b > kept_below && b < sorted.len() {
            kept.push(c);
            kept_below = b;
        }
    }
    kept
}

struct IntervalStyle<'a> {
    method: BinMethod,
    closed_right: bool,
    /// Midpoint representatives (equal-width) or upper edges (quantile-style).
    midpoint: bool,
    format: &'a dyn Fn(f64) -> String,
}

fn bin_intervals(
    col: &Column,
    k: usize,
    cuts: Vec<f64>,
    sorted: &[f64],
    style: IntervalStyle,
) -> (BinningSpec, Column) {
    let cuts = prune_cuts(cuts, sorted, style.closed_right);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let n_bins = cuts.len() + 1;
    let mut bins = Vec::with_capacity(n_bins);
    let mut reps = Vec::with_capacity(n_bins);
    let mut labels = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let lower = if b == 0 { min } else { cuts[b - 1] };
        let upper = if b + 1 == n_bins { max } else { cuts[b] };
        let lower_closed = b == 0 || !style.closed_right;
        let upper_closed = b + 1 == n_bins || style.closed_right;
        let rep = if style.midpoint { (lower + upper) / 2.0 } else { upper };
        labels.push(format!(
            "{}{}, {}{}",
            if lower_closed { '[' } else { '(' },
            (style.format)(lower),
            (style.format)(upper),
            if upper_closed { ']' } else { ')' },
        ));
        reps.push(rep);
        bins.push(Bin {
            id: b as u32 + 1,
            members: BinMembers::Interval {
                lower,
                upper,
                lower_closed,
                upper_closed,
            },
            representative: (style.format)(rep),
        });
    }
    let keys = col.keys.as_ref().expect("checked by observed_keys");
    let codes = col
        .codes
        .iter()
        .map(|&c| {
            if c == MISSING {
                MISSING
            } else {
                bin_index(&cuts, style.closed_right, keys[c as usize - 1]) + 1
            }
        })
        .collect();
    let spec = BinningSpec {
        column: col.name.clone(),
        method: style.method,
        k,
        bins,
        cuts,
        closed_right: style.closed_right,
    };
    let column = Column {
        name: col.name.clone(),
        kind: col.kind.clone(),
        codes,
        dictionary: labels,
        keys: Some(reps),
    };
    (spec, column)
}

/// Equal-width bins `[lo, hi)` over `[min, max]`, or quantile bins
/// `(lo, hi]` with edges at the `i/k` sorted-rank quantiles. Empty bins are
/// dropped, so at most `k` bins result.
pub fn bin_numeric(col: &Column, k: usize, method: NumericBinning) -> Result<(BinningSpec, Column)> {
    check_k(k)?;
    if col.kind != ColumnKind::Numeric {
        return Err(Error::arg(format!("column `{}` is not numeric", col.name)));
    }
    let sorted = observed_keys(col)?;
    let fmt = |x: f64| format_number(x);
    Ok(match method {
        NumericBinning::EqualWidth => {
            let cuts = equal_width_cuts(&sorted, k);
            bin_intervals(
                col,
                k,
                cuts,
                &sorted,
                IntervalStyle {
                    method: BinMethod::NumericEqualWidth,
                    closed_right: false,
                    midpoint: true,
                    format: &fmt,
                },
            )
        }
        NumericBinning::Percentile => {
            let cuts = quantile_cuts(&sorted, k);
            bin_intervals(
                col,
                k,
                cuts,
                &sorted,
                IntervalStyle {
                    method: BinMethod::NumericPercentile,
                    closed_right: true,
                    midpoint: false,
                    format: &fmt,
                },
            )
        }
    })
}

/// Frequency bins hold roughly `n / k` timestamps each; equal-width bins
/// split `[earliest, latest]` into `k` intervals of equal duration.
pub fn bin_datetime(col: &Column, k: usize, method: DatetimeBinning) -> Result<(BinningSpec, Column)> {
    check_k(k)?;
    let ColumnKind::Datetime { pattern } = &col.kind else {
        return Err(Error::arg(format!("column `{}` is not a datetime column", col.name)));
    };
    let sorted = observed_keys(col)?;
    let fmt = |x: f64| format_datetime_key(x, pattern);
    Ok(match method {
        DatetimeBinning::Frequency => {
            let cuts = quantile_cuts(&sorted, k);
            bin_intervals(
                col,
                k,
                cuts,
                &sorted,
                IntervalStyle {
                    method: BinMethod::DatetimeFrequency,
                    closed_right: true,
                    midpoint: false,
                    format: &fmt,
                },
            )
        }
        DatetimeBinning::EqualWidth => {
            let cuts = equal_width_cuts(&sorted, k);
            bin_intervals(
                col,
                k,
                cuts,
                &sorted,
                IntervalStyle {
                    method: BinMethod::DatetimeEqualWidth,
                    closed_right: false,
                    midpoint: true,
                    format: &fmt,
                },
            )
        }
    })
}

/// Groups symbolic values into at most `k` bins. When `k` reaches the number
/// of distinct values the binning is the identity.
pub fn bin_symbolic(col: &Column, k: usize, method: SymbolicBinning) -> Result<(BinningSpec, Column)> {
    check_k(k)?;
    if !col.kind.is_symbolic() {
        return Err(Error::arg(format!("column `{}` is not symbolic", col.name)));
    }
    let counts = col.code_counts();
    let present: Vec<u32> = (1..=col.n_codes() as u32).filter(|&c| counts[c as usize] > 0).collect();
    let bin_method = match method {
        SymbolicBinning::EqualWidth => BinMethod::SymbolicEqualWidth,
        SymbolicBinning::Frequency => BinMethod::SymbolicFrequency,
        SymbolicBinning::Similarity => BinMethod::SymbolicSimilarity,
    };

    let groups: Vec<Vec<u32>> = if present.len() <= k {
        if present.len() < k {
            log::warn!(
                "column `{}`: {} bins requested for {} distinct values, keeping values as they are",
                col.name,
                k,
                present.len()
            );
        }
        present.iter().map(|&c| vec![c]).collect()
    } else {
        match method {
            SymbolicBinning::EqualWidth => equal_cardinality(&present, k),
            SymbolicBinning::Frequency => frequency_pack(&present, &counts, k),
            SymbolicBinning::Similarity => {
                let mut sorted = present.clone();
                sorted.sort_by(|&a, &b| col.value(a).cmp(&col.value(b)));
                similarity_runs(col, &sorted, k)
            }
        }
    };

    let mut remap = vec![MISSING; col.n_codes() + 1];
    let mut bins = Vec::with_capacity(groups.len());
    let mut labels = Vec::with_capacity(groups.len());
    for (i, group) in groups.iter().enumerate() {
        let id = i as u32 + 1;
        let values: Vec<String> = group.iter().map(|&c| col.value(c).unwrap().to_owned()).collect();
        for &c in group {
            remap[c as usize] = id;
        }
        let label = if values.len() == 1 {
            values[0].clone()
        } else {
            format!("{{{}}}", values.join(", "))
        };
        bins.push(Bin {
            id,
            members: BinMembers::Values {
                codes: group.clone(),
                values,
            },
            representative: label.clone(),
        });
        labels.push(label);
    }
    let column = Column {
        name: col.name.clone(),
        kind: col.kind.clone(),
        codes: col.codes.iter().map(|&c| remap[c as usize]).collect(),
        dictionary: labels,
        keys: None,
    };
    let spec = BinningSpec {
        column: col.name.clone(),
        method: bin_method,
        k,
        bins,
        cuts: Vec::new(),
        closed_right: false,
    };
    Ok((spec, column))
}

fn equal_cardinality(values: &[u32], k: usize) -> Vec<Vec<u32>> {
    let (base, extra) = (values.len() / k, values.len() % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        out.push(values[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Most frequent values first; a bin closes once its mass reaches `n / k`.
fn frequency_pack(values: &[u32], counts: &[usize], k: usize) -> Vec<Vec<u32>> {
    let mut order = values.to_vec();
    order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
    let total: usize = values.iter().map(|&c| counts[c as usize]).sum();
    let target = total as f64 / k as f64;
    let mut out: Vec<Vec<u32>> = Vec::with_capacity(k);
    let mut current = Vec::new();
    let mut mass = 0usize;
    for c in order {
        current.push(c);
        mass += counts[c as usize];
        if mass as f64 >= target && out.len() + 1 < k {
            out.push(std::mem::take(&mut current));
            mass = 0;
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Cuts the lexicographically sorted values at the `k - 1` adjacent pairs
/// with the largest Jaro-Winkler distance (earlier position wins ties).
fn similarity_runs(col: &Column, sorted: &[u32], k: usize) -> Vec<Vec<u32>> {
    let gaps: Vec<f64> = sorted
        .windows(2)
        .map(|w| jaro_winkler_distance(col.value(w[0]).unwrap(), col.value(w[1]).unwrap()))
        .collect();
    let mut idx: Vec<usize> = (0..gaps.len()).collect();
    idx.sort_by(|&a, &b| gaps[b].partial_cmp(&gaps[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut cut_after: Vec<usize> = idx.into_iter().take(k - 1).collect();
    cut_after.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for c in cut_after {
        out.push(sorted[start..=c].to_vec());
        start = c + 1;
    }
    out.push(sorted[start..].to_vec());
    out
}
