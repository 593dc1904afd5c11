//! Rules over original attribute values.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{Column, Dataset, MISSING, MISSING_LABEL};
use crate::error::{Error, Result};
use crate::preprocess::{ColumnTransform, Levels, TransformLog};
use crate::tree::{DecisionTree, SplitTest};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub text: String,
    pub inclusive: bool,
}

/// Test on one attribute. `missing` flags say whether a missing cell
/// belongs to the listed set (or, for ranges, satisfies the test).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Condition {
    Range {
        lower: Option<Bound>,
        upper: Option<Bound>,
        missing: bool,
    },
    In {
        values: Vec<String>,
        missing: bool,
    },
    NotIn {
        values: Vec<String>,
        missing: bool,
    },
    IsMissing,
}

impl Condition {
    /// Operator symbol in the `≤ > = ≠ ∈ ∉` vocabulary.
    pub fn symbol(&self) -> &'static str {
        match self {
            Condition::Range {
                lower: None,
                upper: Some(u),
                ..
            } => {
                if u.inclusive {
                    "≤"
                } else {
                    "<"
                }
            }
            Condition::Range {
                lower: Some(l),
                upper: None,
                ..
            } => {
                if l.inclusive {
                    "≥"
                } else {
                    ">"
                }
            }
            Condition::Range { .. } => "∈",
            Condition::In { values, missing } if values.len() + usize::from(*missing) == 1 => "=",
            Condition::In { .. } => "∈",
            Condition::NotIn { values, missing } if values.len() + usize::from(*missing) == 1 => "≠",
            Condition::NotIn { .. } => "∉",
            Condition::IsMissing => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub attribute: String,
    #[serde(flatten)]
    pub condition: Condition,
}

impl Predicate {
    /// Whether each code of `col` (index 0 = missing) satisfies the predicate.
    pub fn code_mask(&self, col: &Column) -> Result<Vec<bool>> {
        let n = col.n_codes();
        let mut mask = vec![false; n + 1];
        match &self.condition {
            Condition::IsMissing => mask[0] = true,
            Condition::Range { lower, upper, missing } => {
                if col.keys.is_none() {
                    return Err(Error::arg(format!(
                        "range test on `{}`, which has no natural values",
                        col.name
                    )));
                }
                mask[0] = *missing;
                for code in 1..=n as u32 {
                    let key = col.key(code).unwrap();
                    let above = lower
                        .as_ref()
                        .is_none_or(|b| if b.inclusive { key >= b.value } else { key > b.value });
                    let below = upper
                        .as_ref()
                        .is_none_or(|b| if b.inclusive { key <= b.value } else { key < b.value });
                    mask[code as usize] = above && below;
                }
            }
            Condition::In { values, missing } | Condition::NotIn { values, missing } => {
                let negate = matches!(self.condition, Condition::NotIn { .. });
                mask[0] = *missing != negate;
                for code in 1..=n as u32 {
                    let listed = values.iter().any(|v| Some(v.as_str()) == col.value(code));
                    mask[code as usize] = listed != negate;
                }
            }
        }
        Ok(mask)
    }

    pub fn render(&self) -> String {
        let a = &self.attribute;
        match &self.condition {
            Condition::IsMissing => format!("{a} is missing"),
            Condition::Range { lower, upper, missing } => {
                let lt = |b: &Bound| if b.inclusive { "≤" } else { "<" };
                let core = match (lower, upper) {
                    (Some(l), Some(u)) => format!("{} {} {a} {} {}", l.text, lt(l), lt(u), u.text),
                    (None, Some(u)) => format!("{a} {} {}", lt(u), u.text),
                    (Some(l), None) => format!("{a} {} {}", if l.inclusive { "≥" } else { ">" }, l.text),
                    (None, None) => format!("{a} is present"),
                };
                if *missing {
                    format!("({core} or {a} is missing)")
                } else {
                    core
                }
            }
            Condition::In { values, missing } => {
                if values.len() == 1 && !missing {
                    format!("{a} = {}", values[0])
                } else {
                    format!("{a} is in {}", set_text(values, *missing))
                }
            }
            Condition::NotIn { values, missing } => {
                format!("{a} is not in {}", set_text(values, *missing))
            }
        }
    }
}

fn set_text(values: &[String], missing: bool) -> String {
    let mut items: Vec<&str> = values.iter().map(String::as_str).collect();
    if missing {
        items.push(MISSING_LABEL);
    }
    format!("{{{}}}", items.join(", "))
}

/// Conjunction of predicates describing one cluster of `target_class`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub predicates: Vec<Predicate>,
    pub target_class: u32,
}

impl Rule {
    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }
}

/// Rows of `ds` satisfying every predicate, compared on original values.
pub fn apply_rule(rule: &Rule, ds: &Dataset) -> Result<Vec<usize>> {
    let rows: Vec<usize> = (0..ds.row_count()).collect();
    apply_rule_to(rule, ds, &rows)
}

/// Like [`apply_rule`], restricted to `rows`.
pub fn apply_rule_to(rule: &Rule, ds: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
    let mut tests = Vec::with_capacity(rule.predicates.len());
    for p in &rule.predicates {
        let col = ds
            .column(&p.attribute)
            .ok_or_else(|| Error::UnknownAttribute(p.attribute.clone()))?;
        tests.push((col, p.code_mask(col)?));
    }
    Ok(rows
        .iter()
        .copied()
        .filter(|&r| tests.iter().all(|(col, mask)| mask[col.codes[r] as usize]))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    pub precision: f64,
    pub size: usize,
    pub population_share: f64,
}

/// `IF a ≤ 3 AND b is in {x, y} THEN class (precision 0.95, covers 120 rows, 4.1% of population)`.
pub fn render_rule_text(rule: &Rule, class_names: &[String], stats: Option<&RuleStats>) -> String {
    let mut out = String::from("IF ");
    if rule.predicates.is_empty() {
        out.push_str("(always)");
    } else {
        let parts: Vec<String> = rule.predicates.iter().map(Predicate::render).collect();
        out.push_str(&parts.join(" AND "));
    }
    let class = class_names
        .get(rule.target_class as usize)
        .cloned()
        .unwrap_or_else(|| rule.target_class.to_string());
    let _ = write!(out, " THEN {class}");
    if let Some(s) = stats {
        let _ = write!(
            out,
            " (precision {:.4}, covers {} rows, {:.1}% of population)",
            s.precision,
            s.size,
            100.0 * s.population_share
        );
    }
    out
}

enum Constraint {
    /// Codes in `(lower, upper]`.
    Interval { lower: Option<u32>, upper: Option<u32> },
    /// Allowed codes, index 0 = missing.
    Set(Vec<bool>),
}

/// Turns the root-to-node path into a rule over original values.
///
/// Successive ordinal tests on one attribute are merged into one interval;
/// code thresholds are expanded through binning and ordering into value
/// sets or natural-value bounds. A set is written as its complement when
/// the complement is strictly smaller.
pub fn linearize_rule(tree: &DecisionTree, node_id: usize, log: &TransformLog, target_class: u32) -> Result<Rule> {
    if node_id >= tree.len() {
        return Err(Error::arg(format!("node {node_id} does not exist")));
    }
    let mut order: Vec<String> = Vec::new();
    let mut constraints: Vec<(Constraint, &ColumnTransform)> = Vec::new();
    for (ancestor, went_left) in tree.path(node_id) {
        let split = tree.nodes[ancestor].split.as_ref().expect("ancestors are split nodes");
        let name = &split.attribute_name;
        let pos = match order.iter().position(|n| n == name) {
            Some(p) => p,
            None => {
                let t = log
                    .column(name)
                    .ok_or_else(|| Error::data(format!("no transform record for attribute `{name}`")))?;
                order.push(name.clone());
                let c = match split.test {
                    SplitTest::Ordinal => Constraint::Interval {
                        lower: None,
                        upper: None,
                    },
                    SplitTest::Nominal => Constraint::Set(vec![true; t.n_codes() + 1]),
                };
                constraints.push((c, t));
                order.len() - 1
            }
        };
        match &mut constraints[pos].0 {
            Constraint::Interval { lower, upper } => {
                if went_left {
                    *upper = Some(upper.map_or(split.pivot, |u| u.min(split.pivot)));
                } else {
                    *lower = Some(lower.map_or(split.pivot, |l| l.max(split.pivot)));
                }
            }
            Constraint::Set(allowed) => {
                let p = split.pivot as usize;
                if went_left {
                    for (i, a) in allowed.iter_mut().enumerate() {
                        *a &= i == p;
                    }
                } else if p < allowed.len() {
                    allowed[p] = false;
                }
            }
        }
    }

    let mut predicates = Vec::new();
    for (constraint, t) in constraints {
        if let Some(condition) = translate(constraint, t)? {
            predicates.push(Predicate {
                attribute: t.name.clone(),
                condition,
            });
        }
    }
    Ok(Rule {
        predicates,
        target_class,
    })
}

fn translate(constraint: Constraint, t: &ColumnTransform) -> Result<Option<Condition>> {
    let n = t.n_codes();
    match (&t.levels, constraint) {
        (Levels::Values { members }, constraint) => {
            let allowed = match constraint {
                Constraint::Set(a) => a,
                Constraint::Interval { lower, upper } => (0..=n as u32)
                    .map(|c| lower.is_none_or(|l| c > l) && upper.is_none_or(|u| c <= u))
                    .collect(),
            };
            Ok(set_condition(&allowed, members, t.has_missing))
        }
        (Levels::Keys { keys, labels }, Constraint::Interval { lower, upper }) => {
            let bound = |code: u32, inclusive: bool| Bound {
                value: keys[code as usize - 1],
                text: labels[code as usize - 1].clone(),
                inclusive,
            };
            Ok(range_condition(lower, upper, n, t.has_missing, |c, upper_side| {
                // code <= c  <=>  key <= keys[c];  code > c  <=>  key > keys[c]
                bound(c, upper_side)
            }))
        }
        (
            Levels::Cuts {
                cuts,
                labels,
                closed_right,
            },
            Constraint::Interval { lower, upper },
        ) => {
            let closed_right = *closed_right;
            Ok(range_condition(lower, upper, n, t.has_missing, |b, upper_side| {
                // bin <= b  <=>  x <= cut (right-closed) or x < cut (left-closed)
                Bound {
                    value: cuts[b as usize - 1],
                    text: labels[b as usize - 1].clone(),
                    inclusive: if upper_side { closed_right } else { !closed_right },
                }
            }))
        }
        (_, Constraint::Set(_)) => Err(Error::data(format!(
            "equality test on `{}`, which is ordered by value",
            t.name
        ))),
    }
}

fn range_condition(
    lower: Option<u32>,
    upper: Option<u32>,
    n: usize,
    has_missing: bool,
    bound: impl Fn(u32, bool) -> Bound,
) -> Option<Condition> {
    if upper == Some(MISSING) {
        return Some(Condition::IsMissing);
    }
    let lower_bound = lower.filter(|&l| l >= 1 && (l as usize) < n).map(|l| bound(l, false));
    let upper_bound = upper.filter(|&u| (u as usize) < n).map(|u| bound(u, true));
    let missing = lower.is_none() && has_missing;
    let excludes_missing = lower.is_some() && has_missing;
    if lower_bound.is_none() && upper_bound.is_none() && !excludes_missing {
        return None;
    }
    Some(Condition::Range {
        lower: lower_bound,
        upper: upper_bound,
        missing,
    })
}

fn set_condition(allowed: &[bool], members: &[Vec<String>], has_missing: bool) -> Option<Condition> {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (i, group) in members.iter().enumerate() {
        let target = if allowed[i + 1] { &mut inside } else { &mut outside };
        target.extend(group.iter().cloned());
    }
    let missing_in = has_missing && allowed[0];
    let missing_out = has_missing && !allowed[0];
    if outside.is_empty() && !missing_out {
        return None;
    }
    let n_in = inside.len() + usize::from(missing_in);
    let n_out = outside.len() + usize::from(missing_out);
    Some(if n_out < n_in {
        Condition::NotIn {
            values: outside,
            missing: missing_out,
        }
    } else {
        Condition::In {
            values: inside,
            missing: missing_in,
        }
    })
}
