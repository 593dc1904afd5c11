//! Planting hidden groups into a feature table and scoring their recovery.

mod corpora;

pub use corpora::{adult_features, adult_groups, adult_like, titanic_like, ADULT_ROWS, TITANIC_ROWS};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{format_number, Dataset};
use crate::error::{Error, Result};
use crate::extract::{apply_rule, Bound, Condition, Predicate, Rule};

pub const DEFAULT_P_IN: f64 = 0.95;
pub const DEFAULT_P_OUT: f64 = 0.05;
pub const POSITIVE: &str = "yes";
pub const NEGATIVE: &str = "no";
pub const PLANTED_LABEL: &str = "label";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenGroupSpec {
    pub name: String,
    pub rule: Rule,
    /// Expected share of the population, for reporting only.
    pub share: Option<f64>,
    pub p_in: f64,
    pub p_out: f64,
}

impl HiddenGroupSpec {
    pub fn new(name: impl Into<String>, predicates: Vec<Predicate>) -> Self {
        HiddenGroupSpec {
            name: name.into(),
            rule: Rule {
                predicates,
                target_class: 1,
            },
            share: None,
            p_in: DEFAULT_P_IN,
            p_out: DEFAULT_P_OUT,
        }
    }

    pub fn with_share(mut self, share: f64) -> Self {
        self.share = Some(share);
        self
    }

    pub fn with_noise(mut self, p_in: f64, p_out: f64) -> Self {
        self.p_in = p_in;
        self.p_out = p_out;
        self
    }
}

pub struct Planted {
    /// Features with a `label` column of `no`/`yes`.
    pub data: Dataset,
    /// Rows matching each spec's rule, in spec order.
    pub truth: Vec<Vec<usize>>,
}

/// Labels rows `yes` with probability `p_in` when they match a spec rule
/// (first match wins) and with the smallest `p_out` otherwise. Feature
/// values are left untouched; the existing label column is replaced.
pub fn plant_groups(features: &Dataset, specs: &[HiddenGroupSpec], seed: u64) -> Result<Planted> {
    if specs.is_empty() {
        return Err(Error::arg("no hidden groups given"));
    }
    for s in specs {
        if !(0.0 <= s.p_out && s.p_out < s.p_in && s.p_in <= 1.0) {
            return Err(Error::arg(format!(
                "group `{}`: need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}",
                s.name, s.p_in, s.p_out
            )));
        }
        check_domain(&s.rule, features).map_err(|e| Error::arg(format!("group `{}`: {e}", s.name)))?;
    }
    let truth: Vec<Vec<usize>> = specs
        .iter()
        .map(|s| apply_rule(&s.rule, features))
        .collect::<Result<_>>()?;

    let n = features.row_count();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut overlapping = 0usize;
    for (g, rows) in truth.iter().enumerate() {
        for &r in rows {
            match owner[r] {
                None => owner[r] = Some(g),
                Some(_) => overlapping += 1,
            }
        }
    }
    if overlapping > 0 {
        log::warn!(
            "{overlapping} rows ({:.2}%) match more than one group; the first group wins",
            100.0 * overlapping as f64 / n as f64
        );
    }
    let background = specs.iter().map(|s| s.p_out).fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = owner
        .iter()
        .map(|o| {
            let p = o.map_or(background, |g| specs[g].p_in);
            u32::from(rng.gen::<f64>() < p)
        })
        .collect();
    let data = features.with_labels(labels, vec![NEGATIVE.into(), POSITIVE.into()], PLANTED_LABEL)?;
    Ok(Planted { data, truth })
}

/// Set values must exist in the column; ranges need a numeric or datetime column.
fn check_domain(rule: &Rule, ds: &Dataset) -> Result<()> {
    for p in &rule.predicates {
        let col = ds
            .column(&p.attribute)
            .ok_or_else(|| Error::UnknownAttribute(p.attribute.clone()))?;
        match &p.condition {
            Condition::In { values, .. } | Condition::NotIn { values, .. } => {
                if let Some(v) = values.iter().find(|v| !col.dictionary.contains(v)) {
                    return Err(Error::arg(format!("`{v}` is not a value of `{}`", col.name)));
                }
            }
            Condition::Range { .. } if col.keys.is_none() => {
                return Err(Error::arg(format!("`{}` is not numeric", col.name)));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Subtracts `constant` from a numeric column.
pub fn shift_column(ds: &Dataset, column: &str, constant: f64) -> Result<Dataset> {
    let idx = ds
        .column_index(column)
        .ok_or_else(|| Error::UnknownAttribute(column.to_string()))?;
    let mut out = ds.clone();
    let col = &mut out.columns[idx];
    let Some(keys) = col
        .keys
        .as_mut()
        .filter(|_| col.kind == crate::dataset::ColumnKind::Numeric)
    else {
        return Err(Error::arg(format!("cannot shift non-numeric column `{column}`")));
    };
    for (k, text) in keys.iter_mut().zip(col.dictionary.iter_mut()) {
        *k -= constant;
        *text = format_number(*k);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub jaccard: f64,
    pub precision: f64,
    pub recall: f64,
}

impl Overlap {
    /// `found` against `planted`; both sorted.
    pub fn of(found: &[usize], planted: &[usize]) -> Overlap {
        let (mut i, mut j, mut inter) = (0, 0, 0usize);
        while i < found.len() && j < planted.len() {
            match found[i].cmp(&planted[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    inter += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = found.len() + planted.len() - inter;
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        Overlap {
            jaccard: if union == 0 { 1.0 } else { inter as f64 / union as f64 },
            precision: ratio(inter, found.len()),
            recall: ratio(inter, planted.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub group: usize,
    pub cluster: usize,
    #[serde(flatten)]
    pub overlap: Overlap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// `matrix[group][cluster]`.
    pub matrix: Vec<Vec<Overlap>>,
    /// Greedy one-to-one pairing, highest Jaccard first.
    pub matches: Vec<Match>,
}

impl RecoveryReport {
    pub fn for_group(&self, group: usize) -> Option<&Match> {
        self.matches.iter().find(|m| m.group == group)
    }
}

pub fn evaluate_recovery(clusters: &[Vec<usize>], truth: &[Vec<usize>]) -> RecoveryReport {
    let sorted = |sets: &[Vec<usize>]| -> Vec<Vec<usize>> {
        sets.iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect()
    };
    let (clusters, truth) = (sorted(clusters), sorted(truth));
    let matrix: Vec<Vec<Overlap>> = truth
        .iter()
        .map(|t| clusters.iter().map(|c| Overlap::of(c, t)).collect())
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..truth.len())
        .flat_map(|g| (0..clusters.len()).map(move |c| (g, c)))
        .collect();
    pairs.sort_by(|a, b| {
        matrix[b.0][b.1]
            .jaccard
            .total_cmp(&matrix[a.0][a.1].jaccard)
            .then(a.cmp(b))
    });
    let mut used_g = vec![false; truth.len()];
    let mut used_c = vec![false; clusters.len()];
    let mut matches = Vec::new();
    for (g, c) in pairs {
        if used_g[g] || used_c[c] {
            continue;
        }
        used_g[g] = true;
        used_c[c] = true;
        matches.push(Match {
            group: g,
            cluster: c,
            overlap: matrix[g][c].clone(),
        });
    }
    matches.sort_by_key(|m| m.group);
    RecoveryReport { matrix, matches }
}

/// One predicate in a spec file.
///
/// `op` is one of `<=`, `<`, `>`, `>=`, `=`, `!=`, `in`, `not-in`, `missing`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateSpec {
    pub attribute: String,
    pub op: String,
    #[serde(default)]
    pub value: Option<Scalar>,
    #[serde(default)]
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Number(x) => format_number(*x),
            Scalar::Text(s) => s.clone(),
        }
    }
}

impl PredicateSpec {
    pub fn to_predicate(&self) -> Result<Predicate> {
        let number = || match &self.value {
            Some(Scalar::Number(x)) => Ok(*x),
            Some(Scalar::Text(s)) => s
                .parse::<f64>()
                .map_err(|_| Error::config(format!("`{}`: `{s}` is not a number", self.attribute))),
            None => Err(Error::config(format!(
                "`{}`: `{}` needs a value",
                self.attribute, self.op
            ))),
        };
        let bound = |inclusive: bool| -> Result<Bound> {
            let value = number()?;
            Ok(Bound {
                value,
                text: format_number(value),
                inclusive,
            })
        };
        let single = || -> Result<Vec<String>> {
            self.value
                .as_ref()
                .map(|v| vec![v.text()])
                .ok_or_else(|| Error::config(format!("`{}`: `{}` needs a value", self.attribute, self.op)))
        };
        let condition = match self.op.as_str() {
            "<=" | "<" => Condition::Range {
                lower: None,
                upper: Some(bound(self.op == "<=")?),
                missing: false,
            },
            ">" | ">=" => Condition::Range {
                lower: Some(bound(self.op == ">=")?),
                upper: None,
                missing: false,
            },
            "=" => Condition::In {
                values: single()?,
                missing: false,
            },
            "!=" => Condition::NotIn {
                values: single()?,
                missing: false,
            },
            "in" | "not-in" if self.values.is_empty() => {
                return Err(Error::config(format!("`{}`: empty value set", self.attribute)))
            }
            "in" => Condition::In {
                values: self.values.clone(),
                missing: false,
            },
            "not-in" => Condition::NotIn {
                values: self.values.clone(),
                missing: false,
            },
            "missing" => Condition::IsMissing,
            other => return Err(Error::config(format!("unknown operator `{other}`"))),
        };
        Ok(Predicate {
            attribute: self.attribute.clone(),
            condition,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpecFile {
    pub name: String,
    #[serde(default)]
    pub share: Option<f64>,
    #[serde(default)]
    pub p_in: Option<f64>,
    #[serde(default)]
    pub p_out: Option<f64>,
    pub predicates: Vec<PredicateSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub column: String,
    pub constant: f64,
}

/// Contents of a TOML planting spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_p_in")]
    pub p_in: f64,
    #[serde(default = "default_p_out")]
    pub p_out: f64,
    /// Applied to the features before planting.
    #[serde(default)]
    pub shift: Vec<ShiftSpec>,
    #[serde(rename = "group")]
    pub groups: Vec<GroupSpecFile>,
}

fn default_p_in() -> f64 {
    DEFAULT_P_IN
}

fn default_p_out() -> f64 {
    DEFAULT_P_OUT
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<SynthSpec> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SynthSpec> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read `{}`: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn hidden_groups(&self) -> Result<Vec<HiddenGroupSpec>> {
        self.groups
            .iter()
            .map(|g| {
                let predicates = g
                    .predicates
                    .iter()
                    .map(PredicateSpec::to_predicate)
                    .collect::<Result<_>>()?;
                let mut spec = HiddenGroupSpec::new(g.name.clone(), predicates)
                    .with_noise(g.p_in.unwrap_or(self.p_in), g.p_out.unwrap_or(self.p_out));
                spec.share = g.share;
                Ok(spec)
            })
            .collect()
    }

    /// Applies the shifts, then plants the groups.
    pub fn apply(&self, features: &Dataset) -> Result<Planted> {
        let mut ds = features.clone();
        for s in &self.shift {
            ds = shift_column(&ds, &s.column, s.constant)?;
        }
        plant_groups(&ds, &self.hidden_groups()?, self.seed)
    }
}
