use rayon::prelude::*;

use super::{gain_unchecked, Split, SplitTest, TrainParams};
use crate::dataset::{Column, Dataset};

/// Gains closer than this are treated as equal; the earlier candidate
/// (lower column index, then lower pivot) wins.
pub const GAIN_EPSILON: f64 = 1e-12;

struct Candidate {
    pivot: u32,
    gain: f64,
}

/// Exhaustive search over every attribute and every code present in `rows`.
///
/// Ordinal columns are tested with `x <= pivot`, nominal ones with
/// `x == pivot`; the missing code takes part like any other code. Returns
/// the split with the largest gain above `params.min_gain`, if any.
pub fn best_split(rows: &[usize], ds: &Dataset, params: &TrainParams) -> Option<Split> {
    let min_leaf = params.min_samples_leaf.max(1);
    if rows.len() < 2 * min_leaf {
        return None;
    }
    let parent = ds.class_counts(rows.iter().copied());
    let per_column: Vec<Option<Candidate>> = ds
        .columns
        .par_iter()
        .map(|col| best_for_column(col, &ds.labels, rows, &parent, params))
        .collect();

    let mut best: Option<(usize, Candidate)> = None;
    for (attr, cand) in per_column.into_iter().enumerate() {
        let Some(cand) = cand else { continue };
        if best.as_ref().is_none_or(|(_, b)| cand.gain > b.gain + GAIN_EPSILON) {
            best = Some((attr, cand));
        }
    }
    best.map(|(attr, c)| {
        let col = &ds.columns[attr];
        Split {
            attribute: attr,
            attribute_name: col.name.clone(),
            pivot: c.pivot,
            test: if col.kind.is_ordinal() {
                SplitTest::Ordinal
            } else {
                SplitTest::Nominal
            },
            gain: c.gain,
        }
    })
}

fn best_for_column(
    col: &Column,
    labels: &[u32],
    rows: &[usize],
    parent: &[usize],
    params: &TrainParams,
) -> Option<Candidate> {
    let k = parent.len();
    let n_codes = col.n_codes() + 1;
    let mut hist = vec![0usize; n_codes * k];
    for &r in rows {
        hist[col.codes[r] as usize * k + labels[r] as usize] += 1;
    }
    let n = rows.len();
    let min_leaf = params.min_samples_leaf.max(1);
    let threshold = params.min_gain + GAIN_EPSILON;
    let mut best: Option<Candidate> = None;
    let mut consider = |pivot: u32, left: &[usize], right: &[usize], nl: usize| {
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            return;
        }
        let gain = gain_unchecked(parent, left, right, nl, nr, params.impurity);
        if gain > threshold && best.as_ref().is_none_or(|b| gain > b.gain + GAIN_EPSILON) {
            best = Some(Candidate { pivot, gain });
        }
    };

    let mut left = vec![0usize; k];
    let mut right = vec![0usize; k];
    if col.kind.is_ordinal() {
        let mut nl = 0;
        for code in 0..n_codes {
            let counts = &hist[code * k..(code + 1) * k];
            let present: usize = counts.iter().sum();
            if present == 0 {
                continue;
            }
            for c in 0..k {
                left[c] += counts[c];
                right[c] = parent[c] - left[c];
            }
            nl += present;
            consider(code as u32, &left, &right, nl);
        }
    } else {
        for code in 0..n_codes {
            let counts = &hist[code * k..(code + 1) * k];
            let present: usize = counts.iter().sum();
            if present == 0 {
                continue;
            }
            for c in 0..k {
                left[c] = counts[c];
                right[c] = parent[c] - counts[c];
            }
            consider(code as u32, &left, &right, present);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, ColumnKind};

    #[test]
    fn pure_node_has_no_split() {
        let col = Column::numeric("x", &[Some(1.0), Some(2.0), Some(3.0)]);
        let ds = Dataset::new(vec![col], vec![1, 1, 1], vec!["a".into(), "b".into()], "y").unwrap();
        assert!(best_split(&[0, 1, 2], &ds, &TrainParams::default()).is_none());
    }

    #[test]
    fn nominal_uses_equality() {
        // b is the odd one out, and is not at either end of the code order
        let cells = [Some("a"), Some("b"), Some("c"), Some("b")];
        let col = Column::symbolic("s", ColumnKind::SymbolicNominal, &cells);
        let ds = Dataset::new(vec![col], vec![0, 1, 0, 1], vec!["n".into(), "p".into()], "y").unwrap();
        let split = best_split(&[0, 1, 2, 3], &ds, &TrainParams::default()).unwrap();
        assert_eq!(split.test, SplitTest::Nominal);
        assert_eq!(split.pivot, 2);
        assert!((split.gain - 0.5).abs() < 1e-15);
    }

    #[test]
    fn missing_sorts_lowest_for_ordinal() {
        let col = Column::numeric("x", &[None, None, Some(1.0), Some(2.0)]);
        let ds = Dataset::new(vec![col], vec![1, 1, 0, 0], vec!["n".into(), "p".into()], "y").unwrap();
        let split = best_split(&[0, 1, 2, 3], &ds, &TrainParams::default()).unwrap();
        assert_eq!(split.pivot, 0);
    }

    #[test]
    fn min_samples_leaf_and_min_gain() {
        let col = Column::numeric("x", &[Some(1.0), Some(2.0), Some(3.0), Some(4.0)]);
        let ds = Dataset::new(vec![col], vec![1, 0, 0, 0], vec!["n".into(), "p".into()], "y").unwrap();
        let rows = [0, 1, 2, 3];
        let p = TrainParams {
            min_samples_leaf: 2,
            ..Default::default()
        };
        assert_eq!(best_split(&rows, &ds, &p).unwrap().pivot, 2);
        let p = TrainParams {
            min_gain: 0.5,
            ..Default::default()
        };
        assert!(best_split(&rows, &ds, &p).is_none());
    }

    #[test]
    fn ties_prefer_lower_column() {
        let a = Column::numeric("a", &[Some(1.0), Some(2.0)]);
        let b = Column::numeric("b", &[Some(1.0), Some(2.0)]);
        let ds = Dataset::new(vec![a, b], vec![0, 1], vec!["n".into(), "p".into()], "y").unwrap();
        assert_eq!(best_split(&[0, 1], &ds, &TrainParams::default()).unwrap().attribute, 0);
    }
}
