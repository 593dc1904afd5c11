//! Class-frequency ordinal encoding of symbolic columns.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{Column, ColumnKind, MISSING};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContingencyRow {
    pub code: u32,
    pub value: String,
    pub in_class: usize,
    pub total: usize,
    pub frequency: f64,
}

/// Per observed value: how often it occurs in the target class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub column: String,
    pub target_class: u32,
    pub rows: Vec<ContingencyRow>,
}

impl ContingencyTable {
    pub fn get(&self, value: &str) -> Option<&ContingencyRow> {
        self.rows.iter().find(|r| r.value == value)
    }
}

pub fn build_contingency(col: &Column, labels: &[u32], target_class: u32) -> ContingencyTable {
    let mut in_class = vec![0usize; col.n_codes() + 1];
    let mut total = vec![0usize; col.n_codes() + 1];
    for (&code, &label) in col.codes.iter().zip(labels) {
        total[code as usize] += 1;
        if label == target_class {
            in_class[code as usize] += 1;
        }
    }
    let rows = (1..=col.n_codes())
        .filter(|&c| total[c] > 0)
        .map(|c| ContingencyRow {
            code: c as u32,
            value: col.value(c as u32).unwrap().to_owned(),
            in_class: in_class[c],
            total: total[c],
            frequency: in_class[c] as f64 / total[c] as f64,
        })
        .collect();
    ContingencyTable {
        column: col.name.clone(),
        target_class,
        rows,
    }
}

/// Bijection on codes; `permutation[old] = new`, with the missing sentinel fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrdinalEncoding {
    pub column: String,
    pub target_class: u32,
    pub permutation: Vec<u32>,
    /// Values in their new order (new code `c` at index `c - 1`).
    pub order: Vec<String>,
}

impl OrdinalEncoding {
    pub fn inverse(&self) -> Vec<u32> {
        let mut inv = vec![MISSING; self.permutation.len()];
        for (old, &new) in self.permutation.iter().enumerate() {
            inv[new as usize] = old as u32;
        }
        inv
    }

    pub fn apply(&self, col: &Column) -> Column {
        Column {
            name: col.name.clone(),
            kind: ColumnKind::SymbolicOrdinal,
            codes: col.codes.iter().map(|&c| self.permutation[c as usize]).collect(),
            dictionary: self.order.clone(),
            keys: None,
        }
    }
}

/// Reorders values by descending target-class frequency. Ties keep the prior
/// dictionary order; values absent from the rows go last.
pub fn encode_by_class_frequency(col: &Column, labels: &[u32], target_class: u32) -> (OrdinalEncoding, Column) {
    let table = build_contingency(col, labels, target_class);
    let mut stats = vec![(0usize, 0usize); col.n_codes() + 1];
    for r in &table.rows {
        stats[r.code as usize] = (r.in_class, r.total);
    }
    let mut order: Vec<u32> = (1..=col.n_codes() as u32).collect();
    order.sort_by(|&a, &b| {
        let (ia, ta) = stats[a as usize];
        let (ib, tb) = stats[b as usize];
        match (ta, tb) {
            (0, 0) => Ordering::Equal,
            (0, _) => Ordering::Greater,
            (_, 0) => Ordering::Less,
            // ia / ta > ib / tb  <=>  ia * tb > ib * ta
            _ => (ib * ta).cmp(&(ia * tb)),
        }
        .then(a.cmp(&b))
    });
    let mut permutation = vec![MISSING; col.n_codes() + 1];
    for (new, &old) in order.iter().enumerate() {
        permutation[old as usize] = new as u32 + 1;
    }
    let encoding = OrdinalEncoding {
        column: col.name.clone(),
        target_class,
        permutation,
        order: order.iter().map(|&c| col.value(c).unwrap().to_owned()).collect(),
    };
    let column = encoding.apply(col);
    (encoding, column)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// The four-city example: codes 1..4 are Amsterdam, London, New York, Shanghai.
    fn cities() -> (Column, Vec<u32>) {
        let names = ["Amsterdam", "London", "New York", "Shanghai"];
        let codes = [1, 2, 3, 4, 4, 3, 2, 1];
        let cells: Vec<Option<&str>> = codes.iter().map(|&c| Some(names[c - 1])).collect();
        let col = Column::symbolic("city", ColumnKind::SymbolicNominal, &cells);
        (col, vec![1, 0, 1, 1, 0, 1, 0, 1])
    }

    #[test]
    fn city_contingency() {
        let (col, labels) = cities();
        let t = build_contingency(&col, &labels, 0);
        let got: Vec<(&str, usize, usize)> = t.rows.iter().map(|r| (r.value.as_str(), r.in_class, r.total)).collect();
        assert_eq!(
            got,
            [
                ("Amsterdam", 0, 2),
                ("London", 2, 2),
                ("New York", 0, 2),
                ("Shanghai", 1, 2)
            ]
        );
    }

    #[test]
    fn city_order() {
        let (col, labels) = cities();
        let (enc, encoded) = encode_by_class_frequency(&col, &labels, 0);
        assert_eq!(enc.order, ["London", "Shanghai", "Amsterdam", "New York"]);
        assert_eq!(encoded.kind, ColumnKind::SymbolicOrdinal);
        assert_eq!(encoded.codes, [3, 1, 4, 2, 2, 4, 1, 3]);
    }

    #[test]
    fn all_in_target_class() {
        let (col, _) = cities();
        let t = build_contingency(&col, &[0; 8], 0);
        assert!(t.rows.iter().all(|r| r.frequency == 1.0));
        let t = build_contingency(&col, &[1; 8], 0);
        assert!(t.rows.iter().all(|r| r.frequency == 0.0));
    }

    #[test]
    fn already_sorted_is_identity() {
        let cells = [Some("a"), Some("a"), Some("b"), Some("b"), Some("c")];
        let col = Column::symbolic("s", ColumnKind::SymbolicNominal, &cells);
        let (enc, _) = encode_by_class_frequency(&col, &[1, 1, 1, 0, 0], 1);
        assert_eq!(enc.permutation, [0, 1, 2, 3]);
    }

    #[test]
    fn direct_sort() {
        // frequencies a: 9/10, b: 1/10, c: 5/10
        let mut cells = Vec::new();
        let mut labels = Vec::new();
        for (v, hits) in [("a", 9), ("b", 1), ("c", 5)] {
            for i in 0..10 {
                cells.push(Some(v));
                labels.push(u32::from(i < hits));
            }
        }
        let col = Column::symbolic("s", ColumnKind::SymbolicNominal, &cells);
        let (enc, _) = encode_by_class_frequency(&col, &labels, 1);
        assert_eq!(enc.order, ["a", "c", "b"]);
    }

    #[test]
    fn missing_stays_fixed() {
        let cells = [None, Some("x"), Some("y")];
        let col = Column::symbolic("s", ColumnKind::SymbolicNominal, &cells);
        let (enc, encoded) = encode_by_class_frequency(&col, &[1, 0, 1], 1);
        assert_eq!(enc.permutation[0], MISSING);
        assert_eq!(encoded.codes, [MISSING, 2, 1]);
    }

    proptest! {
        #[test]
        fn frequency_order_is_non_increasing_and_bijective(
            rows in proptest::collection::vec((0u8..6, 0u32..2), 1..60)
        ) {
            let names = ["a", "b", "c", "d", "e", "f"];
            let cells: Vec<Option<&str>> = rows.iter().map(|(v, _)| Some(names[*v as usize])).collect();
            let labels: Vec<u32> = rows.iter().map(|(_, l)| *l).collect();
            let col = Column::symbolic("s", ColumnKind::SymbolicNominal, &cells);
            let (enc, encoded) = encode_by_class_frequency(&col, &labels, 1);
            let table = build_contingency(&encoded, &labels, 1);
            for w in table.rows.windows(2) {
                prop_assert!(w[0].frequency >= w[1].frequency);
            }
            let inv = enc.inverse();
            for &c in &col.codes {
                prop_assert_eq!(inv[enc.permutation[c as usize] as usize], c);
            }
            for (row, &c) in encoded.codes.iter().enumerate() {
                prop_assert_eq!(encoded.value(c), col.decode(row));
            }
        }
    }
}
