//! Tabular data ingestion.
//!
//! Every column is stored as a vector of ordinal codes plus a dictionary
//! mapping each code back to the original cell text. Code `0` is reserved
//! for missing cells, so the dictionary entry for code `c` lives at index
//! `c - 1`. Numeric and datetime columns additionally carry the natural
//! value ("key") of each dictionary entry, sorted ascending.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Code reserved for missing cells in every column.
pub const MISSING: u32 = 0;

/// Columns with at most this many distinct values are profiled even when numeric.
pub const MAX_PROFILE_CATEGORIES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ColumnKind {
    Numeric,
    SymbolicNominal,
    SymbolicOrdinal,
    Datetime { pattern: String },
    Boolean,
}

impl ColumnKind {
    /// Ordinal columns split on `x <= p`, nominal ones on `x == p`.
    pub fn is_ordinal(&self) -> bool {
        matches!(
            self,
            ColumnKind::Numeric | ColumnKind::SymbolicOrdinal | ColumnKind::Datetime { .. }
        )
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(
            self,
            ColumnKind::SymbolicNominal | ColumnKind::SymbolicOrdinal | ColumnKind::Boolean
        )
    }

    /// Numeric and datetime columns carry natural values.
    pub fn has_keys(&self) -> bool {
        matches!(self, ColumnKind::Numeric | ColumnKind::Datetime { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::SymbolicNominal => "symbolic-nominal",
            ColumnKind::SymbolicOrdinal => "symbolic-ordinal",
            ColumnKind::Datetime { .. } => "datetime",
            ColumnKind::Boolean => "boolean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub codes: Vec<u32>,
    pub dictionary: Vec<String>,
    /// Natural value per dictionary entry (numeric and datetime columns only).
    pub keys: Option<Vec<f64>>,
}

impl Column {
    /// Builds a symbolic column; the dictionary is sorted lexicographically.
    pub fn symbolic(name: impl Into<String>, kind: ColumnKind, cells: &[Option<&str>]) -> Column {
        let mut values: Vec<&str> = cells.iter().flatten().copied().collect();
        values.sort_unstable();
        values.dedup();
        let index: HashMap<&str, u32> = values.iter().enumerate().map(|(i, v)| (*v, i as u32 + 1)).collect();
        let codes = cells.iter().map(|c| c.map_or(MISSING, |v| index[v])).collect();
        Column {
            name: name.into(),
            kind,
            codes,
            dictionary: values.into_iter().map(str::to_owned).collect(),
            keys: None,
        }
    }

    /// Builds a column whose cells carry a natural value.
    ///
    /// Cells with equal keys share one code; the dictionary keeps the text of
    /// the first occurrence.
    pub fn keyed(name: impl Into<String>, kind: ColumnKind, cells: &[Option<(f64, &str)>]) -> Column {
        let mut first_text: HashMap<u64, &str> = HashMap::new();
        for (key, text) in cells.iter().flatten() {
            first_text.entry(normalize(*key).to_bits()).or_insert(text);
        }
        let mut keys: Vec<f64> = first_text.keys().map(|b| f64::from_bits(*b)).collect();
        keys.sort_by(f64::total_cmp);
        let index: HashMap<u64, u32> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.to_bits(), i as u32 + 1))
            .collect();
        let codes = cells
            .iter()
            .map(|c| c.map_or(MISSING, |(k, _)| index[&normalize(k).to_bits()]))
            .collect();
        let dictionary = keys.iter().map(|k| first_text[&k.to_bits()].to_owned()).collect();
        Column {
            name: name.into(),
            kind,
            codes,
            dictionary,
            keys: Some(keys),
        }
    }

    pub fn numeric(name: impl Into<String>, values: &[Option<f64>]) -> Column {
        let texts: Vec<Option<String>> = values.iter().map(|v| v.map(format_number)).collect();
        let cells: Vec<Option<(f64, &str)>> = values
            .iter()
            .zip(&texts)
            .map(|(v, t)| v.map(|v| (v, t.as_deref().unwrap())))
            .collect();
        Column::keyed(name, ColumnKind::Numeric, &cells)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Number of non-missing codes (dictionary size).
    pub fn n_codes(&self) -> usize {
        self.dictionary.len()
    }

    pub fn value(&self, code: u32) -> Option<&str> {
        if code == MISSING {
            None
        } else {
            self.dictionary.get(code as usize - 1).map(String::as_str)
        }
    }

    pub fn key(&self, code: u32) -> Option<f64> {
        if code == MISSING {
            return None;
        }
        self.keys.as_ref().map(|k| k[code as usize - 1])
    }

    pub fn decode(&self, row: usize) -> Option<&str> {
        self.value(self.codes[row])
    }

    pub fn missing_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c == MISSING).count()
    }

    /// Per-code occurrence counts, index 0 holding missing cells.
    pub fn code_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_codes() + 1];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        counts
    }

    pub(crate) fn select(&self, rows: &[usize]) -> Column {
        Column {
            name: self.name.clone(),
            kind: self.kind.clone(),
            codes: rows.iter().map(|&r| self.codes[r]).collect(),
            dictionary: self.dictionary.clone(),
            keys: self.keys.clone(),
        }
    }
}

fn normalize(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Shortest round-trip rendering of a number (`5` rather than `5.0`).
pub fn format_number(x: f64) -> String {
    format!("{}", normalize(x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub labels: Vec<u32>,
    pub class_names: Vec<String>,
    pub label_name: String,
}

impl Dataset {
    pub fn new(
        columns: Vec<Column>,
        labels: Vec<u32>,
        class_names: Vec<String>,
        label_name: impl Into<String>,
    ) -> Result<Dataset> {
        let n = labels.len();
        for c in &columns {
            if c.len() != n {
                return Err(Error::data(format!(
                    "column `{}` has {} rows, labels have {}",
                    c.name,
                    c.len(),
                    n
                )));
            }
            if let Some(&bad) = c.codes.iter().find(|&&code| code as usize > c.n_codes()) {
                return Err(Error::data(format!(
                    "column `{}` references code {} beyond its dictionary",
                    c.name, bad
                )));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= class_names.len()) {
            return Err(Error::data(format!("label code {bad} has no class name")));
        }
        Ok(Dataset {
            columns,
            labels,
            class_names,
            label_name: label_name.into(),
        })
    }

    pub fn row_count(&self) -> usize {
        self.labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn class_code(&self, name: &str) -> Option<u32> {
        self.class_names.iter().position(|c| c == name).map(|i| i as u32)
    }

    /// Resolves a class given by name, falling back to a numeric code.
    pub fn resolve_class(&self, class: &str) -> Result<u32> {
        if let Some(code) = self.class_code(class) {
            return Ok(code);
        }
        match class.parse::<u32>() {
            Ok(code) if (code as usize) < self.n_classes() => Ok(code),
            _ => Err(Error::config(format!(
                "unknown class `{}` (classes: {})",
                class,
                self.class_names.join(", ")
            ))),
        }
    }

    pub fn class_counts(&self, rows: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for r in rows {
            counts[self.labels[r] as usize] += 1;
        }
        counts
    }

    /// Restriction to `rows` (in the given order). Dictionaries are kept, so
    /// codes keep their meaning across the original and the subset.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
        }
    }

    /// Same features with a new label vector.
    pub fn with_labels(&self, labels: Vec<u32>, class_names: Vec<String>, label_name: &str) -> Result<Dataset> {
        Dataset::new(self.columns.clone(), labels, class_names, label_name)
    }

    /// Writes the dataset as CSV with the label column last. Missing cells are
    /// written as empty strings.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        header.push(&self.label_name);
        w.write_record(&header)?;
        for r in 0..self.row_count() {
            let mut rec: Vec<&str> = self.columns.iter().map(|c| c.decode(r).unwrap_or("")).collect();
            rec.push(&self.class_names[self.labels[r] as usize]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Label column name; `None` selects the last column.
    pub label: Option<String>,
    pub missing_tokens: Vec<String>,
    pub kind_hints: BTreeMap<String, ColumnKind>,
    /// Extra datetime patterns tried before the ISO-8601 defaults.
    pub datetime_patterns: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            label: None,
            missing_tokens: vec![String::new(), "?".into(), "NA".into()],
            kind_hints: BTreeMap::new(),
            datetime_patterns: Vec::new(),
        }
    }
}

impl CsvOptions {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn patterns(&self) -> Vec<String> {
        self.datetime_patterns
            .iter()
            .cloned()
            .chain(DEFAULT_DATETIME_PATTERNS.iter().map(|s| s.to_string()))
            .collect()
    }

    fn is_missing(&self, cell: &str) -> bool {
        self.missing_tokens.iter().any(|t| t == cell)
    }
}

pub const DEFAULT_DATETIME_PATTERNS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d",
    "%H:%M:%S",
    "%H:%M",
];

/// Header plus untyped cells, as read from a delimited file.
#[derive(Clone, Debug)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read<R: Read>(reader: R, delimiter: u8) -> Result<RawTable> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::data("missing header row"));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() == 1 && rec.get(0) == Some("") {
                continue;
            }
            if rec.len() != header.len() {
                return Err(Error::data(format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    rec.len(),
                    header.len()
                )));
            }
            rows.push(rec.iter().map(str::to_owned).collect());
        }
        Ok(RawTable { header, rows })
    }

    fn column_cells(&self, j: usize) -> impl Iterator<Item = &str> {
        self.rows.iter().map(move |r| r[j].as_str())
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::data(format!("cannot read `{}`: {e}", path.display())))?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let table = RawTable::read(reader, opts.delimiter)?;
    dataset_from_table(&table, opts)
}

pub fn dataset_from_table(table: &RawTable, opts: &CsvOptions) -> Result<Dataset> {
    if table.rows.is_empty() {
        return Err(Error::data("no data rows"));
    }
    let label_idx = match &opts.label {
        Some(name) => table
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config(format!("label column `{name}` not found")))?,
        None => table.header.len() - 1,
    };
    for name in opts.kind_hints.keys() {
        if !table.header.contains(name) {
            return Err(Error::config(format!("kind hint for unknown column `{name}`")));
        }
    }

    let mut class_values: Vec<&str> = Vec::new();
    for (i, cell) in table.column_cells(label_idx).enumerate() {
        if opts.is_missing(cell) {
            if table.column_cells(label_idx).all(|c| opts.is_missing(c)) {
                return Err(Error::data(format!(
                    "label column `{}` is entirely missing",
                    table.header[label_idx]
                )));
            }
            return Err(Error::data(format!("missing label in data row {}", i + 1)));
        }
        class_values.push(cell);
    }
    let class_names = sorted_classes(&class_values);
    let class_index: HashMap<&str, u32> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i as u32))
        .collect();
    let labels = class_values.iter().map(|c| class_index[c]).collect();

    let kinds = infer_kinds(table, opts);
    let mut columns = Vec::with_capacity(table.header.len() - 1);
    for (j, name) in table.header.iter().enumerate() {
        if j == label_idx {
            continue;
        }
        let cells: Vec<Option<&str>> = table
            .column_cells(j)
            .map(|c| (!opts.is_missing(c)).then_some(c))
            .collect();
        columns.push(build_column(name, kinds[j].clone(), &cells)?);
    }
    Dataset::new(columns, labels, class_names, table.header[label_idx].clone())
}

/// Class names in numeric order when every label parses as a number,
/// lexicographic otherwise.
fn sorted_classes(values: &[&str]) -> Vec<String> {
    let mut uniq: Vec<&str> = values.iter().copied().collect::<HashSet<_>>().into_iter().collect();
    if uniq.iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite)) {
        uniq.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.total_cmp(&y).then_with(|| a.cmp(b))
        });
    } else {
        uniq.sort_unstable();
    }
    uniq.into_iter().map(str::to_owned).collect()
}

/// Types a column from its cells. Hints win; otherwise the first of
/// boolean (when a true/false token is present), numeric, datetime that
/// accepts every non-missing cell, with symbolic-nominal as the fallback.
pub fn infer_kinds(table: &RawTable, opts: &CsvOptions) -> Vec<ColumnKind> {
    let patterns = opts.patterns();
    (0..table.header.len())
        .map(|j| {
            if let Some(kind) = opts.kind_hints.get(&table.header[j]) {
                return kind.clone();
            }
            let cells: Vec<&str> = table.column_cells(j).filter(|c| !opts.is_missing(c)).collect();
            infer_kind(&cells, &patterns)
        })
        .collect()
}

pub fn infer_kind(cells: &[&str], patterns: &[String]) -> ColumnKind {
    if cells.is_empty() {
        return ColumnKind::SymbolicNominal;
    }
    let has_word = cells
        .iter()
        .any(|c| parse_bool(c).is_some() && c.parse::<f64>().is_err());
    if has_word && cells.iter().all(|c| parse_bool(c).is_some()) {
        return ColumnKind::Boolean;
    }
    if cells.iter().all(|c| parse_number(c).is_some()) {
        return ColumnKind::Numeric;
    }
    for p in patterns {
        if cells.iter().all(|c| parse_datetime_key(c, p).is_some()) {
            return ColumnKind::Datetime { pattern: p.clone() };
        }
    }
    ColumnKind::SymbolicNominal
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bool(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

/// Seconds since the Unix epoch for dates and date-times, seconds since
/// midnight for times of day.
pub fn parse_datetime_key(cell: &str, pattern: &str) -> Option<f64> {
    if let Ok(dt) = NaiveDateTime::parse_from_str(cell, pattern) {
        return Some(dt.and_utc().timestamp() as f64 + dt.nanosecond() as f64 * 1e-9);
    }
    if let Ok(d) = NaiveDate::parse_from_str(cell, pattern) {
        return Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp() as f64);
    }
    if let Ok(t) = NaiveTime::parse_from_str(cell, pattern) {
        return Some(t.num_seconds_from_midnight() as f64 + t.nanosecond() as f64 * 1e-9);
    }
    None
}

/// Inverse of [`parse_datetime_key`], used to render bin edges.
pub fn format_datetime_key(key: f64, pattern: &str) -> String {
    let secs = key.floor() as i64;
    let nanos = ((key - key.floor()) * 1e9).round().min(999_999_999.0) as u32;
    let is_time_only = !["%Y", "%m", "%d", "%F", "%D"].iter().any(|t| pattern.contains(t));
    if is_time_only {
        if let Some(t) = NaiveTime::from_num_seconds_from_midnight_opt(secs.rem_euclid(86_400) as u32, nanos) {
            return t.format(pattern).to_string();
        }
    } else if let Some(dt) = chrono::DateTime::from_timestamp(secs, nanos) {
        return dt.naive_utc().format(pattern).to_string();
    }
    format_number(key)
}

pub fn build_column(name: &str, kind: ColumnKind, cells: &[Option<&str>]) -> Result<Column> {
    match &kind {
        ColumnKind::Numeric => {
            let mut parsed = Vec::with_capacity(cells.len());
            for c in cells {
                parsed.push(match c {
                    None => None,
                    Some(t) => Some((
                        parse_number(t)
                            .ok_or_else(|| Error::data(format!("column `{name}`: `{t}` is not a number")))?,
                        *t,
                    )),
                });
            }
            Ok(Column::keyed(name, kind, &parsed))
        }
        ColumnKind::Datetime { pattern } => {
            let mut parsed = Vec::with_capacity(cells.len());
            for c in cells {
                parsed.push(match c {
                    None => None,
                    Some(t) => Some((
                        parse_datetime_key(t, pattern)
                            .ok_or_else(|| Error::data(format!("column `{name}`: `{t}` does not match `{pattern}`")))?,
                        *t,
                    )),
                });
            }
            Ok(Column::keyed(name, kind, &parsed))
        }
        _ => Ok(Column::symbolic(name, kind, cells)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryProfile {
    pub value: String,
    pub count: usize,
    /// Fraction of the category's rows in each class.
    pub rates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    pub kind: String,
    pub categories: Vec<CategoryProfile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub row_count: usize,
    pub class_names: Vec<String>,
    pub prevalence: Vec<f64>,
    pub columns: Vec<ColumnProfile>,
}

impl ProfileReport {
    pub fn rate(&self, column: &str, value: &str, class: &str) -> Option<f64> {
        let k = self.class_names.iter().position(|c| c == class)?;
        self.columns
            .iter()
            .find(|c| c.name == column)?
            .categories
            .iter()
            .find(|c| c.value == value)
            .map(|c| c.rates[k])
    }
}

pub const MISSING_LABEL: &str = "(missing)";

/// Class rates per category for symbolic columns and for low-cardinality
/// numeric or datetime columns.
pub fn profile(ds: &Dataset) -> ProfileReport {
    let n = ds.row_count();
    let k = ds.n_classes();
    let totals = ds.class_counts(0..n);
    let prevalence = totals.iter().map(|&t| ratio(t, n)).collect();
    let columns = ds
        .columns
        .iter()
        .filter(|c| c.kind.is_symbolic() || c.n_codes() <= MAX_PROFILE_CATEGORIES)
        .map(|col| {
            let mut counts = vec![vec![0usize; k]; col.n_codes() + 1];
            for (code, &label) in col.codes.iter().zip(&ds.labels) {
                counts[*code as usize][label as usize] += 1;
            }
            let categories = counts
                .iter()
                .enumerate()
                .filter_map(|(code, per_class)| {
                    let count: usize = per_class.iter().sum();
                    (count > 0).then(|| CategoryProfile {
                        value: col.value(code as u32).unwrap_or(MISSING_LABEL).to_owned(),
                        count,
                        rates: per_class.iter().map(|&c| ratio(c, count)).collect(),
                    })
                })
                .collect();
            ColumnProfile {
                name: col.name.clone(),
                kind: col.kind.label().to_owned(),
                categories,
            }
        })
        .collect();
    ProfileReport {
        row_count: n,
        class_names: ds.class_names.clone(),
        prevalence,
        columns,
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}
