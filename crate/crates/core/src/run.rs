//! End-to-end runs: load, profile, preprocess, extract, score stability,
//! and write the report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, profile, CsvOptions, Dataset, ProfileReport};
use crate::error::{Error, Result};
use crate::extract::{extract_iterative, fbeta, render_rule_text, Extraction, Pipeline, Rule, RuleStats, DEFAULT_BETA};
use crate::preprocess::{prepare, Prepared, PreprocessConfig, TransformLog};
use crate::stability::{stability_report, StabilityReport, DEFAULT_FRACTION, DEFAULT_SAMPLES};
use crate::tree::{to_dot, TrainParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CLUSTERS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub samples: usize,
    pub fraction: f64,
    pub seed: u64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            samples: DEFAULT_SAMPLES,
            fraction: DEFAULT_FRACTION,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub csv: CsvOptions,
    /// Class name or code; defaults to the last class in sorted order.
    pub target_class: Option<String>,
    pub beta: f64,
    pub n_clusters: usize,
    pub train: TrainParams,
    pub preprocess: PreprocessConfig,
    pub stability: Option<StabilityConfig>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            csv: CsvOptions::default(),
            target_class: None,
            beta: DEFAULT_BETA,
            n_clusters: DEFAULT_CLUSTERS,
            train: TrainParams::default(),
            preprocess: PreprocessConfig::default(),
            stability: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read `{}`: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can be checked against the loaded data and
    /// returns the target class code.
    pub fn validate(&self, ds: &Dataset) -> Result<u32> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::config(format!("beta must be positive, got {}", self.beta)));
        }
        self.train.validate()?;
        self.preprocess.validate(ds)?;
        if let Some(s) = &self.stability {
            if s.samples == 0 {
                return Err(Error::config("stability needs at least one sample"));
            }
            if !(s.fraction > 0.0 && s.fraction <= 1.0) {
                return Err(Error::config(format!(
                    "sample fraction must be in (0, 1], got {}",
                    s.fraction
                )));
            }
        }
        match &self.target_class {
            Some(c) => ds.resolve_class(c),
            None => Ok(ds.n_classes() as u32 - 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub index: usize,
    pub tree_index: usize,
    pub node_id: usize,
    pub text: String,
    pub rule: Rule,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub impurity: f64,
    pub size: usize,
    pub population_share: f64,
    pub precision: f64,
    pub recall: f64,
    pub recall_overall: f64,
    pub f1: f64,
    pub f05: f64,
    pub f_beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub row_count: usize,
    pub target_class: String,
    pub profile: ProfileReport,
    pub transforms: TransformLog,
    pub clusters: Vec<ClusterRecord>,
    pub stability: Option<StabilityReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// (stage, seconds) in execution order.
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage));
        let secs = start.elapsed().as_secs_f64();
        log::info!("{stage}: {secs:.3} s");
        self.stages.push((stage.to_string(), secs));
        out
    }

    pub fn total(&self) -> f64 {
        self.stages.iter().map(|s| s.1).sum()
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub timings: Timings,
    pub data: Dataset,
    pub prepared: Prepared,
    pub extraction: Option<Extraction>,
}

/// Loads `config.input` and runs every stage.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| Error::config("no input file given"))?;
    let mut timings = Timings::default();
    let data = timings.time("load", || load_csv(input, &config.csv))?;
    run_with(data, config, timings)
}

/// Runs every stage on an already loaded table.
pub fn run_on(data: Dataset, config: &RunConfig) -> Result<RunOutput> {
    run_with(data, config, Timings::default())
}

fn run_with(data: Dataset, config: &RunConfig, mut timings: Timings) -> Result<RunOutput> {
    let target = config.validate(&data).map_err(|e| e.in_stage("config"))?;
    let profile_report = timings.time("profile", || Ok(profile(&data)))?;
    let prepared = timings.time("preprocess", || prepare(&data, &config.preprocess, target))?;
    let extraction = if config.n_clusters == 0 {
        None
    } else {
        Some(timings.time("extract", || {
            extract_iterative(&prepared, &config.train, target, config.beta, config.n_clusters)
        })?)
    };
    let stability = match (&config.stability, &extraction) {
        (Some(s), Some(ex)) => {
            let pipeline = Pipeline {
                preprocess: config.preprocess.clone(),
                train: config.train.clone(),
                target_class: target,
                beta: config.beta,
                n_clusters: config.n_clusters,
            };
            Some(timings.time("stability", || {
                stability_report(&data, &ex.clusters, &pipeline, s.samples, s.fraction, s.seed)
            })?)
        }
        _ => None,
    };

    let n = data.row_count();
    let clusters = extraction
        .iter()
        .flat_map(|ex| ex.clusters.iter())
        .enumerate()
        .map(|(i, c)| {
            let s = &c.score;
            let stats = RuleStats {
                precision: s.precision,
                size: s.size,
                population_share: s.size as f64 / n as f64,
            };
            ClusterRecord {
                index: i + 1,
                tree_index: c.tree_index,
                node_id: s.node_id,
                text: render_rule_text(&c.rule, &data.class_names, Some(&stats)),
                rule: c.rule.clone(),
                tp: s.tp,
                fp: s.fp,
                fn_: s.fn_,
                impurity: s.impurity,
                size: s.size,
                population_share: stats.population_share,
                precision: s.precision,
                recall: s.recall,
                recall_overall: c.recall_overall,
                f1: fbeta(s.precision, s.recall, 1.0),
                f05: fbeta(s.precision, s.recall, 0.5),
                f_beta: s.f_beta,
            }
        })
        .collect();

    // the output location does not change the result
    let echoed = RunConfig {
        out: None,
        ..config.clone()
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: echoed,
        row_count: n,
        target_class: data.class_names[target as usize].clone(),
        profile: profile_report,
        transforms: prepared.log.clone(),
        clusters,
        stability,
    };
    Ok(RunOutput {
        report,
        timings,
        data,
        prepared,
        extraction,
    })
}

/// Plain-text rendering of a report.
pub fn render_report(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rows: {}", report.row_count);
    let _ = writeln!(out, "target class: {}", report.target_class);
    let _ = writeln!(
        out,
        "beta: {}, depth: {}, impurity: {}",
        report.config.beta,
        report.config.train.max_depth,
        report.config.train.impurity.name()
    );
    let prevalence: Vec<String> = report
        .profile
        .class_names
        .iter()
        .zip(&report.profile.prevalence)
        .map(|(c, p)| format!("{c} {:.1}%", 100.0 * p))
        .collect();
    let _ = writeln!(out, "class prevalence: {}", prevalence.join(", "));
    for t in &report.transforms.columns {
        let mut steps = Vec::new();
        if let Some(b) = &t.binning {
            steps.push(format!("binned ({:?}, {} bins)", b.method, b.bins.len()));
        }
        if t.encoding.is_some() {
            steps.push("reordered by class frequency".to_string());
        }
        if !steps.is_empty() {
            let _ = writeln!(out, "  {}: {}", t.name, steps.join(", "));
        }
    }
    for d in &report.transforms.dropped {
        let _ = writeln!(out, "  {d}: dropped");
    }
    out.push('\n');

    if report.clusters.is_empty() {
        out.push_str("no clusters\n");
    } else {
        let _ = writeln!(
            out,
            "{:<4} {:>4} {:>5} {:>8} {:>7} {:>9} {:>7} {:>7} {:>7} {:>7}",
            "#", "tree", "node", "impurity", "size", "precision", "recall", "F1", "F0.5", "Fbeta"
        );
        for c in &report.clusters {
            let _ = writeln!(
                out,
                "{:<4} {:>4} {:>5} {:>8.4} {:>7} {:>9.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
                c.index,
                c.tree_index + 1,
                c.node_id,
                c.impurity,
                c.size,
                c.precision,
                c.recall,
                c.f1,
                c.f05,
                c.f_beta
            );
        }
        out.push('\n');
        for c in &report.clusters {
            let _ = writeln!(out, "{}. {}", c.index, c.text);
        }
    }

    if let Some(s) = &report.stability {
        let _ = writeln!(
            out,
            "\nstability ({} samples, fraction {}, seed {})",
            s.samples, s.fraction, s.seed
        );
        let _ = writeln!(out, "{:<4} {:>7} {:>7} {:>7}", "#", "mean", "min", "max");
        for c in &s.clusters {
            let _ = writeln!(out, "{:<4} {:>7.4} {:>7.4} {:>7.4}", c.cluster, c.mean, c.min, c.max);
        }
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::data(format!("cannot write `{}`: {e}", path.display())))?;
    Ok(path)
}

/// Writes `report.json`, `report.txt`, `timings.json` and, per cluster,
/// `cluster_NN.rule.txt`, `cluster_NN.rows.txt` and `tree_NN.dot`.
/// Everything but `timings.json` is identical across identical runs.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::data(format!("cannot create `{}`: {e}", dir.display())))?;
    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(&output.report)?;
    written.push(write(dir.join("report.json"), &(json + "\n"))?);
    written.push(write(dir.join("report.txt"), &render_report(&output.report))?);
    written.push(write(
        dir.join("timings.json"),
        &(serde_json::to_string_pretty(&output.timings)? + "\n"),
    )?);
    if let Some(ex) = &output.extraction {
        for (i, (c, record)) in ex.clusters.iter().zip(&output.report.clusters).enumerate() {
            let n = i + 1;
            written.push(write(
                dir.join(format!("cluster_{n:02}.rule.txt")),
                &(record.text.clone() + "\n"),
            )?);
            let rows: String = c.row_ids.iter().map(|r| format!("{r}\n")).collect();
            written.push(write(dir.join(format!("cluster_{n:02}.rows.txt")), &rows)?);
        }
        for (i, tree) in ex.trees.iter().enumerate() {
            let highlight: Vec<usize> = ex
                .clusters
                .iter()
                .filter(|c| c.tree_index == i)
                .map(|c| c.score.node_id)
                .collect();
            let dot = to_dot(tree, &output.prepared.data, &highlight);
            written.push(write(dir.join(format!("tree_{:02}.dot", i + 1)), &dot)?);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::read_csv;

    fn data() -> Dataset {
        let mut csv = String::from("color,size,y\n");
        for i in 0..60 {
            let color = ["red", "green", "blue"][i % 3];
            let size = i % 7;
            let y = if color == "red" && size <= 2 { "yes" } else { "no" };
            csv.push_str(&format!("{color},{size},{y}\n"));
        }
        read_csv(csv.as_bytes(), &CsvOptions::default()).unwrap()
    }

    #[test]
    fn zero_clusters_is_profile_only() {
        let cfg = RunConfig {
            n_clusters: 0,
            ..Default::default()
        };
        let out = run_on(data(), &cfg).unwrap();
        assert!(out.report.clusters.is_empty());
        assert!(out.extraction.is_none());
        assert!(render_report(&out.report).contains("no clusters"));
    }

    #[test]
    fn config_errors_are_tagged() {
        let cfg = RunConfig {
            target_class: Some("maybe".into()),
            ..Default::default()
        };
        let err = run_on(data(), &cfg).err().unwrap();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().starts_with("config:"));
        let missing = RunConfig {
            input: Some("/nonexistent/table.csv".into()),
            ..Default::default()
        };
        assert_eq!(run(&missing).err().unwrap().exit_code(), 3);
        assert_eq!(run(&RunConfig::default()).err().unwrap().exit_code(), 2);
    }

    #[test]
    fn report_records_clusters() {
        let out = run_on(data(), &RunConfig::default()).unwrap();
        assert_eq!(out.report.target_class, "yes");
        let first = &out.report.clusters[0];
        assert_eq!(first.precision, 1.0);
        assert!(first.text.contains("THEN yes"));
        let dir = tempfile::tempdir().unwrap();
        let files = write_outputs(&out, dir.path()).unwrap();
        assert!(files.iter().any(|f| f.ends_with("cluster_01.rows.txt")));
        assert!(files.iter().any(|f| f.ends_with("tree_01.dot")));
    }

    #[test]
    fn config_from_toml() {
        let cfg = RunConfig::from_toml(
            r#"
            beta = 0.5
            n_clusters = 2
            [csv]
            label = "income"
            [train]
            max_depth = 3
            [stability]
            samples = 5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.train.max_depth, 3);
        assert_eq!(cfg.stability.unwrap().fraction, DEFAULT_FRACTION);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }
}
