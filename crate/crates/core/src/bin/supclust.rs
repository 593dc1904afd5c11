use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use supclust::dataset::{load_csv, profile, CsvOptions, ProfileReport};
use supclust::run::{render_report, run, write_outputs, RunConfig, StabilityConfig};
use supclust::synth::{adult_features, adult_groups, shift_column, titanic_like, SynthSpec, ADULT_ROWS};
use supclust::{Error, Result};

/// Extract class-pure, readable clusters from labelled tables.
#[derive(Parser)]
#[command(name = "supclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-category class rates.
    Profile(ProfileArgs),
    /// Iterative cluster extraction and report.
    Extract(RunArgs),
    /// Extraction followed by a subsampling stability estimate.
    Stability(StabilityArgs),
    /// Write a synthetic table with planted groups.
    Synth(SynthArgs),
    /// Train and write the per-iteration trees as Graphviz files.
    ExportDot(RunArgs),
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label: Option<String>,
    /// Write profile.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Target class name or code.
    #[arg(long = "class")]
    class: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    clusters: Option<usize>,
    /// Bin numeric and datetime columns into this many bins.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, value_enum)]
    reorder_symbolic: Option<Switch>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    fraction: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Corpus {
    Adult,
    Titanic,
}

#[derive(Args)]
struct SynthArgs {
    /// Built-in feature generator.
    #[arg(long, value_enum, conflicts_with = "input")]
    corpus: Option<Corpus>,
    /// Feature table to plant into; needs --spec.
    #[arg(long, requires = "spec")]
    input: Option<PathBuf>,
    /// TOML planting spec; the census corpus uses its four built-in groups otherwise.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn build_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &args.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &args.label {
        cfg.csv.label = Some(v.clone());
    }
    if let Some(v) = &args.class {
        cfg.target_class = Some(v.clone());
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    if let Some(v) = args.depth {
        cfg.train.max_depth = v;
    }
    if let Some(v) = args.clusters {
        cfg.n_clusters = v;
    }
    if let Some(k) = args.bins {
        cfg.preprocess = cfg.preprocess.with_bins(k);
    }
    if let Some(v) = args.reorder_symbolic {
        cfg.preprocess.reorder_symbolic = matches!(v, Switch::On);
    }
    if let Some(v) = args.seed {
        cfg.stability.get_or_insert_with(StabilityConfig::default).seed = v;
    }
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    Ok(cfg)
}

fn finish(cfg: &RunConfig, dot_only: bool) -> Result<()> {
    let output = run(cfg)?;
    match &cfg.out {
        Some(dir) if dot_only => {
            std::fs::create_dir_all(dir)?;
            if let Some(ex) = &output.extraction {
                for (i, tree) in ex.trees.iter().enumerate() {
                    let highlight: Vec<usize> = ex
                        .clusters
                        .iter()
                        .filter(|c| c.tree_index == i)
                        .map(|c| c.score.node_id)
                        .collect();
                    let path = dir.join(format!("tree_{:02}.dot", i + 1));
                    std::fs::write(&path, supclust::to_dot(tree, &output.prepared.data, &highlight))?;
                    println!("{}", path.display());
                }
            }
        }
        Some(dir) => {
            for path in write_outputs(&output, dir)? {
                log::info!("wrote {}", path.display());
            }
            print!("{}", render_report(&output.report));
        }
        None => print!("{}", render_report(&output.report)),
    }
    Ok(())
}

fn print_profile(report: &ProfileReport) {
    println!("rows: {}", report.row_count);
    for col in &report.columns {
        println!("\n{} ({})", col.name, col.kind);
        for cat in &col.categories {
            let rates: Vec<String> = report
                .class_names
                .iter()
                .zip(&cat.rates)
                .map(|(c, r)| format!("{c} {:.3}", r))
                .collect();
            println!("  {:<24} {:>7}  {}", cat.value, cat.count, rates.join("  "));
        }
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let spec = args.spec.as_ref().map(SynthSpec::load).transpose()?;
    let (data, groups) = match (args.corpus, &args.input) {
        (Some(Corpus::Titanic), _) => (titanic_like(args.seed)?, None),
        (Some(Corpus::Adult), _) | (None, None) => {
            let features = adult_features(args.rows.unwrap_or(ADULT_ROWS), args.seed)?;
            match &spec {
                Some(s) => {
                    let planted = s.apply(&features)?;
                    (planted.data, Some((s.hidden_groups()?, planted.truth)))
                }
                None => {
                    let features = shift_column(&features, "capital-gain", 100.0)?;
                    let specs = adult_groups();
                    let planted = supclust::synth::plant_groups(&features, &specs, args.seed.wrapping_add(1))?;
                    (planted.data, Some((specs, planted.truth)))
                }
            }
        }
        (None, Some(input)) => {
            let features = load_csv(input, &CsvOptions::default())?;
            let s = spec
                .as_ref()
                .ok_or_else(|| Error::Config("--input needs --spec".into()))?;
            let planted = s.apply(&features)?;
            (planted.data, Some((s.hidden_groups()?, planted.truth)))
        }
    };
    let csv = args.out.join("data.csv");
    data.write_csv(&csv)?;
    println!("{}", csv.display());
    if let Some((specs, truth)) = groups {
        let records: Vec<serde_json::Value> = specs
            .iter()
            .zip(&truth)
            .map(|(s, rows)| {
                serde_json::json!({
                    "name": s.name,
                    "rule": s.rule,
                    "target_share": s.share,
                    "share": rows.len() as f64 / data.row_count() as f64,
                    "p_in": s.p_in,
                    "p_out": s.p_out,
                    "rows": rows,
                })
            })
            .collect();
        let path = args.out.join("truth.json");
        write_json(&path, &records)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Profile(a) => {
            let opts = CsvOptions {
                label: a.label.clone(),
                ..CsvOptions::default()
            };
            let ds = load_csv(&a.input, &opts)?;
            let report = profile(&ds);
            print_profile(&report);
            if let Some(dir) = &a.out {
                std::fs::create_dir_all(dir)?;
                write_json(&dir.join("profile.json"), &report)?;
            }
            Ok(())
        }
        Command::Extract(a) => finish(&build_config(&a)?, false),
        Command::ExportDot(a) => finish(&build_config(&a)?, true),
        Command::Stability(a) => {
            let mut cfg = build_config(&a.run)?;
            let s = cfg.stability.get_or_insert_with(StabilityConfig::default);
            if let Some(v) = a.samples {
                s.samples = v;
            }
            if let Some(v) = a.fraction {
                s.fraction = v;
            }
            finish(&cfg, false)
        }
        Command::Synth(a) => synth(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(4),
    }
}
