//! Bagging stability of the Titanic clusters.

use supclust::stability::{DEFAULT_FRACTION, DEFAULT_SAMPLES};
use supclust::synth::titanic_like;
use supclust::{stability_report, Pipeline, PreprocessConfig, TrainParams};

fn main() -> supclust::Result<()> {
    let ds = titanic_like(0)?;
    let pipeline = Pipeline {
        preprocess: PreprocessConfig::default(),
        train: TrainParams::default().with_depth(3),
        target_class: ds.resolve_class("1")?,
        beta: 0.33,
        n_clusters: 3,
    };
    let (_, ex) = pipeline.run(&ds)?;
    let report = stability_report(&ds, &ex.clusters, &pipeline, DEFAULT_SAMPLES, DEFAULT_FRACTION, 0)?;
    for s in &report.clusters {
        println!(
            "cluster {}: mean {:.3} (min {:.3}, max {:.3}) over {} samples of {:.0}%",
            s.cluster,
            s.mean,
            s.min,
            s.max,
            report.samples,
            report.fraction * 100.0
        );
    }
    Ok(())
}
