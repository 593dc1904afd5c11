//! Iterative cluster extraction on the Titanic stand-in, and how beta
//! changes which node wins.

use supclust::synth::titanic_like;
use supclust::{prepare, rank_nodes, render_rule_text, train, Pipeline, PreprocessConfig, TrainParams};

fn main() -> supclust::Result<()> {
    let ds = titanic_like(0)?;
    let survived = ds.resolve_class("1")?;
    let params = TrainParams::default().with_depth(3);

    let prepared = prepare(&ds, &PreprocessConfig::default(), survived)?;
    let tree = train(&prepared.data, &params)?;
    for beta in [1.0, 0.33] {
        let best = &rank_nodes(&tree, survived, beta)?[0];
        println!(
            "beta {beta}: node {} (precision {:.3}, recall {:.3})",
            best.node_id, best.precision, best.recall
        );
    }

    let pipeline = Pipeline {
        preprocess: PreprocessConfig::default(),
        train: params,
        target_class: survived,
        beta: 0.33,
        n_clusters: 3,
    };
    let (_, ex) = pipeline.run(&ds)?;
    for c in &ex.clusters {
        println!("{}", render_rule_text(&c.rule, &ds.class_names, None));
        println!(
            "    {} rows, precision {:.3}, recall {:.3}",
            c.score.size, c.score.precision, c.recall_overall
        );
    }
    Ok(())
}
