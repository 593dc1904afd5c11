//! Writes the first extraction tree as Graphviz, best node highlighted.
//!
//! cargo run --example dot_export > tree.dot && dot -Tpng tree.dot -o tree.png

use supclust::synth::titanic_like;
use supclust::{prepare, rank_nodes, to_dot, train, PreprocessConfig, TrainParams};

fn main() -> supclust::Result<()> {
    let ds = titanic_like(0)?;
    let survived = ds.resolve_class("1")?;
    let prepared = prepare(&ds, &PreprocessConfig::default(), survived)?;
    let tree = train(&prepared.data, &TrainParams::default().with_depth(3))?;
    let best = rank_nodes(&tree, survived, 0.33)?[0].node_id;
    print!("{}", to_dot(&tree, &prepared.data, &[best]));
    Ok(())
}
