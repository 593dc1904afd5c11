//! Class-frequency ordering lets one threshold split separate the cities
//! that carry the target class.

use supclust::preprocess::build_contingency;
use supclust::{linearize_rule, prepare, read_csv, render_rule_text, train, CsvOptions, PreprocessConfig, TrainParams};

const CSV: &str = "city,y
Amsterdam,1
London,0
New York,1
Shanghai,1
Shanghai,0
New York,1
London,0
Amsterdam,1
";

fn main() -> supclust::Result<()> {
    let ds = read_csv(CSV.as_bytes(), &CsvOptions::default())?;
    let target = ds.resolve_class("0")?;
    for row in build_contingency(&ds.columns[0], &ds.labels, target).rows {
        println!("{:<10} {}/{}", row.value, row.in_class, row.total);
    }

    let prepared = prepare(&ds, &PreprocessConfig::default(), target)?;
    let order = &prepared.log.columns[0].encoding.as_ref().unwrap().order;
    println!("order: {}", order.join(" < "));

    let tree = train(&prepared.data, &TrainParams::default().with_depth(1))?;
    for node in &tree.nodes {
        let rule = linearize_rule(&tree, node.id, &prepared.log, target)?;
        println!(
            "node {}: {:?} {}",
            node.id,
            node.class_counts,
            render_rule_text(&rule, &ds.class_names, None)
        );
    }
    Ok(())
}
