//! Plants groups described in a TOML spec into generated census features.

use supclust::synth::{adult_features, evaluate_recovery, SynthSpec};
use supclust::{run_on, RunConfig};

const SPEC: &str = r#"
seed = 3
p_in = 0.9
p_out = 0.05

[[group]]
name = "young-clerical"
predicates = [
  { attribute = "age", op = "<=", value = 30 },
  { attribute = "occupation", op = "=", value = "Adm-clerical" },
]

[[group]]
name = "long-hours"
predicates = [{ attribute = "hours-per-week", op = ">", value = 55 }]
"#;

fn main() -> supclust::Result<()> {
    let spec = SynthSpec::from_toml(SPEC)?;
    let features = adult_features(10_000, 1)?;
    let planted = spec.apply(&features)?;
    for (g, rows) in spec.groups.iter().zip(&planted.truth) {
        println!("{}: {} rows", g.name, rows.len());
    }

    let cfg = RunConfig {
        target_class: Some("yes".into()),
        ..RunConfig::default()
    };
    let out = run_on(planted.data, &cfg)?;
    let found: Vec<Vec<usize>> = out
        .extraction
        .as_ref()
        .unwrap()
        .clusters
        .iter()
        .map(|c| c.row_ids.clone())
        .collect();
    for c in &out.report.clusters {
        println!("{}", c.text);
    }
    for m in evaluate_recovery(&found, &planted.truth).matches {
        println!(
            "group {} <- cluster {}: Jaccard {:.3}",
            m.group + 1,
            m.cluster + 1,
            m.overlap.jaccard
        );
    }
    Ok(())
}
