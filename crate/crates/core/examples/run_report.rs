//! A full run from a TOML configuration, written to a directory.

use supclust::run::render_report;
use supclust::synth::titanic_like;
use supclust::{run_on, write_outputs, RunConfig};

const CONFIG: &str = r#"
target_class = "1"
beta = 0.33
n_clusters = 2

[train]
max_depth = 3

[stability]
samples = 10
fraction = 0.8
seed = 0
"#;

fn main() -> supclust::Result<()> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    let out = run_on(titanic_like(0)?, &cfg)?;
    print!("{}", render_report(&out.report));
    let dir = std::env::temp_dir().join("supclust-run-report");
    for path in write_outputs(&out, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
