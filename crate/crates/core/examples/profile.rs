//! Survival rates per category on the Titanic stand-in.

use supclust::profile;
use supclust::synth::titanic_like;

fn main() -> supclust::Result<()> {
    let ds = titanic_like(0)?;
    let report = profile(&ds);
    println!(
        "{} passengers, survival {:.1}%",
        report.row_count,
        report.prevalence[1] * 100.0
    );
    for col in ["Pclass", "Sex"] {
        for cat in &report.columns.iter().find(|c| c.name == col).unwrap().categories {
            println!(
                "{col:>7} = {:<8} {:>4} rows  survived {:.0}%",
                cat.value,
                cat.count,
                cat.rates[1] * 100.0
            );
        }
    }
    Ok(())
}
