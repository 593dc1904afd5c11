//! Numeric, datetime and symbolic binning side by side.

use supclust::preprocess::binning::{
    bin_datetime, bin_numeric, bin_symbolic, BinningSpec, DatetimeBinning, NumericBinning, SymbolicBinning,
};
use supclust::read_csv;
use supclust::CsvOptions;

fn show(spec: &BinningSpec) {
    println!("{} ({:?}, k = {})", spec.column, spec.method, spec.k);
    for bin in &spec.bins {
        println!("  {:>2}: {}", bin.id, bin.representative);
    }
}

fn main() -> supclust::Result<()> {
    let mut csv = String::from("income,joined,city,y\n");
    let cities = [
        "Amsterdam",
        "Amstelveen",
        "London",
        "Londonderry",
        "Paris",
        "Parys",
        "Berlin",
    ];
    for i in 0..60 {
        csv.push_str(&format!(
            "{},2021-{:02}-{:02},{},{}\n",
            (i * i) % 97 * 1000,
            i % 12 + 1,
            i % 28 + 1,
            cities[i % cities.len()],
            i % 2
        ));
    }
    let ds = read_csv(csv.as_bytes(), &CsvOptions::default())?;

    let (spec, _) = bin_numeric(&ds.columns[0], 4, NumericBinning::Percentile)?;
    show(&spec);
    let (spec, _) = bin_numeric(&ds.columns[0], 4, NumericBinning::EqualWidth)?;
    show(&spec);
    let (spec, _) = bin_datetime(&ds.columns[1], 3, DatetimeBinning::Frequency)?;
    show(&spec);
    let (spec, _) = bin_symbolic(&ds.columns[2], 4, SymbolicBinning::Similarity)?;
    show(&spec);
    Ok(())
}
