//! Seeded stand-ins for the passenger-survival and census-income tables.
//!
//! Category frequencies follow the public versions of both tables. The
//! passenger table reproduces the exact (class, sex, survived) cell counts
//! of the 887-row release; the numeric passenger columns and every census
//! column are drawn independently apart from a few dependencies noted inline.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal};

use super::{plant_groups, HiddenGroupSpec, Planted};
use crate::dataset::{dataset_from_table, format_number, CsvOptions, Dataset, RawTable};
use crate::error::Result;
use crate::extract::{Bound, Condition, Predicate};

pub const TITANIC_ROWS: usize = 887;
pub const ADULT_ROWS: usize = 32561;

/// (class, sex, survived, died)
const TITANIC_CELLS: &[(u8, &str, usize, usize)] = &[
    (1, "female", 91, 3),
    (1, "male", 45, 77),
    (2, "female", 70, 6),
    (2, "male", 17, 91),
    (3, "female", 72, 72),
    (3, "male", 47, 296),
];

fn pick<'a, R: Rng>(rng: &mut R, table: &[(&'a str, f64)]) -> &'a str {
    let w = WeightedIndex::new(table.iter().map(|t| t.1)).expect("positive weights");
    table[w.sample(rng)].0
}

fn normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("valid normal").sample(rng)
}

/// Passenger table with columns Survived, Pclass, Sex, Age,
/// Siblings/Spouses Aboard, Parents/Children Aboard, Fare.
pub fn titanic_like(seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let header = [
        "Survived",
        "Pclass",
        "Sex",
        "Age",
        "Siblings/Spouses Aboard",
        "Parents/Children Aboard",
        "Fare",
    ];
    let siblings = [
        ("0", 604.0),
        ("1", 209.0),
        ("2", 28.0),
        ("3", 16.0),
        ("4", 18.0),
        ("5", 5.0),
        ("8", 7.0),
    ];
    let parents = [
        ("0", 674.0),
        ("1", 118.0),
        ("2", 80.0),
        ("3", 5.0),
        ("4", 4.0),
        ("5", 5.0),
        ("6", 1.0),
    ];
    let mut rows = Vec::with_capacity(TITANIC_ROWS);
    for &(class, sex, survived, died) in TITANIC_CELLS {
        for outcome in std::iter::repeat_n(1u8, survived).chain(std::iter::repeat_n(0u8, died)) {
            let (age_mean, fare_mu) = match class {
                1 => (38.0, 4.1),
                2 => (30.0, 2.9),
                _ => (25.0, 2.3),
            };
            // surviving men are younger on average (boys)
            let age_mean = if sex == "male" && outcome == 1 {
                age_mean - 10.0
            } else {
                age_mean
            };
            let age = normal(&mut rng, age_mean, 13.0).clamp(0.42, 80.0);
            let age = if age < 1.0 {
                (age * 100.0).round() / 100.0
            } else {
                age.round()
            };
            let fare = LogNormal::new(fare_mu, 0.45).expect("valid lognormal").sample(&mut rng);
            rows.push(vec![
                outcome.to_string(),
                class.to_string(),
                sex.to_string(),
                format_number(age),
                pick(&mut rng, &siblings).to_string(),
                pick(&mut rng, &parents).to_string(),
                format!("{:.4}", fare),
            ]);
        }
    }
    rows.shuffle(&mut rng);
    let table = RawTable {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    };
    dataset_from_table(&table, &CsvOptions::default().with_label("Survived"))
}

const WORKCLASS: &[(&str, f64)] = &[
    ("Private", 22696.0),
    ("Self-emp-not-inc", 2541.0),
    ("Local-gov", 2093.0),
    ("?", 1836.0),
    ("State-gov", 1298.0),
    ("Self-emp-inc", 1116.0),
    ("Federal-gov", 960.0),
    ("Without-pay", 14.0),
    ("Never-worked", 7.0),
];

/// (education, education-num, count)
const EDUCATION: &[(&str, u8, f64)] = &[
    ("Preschool", 1, 51.0),
    ("1st-4th", 2, 168.0),
    ("5th-6th", 3, 333.0),
    ("7th-8th", 4, 646.0),
    ("9th", 5, 514.0),
    ("10th", 6, 933.0),
    ("11th", 7, 1175.0),
    ("12th", 8, 433.0),
    ("HS-grad", 9, 10501.0),
    ("Some-college", 10, 7291.0),
    ("Assoc-voc", 11, 1382.0),
    ("Assoc-acdm", 12, 1067.0),
    ("Bachelors", 13, 5355.0),
    ("Masters", 14, 1723.0),
    ("Prof-school", 15, 576.0),
    ("Doctorate", 16, 413.0),
];

const MARITAL: &[(&str, f64)] = &[
    ("Married-civ-spouse", 14976.0),
    ("Never-married", 10683.0),
    ("Divorced", 4443.0),
    ("Separated", 1025.0),
    ("Widowed", 993.0),
    ("Married-spouse-absent", 418.0),
    ("Married-AF-spouse", 23.0),
];

// Exec-managerial is rarer than in the public table so that the second
// planted group keeps its 5% share.
const OCCUPATION: &[(&str, f64)] = &[
    ("Prof-specialty", 4140.0),
    ("Craft-repair", 4099.0),
    ("Exec-managerial", 1800.0),
    ("Adm-clerical", 3770.0),
    ("Sales", 3650.0),
    ("Other-service", 3295.0),
    ("Machine-op-inspct", 2002.0),
    ("?", 1843.0),
    ("Transport-moving", 1597.0),
    ("Handlers-cleaners", 1370.0),
    ("Farming-fishing", 994.0),
    ("Tech-support", 928.0),
    ("Protective-serv", 649.0),
    ("Priv-house-serv", 149.0),
    ("Armed-Forces", 9.0),
];

const RACE: &[(&str, f64)] = &[
    ("White", 27816.0),
    ("Black", 3124.0),
    ("Asian-Pac-Islander", 1039.0),
    ("Amer-Indian-Eskimo", 311.0),
    ("Other", 271.0),
];

const COUNTRY: &[(&str, f64)] = &[
    ("United-States", 29170.0),
    ("Mexico", 643.0),
    ("?", 583.0),
    ("Philippines", 198.0),
    ("Germany", 137.0),
    ("Canada", 121.0),
    ("Puerto-Rico", 114.0),
    ("El-Salvador", 106.0),
    ("India", 100.0),
    ("Cuba", 95.0),
    ("England", 90.0),
    ("Jamaica", 81.0),
    ("South", 80.0),
    ("China", 75.0),
    ("Italy", 73.0),
    ("Dominican-Republic", 70.0),
    ("Vietnam", 67.0),
    ("Guatemala", 64.0),
    ("Japan", 62.0),
    ("Poland", 60.0),
    ("Columbia", 59.0),
    ("Taiwan", 51.0),
    ("Haiti", 44.0),
    ("Iran", 43.0),
    ("Portugal", 37.0),
    ("Nicaragua", 34.0),
    ("Peru", 31.0),
    ("France", 29.0),
    ("Greece", 29.0),
    ("Ecuador", 28.0),
    ("Ireland", 24.0),
    ("Hong", 20.0),
    ("Cambodia", 19.0),
    ("Trinadad&Tobago", 19.0),
    ("Laos", 18.0),
    ("Thailand", 18.0),
    ("Yugoslavia", 16.0),
    ("Outlying-US(Guam-USVI-etc)", 14.0),
    ("Honduras", 13.0),
    ("Hungary", 13.0),
    ("Scotland", 12.0),
    ("Holand-Netherlands", 1.0),
];

const GAINS: &[u32] = &[
    594, 914, 1055, 2174, 2407, 3103, 3325, 3411, 3674, 4064, 4386, 4650, 5013, 5178, 7298, 7688, 8614, 10520, 13550,
    14084, 15024, 99999,
];
const LOSSES: &[u32] = &[
    1092, 1485, 1590, 1602, 1672, 1740, 1848, 1876, 1887, 1902, 1977, 2001, 2258, 2415,
];

pub const ADULT_COLUMNS: &[&str] = &[
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

/// Census-style features with a placeholder label column. Only the empty
/// cell counts as missing, so `?` stays an ordinary value.
pub fn adult_features(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edu_w = WeightedIndex::new(EDUCATION.iter().map(|e| e.2)).expect("positive weights");
    let fnlwgt = LogNormal::<f64>::new(13.01, 0.5).expect("valid lognormal");
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let age = normal(&mut rng, 38.6, 13.6).clamp(17.0, 90.0).round();
        let workclass = pick(&mut rng, WORKCLASS);
        let weight: f64 = fnlwgt.sample(&mut rng);
        let weight = weight.round().max(12285.0);
        let (education, edu_num, _) = EDUCATION[edu_w.sample(&mut rng)];
        let marital = pick(&mut rng, MARITAL);
        let occupation = pick(&mut rng, OCCUPATION);
        let sex = pick(&mut rng, &[("Male", 21790.0), ("Female", 10771.0)]);
        let relationship = match (marital, sex) {
            ("Married-civ-spouse" | "Married-AF-spouse", "Male") => {
                pick(&mut rng, &[("Husband", 0.97), ("Other-relative", 0.03)])
            }
            ("Married-civ-spouse" | "Married-AF-spouse", _) => {
                pick(&mut rng, &[("Wife", 0.9), ("Other-relative", 0.1)])
            }
            ("Never-married", _) => pick(
                &mut rng,
                &[
                    ("Own-child", 0.45),
                    ("Not-in-family", 0.40),
                    ("Unmarried", 0.08),
                    ("Other-relative", 0.07),
                ],
            ),
            _ => pick(
                &mut rng,
                &[
                    ("Not-in-family", 0.5),
                    ("Unmarried", 0.4),
                    ("Own-child", 0.05),
                    ("Other-relative", 0.05),
                ],
            ),
        };
        let race = pick(&mut rng, RACE);
        let gain = if rng.gen::<f64>() < 0.917 {
            0
        } else {
            *GAINS.choose(&mut rng).unwrap()
        };
        let loss = if rng.gen::<f64>() < 0.953 {
            0
        } else {
            *LOSSES.choose(&mut rng).unwrap()
        };
        let hours = if rng.gen::<f64>() < 0.47 {
            40.0
        } else {
            normal(&mut rng, 40.0, 12.0).clamp(1.0, 99.0).round()
        };
        let country = pick(&mut rng, COUNTRY);
        // low schooling rarely comes with high income
        let rich = rng.gen::<f64>() < if edu_num <= 9 { 0.098 } else { 0.35 };
        rows.push(vec![
            format_number(age),
            workclass.to_string(),
            format_number(weight),
            education.to_string(),
            edu_num.to_string(),
            marital.to_string(),
            occupation.to_string(),
            relationship.to_string(),
            race.to_string(),
            sex.to_string(),
            gain.to_string(),
            loss.to_string(),
            format_number(hours),
            country.to_string(),
            if rich { ">50K" } else { "<=50K" }.to_string(),
            "none".to_string(),
        ]);
    }
    let mut header: Vec<String> = ADULT_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.push("label".into());
    let opts = CsvOptions {
        missing_tokens: vec![String::new()],
        ..CsvOptions::default().with_label("label")
    };
    dataset_from_table(&RawTable { header, rows }, &opts)
}

fn at_most(attribute: &str, value: f64) -> Predicate {
    Predicate {
        attribute: attribute.into(),
        condition: Condition::Range {
            lower: None,
            upper: Some(Bound {
                value,
                text: format_number(value),
                inclusive: true,
            }),
            missing: false,
        },
    }
}

fn one_of(attribute: &str, values: &[&str]) -> Predicate {
    Predicate {
        attribute: attribute.into(),
        condition: Condition::In {
            values: values.iter().map(|s| s.to_string()).collect(),
            missing: false,
        },
    }
}

/// The four census groups, with target shares 17.8%, 5%, 4.2% and 1.6%.
/// The second one expects `capital-gain` shifted down by 100.
pub fn adult_groups() -> Vec<HiddenGroupSpec> {
    vec![
        HiddenGroupSpec::new(
            "group-1",
            vec![
                at_most("fnlwgt", 285194.62),
                one_of(
                    "native-country",
                    &[
                        "Ecuador",
                        "El-Salvador",
                        "Haiti",
                        "Cuba",
                        "France",
                        "Yugoslavia",
                        "Germany",
                        "?",
                        "Poland",
                        "Hungary",
                        "Laos",
                        "Mexico",
                        "Japan",
                        "Hong",
                        "Vietnam",
                        "Peru",
                        "England",
                        "United-States",
                    ],
                ),
            ],
        )
        .with_share(0.178),
        HiddenGroupSpec::new(
            "group-2",
            vec![
                one_of("occupation", &["Exec-managerial"]),
                at_most("capital-gain", -75.82),
                one_of("race", &["Amer-Indian-Eskimo", "Asian-Pac-Islander", "White"]),
            ],
        )
        .with_share(0.05),
        HiddenGroupSpec::new(
            "group-3",
            vec![
                at_most("capital-loss", 115.42),
                at_most("education-num", 9.1),
                one_of("income", &[">50K"]),
            ],
        )
        .with_share(0.042),
        HiddenGroupSpec::new(
            "group-4",
            vec![
                at_most("hours-per-week", 35.12),
                one_of("marital-status", &["Widowed", "Married-spouse-absent", "Divorced"]),
                one_of("relationship", &["Not-in-family"]),
            ],
        )
        .with_share(0.016),
    ]
}

/// Census features with `capital-gain` shifted by -100 and the four groups
/// planted under the default noise levels.
pub fn adult_like(n: usize, seed: u64) -> Result<Planted> {
    let features = adult_features(n, seed)?;
    let features = super::shift_column(&features, "capital-gain", 100.0)?;
    plant_groups(&features, &adult_groups(), seed.wrapping_add(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn titanic_cells_are_exact() {
        let ds = titanic_like(1).unwrap();
        assert_eq!(ds.row_count(), TITANIC_ROWS);
        assert_eq!(ds.class_names, vec!["0", "1"]);
        let survivors = ds.labels.iter().filter(|&&l| l == 1).count();
        assert_eq!(survivors, 342);
        let sex = ds.column("Sex").unwrap();
        let female_survivors = (0..ds.row_count())
            .filter(|&r| ds.labels[r] == 1 && sex.decode(r) == Some("female"))
            .count();
        assert_eq!(female_survivors, 233);
    }

    #[test]
    fn adult_group_shares() {
        let planted = adult_like(ADULT_ROWS, 11).unwrap();
        let n = ADULT_ROWS as f64;
        for (rows, spec) in planted.truth.iter().zip(adult_groups()) {
            let share = rows.len() as f64 / n;
            let target = spec.share.unwrap();
            assert!(
                (share - target).abs() < 0.25 * target,
                "{}: {share} vs {target}",
                spec.name
            );
        }
        let country = planted.data.column("native-country").unwrap();
        assert!(country.dictionary.iter().any(|v| v == "?"));
        assert_eq!(country.missing_count(), 0);
    }
}
