//! Jaro-Winkler string similarity.

const PREFIX_SCALE: f64 = 0.1;
const MAX_PREFIX: usize = 4;
const BOOST_THRESHOLD: f64 = 0.7;

/// Jaro similarity in `[0, 1]`.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);

    let mut a_matched = vec![false; a.len()];
    let mut b_matched = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_matched[j] && b[j] == *ca {
                a_matched[i] = true;
                b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }

    let mut half_transpositions = 0usize;
    let mut k = 0;
    for (i, ca) in a.iter().enumerate() {
        if !a_matched[i] {
            continue;
        }
        while !b_matched[k] {
            k += 1;
        }
        if *ca != b[k] {
            half_transpositions += 1;
        }
        k += 1;
    }
    let m = matches as f64;
    let t = (half_transpositions / 2) as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro-Winkler similarity: Jaro boosted by the common prefix (at most four
/// characters, scale 0.1) when Jaro exceeds 0.7.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let sim = jaro(a, b);
    if sim <= BOOST_THRESHOLD {
        return sim;
    }
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(MAX_PREFIX)
        .take_while(|(x, y)| x == y)
        .count();
    (sim + prefix as f64 * PREFIX_SCALE * (1.0 - sim)).min(1.0)
}

/// `1 - jaro_winkler(a, b)`.
pub fn jaro_winkler_distance(a: &str, b: &str) -> f64 {
    1.0 - jaro_winkler(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_and_empty() {
        assert_eq!(jaro_winkler("abc", "abc"), 1.0);
        assert_eq!(jaro_winkler("", "abc"), 0.0);
        assert_eq!(jaro_winkler("", ""), 1.0);
    }

    #[test]
    fn textbook_pairs() {
        // m = 6, t = 1: jaro = (1 + 1 + 5/6) / 3 = 0.94444, prefix 3
        assert!((jaro("MARTHA", "MARHTA") - 17.0 / 18.0).abs() < 1e-12);
        assert!((jaro_winkler("MARTHA", "MARHTA") - 0.961_111).abs() < 1e-4);
        // m = 4, t = 0: jaro = (4/5 + 4/6 + 1) / 3 = 0.82222, prefix 1
        assert!((jaro_winkler("DIXON", "DICKSONX") - 0.8133).abs() < 1e-4);
        // m = 4, t = 0: jaro = (4/5 + 4/5 + 1) / 3 = 0.86667, prefix 2
        assert!((jaro_winkler("DWAYNE", "DUANE") - 0.84).abs() < 1e-4);
    }

    #[test]
    fn no_common_characters() {
        assert_eq!(jaro_winkler("AB2", "XY9"), 0.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in "[a-dA-D]{0,8}", b in "[a-dA-D]{0,8}") {
            let s = jaro_winkler(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s - jaro_winkler(&b, &a)).abs() < 1e-12);
            prop_assert_eq!(jaro_winkler(&a, &a), 1.0);
        }
    }
}
