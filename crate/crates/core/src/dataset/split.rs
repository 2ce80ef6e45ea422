use serde::{Deserialize, Serialize};

use super::config::SplitFractions;
use super::seed::hash_u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Split of a source image, from a hash of its id. Every example built from
/// one image lands in the same split as every other.
pub fn source_split(id: &str, fractions: &SplitFractions) -> Split {
    let u = (hash_u64(&format!("refsynth-split:{id}")) >> 11) as f64 / (1u64 << 53) as f64;
    if u < fractions.train {
        Split::Train
    } else if u < fractions.train + fractions.val {
        Split::Val
    } else {
        Split::Test
    }
}

/// Examples whose two sources disagree belong to no split; using them
/// would share an image between sets.
pub fn example_split(i_id: &str, j_id: &str, fractions: &SplitFractions) -> Option<Split> {
    let a = source_split(i_id, fractions);
    (a == source_split(j_id, fractions)).then_some(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportions() {
        let f = SplitFractions::default();
        let mut counts = [0usize; 3];
        for n in 0..20_000 {
            counts[source_split(&format!("img{n}"), &f) as usize] += 1;
        }
        let frac = counts.map(|c| c as f64 / 20_000.0);
        assert!((frac[0] - 0.80).abs() < 0.015, "{frac:?}");
        assert!((frac[1] - 0.15).abs() < 0.015, "{frac:?}");
        assert!((frac[2] - 0.05).abs() < 0.01, "{frac:?}");
    }

    #[test]
    fn no_shared_sources() {
        let f = SplitFractions::default();
        let ids: Vec<String> = (0..200).map(|n| format!("s{n}")).collect();
        for x in &ids {
            for y in &ids {
                if let Some(s) = example_split(x, y, &f) {
                    assert_eq!(source_split(x, &f), s);
                    assert_eq!(source_split(y, &f), s);
                }
            }
        }
        let all_train = SplitFractions {
            train: 1.0,
            val: 0.0,
            test: 0.0,
        };
        assert_eq!(example_split("x", "y", &all_train), Some(Split::Train));
    }
}
