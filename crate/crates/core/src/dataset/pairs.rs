use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::{SourceEntry, SourceKind};
use crate::error::{Error, Result};
use crate::geometry::CaptureScenario;
use crate::image::SceneClass;

/// A transmission source `i`, a reflection source `j`, which half of each
/// to use and the glass geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub i: usize,
    pub j: usize,
    pub a: u8,
    pub b: u8,
    pub scenario: CaptureScenario,
}

/// Ordered source pairs `(O x I) + (I x O) + (I x I)`, never pairing an image
/// with itself, optionally with `O x O`, shuffled by `seed`.
///
/// Fails when either class is empty, since then at most one of the three
/// products is non-empty and the pairing degenerates.
pub fn build_pairs(entries: &[SourceEntry], include_outdoor_pairs: bool, seed: u64) -> Result<Vec<(usize, usize)>> {
    let of = |class| {
        entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.scene_class == class)
            .map(|(n, _)| n)
            .collect::<Vec<_>>()
    };
    let outdoor = of(SceneClass::Outdoor);
    let indoor = of(SceneClass::Indoor);
    if outdoor.is_empty() {
        return Err(Error::EmptyClass("no outdoor images".into()));
    }
    if indoor.is_empty() {
        return Err(Error::EmptyClass("no indoor images".into()));
    }
    let mut pairs = Vec::new();
    let product = |pairs: &mut Vec<(usize, usize)>, xs: &[usize], ys: &[usize]| {
        for &x in xs {
            for &y in ys {
                if x != y {
                    pairs.push((x, y));
                }
            }
        }
    };
    product(&mut pairs, &outdoor, &indoor);
    product(&mut pairs, &indoor, &outdoor);
    product(&mut pairs, &indoor, &indoor);
    if include_outdoor_pairs {
        product(&mut pairs, &outdoor, &outdoor);
    }
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(pairs)
}

/// Two panoramas cannot form a pair: neither supplies a camera pose.
pub fn both_panoramas(i: &SourceEntry, j: &SourceEntry) -> bool {
    i.kind == SourceKind::IblPanorama && j.kind == SourceKind::IblPanorama
}
