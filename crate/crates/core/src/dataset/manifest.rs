use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::split::Split;
use crate::error::{Error, Result};
use crate::geometry::{CaptureScenario, GeometryStats};
use crate::search::CullReason;

/// Outcome of one attempt: a cull decision (`Keep` included) or a failure
/// that is not a property of the candidate, such as unreadable input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Decision {
    Cull(CullReason),
    Error,
}

impl Decision {
    pub fn is_keep(self) -> bool {
        self == Decision::Cull(CullReason::None)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Cull(r) => r.as_str(),
            Decision::Error => "Error",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<Decision> for String {
    fn from(d: Decision) -> Self {
        d.as_str().to_owned()
    }
}

impl TryFrom<String> for Decision {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "Error" {
            return Ok(Decision::Error);
        }
        CullReason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .map(Decision::Cull)
            .ok_or_else(|| format!("unknown decision {s:?}"))
    }
}

/// Raster paths of an emitted example, relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub m: PathBuf,
    pub t: PathBuf,
    pub r: PathBuf,
    pub c: PathBuf,
}

impl OutputPaths {
    pub fn for_seed(seed: u64, extension: &str) -> Self {
        let dir = PathBuf::from("examples").join(format!("{seed:016x}"));
        OutputPaths {
            m: dir.join(format!("m.{extension}")),
            t: dir.join(format!("t.{extension}")),
            r: dir.join(format!("r.{extension}")),
            c: dir.join(format!("c.{extension}")),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Path)> {
        [("m", &self.m), ("t", &self.t), ("r", &self.r), ("c", &self.c)]
            .into_iter()
            .map(|(n, p)| (n, p.as_path()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordStats {
    pub mean_ssim: f64,
    pub std_ssim: f64,
    /// Re-exposure applied to the mixture.
    pub e_prime: f64,
    pub white_xy_awb: [f64; 2],
    pub geometry: GeometryStats,
}

/// One attempted example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub seed: u64,
    pub i: String,
    pub j: String,
    pub a: u8,
    pub b: u8,
    pub scenario_index: u32,
    pub scenario: CaptureScenario,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputPaths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<RecordStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// JSON-lines file of attempt records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(
                serde_json::from_str(line).map_err(|e| Error::json(format!("{}:{}", path.display(), n + 1), e))?,
            );
        }
        Ok(DatasetManifest { records })
    }

    /// Writes to a temporary file and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("jsonl.tmp");
        let mut appender = ManifestWriter::create(&tmp)?;
        for r in &self.records {
            appender.append(r)?;
        }
        appender.finish()?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn sort_by_seed(&mut self) {
        self.records.sort_by(|x, y| {
            (x.seed, &x.i, &x.j, x.a, x.b, x.scenario_index).cmp(&(y.seed, &y.i, &y.j, y.a, y.b, y.scenario_index))
        });
    }

    pub fn kept(&self) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(|r| r.decision.is_keep())
    }

    /// Count per decision, in a fixed order.
    pub fn histogram(&self) -> Vec<(Decision, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.decision).or_insert(0) += 1;
        }
        counts.into_iter().collect()
    }
}

/// Appends one complete line per record.
pub struct ManifestWriter {
    path: PathBuf,
    out: std::io::BufWriter<std::fs::File>,
}

impl ManifestWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(ManifestWriter {
            path,
            out: std::io::BufWriter::new(file),
        })
    }

    pub fn append(&mut self, record: &ManifestRecord) -> Result<()> {
        let mut line = serde_json::to_string(record).map_err(|e| Error::json("manifest record", e))?;
        line.push('\n');
        self.out.write_all(line.as_bytes()).map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_scenario, SimulationConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn record(seed: u64, decision: Decision) -> ManifestRecord {
        ManifestRecord {
            seed,
            i: "in".into(),
            j: "out".into(),
            a: 1,
            b: 0,
            scenario_index: 1,
            scenario: sample_scenario(&mut ChaCha8Rng::seed_from_u64(seed), &SimulationConfig::default()),
            decision,
            outputs: decision.is_keep().then(|| OutputPaths::for_seed(seed, "lrim")),
            stats: None,
            split: Some(Split::Val),
            error: None,
        }
    }

    #[test]
    fn decision_strings() {
        for r in CullReason::ALL {
            let d = Decision::Cull(r);
            assert_eq!(Decision::try_from(String::from(d)).unwrap(), d);
        }
        assert_eq!(serde_json::to_string(&Decision::Error).unwrap(), "\"Error\"");
        assert_eq!(serde_json::to_string(&Decision::Cull(CullReason::None)).unwrap(), "\"Keep\"");
        assert!(serde_json::from_str::<Decision>("\"Maybe\"").is_err());
    }

    #[test]
    fn round_trip_and_sort() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let mut m = DatasetManifest {
            records: vec![
                record(9, Decision::Cull(CullReason::None)),
                record(3, Decision::Cull(CullReason::TooTransparent)),
                record(5, Decision::Error),
            ],
        };
        m.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back, m);
        m.sort_by_seed();
        assert_eq!(m.records.iter().map(|r| r.seed).collect::<Vec<_>>(), [3, 5, 9]);
        assert_eq!(m.kept().count(), 1);
        assert_eq!(m.histogram().iter().map(|(_, n)| n).sum::<usize>(), 3);
    }

    #[test]
    fn empty_file_is_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(DatasetManifest::load(&path).unwrap().records.is_empty());
    }

    #[test]
    fn output_layout() {
        let p = OutputPaths::for_seed(0xab, "lrim");
        assert_eq!(p.m, PathBuf::from("examples/00000000000000ab/m.lrim"));
        assert_eq!(p.iter().count(), 4);
    }
}
