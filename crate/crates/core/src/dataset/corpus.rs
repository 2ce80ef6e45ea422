use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{xyz_to_srgb_matrix, CameraProfile};
use crate::error::{Error, Result};
use crate::geometry::{calibrate_ibl_exposure, median};
use crate::image::{read_image, ColorSpace, ExposureMeta, LinearImage, PoseMeta, SceneClass};
use crate::photometric::unexpose;
use crate::search::CorpusStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Raster,
    IblPanorama,
}

/// One line of a corpus file. Paths are relative to the corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub id: String,
    pub path: PathBuf,
    pub scene_class: SceneClass,
    pub kind: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<PoseMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure: Option<ExposureMeta>,
    pub camera_profile: PathBuf,
}

impl SourceEntry {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("source {}: {msg}", self.id)));
        if self.id.is_empty() {
            return bad("empty id");
        }
        match self.kind {
            SourceKind::Raster => {
                if self.pose.is_none() {
                    return bad("raster sources need a pose");
                }
                if self.exposure.is_none() {
                    return bad("raster sources need exposure metadata");
                }
            }
            SourceKind::IblPanorama => {}
        }
        if let Some(p) = &self.pose {
            // A zero field of view marks a failed pose estimate; the pair gate
            // rejects it, so only the remaining fields are checked here.
            if !(p.inclination_deg.is_finite() && p.roll_deg.is_finite() && p.vfov_deg >= 0.0 && p.vfov_deg < 180.0) {
                return bad("invalid pose");
            }
        }
        if let Some(e) = &self.exposure {
            e.validate()?;
        }
        Ok(())
    }
}

/// Corpus entries plus the directory their paths are relative to.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub root: PathBuf,
    pub entries: Vec<SourceEntry>,
}

impl Corpus {
    /// Reads a JSON-lines corpus file. Blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: SourceEntry = serde_json::from_str(line)
                .map_err(|e| Error::json(format!("{}:{}", path.display(), n + 1), e))?;
            entries.push(entry);
        }
        let corpus = Corpus {
            root: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            entries,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::new();
        for e in &self.entries {
            text.push_str(&serde_json::to_string(e).map_err(|err| Error::json("corpus entry", err))?);
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            e.validate()?;
            if !seen.insert(e.id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate source id {}", e.id)));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }
}

/// A source ready for simulation: XYZ pixels proportional to scene
/// luminance, plus its camera profile.
#[derive(Debug, Clone)]
pub struct LoadedSource {
    pub entry: SourceEntry,
    pub image: LinearImage,
    pub profile: Arc<CameraProfile>,
    /// Mean linear-sRGB sample of the capture as exposed, for corpus statistics.
    pub exposed_mean: f64,
}

/// All sources of a corpus, loaded once and shared read-only.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub sources: Vec<LoadedSource>,
    /// Median luminance of the unexposed indoor rasters that panoramas were
    /// calibrated to, when any panorama needed it.
    pub ibl_reference_median: Option<f64>,
}

fn load_one(corpus: &Corpus, entry: &SourceEntry, profiles: &HashMap<PathBuf, Arc<CameraProfile>>) -> Result<LoadedSource> {
    let mut image = read_image(corpus.resolve(&entry.path))?;
    if image.color_space != ColorSpace::Xyz {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::Xyz.name(),
            actual: image.color_space.name(),
        });
    }
    let white = image
        .white_xy
        .ok_or_else(|| Error::InvalidArgument(format!("source {} has no white point", entry.id)))?;
    image.pose = entry.pose;
    image.scene_class = Some(entry.scene_class);
    let exposed_mean = image.transform(&xyz_to_srgb_matrix(white)).mean();
    let image = match entry.kind {
        SourceKind::Raster => {
            let meta = entry.exposure.expect("validated");
            unexpose(&image, &meta)?
        }
        SourceKind::IblPanorama => {
            let (w, h) = image.dims();
            if w != 2 * h {
                return Err(Error::InvalidArgument(format!(
                    "panorama {} is {w}x{h}, expected 2:1",
                    entry.id
                )));
            }
            // High dynamic range panoramas do not clip.
            image.saturation_level = [f32::INFINITY; 3];
            image.exposure = None;
            image
        }
    };
    Ok(LoadedSource {
        entry: entry.clone(),
        image,
        profile: profiles[&entry.camera_profile].clone(),
        exposed_mean,
    })
}

impl LoadedCorpus {
    /// Loads every source in parallel, unexposes rasters and calibrates
    /// panoramas to the median luminance of the unexposed indoor rasters.
    pub fn load(corpus: &Corpus) -> Result<Self> {
        Self::load_with_profiles(corpus, &|path| CameraProfile::load(path))
    }

    /// Like [`LoadedCorpus::load`], with camera profiles obtained from
    /// `profile_for` given each resolved profile path.
    pub fn load_with_profiles(corpus: &Corpus, profile_for: &dyn Fn(&Path) -> Result<CameraProfile>) -> Result<Self> {
        let mut profiles = HashMap::new();
        for e in &corpus.entries {
            if !profiles.contains_key(&e.camera_profile) {
                let p = profile_for(&corpus.resolve(&e.camera_profile))?;
                profiles.insert(e.camera_profile.clone(), Arc::new(p));
            }
        }
        let mut sources = corpus
            .entries
            .par_iter()
            .map(|e| load_one(corpus, e, &profiles))
            .collect::<Result<Vec<_>>>()?;

        let needs_reference = sources.iter().any(|s| s.entry.kind == SourceKind::IblPanorama);
        let mut ibl_reference_median = None;
        if needs_reference {
            let mut pooled: Vec<f32> = sources
                .iter()
                .filter(|s| s.entry.kind == SourceKind::Raster && s.entry.scene_class == SceneClass::Indoor)
                .flat_map(|s| s.image.plane(1).iter().copied())
                .collect();
            if pooled.is_empty() {
                return Err(Error::EmptyClass(
                    "panoramas need indoor raster images to calibrate against".into(),
                ));
            }
            let reference = median(&mut pooled);
            for s in sources.iter_mut().filter(|s| s.entry.kind == SourceKind::IblPanorama) {
                s.image = calibrate_ibl_exposure(&s.image, reference)?;
            }
            ibl_reference_median = Some(reference);
        }
        Ok(LoadedCorpus {
            sources,
            ibl_reference_median,
        })
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.entry.id == id)
    }

    /// Exposure statistics over raster captures, if there are enough of them.
    pub fn exposure_stats(&self, min_images: usize) -> Result<CorpusStats> {
        let means: Vec<f64> = self
            .sources
            .iter()
            .filter(|s| s.entry.kind == SourceKind::Raster)
            .map(|s| s.exposed_mean)
            .collect();
        CorpusStats::from_means(&means, min_images)
    }
}
