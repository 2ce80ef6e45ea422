use std::path::Path;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::PipelineConfig;
use super::corpus::{LoadedCorpus, LoadedSource, SourceKind};
use super::crops::{crop_square, crop_vfov_deg, split_squares};
use super::manifest::{DatasetManifest, Decision, ManifestRecord, ManifestWriter, OutputPaths, RecordStats};
use super::pairs::{both_panoramas, build_pairs, PairSpec};
use super::seed::{example_seed, hash_u64};
use super::split::example_split;
use crate::color::XyCoord;
use crate::error::{Error, Result};
use crate::geometry::{ibl_crop, sample_scenario, simulate_glass, CaptureScenario, GeometryStats};
use crate::image::{resize, write_image, LinearImage, PoseMeta};
use crate::photometric::{simulate_example, AwbEstimator, CaptureFunction, GrayWorld};
use crate::search::{cull, ssim_weighted, well_exposed, CorpusStats, CullDecision, CullReason};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RASTER_EXTENSION: &str = "lrim";

/// Smallest square accepted from a source frame.
const MIN_CROP_SIDE: usize = 2;

/// Identifies one attempt. Everything else follows from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attempt {
    pub i: usize,
    pub j: usize,
    pub a: u8,
    pub b: u8,
    pub scenario_index: u32,
    pub seed: u64,
}

/// A fully simulated candidate and the verdict on it.
#[derive(Debug, Clone)]
pub struct SimulatedExample {
    pub m: LinearImage,
    pub t: LinearImage,
    pub r: LinearImage,
    pub c: LinearImage,
    pub pair: PairSpec,
    pub decision: CullDecision,
    pub e_prime: f64,
    pub white_xy_awb: XyCoord,
    pub mean_ssim: f64,
    pub std_ssim: f64,
    pub geometry: GeometryStats,
    pub capture: CaptureFunction,
    pub seed: u64,
}

/// Why an attempt produced no images.
#[derive(Debug)]
pub enum Rejection {
    Cull(CullReason, String),
    Failure(Error),
}

impl From<Error> for Rejection {
    fn from(e: Error) -> Self {
        match e.cull_reason() {
            Some(reason) => Rejection::Cull(reason, e.to_string()),
            None => Rejection::Failure(e),
        }
    }
}

/// Result of running one attempt, before anything is written.
#[derive(Debug)]
pub struct AttemptOutcome {
    pub attempt: Attempt,
    pub scenario: CaptureScenario,
    pub result: std::result::Result<SimulatedExample, Rejection>,
}

impl AttemptOutcome {
    pub fn decision(&self) -> Decision {
        match &self.result {
            Ok(ex) => Decision::Cull(ex.decision.reason),
            Err(Rejection::Cull(reason, _)) => Decision::Cull(*reason),
            Err(Rejection::Failure(_)) => Decision::Error,
        }
    }
}

/// A loaded corpus plus the configuration and master seed of one run.
pub struct Pipeline {
    pub corpus: LoadedCorpus,
    pub config: PipelineConfig,
    pub master_seed: u64,
    exposure_stats: Option<CorpusStats>,
    awb: Box<dyn AwbEstimator>,
}

impl Pipeline {
    pub fn new(corpus: LoadedCorpus, config: PipelineConfig, master_seed: u64) -> Result<Self> {
        config.validate()?;
        let exposure_stats = match config.search.corpus_stats {
            Some(s) => Some(s),
            None => match corpus.exposure_stats(config.search.min_stats_images) {
                Ok(s) => Some(s),
                Err(Error::DegenerateStats(msg)) => {
                    warn!("exposure gate disabled: {msg}");
                    None
                }
                Err(e) => return Err(e),
            },
        };
        Ok(Pipeline {
            corpus,
            config,
            master_seed,
            exposure_stats,
            awb: Box::new(GrayWorld),
        })
    }

    pub fn with_awb(mut self, awb: Box<dyn AwbEstimator>) -> Self {
        self.awb = awb;
        self
    }

    pub fn exposure_stats(&self) -> Option<&CorpusStats> {
        self.exposure_stats.as_ref()
    }

    fn source(&self, n: usize) -> &LoadedSource {
        &self.corpus.sources[n]
    }

    pub fn attempt_for(&self, i: usize, j: usize, a: u8, b: u8, scenario_index: u32) -> Attempt {
        let seed = example_seed(
            self.master_seed,
            &self.source(i).entry.id,
            &self.source(j).entry.id,
            a,
            b,
            scenario_index,
        );
        Attempt {
            i,
            j,
            a,
            b,
            scenario_index,
            seed,
        }
    }

    /// Every attempt of the run in order: shuffled pairs, then the four crop
    /// selectors, then the scenarios of each, truncated to `budget`.
    pub fn attempts(&self, budget: usize) -> Result<Vec<Attempt>> {
        let entries: Vec<_> = self.corpus.sources.iter().map(|s| s.entry.clone()).collect();
        let pairs = build_pairs(
            &entries,
            self.config.dataset.include_outdoor_pairs,
            hash_u64(&format!("refsynth-pairs:{}", self.master_seed)),
        )?;
        let per_pair = self.config.dataset.scenarios_per_pair as u32;
        let mut out = Vec::new();
        'outer: for (i, j) in pairs {
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                for k in 0..per_pair {
                    if out.len() >= budget {
                        break 'outer;
                    }
                    out.push(self.attempt_for(i, j, a, b, k));
                }
            }
        }
        Ok(out)
    }

    /// Simulates one attempt from scratch. Deterministic in `attempt`.
    pub fn run_attempt(&self, attempt: &Attempt) -> AttemptOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt.seed);
        let mut scenario = sample_scenario(&mut rng, &self.config.simulation);
        let result = self.simulate(attempt, &mut scenario);
        AttemptOutcome {
            attempt: *attempt,
            scenario,
            result,
        }
    }

    fn simulate(
        &self,
        attempt: &Attempt,
        scenario: &mut CaptureScenario,
    ) -> std::result::Result<SimulatedExample, Rejection> {
        let (si, sj) = (self.source(attempt.i), self.source(attempt.j));
        let sim = &self.config.simulation;
        if both_panoramas(&si.entry, &sj.entry) {
            return Err(Rejection::Cull(CullReason::GeometryCull, "two panoramas have no camera pose".into()));
        }
        // A panorama adopts the pose of its partner.
        let pose_i = si.entry.pose.or(sj.entry.pose).expect("one side is a raster");
        let pose_j = sj.entry.pose.unwrap_or(pose_i);
        if !sim.pose_compatible(&pose_i, &pose_j) {
            return Err(Rejection::Cull(
                CullReason::GeometryCull,
                format!("incompatible poses {pose_i:?} and {pose_j:?}"),
            ));
        }

        // The glass camera is the transmission camera, or the reflection
        // camera when the transmission is a panorama.
        let camera_source = if si.entry.kind == SourceKind::Raster { si } else { sj };
        let (cw, ch) = camera_source.image.dims();
        let camera_side = split_squares(cw, ch, MIN_CROP_SIDE)?[0].side;
        let camera_pose = camera_source.entry.pose.expect("raster");
        let camera = PoseMeta {
            vfov_deg: crop_vfov_deg(camera_pose.vfov_deg, ch, camera_side),
            ..camera_pose
        };
        scenario.vfov_deg = camera.vfov_deg;

        let res = self.config.dataset.resolution;
        let ibl_view = |src: &LoadedSource, step: u8| {
            let azimuth = scenario.ibl_azimuth_deg + step as f64 * camera.vfov_deg;
            ibl_crop(&src.image, &camera, azimuth, res, res, sim.max_ibl_oversample)
        };
        let (t_src, t_full) = match si.entry.kind {
            SourceKind::Raster => {
                let sq = split_squares(si.image.width(), si.image.height(), MIN_CROP_SIDE)?;
                (crop_square(&si.image, sq[attempt.a as usize])?, false)
            }
            SourceKind::IblPanorama => (ibl_view(si, attempt.a)?, true),
        };
        let (r_src, c_src, blur_scale) = match sj.entry.kind {
            SourceKind::Raster => {
                let (w, h) = sj.image.dims();
                let sq = split_squares(w, h, MIN_CROP_SIDE)?;
                let b = attempt.b as usize;
                (
                    crop_square(&sj.image, sq[b])?,
                    crop_square(&sj.image, sq[1 - b])?,
                    w.min(h) as f64 / sq[b].side as f64,
                )
            }
            SourceKind::IblPanorama => (ibl_view(sj, attempt.b)?, ibl_view(sj, 1 - attempt.b)?, 1.0),
        };
        let saturated = t_src.is_saturated() || r_src.is_saturated();
        let fit = |img: LinearImage, already: bool| if already { Ok(img) } else { resize(&img, res, res) };
        let t_src = fit(t_src, t_full)?;
        let r_src = fit(r_src, sj.entry.kind == SourceKind::IblPanorama)?;
        let c_src = fit(c_src, sj.entry.kind == SourceKind::IblPanorama)?;

        let glass = simulate_glass(&t_src, &r_src, scenario, &camera, blur_scale, sim)?;
        let captured = simulate_example(
            &glass.t,
            &glass.r,
            &c_src,
            saturated,
            &camera_source.profile,
            self.awb.as_ref(),
            &self.config.photometric,
        )?;
        let report = ssim_weighted(&captured.m, &captured.t, &self.config.search.ssim)?;
        let exposed = match &self.exposure_stats {
            Some(stats) => well_exposed(&captured.m, stats, self.config.search.exposure_k)?,
            None => true,
        };
        let decision = cull(&report, exposed, &self.config.search.thresholds);
        Ok(SimulatedExample {
            pair: PairSpec {
                i: attempt.i,
                j: attempt.j,
                a: attempt.a,
                b: attempt.b,
                scenario: *scenario,
            },
            decision,
            e_prime: captured.capture.exposure_scalar,
            white_xy_awb: captured.capture.white_xy_awb,
            mean_ssim: report.mean_ssim,
            std_ssim: report.std_ssim,
            geometry: glass.stats,
            capture: captured.capture,
            seed: attempt.seed,
            m: captured.m,
            t: captured.t,
            r: captured.r,
            c: captured.c,
        })
    }

    /// Manifest record for an outcome. Writes the rasters under `out_dir`
    /// when the example is kept, or for any simulated candidate when culled
    /// examples are emitted. Write failures become `Error` records.
    pub fn emit(&self, outcome: &AttemptOutcome, out_dir: &Path) -> ManifestRecord {
        let at = &outcome.attempt;
        let (si, sj) = (self.source(at.i), self.source(at.j));
        let mut record = ManifestRecord {
            seed: at.seed,
            i: si.entry.id.clone(),
            j: sj.entry.id.clone(),
            a: at.a,
            b: at.b,
            scenario_index: at.scenario_index,
            scenario: outcome.scenario,
            decision: outcome.decision(),
            outputs: None,
            stats: None,
            split: None,
            error: None,
        };
        match &outcome.result {
            Ok(ex) => {
                record.stats = Some(RecordStats {
                    mean_ssim: ex.mean_ssim,
                    std_ssim: ex.std_ssim,
                    e_prime: ex.e_prime,
                    white_xy_awb: ex.white_xy_awb.into(),
                    geometry: ex.geometry,
                });
                if ex.decision.keep {
                    record.split = example_split(&si.entry.id, &sj.entry.id, &self.config.dataset.splits);
                }
                if ex.decision.keep || self.config.dataset.emit_culled {
                    let paths = OutputPaths::for_seed(at.seed, RASTER_EXTENSION);
                    match write_example(ex, &paths, out_dir) {
                        Ok(()) => record.outputs = Some(paths),
                        Err(e) => {
                            record.decision = Decision::Error;
                            record.split = None;
                            record.error = Some(e.to_string());
                        }
                    }
                }
            }
            Err(Rejection::Cull(_, msg)) => record.error = Some(msg.clone()),
            Err(Rejection::Failure(e)) => record.error = Some(e.to_string()),
        }
        record
    }

    /// Runs up to `budget` attempts in parallel and writes the manifest to
    /// `out_dir`. Records keep attempt order whatever the thread count.
    pub fn generate(&self, out_dir: &Path, budget: usize) -> Result<DatasetManifest> {
        self.generate_with_progress(out_dir, budget, &|_| {})
    }

    pub fn generate_with_progress(
        &self,
        out_dir: &Path,
        budget: usize,
        progress: &(dyn Fn(&ManifestRecord) + Sync),
    ) -> Result<DatasetManifest> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let attempts = self.attempts(budget)?;
        let records: Vec<ManifestRecord> = attempts
            .par_iter()
            .map(|a| {
                let record = self.emit(&self.run_attempt(a), out_dir);
                progress(&record);
                record
            })
            .collect();
        let manifest = DatasetManifest { records };
        let path = out_dir.join(MANIFEST_FILE);
        let tmp = out_dir.join(format!("{MANIFEST_FILE}.tmp"));
        let mut writer = ManifestWriter::create(&tmp)?;
        for r in &manifest.records {
            writer.append(r)?;
        }
        writer.finish()?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }

    /// Re-runs the attempt a record describes. Fails when the record's ids
    /// are not in the corpus or its seed does not match them.
    pub fn replay(&self, record: &ManifestRecord) -> Result<AttemptOutcome> {
        let find = |id: &str| {
            self.corpus
                .index_of(id)
                .ok_or_else(|| Error::InvalidArgument(format!("source {id} is not in the corpus")))
        };
        let attempt = self.attempt_for(find(&record.i)?, find(&record.j)?, record.a, record.b, record.scenario_index);
        if attempt.seed != record.seed {
            return Err(Error::InvalidArgument(format!(
                "record seed {} does not match {} for master seed {}",
                record.seed, attempt.seed, self.master_seed
            )));
        }
        Ok(self.run_attempt(&attempt))
    }
}

fn write_example(ex: &SimulatedExample, paths: &OutputPaths, out_dir: &Path) -> Result<()> {
    let dir = out_dir.join(paths.m.parent().expect("nested path"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (img, rel) in [(&ex.m, &paths.m), (&ex.t, &paths.t), (&ex.r, &paths.r), (&ex.c, &paths.c)] {
        write_image(img, out_dir.join(rel))?;
    }
    Ok(())
}
