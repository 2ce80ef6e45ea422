use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use refsynth::color::{xyz_to_srgb_matrix, CameraProfile};
use refsynth::dataset::{
    validate_manifest, write_desk_corpus, Corpus, DatasetManifest, Decision, LoadedCorpus, ManifestRecord,
    ManifestWriter, Pipeline, PipelineConfig, SourceEntry, SourceKind, MANIFEST_FILE,
};
use refsynth::image::{read_image, to_preview_srgb, ColorSpace, LinearImage, SceneClass};

/// Seed used when `--seed` is not given, so that runs reproduce by default.
const DEFAULT_SEED: u64 = 0x5EED_2021;

#[derive(Parser, Debug)]
#[command(name = "refsynth", version, about = "Synthesize glass-reflection training examples")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Pipeline configuration (JSON). Missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "refsynth-out")]
    out: PathBuf,
    /// Largest number of attempts to run.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Side of the square output images, overriding the configuration.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one example from a transmission and a reflection image.
    Synth {
        /// Transmission source raster (with sidecar).
        transmission: PathBuf,
        /// Reflection source raster (with sidecar).
        reflection: PathBuf,
        /// Camera profile of the capturing camera. Defaults to one whose
        /// camera space is XYZ.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Half of the transmission image to use.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        a: u8,
        /// Half of the reflection image to use as the reflection.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        b: u8,
        #[arg(long, default_value_t = 0)]
        scenario_index: u32,
    },
    /// Generate a dataset from a corpus file.
    Generate {
        /// JSON-lines corpus of source entries.
        corpus: PathBuf,
    },
    /// Re-check every kept example of a manifest.
    Validate { manifest: PathBuf },
    /// Summarize a manifest.
    Stats { manifest: PathBuf },
    /// Write an 8-bit PNG rendering of a raster.
    Preview {
        input: PathBuf,
        /// Output PNG; defaults to the input path with a .png extension.
        #[arg(long)]
        png: Option<PathBuf>,
        /// Multiply samples by this factor first.
        #[arg(long, default_value_t = 1.0)]
        gain: f64,
    },
    /// Write the procedural demonstration corpus.
    Desk,
}

/// Outcome of a subcommand, mapped onto the process exit code.
enum Outcome {
    Ok,
    Culled,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Culled) => ExitCode::from(2),
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Synth {
            transmission,
            reflection,
            profile,
            a,
            b,
            scenario_index,
        } => synth(g, transmission, reflection, profile.as_deref(), *a, *b, *scenario_index),
        Command::Generate { corpus } => generate(g, corpus),
        Command::Validate { manifest } => validate(g, manifest),
        Command::Stats { manifest } => stats(manifest),
        Command::Preview { input, png, gain } => preview(input, png.as_deref(), *gain),
        Command::Desk => {
            let path = write_desk_corpus(&g.out, g.seed)?;
            println!("{}", path.display());
            Ok(Outcome::Ok)
        }
    }
}

fn load_config(g: &GlobalArgs) -> Result<PipelineConfig> {
    let mut config = match &g.config {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(r) = g.resolution {
        config.dataset.resolution = r;
    }
    config.validate()?;
    Ok(config)
}

/// Corpus entry built from a raster's sidecar.
fn entry_from_sidecar(path: &Path, id: String, profile: &Path) -> Result<SourceEntry> {
    let img = read_image(path).with_context(|| format!("reading {}", path.display()))?;
    let (w, h) = img.dims();
    let kind = if img.exposure.is_none() && w == 2 * h {
        SourceKind::IblPanorama
    } else {
        SourceKind::Raster
    };
    let entry = SourceEntry {
        id,
        path: std::path::absolute(path)?,
        scene_class: img.scene_class.unwrap_or(SceneClass::Indoor),
        kind,
        pose: img.pose,
        exposure: img.exposure,
        camera_profile: profile.to_path_buf(),
    };
    entry.validate()?;
    Ok(entry)
}

fn synth(
    g: &GlobalArgs,
    transmission: &Path,
    reflection: &Path,
    profile: Option<&Path>,
    a: u8,
    b: u8,
    scenario_index: u32,
) -> Result<Outcome> {
    let config = load_config(g)?;
    let profile_path = profile.map(Path::to_path_buf).unwrap_or_default();
    let corpus = Corpus {
        root: PathBuf::new(),
        entries: vec![
            entry_from_sidecar(transmission, "i".into(), &profile_path)?,
            entry_from_sidecar(reflection, "j".into(), &profile_path)?,
        ],
    };
    let loaded = LoadedCorpus::load_with_profiles(&corpus, &|p| {
        if profile.is_some() {
            CameraProfile::load(p)
        } else {
            Ok(CameraProfile::identity())
        }
    })?;
    let pipeline = Pipeline::new(loaded, config, g.seed)?;
    let attempt = pipeline.attempt_for(0, 1, a, b, scenario_index);
    let outcome = pipeline.run_attempt(&attempt);
    std::fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    let record = pipeline.emit(&outcome, &g.out);
    if let (Ok(ex), Some(paths)) = (&outcome.result, &record.outputs) {
        for (img, rel) in [(&ex.m, &paths.m), (&ex.t, &paths.t), (&ex.r, &paths.r), (&ex.c, &paths.c)] {
            to_preview_srgb(img)?.save_png(g.out.join(rel).with_extension("png"))?;
        }
    }
    let mut writer = ManifestWriter::create(g.out.join(MANIFEST_FILE))?;
    writer.append(&record)?;
    writer.finish()?;
    println!("{}", record.decision);
    Ok(match record.decision {
        d if d.is_keep() => Outcome::Ok,
        Decision::Error => {
            eprintln!("error: {}", record.error.as_deref().unwrap_or("unknown failure"));
            Outcome::Failed
        }
        _ => {
            if let Some(msg) = &record.error {
                info!("{msg}");
            }
            Outcome::Culled
        }
    })
}

fn print_histogram(manifest: &DatasetManifest) {
    let total = manifest.records.len();
    for (decision, n) in manifest.histogram() {
        let pct = 100.0 * n as f64 / total.max(1) as f64;
        println!("{:>18} {n:>8} {pct:6.2}%", decision.as_str());
    }
    println!("{:>18} {total:>8}", "attempts");
}

fn generate(g: &GlobalArgs, corpus_path: &Path) -> Result<Outcome> {
    let config = load_config(g)?;
    let corpus = Corpus::load(corpus_path).with_context(|| format!("loading {}", corpus_path.display()))?;
    let loaded = LoadedCorpus::load(&corpus)?;
    let pipeline = Pipeline::new(loaded, config, g.seed)?;
    let budget = g.budget.unwrap_or(usize::MAX);
    let total = pipeline.attempts(budget)?.len();
    let done = AtomicUsize::new(0);
    let kept = AtomicUsize::new(0);
    let step = (total / 20).max(1);
    let progress = |r: &ManifestRecord| {
        if r.decision.is_keep() {
            kept.fetch_add(1, Ordering::Relaxed);
        }
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if n % step == 0 || n == total {
            eprintln!("[{n}/{total}] kept {}", kept.load(Ordering::Relaxed));
        }
    };
    let manifest = pipeline.generate_with_progress(&g.out, budget, &progress)?;
    print_histogram(&manifest);
    let errors = manifest.records.iter().filter(|r| r.decision == Decision::Error).count();
    if errors > 0 {
        warn!("{errors} attempts failed; see the error field of their records");
    }
    println!("manifest: {}", g.out.join(MANIFEST_FILE).display());
    Ok(Outcome::Ok)
}

fn validate(g: &GlobalArgs, manifest: &Path) -> Result<Outcome> {
    let config = load_config(g)?;
    let report = validate_manifest(manifest, &config.search)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for v in &report.violations {
        println!("violation seed={} {}", v.seed, v.message);
    }
    println!(
        "{} records, {} kept examples checked, {} violations",
        report.records,
        report.checked,
        report.violations.len()
    );
    Ok(if report.passed() { Outcome::Ok } else { Outcome::Failed })
}

fn stats(path: &Path) -> Result<Outcome> {
    let manifest = DatasetManifest::load(path)?;
    print_histogram(&manifest);
    let kept: Vec<_> = manifest.kept().collect();
    if !kept.is_empty() {
        let mean = |f: &dyn Fn(&ManifestRecord) -> f64| kept.iter().map(|r| f(r)).sum::<f64>() / kept.len() as f64;
        let ssim = mean(&|r| r.stats.map_or(0.0, |s| s.mean_ssim));
        let alpha = mean(&|r| r.stats.map_or(0.0, |s| s.geometry.mean_alpha));
        println!("kept: mean SSIM {ssim:.4}, mean alpha {alpha:.4}");
        let mut splits = std::collections::BTreeMap::new();
        for r in &kept {
            *splits.entry(r.split.map_or("none".to_string(), |s| format!("{s:?}").to_lowercase())).or_insert(0) += 1;
        }
        for (s, n) in splits {
            println!("{s:>18} {n:>8}");
        }
    }
    Ok(Outcome::Ok)
}

fn preview(input: &Path, png: Option<&Path>, gain: f64) -> Result<Outcome> {
    let img = read_image(input).with_context(|| format!("reading {}", input.display()))?;
    let display: LinearImage = match img.color_space {
        ColorSpace::LinearSrgb => img,
        ColorSpace::Xyz => {
            let Some(white) = img.white_xy else {
                bail!("{} has no white point", input.display());
            };
            let mut out = img.transform(&xyz_to_srgb_matrix(white));
            out.color_space = ColorSpace::LinearSrgb;
            out
        }
        ColorSpace::CameraNative => bail!("camera-native rasters need a profile to preview"),
    };
    let out = png.map(Path::to_path_buf).unwrap_or_else(|| input.with_extension("png"));
    to_preview_srgb(&display.scale(gain))?.save_png(&out)?;
    println!("{}", out.display());
    Ok(Outcome::Ok)
}
