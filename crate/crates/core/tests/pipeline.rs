use std::path::Path;

use refsynth::dataset::{
    validate_manifest, write_desk_corpus, Corpus, DatasetManifest, Decision, LoadedCorpus, Pipeline, PipelineConfig,
    MANIFEST_FILE,
};
use refsynth::image::{read_image, write_image};
use refsynth::search::CullReason;

fn desk_pipeline(dir: &Path, resolution: usize, seed: u64) -> Pipeline {
    let corpus = Corpus::load(write_desk_corpus(dir, 7).unwrap()).unwrap();
    let mut config = PipelineConfig::default();
    config.dataset.resolution = resolution;
    Pipeline::new(LoadedCorpus::load(&corpus).unwrap(), config, seed).unwrap()
}

#[test]
fn desk_run_histogram_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let pipeline = desk_pipeline(&dir.path().join("corpus"), 64, 42);
    let out = dir.path().join("out");
    let manifest = pipeline.generate(&out, 512).unwrap();
    for (d, n) in manifest.histogram() {
        println!("{d:>18} {n}");
    }
    let kept = manifest.kept().count();
    println!("kept {kept} of {}", manifest.records.len());
    assert!(kept > 0);
    assert!(manifest.records.iter().all(|r| r.decision != Decision::Error), "{:?}",
        manifest.records.iter().find(|r| r.decision == Decision::Error));
    assert_eq!(DatasetManifest::load(out.join(MANIFEST_FILE)).unwrap(), manifest);
    let report = validate_manifest(out.join(MANIFEST_FILE), &pipeline.config.search).unwrap();
    assert!(report.passed(), "{:?}", report.violations);
    assert_eq!(report.checked, kept);
}

#[test]
fn budget_caps_attempts() {
    let dir = tempfile::tempdir().unwrap();
    let pipeline = desk_pipeline(&dir.path().join("corpus"), 32, 1);
    assert!(pipeline.generate(&dir.path().join("zero"), 0).unwrap().records.is_empty());
    assert_eq!(pipeline.generate(&dir.path().join("some"), 20).unwrap().records.len(), 20);
    // Pairs: 4 outdoor x 4 indoor each way, 4 x 3 indoor, less the two
    // panoramas paired with each other; 8 attempts per pair.
    assert_eq!(pipeline.attempts(usize::MAX).unwrap().len(), (16 + 16 + 12) * 8);
}

#[test]
fn two_panoramas_are_a_geometry_cull() {
    let dir = tempfile::tempdir().unwrap();
    let pipeline = desk_pipeline(&dir.path().join("corpus"), 32, 3);
    let (i, j) = (
        pipeline.corpus.index_of("plaza_360").unwrap(),
        pipeline.corpus.index_of("hall_360").unwrap(),
    );
    let outcome = pipeline.run_attempt(&pipeline.attempt_for(i, j, 0, 1, 0));
    assert_eq!(outcome.decision(), Decision::Cull(CullReason::GeometryCull));
}

#[test]
fn tampered_transmission_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let pipeline = desk_pipeline(&dir.path().join("corpus"), 48, 42);
    let out = dir.path().join("out");
    let manifest = pipeline.generate(&out, 160).unwrap();
    let victim = manifest.kept().next().expect("some example is kept");
    let t_path = out.join(&victim.outputs.as_ref().unwrap().t);
    let mut t = read_image(&t_path).unwrap();
    let v = t.get(0, 3, 3);
    t.set(0, 3, 3, v + 0.25);
    write_image(&t, &t_path).unwrap();
    let report = validate_manifest(out.join(MANIFEST_FILE), &pipeline.config.search).unwrap();
    assert!(!report.passed());
    assert!(report.violations.iter().all(|v| v.seed == victim.seed));
}

#[test]
fn replay_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let pipeline = desk_pipeline(&dir.path().join("corpus"), 40, 9);
    let out = dir.path().join("out");
    let manifest = pipeline.generate(&out, 96).unwrap();
    for record in manifest.kept() {
        let outcome = pipeline.replay(record).unwrap();
        assert_eq!(outcome.decision(), record.decision);
        let ex = outcome.result.unwrap();
        let paths = record.outputs.as_ref().unwrap();
        for (img, rel) in [(&ex.m, &paths.m), (&ex.t, &paths.t), (&ex.r, &paths.r), (&ex.c, &paths.c)] {
            assert_eq!(read_image(out.join(rel)).unwrap(), *img);
        }
    }
}
