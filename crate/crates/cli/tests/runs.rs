use std::path::Path;
use std::process::Command;

use quasilines::topology::ClassifyBudget;
use quasilines_cli::config::{ClassifyStage, ScanStage};
use quasilines_cli::manifest::{stage_dir_name, MANIFEST_FILE};
use quasilines_cli::stages::{ScanProgress, PROGRESS_FILE};
use quasilines_cli::{run, CliError, RunConfig, RunManifest, RunOptions, StageConfig, StageStatus};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quasilines"))
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn bundled_regular_100_reports_its_zone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::bundled("regular-100").unwrap();
    let out = run(&cfg, dir.path(), RunOptions::default()).unwrap();
    assert_eq!(out.manifest.stages[0].status, StageStatus::Done);
    let report = read_json(
        &dir.path()
            .join(stage_dir_name(0, "classify"))
            .join("classification.json"),
    );
    assert_eq!(report["verdict"]["kind"], "regular");
    assert_eq!(report["verdict"]["m"], serde_json::json!([1, 0, 0]));
}

#[test]
fn empty_stage_list_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::bundled("regular-111").unwrap();
    cfg.stages.clear();
    let out = run(&cfg, dir.path(), RunOptions::default()).unwrap();
    assert!(out.manifest.stages.is_empty());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec![MANIFEST_FILE.to_string()]);
    assert_eq!(
        RunManifest::read(&dir.path().join(MANIFEST_FILE))
            .unwrap()
            .config,
        cfg
    );
}

#[test]
fn corrupted_config_names_the_field() {
    let text = RunConfig::bundled("chaotic")
        .unwrap()
        .to_toml()
        .replace("kind = \"classify\"", "kind = \"classify\"\nbudgit = 3");
    match RunConfig::parse(&text) {
        Err(CliError::ConfigInvalid { field, .. }) => assert!(field.contains("budgit"), "{field}"),
        other => panic!("{other:?}"),
    }
    let mut cfg = RunConfig::bundled("chaotic").unwrap();
    cfg.stages = vec![StageConfig::Classify(ClassifyStage {
        budget: ClassifyBudget {
            tol: -1.0,
            ..ClassifyBudget::scan()
        },
    })];
    match cfg.validate() {
        Err(CliError::ConfigInvalid { field, .. }) => {
            assert!(field.starts_with("stage[0]"), "{field}")
        }
        other => panic!("{other:?}"),
    }
}

fn scan_config() -> RunConfig {
    let mut cfg = RunConfig::bundled("regular-100").unwrap();
    cfg.seed = 3;
    cfg.stages = vec![StageConfig::ScanSphere(ScanStage {
        level: 0,
        budget: ClassifyBudget::scan(),
        extra: Vec::new(),
        chunk: 1,
    })];
    cfg
}

#[test]
fn interrupted_scan_resumes_to_the_same_result() {
    let cfg = scan_config();
    let sub = stage_dir_name(0, "scan-sphere");
    let whole = tempfile::tempdir().unwrap();
    run(&cfg, whole.path(), RunOptions::default()).unwrap();
    let full: ScanProgress = serde_json::from_slice(
        &std::fs::read(whole.path().join(&sub).join(PROGRESS_FILE)).unwrap(),
    )
    .unwrap();
    assert_eq!(full.completed.len(), full.total);

    // A checkpoint holding only the first direction, as left by an interrupted run.
    let resumed = tempfile::tempdir().unwrap();
    let partial = ScanProgress {
        completed: vec![0],
        records: full.records[..1].to_vec(),
        ..full.clone()
    };
    std::fs::create_dir_all(resumed.path().join(&sub)).unwrap();
    std::fs::write(
        resumed.path().join(&sub).join(PROGRESS_FILE),
        serde_json::to_vec(&partial).unwrap(),
    )
    .unwrap();
    run(&cfg, resumed.path(), RunOptions::default()).unwrap();

    for name in ["zones.json", PROGRESS_FILE] {
        assert_eq!(
            std::fs::read(whole.path().join(&sub).join(name)).unwrap(),
            std::fs::read(resumed.path().join(&sub).join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn completed_stages_are_reused() {
    let cfg = scan_config();
    let dir = tempfile::tempdir().unwrap();
    run(&cfg, dir.path(), RunOptions::default()).unwrap();
    let again = run(&cfg, dir.path(), RunOptions::default()).unwrap();
    assert_eq!(again.reused, vec![0]);
    let fresh = run(&cfg, dir.path(), RunOptions { fresh: true }).unwrap();
    assert!(fresh.reused.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");

    let status = bin()
        .args(["run", "bundled:regular-100", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let status = bin()
        .args(["run", "bundled:nope", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["run", "missing.toml", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args([
            "render",
            "--kind",
            "levelset",
            "--data",
            "missing.json",
            "--out",
        ])
        .arg(dir.path().join("x.svg"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // No point of the plane lies below the potential minimum, so sampling fails.
    let status = bin()
        .args([
            "census",
            "-p",
            "regular-100",
            "--eps=-5",
            "--particles",
            "4",
            "--steps",
            "1000",
            "--out",
        ])
        .arg(dir.path().join("census"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    // The chaotic preset classifies as undetermined.
    let status = bin()
        .args(["classify", "-p", "chaotic", "--out"])
        .arg(dir.path().join("cls"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn eval_prints_values_and_gradients() {
    let out = bin()
        .args(["eval", "-p", "regular-100", "--at", "0,0", "--at", "1.5,-2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let p = quasilines::presets::Preset::Regular100.potential();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    let (v, g) = p.value_and_gradient([1.5, -2.0]);
    assert_eq!(rows[1], vec![1.5, -2.0, v, g[0], g[1]]);
}
