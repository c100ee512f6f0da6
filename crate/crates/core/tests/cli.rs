use std::path::Path;
use std::process::{Command, Output};

use fundus_sve::evaluate::load_report;
use fundus_sve::synthetic::{generate_dataset, SyntheticSpec};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fundus-sve"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn evaluate_perfect_scores() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("id,label");
    for c in 0..14 {
        csv.push_str(&format!(",s{c}"));
    }
    csv.push('\n');
    for (i, label) in [0, 0, 1, 1, 2, 2].iter().enumerate() {
        let mut row = format!("s{i},{label}");
        for c in 0..14 {
            row.push_str(if c == *label { ",1" } else { ",0" });
        }
        csv.push_str(&row);
        csv.push('\n');
    }
    std::fs::write(dir.path().join("scores.csv"), csv).unwrap();
    let o = run(&["evaluate", "--scores", "scores.csv", "--out", "eval"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = load_report(dir.path().join("eval/report.json")).unwrap();
    assert_eq!(report.overall_accuracy, 1.0);
    assert_eq!(report.auc.unwrap().weighted_auc, 1.0);
    assert!(dir.path().join("eval/confusion.csv").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["split", "--manifest", "nope.csv", "--out", "s"], dir.path());
    assert_eq!(missing.status.code(), Some(3), "{}", stderr(&missing));
    assert!(stderr(&missing).starts_with("error: input error"));

    let unknown = run(&["split", "--bogus"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));

    let ratios = run(&["split", "--manifest", "m.csv", "--out", "s", "--ratios", "0.5,0.5,0.5"], dir.path());
    assert_eq!(ratios.status.code(), Some(2), "{}", stderr(&ratios));

    std::fs::write(dir.path().join("cfg.json"), r#"{"colour": 3}"#).unwrap();
    let cfg = run(&["pipeline", "--config", "cfg.json"], dir.path());
    assert_eq!(cfg.status.code(), Some(2), "{}", stderr(&cfg));
}

#[test]
fn dry_run_warns_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    generate_dataset(&dir.path().join("data"), &SyntheticSpec::three_class([4, 4, 4], 1)).unwrap();
    let o = run(
        &[
            "pipeline",
            "--manifest",
            "data/manifest.csv",
            "--out",
            "run",
            "--strategy",
            "vessel-only",
            "--weight",
            "0.3",
            "--dry-run",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("weight"), "{}", stderr(&o));
    let plan = String::from_utf8_lossy(&o.stdout);
    assert_eq!(plan.lines().filter(|l| l.starts_with("would run")).count(), 7, "{plan}");
    assert!(!dir.path().join("run").exists());
}

#[test]
fn pipeline_runs_then_reuses_results() {
    let dir = tempfile::tempdir().unwrap();
    generate_dataset(&dir.path().join("data"), &SyntheticSpec::three_class([10, 8, 6], 2)).unwrap();
    let args = ["pipeline", "--manifest", "data/manifest.csv", "--out", "run", "--seed", "5", "-v"];
    let first = run(&args, dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    let report_path = dir.path().join("run/07_evaluate/report.json");
    let report = std::fs::read(&report_path).unwrap();
    for stage in ["01_split", "02_enhance", "03_augment", "04_features", "07_evaluate"] {
        assert!(dir.path().join("run").join(stage).join("log.json").is_file(), "{stage}");
    }

    let second = run(&args, dir.path());
    assert!(second.status.success());
    assert_eq!(stderr(&second).matches("reused up-to-date results").count(), 7, "{}", stderr(&second));
    assert_eq!(std::fs::read(&report_path).unwrap(), report);

    let forced = run(&[&args[..], &["--force"]].concat(), dir.path());
    assert!(forced.status.success());
    assert!(!stderr(&forced).contains("reused"));
    assert_eq!(std::fs::read(&report_path).unwrap(), report);
}
