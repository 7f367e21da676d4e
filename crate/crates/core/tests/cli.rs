use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dcadl::persistence::load_model;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcadl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

fn kv(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    data: PathBuf,
    config: PathBuf,
}

/// 16×16 stripes, 20 per class, and a config that trains quickly on them.
fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let data = root.join("stripes");
    ok(&["gen-synth", "--out", s(&data), "--per-class", "20", "--seed", "3"]);
    let config = root.join("run.cfg");
    fs::write(
        &config,
        format!(
            "# small stripe run\ndataset = {}\nm = 8\natom_rows = 4\natom_cols = 4\nstride = 4\n\
             max_iter = 10\nsplit = per-class:10\nseed = 1\n",
            data.display()
        ),
    )
    .unwrap();
    Fixture {
        _dir: dir,
        root,
        data,
        config,
    }
}

#[test]
fn train_eval_predict_roundtrip() {
    let f = fixture();
    let model = f.root.join("m.dcadl");
    let trace = f.root.join("trace.csv");
    let out = ok(&[
        "train",
        "--config",
        s(&f.config),
        "--out",
        s(&model),
        "--trace",
        s(&trace),
        "--machine-readable",
    ]);
    let r = kv(&out);
    assert_eq!(r["train_samples"], "20");
    assert_eq!(r["test_samples"], "20");
    let iters: usize = r["iterations"].parse().unwrap();
    assert!(iters <= 10);
    let csv = fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().count(), iters + 2);
    assert!(csv.starts_with("iteration,objective\n"));
    assert!(load_model(&model).is_ok());

    let eval = |extra: &[&str]| {
        let mut args = vec!["eval", "--config", s(&f.config), "--model", s(&model), "--machine-readable"];
        args.extend_from_slice(extra);
        kv(&ok(&args))
    };
    let e = eval(&["--on", "train"]);
    assert_eq!(e["accuracy"], "1.0000");
    assert_eq!(e["samples"], "20");
    let e1 = eval(&[]);
    let e2 = eval(&[]);
    for key in ["accuracy", "samples", "correct", "on"] {
        assert_eq!(e1[key], e2[key]);
    }
    assert_eq!(e1["on"], "test");
    assert!(e1["mean_time_per_sample_s"].contains('e'));
    assert_eq!(eval(&["--on", "all"])["samples"], "40");

    let human = ok(&["eval", "--config", s(&f.config), "--model", s(&model)]);
    assert!(human.contains("accuracy"));

    let img = fs::read_dir(f.data.join("vertical")).unwrap().next().unwrap().unwrap().path();
    let p = ok(&["predict", "--model", s(&model), s(&img)]);
    assert_eq!(p.trim(), "vertical");
    let pm = kv(&ok(&["predict", "--model", s(&model), s(&img), "--machine-readable"]));
    assert_eq!(pm["class"], "vertical");
    assert!(pm.contains_key("scores.1.score"));
}

#[test]
fn training_is_deterministic_and_zero_iterations_saves_initial_model() {
    let f = fixture();
    let (a, b) = (f.root.join("a.dcadl"), f.root.join("b.dcadl"));
    ok(&["train", "--config", s(&f.config), "--out", s(&a)]);
    ok(&["train", "--config", s(&f.config), "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let z = f.root.join("z.dcadl");
    let r = kv(&ok(&[
        "train",
        "--config",
        s(&f.config),
        "--max-iter",
        "0",
        "--out",
        s(&z),
        "--machine-readable",
    ]));
    assert_eq!(r["iterations"], "0");
    assert!(r.contains_key("objective_trace.0.objective"));
    assert!(!r.contains_key("objective_trace.1.objective"));
    let m = load_model(&z).unwrap();
    assert!(m.classifier.w().as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn exit_codes() {
    let f = fixture();
    // configuration errors
    let o = run(&["train", "--config", s(&f.config), "--lambda3", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("lambda3"));
    let o = run(&["train", "--config", s(&f.config), "--lambda1", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["train", "--m", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dataset"));
    let o = run(&["train", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bench", "--config", s(&f.config), "--repetitions", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    // data errors
    let o = run(&["train", "--config", s(&f.config), "--dataset", s(&f.root.join("missing"))]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run(&["train", "--config", s(&f.config), "--atom-rows", "20"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let junk = f.root.join("junk.dcadl");
    fs::write(&junk, b"not a model at all").unwrap();
    let o = run(&["eval", "--config", s(&f.config), "--model", s(&junk)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not a model file"));
}

#[test]
fn eval_rejects_incompatible_geometry() {
    let f = fixture();
    let model = f.root.join("m.dcadl");
    ok(&["train", "--config", s(&f.config), "--out", s(&model)]);
    let other = f.root.join("big");
    ok(&["gen-synth", "--out", s(&other), "--rows", "20", "--cols", "20", "--per-class", "4"]);
    let o = run(&["eval", "--model", s(&model), "--dataset", s(&other), "--on", "all"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("20x20"), "{}", stderr(&o));
}

#[test]
fn gridsearch_enumerates_cells() {
    let f = fixture();
    let base = ["gridsearch", "--config", s(&f.config), "--folds", "2", "--machine-readable"];
    let mut args = base.to_vec();
    args.extend_from_slice(&["--lambda1", "0.001,0.01"]);
    let r = kv(&ok(&args));
    assert_eq!(r["cells"], "2");
    assert!(r.contains_key("grid.1.accuracy"));
    assert!(!r.contains_key("grid.2.accuracy"));
    // separable data: both cells tie at 1.0 and the first wins
    assert_eq!(r["best_cell"], "0");
    assert_eq!(r["best_lambda1"], "0.001");
    assert_eq!(kv(&ok(&args)), r);

    let single = kv(&ok(&base));
    assert_eq!(single["cells"], "1");
    assert_eq!(single["best_accuracy"], single["grid.0.accuracy"]);

    let mut big = base.to_vec();
    big.extend_from_slice(&["--lambda2", "1,2,3", "--rho", "0.1,0.2", "--grid-cap", "5"]);
    let o = run(&big);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("6 cells"), "{}", stderr(&o));
}

#[test]
fn bench_reports_min_mean_max() {
    let f = fixture();
    let out = ok(&["bench", "--config", s(&f.config), "--max-iter", "3", "--machine-readable"]);
    let r = kv(&out);
    assert_eq!(r["repetitions"], "3");
    for key in ["train_time", "test_time"] {
        let min: f64 = r[&format!("{key}_min_s")].parse().unwrap();
        let mean: f64 = r[&format!("{key}_mean_s")].parse().unwrap();
        let max: f64 = r[&format!("{key}_max_s")].parse().unwrap();
        assert!(min <= mean && mean <= max, "{key}: {min} {mean} {max}");
    }
    assert!(r.contains_key("runs.2.train_time_s"));
    assert!(r["test_time_mean_s"].contains("e-"));
}

#[test]
fn feature_mode_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let feats = dir.path().join("feats.bin");
    let g = kv(&ok(&[
        "gen-synth",
        "--kind",
        "templates",
        "--format",
        "feature",
        "--rows",
        "12",
        "--cols",
        "1",
        "--classes",
        "3",
        "--per-class",
        "8",
        "--out",
        s(&feats),
        "--machine-readable",
    ]));
    assert_eq!(g["samples"], "24");
    let model = dir.path().join("f.dcadl");
    let r = kv(&ok(&[
        "train",
        "--dataset",
        s(&feats),
        "--mode",
        "feature",
        "--atom-rows",
        "6",
        "--stride",
        "6",
        "--m",
        "5",
        "--max-iter",
        "5",
        "--split",
        "per-class:4",
        "--out",
        s(&model),
        "--machine-readable",
    ]));
    assert_eq!(r["patches"], "2");
    let p = ok(&["predict", "--model", s(&model), s(&feats), "--index", "23"]);
    assert!(p.trim().starts_with("class00"));
    let o = run(&["predict", "--model", s(&model), s(&feats), "--index", "24"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn preset_flag_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("faces");
    ok(&[
        "gen-synth",
        "--kind",
        "templates",
        "--rows",
        "48",
        "--cols",
        "42",
        "--per-class",
        "4",
        "--out",
        s(&data),
    ]);
    let r = kv(&ok(&[
        "train",
        "--preset",
        "yaleb",
        "--dataset",
        s(&data),
        "--max-iter",
        "2",
        "--out",
        s(&dir.path().join("y.dcadl")),
        "--machine-readable",
    ]));
    assert_eq!(r["atoms"], "50");
    assert_eq!(r["patches"], "42");
    assert_eq!(r["train_samples"], "4");
}
