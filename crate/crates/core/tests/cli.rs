use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use branchfinder::cli::{RunConfig, SEED_ENV};
use branchfinder::extraction::{assign_samples, BranchModel, ExtractionResult};
use branchfinder::network::{init_model, NetworkConfig, TargetScaler};
use branchfinder::synthdata::{phi1_1d, read_csv, write_csv, Dataset, Sample};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_branchfinder"));
    c.env_remove(SEED_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(o: Output) -> String {
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    stdout(&o)
}

fn write_config(dir: &Path, name: &str, value: Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path
}

fn small_config(dir: &Path, out: &str) -> PathBuf {
    write_config(
        dir,
        &format!("{out}.json"),
        json!({
            "mix": {"n_samples": 300},
            "network": {"hidden_layers": [8]},
            "training": {"epochs": 15, "batch_size": 32},
            "extraction": {"min_branch_size": 20},
            "output_dir": dir.join(out),
        }),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn gen_splits_eighty_twenty() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("g");
    let line = ok(run(&["gen", "--output_dir", s(&out)]));
    assert_eq!(line.trim(), "n_train=4000 n_test=1000");
    assert_eq!(data_rows(&out.join("train.csv")), 4000);
    assert_eq!(data_rows(&out.join("test.csv")), 1000);
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("gen_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seeds"]["mix"], 42);
    assert_eq!(meta["config"]["mix"]["fraction_branch1"], 0.6);
}

#[test]
fn gen_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "a");
    ok(run(&["gen", "--config", s(&cfg)]));
    let first: Vec<Vec<u8>> = ["train.csv", "test.csv", "gen_meta.json"]
        .iter()
        .map(|f| fs::read(tmp.path().join("a").join(f)).unwrap())
        .collect();
    ok(run(&["gen", "--config", s(&cfg)]));
    for (f, bytes) in ["train.csv", "test.csv", "gen_meta.json"].iter().zip(first) {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn noiseless_single_branch_rows_round_trip() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("pure");
    ok(run(&[
        "gen",
        "--output_dir",
        s(&out),
        "--mix.fraction_branch1",
        "1.0",
        "--mix.noise_sigma",
        "0",
        "--mix.n_samples",
        "500",
    ]));
    for f in ["train.csv", "test.csv"] {
        let data = read_csv(fs::read_to_string(out.join(f)).unwrap().as_bytes()).unwrap();
        for sample in data.samples() {
            assert_eq!(sample.y, phi1_1d(sample.x[0]).unwrap());
            assert_eq!(sample.true_branch, Some(1));
        }
    }
}

#[test]
fn env_seed_overrides_config_seeds() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("env");
    let b = tmp.path().join("flag");
    let o = bin()
        .env(SEED_ENV, "5")
        .args(["gen", "--output_dir", s(&a), "--mix.n_samples", "200", "--mix.seed", "1"])
        .output()
        .unwrap();
    ok(o);
    ok(run(&[
        "gen",
        "--output_dir",
        s(&b),
        "--mix.n_samples",
        "200",
        "--mix.seed",
        "5",
        "--split_seed",
        "5",
        "--network.seed",
        "5",
        "--training.seed",
        "5",
    ]));
    assert_eq!(fs::read(a.join("train.csv")).unwrap(), fs::read(b.join("train.csv")).unwrap());
}

#[test]
fn print_config_round_trips() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "p");
    let printed = ok(run(&["print-config", "--config", s(&cfg), "--mix.fraction_branch1", "0.75"]));
    let parsed: RunConfig = serde_json::from_str(&printed).unwrap();
    assert_eq!(parsed.mix.fraction_branch1, 0.75);
    assert_eq!(parsed.mix.n_samples, 300);
    let echoed = tmp.path().join("echo.json");
    fs::write(&echoed, &printed).unwrap();
    let again = ok(run(&["print-config", "--config", s(&echoed)]));
    assert_eq!(again, printed);
}

#[test]
fn invalid_config_names_the_field() {
    let o = run(&["gen", "--mix.fraction_branch1", "1.5"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error_kind=invalid_config"), "{err}");
    assert!(err.contains("mix.fraction_branch1"), "{err}");

    let o = run(&["print-config", "--mix.no_such_key", "1"]);
    assert!(stderr(&o).starts_with("error_kind=invalid_config"));
    assert!(stderr(&o).contains("mix.no_such_key"));
}

#[test]
fn unwritable_output_dir_reports_path() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let o = run(&["gen", "--output_dir", s(&target), "--mix.n_samples", "50"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error_kind=io"), "{err}");
    assert!(err.contains(s(&target)), "{err}");
}

#[test]
fn usage_errors_and_help() {
    let o = run(&["frobnicate"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error_kind=usage"));
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("compare-losses"));
}

#[test]
fn malformed_csv_reports_line() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("bad.csv");
    fs::write(&csv, "x1,y,branch\n0.5,1.0,1\n0.25,oops,2\n").unwrap();
    let o = run(&["train", "--data", s(&csv), "--output_dir", s(&tmp.path().join("t"))]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error_kind=parse"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn train_writes_model_and_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "tr");
    ok(run(&["gen", "--config", s(&cfg)]));
    let dir = tmp.path().join("tr");
    let line = ok(run(&["train", "--config", s(&cfg), "--data", s(&dir.join("train.csv"))]));
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields.len(), 2);
    let train_loss: f64 = fields[0].strip_prefix("final_train_loss=").unwrap().parse().unwrap();
    let test_loss: f64 = fields[1].strip_prefix("final_test_loss=").unwrap().parse().unwrap();
    assert!(train_loss.is_finite() && test_loss.is_finite());

    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("train_report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["epoch_losses"].as_array().unwrap().len(), 15);
    assert_eq!(report["loss"]["kind"], "logcosh");
    let model = fs::read_to_string(dir.join("model.json")).unwrap();
    branchfinder::network::NetworkModel::from_json(&model).unwrap();

    let first = fs::read(dir.join("model.json")).unwrap();
    ok(run(&["train", "--config", s(&cfg), "--data", s(&dir.join("train.csv"))]));
    assert_eq!(fs::read(dir.join("model.json")).unwrap(), first);
}

#[test]
fn loss_flags_select_the_loss() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "lf");
    ok(run(&["gen", "--config", s(&cfg)]));
    let dir = tmp.path().join("lf");
    let data = dir.join("train.csv");
    for (args, kind) in [
        (vec!["--loss", "mse"], "mse"),
        (vec!["--loss", "mae"], "mae"),
        (vec!["--loss", "logcosh"], "logcosh"),
        (vec!["--loss", "huber", "--huber-delta", "0.25"], "huber"),
    ] {
        let mut all = vec!["train", "--config", s(&cfg), "--data", s(&data)];
        all.extend(args);
        ok(run(&all));
        let report: Value =
            serde_json::from_str(&fs::read_to_string(dir.join("train_report.json")).unwrap()).unwrap();
        assert_eq!(report["loss"]["kind"], kind);
        if kind == "huber" {
            assert_eq!(report["loss"]["delta"], 0.25);
        }
    }
    let o = run(&["train", "--config", s(&cfg), "--data", s(&data), "--loss", "mse", "--huber-delta", "1"]);
    assert!(stderr(&o).starts_with("error_kind=usage"));
}

#[test]
fn extract_single_branch_fixture() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "one.json",
        json!({
            "mix": {"n_samples": 600, "fraction_branch1": 1.0},
            "network": {"hidden_layers": [16, 16]},
            "training": {"epochs": 400},
            "output_dir": tmp.path().join("one"),
        }),
    );
    ok(run(&["gen", "--config", s(&cfg)]));
    let dir = tmp.path().join("one");
    let line = ok(run(&["extract", "--config", s(&cfg), "--data", s(&dir.join("train.csv"))]));
    assert!(line.starts_with("branches=1 "), "{line}");
    assert!(dir.join("branch_1_model.json").is_file());
    assert!(!dir.join("branch_2_model.json").exists());
    let csv = fs::read_to_string(dir.join("assignments.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("index,primary_branch,ambiguous"));
    assert_eq!(csv.lines().count(), 481);

    let before = fs::read(dir.join("extraction.json")).unwrap();
    ok(run(&["extract", "--config", s(&cfg), "--data", s(&dir.join("train.csv"))]));
    assert_eq!(fs::read(dir.join("extraction.json")).unwrap(), before);

    let acc = ok(run(&[
        "eval",
        "--config",
        s(&cfg),
        "--extraction",
        s(&dir.join("extraction.json")),
        "--data",
        s(&dir.join("test.csv")),
    ]));
    let acc: f64 = acc.trim().strip_prefix("accuracy=").unwrap().parse().unwrap();
    assert!(acc > 0.9, "{acc}");
    let row = fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert_eq!(row.lines().count(), 2);
}

/// A network whose output is the constant `c` in raw units.
fn constant_branch(index: usize, c: f64, tau: f64) -> BranchModel {
    let mut model = init_model(&NetworkConfig {
        hidden_layers: vec![2],
        ..NetworkConfig::default()
    })
    .unwrap();
    let n = model.parameters().len();
    let mut params = vec![0.0; n];
    params[n - 1] = c;
    model.set_parameters(&params).unwrap();
    assert_eq!(model.target_scaler(), TargetScaler::identity());
    BranchModel {
        index,
        model,
        tau,
        member_indices: vec![0],
    }
}

/// Two constant branches at 300 and 100 and samples labelled by which one generated them.
fn stub_files(dir: &Path, swap_labels: bool) -> (PathBuf, PathBuf) {
    let branches = vec![constant_branch(1, 300.0, 5.0), constant_branch(2, 100.0, 5.0)];
    let samples: Vec<Sample> = (0..200)
        .map(|i| {
            let x = -3.5 + 7.0 * i as f64 / 199.0;
            let first = i % 3 != 0;
            let y = if first { 300.0 } else { 100.0 } + ((i % 7) as f64 - 3.0) * 0.5;
            let label = if first != swap_labels { 1 } else { 2 };
            Sample {
                x: vec![x],
                y,
                true_branch: Some(label),
            }
        })
        .collect();
    let data = Dataset::new(samples, 1).unwrap();
    let result = ExtractionResult {
        assignments: assign_samples(&branches, &data).unwrap(),
        branches,
        leftover_indices: vec![],
    };
    let ex = dir.join("extraction.json");
    fs::write(&ex, result.to_json()).unwrap();
    let csv = dir.join("data.csv");
    let mut buf = Vec::new();
    write_csv(&data, &mut buf).unwrap();
    fs::write(&csv, buf).unwrap();
    (ex, csv)
}

#[test]
fn eval_scores_oracle_and_permuted_stubs() {
    for swap in [false, true] {
        let tmp = TempDir::new().unwrap();
        let (ex, csv) = stub_files(tmp.path(), swap);
        let out = tmp.path().join("m");
        let line = ok(run(&["eval", "--extraction", s(&ex), "--data", s(&csv), "--output_dir", s(&out)]));
        assert_eq!(line.trim(), "accuracy=1.0000000000000000e0");
        let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
        let mapping = &doc["confusion"]["mapping"];
        if swap {
            assert_eq!(mapping, &json!([2, 1]));
        } else {
            assert_eq!(mapping, &json!([1, 2]));
        }
        assert_eq!(doc["n_branches"], 2);
    }
}

#[test]
fn eval_without_labels_fails() {
    let tmp = TempDir::new().unwrap();
    let (ex, csv) = stub_files(tmp.path(), false);
    let text = fs::read_to_string(&csv).unwrap();
    let unlabelled: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                let (head, _) = l.rsplit_once(',').unwrap();
                format!("{head},NA\n")
            }
        })
        .collect();
    fs::write(&csv, unlabelled).unwrap();
    let o = run(&["eval", "--extraction", s(&ex), "--data", s(&csv), "--output_dir", s(&tmp.path().join("m"))]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error_kind=invalid_input"), "{err}");
    assert!(err.contains("label"), "{err}");
}

#[test]
fn compare_losses_table_and_curves() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "cmp");
    let out = ok(run(&["compare-losses", "--config", s(&cfg), "--emit_plot_data", "true"]));
    assert_eq!(out.lines().count(), 3);
    let dir = tmp.path().join("cmp");
    let table = fs::read_to_string(dir.join("loss_comparison.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "loss,adherence_fraction,betweenness,oscillation_index");
    assert_eq!(lines.len(), 4);
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["mse", "mae", "logcosh"]);
    for name in names {
        let curve = fs::read_to_string(dir.join(format!("curve_{name}.csv"))).unwrap();
        assert_eq!(curve.lines().next(), Some("x1,y_pred,phi1,phi2"));
        assert_eq!(curve.lines().count(), 762);
    }
    let before = fs::read(dir.join("loss_comparison.csv")).unwrap();
    ok(run(&["compare-losses", "--config", s(&cfg)]));
    assert_eq!(fs::read(dir.join("loss_comparison.csv")).unwrap(), before);
}

#[test]
fn two_dimensional_pipeline_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "twod.json",
        json!({
            "problem": "2d",
            "mix": {"n_samples": 300},
            "network": {"input_dim": 2, "hidden_layers": [6]},
            "training": {"epochs": 5},
            "extraction": {"min_branch_size": 20},
            "output_dir": tmp.path().join("twod"),
            "emit_plot_data": true,
        }),
    );
    ok(run(&["gen", "--config", s(&cfg)]));
    let dir = tmp.path().join("twod");
    assert!(fs::read_to_string(dir.join("train.csv")).unwrap().starts_with("x1,x2,y,branch\n"));
    let out = ok(run(&["compare-losses", "--config", s(&cfg)]));
    assert!(out.lines().all(|l| l.ends_with("oscillation_index=NA")));
    let curve = fs::read_to_string(dir.join("curve_mse.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some("x1,x2,y_pred,phi1,phi2"));
}
