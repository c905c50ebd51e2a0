use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coinseer(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coinseer"))
        .args(args)
        .current_dir(cwd)
        .env_remove("COINSEER_SEED")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a 120-day synthetic archive set plus a config naming it twice,
/// as `alpha` and `beta`.
fn two_coin_config(dir: &Path) -> String {
    let out = coinseer(&["synth", "--seed", "4", "--days", "120", "--out", "data"], dir);
    assert!(out.status.success(), "{}", stderr(&out));
    let single: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("data/config.json")).unwrap()).unwrap();
    let coin = single["coins"][0].clone();
    let mut a = coin.clone();
    a["name"] = "alpha".into();
    let mut b = coin;
    b["name"] = "beta".into();
    let cfg = serde_json::json!({ "coins": [a, b] });
    fs::write(dir.join("data/two.json"), cfg.to_string()).unwrap();
    "data/two.json".into()
}

#[test]
fn zero_window_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = coinseer(&["ablate", "--synthetic", "--k", "0", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = coinseer(&["train", "--synthetic", "--k", "0", "--out", "m.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_archive_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"coins":[{"name":"x","price_csv":"nope.csv"}]}"#).unwrap();
    let out = coinseer(&["signals", "--config", "c.json", "--out", "s"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("archive not found"), "{}", stderr(&out));
}

#[test]
fn data_source_is_required() {
    let dir = tempfile::tempdir().unwrap();
    let out = coinseer(&["signals", "--out", "s"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn popularity_signal_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = coinseer(&["signals", "--synthetic", "--days", "90", "--signals", "GH_Pop", "--out", "s"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("s/signals_synthcoin_gh_pop.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("date,gh_watch,gh_fork"));
    assert_eq!(csv.lines().count(), 91);
}

#[test]
fn correlate_writes_one_table_per_coin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = two_coin_config(dir.path());
    let out = coinseer(&["correlate", "--config", &cfg, "--signals", "R_Vol,GH_Pop", "--out", "c"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(dir.path().join("c"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("correlation_"))
        .collect();
    names.sort();
    assert_eq!(names, ["correlation_alpha.csv", "correlation_beta.csv"]);
    let a = fs::read(dir.path().join("c/correlation_alpha.csv")).unwrap();
    let b = fs::read(dir.path().join("c/correlation_beta.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ingest_round_trips_archives() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = two_coin_config(dir.path());
    let out = coinseer(&["ingest", "--config", &cfg, "--out", "i"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["price_alpha.csv", "reddit_beta.ndjson", "github_alpha.ndjson", "manifest.json"] {
        assert!(dir.path().join("i").join(name).is_file(), "missing {name}");
    }
    let original = fs::read_to_string(dir.path().join("data/price.csv")).unwrap();
    let cleaned = fs::read_to_string(dir.path().join("i/price_alpha.csv")).unwrap();
    assert_eq!(original, cleaned);
}

#[test]
fn report_rejects_empty_results() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("results.json"), "[]").unwrap();
    let out = coinseer(&["report", "--results", "results.json", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forecast_needs_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = coinseer(&["forecast", "--synthetic", "--model", "absent.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_then_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let train = [
        "train", "--synthetic", "--days", "150", "--seed", "2", "--k", "2", "--j", "3", "--signals", "R_Lang",
        "--sizes", "6,6", "--epochs", "3", "--vocab-size", "20", "--out", "m.bin",
    ];
    let out = coinseer(&train, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("m.bin.manifest.json").is_file());
    let out = coinseer(
        &["forecast", "--synthetic", "--days", "150", "--seed", "2", "--model", "m.bin"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("date,pred_usd"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 150 days from 2015-11-01 end on 2016-03-29; the forecast lands j=3 days later.
    assert_eq!(row[0], "2016-04-01");
    assert!(row[1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn ablate_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let o = coinseer(
            &[
                "ablate", "--synthetic", "--days", "150", "--seed", "3", "--k", "1,2", "--j", "1", "--signals",
                "R_Vol", "--sizes", "4", "--epochs", "2", "--out", out,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run("a");
    run("b");
    for name in ["ranking.csv", "metrics.csv", "results.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let ranking = fs::read_to_string(dir.path().join("a/ranking.csv")).unwrap();
    assert!(ranking.contains("LSTM(k=2),$+R_Vol"), "{ranking}");
    let out = coinseer(&["report", "--results", "a/results.json", "--out", "c"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read(dir.path().join("a/ranking.csv")).unwrap(),
        fs::read(dir.path().join("c/ranking.csv")).unwrap()
    );
}
