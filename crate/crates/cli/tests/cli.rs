use std::fs;
use std::path::{Path, PathBuf};

use lola::simgen::{dictionary_design, DictLabel, DictionarySpec, SchauderProfile};
use lola_cli::config::{preset, Experiment, RunConfig};
use lola_cli::data::read_table;
use lola_cli::{execute, load_config, main_with};
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("lola").chain(args.iter().copied()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn numbers(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) => out.push(n.as_f64().unwrap()),
        Value::Array(a) => a.iter().for_each(|x| numbers(x, out)),
        Value::Object(o) => o.values().for_each(|x| numbers(x, out)),
        _ => {}
    }
}

/// Every numeric cell of every table also appears in report.json.
fn tables_are_in_report(dir: &Path) {
    let mut nums = Vec::new();
    numbers(&report(dir), &mut nums);
    for entry in fs::read_dir(dir.join("tables")).unwrap() {
        let path = entry.unwrap().path();
        let t = read_table_lenient(&path);
        for cell in t {
            if let Ok(v) = cell.parse::<f64>() {
                assert!(
                    nums.iter().any(|&n| n == v || (v.is_nan() && n.is_nan())),
                    "{} value {cell} missing from report.json",
                    path.display()
                );
            }
        }
    }
}

fn read_table_lenient(path: &Path) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .flat_map(|r| r.unwrap().iter().map(str::to_string).collect::<Vec<_>>())
        .collect()
}

fn small_exp1(seed: u64) -> RunConfig {
    let mut c = preset("exp1", seed).unwrap();
    if let RunConfig::Simulate(s) = &mut c {
        s.reps = 3;
        if let Experiment::Sparse { scenario } = &mut s.experiment {
            scenario.n = 100;
            scenario.p = 300;
            scenario.support_size = 4;
        }
    }
    c
}

#[test]
fn simulate_bundle_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = execute(&small_exp1(5), dir.path()).unwrap();
    for f in ["report.json", "log.txt", "tables/table1.csv", "tables/runs.csv", "plotdata/screening.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let r = report(&out);
    assert_eq!(r["version"], lola::VERSION);
    assert_eq!(r["config"]["subcommand"], "simulate");
    assert_eq!(r["runs"].as_array().unwrap().len(), 3);
    tables_are_in_report(&out);
}

#[test]
fn report_is_independent_of_output_dir_and_replays() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    execute(&small_exp1(9), a.path()).unwrap();
    let replay = load_config(&a.path().join("report.json")).unwrap();
    assert_eq!(replay, small_exp1(9));
    execute(&replay, b.path()).unwrap();
    assert_eq!(
        fs::read(a.path().join("report.json")).unwrap(),
        fs::read(b.path().join("report.json")).unwrap()
    );
}

#[test]
fn dictionary_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let code = run(&[
        "dict", "--n", "64", "--n-cos", "10", "--n-sin", "5", "--n-box", "6", "--j-max", "4", "--seed", "3",
        "--out", path_str(&out),
    ]);
    assert_eq!(code, 0);
    let spec = DictionarySpec {
        n: 64,
        n_cos: 10,
        n_sin: 5,
        n_box: 6,
        j_max: 4,
        seed: 3,
        profile: SchauderProfile::Tent,
    };
    let expected = dictionary_design(&spec).unwrap();
    let table = read_table(&out.join("dictionary.csv")).unwrap();
    let rows: Vec<usize> = (0..64).collect();
    assert_eq!(table.matrix(&table.headers, &rows).unwrap(), expected.z);

    let json: Value = serde_json::from_str(&fs::read_to_string(out.join("dictionary.json")).unwrap()).unwrap();
    let labels: Vec<DictLabel> = serde_json::from_value(json["labels"].clone()).unwrap();
    assert_eq!(labels, expected.labels);
    let headers: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    assert_eq!(headers, table.headers);
}

#[test]
fn shipped_iv_demo_recovers_alpha2() {
    let dir = tempfile::tempdir().unwrap();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/iv_demo.csv");
    let code = run(&["iv", "--data", path_str(&data), "--k", "200", "--seed", "0", "--out", path_str(dir.path())]);
    assert_eq!(code, 0);
    let r = report(dir.path());
    let mean = r["controlled"]["alpha2_hat"]["mean"].as_f64().unwrap();
    assert!((-0.25..=-0.15).contains(&mean), "mean alpha2 {mean}");
    assert_eq!(r["rows_used"], 150);
    tables_are_in_report(dir.path());
}

#[test]
fn select_drops_incomplete_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("y,a,b,c,d\n");
    let mut s = 1u64;
    let mut u = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for i in 0..60 {
        let (a, b, c, d) = (u(), u(), u(), u());
        let y = 3.0 * a - 3.0 * c + 0.01 * u();
        if i == 7 {
            text.push_str(&format!("{y},{a},,{c},{d}\n"));
        } else {
            text.push_str(&format!("{y},{a},{b},{c},{d}\n"));
        }
    }
    let csv = dir.path().join("in.csv");
    fs::write(&csv, text).unwrap();
    let out = dir.path().join("o");
    assert_eq!(run(&["select", path_str(&csv), "--target", "y", "--seed", "1", "--out", path_str(&out)]), 0);
    let r = report(&out);
    assert_eq!(r["rows_dropped"], 1);
    assert_eq!(r["rows_used"], 59);
    let selected: Vec<&str> = r["runs"][0]["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(!selected.is_empty() && selected.iter().all(|c| ["a", "c"].contains(c)), "{selected:?}");
    tables_are_in_report(&out);
}

#[test]
fn housing_and_iv_tables_match_report() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h");
    assert_eq!(
        run(&[
            "simulate", "--preset", "boston-style", "--reps", "2", "--per-dist", "20", "--seed", "4", "--out",
            path_str(&h),
        ]),
        0
    );
    tables_are_in_report(&h);
    let iv = dir.path().join("iv");
    assert_eq!(run(&["iv", "--k", "10", "--seed", "2", "--out", path_str(&iv)]), 0);
    tables_are_in_report(&iv);
    let d = dir.path().join("ivd");
    assert_eq!(
        run(&["iv", "--k", "10", "--seed", "2", "--dictionary", "--n-cos", "20", "--n-sin", "20", "--n-box", "10", "--j-max", "3", "--out", path_str(&d)]),
        0
    );
    let r = report(&d);
    assert!(r["instrument_labels"][0].as_str().unwrap().starts_with("cos_"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path()).to_string();
    assert_eq!(run(&["simulate", "--preset", "nope", "--seed", "0", "--out", &out]), 2);
    assert_eq!(run(&["simulate", "--selector", "lasso", "--reps", "1", "--seed", "0", "--out", &out]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["run", "/nonexistent/config.json", "--out", &out]), 3);
    assert_eq!(run(&["select", "/nonexistent/data.csv", "--target", "y", "--seed", "0", "--out", &out]), 3);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "y,x\n1,2\n3,oops\n").unwrap();
    assert_eq!(run(&["select", path_str(&bad), "--target", "y", "--seed", "0", "--out", &out]), 4);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\"subcommand\": \"simulate\"}").unwrap();
    assert_eq!(run(&["run", path_str(&cfg), "--out", &out]), 2);
    let bad_dict = ["dict", "--n", "8", "--n-cos", "20", "--seed", "0", "--out", &out];
    assert_eq!(run(&bad_dict), 2);
}

#[test]
fn dry_run_prints_config_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    assert_eq!(run(&["simulate", "--preset", "exp2", "--seed", "1", "--dry-run", "--out", path_str(&out)]), 0);
    assert!(!out.exists());
}
