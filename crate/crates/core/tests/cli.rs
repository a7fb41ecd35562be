use std::process::{Command, Output};

use serde_json::Value;
use stratdisc::cli::format::fmt_sig12;
use stratdisc::cli::ODD_N_MARKER;
use stratdisc::partition::GeneratingSet;

fn run(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stratdisc"));
    cmd.args(args).env_remove("STRATDISC_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn table_is_deterministic_and_well_formed() {
    let args = ["table", "--n", "2,4,7", "--m-nodes", "5000"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,exact,qmc,asymptotic,random,vertical");
    assert_eq!(lines.len(), 4);
    let row7: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row7[0], "7");
    assert_eq!(row7[1], ODD_N_MARKER);
    assert!(row7[2..].iter().all(|v| v.parse::<f64>().is_ok()));
    assert!(String::from_utf8_lossy(&a.stderr).contains("even N only"));
}

#[test]
fn csv_round_trips_at_twelve_digits() {
    let out = run(&["table", "--n", "4,6,128", "--m-nodes", "3000"]);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let mut count = 0;
    for record in reader.records() {
        for field in record.unwrap().iter().skip(1) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(fmt_sig12(v), field);
            count += 1;
        }
    }
    assert_eq!(count, 15);
}

#[test]
fn json_table_matches_csv() {
    let csv_out = stdout(&run(&["table", "--n", "4", "--m-nodes", "2000"]));
    let json_out = stdout(&run(&[
        "table",
        "--n",
        "4",
        "--m-nodes",
        "2000",
        "--format",
        "json",
    ]));
    let v: Value = serde_json::from_str(&json_out).unwrap();
    let row = &v["rows"][0];
    let fields: Vec<f64> = csv_out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    for (i, key) in ["exact", "qmc", "asymptotic", "random", "vertical"]
        .iter()
        .enumerate()
    {
        assert_eq!(row[key].as_f64().unwrap(), fields[i + 1], "{key}");
    }
    assert_eq!(v["m_nodes"], 2000);
}

#[test]
fn sample_rows_respect_breakpoints() {
    let out = run(&["sample", "--n", "6", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let gs = GeneratingSet::new(6).unwrap();
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for (k, row) in rows.iter().enumerate() {
        let cell = row[2] as usize;
        assert_eq!(cell, k + 1);
        let s = row[0] + row[1];
        // printed at 12 digits, so allow rounding at the strip edges
        assert!(s >= gs.r(cell - 1) - 1e-11 && s <= gs.r(cell) + 1e-11);
    }
    assert_eq!(
        out.stdout,
        run(&["sample", "--n", "6", "--seed", "42"]).stdout
    );
    assert_ne!(
        out.stdout,
        run(&["sample", "--n", "6", "--seed", "43"]).stdout
    );

    let two = stdout(&run(&[
        "sample", "--n", "2", "--seed", "1", "--format", "json",
    ]));
    let v: Value = serde_json::from_str(&two).unwrap();
    let cells: Vec<u64> = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["cell"].as_u64().unwrap())
        .collect();
    assert_eq!(cells, [1, 2]);
}

#[test]
fn mc_output_independent_of_thread_count() {
    let args = ["mc", "--n", "4,16", "--replicates", "400", "--seed", "5"];
    let one = run_with_env(&args, &[("STRATDISC_THREADS", "1")]);
    let four = run_with_env(&args, &[("STRATDISC_THREADS", "4")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert!(text.starts_with("n,partition,estimate,std_error,replicates,seed,reference\n"));
}

#[test]
fn mc_json_and_partitions() {
    let out = run(&[
        "mc",
        "--n",
        "4",
        "--partition",
        "jittered",
        "--replicates",
        "200",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["partition"], "jittered");
    let reference = v["rows"][0]["reference"].as_f64().unwrap();
    assert!((reference - 11.0 / 576.0).abs() < 1e-12);
    assert!(v["rows"][0]["std_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratio.csv");
    let out = run(&["ratio", "--n", "4,8", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,ratio\n4,1.70"));
}

#[test]
fn invalid_arguments_exit_with_two() {
    for args in [
        &["table", "--n", "1"][..],
        &["table", "--n", "x"],
        &["table", "--format", "xml"],
        &["mc", "--replicates", "1"],
        &[
            "mc",
            "--n",
            "6",
            "--partition",
            "jittered",
            "--replicates",
            "10",
        ],
        &["sample", "--n", "4,8"],
        &["verify", "--n", "64,128"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    let bad_threads = run_with_env(&["ratio", "--n", "4"], &[("STRATDISC_THREADS", "zero")]);
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn verify_reports_injected_fault() {
    let args = [
        "verify",
        "--n",
        "64,128,256,512,1024",
        "--format",
        "json",
        "--inject-fault",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["ns"], serde_json::json!([64, 128, 256, 512, 1024]));
    let collapse = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "collapse 13N/72")
        .unwrap();
    assert_eq!(collapse["passed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("collapse 13N/72"));
}

#[test]
fn verify_names_failing_checks() {
    let out = run(&["verify"]);
    let text = stdout(&out);
    assert!(text.starts_with("check,status,detail\n"));
    let failing: Vec<&str> = text.lines().filter(|l| l.contains(",fail,")).collect();
    assert_eq!(
        out.status.code(),
        Some(if failing.is_empty() { 0 } else { 3 })
    );
    // the oracle and decomposition checks are expected to hold
    for name in [
        "collapse 13N/72",
        "Q closed forms vs quadrature",
        "S3+S2+S1+S0 = interior Q sum",
    ] {
        assert!(
            text.lines()
                .any(|l| l.starts_with(&format!("{name},pass,"))),
            "{name}"
        );
    }
}
