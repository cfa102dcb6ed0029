//! End-to-end checks of the binary: CSV schemas, determinism, exit codes,
//! config precedence and the reproduce tables.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_borel-eb"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("borel-eb-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn sample_is_deterministic_per_seed() {
    let a = run(&["sample", "--theta", "0.5", "--n", "50", "--seed", "9"]);
    let b = run(&["sample", "--theta", "0.5", "--n", "50", "--seed", "9"]);
    let c = run(&["sample", "--theta", "0.5", "--n", "50", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));
    assert!(stdout(&a).starts_with("index,x\n"));
}

#[test]
fn sample_zero_count_emits_header_only() {
    let out = run(&["sample", "--theta", "0.5", "--n", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "index,x\n");
}

#[test]
fn sample_rejects_invalid_theta() {
    for theta in ["1.5", "0", "1"] {
        let out = run(&["sample", "--theta", theta]);
        assert_eq!(out.status.code(), Some(2), "theta = {theta}");
    }
    // Missing theta entirely is a flag error too.
    let out = run(&["sample"]);
    assert_eq!(out.status.code(), Some(2));
}

fn empirical_distribution(csv: &str) -> BTreeMap<u64, f64> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut total = 0u64;
    for line in csv.lines().skip(1) {
        let x: u64 = line.split(',').nth(1).unwrap().parse().unwrap();
        *counts.entry(x).or_insert(0) += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(x, c)| (x, c as f64 / total as f64))
        .collect()
}

#[test]
fn sampling_methods_agree_in_distribution() {
    let gw = run(&[
        "sample", "--theta", "0.5", "--n", "100000", "--seed", "3", "--method", "gw",
    ]);
    let inv = run(&[
        "sample", "--theta", "0.5", "--n", "100000", "--seed", "4", "--method", "inverse",
    ]);
    let gw_dist = empirical_distribution(&stdout(&gw));
    let inv_dist = empirical_distribution(&stdout(&inv));
    let keys: std::collections::BTreeSet<u64> =
        gw_dist.keys().chain(inv_dist.keys()).copied().collect();
    let tv: f64 = 0.5
        * keys
            .iter()
            .map(|x| (gw_dist.get(x).unwrap_or(&0.0) - inv_dist.get(x).unwrap_or(&0.0)).abs())
            .sum::<f64>();
    assert!(tv < 0.01, "total variation between methods {tv}");
}

#[test]
fn estimate_known_values() {
    let out = run(&["estimate", "--x", "10", "--r", "5", "--estimator", "mle"]);
    assert_eq!(stdout(&out), "x,estimator,theta_hat\n10,mle,0.500000\n");

    let out = run(&["estimate", "--x", "5", "--estimator", "bayes"]);
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.63).abs() <= 0.005, "bayes estimate {value}");
}

#[test]
fn estimate_rejects_x_below_support() {
    let out = run(&["estimate", "--x", "4", "--r", "5", "--estimator", "mle"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_from_frequency_table_file() {
    let path = temp_path("freq.csv");
    std::fs::write(&path, "kind,x,count\nr,5,3\nsum,8,2\nsum,9,1\n").unwrap();
    let out = run(&[
        "estimate",
        "--x",
        "6",
        "--estimator",
        "npeb-file",
        "--freq-table",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // tau = (8/5)(9/6)^0 (1/4)/(1/4) -> theta = ln(1.6)/3.
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - (1.6f64).ln() / 3.0).abs() <= 1e-6, "{value}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn malformed_table_files_exit_3() {
    let missing = run(&[
        "estimate",
        "--x",
        "6",
        "--estimator",
        "npeb-file",
        "--freq-table",
        "/nonexistent.csv",
    ]);
    assert_eq!(missing.status.code(), Some(3));

    let bad_header = temp_path("bad-header.csv");
    std::fs::write(&bad_header, "x,count\n5,3\n").unwrap();
    let out = run(&[
        "estimate",
        "--x",
        "6",
        "--estimator",
        "npeb-file",
        "--freq-table",
        bad_header.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_file(&bad_header).ok();

    // Count totals that disagree between kinds are rejected.
    let unbalanced = temp_path("unbalanced.csv");
    std::fs::write(&unbalanced, "kind,x,count\nr,5,3\nsum,8,1\n").unwrap();
    let out = run(&[
        "estimate",
        "--x",
        "6",
        "--estimator",
        "npeb-file",
        "--freq-table",
        unbalanced.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_file(&unbalanced).ok();
}

#[test]
fn risk_of_bayes_rule_has_zero_regret() {
    let out = run(&["risk", "--estimator", "bayes", "--range", "5-60"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("risk,min_risk,regret,x_low,x_high,tail_mass_note\n"));
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let regret: f64 = fields[2].parse().unwrap();
    assert!(regret.abs() < 1e-8, "regret {regret}");
    assert_eq!(fields[3], "5");
    assert_eq!(fields[4], "60");
}

#[test]
fn risk_of_mle_matches_published_numbers() {
    let out = run(&["risk", "--estimator", "mle"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let min_risk: f64 = fields[1].parse().unwrap();
    let regret: f64 = fields[2].parse().unwrap();
    assert!((min_risk - 0.0622).abs() <= 0.001, "min risk {min_risk}");
    assert!((regret - 0.1327).abs() <= 0.002, "regret {regret}");
}

#[test]
fn reproduce_table_one_matches_published_rows() {
    let out = run(&["reproduce", "--table", "one", "--seed", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,theta_npeb_f,theta_U,theta_MLE"));

    let published_bayes = [
        0.63, 0.64, 0.65, 0.65, 0.66, 0.67, 0.67, 0.68, 0.69, 0.69, 0.70, 0.71, 0.71, 0.72, 0.73,
        0.73,
    ];
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let x: u64 = fields[0].parse().unwrap();
        assert_eq!(x, 5 + i as u64);
        let npeb: f64 = fields[1].parse().unwrap();
        let bayes: f64 = fields[2].parse().unwrap();
        let mle: f64 = fields[3].parse().unwrap();
        assert!((0.0..1.0).contains(&npeb));
        assert!(
            (bayes - published_bayes[i]).abs() <= 0.005,
            "x={x}: bayes {bayes}"
        );
        assert_eq!(round2(mle), round2((x - 5) as f64 / x as f64), "x={x}");
        rows += 1;
    }
    assert_eq!(rows, 16);

    // Deterministic per seed.
    let again = run(&["reproduce", "--table", "one", "--seed", "5"]);
    assert_eq!(text, stdout(&again));
}

#[test]
fn reproduce_table_two_schema_and_reference_column() {
    let out = run(&[
        "reproduce",
        "--table",
        "two",
        "--n-list",
        "50",
        "--reps",
        "5",
        "--range",
        "5-15",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,range,mean_regret,std_of_mean,mle_regret")
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "50");
    assert_eq!(fields[1], "5-15");
    let mle_regret: f64 = fields[4].parse().unwrap();
    assert!(
        (mle_regret - 0.1292).abs() <= 0.002,
        "mle regret {mle_regret}"
    );
}

#[test]
fn config_file_and_env_precedence() {
    let config = temp_path("config.txt");
    std::fs::write(&config, "theta = 0.3\nseed = 11\n# comment\nn = 4\n").unwrap();

    // Config values apply when flags are absent.
    let from_config = run(&["sample", "--config", config.to_str().unwrap()]);
    assert!(from_config.status.success());
    assert_eq!(stdout(&from_config).lines().count(), 5, "header + 4 rows");

    // Flags beat the config file.
    let flag_wins = run(&["sample", "--config", config.to_str().unwrap(), "--n", "2"]);
    assert_eq!(stdout(&flag_wins).lines().count(), 3);

    // Config seed beats the environment; environment beats the default.
    let env_only = bin()
        .args(["sample", "--theta", "0.3", "--n", "4"])
        .env("BOREL_EB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(stdout(&from_config), stdout(&env_only));

    let unknown_key = temp_path("bad-config.txt");
    std::fs::write(&unknown_key, "bogus = 1\n").unwrap();
    let out = run(&[
        "sample",
        "--theta",
        "0.5",
        "--config",
        unknown_key.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    std::fs::remove_file(&config).ok();
    std::fs::remove_file(&unknown_key).ok();
}

#[test]
fn out_flag_writes_identical_bytes() {
    let path = temp_path("out.csv");
    let to_file = run(&[
        "sample",
        "--theta",
        "0.6",
        "--n",
        "20",
        "--seed",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let to_stdout = run(&["sample", "--theta", "0.6", "--n", "20", "--seed", "2"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&to_stdout));
    std::fs::remove_file(&path).ok();
}
