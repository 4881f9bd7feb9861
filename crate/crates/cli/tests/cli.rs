use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randhankel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn kernel_examples() {
    for (t1, t2, c) in [("1", "1", 1.0), ("0.5", "0.5", 0.056_852_8), ("0", "1", 0.0)] {
        let o = cli(&["kernel", "--t1", t1, "--t2", t2, "--json"]);
        assert_eq!(o.status.code(), Some(0));
        let rec = &json_lines(&o)[0];
        assert!((num(&rec["c"]) - c).abs() < 1e-7, "{rec}");
        assert!((num(&rec["c_quadrature"]) - c).abs() < 1e-7, "{rec}");
    }
    let human = stdout(&cli(&["kernel", "--t1", "0.5", "--t2", "0.5"]));
    assert_eq!(human.matches("0.0568528").count(), 2, "{human}");
}

#[test]
fn cumulants_examples() {
    let o = cli(&["cumulants", "--n", "1", "--p", "1", "--s", "1", "--t", "1", "--max-order", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    assert!((num(&recs[0]["kappa"]) + 2.4).abs() < 1e-12);
    assert!((num(&recs[1]["kappa"]) - 0.4257).abs() < 5e-5);

    let o = cli(&["cumulants", "--n", "3", "--p", "2", "--t", "0", "--max-order", "3", "--json"]);
    assert!(json_lines(&o).iter().all(|r| num(&r["kappa"]) == 0.0));

    for (n, p) in [("10", "5"), ("50", "20")] {
        let o = cli(&["cumulants", "--n", n, "--p", p, "--max-order", "6"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert_eq!(text.matches(" pass").count(), 6, "{text}");
    }
}

#[test]
fn sample_is_deterministic_and_zero_at_t0() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        let o = cli(&["sample", "--n", "6", "--p", "3", "--grid", "1:1,0.5:0", "--reps", "50", "--seed", "9", "--out", f.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("replication,H[1:1],H[0.5:0]"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 50);
    for row in &rows {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        // 17 significant digits
        assert_eq!(row[1].split('e').next().unwrap().trim_start_matches('-').replace('.', "").len(), 17);
    }
    let other = cli(&["sample", "--n", "6", "--p", "3", "--reps", "50", "--seed", "10"]);
    assert_ne!(stdout(&other), text);
}

#[test]
fn sample_mean_matches_exact_first_cumulant() {
    let o = cli(&["sample", "--n", "8", "--p", "3", "--grid", "1:1", "--reps", "10000", "--seed", "3"]);
    let xs: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let k1 = num(&json_lines(&cli(&["cumulants", "--n", "8", "--p", "3", "--max-order", "1", "--json"]))[0]["kappa"]);
    assert!((mean - k1).abs() <= 4.0 * (var / n).sqrt(), "mean {mean} vs {k1}");
}

#[test]
fn verify_exit_codes() {
    assert_eq!(cli(&["verify", "--which", "product-formula"]).status.code(), Some(0));
    assert_eq!(cli(&["verify", "--which", "decomposition", "--seed", "7"]).status.code(), Some(0));
    let o = cli(&["verify", "--which", "ldp-closed-form"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("note: printed t=1 closed form"), "{text}");
    // the LLN ladder does not converge; the command reports the failure
    assert_eq!(cli(&["verify", "--which", "lln", "--reps", "200"]).status.code(), Some(1));
    assert_eq!(cli(&["verify", "--which", "nope"]).status.code(), Some(2));
    assert_eq!(cli(&["verify", "--which", "clt", "--reps", "10"]).status.code(), Some(2));
}

#[test]
fn verify_json_and_report_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let o = cli(&["verify", "--which", "oracle", "--seed", "4", "--reps", "300", "--json", "--out", path.to_str().unwrap()]);
    assert_eq!(stdout(&o), std::fs::read_to_string(&path).unwrap());
    let recs = json_lines(&o);
    assert_eq!(recs[0]["record"], "header");
    assert_eq!(recs[0]["seed"], 4);
    assert_eq!(recs.last().unwrap()["record"], "summary");
    let again = cli(&["verify", "--which", "oracle", "--seed", "4", "--reps", "300", "--json", "--workers", "1"]);
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn rate_examples() {
    let r = &json_lines(&cli(&["rate", "--kind", "ldp", "--s", "1", "--t", "1", "--x", "-0.5", "--json"]))[0];
    assert!(num(&r["rate"]).abs() < 1e-9);
    let r = &json_lines(&cli(&["rate", "--kind", "ldp", "--s", "1", "--t", "1", "--x", "-1", "--json"]))[0];
    assert!((num(&r["rate"]) - 0.153_426_4).abs() < 1e-7);
    assert!((num(&r["argmax_lambda"]) + 0.5).abs() < 1e-6);
    let r = &json_lines(&cli(&["rate", "--kind", "moderate", "--s", "1", "--t", "1", "--x", "0.5", "--json"]))[0];
    assert!((num(&r["rate"]) - 0.25).abs() < 1e-12);
    let r = &json_lines(&cli(&["rate", "--kind", "ldp", "--x", "0.2", "--json"]))[0];
    assert_eq!(r["rate"], "inf");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cli(&["kernel", "--t1", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["kernel", "--t1", "2", "--t2", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["rate", "--kind", "other", "--x", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["cumulants", "--n", "x", "--p", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let o = cli(&["sample", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in ["--n", "--p", "--grid", "--reps", "--seed", "--out", "--json", "--config"] {
        assert!(text.contains(flag), "{flag} missing from\n{text}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# kernel settings\nt1 = 0.5\nt2 = 0.5\ns1 = 0.5\n").unwrap();
    let rec = &json_lines(&cli(&["--config", cfg.to_str().unwrap(), "kernel", "--json"]))[0];
    assert_eq!(num(&rec["t1"]), 0.5);
    assert_eq!(num(&rec["s1"]), 0.5);
    let rec = &json_lines(&cli(&["kernel", "--t1", "1", "--json", "--config", cfg.to_str().unwrap()]))[0];
    assert_eq!(num(&rec["t1"]), 1.0);
    assert_eq!(num(&rec["t2"]), 0.5);
    std::fs::write(&cfg, "broken line\n").unwrap();
    assert_eq!(cli(&["--config", cfg.to_str().unwrap(), "kernel"]).status.code(), Some(2));
}
