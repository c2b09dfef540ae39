use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inattention"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn check_full_information() {
    let v = json(&run(&["check", "--k", "1", "--mu", "0.5", "--profile", "full", "--deviation-step", "0.01"]));
    assert_eq!(v["report"]["verdict"], "equilibrium");
    assert_eq!(v["mu"], v["mu_grid"]);
    let v = json(&run(&["check", "--k", "1", "--mu", "0.1", "--deviation-step", "0.01"]));
    assert_eq!(v["report"]["verdict"], "refuted");
    assert!(v["report"]["best_deviation"]["gain"].as_f64().unwrap() > 1e-4);
}

#[test]
fn best_response_full_information() {
    let v = json(&run(&["best-response", "--k", "1", "--mu", "0.5", "--profile", "full"]));
    let s = &v["strategy"];
    assert!((s["value"].as_f64().unwrap() - 0.5625).abs() < 1e-9);
    let pts = &s["plans"][0]["stage1"]["distribution"]["points"];
    assert_eq!(pts, &serde_json::json!([0.25, 0.75]));
}

#[test]
fn region_flips_at_the_boundaries() {
    let out = run(&["region", "--k", "1", "--mu-range", "0,1", "--steps", "99", "--deviation-step", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert_eq!(lines.next(), Some("mu,k,verdict,margin"));
    let rows: Vec<(f64, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 99);
    for (mu, verdict) in rows {
        let expect = if (0.25 - 1e-9..=0.75 + 1e-9).contains(&mu) { "equilibrium" } else { "refuted" };
        assert_eq!(verdict, expect, "μ = {mu}");
    }
}

#[test]
fn exit_codes() {
    let out = run(&["check", "--k", "1", "--mu", "0.5", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--k", "-1", "--mu", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["hetero", "--mu1", "0.3", "--mu2", "0.7"]).status.code(), Some(3));
}

#[test]
fn config_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.conf");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["--config", empty.to_str().unwrap(), "envelope-dump", "--k", "1", "--mu", "0.5", "--x", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let default_rows = String::from_utf8(out.stdout).unwrap().lines().count();

    let fine = dir.path().join("fine.conf");
    std::fs::write(&fine, "grid_points = 4001\n").unwrap();
    let out = run(&["--config", fine.to_str().unwrap(), "envelope-dump", "--k", "1", "--mu", "0.5", "--x", "0.5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# schema=1\ny,f,envelope\n"));
    assert!(text.lines().count() >= 4001 + 2 && text.lines().count() > default_rows);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "grid_points = 2\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "check", "--k", "1", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_points"));

    let unknown = dir.path().join("unknown.conf");
    std::fs::write(&unknown, "grid_pointz = 5\n").unwrap();
    let out = run(&["--config", unknown.to_str().unwrap(), "check", "--k", "1", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_pointz"));

    // flags override the file
    let out = run(&["--config", bad.to_str().unwrap(), "--grid-points", "101", "envelope-dump", "--k", "1", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &str, par: &str| {
        vec![
            "region".to_string(),
            "--k-range".into(),
            "0.5,2".into(),
            "--k-steps".into(),
            "2".into(),
            "--steps".into(),
            "9".into(),
            "--deviation-step".into(),
            "0.02".into(),
            "--parallel".into(),
            par.into(),
            "--out".into(),
            p.into(),
        ]
    };
    let ra = Command::new(env!("CARGO_BIN_EXE_inattention")).args(args(a.to_str().unwrap(), "true")).output().unwrap();
    let rb = Command::new(env!("CARGO_BIN_EXE_inattention")).args(args(b.to_str().unwrap(), "false")).output().unwrap();
    assert_eq!(ra.status.code(), Some(0));
    assert!(ra.stdout.is_empty());
    assert_eq!(rb.status.code(), Some(0));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 2 + 18);
}

#[test]
fn other_subcommands() {
    let v = json(&run(&["single-sender", "--lambda", "0.6", "--mu", "0.5", "--k", "1"]));
    assert!(v["acceptance"].as_f64().unwrap() > 0.0);
    assert_eq!(v["strict_garbling_of_full_info"], true);

    let v = json(&run(&["k0", "--benchmark", "full", "--mu", "0.5"]));
    assert!(v["gain"].as_f64().unwrap() > 0.0);
    let v = json(&run(&["k0", "--benchmark", "uniform", "--mu", "0.4"]));
    assert!((v["max_payoff"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let v = json(&run(&["hetero", "--mu1", "0.5", "--mu2", "0.6", "--deviation-step", "0.01"]));
    assert_eq!(v["report"]["verdict"], "equilibrium");
    assert!((v["hetero_value"].as_f64().unwrap() - 0.6225).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("cost.txt");
    std::fs::write(&sched, "# floor=1\n2 | 0.25:0.5 0.75:0.5\n").unwrap();
    let v = json(&run(&["variant", "--mu", "0.5", "--cost-schedule", sched.to_str().unwrap(), "--deviation-step", "0.01"]));
    assert_eq!(v["report"]["verdict"], "equilibrium");
    std::fs::write(&sched, "# floor=0.4\n").unwrap();
    let out = run(&["variant", "--mu", "0.5", "--cost-schedule", sched.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
