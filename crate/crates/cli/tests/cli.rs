use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bose-mi"));
    c.env_remove("BOSE_MI_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn assert_single_line_error(out: &Output, code: i32, tag: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error[{tag}]: ")), "{err}");
    assert!(out.stdout.is_empty());
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().to_string())
        .collect()
}

#[test]
fn dispersion_tables() {
    let out = stdout(&run(&[
        "dispersion",
        "--model",
        "infinite",
        "--t",
        "1",
        "--L",
        "8",
    ]));
    let eps = column(&out, "eps");
    assert_eq!(eps.len(), 8);
    assert_eq!(eps[0], "-1.000000000000e+00");
    assert!(eps[1..].iter().all(|e| e == "0.000000000000e+00"));

    let out = stdout(&run(&[
        "dispersion",
        "--model",
        "powerlaw",
        "--gamma",
        "1.7",
        "--L",
        "1024",
    ]));
    let eps: Vec<f64> = column(&out, "eps")
        .iter()
        .map(|e| e.parse().unwrap())
        .collect();
    assert_eq!(eps.len(), 1024);
    for m in 1..1024 {
        assert!((eps[m] - eps[1024 - m]).abs() <= 1e-12 * eps[m].abs().max(1.0));
    }

    assert_single_line_error(
        &run(&[
            "dispersion",
            "--model",
            "powerlaw",
            "--gamma",
            "0.9",
            "--L",
            "8",
        ]),
        2,
        "domain",
    );
}

#[test]
fn critical_temperatures() {
    let out = stdout(&run(&["tc", "--model", "infinite", "--n", "1"]));
    assert_eq!(column(&out, "tc"), vec!["1.442695040889e+00"]);
    let out = stdout(&run(&[
        "tc", "--model", "powerlaw", "--gamma", "1.5", "--n", "1",
    ]));
    let beta_c: f64 = column(&out, "beta_c")[0].parse().unwrap();
    assert!((beta_c / 0.16843 - 1.0).abs() < 0.01);
    let out = stdout(&run(&["tc", "--model", "nn", "--n", "1"]));
    assert!(out.contains("no finite-T BEC"));
}

#[test]
fn usage_errors_exit_two() {
    assert_single_line_error(&run(&["mu", "--model", "nn", "--L", "8"]), 2, "usage");
    assert_single_line_error(
        &run(&["mu", "--model", "nn", "--L", "8", "--beta", "1", "--T", "1"]),
        2,
        "usage",
    );
    assert_single_line_error(&run(&["tc", "--model", "powerlaw"]), 2, "usage");
    assert_single_line_error(&run(&["frobnicate"]), 2, "usage");
    assert_single_line_error(
        &run(&["sweep", "--model", "nn", "--sizes", "8,4", "--beta", "1"]),
        2,
        "usage",
    );
    assert_single_line_error(
        &run(&[
            "mutual-info",
            "--model",
            "nn",
            "--L",
            "8",
            "--beta",
            "1",
            "--la",
            "8",
        ]),
        2,
        "partition",
    );
    let out = bin()
        .args(["sweep", "--model", "nn", "--sizes", "8:16", "--beta", "1"])
        .env("BOSE_MI_WORKERS", "many")
        .output()
        .unwrap();
    assert_single_line_error(&out, 2, "usage");
}

#[test]
fn convergence_failure_exits_four() {
    assert_single_line_error(
        &run(&[
            "mu", "--model", "nn", "--L", "16", "--beta", "1", "--tol", "1e-300",
        ]),
        4,
        "convergence",
    );
}

#[test]
fn fit_with_too_few_rows_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.csv");
    let out = run(&[
        "sweep",
        "--model",
        "infinite",
        "--sizes",
        "16:64",
        "--beta",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_single_line_error(
        &run(&["fit", "--input", path.to_str().unwrap()]),
        3,
        "insufficient-data",
    );
}

#[test]
fn sweep_then_fit_below_tc() {
    let sweep = stdout(&run(&[
        "sweep", "--model", "infinite", "--n", "1", "--beta", "1.4", "--sizes", "64:4096",
    ]));
    let mut fit = bin()
        .args(["fit"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    std::io::Write::write_all(fit.stdin.as_mut().unwrap(), sweep.as_bytes()).unwrap();
    let out = stdout(&fit.wait_with_output().unwrap());
    let slope: f64 = column(&out, "slope")[0].parse().unwrap();
    assert!((slope - 0.5).abs() < 0.02, "slope {slope}");
    assert_eq!(column(&out, "points"), vec!["4"]);
    assert_eq!(column(&out, "window_lo"), vec!["2.560000000000e+02"]);
}

#[test]
fn output_is_byte_identical_across_runs_and_workers() {
    let args = [
        "sweep", "--model", "powerlaw", "--gamma", "1.5", "--sizes", "8:256", "--T", "2,0.5",
    ];
    let a = run(&[&args[..], &["--workers", "1"]].concat());
    let b = bin()
        .args(args)
        .env("BOSE_MI_WORKERS", "4")
        .output()
        .unwrap();
    let c = run(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&c));
}

#[test]
fn json_lines_carry_the_csv_columns() {
    let args = [
        "mutual-info",
        "--model",
        "infinite",
        "--L",
        "64",
        "--T-rel",
        "0.5,2",
    ];
    let csv = stdout(&run(&args));
    let json = stdout(&run(&[&args[..], &["--format", "json"]].concat()));
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(json.lines().count(), 2);
    for (line, row) in json.lines().zip(csv.lines().skip(1)) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.keys().map(String::as_str).collect::<Vec<_>>(), header);
        let e_m = row.split(',').nth(8).unwrap();
        assert_eq!(obj["e_m"].as_f64().unwrap(), e_m.parse::<f64>().unwrap());
    }
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(
        &conf,
        "# shared settings\nmodel = powerlaw\ngamma = 1.5\nbeta = 0.5\nL = 128\nformat = json\n",
    );
    let conf = conf.to_str().unwrap();
    let from_config = stdout(&run(&["mutual-info", "--config", conf]));
    let explicit = stdout(&run(&[
        "mutual-info",
        "--model",
        "powerlaw",
        "--gamma",
        "1.5",
        "--beta",
        "0.5",
        "--L",
        "128",
        "--format",
        "json",
    ]));
    assert_eq!(from_config, explicit);

    // flags win, including over a config member of the same exclusive group
    let overridden = stdout(&run(&[
        "mutual-info",
        "--config",
        conf,
        "--T",
        "4",
        "--format",
        "csv",
    ]));
    assert_eq!(column(&overridden, "beta"), vec!["2.500000000000e-01"]);
    let bad = dir.path().join("bad.conf");
    write(&bad, "colour = blue\n");
    assert_single_line_error(&run(&["tc", "--config", bad.to_str().unwrap()]), 2, "usage");
}

#[test]
fn sweep_resumes_from_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    let partial = dir.path().join("partial.csv");
    let base = [
        "sweep", "--model", "powerlaw", "--gamma", "1.7", "--beta", "0.5,2",
    ];
    let out = |p: &Path, sizes: &str, extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend(["--sizes", sizes, "--output", p.to_str().unwrap()]);
        args.extend(extra);
        assert!(run(&args).status.success());
    };
    out(&full, "16:512", &[]);
    out(&partial, "16:64", &[]);
    out(&partial, "16:512", &["--resume"]);
    assert_eq!(
        std::fs::read(&full).unwrap(),
        std::fs::read(&partial).unwrap()
    );

    let fresh = dir.path().join("fresh.json");
    out(&fresh, "16:512", &["--resume", "--format", "json"]);
    let lines = std::fs::read_to_string(&fresh).unwrap().lines().count();
    assert_eq!(lines, 12);
}

#[test]
fn failing_sweep_points_are_rows() {
    let out = stdout(&run(&[
        "sweep", "--model", "nn", "--sizes", "4,8,16", "--beta", "1", "--la", "6",
    ]));
    assert_eq!(column(&out, "status"), vec!["partition", "ok", "ok"]);
}

#[test]
fn zero_entropy_ladder() {
    let out = stdout(&run(&["zero-entropy", "--particles", "1e2:1e5:10"]));
    let slopes = column(&out, "slope");
    assert_eq!(slopes[0], "");
    for s in &slopes[1..] {
        assert!((s.parse::<f64>().unwrap() - 0.5).abs() < 0.005);
    }
    let one = stdout(&run(&["zero-entropy", "--particles", "1"]));
    let e: f64 = column(&one, "e_exact")[0].parse().unwrap();
    assert!((e - std::f64::consts::LN_2).abs() < 1e-12);
}
