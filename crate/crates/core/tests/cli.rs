use std::path::PathBuf;
use std::process::Command;

use udd_sim::cli::{run, EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE};

fn udd(args: &[&str]) -> (String, String, i32) {
    udd_env(args, None)
}

fn udd_env(args: &[&str], seed: Option<&str>) -> (String, String, i32) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_udd"));
    cmd.args(args).env_remove("UDD_SEED");
    if let Some(s) = seed {
        cmd.env("UDD_SEED", s);
    }
    let out = cmd.output().expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

/// Rows after the header, split on commas.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    rows(csv).iter().map(|r| r[idx].parse().unwrap()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn schedule_examples() {
    let (out, _, code) = udd(&["schedule", "--n", "2", "--t", "1", "--kind", "udd"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "j,t_j\n1,0.25\n2,0.75\n");
    let (out, _, _) = udd(&["schedule", "--n", "0", "--t", "1"]);
    assert_eq!(out, "j,t_j\n");
    let (out, _, _) = udd(&["schedule", "--n", "3", "--t", "0.1", "--kind", "udd"]);
    let t = column(&out, 1);
    assert!((t[0] - 0.01464466).abs() < 1e-8);
    assert_eq!(t[1], 0.05);
    assert!((t[2] - 0.08535534).abs() < 1e-8);
    let (out, _, _) = udd(&["schedule", "--n", "4", "--t", "1", "--kind", "periodic"]);
    assert_eq!(out, "j,t_j\n1,0.125\n2,0.375\n3,0.625\n4,0.875\n");
}

#[test]
fn schedule_rejects_bad_arguments() {
    for args in [
        vec!["schedule", "--n", "2", "--t", "-1"],
        vec!["schedule", "--n", "x", "--t", "1"],
        vec!["schedule", "--t", "1"],
        vec!["schedule", "--n", "2", "--t", "1", "--kind", "cpmg"],
    ] {
        assert_eq!(udd(&args).2, EXIT_USAGE, "{args:?}");
    }
}

#[test]
fn verify_examples() {
    let (out, err, code) = udd(&["verify", "--n", "1", "--commuting-smoke"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("PASS"));
    let devs: Vec<f64> = rows(&out)
        .iter()
        .filter(|r| r[1] != "slope")
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(devs.len(), 50);
    assert!(devs.iter().all(|&d| d <= 1e-12));
    let slopes: Vec<Vec<String>> = rows(&out).into_iter().filter(|r| r[1] == "slope").collect();
    assert_eq!(slopes.len(), 10);
    assert!(slopes.iter().all(|r| r[2] == "exact"));

    let (out, _, code) = udd(&["verify", "--n", "2", "--seeds", "10"]);
    assert_eq!(code, EXIT_OK);
    for r in rows(&out).iter().filter(|r| r[1] == "slope") {
        assert!(r[2].parse::<f64>().unwrap() >= 2.7);
    }

    assert_eq!(udd(&["verify", "--n", "1", "--points", "1"]).2, EXIT_USAGE);
    assert_eq!(
        udd(&["verify", "--n", "1", "--t-min", "0.5", "--t-max", "0.1"]).2,
        EXIT_USAGE
    );
}

#[test]
fn verify_reports_threshold_failures() {
    // grid far outside the small-T regime: the fitted exponent collapses
    let out = run([
        "udd", "verify", "--n", "3", "--seeds", "2", "--t-min", "20", "--t-max", "200",
    ]);
    assert_eq!(out.code, EXIT_THRESHOLD, "{}", out.stderr);
    assert!(out.stderr.contains("FAIL"));
}

#[test]
fn simulate_paired_runs() {
    let base = ["udd", "simulate", "--seed", "42"];
    let with = |extra: &[&str]| {
        let out = run(base.iter().chain(extra));
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        out.stdout
    };
    let free = with(&[
        "--initial",
        "up_up",
        "--control",
        "none",
        "--pulse",
        "delta",
    ]);
    let ctl = with(&[
        "--initial",
        "up_up",
        "--control",
        "y1_product",
        "--n",
        "8",
        "--pulse",
        "delta",
    ]);
    let min = |csv: &str| column(csv, 1).into_iter().fold(f64::INFINITY, f64::min);
    assert!(min(&ctl) > min(&free));
    assert_eq!(rows(&free).len(), 1000);

    let bell = ["--initial", "bell_plus", "--n", "8"];
    let variance = |csv: &str| {
        let f = column(csv, 1);
        let m = f.iter().sum::<f64>() / f.len() as f64;
        f.iter().map(|x| (x - m).powi(2)).sum::<f64>() / f.len() as f64
    };
    let udd_run = with(&[&bell[..], &["--control", "bell_plus"]].concat());
    let single = with(&[&bell[..], &["--control", "single_intuitive"]].concat());
    assert!(variance(&single) >= 10.0 * variance(&udd_run));
}

#[test]
fn simulate_distance_column() {
    let out = run([
        "udd",
        "simulate",
        "--pulse",
        "delta",
        "--initial",
        "bell_plus",
        "--control",
        "bell_plus",
        "--samples",
        "11",
        "--distance",
    ]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.starts_with("t,F,D_integrand\n"));
    let d = column(&out.stdout, 2);
    assert_eq!(d.len(), 11);
    assert!(d[0].abs() < 1e-12);
    assert!(d.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

#[test]
fn simulate_rejects_incompatible_configs() {
    for args in [
        vec![
            "simulate",
            "--model",
            "three_level",
            "--control",
            "bell_plus",
        ],
        vec![
            "simulate",
            "--model",
            "three_level",
            "--initial",
            "up_up",
            "--pulse",
            "delta",
        ],
        vec!["simulate", "--control", "mlevel_v2"],
        vec!["simulate", "--samples", "1"],
        vec!["simulate", "--c-ratio", "0"],
        vec!["simulate", "--initial", "1,abc"],
    ] {
        assert_eq!(udd(&args).2, EXIT_USAGE, "{args:?}");
    }
}

#[test]
fn sweep_examples() {
    let out = run([
        "udd",
        "sweep",
        "--param",
        "n",
        "--values",
        "1..8",
        "--initial",
        "bell_plus",
        "--control",
        "bell_plus",
        "--c-ratio",
        "100",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.starts_with("value,D_bar\n"));
    let d = column(&out.stdout, 1);
    assert_eq!(
        column(&out.stdout, 0),
        (1..=8).map(f64::from).collect::<Vec<_>>()
    );
    assert!(d.windows(2).all(|w| w[1] <= w[0]), "{d:?}");

    let out = run([
        "udd",
        "sweep",
        "--param",
        "c_ratio",
        "--values",
        "1000,100",
        "--n",
        "6",
        "--initial",
        "bell_plus",
        "--control",
        "bell_plus",
    ]);
    let v = column(&out.stdout, 0);
    let d = column(&out.stdout, 1);
    assert_eq!(v, vec![100.0, 1000.0]);
    assert!((d[0] - d[1]).abs() <= 0.1 * d[0].max(d[1]).max(1e-6));

    let out = run([
        "udd",
        "sweep",
        "--model",
        "three_level",
        "--param",
        "n",
        "--values",
        "10,2,0",
        "--pulse",
        "delta",
        "--metric",
        "final_f",
    ]);
    assert!(out.stdout.starts_with("value,final_F\n"));
    let f = column(&out.stdout, 1);
    assert!(f[2] >= f[1] && f[1] >= f[0], "{f:?}");

    assert_eq!(
        udd(&["sweep", "--param", "n", "--values", ""]).2,
        EXIT_USAGE
    );
    assert_eq!(
        udd(&["sweep", "--param", "t", "--values", "1"]).2,
        EXIT_USAGE
    );
}

#[test]
fn sweep_total_time() {
    let out = run([
        "udd",
        "sweep",
        "--param",
        "total_time",
        "--values",
        "0.05,0.025",
        "--pulse",
        "delta",
        "--n",
        "2",
        "--metric",
        "final_f",
    ]);
    assert_eq!(out.code, EXIT_OK);
    let rows = rows(&out.stdout);
    assert_eq!(rows[0][0], "0.025");
    assert_eq!(rows[1][0], "0.05");
}

#[test]
fn config_file_and_precedence() {
    let path = scratch("exp.cfg");
    std::fs::write(
        &path,
        "# delta-pulse Bell run\npulse = delta\ninitial = bell_plus\ncontrol = bell_plus\nn = 4\nsamples = 20\nseed = 5\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let from_file = udd(&["simulate", "--config", p]).0;
    let explicit = udd(&[
        "simulate",
        "--pulse",
        "delta",
        "--initial",
        "bell_plus",
        "--control",
        "bell_plus",
        "--n",
        "4",
        "--samples",
        "20",
        "--seed",
        "5",
    ])
    .0;
    assert_eq!(from_file, explicit);

    // flag beats file, file beats environment
    let flag = udd_env(&["simulate", "--config", p, "--seed", "6"], Some("5")).0;
    let seed6 = udd(&[
        "simulate",
        "--pulse",
        "delta",
        "--initial",
        "bell_plus",
        "--control",
        "bell_plus",
        "--n",
        "4",
        "--samples",
        "20",
        "--seed",
        "6",
    ])
    .0;
    assert_eq!(flag, seed6);
    assert_eq!(
        udd_env(&["simulate", "--config", p], Some("6")).0,
        from_file
    );

    // environment beats the built-in default
    let args = [
        "simulate",
        "--pulse",
        "delta",
        "--samples",
        "5",
        "--control",
        "none",
    ];
    let env6 = udd_env(&args, Some("6")).0;
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "6"]);
    assert_eq!(env6, udd(&with_flag).0);
    assert_ne!(env6, udd(&args).0);
    assert_eq!(udd_env(&args, Some("not-a-seed")).2, EXIT_USAGE);

    std::fs::write(&path, "bogus = 1\n").unwrap();
    assert_eq!(udd(&["simulate", "--config", p]).2, EXIT_USAGE);
    assert_eq!(
        udd(&["simulate", "--config", "/nonexistent/x.cfg"]).2,
        EXIT_USAGE
    );
}

#[test]
fn coefficient_log_export() {
    let path = scratch("coeffs.csv");
    let (_, _, code) = udd(&[
        "simulate",
        "--pulse",
        "delta",
        "--samples",
        "2",
        "--log-coefficients",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("term_kind,factor_a,factor_b,axis_a,axis_b,value")
    );
    assert_eq!(lines.count(), 99);
}

#[test]
fn explicit_amplitudes_are_normalized() {
    let a = udd(&[
        "simulate",
        "--pulse",
        "delta",
        "--samples",
        "5",
        "--initial",
        "2,0,0,0",
    ])
    .0;
    let b = udd(&[
        "simulate",
        "--pulse",
        "delta",
        "--samples",
        "5",
        "--initial",
        "up_up",
    ])
    .0;
    assert_eq!(a, b);
}

#[test]
fn help_exits_cleanly() {
    let out = run(["udd", "--help"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("schedule"));
    assert_eq!(run(["udd"]).code, EXIT_USAGE);
}
