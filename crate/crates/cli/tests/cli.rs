use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ar1persist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const GOLDEN_K8: &str = "\
K0 = 1/2
K1 = 1/pi
K2 = 1/pi - 2/pi^2
K3 = 7/(6*pi) - 6/pi^2 + 8/pi^3
K4 = 1/pi - 35/(3*pi^2) + 40/pi^3 - 40/pi^4
K5 = 43/(40*pi) - 19/pi^2 + 116/pi^3 - 280/pi^4 + 224/pi^5
K6 = 7/(6*pi) - 5149/(180*pi^2) + 790/(3*pi^3) - 3260/(3*pi^4) + 2016/pi^5 - 1344/pi^6
K7 = 117/(112*pi) - 799/(20*pi^2) + 7762/(15*pi^3) - 3164/pi^4 + 29456/(3*pi^5) - 14784/pi^6 + 8448/pi^7
K8 = 1/pi - 8843/(168*pi^2) + 16541/(18*pi^3) - 23147/(3*pi^4) + 34944/pi^5 - 86688/pi^6 + 109824/pi^7 - 54912/pi^8
";

#[test]
fn coeffs_golden_output() {
    let out = run(&["coeffs", "--order", "8", "--format", "exact"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), GOLDEN_K8);

    let out = run(&["coeffs", "--order", "2"]);
    assert_eq!(stdout(&out), "K0 = 1/2\nK1 = 1/pi\nK2 = 1/pi - 2/pi^2\n");

    let out = run(&["coeffs", "--order", "0", "--format", "float"]);
    assert_eq!(stdout(&out), "K0 = 0.5\n");
}

#[test]
fn coeffs_csv_has_header_and_quoting() {
    let out = run(&["coeffs", "--order", "3", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,exact,value"));
    assert_eq!(lines.next(), Some("0,1/2,0.5"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn json_round_trips_byte_for_byte() {
    for args in [
        &["coeffs", "--order", "6", "--format", "json"][..],
        &["lambda", "--rho", "-0.2", "--format", "json"][..],
        &[
            "radius", "--order", "40", "--window", "10", "--format", "json",
        ][..],
        &[
            "persistence",
            "--rho",
            "0.3",
            "--paths",
            "100000",
            "--nmax",
            "12",
            "--fit-lo",
            "2",
            "--format",
            "json",
        ][..],
    ] {
        let out = run(args);
        assert!(out.status.success(), "{args:?}");
        let text = stdout(&out);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["command", "inputs", "outputs", "provenance"] {
            assert!(value.get(key).is_some(), "{args:?} lacks {key}");
        }
        let again = serde_json::to_string_pretty(&value).unwrap() + "\n";
        assert_eq!(again, text, "{args:?}");
    }
}

#[test]
fn lambda_methods_agree() {
    let out = run(&[
        "lambda", "--rho", "0.25", "--method", "both", "--order", "40", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["outputs"]["difference"].as_f64().unwrap() < 1e-8);

    let out = run(&[
        "lambda", "--rho", "0", "--method", "both", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["outputs"]["series"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((v["outputs"]["nystrom"].as_f64().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    let out = run(&["lambda", "--rho", "0.99", "--method", "nystrom"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.95"));

    assert_eq!(
        run(&["lambda", "--rho", "1.0", "--method", "series"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["radius", "--order", "10", "--window", "20"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["validate", "--suite", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["coeffs", "--order", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&[
            "persistence",
            "--rho",
            "0.2",
            "--paths",
            "1000",
            "--batches",
            "7"
        ])
        .status
        .code(),
        Some(2)
    );
    // Not enough paths for any fit window.
    assert_eq!(
        run(&[
            "persistence",
            "--rho",
            "0",
            "--paths",
            "1000",
            "--batches",
            "10"
        ])
        .status
        .code(),
        Some(2)
    );
    // Convergence failure.
    assert_eq!(
        run(&[
            "lambda",
            "--rho",
            "0.9",
            "--method",
            "nystrom",
            "--max-iter",
            "2",
            "--tol",
            "1e-300"
        ])
        .status
        .code(),
        Some(1)
    );

    let out = Command::new(env!("CARGO_BIN_EXE_ar1persist"))
        .args(["coeffs", "--order", "1"])
        .env("AR1P_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn radius_reports_bound_and_estimate() {
    let out = run(&["radius"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("proven lower bound: 1/3"));
    assert!(text.contains("ESTIMATE"));
}

#[test]
fn persistence_is_deterministic_and_sane() {
    let args = [
        "persistence",
        "--rho",
        "0",
        "--paths",
        "1000000",
        "--nmax",
        "20",
        "--seed",
        "42",
        "--format",
        "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let threaded = Command::new(env!("CARGO_BIN_EXE_ar1persist"))
        .args(args)
        .env("AR1P_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, threaded.stdout);

    let text = stdout(&a);
    let row3: Vec<&str> = text.lines().nth(4).unwrap().split(',').collect();
    assert_eq!(row3[0], "3");
    let p: f64 = row3[2].parse().unwrap();
    let se = (0.0625f64 * 0.9375 / 1e6).sqrt();
    assert!((p - 0.0625).abs() <= 4.0 * se, "{p}");
}

#[test]
fn persistence_slope_matches_nystrom_at_half() {
    let out = run(&[
        "persistence",
        "--rho",
        "0.5",
        "--paths",
        "10000000",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["outputs"]["fit"]["z"].as_f64().unwrap().abs() <= 3.0);
}

#[test]
fn validate_reports_every_check() {
    let out = run(&["validate", "--suite", "fast", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["outputs"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 9);
    let failed: Vec<u64> = v["outputs"]["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    // The radius estimate criterion is known to fail; everything else passes.
    assert_eq!(failed, vec![9]);
    assert_eq!(out.status.code(), Some(1));
}
