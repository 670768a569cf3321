use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_toric-ci");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn sweep_csv_is_identical_across_worker_counts() {
    let args = ["sweep", "--quantity", "ci", "--l", "4", "--p", "0.05,0.12", "--samples", "64", "--seed", "9"];
    let one = Command::new(BIN).args(args).env("TORIC_CI_WORKERS", "1").output().unwrap();
    let four = Command::new(BIN).args(args).env("TORIC_CI_WORKERS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let again = run(&args);
    assert_eq!(one.stdout, again.stdout);
}

#[test]
fn renyi2_sweep_has_one_row_per_point() {
    let out = run(&["sweep", "--quantity", "renyi2", "--l", "4,8", "--p", "0.1:0.2:9"]);
    assert!(out.status.success());
    let header = String::from_utf8_lossy(&out.stdout).lines().next().unwrap().to_owned();
    assert_eq!(header, "quantity,lx,ly,p,mean,std_err,n_samples,n_clamped,seed");
    let rows = rows(&out);
    assert_eq!(rows.len(), 18);
    for r in &rows {
        assert_eq!(r[0], "renyi2");
        assert!(r[4].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn mstop_is_minus_one_deep_in_the_ordered_phase() {
    let out = run(&["sweep", "--quantity", "mstop", "--l", "4", "--p", "0.01", "--samples", "200"]);
    assert!(out.status.success());
    let mean: f64 = rows(&out)[0][4].parse().unwrap();
    assert!(mean < -0.9, "mean {mean}");
}

#[test]
fn json_output_carries_rows_and_config() {
    let out = run(&["sweep", "--quantity", "renyi2", "--l", "4", "--p", "0.1", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "sweep");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
    assert_eq!(doc["rows"][0]["lx"], 4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["sweep", "--quantity", "ci"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--quantity", "ci", "--l", "4", "--p", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "fast"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "fast", "--mutate-intra-cell"]).status.code(), Some(3));
    let no_bracket = run(&[
        "threshold", "--quantity", "renyi2", "--l", "4", "--p-lo", "0.02", "--p-hi", "0.05",
    ]);
    assert_eq!(no_bracket.status.code(), Some(2));
}

#[test]
fn renyi2_threshold_matches_self_dual_rate() {
    let out = run(&["threshold", "--quantity", "renyi2", "--l", "4", "--p-lo", "0.1", "--p-hi", "0.3", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let text = doc.to_string();
    let est = find_number(&doc, "estimate").unwrap_or_else(|| panic!("no estimate in {text}"));
    assert!((est - toric_ci::spin_oracle::self_dual_rate()).abs() < 1e-3);
}

fn find_number(v: &serde_json::Value, key: &str) -> Option<f64> {
    match v {
        serde_json::Value::Object(m) => m
            .get(key)
            .and_then(serde_json::Value::as_f64)
            .or_else(|| m.values().find_map(|x| find_number(x, key))),
        serde_json::Value::Array(a) => a.iter().find_map(|x| find_number(x, key)),
        _ => None,
    }
}

#[test]
fn spectrum_is_particle_hole_symmetric() {
    let out = run(&["spectrum", "--l", "4", "--t", "0.2,0.4"]);
    assert!(out.status.success());
    for r in rows(&out) {
        let lam: Vec<f64> = r[1..].iter().map(|x| x.parse().unwrap()).collect();
        assert_eq!(lam.len(), 64);
        for (a, b) in lam.iter().zip(lam.iter().rev()) {
            assert!((a + b).abs() < 1e-10);
        }
    }
}

#[test]
fn stabilizer_single_qubit_closed_form() {
    let out = run(&["stabilizer-ci", "--code", "single", "--channel", "bitflip+phase", "--p", "0.1"]);
    assert!(out.status.success());
    let got: f64 = rows(&out)[0][4].parse().unwrap();
    let p: f64 = 0.1;
    let h = p * p.log2() + (1.0 - p) * (1.0 - p).log2();
    assert!((got - (1.0 + 2.0 * h)).abs() < 1e-12);
}

#[test]
fn stabilizer_crossing_goes_to_stderr() {
    let out = run(&[
        "stabilizer-ci", "--code", "single,surface-3", "--channel", "depolarizing", "--p", "0.1,0.3", "--crossing",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p = 0.186"), "{err}");
}

#[test]
fn stabilizer_code_from_fixture_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rep.code");
    std::fs::write(&path, toric_ci::stabilizer_oracle::rotated_surface(3).unwrap().to_fixture()).unwrap();
    let code_arg = format!("file:{}", path.display());
    let from_file = run(&["stabilizer-ci", "--code", &code_arg, "--channel", "bitflip", "--p", "0.07"]);
    let builtin = run(&["stabilizer-ci", "--code", "surface-3", "--channel", "bitflip", "--p", "0.07"]);
    assert!(from_file.status.success());
    assert_eq!(rows(&from_file)[0][4], rows(&builtin)[0][4]);

    std::fs::write(&path, "name broken\nn 2\nstabilizers\n10|00\n").unwrap();
    assert_eq!(run(&["stabilizer-ci", "--code", &code_arg, "--channel", "bitflip", "--p", "0.1"]).status.code(), Some(1));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&["sweep", "--quantity", "renyi2", "--l", "2", "--p", "0.1", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
}
