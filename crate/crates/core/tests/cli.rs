use std::process::{Command, Output};

fn bohr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bohr")).args(args).env_remove("BOHR_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(o.stdout.as_slice())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn psi_table_has_one_row_per_cutoff() {
    let o = bohr(&["radii", "--family", "psi", "--N", "1..3", "--n", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows[0], ["family", "n", "N", "a0", "x", "r", "width"]);
    assert_eq!(rows.len(), 4);
    let x: f64 = rows[1][4].parse().unwrap();
    assert!((x - 0.236068).abs() < 1e-6);
    let xs: Vec<f64> = rows[1..].iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn quartic_and_closed_radii() {
    let q = bohr(&["radii", "--family", "quartic", "--format", "csv"]);
    let x: f64 = csv_rows(&q)[1][4].parse().unwrap();
    assert!((x - 0.385795).abs() < 5e-6);
    let r = bohr(&["radii", "--family", "r-a0", "--a0", "0"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("0.381966011250"), "{}", stdout(&r));
}

#[test]
fn radii_over_dimensions_and_a0_grids() {
    let o = bohr(&["radii", "--family", "cubic-a0", "--n", "1..2", "--a0", "0:0.25:0.5", "--format", "jsonl"]);
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    for l in &lines {
        let n = l["n"].as_f64().unwrap();
        assert!((l["r"].as_f64().unwrap() - l["x"].as_f64().unwrap() / n).abs() < 1e-15);
    }
}

#[test]
fn radii_rejects_bad_configuration() {
    assert_eq!(bohr(&["radii", "--N", "3..1"]).status.code(), Some(2));
    assert_eq!(bohr(&["radii", "--tol", "1e-16"]).status.code(), Some(2));
    assert_eq!(bohr(&["radii", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(bohr(&["radii", "--family", "psi", "--N", "0"]).status.code(), Some(2));
}

#[test]
fn verify_below_passes() {
    let o = bohr(&["verify", "--theorem", "2.1a", "--n", "2", "--N", "2", "--eps", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS"));
}

#[test]
fn verify_sharp_reports_a_witness() {
    let o = bohr(&["verify", "--theorem", "2.1a", "--sharp", "--eps", "1e-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness a="));
}

#[test]
fn verify_series_path_agrees() {
    let closed = bohr(&["verify", "--theorem", "2.3j", "--n", "2", "--format", "jsonl"]);
    let series =
        bohr(&["verify", "--theorem", "2.3j", "--n", "2", "--path", "series", "--K", "40", "--format", "jsonl"]);
    assert_eq!(closed.status.code(), Some(0));
    assert_eq!(series.status.code(), Some(0));
    let values = |o: &Output| -> Vec<f64> {
        stdout(o)
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["value"].as_f64().unwrap())
            .collect()
    };
    for (c, s) in values(&closed).iter().zip(values(&series)) {
        assert!((c - s).abs() < 1e-8, "{c} vs {s}");
    }
}

#[test]
fn unknown_tag_and_bad_parameters_exit_2() {
    assert_eq!(bohr(&["verify", "--theorem", "bogus"]).status.code(), Some(2));
    assert_eq!(bohr(&["verify", "--theorem", "2.2a", "--a0", "1.5"]).status.code(), Some(2));
    assert_eq!(bohr(&["verify", "--theorem", "2.1a", "--eps", "0.7"]).status.code(), Some(2));
    assert_eq!(bohr(&["verify", "--theorem", "2.1a", "--N", "0"]).status.code(), Some(2));
    let env = Command::new(env!("CARGO_BIN_EXE_bohr"))
        .args(["verify", "--theorem", "lemma1"])
        .env("BOHR_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn failing_sharpness_exits_1() {
    // fixed |a₀| sharpness does not hold in two variables
    let o = bohr(&["verify", "--theorem", "2.2a", "--n", "2", "--a0", "0.5", "--sharp"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn structured_output_fields_and_files() {
    let dir = std::env::temp_dir().join(format!("bohr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.jsonl");
    let o = bohr(&["verify", "--theorem", "2.4m", "--N", "3", "--format", "jsonl", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 11);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["N", "a0", "bound", "check", "n", "tail", "theorem", "value", "verdict", "x"]);
    }
    let csv_path = dir.join("report.csv");
    bohr(&["verify", "--theorem", "2.4m", "--N", "3", "--format", "csv", "--output", csv_path.to_str().unwrap()]);
    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv_text.starts_with("theorem,check,n,N,a0,x,value,tail,bound,verdict\n"));
    assert!(!csv_text.contains('\r'));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seeded_runs_are_byte_identical() {
    for args in [
        ["verify", "--theorem", "lemma1", "--n", "2", "--seed", "7", "--samples", "8", "--format", "csv"],
        ["verify", "--theorem", "2.1a", "--n", "2", "--N", "2", "--seed", "7", "--format", "jsonl"],
    ] {
        let (a, b) = (bohr(&args), bohr(&args));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stderr, b.stderr);
        assert!(!a.stdout.is_empty());
    }
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_bohr"))
            .args(["verify", "--theorem", "lemma1", "--n", "1", "--samples", "4", "--format", "csv"])
            .env("BOHR_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(with_env("3"), with_env("3"));
    assert_ne!(with_env("3"), with_env("4"));
}

#[test]
fn sweep_covers_the_grid_in_order() {
    let o = bohr(&["sweep", "--theorem", "2.1b", "--n", "1..2", "--N", "1..2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1 + 4 * 11);
    let keys: Vec<(String, String)> = rows[1..].iter().map(|r| (r[2].clone(), r[3].clone())).collect();
    assert_eq!(keys[0], ("1".into(), "1".into()));
    assert_eq!(keys[11], ("1".into(), "2".into()));
    assert_eq!(keys[22], ("2".into(), "1".into()));
}

#[test]
fn series_dump_examples() {
    let linear = bohr(&["series-dump", "--a", "0", "--n", "2", "--K", "1"]);
    assert_eq!(linear.status.code(), Some(0));
    assert_eq!(stdout(&linear), "alpha,re,im\n\"1,0\",-1,0\n\"0,1\",-1,0\n");

    let one = bohr(&["series-dump", "--a", "0.5", "--n", "1", "--K", "3"]);
    let rows = csv_rows(&one);
    let re: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(re, [0.5, -0.75, -0.375, -0.1875]);

    let constant = bohr(&["series-dump", "--a", "0.3", "--form", "plus", "--K", "0"]);
    assert_eq!(stdout(&constant), "alpha,re,im\n0,0.3,0\n");

    assert_eq!(bohr(&["series-dump", "--a", "1.0", "--K", "2"]).status.code(), Some(2));
    assert_eq!(bohr(&["series-dump", "--a", "0.5", "--form", "sideways", "--K", "2"]).status.code(), Some(2));
}
