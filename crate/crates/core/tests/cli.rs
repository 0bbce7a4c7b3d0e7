use std::process::{Command, Output};

fn barylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_barylab"))
        .args(args)
        .env_remove("BARYLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn column(o: &Output, col: usize) -> Vec<String> {
    stdout(o).lines().skip(1).map(|l| l.split(',').nth(col).unwrap().to_string()).collect()
}

fn value(o: &Output, key: &str) -> f64 {
    let text = stdout(o);
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("{key} missing in {text}"));
    line.rsplit('=').next().unwrap().trim().parse().unwrap()
}

#[test]
fn nodes_and_weights_for_n_two() {
    let o = barylab(&["nodes", "--n", "2"]);
    assert!(o.status.success());
    let xs: Vec<f64> = column(&o, 1).iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
    let o = barylab(&["weights", "--n", "2", "--kind", "salzer"]);
    let ws: Vec<f64> = column(&o, 1).iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(ws, vec![0.5, -1.0, 0.5]);
    let o = barylab(&["weights", "--n", "4", "--kind", "numerical"]);
    assert!(o.status.success());
    assert_eq!(column(&o, 2).len(), 5);
}

#[test]
fn perturbed_nodes_are_reproducible() {
    let a = barylab(&["nodes", "--n", "8", "--perturb", "1e-6", "--seed", "3"]);
    let b = barylab(&["nodes", "--n", "8", "--perturb", "1e-6", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, barylab(&["nodes", "--n", "8"]).stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(barylab(&["nodes", "--n", "0"]).status.code(), Some(1));
    assert_eq!(barylab(&["lebesgue", "--n", "10", "--grid", "1"]).status.code(), Some(1));
    assert_eq!(barylab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(barylab(&["table", "--n", "11", "--trials", "1"]).status.code(), Some(1));
    assert_eq!(barylab(&["table", "--n", "20000"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_barylab"))
        .args(["nodes", "--n", "2"])
        .env("BARYLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(barylab(&["--help"]).status.code(), Some(0));
}

#[test]
fn lebesgue_estimates() {
    let o = barylab(&["lebesgue", "--n", "100"]);
    assert!(o.status.success());
    let est = value(&o, "estimate");
    assert!(est > 3.8 && est <= 4.140, "{est}");
    let o = barylab(&["lebesgue", "--n", "1", "--kind", "numerical"]);
    assert!(o.status.success());
    assert!((value(&o, "estimate") - 1.0).abs() < 1e-12);
}

#[test]
fn table_writes_csv_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("salzer.csv");
    let p = path.to_str().unwrap();
    let o = barylab(&["--threads", "2", "table", "--n", "20,40,100", "--kind", "salzer", "--out", p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,beta,zeta_inf,ratio,beta_over_eps_n,zeta_over_eps_n,beta_over_eps_n2,zeta_over_eps_n2"
    );
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 100.0);
    assert!(last[1] > 1.8e-13 / 4.0 && last[1] < 1.8e-13 * 4.0, "{last:?}");

    let o = barylab(&["fit", "--input", p, "--column", "zeta"]);
    assert!(o.status.success());
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(fit["slope"].as_f64().unwrap() > 1.0);
}

#[test]
fn table_default_list_has_twelve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = barylab(&["table", "--trials", "1", "--kind", "numerical", "--out", path.to_str().unwrap()]);
    // A single trial point per node may break the ratio law, which exits with 2.
    assert!(matches!(o.status.code(), Some(0 | 2)));
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 13);
}

#[test]
fn table_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = barylab(&["table", "--n", "100", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    let run = &v["runs"][0];
    assert!(!run["results"][0]["pair_maxima"].as_array().unwrap().is_empty());
    assert!(!run["results"][0]["certificates"].as_array().unwrap().is_empty());
}

#[test]
fn missing_output_directory_is_an_error() {
    let o = barylab(&["table", "--n", "10", "--trials", "1", "--out", "/nonexistent/dir/t.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
}

#[test]
fn bounds_analytic_and_measured() {
    let o = barylab(&["bounds", "--n", "100", "--kind", "salzer"]);
    assert!(o.status.success());
    assert!((value(&o, "corollary") / 6.472e-11 - 1.0).abs() < 1e-3);
    assert!(value(&o, "beta") <= value(&o, "corollary"));
    let o = barylab(&["bounds", "--n", "100", "--kind", "numerical"]);
    assert!((value(&o, "corollary") / 4.423e-13 - 1.0).abs() < 1e-3);
    let o = barylab(&["bounds", "--n", "100", "--measured"]);
    assert!(o.status.success());
    assert!(value(&o, "beta") < 6.472e-11);
    assert_eq!(barylab(&["bounds", "--n", "100", "--eps", "0.1"]).status.code(), Some(1));
    assert_eq!(barylab(&["bounds", "--n", "100", "--measured", "--eps", "0.01"]).status.code(), Some(1));
}

#[test]
fn certificate_search() {
    let o = barylab(&["certificate", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with("true")));
    assert!(stdout(&o).lines().count() >= 2);
}
