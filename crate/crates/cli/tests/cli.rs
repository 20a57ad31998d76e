use std::path::Path;
use std::process::{Command, Output};
use theta_extremal::measure::DiscreteMeasure;
use theta_extremal::sphere::{make_configuration, ConfigurationKind, Dimension, SpherePoint};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_theta-extremal"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_measure(dir: &Path, name: &str, m: &DiscreteMeasure) -> String {
    let path = dir.join(name);
    std::fs::write(&path, m.to_json().unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_reports_gap_to_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["theta", "solve", "--n", "2", "--m", "2", "--theta", "0.5", "--support", "8", "--restarts", "20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    assert!(line.starts_with("theta(2,0.5,2) ≤ "), "{line}");
    let v = json(&dir.path().join("theta_report.json"));
    assert!(v["result"]["report"]["gap"].as_f64().unwrap().abs() < 1e-2);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config"]["solver"]["restarts"], 20);
    assert!(v["version"].is_string() && v["timestamp"]["wall_clock_seconds"].is_number());
}

#[test]
fn open_case_reports_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["theta", "solve", "--n", "2", "--m", "4", "--theta", "0.5", "--support", "12", "--restarts", "4", "--out", "m4.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("closed form unknown"));
    assert!(json(&dir.path().join("m4.json"))["result"]["report"]["conjectural"].as_bool().unwrap());
}

#[test]
fn missing_theta_is_a_config_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["theta", "solve", "--n", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    let o = run(dir.path(), &["theta", "solve", "--n", "2", "--m", "2", "--theta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["theta", "solve", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infeasible_support_is_non_convergence() {
    // two atoms cannot carry a measure in M_2^c on S^2
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["theta", "solve", "--n", "2", "--m", "2", "--theta", "0.5", "--support", "2", "--restarts", "2", "--max-outer-iters", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&dir.path().join("theta_report.json"));
    assert_eq!(v["result"]["report"]["converged"], false);
}

#[test]
fn support_sweep_covers_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["theta", "solve", "--n", "1", "--m", "2", "--theta", "0.5", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("theta_report.json"));
    let sizes: Vec<u64> =
        v["result"]["support_sweep"].as_array().unwrap().iter().map(|t| t["support_size"].as_u64().unwrap()).collect();
    assert_eq!(sizes, (3..=6).collect::<Vec<u64>>());
    assert!(v["config"]["support"].is_null());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "n = 3\nm = 1\ntheta = 0.25\nsupport = 6\nrestarts = 5\nseed = 3\nout = \"cfg.json\"\n").unwrap();
    let o = run(dir.path(), &["--config", "run.toml", "theta", "solve", "--theta", "0.75"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("cfg.json"));
    assert_eq!(v["config"]["theta"], 0.75);
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["solver"]["restarts"], 5);

    std::fs::write(dir.path().join("bad.toml"), "n = 3\nbogus = 1\n").unwrap();
    let o = run(dir.path(), &["--config", "bad.toml", "theta", "closed-form", "--m", "1", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("typed.toml"), "n = \"three\"\n").unwrap();
    let o = run(dir.path(), &["--config", "typed.toml", "theta", "closed-form", "--m", "1", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["--config", "absent.toml", "theta", "closed-form", "--m", "1", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_simplex_roots_and_refusals() {
    let dir = tempfile::tempdir().unwrap();
    let simplex = DiscreteMeasure::uniform(make_configuration(&ConfigurationKind::Simplex, Dimension::new(3).unwrap(), Some(4)).unwrap()).unwrap();
    let f = write_measure(dir.path(), "simplex.json", &simplex);
    let o = run(dir.path(), &["certify", "--measure", &f, "--m", "2", "--theta", "0.5", "--out", "cert.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certified"));
    let v = json(&dir.path().join("cert.json"));
    assert!((v["result"]["lower_bound"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);

    let roots = DiscreteMeasure::uniform(
        make_configuration(&ConfigurationKind::RootsOfUnity { count: 4, alpha: 0.3 }, Dimension::new(1).unwrap(), None).unwrap(),
    )
    .unwrap();
    let f = write_measure(dir.path(), "roots.json", &roots);
    let o = run(dir.path(), &["certify", "--measure", &f, "--m", "3", "--out", "roots_cert.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("roots_cert.json"));
    assert!(v["result"]["deviation"].as_f64().unwrap() < 1e-12);

    let lopsided = DiscreteMeasure::new(
        vec![SpherePoint::basis(2, 0), SpherePoint::basis(2, 1), SpherePoint::basis(2, 2), SpherePoint::basis(2, 0).neg()],
        vec![0.4, 0.2, 0.2, 0.2],
    )
    .unwrap();
    let f = write_measure(dir.path(), "bad.json", &lopsided);
    let o = run(dir.path(), &["certify", "--measure", &f, "--m", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("refused"));
    assert!(stdout(&o).contains("deviation"));

    std::fs::write(dir.path().join("garbage.json"), "{\"n\": 2, \"points\": [[1, 0, 0]]}").unwrap();
    let o = run(dir.path(), &["certify", "--measure", "garbage.json", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constants() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["const", "sobolev", "--n", "3", "--p", "2"]);
    assert!(stdout(&o).contains("4.27260542862526"));
    assert!(stdout(&o).contains("cross-check"));
    let o = run(dir.path(), &["const", "improved", "--n", "3", "--p", "2", "--m", "2"]);
    assert!(stdout(&o).contains("6.24317592542221"));
    let o = run(dir.path(), &["const", "biharmonic", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["const", "improved", "--n", "3", "--p", "2", "--m", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bubble_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bubble", "sweep", "--n", "2", "--p", "1.5", "--eps", "1e-2,1e-3,1e-4", "--out", "s.csv", "--report", "s.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "eps,I_pstar,I_p,I_grad,moment_residual,R,target,rel_err");
    let rel: Vec<f64> = lines.map(|l| l.split(',').nth(7).unwrap().parse().unwrap()).collect();
    assert_eq!(rel.len(), 3);
    assert!(rel.windows(2).all(|w| w[1] < w[0]));
    let v = json(&dir.path().join("s.json"));
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 3);

    let o = run(dir.path(), &["bubble", "sweep", "--n", "2", "--p", "1.5", "--eps", "1e-3,1e-2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["bubble", "sweep", "--n", "5", "--p", "2", "--eps", "1e-3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["bubble", "identity-check", "--n", "3", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn schema_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["config", "print-schema"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.as_array().unwrap().iter().any(|c| c["command"] == "bubble sweep"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["theta", "solve", "--n", "2", "--m", "2", "--theta", "0.4", "--support", "7", "--restarts", "6", "--seed", "9"];
    let strip = |name: &str| {
        let mut v = json(&dir.path().join(name));
        v.as_object_mut().unwrap().remove("timestamp");
        v["config"]["out"] = serde_json::Value::Null;
        v
    };
    let one = bin().current_dir(dir.path()).env("THETA_EXTREMAL_THREADS", "1").args(args).args(["--out", "a.json"]).output().unwrap();
    let four = bin().current_dir(dir.path()).env("THETA_EXTREMAL_THREADS", "4").args(args).args(["--out", "b.json"]).output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(strip("a.json"), strip("b.json"));
    let bad = bin().current_dir(dir.path()).env("THETA_EXTREMAL_THREADS", "lots").args(args).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
