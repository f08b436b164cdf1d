use std::path::Path;
use std::process::{Command, Output};

const HERMITIAN: &str = r#"
[model]
kind = "generic"
n_qubits = 1
terms = ["1.0 X"]
initial_state = "0"
observable = { terms = ["1.0 Z"] }

[kernel]
family = "cauchy"
eps = 0.01

[propagator]
method = "continuous"

[sampling]
delta = 0.05
eta = 0.1

[times]
t_start = 0.0
t_end = 1.0
points = 2
"#;

const DISSIPATIVE: &str = r#"
seed = 5

[model]
kind = "generic"
n_qubits = 2
terms = ["1.0 XI", "0.5 ZZ", "0.0-0.4i ZI"]
initial_state = "00"
observable = { terms = ["1.0 ZI", "0.5 XX"] }

[kernel]
family = "beta"
beta = 0.6
eps = 1e-3

[propagator]
methods = ["exact", "trotter1", "qdrift", "continuous"]
dt = 0.05
tau = 0.05

[estimation]
h = 1.0
q = 8

[sampling]
n_numerator = 2000

[times]
t_start = 0.0
t_end = 0.6
points = 4
"#;

fn nhqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhqmc")).args(args).output().expect("spawn nhqmc")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_to(config: &str, out: &Path, extra: &[&str]) -> String {
    let out_s = out.to_string_lossy().into_owned();
    let mut args = vec!["run", "--config", config, "--output", &out_s];
    args.extend_from_slice(extra);
    let o = nhqmc(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().is_some_and(|e| e == "csv")).unwrap();
    std::fs::read_to_string(csv).unwrap()
}

#[test]
fn plan_prints_hoeffding_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.toml", HERMITIAN);
    let o = nhqmc(&["plan", "--config", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("n_numerator     9136"), "{text}");
    assert!(text.contains("k_c             63.65674"), "{text}");
}

#[test]
fn run_writes_header_and_unit_estimate_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", &DISSIPATIVE.replace("points = 4", "points = 1").replace("t_end = 0.6", "t_end = 0.0"));
    let text = run_to(&cfg, &dir.path().join("out"), &[]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,method,estimate,stderr,exact,abs_error,n_samples,seed");
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<f64>().unwrap(), 0.0);
        let (est, se): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        match f[1] {
            "exact" | "trotter1" => assert!((est - 1.0).abs() < 1e-9, "{line}"),
            _ => assert!((est - 1.0).abs() <= 3.0 * se, "{line}"),
        }
        assert_eq!(f[7], "5");
    }
}

#[test]
fn reruns_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", DISSIPATIVE);
    let a = run_to(&cfg, &dir.path().join("a"), &["--workers", "1"]);
    let b = run_to(&cfg, &dir.path().join("b"), &["--workers", "1"]);
    let c = run_to(&cfg, &dir.path().join("c"), &["--workers", "2"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.lines().count(), 1 + 4 * 4);
    let d = run_to(&cfg, &dir.path().join("d"), &["--seed", "6"]);
    assert_ne!(a, d);
}

#[test]
fn method_override_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", DISSIPATIVE);
    let out = dir.path().join("out");
    let text = run_to(&cfg, &out, &["--method", "trotter1", "--svg"]);
    assert!(text.lines().skip(1).all(|l| l.contains(",trotter1,")));
    let svg = std::fs::read_to_string(out.join("d.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("trotter1"));
}

#[test]
fn shots_override_changes_sampled_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", DISSIPATIVE);
    let a = run_to(&cfg, &dir.path().join("a"), &["--method", "qdrift"]);
    let b = run_to(&cfg, &dir.path().join("b"), &["--method", "qdrift", "--shots", "50"]);
    assert_ne!(a, b);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &HERMITIAN.replace("eps = 0.01", "eps = -1.0"));
    let o = nhqmc(&["run", "--config", &bad, "--output", &dir.path().to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let garbled = write(dir.path(), "g.toml", "[model\nkind = 1");
    assert_eq!(nhqmc(&["plan", "--config", &garbled]).status.code(), Some(2));
    assert_eq!(nhqmc(&["plan", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(nhqmc(&["plan"]).status.code(), Some(2));
}

#[test]
fn validate_passes() {
    let o = nhqmc(&["validate"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}
