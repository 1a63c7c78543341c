use std::path::Path;
use std::process::Command;

fn adgt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adgt"))
}

fn config(dir: &Path, body: &str) -> std::path::PathBuf {
    let csv = dir.join("trace.csv");
    let json = dir.join("summary.json");
    let text = format!("{body}\n[output]\ncsv = {:?}\njson = {:?}\n", csv.to_str().unwrap(), json.to_str().unwrap());
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const GD: &str = r#"
[problem]
family = "quadratic"
dim = 1
diag = [1.0]

[solver]
method = "gd"
k_max = 10
x0 = [1.0]
"#;

const AMD_DOUBLED: &str = r#"
seed = 1

[problem]
family = "quadratic"
dim = 2
mu = 1.0
smooth = 4.0

[solver]
method = "amd"
k_max = 50

[schedule]
scale = 2.0
"#;

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = adgt().args(["run", "--config"]).arg(config(dir.path(), GD)).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("k,A,f_xhat,U,L,G,Ed,scaled_gap,theorem_bound\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert!(summary["bound_margin"].as_f64().unwrap() >= 0.0);
}

#[test]
fn invariant_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = adgt().args(["run", "--config"]).arg(config(dir.path(), AMD_DOUBLED)).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("invariant-violation"));
}

#[test]
fn malformed_config_exits_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = config(dir.path(), &GD.replace("k_max = 10", "k_max = \"ten\""));
    let out = adgt().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("trace.csv").exists());
    assert!(!dir.path().join("summary.json").exists());

    let path = config(dir.path(), &GD.replace("method = \"gd\"", "method = \"newton\""));
    assert_eq!(adgt().args(["run", "--config"]).arg(&path).output().unwrap().status.code(), Some(3));
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let body = GD.replace("family = \"quadratic\"\ndim = 1\ndiag = [1.0]", "family = \"huber\"\ndim = 5")
        .replace("method = \"gd\"", "method = \"md\"")
        .replace("k_max = 10\nx0 = [1.0]", "k_max = 200");
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = adgt().args(["run", "--config"]).arg(config(dir.path(), &body)).output().unwrap();
            assert_eq!(out.status.code(), Some(0));
            std::fs::read(dir.path().join("trace.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn rates_reads_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let body = AMD_DOUBLED
        .replace("[schedule]\nscale = 2.0\n", "")
        .replace("k_max = 50", "k_max = 1000")
        .replace("mu = 1.0\nsmooth = 4.0", "diag = [1.0, 4.0]\nb = [1.0, -2.0]");
    let out = adgt().args(["run", "--config"]).arg(config(dir.path(), &body)).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = adgt().args(["rates", "--trace"]).arg(dir.path().join("trace.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = fit["exponent"].as_f64().unwrap();
    assert!((-2.3..=-1.8).contains(&e), "{e}");
}

#[test]
fn verify_filter() {
    let out = adgt().args(["verify", "--filter", "bregman"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("[PASS] 4 bregman/")), "{text}");
    assert_eq!(adgt().args(["verify", "--filter", "nonsense"]).output().unwrap().status.code(), Some(3));
}
