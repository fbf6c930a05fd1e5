use std::fs;
use std::path::Path;
use std::process::Command;

const SMALL: &str = r#"
[region]
outer = { x0 = 0.0, y0 = 0.0, x1 = 4.0, y1 = 4.0 }
spacing = 0.2

[[workload]]
amplitude = 3.0
center = [1.0, 3.0]
width = 0.5

[[workload]]
amplitude = 2.0
center = [3.0, 1.0]
width = 0.5

[agents]
positions = [[0.5, 0.5], [3.5, 3.5]]
speed = 0.5
kernel = { P = 6.0, lambda = 1.0, r = 0.5 }

[mission]
t_u = 20.0
k_max = 3
max_steps = 20000

[output]
rasters = true
"#;

fn heatcov() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatcov"))
}

fn write_scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_accepts_bundled_and_rejects_missing() {
    let ok = heatcov().args(["validate", "--config", "paper_fig3"]).output().unwrap();
    assert!(ok.status.success());
    let missing = heatcov().args(["validate", "--config", "/no/such/file.toml"]).output().unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));
}

#[test]
fn typo_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), &SMALL.replace("spacing = 0.2", "spacign = 0.2"));
    let out = heatcov().args(["validate", "--config", &cfg]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spacign") && err.contains("line 4"), "{err}");
}

#[test]
fn run_all_prints_three_summaries_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = heatcov()
        .args(["run", "--config", &cfg, "--algo", "all", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    for (line, name) in lines.iter().zip(["centralized", "algo1", "algo3"]) {
        assert!(line.starts_with(name) && line.contains("T*=") && line.contains("dT="), "{line}");
    }
    for name in ["algo3_summary.json", "algo3_curve.csv", "algo3_trajectory.csv", "algo3_partition_k1.csv", "algo1_workload_final.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let curve = fs::read_to_string(out_dir.join("algo3_curve.csv")).unwrap();
    assert!(curve.starts_with("t,k,M_total,M_per_agent_1,M_per_agent_2\n"));
    let partition = fs::read_to_string(out_dir.join("algo1_partition_k1.csv")).unwrap();
    assert_eq!(partition.lines().count(), 20);
}

#[test]
fn compare_writes_table_with_shared_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL);
    let out_dir = dir.path().join("cmp");
    let out = heatcov().args(["compare", "--config", &cfg, "--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let mut rd = csv::Reader::from_path(out_dir.join("compare.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[3] == rows[0][3]));
}

#[test]
fn empty_workload_compares_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.split("[[workload]]").next().unwrap().to_string() + &SMALL[SMALL.find("[agents]").unwrap()..];
    let cfg = write_scenario(dir.path(), &text);
    let out_dir = dir.path().join("cmp");
    let out = heatcov().args(["compare", "--config", &cfg, "--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let mut rd = csv::Reader::from_path(out_dir.join("compare.csv")).unwrap();
    for r in rd.records() {
        assert_eq!(&r.unwrap()[1], "0");
    }
}

#[test]
fn unfinished_run_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), &SMALL.replace("max_steps = 20000", "max_steps = 5"));
    let out = heatcov()
        .args(["run", "--config", &cfg, "--algo", "1", "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("incomplete"));
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL);
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = heatcov().args(["run", "--config", &cfg, "--algo", "3", "--out", out.to_str().unwrap()]).status().unwrap();
        assert!(status.success());
        out
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["algo3_summary.json", "algo3_curve.csv", "algo3_trajectory.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}
