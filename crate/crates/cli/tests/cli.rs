use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
name = "demo"
k = [1, 2]
oracle = true

[model]
family = "single-z"
n = 2

[initial_state]
kind = "plus-product"

[integrator]
dt = 0.01
t_final = 1.0

[[observables]]
name = "x"
pauli = "X0"
"#;

fn qas(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qas"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QAS_OUT_DIR")
        .output()
        .unwrap()
}

#[test]
fn run_writes_csv_and_metadata_per_order() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("demo.toml"), CONFIG).unwrap();
    let out = qas(&["run", "demo.toml", "--out", "results"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for k in [1, 2] {
        let csv =
            std::fs::read_to_string(dir.path().join(format!("results/demo_K{k}.csv"))).unwrap();
        let header = csv.lines().next().unwrap();
        assert!(header.starts_with("t,"), "{header}");
        assert!(
            header.contains("fidelity") && header.contains("exact_x"),
            "{header}"
        );
        // 100 steps plus the initial row
        assert_eq!(csv.lines().count(), 1 + 101);
        let meta =
            std::fs::read_to_string(dir.path().join(format!("results/demo_K{k}.json"))).unwrap();
        let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
        assert_eq!(meta["k"], k);
    }
}

#[test]
fn output_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("demo.toml"), CONFIG).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qas"))
        .args(["run", "demo.toml", "--set", "k=1"])
        .current_dir(dir.path())
        .env("QAS_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("from-env/demo_K1.csv").exists());
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = CONFIG.replace("dt = 0.01", "dt = -0.01");
    std::fs::write(dir.path().join("bad.toml"), bad).unwrap();
    let out = qas(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("integrator.dt"), "{stderr}");
    assert!(!dir.path().join("qas-out").exists());

    let out = qas(
        &["run", "demo.toml", "--set", "integrator.method=midpoint"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = qas(&["preset", "no-such-preset"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn presets_are_listed_and_printable() {
    let dir = tempfile::tempdir().unwrap();
    let out = qas(&["list-presets"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 8);
    assert!(text.contains("quench-xxz"));
    let out = qas(
        &[
            "preset",
            "fig2a-single-qubit",
            "--print",
            "--set",
            "integrator.dt=0.002",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let printed = String::from_utf8_lossy(&out.stdout);
    assert!(printed.contains("dt = 0.002"), "{printed}");
}
