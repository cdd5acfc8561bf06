use std::process::Command;

fn hierobs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hierobs"))
}

#[test]
fn run_writes_csv_config_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = hierobs()
        .args([
            "run",
            "--duration",
            "0.5",
            "--feed",
            "true",
            "--omega-dot",
            "analytic",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["run.csv", "config.toml", "qe_norm.svg", "xe_metric.svg"] {
        assert!(dir.path().join(name).metadata().unwrap().len() > 0, "{name}");
    }
    let saved = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(
        saved.contains("duration = 0.5") && saved.contains("feed = \"true\""),
        "{saved}"
    );
}

#[test]
fn synth_prints_table_gains() {
    let out = hierobs().arg("synth").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[64.0, 48.0, 12.0]"), "{text}");
}

#[test]
fn invalid_flags_fail_with_a_message() {
    let out = hierobs().args(["run", "--dt=-1", "--no-plots"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim.dt"));
}
