use std::fs;

use hierobs_harness::config::FeedMode;
use hierobs_harness::metrics::{attitude_threshold, first_crossing};
use hierobs_harness::output::{emit_csv, emit_truth_csv, load_csv, plot_attitude_error, plot_translation_error};
use hierobs_harness::sim::truth_stream;
use hierobs_harness::{run_simulation, RunConfig};

fn short_config(duration: f64) -> RunConfig {
    let mut cfg = RunConfig::table1();
    cfg.sim.duration = duration;
    cfg
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let rec = run_simulation(&short_config(0.3)).unwrap();
    let path = dir.path().join("nested/run.csv");
    emit_csv(&rec, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), rec);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for feed in [FeedMode::Estimated, FeedMode::True] {
        let mut cfg = short_config(1.0);
        cfg.sim.feed = feed;
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_csv(&run_simulation(&cfg).unwrap(), &a).unwrap();
        emit_csv(&run_simulation(&cfg).unwrap(), &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}

#[test]
fn randomized_runs_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short_config(0.2);
    cfg.sim.randomize_init = true;
    cfg.sim.seed = 7;
    let paths: Vec<_> = ["a.csv", "b.csv"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        emit_csv(&run_simulation(&cfg).unwrap(), p).unwrap();
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
    cfg.sim.seed = 8;
    emit_csv(&run_simulation(&cfg).unwrap(), &paths[1]).unwrap();
    assert_ne!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn table_run_writes_both_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(2.0);
    let rec = run_simulation(&cfg).unwrap();
    let line = attitude_threshold(cfg.analysis.gyro_bias_bound, cfg.gains.c1);
    let (qe, xe) = (dir.path().join("qe.svg"), dir.path().join("xe.svg"));
    plot_attitude_error(&rec, &qe, line, first_crossing(&rec, line)).unwrap();
    plot_translation_error(&rec, &xe).unwrap();
    for p in [qe, xe] {
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("<svg") && text.len() > 1000, "{}", p.display());
    }
}

#[test]
fn truth_csv_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(0.1);
    let rows = truth_stream(&cfg).unwrap();
    let path = dir.path().join("truth.csv");
    emit_truth_csv(&rows, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), cfg.steps() + 2);
    assert!(text.starts_with("t,p_x,p_y,p_z,"));
}

#[test]
fn bad_output_path_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let rec = run_simulation(&short_config(0.01)).unwrap();
    let err = emit_csv(&rec, &blocker.join("run.csv")).unwrap_err();
    assert!(err.to_string().contains("file"), "{err}");
}
