use std::fs;

use ccq::harness::{config_hash, fit_rows, fit_scaling, read_rows, resume_path, sweep, CsvRow, ExperimentConfig, FitAxis};

const CONFIG: &str = r#"
schema_version = 1
eps = 0.1
delta = 0.1
trials = 50
seed = 12

[space]
kind = "thresholds"
grid = 60

[noise]
kind = "realizable"

[learner]
algorithm = "agnostic"

[sweep]
eps = [0.1, 0.15, 0.2]
noise = [0.0, 0.01]
"#;

#[test]
fn sweep_writes_trial_and_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let summaries = sweep(&cfg, &out).unwrap();
    assert_eq!(summaries.len(), 6);
    let rows = read_rows(&out).unwrap();
    assert_eq!(rows.iter().filter(|r| r.row_type == "trial").count(), 300);
    assert_eq!(rows.iter().filter(|r| r.row_type == "summary").count(), 6);
    assert!(rows.iter().all(|r| r.schema_version == 1));
    // each summary follows its cell's trials
    for (i, chunk) in rows.chunks(51).enumerate() {
        assert!(chunk[..50].iter().all(|r| r.cell == i && r.row_type == "trial"));
        assert_eq!(chunk[50].row_type, "summary");
        assert_eq!(chunk[50].trials, Some(50));
    }
    assert!(!resume_path(&out).exists());
}

#[test]
fn same_config_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    sweep(&cfg, &a).unwrap();
    sweep(&cfg, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let mut other = cfg.clone();
    other.seed += 1;
    sweep(&other, &b).unwrap();
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn resume_continues_after_the_last_finished_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let full = dir.path().join("full.csv");
    sweep(&cfg, &full).unwrap();
    let bytes = fs::read(&full).unwrap();

    // keep the header and the first two cells, then append a torn line
    let lines_kept = 1 + 2 * 51;
    let cut = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .nth(lines_kept - 1)
        .map(|(i, _)| i + 1)
        .unwrap();
    let partial = dir.path().join("partial.csv");
    let mut torn = bytes[..cut].to_vec();
    torn.extend_from_slice(b"1,trial,2,0,99,agn");
    fs::write(&partial, torn).unwrap();
    let marker = format!(
        "config_hash = {}\ncells_done = 2\nbytes = {cut}\n",
        config_hash(&cfg).unwrap()
    );
    fs::write(resume_path(&partial), marker).unwrap();

    let summaries = sweep(&cfg, &partial).unwrap();
    assert_eq!(summaries.iter().map(|s| s.cell).collect::<Vec<_>>(), vec![2, 3, 4, 5]);
    assert_eq!(fs::read(&partial).unwrap(), bytes);
    assert!(!resume_path(&partial).exists());
}

#[test]
fn marker_for_another_config_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let out = dir.path().join("o.csv");
    fs::write(&out, "junk").unwrap();
    fs::write(resume_path(&out), "config_hash = 1\ncells_done = 5\nbytes = 2\n").unwrap();
    assert_eq!(sweep(&cfg, &out).unwrap().len(), 6);
    assert_eq!(read_rows(&out).unwrap().len(), 306);
}

#[test]
fn fit_recovers_power_law_from_rows() {
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    sweep(&cfg, &out).unwrap();
    let mut rows: Vec<CsvRow> = read_rows(&out).unwrap();
    for r in rows.iter_mut().filter(|r| r.row_type == "trial") {
        let x = 1.0 / r.eps;
        r.ccq_count = Some((3.0 * x.powf(1.5)).round() as u64);
    }
    let f = fit_rows(&rows, FitAxis::InvEps, 200, 1).unwrap();
    assert!((f.slope - 1.5).abs() < 0.02, "slope {}", f.slope);
    assert_eq!(f.points.len(), 3);

    // the real counts only need to fit without error
    assert!(fit_scaling(&out, FitAxis::InvEps, 50, 1).unwrap().slope.is_finite());
}

#[test]
fn bad_configs_are_rejected() {
    for bad in [
        CONFIG.replace("schema_version = 1", "schema_version = 2"),
        CONFIG.replace("trials = 50", "trials = 0"),
        CONFIG.replace("eps = [0.1, 0.15, 0.2]", "eps = []"),
        CONFIG.replace("eps = 0.1\n", "eps = 1.5\n"),
        CONFIG.replace("seed = 12", "seed = 12\nunknown = 3"),
    ] {
        assert!(ExperimentConfig::from_toml(&bad).is_err(), "accepted:\n{bad}");
    }
}
