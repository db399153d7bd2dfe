use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tweezer-pca"))
        .args(args)
        .current_dir(dir)
        .env_remove("TWEEZER_PCA_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
}

#[test]
fn certain_fill_reports_zero_moves() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["run", "--L", "6", "--p", "1", "--trials", "1"]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert!(field(&line, "M=").starts_with("0.00±"), "{line}");
    assert_eq!(field(&line, "failure_rate="), "0.0000");
    assert!(dir.path().join("trials.csv").exists());
    assert!(dir.path().join("stats.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--L", "14", "--trials", "300", "--seed", "7", "--schedule-json", "s.json"];
    assert!(cli(dir.path(), &args).status.success());
    let first: Vec<Vec<u8>> = ["trials.csv", "stats.csv", "s.json"]
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).unwrap())
        .collect();
    assert!(cli(dir.path(), &args).status.success());
    for (f, before) in ["trials.csv", "stats.csv", "s.json"].iter().zip(first) {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), before, "{f}");
    }
    let trials = String::from_utf8(std::fs::read(dir.path().join("trials.csv")).unwrap()).unwrap();
    assert_eq!(trials.lines().count(), 301);
}

#[test]
fn saturated_reservoir_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["run", "--L", "14", "--reservoir", "saturated", "--trials", "2"]);
    assert!(o.status.success());
    let line = stdout(&o);
    let r: f64 = field(&line, "r=").parse().unwrap();
    assert!((r - 3.125).abs() < 1e-3, "{line}");
    assert_eq!(field(&line, "Lprime="), "35");
}

#[test]
fn invalid_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sweep", "--grid", "", "--trials", "2"][..],
        &["sweep", "--trials", "2"][..],
        &["run", "--p", "0"][..],
        &["run", "--reservoir", "3", "--L", "6"][..],
        &["run", "--protocol", "warp"][..],
        &["run", "--trials", "0"][..],
    ] {
        let o = cli(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    // Output path under a regular file cannot be created.
    std::fs::write(dir.path().join("blocker"), "x").unwrap();
    let o = cli(dir.path(), &["run", "--L", "4", "--trials", "1", "--trials-csv", "blocker/t.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# small run\nL = 6\ntrials = 3\nout_dir = out\nstats_csv = s.csv\n",
    )
    .unwrap();
    let o = cli(dir.path(), &["run", "--config", "run.cfg", "--L", "4"]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert_eq!(field(&line, "N="), "16");
    assert_eq!(field(&line, "trials="), "3");
    assert!(dir.path().join("out/s.csv").exists());
    assert!(dir.path().join("out/trials.csv").exists());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tweezer-pca"))
        .args(["run", "--L", "4", "--trials", "2"])
        .current_dir(dir.path())
        .env("TWEEZER_PCA_OUT", dir.path().join("envout"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("envout/stats.csv").exists());
}

#[test]
fn sweep_rows_fit_footer_and_refit() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["sweep", "--grid", "6,10,14,22", "--trials", "40"]);
    assert!(o.status.success());
    let stats = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    let rows: Vec<&str> = stats.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    let footer: Vec<&str> = stats.lines().filter(|l| l.starts_with("# fit")).collect();
    assert!(footer[0].starts_with("# fit model=linear_sqrt x=N y=M_mean coefficients="));

    let o = cli(dir.path(), &["fit", "stats.csv", "--x", "N", "--y", "M_mean"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), footer[0].trim_start_matches("# "));
    let o = cli(dir.path(), &["fit", "stats.csv", "--y", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reservoir_sweep_has_decreasing_postprocess() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["sweep", "--L", "14", "--lprime-grid", "21,26,31,35", "--trials", "200"]);
    assert!(o.status.success());
    let stats = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(stats.as_bytes());
    let col = rdr.headers().unwrap().iter().position(|h| h == "M_post_mean").unwrap();
    let m: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(m.len(), 4);
    assert!(m.windows(2).all(|w| w[1] < w[0]), "{m:?}");
    assert!(stats.contains("# fit model=exp_decay x=r y=M_post_mean"));
}

#[test]
fn render_and_schedule_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let board = format!("{}/tests/data/hand_trace.txt", env!("CARGO_MANIFEST_DIR"));
    let golden = format!("{}/tests/data/hand_trace_render_L4.txt", env!("CARGO_MANIFEST_DIR"));
    let o = cli(dir.path(), &["render", &board, "--L", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), std::fs::read_to_string(golden).unwrap());

    let o = cli(dir.path(), &["schedule", "--board", &board, "--L", "4", "-o", "s.json"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("s.json")).unwrap();
    let sched = tweezer_pca::schedule::ScheduleFile::from_json(&text).unwrap();
    let occ = tweezer_pca::Occupancy::from_snapshot(&std::fs::read_to_string(&board).unwrap()).unwrap();
    assert!(tweezer_pca::schedule::replay(&sched, &occ).is_ok());

    std::fs::write(dir.path().join("bad.txt"), "0101\n011\n").unwrap();
    assert_eq!(cli(dir.path(), &["render", "bad.txt"]).status.code(), Some(2));
}
