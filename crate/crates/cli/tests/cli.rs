//! End-to-end tests of the `fh-outage` binary: CSV schemas, determinism,
//! exit codes, and the headline FH-vs-FD crossover table.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fh-outage");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("spawning the CLI binary")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Parses CSV text into (header, rows-of-cells).
fn parse_csv(text: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header row").to_owned();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn cell(row: &[String], idx: usize) -> f64 {
    row[idx].parse().expect("numeric CSV cell")
}

#[test]
fn compare_reproduces_the_fh_fd_crossover_window() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "ex3.cfg",
        "u=20\nn_des=20\ngamma_db=20\nq=0.5,0.3,0.2\n\
         eps_start=0.03\neps_stop=0.09\neps_points=4\npsi_samples=20000\n",
    );
    let out = dir.path().join("compare.csv");
    let res = run(&[
        "--command",
        "compare",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, "eps,R_fh1_maxv,R_fbs,R_fd");
    assert_eq!(rows.len(), 4);

    // Hopping loses to frequency division at the strictest outage level and
    // beats it at the loosest, so the crossover sits inside the grid.
    let eps: Vec<f64> = rows.iter().map(|r| cell(r, 0)).collect();
    let fh: Vec<f64> = rows.iter().map(|r| cell(r, 1)).collect();
    let fd: Vec<f64> = rows.iter().map(|r| cell(r, 3)).collect();
    assert!((eps[0] - 0.03).abs() < 1e-12 && (eps[3] - 0.09).abs() < 1e-12);
    assert!(fh[0] < fd[0], "expected FD ahead at eps=0.03: {} vs {}", fh[0], fd[0]);
    assert!(fh[3] > fd[3], "expected FH ahead at eps=0.09: {} vs {}", fh[3], fd[3]);
    // FH also beats full-band spreading throughout this window.
    for row in &rows {
        assert!(cell(row, 1) > cell(row, 2));
    }
}

#[test]
fn identical_config_and_seed_give_byte_identical_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "small.cfg",
        "u=6\ngamma_db=15\nq=0.6,0.4\n\
         eps_start=0.05\neps_stop=0.15\neps_points=3\npsi_samples=20000\n",
    );
    let out = dir.path().join("a.csv");
    let first = run(&[
        "--command", "compare", "--config", &cfg,
        "--out", out.to_str().unwrap(), "--seed", "7",
    ]);
    assert!(first.status.success());
    let bytes_a = std::fs::read(&out).unwrap();

    // Second run goes to stdout: same bytes on both sinks.
    let second = run(&["--command", "compare", "--config", &cfg, "--seed", "7"]);
    assert!(second.status.success());
    assert_eq!(bytes_a, second.stdout);

    // A different seed perturbs the Monte Carlo bound-1 column.
    let third = run(&["--command", "compare", "--config", &cfg, "--seed", "8"]);
    assert!(third.status.success());
    assert_ne!(bytes_a, third.stdout);
}

#[test]
fn sweep_v_peaks_at_full_hopping_in_the_low_snr_regime() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "lowsnr.cfg",
        "u=10\ngamma_db=-10\nq=0.5,0.5\neps=0.1\npsi_samples=50000\n",
    );
    let res = run(&["--command", "sweep-v", "--config", &cfg]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = parse_csv(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(header, "v,rate,stderr");
    assert_eq!(rows.len(), 10);
    let best = rows
        .iter()
        .max_by(|a, b| cell(a, 1).total_cmp(&cell(b, 1)))
        .unwrap();
    assert_eq!(best[0], "10", "low-SNR capacity should peak at v = u");
    // The curve is shallow at low SNR: worst and best v stay within ~25%.
    let rates: Vec<f64> = rows.iter().map(|r| cell(r, 1)).collect();
    let (lo, hi) = rates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo < 1.30, "curve spread {lo}..{hi} larger than expected");
}

#[test]
fn deterministic_sweeps_expose_monotone_trends() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "b3.cfg",
        "u=8\nv=4\ngamma_db=10\nq=0.5,0.3,0.2\neps=0.1\nbound=3\n\
         eps_start=0.02\neps_stop=0.2\neps_points=5\n\
         gamma_db_start=0\ngamma_db_stop=20\ngamma_db_points=5\n",
    );

    let eps_run = run(&["--command", "sweep-eps", "--config", &cfg]);
    assert!(eps_run.status.success());
    let (header, rows) = parse_csv(&String::from_utf8(eps_run.stdout).unwrap());
    assert_eq!(header, "eps,rate,v_used,stderr");
    assert_eq!(rows.len(), 5);
    for pair in rows.windows(2) {
        assert!(cell(&pair[1], 0) > cell(&pair[0], 0));
        assert!(
            cell(&pair[1], 1) > cell(&pair[0], 1),
            "capacity must grow with the tolerated outage"
        );
    }
    for row in &rows {
        assert_eq!(row[2], "4", "configured v is fixed across the sweep");
        assert_eq!(cell(row, 3), 0.0, "closed-form bound has no MC error");
    }

    let snr_run = run(&["--command", "sweep-snr", "--config", &cfg]);
    assert!(snr_run.status.success());
    let (header, rows) = parse_csv(&String::from_utf8(snr_run.stdout).unwrap());
    assert_eq!(header, "gamma_db,rate,v_used,stderr");
    assert_eq!(rows.len(), 5);
    for pair in rows.windows(2) {
        assert!(
            cell(&pair[1], 1) > cell(&pair[0], 1),
            "capacity must grow with SNR"
        );
    }

    let cap_run = run(&["--command", "capacity", "--config", &cfg]);
    assert!(cap_run.status.success());
    let (header, rows) = parse_csv(&String::from_utf8(cap_run.stdout).unwrap());
    assert_eq!(header, "u,v,gamma_db,eps,bound,rate,stderr,residual");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "8");
    assert_eq!(rows[0][1], "4");
    assert_eq!(rows[0][4], "3");
    assert!(cell(&rows[0], 5) > 0.0);
}

#[test]
fn validate_suite_passes_on_a_reference_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "ref.cfg",
        "u=10\ngamma_db=20\nq=0.5,0.3,0.2\neps=0.1\n\
         psi_samples=50000\nmc_samples=200000\n",
    );
    let res = run(&["--command", "validate", "--config", &cfg]);
    assert!(
        res.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&res.stdout),
        String::from_utf8_lossy(&res.stderr)
    );
    let (header, rows) = parse_csv(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(header, "check,status,metric,limit");
    assert_eq!(rows.len(), 8);
    for row in &rows {
        assert_eq!(row[1], "PASS", "check {} not passing", row[0]);
    }
}

#[test]
fn bad_inputs_map_to_exit_code_two() {
    let dir = TempDir::new().unwrap();

    let unknown_key = write_config(dir.path(), "bad.cfg", "u=10\nq=0.5,0.5\nbogus=1\n");
    let res = run(&["--command", "capacity", "--config", &unknown_key]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown key"));

    let missing = dir.path().join("nonexistent.cfg");
    let res = run(&["--command", "capacity", "--config", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));

    // Valid file, but the command needs keys the config lacks.
    let no_eps = write_config(dir.path(), "noeps.cfg", "u=10\ngamma_db=10\nq=0.5,0.5\n");
    let res = run(&["--command", "capacity", "--config", &no_eps]);
    assert_eq!(res.status.code(), Some(2));

    // Library-level rejection: FD needs n_des | u.
    let bad_fd = write_config(
        dir.path(),
        "badfd.cfg",
        "u=10\nn_des=3\ngamma_db=10\nq=1.0\neps=0.1\neps_points=2\npsi_samples=20000\n",
    );
    let res = run(&["--command", "compare", "--config", &bad_fd]);
    assert_eq!(res.status.code(), Some(2));
}
