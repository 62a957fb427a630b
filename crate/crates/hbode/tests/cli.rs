//! End-to-end checks of the `hbode` binary: exit codes, config file plus
//! flag precedence, and the CSV/SVG surfaces.

use std::path::PathBuf;
use std::process::{Command, Output};

fn hbode(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hbode"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("hbode_cli_test").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bound_prints_schedule_and_both_bounds() {
    let out = hbode(
        &[
            "bound",
            "--l2",
            "0.3333333333333333",
            "--delta-f",
            "1",
            "--T",
            "128",
        ],
        &[],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("alpha = 0.5000"), "{stdout}");
    assert!(stdout.contains("finite_T_bound = 7.4666666"), "{stdout}");

    let vacuous = hbode(
        &[
            "bound",
            "--l2",
            "0.3333333333333333",
            "--delta-f",
            "1",
            "--T",
            "1",
        ],
        &[],
    );
    assert!(vacuous.status.success());
    let stdout = String::from_utf8(vacuous.stdout).unwrap();
    assert!(stdout.contains("vacuous"), "{stdout}");
}

#[test]
fn run_succeeds_on_quadratic_and_writes_csv() {
    let dir = temp_dir("run_ok");
    let out = hbode(
        &[
            "run",
            "--problem",
            "quadratic",
            "--dim",
            "1",
            "--alpha",
            "2",
            "--T",
            "10",
            "--h",
            "0.001",
            "--out",
            dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("checks: PASS"), "{stdout}");
    let csv = dir.join("run_quadratic_d1.csv");
    let contents = std::fs::read_to_string(csv).unwrap();
    assert!(contents.starts_with("t,grad_norm_x,grad_norm_xbar,phi,e_diss,energy_residual\n"));
}

#[test]
fn run_without_alpha_on_degenerate_problem_fails() {
    let dir = temp_dir("run_degenerate");
    let out = hbode(
        &[
            "run",
            "--problem",
            "quadratic",
            "--dim",
            "1",
            "--T",
            "10",
            "--out",
            dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("degenerate friction schedule"), "{stderr}");
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = temp_dir("config");
    let config_path = dir.join("lab.cfg");
    std::fs::write(
        &config_path,
        format!(
            "# single-horizon smoke config\nproblem = quadratic\ndim = 1\nT = 5\nalpha = 2\nh = 0.001\nout = {}\n",
            dir.display()
        ),
    )
    .unwrap();
    // flag overrides T = 5 from the file
    let out = hbode(
        &["run", "--config", config_path.to_str().unwrap(), "--T", "2"],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("T=2"), "{stdout}");
}

#[test]
fn sweep_then_plot_produces_svg() {
    let dir = temp_dir("sweep_plot");
    let out = hbode(
        &[
            "sweep",
            "--problem",
            "cos_sum",
            "--dim",
            "3",
            "--x0",
            "seeded-random(9, 2.0)",
            "--T",
            "20,40,80",
            "--out",
            dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("rate fit leading bound:"), "{stdout}");
    assert!(stdout.contains("all rows satisfied"), "{stdout}");

    let csv = dir.join("sweep_cos_sum_d3.csv");
    let plot = hbode(
        &[
            "plot",
            csv.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        plot.status.success(),
        "{}",
        String::from_utf8_lossy(&plot.stderr)
    );
    let svg = std::fs::read_to_string(dir.join("sweep_cos_sum_d3_plot.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let bad = hbode(&["plot", config_missing().to_str().unwrap()], &[]);
    assert!(!bad.status.success());
}

fn config_missing() -> PathBuf {
    std::env::temp_dir()
        .join("hbode_cli_test")
        .join("does_not_exist.csv")
}

#[test]
fn verify_runs_quick_suite_with_seed_override() {
    // trimmed path count keeps this end-to-end check fast; the seed exercises
    // the HBODE_SEED override path
    let out = hbode(
        &["verify", "--paths", "2", "--path-nodes", "801"],
        &[("HBODE_SEED", "12345")],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("verify: all checks passed"), "{stdout}");
    assert!(
        stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 19,
        "{stdout}"
    );
}

#[test]
fn invalid_step_size_is_a_config_error() {
    let out = hbode(
        &[
            "run",
            "--problem",
            "cos_sum",
            "--dim",
            "2",
            "--T",
            "10",
            "--h",
            "0.3",
        ],
        &[],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("not an integer step count"), "{stderr}");
}
