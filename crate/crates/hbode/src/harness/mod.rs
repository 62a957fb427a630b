//! Reproducibility surface: configuration, CSV emission, horizon sweeps,
//! the verification suite, the gradient-descent context baseline and plots.

pub mod config;
pub mod csv;
pub mod gd;
pub mod plot;
pub mod verify;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::analysis::{self, BoundReport, RateFit};
use crate::error::{Error, Result};
use crate::ode::integrate;
use crate::rng::DEFAULT_SEED;
use crate::tolerances;

pub use config::{ConfigOverlay, HRule, RunConfig, X0Spec};
pub use gd::{run_gd_baseline, GdRecord};
pub use verify::{cmd_verify, CheckResult, VerifyOptions, VerifyReport};

/// Sampling seed: `HBODE_SEED` environment variable when set, otherwise the
/// built-in default.
pub fn default_seed() -> u64 {
    std::env::var("HBODE_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Outcome of a single-horizon run.
#[derive(Debug)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub report: BoundReport,
    pub step_count: usize,
    pub h: f64,
    pub max_energy_residual: f64,
    pub dissipation_margin: f64,
    /// (t, residual) of the averaged-gradient identity at T/4, T/2, T.
    pub grad_avg_residuals: Vec<(f64, f64)>,
    pub checks_pass: bool,
}

/// Integrate one horizon, write the checkpoint CSV, evaluate the bound and
/// identity checks. The gate is: energy identity within tolerance, the
/// dissipation bound within slack, and the finite-horizon bound satisfied.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    if cfg.t_grid.len() != 1 {
        return Err(Error::Config(format!(
            "run takes exactly one horizon, got {} (use sweep for grids)",
            cfg.t_grid.len()
        )));
    }
    let t_final = cfg.t_grid[0];
    let problem = cfg.resolve_problem()?;
    let alpha = cfg.resolve_alpha(&problem, t_final)?;
    let params = cfg.resolve_params(&problem, alpha, t_final)?;
    let traj = integrate(&problem, &params)?;

    let csv_path = cfg
        .output_dir
        .join(format!("run_{}_d{}.csv", problem.name(), problem.dim()));
    csv::write_run_csv(&csv_path, &traj)?;

    let report = analysis::bound_report(&problem, &traj)?;
    let max_energy_residual = traj.max_energy_residual();
    let dissipation_margin = analysis::dissipation_margin(&traj, traj.delta_f);
    let mut grad_avg_residuals = Vec::new();
    for frac in [0.25, 0.5, 1.0] {
        let idx = traj.checkpoint_nearest(frac * t_final);
        if idx >= 2 {
            let r = analysis::grad_average_identity_residual(&problem, &traj, traj.alpha, idx)?;
            grad_avg_residuals.push((traj.checkpoints[idx].t, r));
        }
    }

    let checks_pass = max_energy_residual <= tolerances::ENERGY_IDENTITY_REL
        && dissipation_margin <= tolerances::DISSIPATION_SLACK
        && report.satisfied;

    Ok(RunOutcome {
        csv_path,
        report,
        step_count: traj.step_count,
        h: traj.h,
        max_energy_residual,
        dissipation_margin,
        grad_avg_residuals,
        checks_pass,
    })
}

/// One row of a horizon sweep. Failed rows keep their horizon and the error
/// message; numeric fields are NaN and `satisfied` is false.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub t_final: f64,
    pub alpha: f64,
    pub min_grad_norm_xbar: f64,
    pub t_star: f64,
    pub leading_bound: f64,
    pub finite_t_bound: f64,
    pub satisfied: bool,
    pub wall_time_seconds: f64,
    pub step_count: usize,
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(t_final: f64, alpha: f64, wall: f64, err: &Error) -> Self {
        SweepRecord {
            t_final,
            alpha,
            min_grad_norm_xbar: f64::NAN,
            t_star: f64::NAN,
            leading_bound: f64::NAN,
            finite_t_bound: f64::NAN,
            satisfied: false,
            wall_time_seconds: wall,
            step_count: 0,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub csv_path: PathBuf,
    pub records: Vec<SweepRecord>,
    pub fit_min_grad: Option<RateFit>,
    pub fit_finite_bound: Option<RateFit>,
    pub fit_leading_bound: Option<RateFit>,
    pub all_satisfied: bool,
}

/// Run every horizon in the grid (rows execute concurrently, outputs are
/// written in grid order), emit the sweep CSV and fit decay rates.
///
/// The leading-bound fit is a pure power law with slope exactly -4/7; the
/// empirical min-gradient slope is reported without assertion since the
/// horizon bound only caps it from above.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if cfg.t_grid.len() < 3 {
        return Err(Error::Config(format!(
            "sweep needs at least 3 horizons, got {}",
            cfg.t_grid.len()
        )));
    }
    let problem = cfg.resolve_problem()?;

    let slots: Vec<Mutex<Option<SweepRecord>>> =
        cfg.t_grid.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(cfg.t_grid.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfg.t_grid.len() {
                    break;
                }
                let record = sweep_row(cfg, &problem, cfg.t_grid[i]);
                *slots[i].lock().unwrap() = Some(record);
            });
        }
    });

    let records: Vec<SweepRecord> = slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every row was computed"))
        .collect();

    let csv_path = cfg
        .output_dir
        .join(format!("sweep_{}_d{}.csv", problem.name(), problem.dim()));
    csv::write_sweep_csv(&csv_path, &records)?;

    let points = |f: fn(&SweepRecord) -> f64| -> Vec<(f64, f64)> {
        records
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| (r.t_final, f(r)))
            .filter(|&(_, v)| v.is_finite() && v > 0.0)
            .collect()
    };
    let fit = |pts: Vec<(f64, f64)>| analysis::fit_rate(&pts).ok();
    Ok(SweepOutcome {
        csv_path,
        fit_min_grad: fit(points(|r| r.min_grad_norm_xbar)),
        fit_finite_bound: fit(points(|r| r.finite_t_bound)),
        fit_leading_bound: fit(points(|r| r.leading_bound)),
        all_satisfied: records.iter().all(|r| r.satisfied),
        records,
    })
}

fn sweep_row(cfg: &RunConfig, problem: &crate::problems::Problem, t_final: f64) -> SweepRecord {
    let start = Instant::now();
    let alpha = match cfg.resolve_alpha(problem, t_final) {
        Ok(a) => a,
        Err(e) => return SweepRecord::failed(t_final, f64::NAN, start.elapsed().as_secs_f64(), &e),
    };
    let result = cfg
        .resolve_params(problem, alpha, t_final)
        .and_then(|params| integrate(problem, &params))
        .and_then(|traj| analysis::bound_report(problem, &traj).map(|r| (traj, r)));
    let wall = start.elapsed().as_secs_f64();
    match result {
        Ok((traj, report)) => SweepRecord {
            t_final,
            alpha,
            min_grad_norm_xbar: report.min_grad_norm_xbar,
            t_star: report.t_star,
            leading_bound: report.leading_bound,
            finite_t_bound: report.finite_t_bound,
            satisfied: report.satisfied,
            wall_time_seconds: wall,
            step_count: traj.step_count,
            error: None,
        },
        Err(e) => SweepRecord::failed(t_final, alpha, wall, &e),
    }
}

/// Schedule and bound printout for given constants.
#[derive(Debug, Clone)]
pub struct BoundPrintout {
    pub alpha: f64,
    pub leading_bound: f64,
    /// None when T <= 3/(2 alpha): the finite-T bound is vacuous there.
    pub finite_t_bound: Option<f64>,
    pub vacuous_threshold: f64,
}

pub fn cmd_bound(l2: f64, delta_f: f64, t_final: f64) -> Result<BoundPrintout> {
    let alpha = crate::ode::alpha_for_horizon(l2, delta_f, t_final)?;
    let leading = analysis::leading_bound(l2, delta_f, t_final)?;
    let finite = match analysis::finite_t_bound(l2, delta_f, t_final, alpha) {
        Ok(b) => Some(b),
        Err(Error::HorizonTooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundPrintout {
        alpha,
        leading_bound: leading,
        finite_t_bound: finite,
        vacuous_threshold: 3.0 / (2.0 * alpha),
    })
}

/// Render figures for each input CSV into `out_dir`.
pub fn cmd_plot(inputs: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(Error::Config("plot needs at least one CSV path".into()));
    }
    inputs.iter().map(|p| plot::plot_csv(p, out_dir)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_out(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("hbode_harness_test").join(name);
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn run_on_quadratic_passes_checks() {
        let cfg = RunConfig {
            problem: "quadratic".into(),
            dim: 1,
            t_grid: vec![10.0],
            alpha_override: Some(2.0),
            h_rule: HRule::Explicit(1e-3),
            output_dir: temp_out("run_quadratic"),
            ..Default::default()
        };
        let outcome = cmd_run(&cfg).unwrap();
        assert!(outcome.checks_pass);
        assert!(outcome.max_energy_residual <= 1e-8);
        assert!(outcome.csv_path.exists());
        assert_eq!(outcome.step_count, 10_000);
    }

    #[test]
    fn run_rejects_degenerate_schedule_without_alpha() {
        let cfg = RunConfig {
            problem: "quadratic".into(),
            dim: 1,
            t_grid: vec![10.0],
            output_dir: temp_out("run_degenerate"),
            ..Default::default()
        };
        assert!(matches!(
            cmd_run(&cfg),
            Err(Error::DegenerateSchedule { .. })
        ));
    }

    #[test]
    fn run_rejects_too_short_horizon() {
        let cfg = RunConfig {
            problem: "cos_sum".into(),
            dim: 2,
            t_grid: vec![0.5],
            alpha_override: Some(1.0),
            output_dir: temp_out("run_short"),
            ..Default::default()
        };
        assert!(matches!(cmd_run(&cfg), Err(Error::HorizonTooShort { .. })));
    }

    #[test]
    fn sweep_produces_ordered_rows_and_fits() {
        let cfg = RunConfig {
            problem: "cos_sum".into(),
            dim: 4,
            x0: X0Spec::SeededRandom {
                seed: 3,
                scale: 2.0,
            },
            t_grid: vec![20.0, 40.0, 80.0],
            output_dir: temp_out("sweep_small"),
            ..Default::default()
        };
        let outcome = cmd_sweep(&cfg).unwrap();
        assert_eq!(outcome.records.len(), 3);
        assert!(outcome.all_satisfied);
        let ts: Vec<f64> = outcome.records.iter().map(|r| r.t_final).collect();
        assert_eq!(ts, vec![20.0, 40.0, 80.0]);
        let fit = outcome.fit_leading_bound.unwrap();
        assert!((fit.slope + 4.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_requires_three_horizons() {
        let cfg = RunConfig {
            t_grid: vec![10.0, 20.0],
            output_dir: temp_out("sweep_short"),
            ..Default::default()
        };
        assert!(cmd_sweep(&cfg).is_err());
    }

    #[test]
    fn sweep_records_per_row_failures_and_continues() {
        // explicit h that only tiles the middle horizon: rows 1 and 3 fail
        let cfg = RunConfig {
            problem: "cos_sum".into(),
            dim: 2,
            x0: X0Spec::SeededRandom {
                seed: 5,
                scale: 2.0,
            },
            t_grid: vec![10.003, 20.0, 30.007],
            h_rule: HRule::Explicit(0.01),
            output_dir: temp_out("sweep_failures"),
            ..Default::default()
        };
        let outcome = cmd_sweep(&cfg).unwrap();
        assert!(outcome.records[0].error.is_some());
        assert!(outcome.records[1].error.is_none());
        assert!(outcome.records[2].error.is_some());
        assert!(!outcome.all_satisfied);
        assert!(outcome.csv_path.exists());
    }

    #[test]
    fn sweep_rows_are_independent() {
        // dropping one horizon from the grid must not change any other row
        let cfg_for = |grid: Vec<f64>, name: &str| RunConfig {
            problem: "cos_sum".into(),
            dim: 3,
            x0: X0Spec::SeededRandom {
                seed: 11,
                scale: 2.0,
            },
            t_grid: grid,
            output_dir: temp_out(name),
            ..Default::default()
        };
        let full = cmd_sweep(&cfg_for(vec![20.0, 40.0, 80.0, 160.0], "rows_full")).unwrap();
        let pruned = cmd_sweep(&cfg_for(vec![20.0, 40.0, 160.0], "rows_pruned")).unwrap();
        for rec in &pruned.records {
            let counterpart = full
                .records
                .iter()
                .find(|r| r.t_final == rec.t_final)
                .expect("shared horizon");
            assert_eq!(
                rec.min_grad_norm_xbar.to_bits(),
                counterpart.min_grad_norm_xbar.to_bits()
            );
            assert_eq!(rec.t_star.to_bits(), counterpart.t_star.to_bits());
            assert_eq!(
                rec.finite_t_bound.to_bits(),
                counterpart.finite_t_bound.to_bits()
            );
            assert_eq!(rec.step_count, counterpart.step_count);
        }
    }

    #[test]
    fn bound_printout_reference_values() {
        let out = cmd_bound(1.0 / 3.0, 1.0, 128.0).unwrap();
        assert!((out.alpha - 0.5).abs() < 1e-15);
        assert!((out.finite_t_bound.unwrap() - 28.0 / 375.0).abs() < 1e-15);
        let vacuous = cmd_bound(1.0 / 3.0, 1.0, 1.0).unwrap();
        assert!((vacuous.alpha - 1.0).abs() < 1e-15);
        assert!(vacuous.finite_t_bound.is_none());
        let big = cmd_bound(1.0 / 3.0, 128.0, 1.0).unwrap();
        assert!((big.alpha - 2.0).abs() < 1e-14);
    }
}
