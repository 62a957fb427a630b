//! `hbode` — heavy-ball ODE laboratory CLI.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hbode::harness::{
    self, cmd_bound, cmd_plot, cmd_run, cmd_sweep, cmd_verify, ConfigOverlay, RunConfig,
    RunOutcome, SweepOutcome, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "hbode",
    version,
    about = "Integrate the damped flow x'' = -alpha x' - grad f(x), track the exponentially \
             weighted average trajectory, and verify the energy identities and horizon bounds."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one horizon; write the checkpoint CSV and a summary line.
    Run(RunArgs),
    /// Integrate a horizon grid; write the sweep CSV and decay-rate fits.
    Sweep(RunArgs),
    /// Run the built-in identity/inequality verification suite.
    Verify(VerifyArgs),
    /// Print the friction schedule and horizon bounds for given constants.
    Bound(BoundArgs),
    /// Render SVG figures from run or sweep CSVs.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file; CLI flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem name: quadratic | cos_sum | rosenbrock.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Horizon(s); comma-separated for sweeps.
    #[arg(long = "T", value_name = "T[,T...]")]
    t: Option<String>,
    /// Explicit friction (required for problems with L2 = 0).
    #[arg(long)]
    alpha: Option<f64>,
    /// Step size: `auto` or a positive number that tiles T exactly.
    #[arg(long)]
    h: Option<String>,
    /// Initial point: `standard` or `seeded-random(SEED, SCALE)`.
    #[arg(long)]
    x0: Option<String>,
    /// Integrator: rk4 | semi-implicit-euler.
    #[arg(long)]
    method: Option<String>,
    /// Steps between checkpoints.
    #[arg(long)]
    stride: Option<usize>,
    /// Output directory for CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Steps between checkpoints for the suite's coarse runs.
    #[arg(long)]
    stride: Option<usize>,
    /// Nodes per synthetic path in the averaging-error check.
    #[arg(long)]
    path_nodes: Option<usize>,
    /// Cubic paths per weight family.
    #[arg(long)]
    paths: Option<usize>,
}

#[derive(Args)]
struct BoundArgs {
    /// Hessian Lipschitz constant.
    #[arg(long)]
    l2: f64,
    /// Initial optimality gap f(x0) - inf f.
    #[arg(long = "delta-f")]
    delta_f: f64,
    /// Horizon.
    #[arg(long = "T")]
    t: f64,
}

#[derive(Args)]
struct PlotArgs {
    /// Run or sweep CSVs (schema detected from the header).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory for SVGs.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn build_config(args: RunArgs) -> hbode::Result<RunConfig> {
    let file = match &args.config {
        Some(path) => ConfigOverlay::from_file(path)?,
        None => ConfigOverlay::default(),
    };
    let flags = ConfigOverlay {
        problem: args.problem,
        dim: args.dim,
        x0: args.x0,
        t_grid: match args.t {
            Some(s) => Some(harness::config::parse_t_grid(&s)?),
            None => None,
        },
        alpha: args.alpha,
        h: args.h,
        method: args.method,
        stride: args.stride,
        out: args.out,
    };
    flags.over(file).build()
}

fn print_run(outcome: &RunOutcome, cfg: &RunConfig) {
    let r = &outcome.report;
    println!(
        "run problem={} dim={} T={} alpha={:.6} h={:.6e} steps={} method={}",
        cfg.problem,
        cfg.dim,
        r.t_final,
        r.alpha,
        outcome.h,
        outcome.step_count,
        cfg.method.name(),
    );
    println!(
        "  min ||grad f(x_bar)|| = {:.6e} at t* = {:.4}",
        r.min_grad_norm_xbar, r.t_star
    );
    println!(
        "  leading_bound = {:.6e}  finite_T_bound = {:.6e}  satisfied = {}",
        r.leading_bound, r.finite_t_bound, r.satisfied
    );
    println!(
        "  max_energy_residual = {:.3e}  dissipation_margin = {:+.3e}",
        outcome.max_energy_residual, outcome.dissipation_margin
    );
    for (t, residual) in &outcome.grad_avg_residuals {
        println!("  grad_average_residual[t={t:.4}] = {residual:.3e}");
    }
    println!("  csv: {}", outcome.csv_path.display());
    println!(
        "checks: {}",
        if outcome.checks_pass { "PASS" } else { "FAIL" }
    );
}

fn print_sweep(outcome: &SweepOutcome) {
    for rec in &outcome.records {
        match &rec.error {
            None => println!(
                "T={:<12.4} alpha={:<9.5} min={:<12.5e} t*={:<10.3} bound={:<12.5e} satisfied={} ({:.2} s, {} steps)",
                rec.t_final,
                rec.alpha,
                rec.min_grad_norm_xbar,
                rec.t_star,
                rec.finite_t_bound,
                rec.satisfied,
                rec.wall_time_seconds,
                rec.step_count,
            ),
            Some(err) => println!("T={:<12.4} FAILED: {err}", rec.t_final),
        }
    }
    let show = |label: &str, fit: &Option<hbode::analysis::RateFit>, assertable: &str| match fit {
        Some(f) => println!(
            "rate fit {label:<18} slope = {:+.6} (r^2 = {:.6}) {assertable}",
            f.slope, f.r_squared
        ),
        None => println!("rate fit {label:<18} unavailable (needs >= 3 finite rows)"),
    };
    show(
        "leading bound:",
        &outcome.fit_leading_bound,
        "[power law, slope -4/7]",
    );
    show("finite-T bound:", &outcome.fit_finite_bound, "");
    show(
        "empirical min:",
        &outcome.fit_min_grad,
        "[reported, not asserted]",
    );
    println!("csv: {}", outcome.csv_path.display());
    println!(
        "sweep: {}",
        if outcome.all_satisfied {
            "all rows satisfied"
        } else {
            "UNSATISFIED rows present"
        }
    );
}

fn real_main() -> hbode::Result<bool> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = build_config(args)?;
            let outcome = cmd_run(&cfg)?;
            print_run(&outcome, &cfg);
            Ok(outcome.checks_pass)
        }
        Command::Sweep(args) => {
            let cfg = build_config(args)?;
            let outcome = cmd_sweep(&cfg)?;
            print_sweep(&outcome);
            Ok(outcome.all_satisfied)
        }
        Command::Verify(args) => {
            let defaults = VerifyOptions::default();
            let opts = VerifyOptions {
                checkpoint_stride: args.stride.unwrap_or(defaults.checkpoint_stride),
                path_nodes: args.path_nodes.unwrap_or(defaults.path_nodes),
                paths_per_weight: args.paths.unwrap_or(defaults.paths_per_weight),
                ..defaults
            };
            let report = cmd_verify(&opts)?;
            print!("{}", report.render());
            Ok(report.all_pass)
        }
        Command::Bound(args) => {
            let out = cmd_bound(args.l2, args.delta_f, args.t)?;
            println!("alpha = {:.12}", out.alpha);
            println!("leading_bound = {:.12e}", out.leading_bound);
            match out.finite_t_bound {
                Some(b) => println!("finite_T_bound = {b:.12e}"),
                None => println!(
                    "finite_T_bound vacuous: T <= 3/(2 alpha) = {:.6}",
                    out.vacuous_threshold
                ),
            }
            Ok(true)
        }
        Command::Plot(args) => {
            let outputs = cmd_plot(&args.inputs, &args.out)?;
            for p in outputs {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
