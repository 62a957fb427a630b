//! Minimal SVG figures from run/sweep CSVs. No plotting dependency: the
//! output is a few polylines, ticks and labels, and must be deterministic.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::csv::{read_csv, CsvTable, RUN_HEADER, SWEEP_HEADER};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn from_ranges(xs: &[f64], ys: &[f64]) -> Frame {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in xs {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
        for &y in ys {
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if xmax <= xmin {
            xmax = xmin + 1.0;
        }
        if ymax <= ymin {
            ymax = ymin + 1.0;
        }
        let pad_x = 0.05 * (xmax - xmin);
        let pad_y = 0.08 * (ymax - ymin);
        Frame {
            xmin: xmin - pad_x,
            xmax: xmax + pad_x,
            ymin: ymin - pad_y,
            ymax: ymax + pad_y,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.xmin) / (self.xmax - self.xmin) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_B
            - (y - self.ymin) / (self.ymax - self.ymin) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn polyline(&self, pts: &[(f64, f64)], color: &str, dash: Option<&str>) -> String {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>\n",
            coords.join(" ")
        )
    }
}

fn svg_document(body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n{body}</svg>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B,
    )
}

fn text(x: f64, y: f64, size: f64, anchor: &str, content: &str) -> String {
    format!(
        "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"monospace\" font-size=\"{size}\" \
         text-anchor=\"{anchor}\">{content}</text>\n"
    )
}

/// Render one CSV (run or sweep schema, detected by header) to SVG.
pub fn plot_csv(input: &Path, out_dir: &Path) -> Result<PathBuf> {
    let table = read_csv(input)?;
    let header = table.header.join(",");
    let body = if header == SWEEP_HEADER {
        sweep_figure(&table)?
    } else if header == RUN_HEADER {
        run_figure(&table)?
    } else {
        return Err(Error::Schema(format!(
            "{}: header matches neither the run nor the sweep schema",
            input.display()
        )));
    };
    std::fs::create_dir_all(out_dir)?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("figure");
    let out = out_dir.join(format!("{stem}_plot.svg"));
    std::fs::write(&out, svg_document(&body))?;
    Ok(out)
}

/// Log-log figure: measured min gradient norm and the finite-horizon bound
/// vs T, with a -4/7 slope reference line.
fn sweep_figure(table: &CsvTable) -> Result<String> {
    let t = table.column("T")?;
    let min_grad = table.column("min_grad_norm_xbar")?;
    let bound = table.column("finite_T_bound")?;

    let series = |values: &[f64]| -> Vec<(f64, f64)> {
        t.iter()
            .zip(values)
            .filter(|&(&ti, &v)| ti > 0.0 && v > 0.0 && v.is_finite())
            .map(|(&ti, &v)| (ti.log10(), v.log10()))
            .collect()
    };
    let grad_pts = series(&min_grad);
    let bound_pts = series(&bound);
    if grad_pts.is_empty() && bound_pts.is_empty() {
        return Err(Error::Schema("no plottable sweep rows".into()));
    }

    let anchor = bound_pts.first().or(grad_pts.first()).copied().unwrap();
    let reference: Vec<(f64, f64)> = grad_pts
        .iter()
        .chain(&bound_pts)
        .map(|&(x, _)| (x, anchor.1 - 4.0 / 7.0 * (x - anchor.0)))
        .collect();

    let all_x: Vec<f64> = grad_pts
        .iter()
        .chain(&bound_pts)
        .chain(&reference)
        .map(|p| p.0)
        .collect();
    let all_y: Vec<f64> = grad_pts
        .iter()
        .chain(&bound_pts)
        .chain(&reference)
        .map(|p| p.1)
        .collect();
    let frame = Frame::from_ranges(&all_x, &all_y);

    let mut body = String::new();
    body.push_str(&axis_ticks_log(&frame));
    if !grad_pts.is_empty() {
        body.push_str(&frame.polyline(&grad_pts, "#1f77b4", None));
    }
    if !bound_pts.is_empty() {
        body.push_str(&frame.polyline(&bound_pts, "#d62728", None));
    }
    body.push_str(&frame.polyline(&reference, "#555555", Some("5 4")));
    body.push_str(&text(
        WIDTH - MARGIN_R - 8.0,
        MARGIN_T + 16.0,
        12.0,
        "end",
        "blue: min ||grad f(x_bar)||   red: finite-T bound   dashed: slope -4/7",
    ));
    body.push_str(&text(WIDTH / 2.0, HEIGHT - 12.0, 12.0, "middle", "log10 T"));
    body.push_str(&text(16.0, HEIGHT / 2.0, 12.0, "middle", "log10"));
    Ok(body)
}

/// Linear figure of the energy-identity residual along one run.
fn run_figure(table: &CsvTable) -> Result<String> {
    let t = table.column("t")?;
    let residual = table.column("energy_residual")?;
    let pts: Vec<(f64, f64)> = t.iter().zip(&residual).map(|(&a, &b)| (a, b)).collect();
    let span = residual.iter().fold(1e-16f64, |m, r| m.max(r.abs()));
    let frame = Frame {
        xmin: t[0],
        xmax: *t.last().unwrap(),
        ymin: -1.1 * span,
        ymax: 1.1 * span,
    };
    let mut body = String::new();
    let zero = [(frame.xmin, 0.0), (frame.xmax, 0.0)];
    body.push_str(&frame.polyline(&zero, "#999999", Some("2 3")));
    body.push_str(&frame.polyline(&pts, "#2ca02c", None));
    body.push_str(&text(
        WIDTH - MARGIN_R - 8.0,
        MARGIN_T + 16.0,
        12.0,
        "end",
        "energy residual Phi(t) + alpha e(t) - Phi(0)",
    ));
    body.push_str(&text(WIDTH / 2.0, HEIGHT - 12.0, 12.0, "middle", "t"));
    Ok(body)
}

fn axis_ticks_log(frame: &Frame) -> String {
    let mut body = String::new();
    let lo = frame.xmin.ceil() as i64;
    let hi = frame.xmax.floor() as i64;
    for d in lo..=hi {
        let x = frame.px(d as f64);
        body.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#ccc\"/>\n",
            MARGIN_T,
            HEIGHT - MARGIN_B
        ));
        body.push_str(&text(
            x,
            HEIGHT - MARGIN_B + 16.0,
            11.0,
            "middle",
            &format!("1e{d}"),
        ));
    }
    let lo = frame.ymin.ceil() as i64;
    let hi = frame.ymax.floor() as i64;
    for d in lo..=hi {
        let y = frame.py(d as f64);
        body.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ccc\"/>\n",
            WIDTH - MARGIN_R
        ));
        body.push_str(&text(
            MARGIN_L - 6.0,
            y + 4.0,
            11.0,
            "end",
            &format!("1e{d}"),
        ));
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::csv::write_sweep_csv;
    use crate::harness::SweepRecord;

    fn temp_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("hbode_plot_test").join(name);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn sweep_csv_renders_reference_line_and_curves() {
        let dir = temp_dir("sweep");
        let records: Vec<SweepRecord> = [100.0f64, 1000.0, 10000.0]
            .iter()
            .map(|&t| SweepRecord {
                t_final: t,
                alpha: 0.5,
                min_grad_norm_xbar: 0.1 * t.powf(-0.6),
                t_star: t,
                leading_bound: t.powf(-4.0 / 7.0),
                finite_t_bound: 1.1 * t.powf(-4.0 / 7.0),
                satisfied: true,
                wall_time_seconds: 0.0,
                step_count: 100,
                error: None,
            })
            .collect();
        let csv = dir.join("sweep_demo.csv");
        write_sweep_csv(&csv, &records).unwrap();
        let svg_path = plot_csv(&csv, &dir).unwrap();
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("slope -4/7"));
    }

    #[test]
    fn run_csv_renders_residual_trace() {
        let dir = temp_dir("run");
        let p = crate::problems::Problem::quadratic(1);
        let params =
            crate::ode::OdeParams::new(2.0, 1.0, 0.01, crate::ode::Method::Rk4, 10).unwrap();
        let traj = crate::ode::integrate(&p, &params).unwrap();
        let csv = dir.join("run_demo.csv");
        crate::harness::csv::write_run_csv(&csv, &traj).unwrap();
        let svg_path = plot_csv(&csv, &dir).unwrap();
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert!(svg.contains("energy residual"));
    }

    #[test]
    fn unknown_schema_and_empty_files_are_rejected() {
        let dir = temp_dir("bad");
        let alien = dir.join("alien.csv");
        std::fs::write(&alien, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(plot_csv(&alien, &dir), Err(Error::Schema(_))));
        let empty = dir.join("empty.csv");
        std::fs::write(&empty, format!("{RUN_HEADER}\n")).unwrap();
        assert!(matches!(plot_csv(&empty, &dir), Err(Error::Schema(_))));
    }
}
