use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ReportFormat;
use super::experiment::{ExperimentOutcome, ExperimentReport};
use super::HarnessError;
use crate::bounds::{BoundCase, BoundReport};
use crate::optimizer::TrajectoryRecord;

pub const CSV_HEADER: &str = "t,f,h,d,grad_sq_norm,eta";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Trajectory as CSV: header, then one LF-terminated row per record.
/// Absent `h` or `d` are left empty.
pub fn trajectory_csv(trajectory: &[TrajectoryRecord]) -> String {
    let mut out = String::with_capacity(64 * (trajectory.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trajectory {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t,
            num(r.f),
            opt_num(r.h),
            opt_num(r.d),
            num(r.grad_sq_norm),
            num(r.eta)
        );
    }
    out
}

pub fn emit_trajectory_csv(trajectory: &[TrajectoryRecord], path: &Path) -> Result<(), HarnessError> {
    fs::write(path, trajectory_csv(trajectory))?;
    Ok(())
}

/// Parses the output of [`trajectory_csv`].
pub fn read_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRecord>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == CSV_HEADER => {}
        _ => {
            return Err(HarnessError::Csv {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| HarnessError::Csv { line: line_no, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let float = |s: &str, name: &str| s.parse::<f64>().map_err(|e| err(format!("{name}: {e}")));
        let opt = |s: &str, name: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                float(s, name).map(Some)
            }
        };
        out.push(TrajectoryRecord {
            t: fields[0].parse().map_err(|e| err(format!("t: {e}")))?,
            f: float(fields[1], "f")?,
            h: opt(fields[2], "h")?,
            d: opt(fields[3], "d")?,
            grad_sq_norm: float(fields[4], "grad_sq_norm")?,
            eta: float(fields[5], "eta")?,
        });
    }
    Ok(out)
}

/// JSON report. Wall-clock duration is dropped unless the config asks for
/// it, so repeated runs give identical bytes.
pub fn emit_report(report: &ExperimentReport) -> Result<String, HarnessError> {
    let mut report = report.clone();
    if !report.config.output.include_timing {
        report.duration_seconds = None;
    }
    to_json(&report)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn term(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6e}"))
        .unwrap_or_else(|| "not-applicable".to_owned())
}

fn bound_row(out: &mut String, label: &str, report: &BoundReport) {
    let _ = write!(out, "  {label:<10}");
    for case in BoundCase::ALL {
        let _ = write!(out, " {:>16}", term(report.term(case)));
    }
    let _ = writeln!(out, " {:>14.6e}  ({})", report.bound_value, report.active_case);
}

pub fn render_text_report(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let o = &report.objective;
    let s = &report.summary;
    let _ = writeln!(out, "objective   {} (dimension {})", o.kind, o.dimension);
    let _ = writeln!(
        out,
        "constants   alpha={:e} beta={} G={:e} d0={:e} f*={:e}",
        o.alpha,
        o.beta
            .map(|b| format!("{b:e}"))
            .unwrap_or_else(|| "not-applicable".into()),
        o.g,
        o.d0,
        o.f_star
    );
    let _ = writeln!(
        out,
        "run         {} T={} seed={} steps={}{}",
        s.schedule,
        report.config.horizon,
        report.config.seed,
        s.steps_taken,
        if s.stopped_early { " (stopped early)" } else { "" }
    );
    let _ = writeln!(
        out,
        "result      best f={:e} at t={} min h={:e} max |g|={:e}",
        s.best_value, s.best_index, s.min_h, s.max_grad_norm
    );
    if let Some(a) = &report.adaptive {
        let _ = writeln!(
            out,
            "adaptive    K={} (required {}) best epoch={} final f~={:e}",
            a.epochs,
            a.epochs_required,
            a.best_epoch,
            a.lower_bounds.last().copied().unwrap_or(f64::NAN)
        );
        if let Some(v) = &a.violation {
            let _ = writeln!(out, "            stopped: {v}");
        }
    }

    let _ = writeln!(out, "\nbounds");
    let _ = write!(out, "  {:<10}", "");
    for case in BoundCase::ALL {
        let _ = write!(out, " {:>16}", case.label());
    }
    let _ = writeln!(out, " {:>14}", "min");
    bound_row(&mut out, "R_T,1", &report.bounds.r_t_1);
    bound_row(&mut out, "R_T,1/2", &report.bounds.r_t_half);
    bound_row(&mut out, "B_T", &report.bounds.b_t);

    let _ = writeln!(out, "\ncompliance");
    for c in &report.compliance {
        let status = match (c.enforced, c.pass) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, _) => "INFO",
        };
        let _ = write!(
            out,
            "  {status} margin={:e} {} achieved={:e} bound={:e}",
            c.margin, c.name, c.achieved, c.bound
        );
        match &c.note {
            Some(n) => {
                let _ = writeln!(out, "  [{n}]");
            }
            None => out.push('\n'),
        }
    }

    let _ = writeln!(out, "\naudits");
    for (name, a) in report.audits.all() {
        let status = if !a.applicable {
            "N/A "
        } else if a.pass {
            "PASS"
        } else {
            "FAIL"
        };
        let _ = write!(
            out,
            "  {status} {name:<22} checked={} violations={}",
            a.checked, a.violation_count
        );
        match &a.note {
            Some(n) => {
                let _ = writeln!(out, "  [{n}]");
            }
            None => out.push('\n'),
        }
        for v in &a.violations {
            let _ = writeln!(out, "         t={} {}: {:e} > {:e}", v.t, v.inequality, v.lhs, v.rhs);
        }
    }
    let _ = writeln!(out, "\noverall     {}", if report.passed { "PASS" } else { "FAIL" });
    out
}

/// Line chart of `log10 h_t`. Points with `h_t = 0` are clipped to the
/// smallest positive value in the run.
pub fn render_svg(trajectory: &[TrajectoryRecord]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let values: Vec<(usize, f64)> = trajectory.iter().filter_map(|r| r.h.map(|h| (r.t, h))).collect();
    let floor = values
        .iter()
        .map(|&(_, h)| h)
        .filter(|h| *h > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    if values.is_empty() || !floor.is_finite() {
        let _ = writeln!(
            out,
            r#"<text x="{PAD}" y="{PAD}">no positive suboptimality to plot</text>"#
        );
        out.push_str("</svg>\n");
        return out;
    }
    let logs: Vec<(f64, f64)> = values.iter().map(|&(t, h)| (t as f64, h.max(floor).log10())).collect();
    let (lo, hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    let (lo, hi) = if hi - lo < 1e-12 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    };
    let t_max = logs.last().map_or(1.0, |p| p.0.max(1.0));
    let x = |t: f64| PAD + (W - 2.0 * PAD) * t / t_max;
    let y = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);
    let _ = writeln!(
        out,
        r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    let _ = writeln!(
        out,
        r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#,
        H - PAD
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12">t</text>"#,
        W - PAD,
        H - PAD + 20.0
    );
    let _ = writeln!(out, r#"<text x="5" y="{}" font-size="12">log10 h</text>"#, PAD - 10.0);
    let _ = writeln!(out, r#"<text x="5" y="{}" font-size="10">{hi:.1}</text>"#, PAD + 4.0);
    let _ = writeln!(out, r#"<text x="5" y="{}" font-size="10">{lo:.1}</text>"#, H - PAD);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="10">{t_max}</text>"#,
        W - PAD - 10.0,
        H - PAD + 14.0
    );
    out.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points=""#);
    for (i, &(t, v)) in logs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", x(t), y(v));
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

/// Writes `report.json`, `report.txt`, `trajectory.csv` and optionally
/// `trajectory.svg` into `dir`. Returns the written paths.
pub fn write_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let report = &outcome.report;
    let output = &report.config.output;
    let mut written = Vec::new();
    if matches!(output.report, ReportFormat::Json | ReportFormat::Both) {
        let path = dir.join("report.json");
        fs::write(&path, emit_report(report)?)?;
        written.push(path);
    }
    if matches!(output.report, ReportFormat::Text | ReportFormat::Both) {
        let path = dir.join("report.txt");
        fs::write(&path, render_text_report(report))?;
        written.push(path);
    }
    let path = dir.join("trajectory.csv");
    emit_trajectory_csv(&outcome.run.trajectory, &path)?;
    written.push(path);
    if output.svg {
        let path = dir.join("trajectory.svg");
        fs::write(&path, render_svg(&outcome.run.trajectory))?;
        written.push(path);
    }
    Ok(written)
}
