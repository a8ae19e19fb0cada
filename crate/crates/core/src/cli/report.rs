//! CSV and SVG emission for convergence and stability studies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{log_log_fit, ConvergenceReport, ConvergenceRow};
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "N,h,err_y,err_z,runtime_s";
pub const STABILITY_HEADER: &str = "c,N,dev,dev_y0,dev_z_sum";

/// 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_optional(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_else(|| "NA".to_string())
}

/// `<problem>_<alpha>` file stem.
pub fn report_stem(report: &ConvergenceReport) -> String {
    format!("{}_{}", report.problem, report.alpha)
}

pub fn report_csv(report: &ConvergenceReport, record_runtime: bool) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in &report.rows {
        let runtime = if record_runtime { fmt_real(r.wall_time_seconds) } else { "NA".into() };
        let _ = writeln!(out, "{},{},{},{},{}", r.steps, fmt_real(r.h), fmt_real(r.err_y), fmt_real(r.err_z), runtime);
    }
    let _ = writeln!(out, "CR_y,{}", fmt_optional(report.cr_y));
    let _ = writeln!(out, "CR_z,{}", fmt_optional(report.cr_z));
    out
}

/// Parses a report written by [`report_csv`]. Runtimes written as `NA`
/// come back as `NaN`.
pub fn parse_report_csv(text: &str, problem: &str, alpha: f64) -> Result<ConvergenceReport> {
    let bad = |line: &str| Error::config(format!("malformed report line '{line}'"));
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(Error::config("report header missing"));
    }
    let num = |s: &str| -> Option<f64> {
        if s == "NA" {
            Some(f64::NAN)
        } else {
            s.parse().ok()
        }
    };
    let mut rows = Vec::new();
    let (mut cr_y, mut cr_z) = (None, None);
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        match cells.as_slice() {
            ["CR_y", v] => cr_y = num(v).ok_or_else(|| bad(line))?.into(),
            ["CR_z", v] => cr_z = num(v).ok_or_else(|| bad(line))?.into(),
            [n, h, ey, ez, rt] => rows.push(ConvergenceRow {
                steps: n.parse().map_err(|_| bad(line))?,
                h: num(h).ok_or_else(|| bad(line))?,
                err_y: num(ey).ok_or_else(|| bad(line))?,
                err_z: num(ez).ok_or_else(|| bad(line))?,
                wall_time_seconds: num(rt).ok_or_else(|| bad(line))?,
            }),
            _ => return Err(bad(line)),
        }
    }
    let finite = |v: Option<f64>| v.filter(|x| !x.is_nan());
    Ok(ConvergenceReport { problem: problem.to_string(), alpha, rows, cr_y: finite(cr_y), cr_z: finite(cr_z) })
}

/// Log-log plot of `err_y`, `err_z` against `h` with least-squares fit
/// lines and a slope-2 reference line.
pub fn report_svg(report: &ConvergenceReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 60.0;

    let (hy, ey) = report.regression_points(|r| r.err_y);
    let (hz, ez) = report.regression_points(|r| r.err_z);
    let lh: Vec<f64> = hy.iter().chain(&hz).map(|h| h.log10()).collect();
    let le: Vec<f64> = ey.iter().chain(&ez).map(|e| e.log10()).collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}, alpha = {}</text>"#,
        W / 2.0,
        report.problem,
        report.alpha
    );
    if lh.is_empty() {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">all errors at floor</text>"#, W / 2.0, H / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let bounds = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min).floor();
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) }
    };
    let (x_lo, x_hi) = bounds(&lh);
    let (y_lo, y_hi) = bounds(&le);
    let px = |lx: f64| LEFT + (lx - x_lo) / (x_hi - x_lo) * (W - LEFT - RIGHT);
    let py = |ly: f64| H - BOTTOM - (ly - y_lo) / (y_hi - y_lo) * (H - TOP - BOTTOM);

    let _ = writeln!(
        svg,
        r#"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black"/>"#,
        px(x_lo), py(y_hi), px(x_lo), py(y_lo), px(x_hi), py(y_lo)
    );
    for d in (x_lo as i32)..=(x_hi as i32) {
        let x = px(d as f64);
        let _ = writeln!(svg, r#"<path d="M{x:.2},{:.2} L{x:.2},{:.2}" stroke="black"/>"#, py(y_lo), py(y_lo) + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">1e{d}</text>"#, py(y_lo) + 20.0);
    }
    for d in (y_lo as i32)..=(y_hi as i32) {
        let y = py(d as f64);
        let _ = writeln!(svg, r#"<path d="M{:.2},{y:.2} L{:.2},{y:.2}" stroke="black"/>"#, px(x_lo) - 5.0, px(x_lo));
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">1e{d}</text>"#, px(x_lo) - 8.0, y + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">h</text>"#, (LEFT + W - RIGHT) / 2.0, H - 15.0);
    let _ = writeln!(svg, r#"<text x="20" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.1})">error</text>"#, H / 2.0, H / 2.0);

    let mut line = |slope: f64, intercept_log10: f64, colour: &str, dash: &str| {
        // log10 e = slope log10 h + intercept, clipped to the plot box
        let ys = |lx: f64| slope * lx + intercept_log10;
        let (a, b) = (x_lo, x_hi);
        let _ = writeln!(
            svg,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="{colour}" stroke-dasharray="{dash}"/>"#,
            px(a), py(ys(a).clamp(y_lo, y_hi)), px(b), py(ys(b).clamp(y_lo, y_hi))
        );
    };
    let series = [("err_y", &hy, &ey, "#1f77b4"), ("err_z", &hz, &ez, "#d62728")];
    for (_, hs, es, colour) in &series {
        if let Ok((slope, intercept)) = log_log_fit(hs, es) {
            line(slope, intercept / std::f64::consts::LN_10, colour, "6 3");
        }
    }
    if let (Some(h0), Some(e0)) = (hy.first().or(hz.first()), ey.first().or(ez.first())) {
        line(2.0, e0.log10() - 2.0 * h0.log10(), "gray", "2 3");
    }
    for (_, hs, es, colour) in &series {
        for (h, e) in hs.iter().zip(es.iter()) {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{colour}"/>"#, px(h.log10()), py(e.log10()));
        }
    }
    let fmt_cr = |v: Option<f64>| v.map(|c| format!("{c:.4}")).unwrap_or_else(|| "NA".into());
    let legend = [
        (format!("err_y (CR {})", fmt_cr(report.cr_y)), "#1f77b4"),
        (format!("err_z (CR {})", fmt_cr(report.cr_z)), "#d62728"),
        ("slope 2".to_string(), "gray"),
    ];
    for (k, (label, colour)) in legend.iter().enumerate() {
        let y = TOP + 16.0 + 18.0 * k as f64;
        let _ = writeln!(svg, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{colour}"/>"#, LEFT + 15.0, y - 9.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{y:.1}" font-family="sans-serif" font-size="12">{label}</text>"#, LEFT + 30.0);
    }
    svg.push_str("</svg>\n");
    svg
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `<problem>_<alpha>.csv` (and `.svg` when requested) into `dir`.
pub fn emit_report(report: &ConvergenceReport, dir: &Path, emit_svg: bool, record_runtime: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let stem = report_stem(report);
    let csv_path = dir.join(format!("{stem}.csv"));
    write_file(&csv_path, &report_csv(report, record_runtime))?;
    let mut written = vec![csv_path];
    if emit_svg {
        let svg_path = dir.join(format!("{stem}.svg"));
        write_file(&svg_path, &report_svg(report))?;
        written.push(svg_path);
    }
    Ok(written)
}

/// One line of the stability sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub c: f64,
    pub steps: usize,
    pub dev: f64,
    pub dev_y0: f64,
    pub dev_z_sum: f64,
}

pub fn stability_csv(rows: &[StabilityRow]) -> String {
    let mut out = String::from(STABILITY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", fmt_real(r.c), r.steps, fmt_real(r.dev), fmt_real(r.dev_y0), fmt_real(r.dev_z_sum));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ConvergenceReport {
        let rows = (3..8)
            .map(|m| {
                let h = 0.5f64.powi(m);
                ConvergenceRow { steps: 1 << m, h, err_y: 0.3 * h * h, err_z: 0.1 * h.powf(2.1), wall_time_seconds: 0.01 * m as f64 }
            })
            .collect();
        ConvergenceReport::from_rows("example1", 0.25, rows)
    }

    #[test]
    fn csv_layout() {
        let csv = report_csv(&sample_report(), true);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 5 + 2);
        assert_eq!(lines[0], REPORT_HEADER);
        assert!(lines[1].starts_with("8,1.2500000000000000e-1,"));
        assert!(lines[6].starts_with("CR_y,2.0000000000000"));
        assert!(lines[7].starts_with("CR_z,"));
    }

    #[test]
    fn floor_rates_print_na() {
        let rows = vec![
            ConvergenceRow { steps: 8, h: 0.125, err_y: 1e-15, err_z: 1e-16, wall_time_seconds: 0.0 },
            ConvergenceRow { steps: 16, h: 0.0625, err_y: 2e-15, err_z: 1e-16, wall_time_seconds: 0.0 },
        ];
        let rep = ConvergenceReport::from_rows("linear", 0.5, rows);
        let csv = report_csv(&rep, false);
        assert!(csv.ends_with("CR_y,NA\nCR_z,NA\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",NA"));
        assert!(report_svg(&rep).contains("all errors at floor"));
    }

    #[test]
    fn csv_round_trip() {
        let rep = sample_report();
        let back = parse_report_csv(&report_csv(&rep, true), &rep.problem, rep.alpha).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn svg_contains_series() {
        let svg = report_svg(&sample_report());
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 10);
        assert!(svg.contains("slope 2"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&sample_report(), dir.path(), true, true).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files[0].ends_with("example1_0.25.csv"));
        assert!(files[1].ends_with("example1_0.25.svg"));
    }

    #[test]
    fn emit_reports_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_report(&sample_report(), &blocker.join("sub"), false, true).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 1);
    }
}
