//! CSV tables, SVG plots and atomic file writes.

use crate::montecarlo::{DetectorKind, SweepTable};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "axis,detector,ber_sim,ci95,ber_exact,ber_approx,ber_floor,errors,trials";

/// Six significant digits in scientific notation.
pub fn fmt_ber(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_ber).unwrap_or_default()
}

pub fn csv(table: &SweepTable) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.axis_value,
            r.detector.name(),
            fmt_ber(r.estimate.ber),
            fmt_ber(r.estimate.half_width_95),
            opt(r.analytic.exact),
            opt(r.analytic.approx),
            opt(r.analytic.floor),
            r.estimate.errors,
            r.estimate.trials,
        );
    }
    s
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    tmp.set_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 70.0;
const MR: f64 = 150.0;
const MT: f64 = 20.0;
const MB: f64 = 50.0;

fn colour(d: DetectorKind) -> &'static str {
    match d {
        DetectorKind::Secomc => "#1f77b4",
        DetectorKind::SecomcGenie => "#2ca02c",
        DetectorKind::Nocomc => "#d62728",
        DetectorKind::Baseline => "#9467bd",
    }
}

/// BER against the sweep axis on a log10 vertical scale. Simulated points
/// are markers joined by solid lines; the approximate analytic curve is
/// dashed. Zero values have no place on a log axis and are skipped.
pub fn svg(table: &SweepTable) -> String {
    let xs: Vec<f64> = table.rows.iter().map(|r| r.axis_value).collect();
    let ys: Vec<f64> = table
        .rows
        .iter()
        .flat_map(|r| [Some(r.estimate.ber), r.analytic.approx])
        .flatten()
        .filter(|&y| y > 0.0)
        .collect();
    let (x0, x1) = bounds(&xs);
    let (lo, hi) = if ys.is_empty() {
        (-6.0, 0.0)
    } else {
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min).log10().floor();
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    };
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let py = |y: f64| MT + (hi - y.log10()) / (hi - lo) * (H - MT - MB);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (left, right, top, bottom) = (ML, W - MR, MT, H - MB);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for e in (lo as i32)..=(hi as i32) {
        let y = py(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            left - 6.0,
            y + 4.0
        );
    }
    let mut ticks = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#,
            px(x),
            bottom + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        H - 10.0,
        table.axis.name()
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">BER</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );

    let mut legend_y = top + 10.0;
    for d in DetectorKind::ALL {
        let rows: Vec<_> = table.series(d).collect();
        if rows.is_empty() {
            continue;
        }
        let c = colour(d);
        let sim: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.estimate.ber > 0.0)
            .map(|r| (px(r.axis_value), py(r.estimate.ber)))
            .collect();
        let ana: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.analytic.approx.filter(|&y| y > 0.0).map(|y| (px(r.axis_value), py(y))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
            points(&sim)
        );
        for (x, y) in &sim {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{c}"/>"#);
        }
        if !ana.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{c}" stroke-dasharray="5,3" points="{}"/>"#,
                points(&ana)
            );
        }
        let lx = right + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{c}" stroke-width="1.5"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            legend_y + 4.0,
            d.name()
        );
        legend_y += 18.0;
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">dashed: approx.</text>"#,
        right + 10.0,
        legend_y + 4.0
    );
    s.push_str("</svg>\n");
    s
}

fn bounds(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn points(p: &[(f64, f64)]) -> String {
    p.iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{AnalyticBer, BerEstimate, SweepAxis, SweepRow};

    fn table() -> SweepTable {
        let row = |v: f64, d, e| SweepRow {
            axis_value: v,
            detector: d,
            estimate: BerEstimate::new(e, 1000).unwrap(),
            analytic: AnalyticBer {
                exact: None,
                approx: Some(0.01),
                floor: None,
            },
        };
        SweepTable {
            axis: SweepAxis::GammaDb,
            rows: vec![
                row(0.0, DetectorKind::Nocomc, 123),
                row(5.0, DetectorKind::Nocomc, 0),
                row(0.0, DetectorKind::Baseline, 7),
            ],
        }
    }

    #[test]
    fn ber_format() {
        assert_eq!(fmt_ber(0.0123), "1.23000e-2");
        assert_eq!(fmt_ber(0.0), "0.00000e0");
        assert_eq!(fmt_ber(0.5), "5.00000e-1");
    }

    #[test]
    fn csv_layout() {
        let text = csv(&table());
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("0,nocomc,1.23000e-1,2.03567e-2,,1.00000e-2,,123,1000")
        );
        for l in text.lines() {
            assert_eq!(l.split(',').count(), 9);
        }
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg(&table());
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("nocomc") && s.contains("baseline") && s.contains("1e-1"));
        assert_eq!(s.matches("<circle").count(), 2);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
