use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{fit_rate, read_csv, ExperimentRecord};
use crate::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log error-versus-queries chart, one series per (problem, setting).
///
/// Each series gets a dashed guide line through its first point with the
/// least-squares slope of the series.
pub fn render_svg(records: &[ExperimentRecord]) -> Result<String> {
    let mut series: BTreeMap<String, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.err_q75 > 0.0 && r.n_queries > 0) {
        series.entry(format!("{} {}", r.problem, r.setting)).or_default().push(r);
    }
    if series.is_empty() {
        return Err(Error::Input("plot: no series".into()));
    }
    // Shorten labels to the setting when all series share one problem.
    let problems: std::collections::BTreeSet<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    let lx = |r: &ExperimentRecord| (r.n_queries as f64).log2();
    let ly = |r: &ExperimentRecord| r.err_q75.log2();
    let all = series.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in all {
        x0 = x0.min(lx(r));
        x1 = x1.max(lx(r));
        y0 = y0.min(ly(r));
        y1 = y1.max(ly(r));
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for e in x0 as i64..=x1 as i64 {
        let x = px(e as f64);
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, H - PAD, H - PAD + 4.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">2^{e}</text>"#, H - PAD + 18.0);
    }
    for e in y0 as i64..=y1 as i64 {
        let y = py(e as f64);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{y:.1}" x2="{PAD}" y2="{y:.1}" stroke="black"/>"#, PAD - 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">2^{e}</text>"#, PAD - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">queries</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">error quantile</text>"#, H / 2.0, H / 2.0);

    for (i, (name, rs)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let label = if problems.len() == 1 { rs[0].setting.clone() } else { name.clone() };
        let pts: Vec<String> = rs.iter().map(|r| format!("{:.1},{:.1}", px(lx(r)), py(ly(r)))).collect();
        let _ = writeln!(s, r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let slope = if rs.len() >= 4 {
            let owned: Vec<ExperimentRecord> = rs.iter().map(|r| (*r).clone()).collect();
            fit_rate(&owned, 0.0, 0.0)?.slope
        } else {
            (ly(rs[rs.len() - 1]) - ly(rs[0])) / (lx(rs[rs.len() - 1]) - lx(rs[0])).max(1e-12)
        };
        let (ax, ay) = (lx(rs[0]), ly(rs[0]));
        let bx = lx(rs[rs.len() - 1]).max(ax + 1.0);
        let by = ay + slope * (bx - ax);
        let _ = writeln!(
            s,
            r#"<line class="guide" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="5,4"/>"#,
            px(ax),
            py(ay),
            px(bx),
            py(by)
        );
        let ly0 = PAD + 16.0 + 16.0 * i as f64;
        let lx0 = W - PAD - 150.0;
        let _ = writeln!(s, r#"<line x1="{lx0:.1}" y1="{ly0:.1}" x2="{:.1}" y2="{ly0:.1}" stroke="{color}" stroke-width="2"/>"#, lx0 + 20.0);
        let _ = writeln!(s, r#"<text class="legend" x="{:.1}" y="{:.1}">{label} (slope {slope:.2})</text>"#, lx0 + 26.0, ly0 + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(csv_paths: &[&Path], out: &Path) -> Result<()> {
    if csv_paths.is_empty() {
        return Err(Error::Input("plot: empty series list".into()));
    }
    let mut records = Vec::new();
    for p in csv_paths {
        records.extend(read_csv(p)?);
    }
    std::fs::write(out, render_svg(&records)?)?;
    Ok(())
}
