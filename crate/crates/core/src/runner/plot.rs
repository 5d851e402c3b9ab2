//! SVG stacked-bar charts of summary files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::table::COLUMNS;
use super::{list_files, RunError};
use crate::Result;

const COLORS: [&str; 6] = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948"];

/// Stacked bars of annual energy per component, one bar per year.
pub fn stacked_bar_svg(title: &str, rows: &[(i32, [f64; 6])]) -> String {
    let (w, h) = (720.0, 420.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let max_total = rows.iter().map(|r| r.1.iter().sum::<f64>()).fold(0.0, f64::max).max(1e-9);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="15">{}</text>"#, left, escape(title));
    for i in 0..=4 {
        let v = max_total * i as f64 / 4.0;
        let y = top + plot_h - plot_h * i as f64 / 4.0;
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, left + plot_w);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.0}</text>"#, left - 6.0, y + 4.0, v);
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">GWh</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    let slot = plot_w / rows.len().max(1) as f64;
    let bar = slot * 0.6;
    for (i, (year, values)) in rows.iter().enumerate() {
        let x = left + slot * i as f64 + (slot - bar) / 2.0;
        let mut y = top + plot_h;
        for (c, v) in values.iter().enumerate() {
            let bh = plot_h * v / max_total;
            y -= bh;
            let _ = writeln!(s, r#"<rect x="{x:.1}" y="{y:.1}" width="{bar:.1}" height="{bh:.1}" fill="{}"/>"#, COLORS[c]);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{year}</text>"#, x + bar / 2.0, top + plot_h + 18.0);
    }
    for (c, name) in COLUMNS[1..].iter().enumerate() {
        let y = top + 10.0 + 20.0 * c as f64;
        let x = left + plot_w + 20.0;
        let _ = writeln!(s, r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{}"/>"#, y - 10.0, COLORS[c]);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}">{name}</text>"#, x + 18.0);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn read_summary(path: &Path) -> Result<Vec<(i32, [f64; 6])>> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || RunError::Io { path: path.display().to_string(), message: format!("malformed summary row `{line}`") };
        if fields.len() != 7 {
            return Err(bad().into());
        }
        let year = fields[0].parse().map_err(|_| bad())?;
        let mut values = [0.0; 6];
        for (v, f) in values.iter_mut().zip(&fields[1..]) {
            *v = f.parse().map_err(|_| bad())?;
        }
        rows.push((year, values));
    }
    Ok(rows)
}

/// Write one chart per scenario for `geography` into `out/plots`.
pub fn plot_outputs(out: &Path, geography: &str) -> Result<Vec<PathBuf>> {
    let target = format!("summary/{geography}.csv");
    let plots = out.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| RunError::io(&plots, e))?;
    let mut written = Vec::new();
    for rel in list_files(out) {
        let rel_text = rel.to_string_lossy().replace('\\', "/");
        let Some(scenario) = rel_text.strip_suffix(&target) else { continue };
        let scenario = scenario.trim_end_matches('/');
        let rows = read_summary(&out.join(&rel))?;
        let svg = stacked_bar_svg(&format!("{geography} annual demand, {scenario}"), &rows);
        let path = plots.join(format!("{}_{geography}.svg", scenario.replace('/', "_")));
        std::fs::write(&path, svg).map_err(|e| RunError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_bar_segment_per_value() {
        let rows: Vec<(i32, [f64; 6])> = (0..7).map(|i| (2020 + 5 * i, [10.0, 2.0, 3.0, 1.0, 0.5, 0.5])).collect();
        let svg = stacked_bar_svg("IN", &rows);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect x=").count(), 7 * 6 + 6);
        assert!(svg.contains("Com AC"));
    }
}
