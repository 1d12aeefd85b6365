//! Static SVG plots of CSV output: line plots of one column against another
//! (one polyline per group), or a heatmap for grid data.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{AppError, AppResult};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn column(columns: &[String], name: &str) -> AppResult<usize> {
    columns.iter().position(|c| c == name).ok_or_else(|| AppError::Parse(format!("no column named {name:?}")))
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(svg: &mut String, x: &str, y: &str, xr: (f64, f64), yr: (f64, f64)) {
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(svg, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{y}</text>"#, H / 2.0, H / 2.0);
    for (v, px, py, anchor) in [
        (xr.0, PAD, H - PAD + 14.0, "start"),
        (xr.1, W - PAD, H - PAD + 14.0, "end"),
        (yr.0, PAD - 4.0, H - PAD, "end"),
        (yr.1, PAD - 4.0, PAD + 8.0, "end"),
    ] {
        let _ = writeln!(svg, r#"<text x="{px}" y="{py}" text-anchor="{anchor}">{v:.4}</text>"#);
    }
}

/// Line plot of `y` against `x`, one polyline per value of `group` (if any).
pub fn line_plot(columns: &[String], rows: &[Vec<String>], x: &str, y: &str, group: Option<&str>) -> AppResult<String> {
    let (ix, iy) = (column(columns, x)?, column(columns, y)?);
    let ig = group.map(|g| column(columns, g)).transpose()?;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let (Ok(a), Ok(b)) = (r[ix].parse::<f64>(), r[iy].parse::<f64>()) else { continue };
        let key = ig.map(|i| r[i].clone()).unwrap_or_default();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push((a, b));
    }
    let xr = bounds(groups.values().flatten().map(|p| p.0));
    let yr = bounds(groups.values().flatten().map(|p| p.1));
    let sx = |v: f64| PAD + (v - xr.0) / (xr.1 - xr.0) * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - (v - yr.0) / (yr.1 - yr.0) * (H - 2.0 * PAD);
    let mut svg = String::new();
    frame(&mut svg, x, y, xr, yr);
    for (k, key) in order.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = groups[key].iter().map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#, pts.join(" "));
        if !key.is_empty() {
            let _ = writeln!(svg, r#"<text x="{}" y="{}" fill="{color}">{key}</text>"#, W - PAD + 4.0, PAD + 14.0 * (k as f64 + 1.0));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Heatmap of `z` over the grid spanned by columns `x` and `y`; empty cells
/// are left blank.
pub fn heatmap(columns: &[String], rows: &[Vec<String>], x: &str, y: &str, z: &str) -> AppResult<String> {
    let (ix, iy, iz) = (column(columns, x)?, column(columns, y)?, column(columns, z)?);
    let pts: Vec<(f64, f64, Option<f64>)> = rows
        .iter()
        .filter_map(|r| Some((r[ix].parse().ok()?, r[iy].parse().ok()?, r[iz].parse().ok())))
        .collect();
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let xr = bounds(xs.iter().copied());
    let yr = bounds(ys.iter().copied());
    let zr = bounds(pts.iter().filter_map(|p| p.2));
    let (cw, ch) = ((W - 2.0 * PAD) / xs.len().max(1) as f64, (H - 2.0 * PAD) / ys.len().max(1) as f64);
    let mut svg = String::new();
    frame(&mut svg, x, y, xr, yr);
    for (a, b, c) in &pts {
        let Some(c) = c else { continue };
        let i = xs.partition_point(|v| v < a);
        let j = ys.partition_point(|v| v < b);
        let t = (c - zr.0) / (zr.1 - zr.0);
        let (r, g, bl) = ((255.0 * t) as u8, (80.0 + 100.0 * (1.0 - t)) as u8, (255.0 * (1.0 - t)) as u8);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{bl})"/>"#,
            PAD + i as f64 * cw,
            H - PAD - (j as f64 + 1.0) * ch,
            cw + 0.3,
            ch + 0.3
        );
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{z}: {:.4} .. {:.4}</text>"#, W - PAD, PAD - 8.0, zr.0, zr.1);
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_render() {
        let cols: Vec<String> = ["k", "t", "x3"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> =
            (0..10).map(|i| vec![(i % 2).to_string(), i.to_string(), (i * i).to_string()]).collect();
        let s = line_plot(&cols, &rows, "t", "x3", Some("k")).unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
        let h = heatmap(&cols, &rows, "k", "t", "x3").unwrap();
        assert_eq!(h.matches("<rect").count(), 2 + 10);
        assert!(line_plot(&cols, &rows, "t", "nope", None).is_err());
    }
}
