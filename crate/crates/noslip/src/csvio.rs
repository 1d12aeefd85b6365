//! CSV output. Every file starts with `# `-prefixed comment lines describing
//! the run, followed by one header row and the data. Floats are written with
//! 17 significant digits, so reading a file back recovers every value
//! exactly; absent values are empty cells.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use noslip_core::geometry::Region;
use noslip_core::trace::{parse_region, region_str, BoundaryParts, EventKind, EventTrace, TraceRow};

use crate::error::{AppError, AppResult};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

/// Writes a comment block, a header row and string records.
pub fn write_table(path: &Path, comments: &[String], columns: &[String], rows: &[Vec<String>]) -> AppResult<()> {
    let mut out = create(path)?;
    for line in comments {
        writeln!(out, "# {line}").map_err(|e| AppError::io(path, e))?;
    }
    let csv_err = |e| AppError::Csv { path: path.to_path_buf(), source: e };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`write_table`]: comment lines (without the
/// `# ` prefix), the header and the records.
pub fn read_table(path: &Path) -> AppResult<(Vec<String>, Vec<String>, Vec<Vec<String>>)> {
    let mut text = String::new();
    File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(|e| AppError::io(path, e))?;
    let comments: Vec<String> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").or_else(|| l.strip_prefix('#')).unwrap_or(l).to_string())
        .collect();
    let csv_err = |e| AppError::Csv { path: path.to_path_buf(), source: e };
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok((comments, columns, rows))
}

fn trace_record(tr: &EventTrace, row: &TraceRow) -> Vec<String> {
    let mut rec = vec![fmt_f64(row.t), row.event_index.to_string(), row.kind.as_str().to_string()];
    rec.extend(row.x.iter().chain(&row.u).chain(&row.spin).map(|v| fmt_f64(*v)));
    debug_assert_eq!(row.spin.len(), tr.spin_len());
    let b = row.boundary;
    rec.push(fmt_opt(b.map(|b| b.uhat)));
    rec.push(fmt_opt(b.map(|b| b.ubar_norm)));
    rec.push(fmt_opt(b.map(|b| b.w_norm)));
    rec.push(fmt_opt(b.map(|b| b.sbar)));
    rec.push(fmt_f64(row.energy));
    rec.push(row.region.map(|r| region_str(r).to_string()).unwrap_or_default());
    for i in 0..3 {
        rec.push(fmt_opt(row.chart.map(|c| c[i])));
    }
    for i in 0..4 {
        rec.push(fmt_opt(row.monitors.map(|m| m[i])));
    }
    rec
}

/// Writes an event trace with its fixed column layout.
pub fn write_trace(tr: &EventTrace, comments: &[String], path: &Path) -> AppResult<()> {
    let rows: Vec<Vec<String>> = tr.rows.iter().map(|r| trace_record(tr, r)).collect();
    write_table(path, comments, &tr.columns(), &rows)
}

fn bad(msg: impl Into<String>) -> AppError {
    AppError::Parse(msg.into())
}

fn num(cell: &str, col: &str) -> AppResult<f64> {
    cell.parse().map_err(|_| bad(format!("column {col}: malformed number {cell:?}")))
}

fn opt(cell: &str, col: &str) -> AppResult<Option<f64>> {
    if cell.is_empty() {
        Ok(None)
    } else {
        num(cell, col).map(Some)
    }
}

/// Reads a trace written by [`write_trace`], returning the comment lines too.
pub fn read_trace(path: &Path) -> AppResult<(Vec<String>, EventTrace)> {
    let (comments, cols, rows) = read_table(path)?;
    let dim = cols.iter().filter(|c| c.starts_with('x') && c[1..].parse::<usize>().is_ok()).count();
    let n_spin = cols.iter().filter(|c| c.starts_with('S') && c.len() == 3 && c[1..].parse::<usize>().is_ok()).count();
    let spin_dim = (1..=8).find(|k| k * (k - 1) / 2 == n_spin).filter(|_| n_spin > 0).unwrap_or(1);
    let mut tr = EventTrace::new(dim, spin_dim);
    if cols != tr.columns() {
        return Err(bad(format!("{}: unexpected column layout", path.display())));
    }
    for rec in rows {
        if rec.len() != cols.len() {
            return Err(bad(format!("{}: row with {} cells, expected {}", path.display(), rec.len(), cols.len())));
        }
        let f = |i: usize| num(&rec[i], &cols[i]);
        let o = |i: usize| opt(&rec[i], &cols[i]);
        let mut i = 3;
        let take = |i: &mut usize, n: usize| -> AppResult<Vec<f64>> {
            let v = (*i..*i + n).map(f).collect();
            *i += n;
            v
        };
        let x = take(&mut i, dim)?;
        let u = take(&mut i, dim)?;
        let spin = take(&mut i, tr.spin_len())?;
        let boundary = match (o(i)?, o(i + 1)?, o(i + 2)?, o(i + 3)?) {
            (Some(uhat), Some(ubar_norm), Some(w_norm), Some(sbar)) => {
                Some(BoundaryParts { uhat, ubar_norm, w_norm, sbar })
            }
            _ => None,
        };
        let energy = f(i + 4)?;
        let region: Option<Region> = if rec[i + 5].is_empty() {
            None
        } else {
            Some(parse_region(&rec[i + 5]).ok_or_else(|| bad(format!("unknown region {:?}", rec[i + 5])))?)
        };
        let chart = match (o(i + 6)?, o(i + 7)?, o(i + 8)?) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        let monitors = match (o(i + 9)?, o(i + 10)?, o(i + 11)?, o(i + 12)?) {
            (Some(a), Some(b), Some(c), Some(d)) => Some([a, b, c, d]),
            _ => None,
        };
        tr.push(TraceRow {
            t: f(0)?,
            event_index: rec[1].parse().map_err(|_| bad(format!("malformed event index {:?}", rec[1])))?,
            kind: EventKind::parse(&rec[2]).ok_or_else(|| bad(format!("unknown event kind {:?}", rec[2])))?,
            x,
            u,
            spin,
            boundary,
            energy,
            region,
            chart,
            monitors,
        });
    }
    Ok((comments, tr))
}
