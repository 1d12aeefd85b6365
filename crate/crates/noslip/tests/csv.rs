use noslip::csvio::{read_table, read_trace, write_trace};
use noslip_core::geometry::Region;
use noslip_core::trace::{BoundaryParts, EventKind, EventTrace, TraceRow};

fn row(k: usize, dim: usize, spin: usize) -> TraceRow {
    let f = |i: usize| (k * 31 + i) as f64 * 0.1f64.sqrt() - 1.0 / 3.0;
    TraceRow {
        t: f(0) * 1e-7,
        event_index: k,
        kind: if k == 0 { EventKind::Start } else { EventKind::Collision },
        x: (0..dim).map(|i| f(i + 1)).collect(),
        u: (0..dim).map(|i| f(i + 7) * 1e12).collect(),
        spin: (0..spin).map(|i| -f(i + 13)).collect(),
        boundary: (k > 0).then(|| BoundaryParts { uhat: f(20), ubar_norm: f(21), w_norm: 0.0, sbar: f64::MIN_POSITIVE }),
        energy: f(22),
        region: (dim == 4).then_some(Region::Curved),
        chart: (dim == 4).then(|| [f(23), f(24), f(25)]),
        monitors: (k % 2 == 1).then(|| [f(26), f(27), f(28), f(29)]),
    }
}

#[test]
fn traces_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, sd) in [(2, 2), (3, 3), (4, 3)] {
        let mut tr = EventTrace::new(dim, sd);
        for k in 0..5 {
            tr.push(row(k, dim, tr.spin_len()));
        }
        let path = dir.path().join(format!("t{dim}.csv"));
        let comments = vec!["mode = \"noslip\"".to_string(), "note".to_string()];
        write_trace(&tr, &comments, &path).unwrap();
        let (c, back) = read_trace(&path).unwrap();
        assert_eq!(c, comments);
        assert_eq!(back, tr);
    }
}

#[test]
fn empty_trace_has_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/empty.csv");
    let tr = EventTrace::new(3, 3);
    write_trace(&tr, &[], &path).unwrap();
    let (_, cols, rows) = read_table(&path).unwrap();
    assert_eq!(cols, tr.columns());
    assert!(rows.is_empty());
    assert_eq!(read_trace(&path).unwrap().1, tr);
}

#[test]
fn single_event_trace_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let mut tr = EventTrace::new(2, 2);
    tr.push(row(0, 2, 1));
    write_trace(&tr, &[], &path).unwrap();
    assert_eq!(read_table(&path).unwrap().2.len(), 1);
}

#[test]
fn malformed_cells_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut tr = EventTrace::new(2, 2);
    tr.push(row(1, 2, 1));
    write_trace(&tr, &[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let broken = lines[1].replacen("collision", "bounce", 1);
    lines[1] = &broken;
    std::fs::write(&path, lines.join("\n")).unwrap();
    let err = read_trace(&path).unwrap_err();
    assert_eq!(err.exit_code(), noslip::error::exit::PARSE);
}
