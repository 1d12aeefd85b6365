//! Time-stamped event records shared by the billiard and rolling flows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::Region;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Start,
    Collision,
    /// Crossing between a flat and the curved part of a rolling surface.
    Junction,
    /// Regularly spaced output sample.
    Sample,
    End,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::Collision => "collision",
            EventKind::Junction => "junction",
            EventKind::Sample => "sample",
            EventKind::End => "end",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "start" => EventKind::Start,
            "collision" => EventKind::Collision,
            "junction" => EventKind::Junction,
            "sample" => EventKind::Sample,
            "end" => EventKind::End,
            _ => return None,
        })
    }
}

pub fn region_str(r: Region) -> &'static str {
    match r {
        Region::FlatPlus => "flat+",
        Region::FlatMinus => "flat-",
        Region::Curved => "curved",
    }
}

pub fn parse_region(s: &str) -> Option<Region> {
    Some(match s {
        "flat+" => Region::FlatPlus,
        "flat-" => Region::FlatMinus,
        "curved" => Region::Curved,
        _ => return None,
    })
}

/// Boundary decomposition of a kinetic state at a collision point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryParts {
    pub uhat: f64,
    pub ubar_norm: f64,
    pub w_norm: f64,
    /// Tangential spin; zero in the plane.
    pub sbar: f64,
}

/// Energy monitors `(E1, E2, E_total, E_total + g x3)` of a rolling state.
pub type Monitors = [f64; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub event_index: usize,
    pub kind: EventKind,
    /// Position (ambient coordinates).
    pub x: Vec<f64>,
    /// Velocity (ambient coordinates).
    pub u: Vec<f64>,
    /// Upper triangle of the spin matrix, row major.
    pub spin: Vec<f64>,
    pub boundary: Option<BoundaryParts>,
    /// Kinetic energy per unit mass.
    pub energy: f64,
    pub region: Option<Region>,
    /// Chart coordinates `(s, φ, x3)` on a rolling surface.
    pub chart: Option<[f64; 3]>,
    pub monitors: Option<Monitors>,
}

/// A sequence of rows with a fixed layout: `dim` position and velocity
/// components and the upper triangle of a `spin_dim × spin_dim` spin matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EventTrace {
    pub dim: usize,
    pub spin_dim: usize,
    pub rows: Vec<TraceRow>,
}

impl EventTrace {
    pub fn new(dim: usize, spin_dim: usize) -> Self {
        Self { dim, spin_dim, rows: Vec::new() }
    }

    pub fn spin_len(&self) -> usize {
        self.spin_dim * self.spin_dim.saturating_sub(1) / 2
    }

    /// Column names in output order.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = ["t", "event_index", "kind"].iter().map(|s| String::from(*s)).collect();
        cols.extend((1..=self.dim).map(|i| format!("x{i}")));
        cols.extend((1..=self.dim).map(|i| format!("u{i}")));
        for i in 1..=self.spin_dim {
            for j in i + 1..=self.spin_dim {
                cols.push(format!("S{i}{j}"));
            }
        }
        for c in [
            "uhat", "ubar_norm", "w_norm", "sbar", "energy", "region", "chart_s", "chart_phi", "chart_x3", "E1", "E2",
            "E_total", "E_total_gx3",
        ] {
            cols.push(String::from(c));
        }
        cols
    }

    pub fn push(&mut self, row: TraceRow) {
        debug_assert_eq!(row.x.len(), self.dim);
        debug_assert_eq!(row.spin.len(), self.spin_len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_layout() {
        let tr = EventTrace::new(3, 3);
        let cols = tr.columns();
        assert_eq!(cols.len(), 3 + 3 + 3 + 3 + 13);
        assert_eq!(cols[9], "S12");
        assert_eq!(cols[11], "S23");
        assert_eq!(tr.spin_len(), 3);
    }

    #[test]
    fn names_round_trip() {
        for k in [EventKind::Start, EventKind::Collision, EventKind::Junction, EventKind::Sample, EventKind::End] {
            assert_eq!(EventKind::parse(k.as_str()), Some(k));
        }
        for r in [Region::FlatPlus, Region::FlatMinus, Region::Curved] {
            assert_eq!(parse_region(region_str(r)), Some(r));
        }
    }
}
