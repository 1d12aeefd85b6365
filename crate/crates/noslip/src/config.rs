//! Run configuration (TOML).
//!
//! ```toml
//! mode = "roll4d"          # noslip | roll3d | roll4d | experiment
//! g = 1.0
//!
//! [geometry]
//! shape = "disc"           # disc | strip | sinai | ball
//! radius = 1.0
//! ball_radius = 0.1
//!
//! [inertia]
//! eta = 0.39183            # exactly one of gamma, beta, eta
//!
//! [initial]
//! x = [0.0, 0.0, 0.0]
//! u = [-0.2, 1.0, 0.0]
//! spin = [0.61, 0.0, -1.0] # upper triangle, row major
//!
//! [run]
//! t_end = 50.0
//! sample_dt = 0.05
//! ```
//!
//! Geometry by mode:
//! * `noslip`: the dimension is the length of `initial.x`. In the plane the
//!   shape is the table; in space `disc`, `strip` and `sinai` give the
//!   vertical cylinder over that table (gravity along `-e3`) and `ball` a
//!   spherical table.
//! * `roll3d`: a 3-ball of radius `ball_radius` rolling around a vertical
//!   plate of width `width` (shape `strip`). The state is `x = [σ, z]`,
//!   `u = [v1, v2]`, `spin = [s]` with `σ` the arclength around the plate.
//! * `roll4d`: a 4-ball on the solid cylinder over the table. The initial
//!   state lies on a flat part (`side = "flat+"` or `"flat-"`): `x` is the
//!   center's `(x1, x2, x3)`, `u` its velocity and `spin` the components
//!   `(S12, S13, S23)` in the coordinate frame.

use serde::{Deserialize, Serialize};

use noslip_core::geometry::{Domain2, Domain3};
use noslip_core::integrate::IntegratorConfig;
use noslip_core::InertiaParams;

use crate::error::{AppError, AppResult};
use crate::experiments::{ExperimentOverrides, ExperimentSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Noslip,
    Roll3d,
    Roll4d,
    Experiment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disc,
    Strip,
    Sinai,
    Ball,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub shape: Option<Shape>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spin: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_events: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Number of collisions (no-slip) or edge passes (rolling).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_events: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    /// Longest admissible flight between collisions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_flight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia: Option<InertiaConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub integrator: IntegratorBlock,
    #[serde(default, skip_serializing_if = "is_default")]
    pub run: RunBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentOverrides>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn parse_err(path: &str, msg: impl std::fmt::Display) -> AppError {
    AppError::Parse(format!("{path}: {msg}"))
}

fn finite(path: &str, v: f64) -> AppResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(path, "must be finite"))
    }
}

fn positive(path: &str, v: Option<f64>) -> AppResult<f64> {
    match v {
        None => Err(parse_err(path, "missing")),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(_) => Err(parse_err(path, "must be positive and finite")),
    }
}

/// The table or rolling surface of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Plane(Domain2),
    Space(Domain3),
    Plate { width: f64, ball_radius: f64 },
    Tube { section: Domain2, ball_radius: f64 },
}

/// A validated configuration with derived values filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub inertia: Option<InertiaParams>,
    pub integrator: IntegratorConfig,
    pub table: Option<Table>,
    pub experiment: Option<ExperimentSpec>,
}

impl InertiaConfig {
    pub fn resolve(&self) -> AppResult<InertiaParams> {
        let given = [self.gamma.is_some(), self.beta.is_some(), self.eta.is_some()].iter().filter(|b| **b).count();
        if given != 1 {
            return Err(parse_err("inertia", "exactly one of gamma, beta, eta must be given"));
        }
        let res = if let Some(g) = self.gamma {
            InertiaParams::from_gamma(finite("inertia.gamma", g)?)
        } else if let Some(b) = self.beta {
            InertiaParams::from_beta(finite("inertia.beta", b)?)
        } else {
            InertiaParams::from_eta(finite("inertia.eta", self.eta.unwrap_or_default())?)
        };
        res.map_err(|e| parse_err("inertia", e))
    }
}

impl IntegratorBlock {
    pub fn resolve(&self) -> AppResult<IntegratorConfig> {
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_step: self.max_step.unwrap_or(d.max_step),
            event_tol: self.event_tol.unwrap_or(d.event_tol),
            max_events: self.max_events.unwrap_or(d.max_events),
            max_time: self.max_time.unwrap_or(d.max_time),
        };
        cfg.validate().map_err(|e| parse_err("integrator", e))?;
        Ok(cfg)
    }
}

impl GeometryConfig {
    fn shape(&self) -> AppResult<Shape> {
        self.shape.ok_or_else(|| parse_err("geometry.shape", "missing"))
    }

    /// The planar table described by this block.
    pub fn section(&self) -> AppResult<Domain2> {
        let d = match self.shape()? {
            Shape::Disc => Domain2::disc(positive("geometry.radius", self.radius)?),
            Shape::Strip => Domain2::strip(positive("geometry.width", self.width)?),
            Shape::Sinai => {
                let c = self.center.unwrap_or([0.0, 0.0]);
                finite("geometry.center", c[0] + c[1])?;
                Domain2::sinai(positive("geometry.half_side", self.half_side)?, positive("geometry.radius", self.radius)?, c)
            }
            Shape::Ball => return Err(parse_err("geometry.shape", "a ball is not a planar table")),
        };
        d.map_err(|e| parse_err("geometry", e))
    }
}

impl RunConfig {
    pub fn geometry(&self) -> AppResult<&GeometryConfig> {
        self.geometry.as_ref().ok_or_else(|| parse_err("geometry", "missing block"))
    }

    pub fn initial(&self) -> AppResult<&InitialConfig> {
        self.initial.as_ref().ok_or_else(|| parse_err("initial", "missing block"))
    }

    /// Validates the configuration and derives inertia, integrator and table.
    pub fn resolve(&self) -> AppResult<Resolved> {
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(parse_err("g", "must be finite and non-negative"));
        }
        let integrator = self.integrator.resolve()?;
        if let Some(n) = self.run.t_end {
            positive("run.t_end", Some(n))?;
        }
        if let Some(n) = self.run.sample_dt {
            positive("run.sample_dt", Some(n))?;
        }
        if let Some(n) = self.run.max_flight {
            positive("run.max_flight", Some(n))?;
        }
        if let Some(init) = &self.initial {
            for (name, v) in [("initial.x", &init.x), ("initial.u", &init.u), ("initial.spin", &init.spin)] {
                for (i, x) in v.iter().enumerate() {
                    finite(&format!("{name}[{i}]"), *x)?;
                }
            }
        }
        let inertia = match &self.inertia {
            Some(i) => Some(i.resolve()?),
            None if self.mode == Mode::Experiment => None,
            None => return Err(parse_err("inertia", "missing block")),
        };
        let mut experiment = None;
        let table = match self.mode {
            Mode::Experiment => {
                let ov = self.experiment.as_ref().ok_or_else(|| parse_err("experiment", "missing block"))?;
                experiment = Some(ExperimentSpec::from_overrides(ov)?);
                None
            }
            Mode::Noslip => {
                let init = self.initial()?;
                let geo = self.geometry()?;
                let n = init.x.len();
                let want_spin = n * (n - 1) / 2;
                if !(n == 2 || n == 3) || init.u.len() != n {
                    return Err(parse_err("initial", "x and u must both have 2 or 3 components"));
                }
                if !init.spin.is_empty() && init.spin.len() != want_spin {
                    return Err(parse_err("initial.spin", format!("expected {want_spin} components")));
                }
                Some(match (n, geo.shape()?) {
                    (3, Shape::Ball) => Table::Space(
                        Domain3::ball(positive("geometry.radius", geo.radius)?).map_err(|e| parse_err("geometry", e))?,
                    ),
                    (3, _) => Table::Space(Domain3::Cylinder(geo.section()?)),
                    _ => Table::Plane(geo.section()?),
                })
            }
            Mode::Roll3d => {
                let geo = self.geometry()?;
                if geo.shape()? != Shape::Strip {
                    return Err(parse_err("geometry.shape", "roll3d rolls around a plate; use \"strip\""));
                }
                let init = self.initial()?;
                if init.x.len() != 2 || init.u.len() != 2 || init.spin.len() > 1 {
                    return Err(parse_err("initial", "roll3d expects x = [sigma, z], u = [v1, v2], spin = [s]"));
                }
                Some(Table::Plate {
                    width: positive("geometry.width", geo.width)?,
                    ball_radius: positive("geometry.ball_radius", geo.ball_radius)?,
                })
            }
            Mode::Roll4d => {
                let geo = self.geometry()?;
                let init = self.initial()?;
                if init.x.len() != 3 || init.u.len() != 3 || !(init.spin.is_empty() || init.spin.len() == 3) {
                    return Err(parse_err("initial", "roll4d expects x, u with 3 components and spin = [S12, S13, S23]"));
                }
                match init.side.as_deref() {
                    None | Some("flat+") | Some("flat-") => {}
                    Some(_) => return Err(parse_err("initial.side", "must be \"flat+\" or \"flat-\"")),
                }
                Some(Table::Tube {
                    section: geo.section()?,
                    ball_radius: positive("geometry.ball_radius", geo.ball_radius)?,
                })
            }
        };
        Ok(Resolved { config: self.clone(), inertia, integrator, table, experiment })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> AppResult<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| AppError::Parse(e.to_string()))?;
    cfg.resolve()?;
    Ok(cfg)
}

/// Comment block describing a resolved configuration: the configuration
/// itself followed by the derived inertia values (as a nested comment, so
/// that the stripped block parses back to the same configuration).
pub fn header_lines(res: &Resolved) -> Vec<String> {
    let mut lines: Vec<String> = res.config.to_toml().lines().map(String::from).collect();
    if let Some(p) = &res.inertia {
        lines.push(format!(
            "# derived: gamma = {:e}, beta = {:e}, c_beta = {:e}, s_beta = {:e}, eta = {:e}",
            p.gamma(),
            p.beta(),
            p.c_beta(),
            p.s_beta(),
            p.eta()
        ));
    }
    lines
}

/// Recovers the configuration embedded in a CSV header.
pub fn config_from_header(text: &str) -> AppResult<RunConfig> {
    let body: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").or_else(|| l.strip_prefix('#')).unwrap_or(l))
        .collect::<Vec<_>>()
        .join("\n");
    parse_config(&body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_disc() {
        let cfg = parse_config(
            "mode = \"noslip\"\n[geometry]\nshape = \"disc\"\nradius = 1.0\n[inertia]\ngamma = 0.0\n[initial]\nx = [0.0, 0.0]\nu = [1.0, 0.5]\n",
        )
        .unwrap();
        let res = cfg.resolve().unwrap();
        assert_eq!(res.inertia.unwrap().c_beta(), 1.0);
    }

    #[test]
    fn conflicting_inertia() {
        let err = parse_config(
            "mode = \"noslip\"\n[geometry]\nshape = \"disc\"\nradius = 1.0\n[inertia]\ngamma = 0.5\neta = 0.3\n[initial]\nx = [0.0, 0.0]\nu = [1.0, 0.5]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("inertia"));
        assert_eq!(err.exit_code(), crate::error::exit::PARSE);
    }

    #[test]
    fn unknown_key_names_path() {
        let err = parse_config("mode = \"noslip\"\n[geometry]\nshape = \"disc\"\nradiuss = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("radiuss"), "{msg}");
    }
}
