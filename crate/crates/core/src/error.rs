use core::fmt;

/// Errors raised by the dynamics and geometry routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain of the operation.
    Domain(&'static str),
    /// Incidence with vanishing normal velocity; the collision map is not applied.
    Grazing { uhat: f64 },
    /// A trajectory reached a non-smooth boundary point.
    Corner { point: [f64; 2] },
    /// `1 - r*kappa*sin(phi)` vanished or became negative.
    FocalPoint { denominator: f64 },
    /// No boundary event before the time limit.
    Timeout { t: f64 },
    /// The adaptive step size collapsed.
    StepUnderflow { t: f64, h: f64 },
    /// A degenerate configuration, e.g. zero transversal speed on a strip.
    Degenerate(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the dynamics (corners, grazing, focal points).
    pub fn is_dynamics(&self) -> bool {
        matches!(
            self,
            Error::Grazing { .. } | Error::Corner { .. } | Error::FocalPoint { .. } | Error::StepUnderflow { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Grazing { uhat } => write!(f, "grazing collision (normal velocity {uhat:e})"),
            Error::Corner { point } => write!(f, "trajectory hit a corner at ({}, {})", point[0], point[1]),
            Error::FocalPoint { denominator } => {
                write!(f, "focal point reached: 1 - r*kappa*sin(phi) = {denominator:e}")
            }
            Error::Timeout { t } => write!(f, "no event before t = {t}"),
            Error::StepUnderflow { t, h } => write!(f, "step size underflow at t = {t} (h = {h:e})"),
            Error::Degenerate(msg) => write!(f, "degenerate configuration: {msg}"),
        }
    }
}
