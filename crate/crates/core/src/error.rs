use std::fmt;
use std::path::PathBuf;

use crate::dynamics::DriveStateKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which axis of an efficiency map a lookup violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapAxis {
    Speed,
    Torque,
}

impl fmt::Display for MapAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapAxis::Speed => f.write_str("speed"),
            MapAxis::Torque => f.write_str("torque"),
        }
    }
}

/// Location of a problem inside a parsed text file (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: u64,
    pub column: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(col) => write!(f, "line {}, column {}", self.line, col),
            None => write!(f, "line {}", self.line),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("{axis} {value} {unit} exceeds {limit} {unit}", unit = axis_unit(*.axis))]
    AboveRange { axis: MapAxis, value: f64, limit: f64 },

    #[error("{axis} {value} {unit} is below {limit} {unit}", unit = axis_unit(*.axis))]
    BelowRange { axis: MapAxis, value: f64, limit: f64 },

    #[error("map calibration failed: {0}")]
    Calibration(String),

    #[error("operation requires {expected:?} state but the vehicle is {actual:?}")]
    State {
        expected: DriveStateKind,
        actual: DriveStateKind,
    },

    #[error("infeasible operating point: {0}")]
    Infeasible(crate::strategy::Violation),

    #[error("no feasible speed in the sweep range")]
    NoFeasiblePoint,

    #[error("per-distance energy is undefined at zero speed or zero distance")]
    ZeroDistance,

    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn axis_unit(axis: MapAxis) -> &'static str {
    match axis {
        MapAxis::Speed => "rpm",
        MapAxis::Torque => "N·m",
    }
}

impl Error {
    pub(crate) fn domain(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(line: u64, column: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: Location { line, column },
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
