//! Target functions available for interpolation experiments.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, BLOB_HOLE_CENTER};

/// A scalar function to interpolate.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetFunction {
    /// `f(x) = |x|^alpha * exp(-|x|^2)` with `|x|` the Euclidean norm.
    /// The exponent dials the smoothness of the kink at the origin, making
    /// this family a convenient probe for functions rougher or smoother
    /// than a kernel's native space.
    FAlpha { alpha: f64 },
    /// `f(x) = 1 / |x - c|^2`, singular at `c`; defaults to the blob
    /// domain's hole center, so the singularity sits just outside the
    /// domain and the function is steep but finite on it.
    InverseSquare { center: Vec<f64> },
    /// The 1-D demonstration function `f(x) = -x + x^2 + (1 + |x|) e^{-|x|}`,
    /// whose second summand group is itself a linear Matérn kernel translate.
    Motivating,
    /// Values tabulated on a fixed point set (for targets supplied as
    /// files). Cannot be evaluated at arbitrary points.
    Tabulated(Vec<f64>),
}

impl TargetFunction {
    /// `FAlpha` with the given exponent; `alpha` must be positive.
    pub fn falpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "falpha exponent must be positive and finite, got {alpha}"
            )));
        }
        Ok(TargetFunction::FAlpha { alpha })
    }

    /// `InverseSquare` centered at the blob domain's hole.
    pub fn inverse_square_default() -> Self {
        TargetFunction::InverseSquare {
            center: BLOB_HOLE_CENTER.to_vec(),
        }
    }

    /// Value at a single point. Fails for [`TargetFunction::Tabulated`],
    /// which only knows values on its own point set.
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        match self {
            TargetFunction::FAlpha { alpha } => {
                let r2: f64 = p.iter().map(|&c| c * c).sum();
                let r = r2.sqrt();
                Ok(r.powf(*alpha) * (-r2).exp())
            }
            TargetFunction::InverseSquare { center } => {
                if p.len() != center.len() {
                    return Err(Error::DimensionMismatch {
                        expected: center.len(),
                        got: p.len(),
                    });
                }
                let d2: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok(1.0 / d2)
            }
            TargetFunction::Motivating => {
                let x = p[0];
                let a = x.abs();
                Ok(-x + x * x + (1.0 + a) * (-a).exp())
            }
            TargetFunction::Tabulated(_) => Err(Error::TabulatedTarget),
        }
    }

    /// Values on every point of a cloud. For tabulated targets the table
    /// length must match the cloud.
    pub fn values_on(&self, cloud: &PointCloud) -> Result<Vec<f64>> {
        match self {
            TargetFunction::Tabulated(values) => {
                if values.len() != cloud.len() {
                    return Err(Error::TargetLengthMismatch {
                        expected: cloud.len(),
                        got: values.len(),
                    });
                }
                Ok(values.clone())
            }
            _ => cloud.iter().map(|p| self.eval(p)).collect(),
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFunction::FAlpha { alpha } => write!(f, "falpha:{alpha}"),
            TargetFunction::InverseSquare { center } => {
                let cs: Vec<String> = center.iter().map(|c| c.to_string()).collect();
                write!(f, "inverse-square:{}", cs.join(","))
            }
            TargetFunction::Motivating => write!(f, "motivating"),
            TargetFunction::Tabulated(v) => write!(f, "tabulated[{}]", v.len()),
        }
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    /// Parses `"falpha:<alpha>"`, `"inverse-square"` (hole center),
    /// `"inverse-square:<c0>,<c1>,..."`, or `"motivating"`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, args) {
            ("falpha", Some(a)) => {
                let alpha: f64 = a.parse().map_err(|_| Error::Parse {
                    what: "target descriptor",
                    detail: format!("exponent {a:?} is not a number"),
                })?;
                TargetFunction::falpha(alpha)
            }
            ("falpha", None) => Err(Error::Parse {
                what: "target descriptor",
                detail: "falpha needs an exponent, e.g. falpha:1.51".to_string(),
            }),
            ("inverse-square", None) => Ok(TargetFunction::inverse_square_default()),
            ("inverse-square", Some(a)) => {
                let center: Vec<f64> = a
                    .split(',')
                    .map(|c| {
                        c.parse::<f64>().map_err(|_| Error::Parse {
                            what: "target descriptor",
                            detail: format!("center coordinate {c:?} is not a number"),
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(TargetFunction::InverseSquare { center })
            }
            ("motivating", None) => Ok(TargetFunction::Motivating),
            _ => Err(Error::Parse {
                what: "target descriptor",
                detail: format!(
                    "unknown target {s:?} (expected falpha:<a>, inverse-square[:<center>], or motivating)"
                ),
            }),
        }
    }
}
