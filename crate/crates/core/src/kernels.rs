//! Radial kernels, their shape scaling, and the derivatives needed for
//! derivative-enriched power functions.
//!
//! Every kernel here is of the form `k(x, y) = phi(eps * |x - y|)` with
//! `phi(0) = 1`, so the interpolation matrix always has a unit diagonal.
//! The three families differ in smoothness, which is what drives how fast
//! greedy interpolation can converge:
//!
//! * basic Matérn: `phi(r) = exp(-r)`, finite smoothness `(d + 1) / 2`,
//! * linear Matérn: `phi(r) = (1 + r) exp(-r)`, finite smoothness `(d + 3) / 2`,
//! * Gaussian: `phi(r) = exp(-r^2)`, infinitely smooth.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The three supported kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `phi(r) = exp(-r)`; continuous but not differentiable at the origin.
    BasicMatern,
    /// `phi(r) = (1 + r) exp(-r)`; twice differentiable.
    LinearMatern,
    /// `phi(r) = exp(-r^2)`; smooth.
    Gaussian,
}

impl KernelFamily {
    /// Stable textual name, used in file metadata and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::BasicMatern => "basic-matern",
            KernelFamily::LinearMatern => "linear-matern",
            KernelFamily::Gaussian => "gaussian",
        }
    }

    /// All families, in a fixed order (useful for sweeps).
    pub fn all() -> [KernelFamily; 3] {
        [
            KernelFamily::BasicMatern,
            KernelFamily::LinearMatern,
            KernelFamily::Gaussian,
        ]
    }
}

/// Smoothness of the native space on a `dim`-dimensional domain, measured in
/// the Sobolev scale: `Finite(tau)` means the native space behaves like
/// `H^tau`, `Infinite` means convergence is faster than any algebraic rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    Finite(f64),
    Infinite,
}

/// A radial kernel together with its shape parameter.
///
/// The shape parameter `eps > 0` rescales distance: larger values make the
/// kernel narrower. `eps = 1` is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    eps: f64,
}

impl Kernel {
    /// Kernel with an explicit shape parameter. Fails unless `eps` is a
    /// strictly positive finite number.
    pub fn new(family: KernelFamily, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "kernel shape parameter must be positive and finite, got {eps}"
            )));
        }
        Ok(Kernel { family, eps })
    }

    /// Basic Matérn kernel with shape 1.
    pub fn basic_matern() -> Self {
        Kernel {
            family: KernelFamily::BasicMatern,
            eps: 1.0,
        }
    }

    /// Linear Matérn kernel with shape 1.
    pub fn linear_matern() -> Self {
        Kernel {
            family: KernelFamily::LinearMatern,
            eps: 1.0,
        }
    }

    /// Gaussian kernel with shape 1.
    pub fn gaussian() -> Self {
        Kernel {
            family: KernelFamily::Gaussian,
            eps: 1.0,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn shape(&self) -> f64 {
        self.eps
    }

    /// Radial profile at unscaled radius `r >= 0` (shape already applied by
    /// the caller). All profiles satisfy `phi(0) = 1` and decrease in `r`.
    pub fn profile(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self.family {
            KernelFamily::BasicMatern => (-r).exp(),
            KernelFamily::LinearMatern => (1.0 + r) * (-r).exp(),
            KernelFamily::Gaussian => (-r * r).exp(),
        }
    }

    /// Kernel value `k(x, y)`. Panics if the two points disagree on
    /// dimension; this is a programming error, not a recoverable one.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.profile(self.eps * dist(x, y))
    }

    /// First derivative `d/dx_i k(x, y)` of the kernel in its first argument
    /// along coordinate `axis`.
    ///
    /// Fails for the basic Matérn kernel at coincident points (the profile
    /// has a kink at radius zero); the other families are smooth everywhere.
    pub fn eval_grad1(&self, x: &[f64], y: &[f64], axis: usize) -> Result<f64> {
        let r = dist(x, y);
        let d = x[axis] - y[axis];
        let e = self.eps;
        match self.family {
            KernelFamily::BasicMatern => {
                if r == 0.0 {
                    return Err(Error::UnsupportedDerivative {
                        kernel: self.family.name(),
                        context: "at coincident points",
                    });
                }
                Ok(-e * (-e * r).exp() * d / r)
            }
            KernelFamily::LinearMatern => Ok(-e * e * d * (-e * r).exp()),
            KernelFamily::Gaussian => Ok(-2.0 * e * e * d * (-e * e * r * r).exp()),
        }
    }

    /// Mixed second derivative `d^2/(dx_i dy_i) k(x, y)` along coordinate
    /// `axis`: the kernel reproducing the point evaluation of a partial
    /// derivative against itself.
    ///
    /// Fails for the basic Matérn kernel everywhere (its native space does
    /// not contain derivative functionals); defined for the others at every
    /// point, including `x = y`.
    pub fn eval_hess12(&self, x: &[f64], y: &[f64], axis: usize) -> Result<f64> {
        let r = dist(x, y);
        let d = x[axis] - y[axis];
        let e = self.eps;
        match self.family {
            KernelFamily::BasicMatern => Err(Error::UnsupportedDerivative {
                kernel: self.family.name(),
                context: "anywhere (native space too rough for derivative data)",
            }),
            KernelFamily::LinearMatern => {
                // e^2 exp(-e r) - e^3 d^2 exp(-e r) / r; the second term
                // vanishes as r -> 0 because d^2 <= r^2.
                let ee = (-e * r).exp();
                if r == 0.0 {
                    Ok(e * e)
                } else {
                    Ok(e * e * ee - e * e * e * d * d * ee / r)
                }
            }
            KernelFamily::Gaussian => {
                let g = (-e * e * r * r).exp();
                Ok(2.0 * e * e * g - 4.0 * e.powi(4) * d * d * g)
            }
        }
    }

    /// Native-space smoothness on a `dim`-dimensional domain.
    pub fn smoothness(&self, dim: usize) -> Smoothness {
        let d = dim as f64;
        match self.family {
            KernelFamily::BasicMatern => Smoothness::Finite((d + 1.0) / 2.0),
            KernelFamily::LinearMatern => Smoothness::Finite((d + 3.0) / 2.0),
            KernelFamily::Gaussian => Smoothness::Infinite,
        }
    }

    /// Predicted algebraic decay exponent of the maximal power function under
    /// greedy selection: `1/2 - tau/d` for a kernel of finite smoothness
    /// `tau` in dimension `d`. `None` for the Gaussian, whose decay is
    /// faster than any algebraic rate.
    pub fn theoretical_power_rate(&self, dim: usize) -> Option<f64> {
        match self.smoothness(dim) {
            Smoothness::Finite(tau) => Some(0.5 - tau / dim as f64),
            Smoothness::Infinite => None,
        }
    }

    /// Whether first/mixed-second derivatives exist (everywhere off the
    /// diagonal for the gradient, everywhere for the mixed second).
    pub fn supports_derivatives(&self) -> bool {
        self.family != KernelFamily::BasicMatern
    }
}

impl fmt::Display for Kernel {
    /// `family` when the shape is 1, `family:eps` otherwise. Round-trips
    /// through [`Kernel::from_str`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eps == 1.0 {
            write!(f, "{}", self.family.name())
        } else {
            write!(f, "{}:{}", self.family.name(), self.eps)
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// Parses `"basic-matern"`, `"linear-matern"`, or `"gaussian"`, each
    /// optionally followed by `:<eps>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, eps) = match s.split_once(':') {
            Some((name, eps_str)) => {
                let eps: f64 = eps_str.parse().map_err(|_| Error::Parse {
                    what: "kernel descriptor",
                    detail: format!("shape parameter {eps_str:?} is not a number"),
                })?;
                (name, eps)
            }
            None => (s, 1.0),
        };
        let family = match name {
            "basic-matern" => KernelFamily::BasicMatern,
            "linear-matern" => KernelFamily::LinearMatern,
            "gaussian" => KernelFamily::Gaussian,
            other => {
                return Err(Error::Parse {
                    what: "kernel descriptor",
                    detail: format!(
                    "unknown kernel {other:?} (expected basic-matern, linear-matern, or gaussian)"
                ),
                })
            }
        };
        Kernel::new(family, eps)
    }
}

/// Euclidean distance between two points of equal dimension.
pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "points must have equal dimension");
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
