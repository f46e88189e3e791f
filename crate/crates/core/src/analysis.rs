//! Decay-rate estimation: windowed log-log fits of trace series, their
//! aggregation, and verdicts against theoretical exponents.
//!
//! An algebraic decay `v_n ~ alpha * n^lambda` is a line in log-log space,
//! `log v = log alpha + lambda * log n`. Rates are estimated by ordinary
//! least squares over nine windows that discard early- and late-iterate
//! artifacts, and summarized as the mean and standard deviation of the nine
//! slopes. A series is indexed from `n = 1`: `values[i]` is the value at
//! `n = i + 1`.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, read_csv_lines, write_meta_line};
use crate::kernels::Kernel;

/// A fit window `[start, end]`, inclusive, in 1-based `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Self {
        Window { start, end }
    }
}

/// Least-squares fit of `log values[n]` against `log n` over one window.
/// Returns `(intercept, slope)`.
pub fn fit_loglog(values: &[f64], window: Window) -> Result<(f64, f64)> {
    let Window { start, end } = window;
    if start < 1 || end > values.len() || start >= end {
        return Err(Error::WindowOutOfRange {
            start,
            end,
            len: values.len(),
        });
    }
    let mut xs = Vec::with_capacity(end - start + 1);
    let mut ys = Vec::with_capacity(end - start + 1);
    for n in start..=end {
        let v = values[n - 1];
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositiveValue { n, value: v });
        }
        xs.push((n as f64).ln());
        ys.push(v.ln());
    }
    let m = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    Ok((intercept, slope))
}

/// Per-window fits plus their slope statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub windows: Vec<Window>,
    pub intercepts: Vec<f64>,
    pub slopes: Vec<f64>,
    pub mean_slope: f64,
    /// Sample standard deviation of the per-window slopes (0 for a single
    /// window).
    pub std_slope: f64,
}

/// Fit every window and aggregate. The mean and standard deviation are
/// symmetric functions of the slopes, so window order does not matter.
pub fn rate_over_windows(values: &[f64], windows: &[Window]) -> Result<RateFit> {
    if windows.is_empty() {
        return Err(Error::InvalidConfig("no fit windows given".into()));
    }
    let mut intercepts = Vec::with_capacity(windows.len());
    let mut slopes = Vec::with_capacity(windows.len());
    for &w in windows {
        let (a, b) = fit_loglog(values, w)?;
        intercepts.push(a);
        slopes.push(b);
    }
    let k = slopes.len() as f64;
    let mean_slope = slopes.iter().sum::<f64>() / k;
    let std_slope = if slopes.len() < 2 {
        0.0
    } else {
        (slopes
            .iter()
            .map(|s| (s - mean_slope) * (s - mean_slope))
            .sum::<f64>()
            / (k - 1.0))
            .sqrt()
    };
    Ok(RateFit {
        windows: windows.to_vec(),
        intercepts,
        slopes,
        mean_slope,
        std_slope,
    })
}

/// The nine canonical windows for a series of length `len`: window starts
/// `{50, 75, 100}` crossed with ends `{600, 700, 800}` when the series
/// reaches 800, and the proportionally scaled versions
/// `{ceil(len/16), ceil(3 len/32), ceil(len/8)}` x
/// `{ceil(3 len/4), ceil(7 len/8), len}` for shorter series (identical at
/// `len = 800`). Needs `len >= 16`.
pub fn canonical_windows(len: usize) -> Result<Vec<Window>> {
    if len < 16 {
        return Err(Error::WindowOutOfRange {
            start: 1,
            end: len,
            len,
        });
    }
    let div_ceil = |num: usize, den: usize| num.div_ceil(den);
    let (starts, ends) = if len >= 800 {
        ([50, 75, 100], [600, 700, 800])
    } else {
        (
            [div_ceil(len, 16), div_ceil(3 * len, 32), div_ceil(len, 8)],
            [div_ceil(3 * len, 4), div_ceil(7 * len, 8), len],
        )
    };
    let mut windows = Vec::with_capacity(9);
    for &a in &starts {
        for &b in &ends {
            windows.push(Window::new(a, b));
        }
    }
    Ok(windows)
}

/// Nine-window rate estimate for a decaying series.
pub fn nine_window_rate(values: &[f64]) -> Result<RateFit> {
    rate_over_windows(values, &canonical_windows(values.len())?)
}

/// Outcome of comparing a fitted rate against the theoretical exponent for
/// a finite-smoothness kernel. The upper and lower theoretical bounds share
/// one exponent, so a two-sided tolerance around it is the whole test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichVerdict {
    /// Predicted decay exponent `1/2 - tau/d`.
    pub theory: f64,
    pub mean_slope: f64,
    /// `|mean_slope - theory|`.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare a fit against the kernel's theoretical power-decay exponent.
/// Fails for kernels without a finite algebraic rate (Gaussian).
pub fn sandwich_verdict(
    fit: &RateFit,
    kernel: &Kernel,
    dim: usize,
    tolerance: f64,
) -> Result<SandwichVerdict> {
    let theory = kernel.theoretical_power_rate(dim).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "kernel {kernel} has no algebraic decay exponent to compare against"
        ))
    })?;
    let deviation = (fit.mean_slope - theory).abs();
    Ok(SandwichVerdict {
        theory,
        mean_slope: fit.mean_slope,
        deviation,
        tolerance,
        pass: deviation <= tolerance,
    })
}

/// Serializable rate report: the fit plus optional theory comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub windows: Vec<Window>,
    pub intercepts: Vec<f64>,
    pub slopes: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Theoretical exponent, absent for kernels without one.
    pub theory: Option<f64>,
    /// Pass/fail against `theory` (absent when no verdict was requested).
    pub verdict: Option<bool>,
}

impl RateReport {
    pub fn from_fit(fit: &RateFit, verdict: Option<&SandwichVerdict>) -> Self {
        RateReport {
            windows: fit.windows.clone(),
            intercepts: fit.intercepts.clone(),
            slopes: fit.slopes.clone(),
            mean: fit.mean_slope,
            std: fit.std_slope,
            theory: verdict.map(|v| v.theory),
            verdict: verdict.map(|v| v.pass),
        }
    }

    pub fn write_json(&self, w: &mut impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json(r: impl std::io::Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_json(&mut w)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_json(BufReader::new(std::fs::File::open(path)?))
    }
}

/// One aggregated point for rate-versus-gamma plots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub gamma: f64,
    pub mean_slope: f64,
    pub std_slope: f64,
    /// Theoretical exponent (NaN in files when absent).
    pub theory: Option<f64>,
}

/// Write plot-ready rate data: `gamma,mean_slope,std_slope,theory` with a
/// metadata comment line.
pub fn write_rate_csv(
    w: &mut impl Write,
    points: &[RatePoint],
    meta: &[(&str, String)],
) -> Result<()> {
    write_meta_line(w, meta)?;
    writeln!(w, "gamma,mean_slope,std_slope,theory")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.gamma),
            fmt_f64(p.mean_slope),
            fmt_f64(p.std_slope),
            fmt_f64(p.theory.unwrap_or(f64::NAN))
        )?;
    }
    Ok(())
}

pub fn read_rate_csv(r: impl BufRead) -> Result<Vec<RatePoint>> {
    const WHAT: &str = "rate CSV";
    let (_meta, header, rows) = read_csv_lines(r, WHAT)?;
    if header != ["gamma", "mean_slope", "std_slope", "theory"] {
        return Err(Error::Parse {
            what: WHAT,
            detail: format!("unexpected header {header:?}"),
        });
    }
    rows.iter()
        .map(|fields| {
            if fields.len() != 4 {
                return Err(Error::Parse {
                    what: WHAT,
                    detail: format!("row has {} fields, expected 4", fields.len()),
                });
            }
            let theory = parse_f64(&fields[3], WHAT)?;
            Ok(RatePoint {
                gamma: parse_f64(&fields[0], WHAT)?,
                mean_slope: parse_f64(&fields[1], WHAT)?,
                std_slope: parse_f64(&fields[2], WHAT)?,
                theory: if theory.is_nan() { None } else { Some(theory) },
            })
        })
        .collect()
}
