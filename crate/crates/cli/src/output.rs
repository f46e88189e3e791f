//! Output-path conventions and the small CSV formats owned by the CLI:
//! target-value files and the accuracy-versus-restriction table. Larger
//! artifacts (traces, models, clouds, rate reports) are written and read
//! by the library's own serializers so every file round-trips.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use stabgreedy::{Error, Result};

/// Shortest round-trip float formatting; `NaN` marks missing values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_f64(s: &str, what: &'static str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        what,
        detail: format!("{s:?} is not a number"),
    })
}

fn parse_usize(s: &str, what: &'static str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Parse {
        what,
        detail: format!("{s:?} is not a non-negative integer"),
    })
}

/// Subdirectory for one subcommand's outputs, created on demand.
pub fn command_dir(out: &Path, command: &str) -> Result<PathBuf> {
    let dir = out.join(command);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// File stem `<kernel>_d<dim>_g<gamma>_s<seed>` shared by all commands.
pub fn run_stem(kernel: &str, dim: usize, gamma: f64, seed: u64) -> String {
    format!("{kernel}_d{dim}_g{}_s{seed}", fmt_f64(gamma))
}

/// Stem with the target exponent spliced in, for sweeps that run several
/// targets at the same kernel/dimension/restriction/seed.
pub fn alpha_stem(kernel: &str, alpha: f64, dim: usize, gamma: f64, seed: u64) -> String {
    format!(
        "{kernel}_a{}_d{dim}_g{}_s{seed}",
        fmt_f64(alpha),
        fmt_f64(gamma)
    )
}

/// Skip `#` comment lines, return the header fields and data rows of a
/// comma-separated file.
fn read_csv_body(r: impl BufRead, what: &'static str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|f| f.trim().to_string()).collect();
        match header {
            None => header = Some(fields),
            Some(_) => rows.push(fields),
        }
    }
    let header = header.ok_or(Error::Parse {
        what,
        detail: "file has no header line".to_string(),
    })?;
    Ok((header, rows))
}

/// Write target values as a one-column CSV (`f` header, one value per row).
pub fn write_values_csv(w: &mut impl Write, values: &[f64]) -> Result<()> {
    writeln!(w, "# values={}", values.len())?;
    writeln!(w, "f")?;
    for v in values {
        writeln!(w, "{}", fmt_f64(*v))?;
    }
    Ok(())
}

/// Read a one-column target-values CSV written by [`write_values_csv`].
pub fn read_values_csv(r: impl BufRead) -> Result<Vec<f64>> {
    const WHAT: &str = "target values CSV";
    let (header, rows) = read_csv_body(r, WHAT)?;
    if header != ["f"] {
        return Err(Error::Parse {
            what: WHAT,
            detail: format!("expected header \"f\", got {header:?}"),
        });
    }
    rows.iter()
        .map(|row| {
            if row.len() != 1 {
                return Err(Error::Parse {
                    what: WHAT,
                    detail: format!("expected one value per row, got {row:?}"),
                });
            }
            parse_f64(&row[0], WHAT)
        })
        .collect()
}

pub fn load_values_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_values_csv(BufReader::new(fs::File::open(path)?))
}

pub fn save_values_csv(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    write_values_csv(&mut w, values)
}

/// Accuracy-versus-restriction summary: one row per restriction strength,
/// and a `(centers, final test residual)` column pair per target exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityTable {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `n_max[a][g]` = centers selected for `alphas[a]`, `gammas[g]`.
    pub n_max: Vec<Vec<usize>>,
    /// `residual[a][g]` = max interpolation error on the held-out cloud.
    pub residual: Vec<Vec<f64>>,
}

impl StabilityTable {
    pub fn write_csv(&self, w: &mut impl Write, meta: &[(&str, String)]) -> Result<()> {
        let body: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if !body.is_empty() {
            writeln!(w, "# {}", body.join(" "))?;
        }
        let mut header = vec!["gamma".to_string()];
        for a in &self.alphas {
            header.push(format!("n_max_alpha_{}", fmt_f64(*a)));
            header.push(format!("residual_alpha_{}", fmt_f64(*a)));
        }
        writeln!(w, "{}", header.join(","))?;
        for (g, gamma) in self.gammas.iter().enumerate() {
            let mut fields = vec![fmt_f64(*gamma)];
            for a in 0..self.alphas.len() {
                fields.push(self.n_max[a][g].to_string());
                fields.push(fmt_f64(self.residual[a][g]));
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        const WHAT: &str = "stability table CSV";
        let (header, rows) = read_csv_body(r, WHAT)?;
        if header.first().map(String::as_str) != Some("gamma") || header.len() % 2 == 0 {
            return Err(Error::Parse {
                what: WHAT,
                detail: format!("unexpected header {header:?}"),
            });
        }
        let mut alphas = Vec::new();
        for pair in header[1..].chunks(2) {
            let a = pair[0]
                .strip_prefix("n_max_alpha_")
                .ok_or_else(|| Error::Parse {
                    what: WHAT,
                    detail: format!("unexpected column {:?}", pair[0]),
                })?;
            let b = pair[1]
                .strip_prefix("residual_alpha_")
                .ok_or_else(|| Error::Parse {
                    what: WHAT,
                    detail: format!("unexpected column {:?}", pair[1]),
                })?;
            if a != b {
                return Err(Error::Parse {
                    what: WHAT,
                    detail: format!("mismatched column pair {pair:?}"),
                });
            }
            alphas.push(parse_f64(a, WHAT)?);
        }
        let mut gammas = Vec::new();
        let mut n_max = vec![Vec::new(); alphas.len()];
        let mut residual = vec![Vec::new(); alphas.len()];
        for row in &rows {
            if row.len() != header.len() {
                return Err(Error::Parse {
                    what: WHAT,
                    detail: format!("row width {} does not match header", row.len()),
                });
            }
            gammas.push(parse_f64(&row[0], WHAT)?);
            for (a, pair) in row[1..].chunks(2).enumerate() {
                n_max[a].push(parse_usize(&pair[0], WHAT)?);
                residual[a].push(parse_f64(&pair[1], WHAT)?);
            }
        }
        Ok(StabilityTable {
            alphas,
            gammas,
            n_max,
            residual,
        })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, meta: &[(&str, String)]) -> Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        self.write_csv(&mut w, meta)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(fs::File::open(path)?))
    }
}
