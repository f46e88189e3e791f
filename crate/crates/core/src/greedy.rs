//! Restricted greedy selection and the experiment run loop.
//!
//! Plain greedy rules pick the candidate maximizing some score (power,
//! residual, or their ratio) over the whole candidate set. The stabilized
//! variants here first restrict to the candidates whose power function is
//! within a factor `gamma` of its maximum — points that are still far, in
//! the native-space sense, from everything already selected — and apply the
//! rule there. `gamma = 0` disables the restriction; `gamma = 1` shrinks
//! the restricted set to the power argmax, recovering pure P-greedy
//! regardless of the nominal rule.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::interpolant::{GreedyModel, POWER_FLOOR};
use crate::io::{fmt_f64, meta_value, parse_f64, parse_usize, read_csv_lines, write_meta_line};
use crate::kernels::{dist, Kernel};
use crate::rngstream;
use crate::target::TargetFunction;

/// How the next center is chosen from the restricted candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionRule {
    /// Maximize the power function ("where is the worst-case error bound
    /// largest"). Needs no target.
    PGreedy,
    /// Maximize the absolute residual ("where is the current fit worst").
    FGreedy,
    /// Maximize residual over power, the greedy step that locally maximizes
    /// native-space error reduction; candidates at the numerical power
    /// floor are excluded from the ratio.
    FOverPGreedy,
    /// Draw uniformly at random from the restricted set.
    RandomRestricted,
}

impl SelectionRule {
    /// Short flag-style name: `p`, `f`, `fp`, or `random`.
    pub fn name(self) -> &'static str {
        match self {
            SelectionRule::PGreedy => "p",
            SelectionRule::FGreedy => "f",
            SelectionRule::FOverPGreedy => "fp",
            SelectionRule::RandomRestricted => "random",
        }
    }

    /// Whether the rule reads residuals (and therefore needs a target).
    pub fn requires_target(self) -> bool {
        matches!(self, SelectionRule::FGreedy | SelectionRule::FOverPGreedy)
    }
}

impl std::fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SelectionRule::PGreedy),
            "f" => Ok(SelectionRule::FGreedy),
            "fp" => Ok(SelectionRule::FOverPGreedy),
            "random" => Ok(SelectionRule::RandomRestricted),
            other => Err(Error::Parse {
                what: "selection rule",
                detail: format!("unknown rule {other:?} (expected p, f, fp, or random)"),
            }),
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Reached the configured number of centers.
    MaxN,
    /// Maximal power function dropped to the configured tolerance.
    PowerTol,
    /// Maximal candidate residual dropped to the configured tolerance.
    ResidualTol,
    /// Estimated condition number of the kernel matrix crossed the bound.
    CondBound,
    /// No candidate could be added: the power function vanished everywhere
    /// or the chosen candidate was numerically dependent.
    Exhausted,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::MaxN => "MaxN",
            StopReason::PowerTol => "PowerTol",
            StopReason::ResidualTol => "ResidualTol",
            StopReason::CondBound => "CondBound",
            StopReason::Exhausted => "Exhausted",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MaxN" => Ok(StopReason::MaxN),
            "PowerTol" => Ok(StopReason::PowerTol),
            "ResidualTol" => Ok(StopReason::ResidualTol),
            "CondBound" => Ok(StopReason::CondBound),
            "Exhausted" => Ok(StopReason::Exhausted),
            other => Err(Error::Parse {
                what: "stop reason",
                detail: format!("unknown stop reason {other:?}"),
            }),
        }
    }
}

/// Settings for one greedy run. Tolerances set to zero are disabled;
/// `cond_bound = None` disables the spectral stopping test entirely (and
/// with it the per-step eigensolves).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyConfig {
    pub rule: SelectionRule,
    /// Restriction strength in `[0, 1]`; candidates with power at least
    /// `gamma` times the maximal power stay eligible.
    pub gamma: f64,
    /// Hard cap on the number of centers.
    pub max_n: usize,
    /// Stop once the maximal power function is at or below this (0 = off).
    pub power_tol: f64,
    /// Stop once the maximal candidate residual is at or below this
    /// (0 = off; requires a target).
    pub residual_tol: f64,
    /// Stop once the kernel matrix condition number reaches this bound.
    pub cond_bound: Option<f64>,
    /// Evaluate the condition number every this many added centers. The
    /// eigensolve is `O(N^3)`, so sparse checks trade stopping sharpness
    /// for speed.
    pub cond_check_every: usize,
    /// Seed for the selection RNG (only the random rule draws from it).
    pub seed: u64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            rule: SelectionRule::PGreedy,
            gamma: 1.0,
            max_n: 100,
            power_tol: 0.0,
            residual_tol: 0.0,
            cond_bound: Some(1e14),
            cond_check_every: 1,
            seed: 0,
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && (0.0..=1.0).contains(&self.gamma)) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if self.max_n == 0 {
            return Err(Error::InvalidConfig("max_n must be at least 1".into()));
        }
        if !(self.power_tol.is_finite() && self.power_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power_tol must be non-negative, got {}",
                self.power_tol
            )));
        }
        if !(self.residual_tol.is_finite() && self.residual_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "residual_tol must be non-negative, got {}",
                self.residual_tol
            )));
        }
        if let Some(b) = self.cond_bound {
            if !(b.is_finite() && b > 0.0) && b != f64::MAX {
                return Err(Error::InvalidConfig(format!(
                    "cond_bound must be positive, got {b}"
                )));
            }
        }
        if self.cond_check_every == 0 {
            return Err(Error::InvalidConfig(
                "cond_check_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Indices of candidates whose power is at least `gamma` times the maximal
/// power, compared on squared values to avoid square roots. `gamma = 0`
/// keeps everything; `gamma = 1` keeps exactly the argmax set.
pub fn restricted_set(power_sq: &[f64], gamma: f64) -> Result<Vec<usize>> {
    if !(gamma.is_finite() && (0.0..=1.0).contains(&gamma)) {
        return Err(Error::InvalidConfig(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    let max = power_sq.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::AllPowerZero);
    }
    let threshold = gamma * gamma * max;
    Ok(power_sq
        .iter()
        .enumerate()
        .filter(|(_, &p2)| p2 >= threshold)
        .map(|(i, _)| i)
        .collect())
}

/// Apply a selection rule within an already-computed restricted set.
/// Score ties break toward the lowest candidate index (the iteration
/// order), keeping runs reproducible.
pub fn select_from_restricted<R: Rng>(
    model: &GreedyModel,
    rule: SelectionRule,
    restricted: &[usize],
    rng: &mut R,
) -> Result<usize> {
    if restricted.is_empty() {
        return Err(Error::EmptyRestrictedSet);
    }
    let power_sq = model.power_sq();
    match rule {
        SelectionRule::PGreedy => {
            let mut best = restricted[0];
            for &i in &restricted[1..] {
                if power_sq[i] > power_sq[best] {
                    best = i;
                }
            }
            Ok(best)
        }
        SelectionRule::FGreedy | SelectionRule::FOverPGreedy => {
            let target = model.target_values().ok_or(Error::TargetRequired)?;
            let interp = model.interp_values();
            let mut best: Option<(usize, f64)> = None;
            for &i in restricted {
                let r = (target[i] - interp[i]).abs();
                let score = match rule {
                    SelectionRule::FGreedy => r * r,
                    // Compare r^2 / p^2 (monotone in |r| / p); skip
                    // candidates that have numerically merged with the
                    // current centers.
                    _ => {
                        if power_sq[i] <= POWER_FLOOR {
                            continue;
                        }
                        r * r / power_sq[i]
                    }
                };
                match best {
                    Some((_, s)) if score <= s => {}
                    _ => best = Some((i, score)),
                }
            }
            best.map(|(i, _)| i).ok_or(Error::EmptyRestrictedSet)
        }
        SelectionRule::RandomRestricted => Ok(restricted[rng.random_range(0..restricted.len())]),
    }
}

/// Pick the next center: build the `gamma`-restricted set, then apply the
/// rule inside it.
pub fn select_next<R: Rng>(
    model: &GreedyModel,
    rule: SelectionRule,
    gamma: f64,
    rng: &mut R,
) -> Result<usize> {
    let restricted = restricted_set(model.power_sq(), gamma)?;
    select_from_restricted(model, rule, &restricted, rng)
}

/// One diagnostic record per added center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Number of centers after this step (rows are 1-based and contiguous).
    pub n: usize,
    /// Candidate index promoted at this step.
    pub chosen_index: usize,
    /// Coordinates of the chosen point.
    pub coords: Vec<f64>,
    /// Maximal power function over the candidates after the step.
    pub p_max: f64,
    /// Maximal absolute candidate residual (absent without a target).
    pub r_max: Option<f64>,
    /// Fill distance of the centers within the candidate cloud.
    pub fill: f64,
    /// Separation distance of the centers (absent before two centers).
    pub sep: Option<f64>,
    /// Running upper bound for the smallest eigenvalue of the kernel matrix.
    pub lambda_min_upper: f64,
    /// Condition number estimate (present only on eigensolve steps).
    pub cond: Option<f64>,
    /// Size of the restricted set the choice was made from.
    pub restricted_size: usize,
}

/// Full record of a greedy run: configuration echo plus per-step rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub kernel: String,
    pub gamma: f64,
    pub rule: String,
    pub seed: u64,
    pub dim: usize,
    pub stop_reason: StopReason,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `p_max` per step, in step order (index `i` holds the value at
    /// `n = i + 1`).
    pub fn p_max_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p_max).collect()
    }

    pub fn fill_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.fill).collect()
    }

    pub fn sep_series(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.sep).collect()
    }

    pub fn r_max_series(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.r_max).collect()
    }

    /// Write as CSV: one `#` metadata line, a fixed header
    /// `n,chosen_index,x0..x{d-1},p_max,r_max,fill,sep,lambda_min_upper,cond,restricted_size`,
    /// one row per step. Missing values are `NaN`.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        write_meta_line(
            w,
            &[
                ("kernel", self.kernel.clone()),
                ("gamma", fmt_f64(self.gamma)),
                ("rule", self.rule.clone()),
                ("seed", self.seed.to_string()),
                ("dim", self.dim.to_string()),
                ("stop_reason", self.stop_reason.to_string()),
            ],
        )?;
        let mut header = vec!["n".to_string(), "chosen_index".to_string()];
        header.extend((0..self.dim).map(|i| format!("x{i}")));
        header.extend(
            [
                "p_max",
                "r_max",
                "fill",
                "sep",
                "lambda_min_upper",
                "cond",
                "restricted_size",
            ]
            .map(str::to_string),
        );
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields = vec![row.n.to_string(), row.chosen_index.to_string()];
            fields.extend(row.coords.iter().map(|&c| fmt_f64(c)));
            fields.push(fmt_f64(row.p_max));
            fields.push(fmt_f64(row.r_max.unwrap_or(f64::NAN)));
            fields.push(fmt_f64(row.fill));
            fields.push(fmt_f64(row.sep.unwrap_or(f64::NAN)));
            fields.push(fmt_f64(row.lambda_min_upper));
            fields.push(fmt_f64(row.cond.unwrap_or(f64::NAN)));
            fields.push(row.restricted_size.to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        const WHAT: &str = "run trace CSV";
        let (meta, header, lines) = read_csv_lines(r, WHAT)?;
        let kernel = meta_value(&meta, "kernel", WHAT)?.to_string();
        let gamma = parse_f64(meta_value(&meta, "gamma", WHAT)?, WHAT)?;
        let rule = meta_value(&meta, "rule", WHAT)?.to_string();
        let seed = meta_value(&meta, "seed", WHAT)?
            .parse::<u64>()
            .map_err(|_| Error::Parse {
                what: WHAT,
                detail: "seed is not an integer".to_string(),
            })?;
        let dim = parse_usize(meta_value(&meta, "dim", WHAT)?, WHAT)?;
        let stop_reason: StopReason = meta_value(&meta, "stop_reason", WHAT)?.parse()?;

        let mut expected = vec!["n".to_string(), "chosen_index".to_string()];
        expected.extend((0..dim).map(|i| format!("x{i}")));
        expected.extend(
            [
                "p_max",
                "r_max",
                "fill",
                "sep",
                "lambda_min_upper",
                "cond",
                "restricted_size",
            ]
            .map(str::to_string),
        );
        if header != expected {
            return Err(Error::Parse {
                what: WHAT,
                detail: format!("unexpected header {header:?}"),
            });
        }

        let opt = |v: f64| if v.is_nan() { None } else { Some(v) };
        let mut rows = Vec::with_capacity(lines.len());
        for fields in &lines {
            if fields.len() != expected.len() {
                return Err(Error::Parse {
                    what: WHAT,
                    detail: format!(
                        "row has {} fields, expected {}",
                        fields.len(),
                        expected.len()
                    ),
                });
            }
            let mut it = fields.iter();
            let n = parse_usize(it.next().unwrap(), WHAT)?;
            let chosen_index = parse_usize(it.next().unwrap(), WHAT)?;
            let mut coords = Vec::with_capacity(dim);
            for _ in 0..dim {
                coords.push(parse_f64(it.next().unwrap(), WHAT)?);
            }
            let p_max = parse_f64(it.next().unwrap(), WHAT)?;
            let r_max = opt(parse_f64(it.next().unwrap(), WHAT)?);
            let fill = parse_f64(it.next().unwrap(), WHAT)?;
            let sep = opt(parse_f64(it.next().unwrap(), WHAT)?);
            let lambda_min_upper = parse_f64(it.next().unwrap(), WHAT)?;
            let cond = opt(parse_f64(it.next().unwrap(), WHAT)?);
            let restricted_size = parse_usize(it.next().unwrap(), WHAT)?;
            rows.push(TraceRow {
                n,
                chosen_index,
                coords,
                p_max,
                r_max,
                fill,
                sep,
                lambda_min_upper,
                cond,
                restricted_size,
            });
        }
        Ok(RunTrace {
            kernel,
            gamma,
            rule,
            seed,
            dim,
            stop_reason,
            rows,
        })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(std::fs::File::open(path)?))
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

/// Run restricted greedy selection until a stopping criterion fires.
///
/// Per step: build the restricted set, select, add the center, refresh the
/// incremental fill/separation caches, and append a trace row. Stopping
/// criteria are checked in a fixed order — center cap, power tolerance,
/// residual tolerance, condition bound — and the first satisfied one wins.
/// Runs end with [`StopReason::Exhausted`] when no candidate can be added:
/// the power function vanished on all candidates, or the selected candidate
/// (possible under the random rule with `gamma = 0`) sat at the numerical
/// floor.
///
/// The selection RNG is a counter-based generator seeded from
/// `config.seed` on its own stream, so runs are reproducible bit-for-bit
/// and independent of the domain-sampling stream.
pub fn run(
    config: &GreedyConfig,
    kernel: Kernel,
    candidates: PointCloud,
    target: Option<&TargetFunction>,
) -> Result<(GreedyModel, RunTrace)> {
    config.validate()?;
    if (config.rule.requires_target() || config.residual_tol > 0.0) && target.is_none() {
        return Err(Error::TargetRequired);
    }
    let mut model = GreedyModel::new(kernel, candidates, target)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(rngstream::SELECTION);

    let m = model.candidates().len();
    // Incremental distance caches: nearest center per candidate (gives the
    // fill distance as a running max) and the smallest center-to-center
    // distance seen so far.
    let mut nearest = vec![f64::INFINITY; m];
    let mut min_center_gap = f64::INFINITY;

    let mut rows: Vec<TraceRow> = Vec::new();
    let stop_reason = loop {
        let restricted = match restricted_set(model.power_sq(), config.gamma) {
            Ok(r) => r,
            Err(Error::AllPowerZero) => break StopReason::Exhausted,
            Err(e) => return Err(e),
        };
        let chosen = match select_from_restricted(&model, config.rule, &restricted, &mut rng) {
            Ok(i) => i,
            Err(Error::EmptyRestrictedSet) => break StopReason::Exhausted,
            Err(e) => return Err(e),
        };
        let chosen_point = model.candidates().point(chosen).to_vec();
        match model.add_center(chosen) {
            Ok(()) => {}
            Err(Error::NumericallySingular { .. }) => break StopReason::Exhausted,
            Err(e) => return Err(e),
        }

        for (i, p) in model.candidates().iter().enumerate() {
            let d = dist(p, &chosen_point);
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
        let fill = nearest.iter().cloned().fold(0.0f64, f64::max);
        let prior_centers = &model.center_indices()[..model.len() - 1];
        for &ci in prior_centers {
            let d = dist(model.candidates().point(ci), &chosen_point);
            if d < min_center_gap {
                min_center_gap = d;
            }
        }
        let sep = (model.len() >= 2).then_some(min_center_gap);

        let n = model.len();
        let cond = match config.cond_bound {
            Some(_) if n % config.cond_check_every == 0 => {
                Some(model.condition_diagnostics()?.cond)
            }
            _ => None,
        };
        rows.push(TraceRow {
            n,
            chosen_index: chosen,
            coords: chosen_point,
            p_max: model.max_power(),
            r_max: model.max_residual(),
            fill,
            sep,
            lambda_min_upper: model.lambda_min_upper(),
            cond,
            restricted_size: restricted.len(),
        });
        let row = rows.last().expect("row just pushed");

        if n >= config.max_n {
            break StopReason::MaxN;
        }
        if config.power_tol > 0.0 && row.p_max <= config.power_tol {
            break StopReason::PowerTol;
        }
        if config.residual_tol > 0.0 {
            if let Some(r) = row.r_max {
                if r <= config.residual_tol {
                    break StopReason::ResidualTol;
                }
            }
        }
        if let (Some(bound), Some(c)) = (config.cond_bound, cond) {
            if c >= bound {
                break StopReason::CondBound;
            }
        }
    };

    let trace = RunTrace {
        kernel: model.kernel().to_string(),
        gamma: config.gamma,
        rule: config.rule.to_string(),
        seed: config.seed,
        dim: model.dim(),
        stop_reason,
        rows,
    };
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fill_distance, separation_distance, DomainKind, DomainSampler};

    fn grid01(n: usize) -> PointCloud {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        PointCloud::new(1, xs).unwrap()
    }

    #[test]
    fn restricted_set_thresholds() {
        // Powers 1.0, 0.6, 0.3 (stored squared).
        let p2 = [1.0, 0.36, 0.09];
        assert_eq!(restricted_set(&p2, 0.5).unwrap(), vec![0, 1]);
        assert_eq!(restricted_set(&p2, 0.0).unwrap(), vec![0, 1, 2]);
        assert_eq!(restricted_set(&p2, 1.0).unwrap(), vec![0]);
        // Ties at the max all stay in at gamma = 1.
        let tied = [0.5, 0.5, 0.1];
        assert_eq!(restricted_set(&tied, 1.0).unwrap(), vec![0, 1]);
        assert!(matches!(
            restricted_set(&[0.0, 0.0], 0.5),
            Err(Error::AllPowerZero)
        ));
        assert!(restricted_set(&p2, 1.5).is_err());
    }

    #[test]
    fn restricted_sets_nest_in_gamma() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p2: Vec<f64> = (0..40).map(|_| rng.random_range(0.0..2.0)).collect();
            let mut gammas: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
            gammas.push(1.0);
            gammas.sort_by(f64::total_cmp);
            let sets: Vec<Vec<usize>> = gammas
                .iter()
                .map(|&g| restricted_set(&p2, g).unwrap())
                .collect();
            for pair in sets.windows(2) {
                // Larger gamma => subset.
                assert!(pair[1].iter().all(|i| pair[0].contains(i)));
            }
        }
    }

    #[test]
    fn p_rule_picks_argmax_with_low_index_ties() {
        // Two candidates symmetric about nothing yet selected: both start
        // at power 1, so the tie must break to index 0.
        let cloud = PointCloud::new(1, vec![0.2, 0.8]).unwrap();
        let model = GreedyModel::new(Kernel::gaussian(), cloud, None).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let i = select_next(&model, SelectionRule::PGreedy, 1.0, &mut rng).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn f_rules_require_target() {
        let cloud = grid01(10);
        let model = GreedyModel::new(Kernel::gaussian(), cloud, None).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(matches!(
            select_next(&model, SelectionRule::FGreedy, 1.0, &mut rng),
            Err(Error::TargetRequired)
        ));
        assert!(matches!(
            run(
                &GreedyConfig {
                    rule: SelectionRule::FOverPGreedy,
                    ..GreedyConfig::default()
                },
                Kernel::gaussian(),
                grid01(10),
                None
            ),
            Err(Error::TargetRequired)
        ));
    }

    #[test]
    fn random_rule_draws_from_restricted_set() {
        let cloud = grid01(60);
        let mut model = GreedyModel::new(Kernel::basic_matern(), cloud, None).unwrap();
        model.add_center(30).unwrap();
        let gamma = 0.7;
        let restricted = restricted_set(model.power_sq(), gamma).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..200 {
            let i = select_next(&model, SelectionRule::RandomRestricted, gamma, &mut rng).unwrap();
            assert!(restricted.contains(&i));
        }
        // Same seed, same draws.
        let mut a = ChaCha12Rng::seed_from_u64(4);
        let mut b = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..50 {
            assert_eq!(
                select_next(&model, SelectionRule::RandomRestricted, gamma, &mut a).unwrap(),
                select_next(&model, SelectionRule::RandomRestricted, gamma, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn gamma_one_forces_p_greedy_choice() {
        // A random (asymmetric) cloud, with one center already placed so the
        // power function is non-constant: from here the power argmax is
        // unique at every step, the gamma = 1 restricted set is a singleton,
        // and every rule — even the random draw — must pick that point.
        let cloud = DomainSampler::new(DomainKind::UnitCube { dim: 1 }, 2)
            .sample(80)
            .unwrap();
        let target = TargetFunction::falpha(2.0).unwrap();
        let mut model = GreedyModel::new(Kernel::linear_matern(), cloud, Some(&target)).unwrap();
        model.add_center(0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..15 {
            let restricted = restricted_set(model.power_sq(), 1.0).unwrap();
            assert_eq!(restricted.len(), 1, "power argmax not unique");
            let via_p = select_next(&model, SelectionRule::PGreedy, 1.0, &mut rng).unwrap();
            for rule in [
                SelectionRule::FGreedy,
                SelectionRule::FOverPGreedy,
                SelectionRule::RandomRestricted,
            ] {
                let choice = select_next(&model, rule, 1.0, &mut rng).unwrap();
                assert_eq!(choice, via_p);
            }
            model.add_center(via_p).unwrap();
        }
    }

    #[test]
    fn run_stops_for_each_reason() {
        let kernel = Kernel::linear_matern();
        let target = TargetFunction::Motivating;

        let (_, t) = run(
            &GreedyConfig {
                max_n: 7,
                cond_bound: None,
                ..GreedyConfig::default()
            },
            kernel,
            grid01(200),
            None,
        )
        .unwrap();
        assert_eq!(t.stop_reason, StopReason::MaxN);
        assert_eq!(t.len(), 7);

        let (_, t) = run(
            &GreedyConfig {
                max_n: 500,
                power_tol: 0.05,
                cond_bound: None,
                ..GreedyConfig::default()
            },
            kernel,
            grid01(200),
            None,
        )
        .unwrap();
        assert_eq!(t.stop_reason, StopReason::PowerTol);
        assert!(t.rows.last().unwrap().p_max <= 0.05);

        let (_, t) = run(
            &GreedyConfig {
                rule: SelectionRule::FGreedy,
                max_n: 500,
                residual_tol: 1e-4,
                cond_bound: None,
                ..GreedyConfig::default()
            },
            kernel,
            grid01(200),
            Some(&target),
        )
        .unwrap();
        assert_eq!(t.stop_reason, StopReason::ResidualTol);
        assert!(t.rows.last().unwrap().r_max.unwrap() <= 1e-4);

        let (_, t) = run(
            &GreedyConfig {
                max_n: 500,
                cond_bound: Some(50.0),
                ..GreedyConfig::default()
            },
            kernel,
            grid01(200),
            None,
        )
        .unwrap();
        assert_eq!(t.stop_reason, StopReason::CondBound);
        assert!(t.rows.last().unwrap().cond.unwrap() >= 50.0);

        // Only 3 candidates: after all are centers the power vanishes.
        let (_, t) = run(
            &GreedyConfig {
                max_n: 10,
                cond_bound: None,
                ..GreedyConfig::default()
            },
            kernel,
            PointCloud::new(1, vec![0.0, 0.5, 1.0]).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(t.stop_reason, StopReason::Exhausted);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn trace_series_are_consistent() {
        let target = TargetFunction::Motivating;
        let (model, trace) = run(
            &GreedyConfig {
                rule: SelectionRule::FGreedy,
                gamma: 0.5,
                max_n: 25,
                cond_bound: Some(1e14),
                cond_check_every: 5,
                ..GreedyConfig::default()
            },
            Kernel::linear_matern(),
            grid01(300),
            Some(&target),
        )
        .unwrap();
        assert_eq!(trace.len(), 25);
        for (i, row) in trace.rows.iter().enumerate() {
            assert_eq!(row.n, i + 1);
            assert_eq!(row.coords, model.candidates().point(row.chosen_index));
            assert!(row.restricted_size >= 1);
            // Condition numbers only on multiples of the check interval.
            assert_eq!(row.cond.is_some(), (i + 1) % 5 == 0);
            if i > 0 {
                assert!(
                    row.p_max <= trace.rows[i - 1].p_max + 1e-12,
                    "p_max increased at step {}",
                    i + 1
                );
                assert!(row.fill <= trace.rows[i - 1].fill + 1e-15);
            }
        }
        // Incremental fill/separation equal the brute-force recomputation.
        let centers = model.centers();
        let last = trace.rows.last().unwrap();
        assert_eq!(
            last.fill,
            fill_distance(model.candidates(), &centers).unwrap()
        );
        assert_eq!(last.sep.unwrap(), separation_distance(&centers).unwrap());
        // First row has no separation.
        assert_eq!(trace.rows[0].sep, None);
    }

    #[test]
    fn runs_are_deterministic() {
        let config = GreedyConfig {
            rule: SelectionRule::RandomRestricted,
            gamma: 0.4,
            max_n: 30,
            cond_bound: None,
            seed: 123,
            ..GreedyConfig::default()
        };
        let cloud = DomainSampler::new(DomainKind::UnitCube { dim: 2 }, 5)
            .sample(500)
            .unwrap();
        let (_, t1) = run(&config, Kernel::basic_matern(), cloud.clone(), None).unwrap();
        let (_, t2) = run(&config, Kernel::basic_matern(), cloud.clone(), None).unwrap();
        assert_eq!(t1, t2);
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        t1.write_csv(&mut b1).unwrap();
        t2.write_csv(&mut b2).unwrap();
        assert_eq!(b1, b2);
        // A different selection seed changes the sequence.
        let (_, t3) = run(
            &GreedyConfig {
                seed: 124,
                ..config
            },
            Kernel::basic_matern(),
            cloud,
            None,
        )
        .unwrap();
        assert_ne!(
            t1.rows.iter().map(|r| r.chosen_index).collect::<Vec<_>>(),
            t3.rows.iter().map(|r| r.chosen_index).collect::<Vec<_>>()
        );
    }

    #[test]
    fn trace_csv_and_json_round_trip() {
        let target = TargetFunction::Motivating;
        let (_, trace) = run(
            &GreedyConfig {
                rule: SelectionRule::FOverPGreedy,
                gamma: 0.15,
                max_n: 12,
                cond_check_every: 4,
                seed: 2,
                ..GreedyConfig::default()
            },
            Kernel::linear_matern(),
            grid01(150),
            Some(&target),
        )
        .unwrap();
        let mut csv = Vec::new();
        trace.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv.clone()).unwrap();
        assert!(text.contains("stop_reason=MaxN"));
        assert!(text
            .lines()
            .any(|l| l.starts_with("n,chosen_index,x0,p_max,r_max,fill,sep,")));
        let back = RunTrace::read_csv(std::io::Cursor::new(csv)).unwrap();
        assert_eq!(trace, back);

        let mut json = Vec::new();
        trace.write_json(&mut json).unwrap();
        let back = RunTrace::read_json(std::io::Cursor::new(json)).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let bad_gamma = GreedyConfig {
            gamma: 1.5,
            ..GreedyConfig::default()
        };
        assert!(bad_gamma.validate().is_err());
        let bad_every = GreedyConfig {
            cond_check_every: 0,
            ..GreedyConfig::default()
        };
        assert!(bad_every.validate().is_err());
        let bad_max = GreedyConfig {
            max_n: 0,
            ..GreedyConfig::default()
        };
        assert!(bad_max.validate().is_err());
        assert!(GreedyConfig::default().validate().is_ok());
    }

    #[test]
    fn rule_and_reason_strings_round_trip() {
        for rule in [
            SelectionRule::PGreedy,
            SelectionRule::FGreedy,
            SelectionRule::FOverPGreedy,
            SelectionRule::RandomRestricted,
        ] {
            let s = rule.to_string();
            assert_eq!(s.parse::<SelectionRule>().unwrap(), rule);
        }
        assert_eq!(
            "fp".parse::<SelectionRule>().unwrap(),
            SelectionRule::FOverPGreedy
        );
        assert!("q".parse::<SelectionRule>().is_err());
        for reason in [
            StopReason::MaxN,
            StopReason::PowerTol,
            StopReason::ResidualTol,
            StopReason::CondBound,
            StopReason::Exhausted,
        ] {
            assert_eq!(reason.to_string().parse::<StopReason>().unwrap(), reason);
        }
    }
}
