//! The three experiment presets: restriction-strength sweeps with decay-rate
//! fits, the accuracy-versus-restriction table for the f/P rule, and
//! point-distribution snapshots on an irregular planar domain.
//!
//! Every preset is deterministic for a given flag set: grid cells run in a
//! worker pool but each cell owns its output files, aggregate files are
//! written in grid order after all cells finish, and stdout summaries are
//! sorted before printing.

use std::path::Path;

use rayon::prelude::*;

use stabgreedy::analysis::{nine_window_rate, write_rate_csv, RatePoint, RateReport};
use stabgreedy::geometry::uniformity_constant;
use stabgreedy::greedy::{run, StopReason};
use stabgreedy::{
    rngstream, DomainKind, DomainSampler, GreedyConfig, GreedyModel, Kernel, PointCloud,
    SelectionRule, TargetFunction,
};

use crate::opts::{FileFormat, FpAccuracyArgs, PointDistArgs, PowerDecayArgs};
use crate::output::{self, StabilityTable};
use crate::runner::{self, ResolvedRun};
use crate::{file_failure, usage, Failure, Result};

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

// ---------------------------------------------------------------------------
// power-decay

/// Grid for the decay sweep. The standard grid covers both finite-smoothness
/// kernels on unit cubes of dimension 1, 3, and 5, restriction strengths
/// 0.1 through 1 in steps of 0.1, ten seeds, 3*10^4 candidates, and 800
/// centers per run; the quick grid keeps dimension 1 with three seeds and
/// 400 centers.
#[derive(Debug, Clone)]
pub struct DecayGrid {
    pub kernels: Vec<Kernel>,
    pub dims: Vec<usize>,
    pub gammas: Vec<f64>,
    pub seeds: u64,
    pub max_n: usize,
    pub candidates: usize,
}

impl DecayGrid {
    pub fn standard() -> Self {
        DecayGrid {
            kernels: vec![Kernel::basic_matern(), Kernel::linear_matern()],
            dims: vec![1, 3, 5],
            gammas: (1..=10).map(|i| f64::from(i) / 10.0).collect(),
            seeds: 10,
            max_n: 800,
            candidates: 30_000,
        }
    }

    pub fn quick() -> Self {
        DecayGrid {
            dims: vec![1],
            seeds: 3,
            max_n: 400,
            ..Self::standard()
        }
    }

    pub fn from_args(args: &PowerDecayArgs) -> Result<Self> {
        let mut grid = if args.quick {
            Self::quick()
        } else {
            Self::standard()
        };
        if let Some(kernels) = &args.kernels {
            grid.kernels = kernels
                .iter()
                .map(|k| k.parse::<Kernel>().map_err(usage))
                .collect::<Result<_>>()?;
        }
        if let Some(dims) = &args.dims {
            grid.dims = dims.clone();
        }
        if let Some(gammas) = &args.gammas {
            grid.gammas = gammas.clone();
        }
        if let Some(seeds) = args.seeds {
            grid.seeds = seeds;
        }
        if let Some(max_n) = args.max_n {
            grid.max_n = max_n;
        }
        if let Some(candidates) = args.candidates {
            grid.candidates = candidates;
        }
        if grid.kernels.is_empty() || grid.dims.is_empty() || grid.gammas.is_empty() {
            return Err(Failure::Usage("empty sweep grid".into()));
        }
        if grid.dims.contains(&0) {
            return Err(Failure::Usage("--dims entries must be at least 1".into()));
        }
        if grid
            .gammas
            .iter()
            .any(|g| !(g.is_finite() && (0.0..=1.0).contains(g)))
        {
            return Err(Failure::Usage("--gammas entries must lie in [0, 1]".into()));
        }
        if grid.seeds == 0 {
            return Err(Failure::Usage("--seeds must be at least 1".into()));
        }
        // The rate fit needs room for its smallest window.
        if grid.max_n < 16 {
            return Err(Failure::Usage("--max-n must be at least 16".into()));
        }
        if grid.candidates <= grid.max_n {
            return Err(Failure::Usage("--candidates must exceed --max-n".into()));
        }
        Ok(grid)
    }
}

struct DecayCell {
    kernel: Kernel,
    dim: usize,
    gamma: f64,
    seed: u64,
}

struct DecayOutcome {
    kernel: String,
    dim: usize,
    gamma: f64,
    slopes: Vec<f64>,
    summary: String,
}

fn run_decay_cell(
    dir: &Path,
    cell: &DecayCell,
    grid: &DecayGrid,
    format: FileFormat,
) -> Result<DecayOutcome> {
    let cloud = DomainSampler::new(DomainKind::UnitCube { dim: cell.dim }, cell.seed)
        .sample(grid.candidates)
        .map_err(usage)?;
    let resolved = ResolvedRun {
        kernel: cell.kernel,
        config: GreedyConfig {
            rule: SelectionRule::RandomRestricted,
            gamma: cell.gamma,
            max_n: grid.max_n,
            power_tol: 0.0,
            residual_tol: 0.0,
            cond_bound: None,
            cond_check_every: 1,
            seed: cell.seed,
        },
        candidates: cloud,
        target: None,
    };
    let kernel_name = cell.kernel.to_string();
    let stem = output::run_stem(&kernel_name, cell.dim, cell.gamma, cell.seed);
    let (_, trace, _) = runner::execute(dir, &stem, &resolved, format)?;
    let fit = nine_window_rate(&trace.p_max_series()).map_err(usage)?;
    let report = RateReport {
        windows: fit.windows.clone(),
        intercepts: fit.intercepts.clone(),
        slopes: fit.slopes.clone(),
        mean: fit.mean_slope,
        std: fit.std_slope,
        theory: cell.kernel.theoretical_power_rate(cell.dim),
        verdict: None,
    };
    report
        .save_json(dir.join(format!("{stem}.rate.json")))
        .map_err(file_failure)?;
    let summary = format!(
        "{} slope={:.4} (std {:.4})",
        runner::summary(&format!("power-decay {stem}"), &trace),
        fit.mean_slope,
        fit.std_slope
    );
    Ok(DecayOutcome {
        kernel: kernel_name,
        dim: cell.dim,
        gamma: cell.gamma,
        slopes: fit.slopes,
        summary,
    })
}

/// Run the decay sweep: one restricted-random run per (kernel, dimension,
/// restriction strength, seed), a nine-window rate fit per run, and one
/// aggregated `rates_<kernel>_d<dim>.csv` per kernel and dimension whose
/// rows pool the per-window slopes across seeds.
pub fn power_decay(args: &PowerDecayArgs) -> Result<()> {
    let grid = DecayGrid::from_args(args)?;
    let dir = output::command_dir(&args.out, "power-decay").map_err(file_failure)?;

    let mut cells = Vec::new();
    for &kernel in &grid.kernels {
        for &dim in &grid.dims {
            for &gamma in &grid.gammas {
                for seed in 0..grid.seeds {
                    cells.push(DecayCell {
                        kernel,
                        dim,
                        gamma,
                        seed,
                    });
                }
            }
        }
    }
    let outcomes: Result<Vec<DecayOutcome>> = cells
        .par_iter()
        .map(|cell| run_decay_cell(&dir, cell, &grid, args.format))
        .collect();
    let outcomes = outcomes?;

    for kernel in &grid.kernels {
        let kernel_name = kernel.to_string();
        for &dim in &grid.dims {
            let points: Vec<RatePoint> = grid
                .gammas
                .iter()
                .map(|&gamma| {
                    let pooled: Vec<f64> = outcomes
                        .iter()
                        .filter(|o| o.kernel == kernel_name && o.dim == dim && o.gamma == gamma)
                        .flat_map(|o| o.slopes.iter().copied())
                        .collect();
                    let m = mean(&pooled);
                    RatePoint {
                        gamma,
                        mean_slope: m,
                        std_slope: sample_std(&pooled, m),
                        theory: kernel.theoretical_power_rate(dim),
                    }
                })
                .collect();
            let path = dir.join(format!("rates_{kernel_name}_d{dim}.csv"));
            let mut w = std::io::BufWriter::new(
                std::fs::File::create(&path).map_err(|e| Failure::Io(e.to_string()))?,
            );
            write_rate_csv(
                &mut w,
                &points,
                &[
                    ("command", "power-decay".into()),
                    ("kernel", kernel_name.clone()),
                    ("dim", dim.to_string()),
                    ("candidates", grid.candidates.to_string()),
                    ("max_n", grid.max_n.to_string()),
                    ("seeds", grid.seeds.to_string()),
                ],
            )
            .map_err(file_failure)?;
        }
    }

    let mut summaries: Vec<String> = outcomes.into_iter().map(|o| o.summary).collect();
    summaries.sort();
    for line in summaries {
        println!("{line}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// fp-accuracy

/// Protocol for the accuracy-versus-restriction table: f/P-greedy with the
/// linear Matern kernel on [-1/2, 1/2], stopped by a condition bound, for
/// each restriction strength and target exponent. Train and test clouds
/// are independent same-sized samples.
#[derive(Debug, Clone)]
pub struct StabilityProtocol {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub points: usize,
    pub cond_bound: f64,
    pub cond_check_every: usize,
    pub max_n: usize,
    pub seed: u64,
}

impl StabilityProtocol {
    pub fn standard() -> Self {
        StabilityProtocol {
            alphas: vec![1.51, 3.5],
            gammas: vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            points: 100_000,
            cond_bound: 1e14,
            cond_check_every: 1,
            max_n: 5000,
            seed: 0,
        }
    }

    /// Cheaper profile: fewer points and sparser condition checks. Not a
    /// like-for-like reproduction of the standard protocol.
    pub fn quick() -> Self {
        StabilityProtocol {
            points: 10_000,
            cond_check_every: 10,
            ..Self::standard()
        }
    }

    pub fn from_args(args: &FpAccuracyArgs) -> Result<Self> {
        let mut p = if args.quick {
            Self::quick()
        } else {
            Self::standard()
        };
        if let Some(alphas) = &args.alphas {
            p.alphas = alphas.clone();
        }
        if let Some(gammas) = &args.gammas {
            p.gammas = gammas.clone();
        }
        if let Some(points) = args.points {
            p.points = points;
        }
        if let Some(bound) = args.cond_bound {
            p.cond_bound = bound;
        }
        if let Some(every) = args.cond_check_every {
            p.cond_check_every = every;
        }
        if let Some(max_n) = args.max_n {
            p.max_n = max_n;
        }
        p.seed = args.seed;
        if p.alphas.is_empty() || p.gammas.is_empty() {
            return Err(Failure::Usage("empty sweep grid".into()));
        }
        if p.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Failure::Usage("--alphas entries must be positive".into()));
        }
        if p.gammas
            .iter()
            .any(|g| !(g.is_finite() && (0.0..=1.0).contains(g)))
        {
            return Err(Failure::Usage("--gammas entries must lie in [0, 1]".into()));
        }
        if p.points < 2 {
            return Err(Failure::Usage("--points must be at least 2".into()));
        }
        if p.max_n == 0 || p.cond_check_every == 0 || p.cond_bound.is_nan() || p.cond_bound <= 1.0 {
            return Err(Failure::Usage(
                "--max-n and --cond-check-every must be positive and --cond-bound above 1".into(),
            ));
        }
        Ok(p)
    }

    pub fn train_cloud(&self) -> Result<PointCloud> {
        interval_cloud(self.points, self.seed, rngstream::DOMAIN)
    }

    pub fn test_cloud(&self) -> Result<PointCloud> {
        interval_cloud(self.points, self.seed, rngstream::EVALUATION)
    }
}

/// Uniform sample of `[-1/2, 1/2]` drawn from the given seed and stream.
pub fn interval_cloud(n: usize, seed: u64, stream: u64) -> Result<PointCloud> {
    let unit = DomainSampler::with_stream(DomainKind::UnitCube { dim: 1 }, seed, stream)
        .sample(n)
        .map_err(usage)?;
    let coords: Vec<f64> = unit.iter().map(|p| p[0] - 0.5).collect();
    PointCloud::new(1, coords).map_err(usage)
}

/// Largest absolute interpolation error over a held-out cloud, evaluated
/// through the expansion coefficients.
pub fn max_test_residual(model: &GreedyModel, test: &PointCloud, test_values: &[f64]) -> f64 {
    let coeffs = model.coefficients().expect("model was fit to a target");
    let centers = model.centers();
    let kernel = model.kernel();
    let mut worst: f64 = 0.0;
    for (point, value) in test.iter().zip(test_values) {
        let mut s = 0.0;
        for (c, center) in coeffs.iter().zip(centers.iter()) {
            s += c * kernel.eval(point, center);
        }
        worst = worst.max((value - s).abs());
    }
    worst
}

/// Outcome of one (target exponent, restriction strength) cell.
#[derive(Debug, Clone)]
pub struct StabilityCell {
    pub alpha: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub stop: StopReason,
    pub residual: f64,
}

/// Train/test material one cell interpolates and scores against.
#[derive(Clone, Copy)]
pub struct StabilitySplit<'a> {
    pub train: &'a PointCloud,
    pub test: &'a PointCloud,
    pub test_values: &'a [f64],
}

/// Run one cell of the table, optionally writing its trace and model files.
pub fn run_stability_cell(
    dir: Option<&Path>,
    protocol: &StabilityProtocol,
    alpha: f64,
    gamma: f64,
    split: StabilitySplit<'_>,
    format: FileFormat,
) -> Result<StabilityCell> {
    let kernel = Kernel::linear_matern();
    let target = TargetFunction::falpha(alpha).map_err(usage)?;
    let config = GreedyConfig {
        rule: SelectionRule::FOverPGreedy,
        gamma,
        max_n: protocol.max_n,
        power_tol: 0.0,
        residual_tol: 0.0,
        cond_bound: Some(protocol.cond_bound),
        cond_check_every: protocol.cond_check_every,
        seed: protocol.seed,
    };
    let (model, trace) = run(&config, kernel, split.train.clone(), Some(&target)).map_err(usage)?;
    if let Some(dir) = dir {
        let stem = output::alpha_stem(&kernel.to_string(), alpha, 1, gamma, protocol.seed);
        runner::write_outputs(dir, &stem, &model, &trace, format)?;
    }
    Ok(StabilityCell {
        alpha,
        gamma,
        n_max: trace.len(),
        stop: trace.stop_reason,
        residual: max_test_residual(&model, split.test, split.test_values),
    })
}

/// Run the full table and write `table.csv` plus per-cell traces/models.
pub fn fp_accuracy(args: &FpAccuracyArgs) -> Result<()> {
    let protocol = StabilityProtocol::from_args(args)?;
    let dir = output::command_dir(&args.out, "fp-accuracy").map_err(file_failure)?;

    let train = protocol.train_cloud()?;
    let test = protocol.test_cloud()?;

    let mut cells = Vec::new();
    for &alpha in &protocol.alphas {
        for &gamma in &protocol.gammas {
            cells.push((alpha, gamma));
        }
    }
    let outcomes: Result<Vec<StabilityCell>> = cells
        .par_iter()
        .map(|&(alpha, gamma)| {
            let target = TargetFunction::falpha(alpha).map_err(usage)?;
            let test_values = target.values_on(&test).map_err(usage)?;
            run_stability_cell(
                Some(&dir),
                &protocol,
                alpha,
                gamma,
                StabilitySplit {
                    train: &train,
                    test: &test,
                    test_values: &test_values,
                },
                args.format,
            )
        })
        .collect();
    let outcomes = outcomes?;

    let table = StabilityTable {
        alphas: protocol.alphas.clone(),
        gammas: protocol.gammas.clone(),
        n_max: protocol
            .alphas
            .iter()
            .map(|&a| {
                outcomes
                    .iter()
                    .filter(|c| c.alpha == a)
                    .map(|c| c.n_max)
                    .collect()
            })
            .collect(),
        residual: protocol
            .alphas
            .iter()
            .map(|&a| {
                outcomes
                    .iter()
                    .filter(|c| c.alpha == a)
                    .map(|c| c.residual)
                    .collect()
            })
            .collect(),
    };
    table
        .save_csv(
            dir.join("table.csv"),
            &[
                ("command", "fp-accuracy".into()),
                ("kernel", Kernel::linear_matern().to_string()),
                ("points", protocol.points.to_string()),
                ("cond_bound", output::fmt_f64(protocol.cond_bound)),
                ("cond_check_every", protocol.cond_check_every.to_string()),
                ("max_n", protocol.max_n.to_string()),
                ("seed", protocol.seed.to_string()),
            ],
        )
        .map_err(file_failure)?;

    for c in &outcomes {
        println!(
            "fp-accuracy alpha={} gamma={}: N={} stop={} test_residual={:.3e}",
            output::fmt_f64(c.alpha),
            output::fmt_f64(c.gamma),
            c.n_max,
            c.stop,
            c.residual
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// point-dist

/// Default restriction strengths for the point-distribution snapshots.
pub const POINT_DIST_GAMMAS: [f64; 4] = [0.0, 0.04, 0.15, 1.0];

/// Select centers on the blob-with-hole domain with the f/P rule against
/// the inverse-square target centered at the hole, once per restriction
/// strength. Writes the sampled domain cloud, one selected-point cloud per
/// strength, and the usual trace/model pairs.
pub fn point_dist(args: &PointDistArgs) -> Result<()> {
    let gammas = args
        .gammas
        .clone()
        .unwrap_or_else(|| POINT_DIST_GAMMAS.to_vec());
    if gammas.is_empty() {
        return Err(Failure::Usage("empty sweep grid".into()));
    }
    if gammas
        .iter()
        .any(|g| !(g.is_finite() && (0.0..=1.0).contains(g)))
    {
        return Err(Failure::Usage("--gammas entries must lie in [0, 1]".into()));
    }
    if args.select < 2 {
        return Err(Failure::Usage("--select must be at least 2".into()));
    }
    if args.points <= args.select {
        return Err(Failure::Usage("--points must exceed --select".into()));
    }

    let dir = output::command_dir(&args.out, "point-dist").map_err(file_failure)?;
    let cloud = DomainSampler::new(DomainKind::BlobWithHole, args.seed)
        .sample(args.points)
        .map_err(usage)?;
    cloud
        .save_csv(
            dir.join(format!("domain_s{}.csv", args.seed)),
            &[
                ("command", "point-dist".into()),
                ("seed", args.seed.to_string()),
            ],
        )
        .map_err(file_failure)?;

    let kernel = Kernel::linear_matern();
    let target = TargetFunction::inverse_square_default();
    let hole = stabgreedy::geometry::BLOB_HOLE_CENTER;

    let summaries: Result<Vec<String>> = gammas
        .par_iter()
        .map(|&gamma| {
            let resolved = ResolvedRun {
                kernel,
                config: GreedyConfig {
                    rule: SelectionRule::FOverPGreedy,
                    gamma,
                    max_n: args.select,
                    power_tol: 0.0,
                    residual_tol: 0.0,
                    cond_bound: None,
                    cond_check_every: 1,
                    seed: args.seed,
                },
                candidates: cloud.clone(),
                target: Some(target.clone()),
            };
            let stem = output::run_stem(&kernel.to_string(), 2, gamma, args.seed);
            let (model, trace, _) = runner::execute(&dir, &stem, &resolved, args.format)?;
            let selected = model.centers();
            selected
                .save_csv(
                    dir.join(format!(
                        "selected_g{}_s{}.csv",
                        output::fmt_f64(gamma),
                        args.seed
                    )),
                    &[
                        ("command", "point-dist".into()),
                        ("gamma", output::fmt_f64(gamma)),
                        ("kernel", kernel.to_string()),
                        ("rule", SelectionRule::FOverPGreedy.to_string()),
                        ("seed", args.seed.to_string()),
                    ],
                )
                .map_err(file_failure)?;
            let mean_dist = mean(
                &selected
                    .iter()
                    .map(|p| ((p[0] - hole[0]).powi(2) + (p[1] - hole[1]).powi(2)).sqrt())
                    .collect::<Vec<f64>>(),
            );
            let rho = uniformity_constant(&cloud, &selected).map_err(usage)?;
            Ok(format!(
                "{} mean_dist_to_hole={mean_dist:.4} rho={rho:.4}",
                runner::summary(&format!("point-dist {stem}"), &trace)
            ))
        })
        .collect();

    let mut summaries = summaries?;
    summaries.sort();
    for line in summaries {
        println!("{line}");
    }
    Ok(())
}
