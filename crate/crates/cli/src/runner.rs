//! Single-run plumbing shared by the `run` subcommand and the experiment
//! presets: flag resolution, execution, file emission, and summaries.

use std::path::{Path, PathBuf};

use stabgreedy::greedy::run;
use stabgreedy::{
    DomainKind, DomainSampler, GreedyConfig, GreedyModel, Kernel, PointCloud, RunTrace,
    SelectionRule, TargetFunction,
};

use crate::opts::{FileFormat, RunArgs};
use crate::output;
use crate::{file_failure, usage, Failure, Result};

/// A fully validated `run` invocation.
pub struct ResolvedRun {
    pub kernel: Kernel,
    pub config: GreedyConfig,
    pub candidates: PointCloud,
    pub target: Option<TargetFunction>,
}

/// Check every flag and load or sample the inputs. Flag errors map to
/// usage failures (exit 2), file problems to I/O failures (exit 3).
pub fn resolve(args: &RunArgs) -> Result<ResolvedRun> {
    let kernel: Kernel = args.kernel.parse().map_err(usage)?;
    let rule: SelectionRule = args.rule.parse().map_err(usage)?;

    let candidates = match args.candidates.parse::<usize>() {
        Ok(n) => {
            let dim = args.dim.unwrap_or(1);
            if dim == 0 {
                return Err(Failure::Usage("--dim must be at least 1".into()));
            }
            DomainSampler::new(DomainKind::UnitCube { dim }, args.seed)
                .sample(n)
                .map_err(usage)?
        }
        Err(_) => {
            let cloud = PointCloud::load_csv(&args.candidates)
                .map_err(|e| Failure::Io(format!("{}: {e}", args.candidates)))?;
            if let Some(dim) = args.dim {
                if dim != cloud.dim() {
                    return Err(Failure::Usage(format!(
                        "--dim {dim} disagrees with {}-dimensional candidate file {}",
                        cloud.dim(),
                        args.candidates
                    )));
                }
            }
            cloud
        }
    };

    let target = match &args.target {
        None => None,
        Some(arg) if arg.ends_with(".csv") => {
            let values =
                output::load_values_csv(arg).map_err(|e| Failure::Io(format!("{arg}: {e}")))?;
            if values.len() != candidates.len() {
                return Err(Failure::Usage(format!(
                    "target file {} holds {} values for {} candidates",
                    arg,
                    values.len(),
                    candidates.len()
                )));
            }
            Some(TargetFunction::Tabulated(values))
        }
        Some(arg) => Some(arg.parse::<TargetFunction>().map_err(usage)?),
    };
    if let Some(TargetFunction::InverseSquare { center }) = &target {
        if center.len() != candidates.dim() {
            return Err(Failure::Usage(format!(
                "inverse-square center has {} coordinates for {}-dimensional candidates",
                center.len(),
                candidates.dim()
            )));
        }
    }

    let config = GreedyConfig {
        rule,
        gamma: args.gamma,
        max_n: args.max_n,
        power_tol: args.power_tol,
        residual_tol: args.residual_tol,
        cond_bound: args.cond_bound,
        cond_check_every: args.cond_check_every,
        seed: args.seed,
    };
    config.validate().map_err(usage)?;
    if (rule.requires_target() || config.residual_tol > 0.0) && target.is_none() {
        return Err(Failure::Usage(format!(
            "selection rule {rule} needs --target"
        )));
    }

    Ok(ResolvedRun {
        kernel,
        config,
        candidates,
        target,
    })
}

/// Paths of the files one run emits.
pub struct RunFiles {
    pub trace: PathBuf,
    pub model: PathBuf,
}

/// Execute a resolved run and write `<stem>.trace.{csv|json}` plus
/// `<stem>.model.json` into `dir`.
pub fn execute(
    dir: &Path,
    stem: &str,
    resolved: &ResolvedRun,
    format: FileFormat,
) -> Result<(GreedyModel, RunTrace, RunFiles)> {
    let (model, trace) = run(
        &resolved.config,
        resolved.kernel,
        resolved.candidates.clone(),
        resolved.target.as_ref(),
    )
    .map_err(usage)?;
    let files = write_outputs(dir, stem, &model, &trace, format)?;
    Ok((model, trace, files))
}

pub fn write_outputs(
    dir: &Path,
    stem: &str,
    model: &GreedyModel,
    trace: &RunTrace,
    format: FileFormat,
) -> Result<RunFiles> {
    let trace_path = match format {
        FileFormat::Csv => {
            let p = dir.join(format!("{stem}.trace.csv"));
            trace.save_csv(&p).map_err(file_failure)?;
            p
        }
        FileFormat::Json => {
            let p = dir.join(format!("{stem}.trace.json"));
            trace.save_json(&p).map_err(file_failure)?;
            p
        }
    };
    let model_path = dir.join(format!("{stem}.model.json"));
    model.save_model(&model_path).map_err(file_failure)?;
    Ok(RunFiles {
        trace: trace_path,
        model: model_path,
    })
}

/// One-line outcome: centers, stop reason, final maximal power, final
/// maximal residual.
pub fn summary(label: &str, trace: &RunTrace) -> String {
    let (p_max, r_max) = match trace.rows.last() {
        Some(row) => (row.p_max, row.r_max),
        None => (f64::NAN, None),
    };
    let r_text = match r_max {
        Some(r) => format!("{r:.3e}"),
        None => "NaN".to_string(),
    };
    format!(
        "{label}: N={} stop={} p_max={p_max:.3e} r_max={r_text}",
        trace.len(),
        trace.stop_reason
    )
}

/// The `run` subcommand.
pub fn execute_run(args: &RunArgs) -> Result<()> {
    let resolved = resolve(args)?;
    let dir = output::command_dir(&args.out, "run").map_err(file_failure)?;
    let stem = output::run_stem(
        &resolved.kernel.to_string(),
        resolved.candidates.dim(),
        resolved.config.gamma,
        resolved.config.seed,
    );
    let (_, trace, _) = execute(&dir, &stem, &resolved, args.format)?;
    println!("{}", summary(&format!("run {stem}"), &trace));
    Ok(())
}
