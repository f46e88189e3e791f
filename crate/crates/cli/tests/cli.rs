//! End-to-end tests of the `stabgreedy` binary: exit codes, emitted files,
//! and determinism of reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stabgreedy::analysis::{read_rate_csv, RateReport};
use stabgreedy::geometry::DomainKind;
use stabgreedy::greedy::StopReason;
use stabgreedy::interpolant::LoadedModel;
use stabgreedy::{PointCloud, RunTrace, TargetFunction};
use stabgreedy_cli::output::{save_values_csv, StabilityTable};

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stabgreedy_cmd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabgreedy"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn missing_target_with_residual_rules_exits_2() {
    let dir = scratch("missing-target");
    for rule in ["f", "fp"] {
        let out = stabgreedy_cmd(&dir, &["run", "--rule", rule, "--candidates", "50"]);
        assert_eq!(exit_code(&out), 2, "rule {rule}: {}", stderr(&out));
        assert!(stderr(&out).contains("--target"));
    }
}

#[test]
fn invalid_flag_values_exit_2() {
    let dir = scratch("bad-flags");
    let bad: &[&[&str]] = &[
        &["run", "--kernel", "quartic", "--candidates", "50"],
        &["run", "--kernel", "gaussian:-2", "--candidates", "50"],
        &["run", "--rule", "q", "--candidates", "50"],
        &["run", "--gamma", "1.5", "--candidates", "50"],
        &["run", "--dim", "0", "--candidates", "50"],
        &["run", "--max-n", "0", "--candidates", "50"],
        &["run", "--candidates", "50", "--target", "falpha:-1"],
        &["run", "--candidates", "50", "--target", "unknown-target"],
        &[
            "run",
            "--dim",
            "1",
            "--candidates",
            "50",
            "--target",
            "inverse-square:0.1,0.2",
        ],
        &["power-decay", "--gammas", "0.5,2.0"],
        &["fp-accuracy", "--alphas", "-1"],
        &["point-dist", "--select", "1"],
    ];
    for args in bad {
        let out = stabgreedy_cmd(&dir, args);
        assert_eq!(exit_code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unknown_flags_exit_2() {
    let dir = scratch("unknown-flag");
    let out = stabgreedy_cmd(&dir, &["run", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn io_problems_exit_3() {
    let dir = scratch("io-problems");
    let out = stabgreedy_cmd(&dir, &["run", "--candidates", "missing.csv"]);
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("missing.csv"));

    // A malformed candidate file is an I/O problem, not a flag problem.
    std::fs::write(dir.join("garbage.csv"), "x0\nnot-a-number\n").unwrap();
    let out = stabgreedy_cmd(&dir, &["run", "--candidates", "garbage.csv"]);
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));

    // An output root that collides with an existing file cannot be created.
    std::fs::write(dir.join("blocker"), "").unwrap();
    let out = stabgreedy_cmd(&dir, &["run", "--candidates", "50", "--out", "blocker"]);
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));
}

#[test]
fn run_writes_parseable_trace_and_model() {
    let dir = scratch("run-basic");
    let out = stabgreedy_cmd(
        &dir,
        &[
            "run",
            "--kernel",
            "linear-matern",
            "--rule",
            "p",
            "--dim",
            "2",
            "--candidates",
            "700",
            "--max-n",
            "20",
            "--seed",
            "7",
            "--out",
            "o",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let line = stdout(&out);
    assert!(line.contains("N=20"), "summary: {line}");
    assert!(line.contains("stop=MaxN"), "summary: {line}");
    assert!(line.contains("p_max="), "summary: {line}");

    let base = dir.join("o/run");
    let trace = RunTrace::load_csv(base.join("linear-matern_d2_g1_s7.trace.csv")).unwrap();
    assert_eq!(trace.len(), 20);
    assert_eq!(trace.dim, 2);
    assert_eq!(trace.stop_reason, StopReason::MaxN);
    assert_eq!(trace.rule, "p");

    let model = LoadedModel::load(base.join("linear-matern_d2_g1_s7.model.json")).unwrap();
    assert_eq!(model.centers.len(), 20);
    assert!(model.alpha.is_empty(), "no target was given");
    assert!(model.evaluate(&model.centers).is_err());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("run-determinism");
    let args = [
        "run",
        "--rule",
        "random",
        "--gamma",
        "0.4",
        "--candidates",
        "900",
        "--max-n",
        "30",
        "--seed",
        "11",
        "--target",
        "motivating",
    ];
    let mut first = args.to_vec();
    first.extend(["--out", "a"]);
    let mut second = args.to_vec();
    second.extend(["--out", "b"]);
    assert_eq!(exit_code(&stabgreedy_cmd(&dir, &first)), 0);
    assert_eq!(exit_code(&stabgreedy_cmd(&dir, &second)), 0);
    for file in [
        "linear-matern_d1_g0.4_s11.trace.csv",
        "linear-matern_d1_g0.4_s11.model.json",
    ] {
        let a = std::fs::read(dir.join("a/run").join(file)).unwrap();
        let b = std::fs::read(dir.join("b/run").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between reruns");
    }
}

#[test]
fn json_and_csv_traces_agree() {
    let dir = scratch("run-format");
    let base = [
        "run",
        "--candidates",
        "400",
        "--max-n",
        "15",
        "--seed",
        "3",
        "--target",
        "falpha:2.5",
        "--rule",
        "fp",
    ];
    let mut csv_args = base.to_vec();
    csv_args.extend(["--out", "c", "--format", "csv"]);
    let mut json_args = base.to_vec();
    json_args.extend(["--out", "j", "--format", "json"]);
    assert_eq!(exit_code(&stabgreedy_cmd(&dir, &csv_args)), 0);
    assert_eq!(exit_code(&stabgreedy_cmd(&dir, &json_args)), 0);
    let from_csv = RunTrace::load_csv(dir.join("c/run/linear-matern_d1_g1_s3.trace.csv")).unwrap();
    let from_json =
        RunTrace::load_json(dir.join("j/run/linear-matern_d1_g1_s3.trace.json")).unwrap();
    assert_eq!(from_csv, from_json);
}

#[test]
fn file_candidates_and_tabulated_target() {
    let dir = scratch("run-files");
    let coords: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
    let cloud = PointCloud::new(1, coords).unwrap();
    cloud.save_csv(dir.join("cloud.csv"), &[]).unwrap();
    let values = TargetFunction::Motivating.values_on(&cloud).unwrap();
    save_values_csv(dir.join("values.csv"), &values).unwrap();

    let out = stabgreedy_cmd(
        &dir,
        &[
            "run",
            "--candidates",
            "cloud.csv",
            "--target",
            "values.csv",
            "--rule",
            "fp",
            "--max-n",
            "15",
            "--out",
            "o",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let trace = RunTrace::load_csv(dir.join("o/run/linear-matern_d1_g1_s0.trace.csv")).unwrap();
    let first = trace.rows.first().unwrap().r_max.unwrap();
    let last = trace.rows.last().unwrap().r_max.unwrap();
    assert!(
        last < 0.05 * first,
        "residual should shrink: {first} -> {last}"
    );

    // The reloaded model is the same interpolant, so its worst error over
    // the candidates is the trace's final residual (up to solver noise).
    let model = LoadedModel::load(dir.join("o/run/linear-matern_d1_g1_s0.model.json")).unwrap();
    let predicted = model.evaluate(&cloud).unwrap();
    let worst = predicted
        .iter()
        .zip(&values)
        .map(|(p, v)| (p - v).abs())
        .fold(0.0f64, f64::max);
    assert!(
        (worst - last).abs() <= 1e-8 * (1.0 + last),
        "loaded model error {worst} should match the trace residual {last}"
    );

    // A value file of the wrong length is a flag-contract violation.
    save_values_csv(dir.join("short.csv"), &values[..100]).unwrap();
    let out = stabgreedy_cmd(
        &dir,
        &[
            "run",
            "--candidates",
            "cloud.csv",
            "--target",
            "short.csv",
            "--rule",
            "f",
        ],
    );
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));

    // An explicit --dim that contradicts the file is rejected.
    let out = stabgreedy_cmd(&dir, &["run", "--candidates", "cloud.csv", "--dim", "2"]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

#[test]
fn point_dist_selects_members_and_spreads_with_gamma() {
    let dir = scratch("point-dist");
    let out = stabgreedy_cmd(
        &dir,
        &[
            "point-dist",
            "--points",
            "300",
            "--select",
            "12",
            "--gammas",
            "0,1",
            "--seed",
            "3",
            "--out",
            "o",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));

    let base = dir.join("o/point-dist");
    let domain = PointCloud::load_csv(base.join("domain_s3.csv")).unwrap();
    assert_eq!(domain.len(), 300);
    assert_eq!(domain.dim(), 2);

    let hole = stabgreedy::geometry::BLOB_HOLE_CENTER;
    let mean_dist = |cloud: &PointCloud| {
        cloud
            .iter()
            .map(|p| ((p[0] - hole[0]).powi(2) + (p[1] - hole[1]).powi(2)).sqrt())
            .sum::<f64>()
            / cloud.len() as f64
    };
    let mut means = Vec::new();
    for gamma in ["0", "1"] {
        let selected =
            PointCloud::load_csv(base.join(format!("selected_g{gamma}_s3.csv"))).unwrap();
        assert_eq!(selected.len(), 12);
        for p in selected.iter() {
            assert!(
                DomainKind::BlobWithHole.contains(p),
                "selected point {p:?} left the domain"
            );
        }
        means.push(mean_dist(&selected));
    }
    assert!(
        means[0] < means[1],
        "unrestricted selection should cluster near the hole: {means:?}"
    );
}

#[test]
fn power_decay_small_grid_emits_rates() {
    let dir = scratch("power-decay");
    let args = [
        "power-decay",
        "--dims",
        "1",
        "--seeds",
        "2",
        "--gammas",
        "0.5,1",
        "--max-n",
        "40",
        "--candidates",
        "900",
        "--out",
        "o",
    ];
    let out = stabgreedy_cmd(&dir, &args);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));

    let base = dir.join("o/power-decay");
    for kernel in ["basic-matern", "linear-matern"] {
        let rates = read_rate_csv(std::io::BufReader::new(
            std::fs::File::open(base.join(format!("rates_{kernel}_d1.csv"))).unwrap(),
        ))
        .unwrap();
        assert_eq!(rates.len(), 2);
        assert_eq!(rates[0].gamma, 0.5);
        assert_eq!(rates[1].gamma, 1.0);
        for point in &rates {
            assert!(
                point.mean_slope < -0.2,
                "decay should be visible: {point:?}"
            );
            assert!(point.std_slope >= 0.0);
            assert!(point.theory.is_some());
        }
        for gamma in ["0.5", "1"] {
            for seed in ["0", "1"] {
                let stem = format!("{kernel}_d1_g{gamma}_s{seed}");
                let trace = RunTrace::load_csv(base.join(format!("{stem}.trace.csv"))).unwrap();
                assert_eq!(trace.len(), 40);
                let report = RateReport::load_json(base.join(format!("{stem}.rate.json"))).unwrap();
                assert_eq!(report.slopes.len(), 9);
                assert!(report.theory.is_some());
            }
        }
    }

    // A second sweep under a capped worker pool must reproduce the same bytes.
    let mut rerun_args = args;
    *rerun_args.last_mut().unwrap() = "o2";
    let rerun = Command::new(env!("CARGO_BIN_EXE_stabgreedy"))
        .args(rerun_args)
        .env("STABGREEDY_THREADS", "1")
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(rerun.status.code(), Some(0));
    for kernel in ["basic-matern", "linear-matern"] {
        let a = std::fs::read(base.join(format!("rates_{kernel}_d1.csv"))).unwrap();
        let b = std::fs::read(dir.join(format!("o2/power-decay/rates_{kernel}_d1.csv"))).unwrap();
        assert_eq!(a, b, "aggregate rates differ under a capped pool");
    }
}

#[test]
fn fp_accuracy_small_grid_emits_table() {
    let dir = scratch("fp-accuracy");
    let out = stabgreedy_cmd(
        &dir,
        &[
            "fp-accuracy",
            "--alphas",
            "2",
            "--gammas",
            "0.01,1",
            "--points",
            "400",
            "--max-n",
            "60",
            "--cond-bound",
            "1e12",
            "--out",
            "o",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));

    let table = StabilityTable::load_csv(dir.join("o/fp-accuracy/table.csv")).unwrap();
    assert_eq!(table.alphas, vec![2.0]);
    assert_eq!(table.gammas, vec![0.01, 1.0]);
    for (n, r) in table.n_max[0].iter().zip(&table.residual[0]) {
        assert!(*n > 0 && *n <= 60);
        assert!(r.is_finite() && *r >= 0.0 && *r < 1e-3, "residual {r}");
    }
    let trace =
        RunTrace::load_csv(dir.join("o/fp-accuracy/linear-matern_a2_d1_g1_s0.trace.csv")).unwrap();
    assert_eq!(trace.len(), table.n_max[0][1]);
}
