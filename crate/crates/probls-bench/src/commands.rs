//! Subcommand implementations.

use std::path::{Path, PathBuf};

use probls::dataset;
use probls::driver::{self, Mode, RunResult};
use probls::objectives::{make_problem, Problem};
use serde::{Deserialize, Serialize};

use crate::config::{parse_alpha_list, parse_mode, RunConfig};
use crate::output::{self, mean_and_2sd, write_json, write_trace};
use crate::{CliError, GenDataArgs, RunArgs, SweepArgs};

/// Machine-readable result of one run. All fields except `wall_time_s` are
/// deterministic for a fixed config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub mode: String,
    pub alpha0: f64,
    pub seed: u64,
    pub steps: usize,
    pub total_evals: usize,
    pub final_loss: f64,
    pub final_test_error: Option<f64>,
    pub mean_evals_per_search: f64,
    pub frac_single_eval: f64,
    pub frac_forced: f64,
    /// Same two statistics restricted to steps after the first 100.
    pub mean_evals_post_warmup: Option<f64>,
    pub frac_single_eval_post_warmup: Option<f64>,
    pub wall_time_s: f64,
}

pub struct RunArtifacts {
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

fn search_stats(rows: &[probls::driver::TraceRow]) -> (f64, f64, f64) {
    let searches: Vec<_> = rows.iter().filter(|r| r.evals > 0).collect();
    if searches.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = searches.len() as f64;
    let mean_evals = searches.iter().map(|r| r.evals as f64).sum::<f64>() / n;
    let single = searches.iter().filter(|r| r.evals == 1).count() as f64 / n;
    let forced = rows.iter().filter(|r| r.forced).count() as f64 / rows.len() as f64;
    (mean_evals, single, forced)
}

fn summarize(config: &RunConfig, problem: &Problem, result: &RunResult) -> Summary {
    let rows = &result.trace.rows;
    let (mean_evals, frac_single, frac_forced) = search_stats(rows);
    let (post_mean, post_single) = if rows.len() > 100 {
        let (m, s, _) = search_stats(&rows[100..]);
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    Summary {
        mode: config.mode.as_str().to_string(),
        alpha0: config.alpha0,
        seed: config.seed,
        steps: rows.len(),
        total_evals: result.total_evals,
        final_loss: rows.last().map(|r| r.loss).unwrap_or(f64::NAN),
        final_test_error: problem.test_error(&result.final_x),
        mean_evals_per_search: mean_evals,
        frac_single_eval: frac_single,
        frac_forced,
        mean_evals_post_warmup: post_mean,
        frac_single_eval_post_warmup: post_single,
        wall_time_s: result.wall_time.as_secs_f64(),
    }
}

fn execute(config: &RunConfig) -> Result<(Problem, RunResult), CliError> {
    let problem = make_problem(&config.problem).map_err(|e| match e {
        dataset::DataError::Io(io) => CliError::Io(io.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    let driver_cfg = config.driver_config();
    let result = driver::run(problem.objective(), &problem.initial_point(), &driver_cfg)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if config.mode == Mode::LineSearch {
        // the line search is supposed to keep the iteration stable; a
        // non-finite trace is a numerical failure, not an experiment result
        if result.trace.rows.iter().any(|r| !r.loss.is_finite()) {
            return Err(CliError::Numerical("line-search trace contains non-finite loss".into()));
        }
    }
    Ok((problem, result))
}

fn run_to_files(config: &RunConfig, stem: &str, out_dir: &Path) -> Result<RunArtifacts, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let (problem, result) = execute(config)?;
    let summary = summarize(config, &problem, &result);
    let trace_path = out_dir.join(format!("{stem}.trace.csv"));
    let summary_path = out_dir.join(format!("{stem}.summary.json"));
    write_trace(&trace_path, &result.trace)?;
    write_json(&summary_path, &summary)?;
    Ok(RunArtifacts { trace_path, summary_path, summary })
}

pub fn cmd_run(args: &RunArgs) -> Result<RunArtifacts, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(alpha0) = args.alpha0 {
        config.alpha0 = alpha0;
    }
    if let Some(mode) = &args.mode {
        config.mode = parse_mode(mode)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    config.validate()?;
    let out_dir = config.out_dir.clone();
    let artifacts = run_to_files(&config, "run", &out_dir)?;
    println!(
        "run: mode={} alpha0={} seed={} final_loss={:.6} -> {}",
        artifacts.summary.mode,
        artifacts.summary.alpha0,
        artifacts.summary.seed,
        artifacts.summary.final_loss,
        artifacts.trace_path.display()
    );
    Ok(artifacts)
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub mode: String,
    pub alpha0: f64,
    pub replications: usize,
    pub final_loss_mean: f64,
    pub final_loss_2sd: f64,
    pub final_test_error_mean: Option<f64>,
    pub final_test_error_2sd: Option<f64>,
    pub mean_evals_mean: f64,
    pub frac_single_eval_mean: f64,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<AggregateRow>, CliError> {
    let base = RunConfig::load(&args.config)?;
    let alphas = parse_alpha_list(&args.alphas)?;
    if args.reps == 0 {
        return Err(CliError::Config("reps must be at least 1".into()));
    }
    let modes: Vec<Mode> = match &args.modes {
        Some(list) => list
            .split(',')
            .map(|m| parse_mode(m.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![base.mode],
    };
    let out_dir = args.out.clone().unwrap_or_else(|| base.out_dir.clone());
    std::fs::create_dir_all(&out_dir)?;

    let mut rows = Vec::new();
    for mode in &modes {
        for (ai, &alpha0) in alphas.iter().enumerate() {
            let mut losses = Vec::new();
            let mut errors = Vec::new();
            let mut evals = Vec::new();
            let mut singles = Vec::new();
            for rep in 0..args.reps {
                let mut config = base.clone();
                config.mode = *mode;
                config.alpha0 = alpha0;
                config.seed = base.seed.wrapping_add(rep as u64);
                let stem = format!("{}_a{ai}_r{rep}", mode.as_str());
                let artifacts = run_to_files(&config, &stem, &out_dir)?;
                losses.push(artifacts.summary.final_loss);
                if let Some(e) = artifacts.summary.final_test_error {
                    errors.push(e);
                }
                evals.push(artifacts.summary.mean_evals_per_search);
                singles.push(artifacts.summary.frac_single_eval);
            }
            let (loss_mean, loss_2sd) = mean_and_2sd(&losses);
            let (err_mean, err_2sd) = if errors.len() == losses.len() {
                let (m, s) = mean_and_2sd(&errors);
                (Some(m), Some(s))
            } else {
                (None, None)
            };
            rows.push(AggregateRow {
                mode: mode.as_str().to_string(),
                alpha0,
                replications: args.reps,
                final_loss_mean: loss_mean,
                final_loss_2sd: loss_2sd,
                final_test_error_mean: err_mean,
                final_test_error_2sd: err_2sd,
                mean_evals_mean: evals.iter().sum::<f64>() / evals.len() as f64,
                frac_single_eval_mean: singles.iter().sum::<f64>() / singles.len() as f64,
            });
        }
    }

    let mut csv = String::from(
        "mode,alpha0,replications,final_loss_mean,final_loss_2sd,final_test_error_mean,final_test_error_2sd,mean_evals_mean,frac_single_eval_mean\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.mode,
            r.alpha0,
            r.replications,
            r.final_loss_mean,
            r.final_loss_2sd,
            r.final_test_error_mean.map(|v| v.to_string()).unwrap_or_default(),
            r.final_test_error_2sd.map(|v| v.to_string()).unwrap_or_default(),
            r.mean_evals_mean,
            r.frac_single_eval_mean
        ));
    }
    output::atomic_write(&out_dir.join("aggregate.csv"), &csv)?;
    println!("sweep: {} cells -> {}", rows.len(), out_dir.join("aggregate.csv").display());
    Ok(rows)
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<(), CliError> {
    if args.classes == 0 || args.rows == 0 || args.dims == 0 {
        return Err(CliError::Config("classes, rows and dims must be positive".into()));
    }
    let ds = dataset::gen_synth(args.classes, args.rows, args.dims, args.separation, args.seed);
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    dataset::write_csv(&ds, &args.out)
        .map_err(|e| CliError::Io(e.to_string()))?;
    println!("gen-data: {} rows x {} dims -> {}", args.rows, args.dims, args.out.display());
    Ok(())
}
