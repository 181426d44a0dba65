//! `argrank score`: test-question filtering, reliability, then one scoring
//! function. Writes the scores CSV and a JSON report with the reliability
//! table, task stats, and the full effective configuration.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use argrank::prelude::*;
use argrank::reliability::TaskStats;

use super::{CliError, CliResult};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    /// Simple average: fraction of positive labels.
    Avg,
    /// Reliability-weighted average.
    Wa,
    /// MACE positive-label posterior.
    Mace,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackArg {
    /// Weigh annotators without a reliability score by the task average.
    TaskAverage,
    /// Drop their judgments from the weighted average.
    Exclude,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Annotation file (CSV or JSON lines).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Column-mapping config for the input (JSON or TOML).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value = "scores.csv")]
    pub out_scores: PathBuf,
    #[arg(long, default_value = "score_report.json")]
    pub out_report: PathBuf,
    /// Remove annotators failing more than this fraction of test questions.
    #[arg(long, default_value_t = 0.2)]
    pub max_fail_rate: f64,
    /// Minimum common judgments for a reliability peer.
    #[arg(long, default_value_t = 50)]
    pub min_shared: usize,
    /// Minimum qualifying peers for a reliability score.
    #[arg(long, default_value_t = 5)]
    pub min_peers: usize,
    /// Weight floor for eligible annotators (WA).
    #[arg(long, default_value_t = 0.01)]
    pub weight_floor: f64,
    /// Weight policy for annotators without a reliability score (WA).
    #[arg(long, value_enum, default_value = "task-average")]
    pub fallback: FallbackArg,
    /// Seed for MACE restarts.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0.1)]
    pub smoothing_delta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub convergence_tol: f64,
}

#[derive(Serialize)]
struct EffectiveConfig<'a> {
    input: String,
    method: &'a MethodArg,
    schema: Option<String>,
    max_fail_rate: f64,
    reliability: ReliabilityConfig,
    weight_policy: Option<WeightPolicy>,
    mace: Option<MaceConfig>,
    seed: u64,
}

#[derive(Serialize)]
struct MaceSummary {
    log_likelihood: f64,
    best_restart: usize,
    iterations_run: usize,
}

#[derive(Serialize)]
struct ScoreReport<'a> {
    command: &'static str,
    config: EffectiveConfig<'a>,
    removed_annotators: Vec<AnnotatorId>,
    task_stats: TaskStats,
    scored_arguments: usize,
    scoring_failures: usize,
    mace: Option<MaceSummary>,
    reliability: ReliabilityTable,
}

pub fn run(args: ScoreArgs) -> CliResult {
    let schema: AnnotationSchema = match &args.schema {
        Some(path) => load_schema(path)?,
        None => AnnotationSchema::default(),
    };
    let set = load_annotations(&args.input, &schema)?;
    if set.is_empty() {
        return Err(CliError::validation(format!(
            "input '{}' contains no annotations",
            args.input.display()
        )));
    }

    let (filtered, removed) = filter_by_test_questions(&set, args.max_fail_rate);
    let reliability_config = ReliabilityConfig {
        min_shared: args.min_shared,
        min_peers: args.min_peers,
    };
    let mut table = compute_reliability(&filtered, &reliability_config);
    table.mark_removed(&removed);
    let stats = task_stats(&filtered, &table);

    let weight_policy = WeightPolicy {
        floor: args.weight_floor,
        fallback: match args.fallback {
            FallbackArg::TaskAverage => FallbackPolicy::TaskAverage,
            FallbackArg::Exclude => FallbackPolicy::Exclude,
        },
    };
    let mace_config = MaceConfig {
        iterations: args.iterations,
        restarts: args.restarts,
        smoothing_delta: args.smoothing_delta,
        convergence_tol: args.convergence_tol,
        seed: args.seed,
    };

    let (scores, mace_summary) = match args.method {
        MethodArg::Avg => (
            score_corpus(&filtered, Some(&table), &AveragingMethod::Simple)?,
            None,
        ),
        MethodArg::Wa => (
            score_corpus(
                &filtered,
                Some(&table),
                &AveragingMethod::Weighted(weight_policy),
            )?,
            None,
        ),
        MethodArg::Mace => {
            let model = mace_fit(&filtered, &mace_config)?;
            let summary = MaceSummary {
                log_likelihood: model.log_likelihood,
                best_restart: model.best_restart,
                iterations_run: model.log_likelihood_trace.len().saturating_sub(1),
            };
            (mace_posteriors(&model), Some(summary))
        }
    };

    let report = ScoreReport {
        command: "score",
        config: EffectiveConfig {
            input: args.input.display().to_string(),
            method: &args.method,
            schema: args.schema.as_ref().map(|p| p.display().to_string()),
            max_fail_rate: args.max_fail_rate,
            reliability: reliability_config,
            weight_policy: matches!(args.method, MethodArg::Wa).then_some(weight_policy),
            mace: matches!(args.method, MethodArg::Mace).then_some(mace_config),
            seed: args.seed,
        },
        removed_annotators: removed,
        task_stats: stats,
        scored_arguments: scores.len(),
        scoring_failures: scores.failures.len(),
        mace: mace_summary,
        reliability: table,
    };

    scores.save_csv(&args.out_scores)?;
    std::fs::write(&args.out_report, serde_json::to_vec_pretty(&report)?)?;
    println!(
        "scored {} arguments with {} ({} failures); wrote {} and {}",
        report.scored_arguments,
        scores.method,
        report.scoring_failures,
        args.out_scores.display(),
        args.out_report.display()
    );
    Ok(())
}
