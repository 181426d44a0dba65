//! `argrank report`: human-readable summary of a JSON report written by the
//! other subcommands.

use std::path::PathBuf;

use clap::Args;
use serde_json::Value;

use super::{CliError, CliResult};

#[derive(Args)]
pub struct ReportArgs {
    /// JSON report file to summarize.
    pub path: PathBuf,
}

fn field<'a>(value: &'a Value, path: &[&str]) -> Option<&'a Value> {
    let mut current = value;
    for key in path {
        current = current.get(key)?;
    }
    Some(current)
}

fn number(value: &Value, path: &[&str]) -> Option<f64> {
    field(value, path).and_then(Value::as_f64)
}

pub fn run(args: ReportArgs) -> CliResult {
    let raw = std::fs::read_to_string(&args.path)?;
    let value: Value = serde_json::from_str(&raw)
        .map_err(|e| CliError::validation(format!("not a JSON report: {e}")))?;
    let command = value
        .get("command")
        .and_then(Value::as_str)
        .unwrap_or("unknown");
    println!("report: {command} ({})", args.path.display());

    match command {
        "score" => {
            if let Some(n) = number(&value, &["scored_arguments"]) {
                println!("  scored arguments: {n}");
            }
            if let Some(removed) = field(&value, &["removed_annotators"]).and_then(Value::as_array)
            {
                println!("  annotators removed by test questions: {}", removed.len());
            }
            match number(&value, &["task_stats", "task_average_kappa"]) {
                Some(kappa) => println!("  task-average kappa: {kappa:.4}"),
                None => println!("  task-average kappa: unavailable"),
            }
            if let Some(kappa) = number(&value, &["task_stats", "stance_average_kappa"]) {
                println!("  stance-average kappa: {kappa:.4}");
            }
            if let Some(ll) = number(&value, &["mace", "log_likelihood"]) {
                println!("  mace log-likelihood: {ll:.4}");
            }
        }
        "evaluate" => {
            for (label, path) in [
                ("n", vec!["n"]),
                ("pearson r", vec!["pearson_r"]),
                ("spearman rho", vec!["spearman_rho"]),
                ("rrse", vec!["rrse"]),
            ] {
                if let Some(v) = number(&value, &path) {
                    println!("  {label}: {v:.4}");
                }
            }
            if let Some(p) = number(&value, &["comparison", "pearson", "test", "p_value_one_sided"])
            {
                println!("  williams one-sided p (pearson): {p:.4}");
            }
        }
        "consistency" => {
            for (label, path) in [
                ("split-half pearson r", vec!["split_half", "pearson_r"]),
                ("split-half spearman rho", vec!["split_half", "spearman_rho"]),
            ] {
                if let Some(v) = number(&value, &path) {
                    println!("  {label}: {v:.4}");
                }
            }
            if let Some(bins) = field(&value, &["delta_bins", "bins"]).and_then(Value::as_array) {
                for bin in bins {
                    let label = bin.get("label").and_then(Value::as_str).unwrap_or("?");
                    match bin.get("precision").and_then(Value::as_f64) {
                        Some(p) => println!("  bin {label}: precision {p:.3}"),
                        None => println!("  bin {label}: no decided sample"),
                    }
                }
            }
        }
        _ => {
            println!("  (unrecognized report type; raw keys follow)");
            if let Some(object) = value.as_object() {
                for key in object.keys() {
                    println!("  - {key}");
                }
            }
        }
    }
    Ok(())
}
