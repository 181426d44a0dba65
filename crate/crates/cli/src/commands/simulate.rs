//! `argrank simulate`: draw a synthetic corpus, write the annotation CSV and
//! the ground-truth JSON (with the effective config embedded), and print a
//! short summary.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use argrank::prelude::*;

use super::{CliError, CliResult};

#[derive(Args)]
pub struct SimulateArgs {
    /// Annotation CSV to write.
    #[arg(long, default_value = "annotations.csv")]
    pub out_annotations: PathBuf,
    /// Ground-truth JSON to write (latent qualities, stances, competences).
    #[arg(long, default_value = "truth.json")]
    pub out_truth: PathBuf,
    /// Simulation config file (JSON or TOML); explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_topics: Option<usize>,
    #[arg(long)]
    pub args_per_topic: Option<usize>,
    #[arg(long)]
    pub n_annotators: Option<usize>,
    #[arg(long)]
    pub annotations_per_argument: Option<usize>,
    #[arg(long)]
    pub positivity_bias: Option<f64>,
    #[arg(long)]
    pub spam_base_rate: Option<f64>,
    #[arg(long)]
    pub stance_noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Ground truth plus the full effective configuration, so every simulated
/// artifact is reproducible from its own file.
#[derive(Serialize, Deserialize)]
pub struct TruthArtifact {
    pub config: SimConfig,
    #[serde(flatten)]
    pub truth: SimTruth,
}

fn effective_config(args: &SimulateArgs) -> std::result::Result<SimConfig, CliError> {
    let mut config: SimConfig = match &args.config {
        Some(path) => load_schema(path)?,
        None => SimConfig::default(),
    };
    if let Some(v) = args.n_topics {
        config.n_topics = v;
    }
    if let Some(v) = args.args_per_topic {
        config.args_per_topic = v;
    }
    if let Some(v) = args.n_annotators {
        config.n_annotators = v;
    }
    if let Some(v) = args.annotations_per_argument {
        config.annotations_per_argument = v;
    }
    if let Some(v) = args.positivity_bias {
        config.positivity_bias = v;
    }
    if let Some(v) = args.spam_base_rate {
        config.spam_base_rate = v;
    }
    if let Some(v) = args.stance_noise {
        config.stance_noise = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    Ok(config)
}

pub fn run(args: SimulateArgs) -> CliResult {
    let config = effective_config(&args)?;
    let (truth, set) = simulate_corpus(&config)?;

    let positives = set.records().iter().filter(|r| r.quality_label).count();
    let rate = positives as f64 / set.n_records() as f64;
    // A quick reliability estimate at thresholds scaled to the corpus size.
    let kappa_config = ReliabilityConfig {
        min_shared: (config.n_arguments() / 10).clamp(2, 50),
        min_peers: 2.min(config.n_annotators.saturating_sub(1)).max(1),
    };
    let table = compute_reliability(&set, &kappa_config);
    let stats = task_stats(&set, &table);

    save_annotations(&set, &args.out_annotations)?;
    let artifact = TruthArtifact { config: config.clone(), truth };
    std::fs::write(&args.out_truth, serde_json::to_vec_pretty(&artifact)?)?;

    println!(
        "simulated {} arguments x {} annotations ({} annotators, seed {})",
        config.n_arguments(),
        config.annotations_per_argument,
        config.n_annotators,
        config.seed
    );
    println!(
        "positive rate {:.3} (analytic expectation {:.3})",
        rate,
        config.expected_positive_rate()
    );
    match stats.task_average_kappa {
        Some(kappa) => println!(
            "task-average kappa estimate {:.3} (thresholds {}/{})",
            kappa, kappa_config.min_shared, kappa_config.min_peers
        ),
        None => println!("task-average kappa estimate unavailable at desk scale"),
    }
    println!(
        "wrote {} and {}",
        args.out_annotations.display(),
        args.out_truth.display()
    );
    Ok(())
}
