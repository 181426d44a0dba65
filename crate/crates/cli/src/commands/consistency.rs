//! `argrank consistency`: the split-half consistency check plus, when a gold
//! source is available, the delta-bin precision protocol. Pairwise gold
//! comes either from a supplied file or from simulated judges over a
//! ground-truth file.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use argrank::prelude::*;

use super::simulate::TruthArtifact;
use super::{CliError, CliResult};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Wa,
    Mace,
}

#[derive(Args)]
pub struct ConsistencyArgs {
    /// Annotation file (CSV or JSON lines).
    #[arg(long)]
    pub input: PathBuf,
    /// Column-mapping config for the input (JSON or TOML).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Master seed: drives the half-split, gold simulation, and bin
    /// sampling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Ground-truth JSON from `argrank simulate`; enables simulated
    /// pairwise gold.
    #[arg(long, conflicts_with = "pairwise_gold")]
    pub truth: Option<PathBuf>,
    /// Pairwise gold CSV (first_id, second_id, preferred, agreement).
    #[arg(long)]
    pub pairwise_gold: Option<PathBuf>,
    /// Probability a simulated judge votes against the latent order.
    #[arg(long, default_value_t = 0.2)]
    pub pair_noise: f64,
    #[arg(long, default_value_t = 7)]
    pub judges_per_pair: usize,
    #[arg(long, default_value_t = 150)]
    pub sample_per_bin: usize,
    #[arg(long, default_value_t = 0.7)]
    pub agreement_threshold: f64,
    /// Remove annotators failing more than this fraction of test questions.
    #[arg(long, default_value_t = 0.2)]
    pub max_fail_rate: f64,
    /// Reliability thresholds for full-data scoring.
    #[arg(long, default_value_t = 50)]
    pub min_shared: usize,
    #[arg(long, default_value_t = 5)]
    pub min_peers: usize,
    /// Reduced reliability thresholds inside each split half.
    #[arg(long, default_value_t = 25)]
    pub split_min_shared: usize,
    #[arg(long, default_value_t = 5)]
    pub split_min_peers: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value = "consistency_report.json")]
    pub out_report: PathBuf,
}

#[derive(Serialize)]
struct EffectiveConfig {
    input: String,
    method: MethodArg,
    seed: u64,
    gold_source: String,
    pair_noise: Option<f64>,
    judges_per_pair: Option<usize>,
    sample_per_bin: usize,
    agreement_threshold: f64,
    max_fail_rate: f64,
    reliability: ReliabilityConfig,
    split_half: SplitHalfConfig,
}

#[derive(Serialize)]
struct ConsistencyReport {
    command: &'static str,
    config: EffectiveConfig,
    split_half: CorrelationResult,
    delta_bins: Option<DeltaBinReport>,
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run(args: ConsistencyArgs) -> CliResult {
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
    let (filtered, _removed) = filter_by_test_questions(&set, args.max_fail_rate);

    let method = match args.method {
        MethodArg::Wa => ConsistencyMethod::Wa,
        MethodArg::Mace => ConsistencyMethod::MaceP,
    };
    let split_config = SplitHalfConfig {
        reliability: ReliabilityConfig {
            min_shared: args.split_min_shared,
            min_peers: args.split_min_peers,
        },
        mace: MaceConfig {
            restarts: args.restarts,
            seed: args.seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let split_half = split_half_consistency(&filtered, method, args.seed, &split_config)?;

    // Delta bins need a gold source; without one, only the split-half part
    // runs.
    let full_reliability = ReliabilityConfig {
        min_shared: args.min_shared,
        min_peers: args.min_peers,
    };
    let delta_bins = if args.truth.is_some() || args.pairwise_gold.is_some() {
        let items = pair_items_from_annotations(&filtered);
        let pairs = generate_pairs(&items, None);
        let gold = match (&args.truth, &args.pairwise_gold) {
            (Some(path), _) => {
                let raw = std::fs::read_to_string(path)?;
                let artifact: TruthArtifact = serde_json::from_str(&raw)?;
                simulate_pairwise_gold(
                    &artifact.truth,
                    &pairs,
                    args.judges_per_pair,
                    args.pair_noise,
                    derive_seed(args.seed, 1),
                )?
            }
            (None, Some(path)) => PairwiseGold::load_csv(path)?,
            (None, None) => unreachable!("guarded above"),
        };
        let scores = match args.method {
            MethodArg::Wa => {
                let table = compute_reliability(&filtered, &full_reliability);
                score_corpus(
                    &filtered,
                    Some(&table),
                    &AveragingMethod::Weighted(WeightPolicy::default()),
                )?
            }
            MethodArg::Mace => {
                let config = MaceConfig {
                    restarts: args.restarts,
                    seed: args.seed,
                    ..Default::default()
                };
                mace_posteriors(&mace_fit(&filtered, &config)?)
            }
        };
        Some(delta_bin_evaluation(
            &pairs,
            &scores,
            &gold,
            args.sample_per_bin,
            args.agreement_threshold,
            derive_seed(args.seed, 2),
        )?)
    } else {
        None
    };

    let report = ConsistencyReport {
        command: "consistency",
        config: EffectiveConfig {
            input: args.input.display().to_string(),
            method: args.method,
            seed: args.seed,
            gold_source: match (&args.truth, &args.pairwise_gold) {
                (Some(p), _) => format!("simulated from {}", p.display()),
                (None, Some(p)) => p.display().to_string(),
                (None, None) => "none".into(),
            },
            pair_noise: args.truth.is_some().then_some(args.pair_noise),
            judges_per_pair: args.truth.is_some().then_some(args.judges_per_pair),
            sample_per_bin: args.sample_per_bin,
            agreement_threshold: args.agreement_threshold,
            max_fail_rate: args.max_fail_rate,
            reliability: full_reliability,
            split_half: split_config,
        },
        split_half,
        delta_bins,
    };
    std::fs::write(&args.out_report, serde_json::to_vec_pretty(&report)?)?;

    println!(
        "split-half: pearson r = {:.4}, spearman rho = {:.4} over {} arguments",
        report.split_half.pearson_r, report.split_half.spearman_rho, report.split_half.n
    );
    if let Some(bins) = &report.delta_bins {
        for bin in &bins.bins {
            match bin.precision {
                Some(p) => println!(
                    "delta bin {:>12}: {} pairs, precision {:.3} ({:.0}% filtered)",
                    bin.label,
                    bin.pair_count,
                    p,
                    bin.filtered_fraction * 100.0
                ),
                None => println!(
                    "delta bin {:>12}: {} pairs, no decided sample",
                    bin.label, bin.pair_count
                ),
            }
        }
    }
    println!("wrote {}", args.out_report.display());
    Ok(())
}
