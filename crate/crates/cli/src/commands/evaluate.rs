//! `argrank evaluate`: correlations (and RRSE) of a prediction file against
//! gold scores, with optional cut-off percentile curves and an optional
//! Williams-test comparison against a second prediction file.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use argrank::prelude::*;

use super::{CliError, CliResult};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldFormat {
    /// A scores CSV as written by `argrank score`.
    Scores,
    /// A released scored-corpus CSV (WA and MACE-P columns).
    Corpus,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldMethod {
    Wa,
    MaceP,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitArg {
    Train,
    Dev,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Dev => Split::Dev,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Gold score file.
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, value_enum, default_value = "scores")]
    pub gold_format: GoldFormat,
    /// Which released score column is gold (corpus format only).
    #[arg(long, value_enum, default_value = "wa")]
    pub gold_method: GoldMethod,
    /// Restrict evaluation to one split (corpus format only).
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    /// Column-mapping config for the corpus format (JSON or TOML).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Two-column prediction CSV: argument_id, score.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Second prediction CSV for a Williams-test comparison.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Also compute the cut-off percentile curve.
    #[arg(long, requires = "out_cutoff")]
    pub cutoff: bool,
    /// Where to write the cut-off curve CSV.
    #[arg(long)]
    pub out_cutoff: Option<PathBuf>,
    #[arg(long, default_value = "evaluation_report.json")]
    pub out_report: PathBuf,
}

#[derive(Serialize)]
struct EffectiveConfig {
    gold: String,
    gold_format: GoldFormat,
    gold_method: Option<GoldMethod>,
    split: Option<SplitArg>,
    predictions: String,
    compare: Option<String>,
    cutoff_percentiles: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct EvaluationReport {
    command: &'static str,
    config: EffectiveConfig,
    n: usize,
    pearson_r: f64,
    spearman_rho: f64,
    rrse: f64,
    cutoff: Option<CutoffCurve>,
    comparison: Option<PredictorComparison>,
}

fn load_gold(
    args: &EvaluateArgs,
) -> std::result::Result<(QualityScores, Option<BTreeSet<ArgumentId>>), CliError> {
    match args.gold_format {
        GoldFormat::Scores => {
            if args.split.is_some() {
                return Err(CliError::validation(
                    "--split requires --gold-format corpus; a scores CSV carries no split labels",
                ));
            }
            Ok((QualityScores::load_csv(&args.gold)?, None))
        }
        GoldFormat::Corpus => {
            let schema: ScoredCorpusSchema = match &args.schema {
                Some(path) => load_schema(path)?,
                None => ScoredCorpusSchema::default(),
            };
            let corpus = load_scored_corpus(&args.gold, &schema)?;
            let method = match args.gold_method {
                GoldMethod::Wa => ScoreMethod::Wa,
                GoldMethod::MaceP => ScoreMethod::MaceP,
            };
            let mut gold = QualityScores::new(method);
            for row in corpus.iter() {
                let score = match args.gold_method {
                    GoldMethod::Wa => row.wa_score,
                    GoldMethod::MaceP => row.mace_p_score,
                };
                gold.entries.insert(
                    row.id.clone(),
                    argrank::scoring::ScoreEntry {
                        score,
                        support: None,
                    },
                );
            }
            let restrict = args.split.map(|wanted| {
                corpus
                    .iter()
                    .filter(|row| row.split == Some(wanted.into()))
                    .map(|row| row.id.clone())
                    .collect()
            });
            Ok((gold, restrict))
        }
    }
}

pub fn run(args: EvaluateArgs) -> CliResult {
    let (gold, restrict) = load_gold(&args)?;
    let predictions = PredictionSet::load_csv(&args.predictions)?;
    let outcome = evaluate_predictions(&predictions, &gold, restrict.as_ref())?;

    let percentiles = argrank::evaluation::DEFAULT_CUTOFF_PERCENTILES.to_vec();
    let cutoff = if args.cutoff {
        Some(cutoff_correlations(
            &predictions,
            &gold,
            restrict.as_ref(),
            &percentiles,
        )?)
    } else {
        None
    };
    let comparison = match &args.compare {
        Some(path) => {
            let other = PredictionSet::load_csv(path)?;
            Some(compare_predictors(
                &predictions,
                &other,
                &gold,
                restrict.as_ref(),
            )?)
        }
        None => None,
    };

    let report = EvaluationReport {
        command: "evaluate",
        config: EffectiveConfig {
            gold: args.gold.display().to_string(),
            gold_format: args.gold_format,
            gold_method: matches!(args.gold_format, GoldFormat::Corpus)
                .then_some(args.gold_method),
            split: args.split,
            predictions: args.predictions.display().to_string(),
            compare: args.compare.as_ref().map(|p| p.display().to_string()),
            cutoff_percentiles: args.cutoff.then_some(percentiles),
        },
        n: outcome.correlation.n,
        pearson_r: outcome.correlation.pearson_r,
        spearman_rho: outcome.correlation.spearman_rho,
        rrse: outcome.rrse,
        cutoff: cutoff.clone(),
        comparison,
    };

    if let (Some(curve), Some(path)) = (&cutoff, &args.out_cutoff) {
        curve.save_csv(path)?;
    }
    std::fs::write(&args.out_report, serde_json::to_vec_pretty(&report)?)?;
    println!(
        "n = {}, pearson r = {:.4}, spearman rho = {:.4}, rrse = {:.4}",
        report.n, report.pearson_r, report.spearman_rho, report.rrse
    );
    if let Some(cmp) = &report.comparison {
        println!(
            "williams (pearson): t = {:.3}, one-sided p = {:.4}",
            cmp.pearson.test.t_statistic, cmp.pearson.test.p_value_one_sided
        );
    }
    println!("wrote {}", args.out_report.display());
    Ok(())
}
