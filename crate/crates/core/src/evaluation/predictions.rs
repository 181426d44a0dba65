//! External-predictor evaluation: correlations against gold scores, RRSE,
//! cut-off percentile curves, and Williams-test comparison of two predictors
//! that share the same gold.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ArgumentId;
use crate::error::{Error, Result};
use crate::scoring::QualityScores;
use crate::stats::{
    correlations, midranks, pearson, rrse, williams_test, CorrelationResult, WilliamsResult,
};

/// Per-argument predictions from an external model. Values are arbitrary
/// finite reals; only their ordering and linear relation to gold matter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub entries: BTreeMap<ArgumentId, f64>,
}

impl PredictionSet {
    pub fn from_map(entries: BTreeMap<ArgumentId, f64>) -> Self {
        Self { entries }
    }

    pub fn get(&self, id: &ArgumentId) -> Option<f64> {
        self.entries.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads a prediction CSV. The canonical layout is two columns
    /// `(argument_id, score)`; a header row is detected by the second field
    /// failing to parse as a number. When a header names `argument_id` and
    /// `score` columns explicitly (as the scores CSV written by batch
    /// scoring does), those columns are used wherever they sit.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path.as_ref())?;
        let mut entries = BTreeMap::new();
        let mut columns = (0usize, 1usize);
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record?;
            if row == 1 {
                let named = (
                    record.iter().position(|f| f == "argument_id"),
                    record.iter().position(|f| f == "score"),
                );
                if let (Some(id_idx), Some(score_idx)) = named {
                    columns = (id_idx, score_idx);
                    continue;
                }
            }
            if record.len() <= columns.0.max(columns.1) {
                return Err(Error::Row {
                    row,
                    message: "expected columns: argument_id, score".into(),
                });
            }
            let id = record.get(columns.0).unwrap_or("").to_string();
            let raw_score = record.get(columns.1).unwrap_or("").trim();
            let score: f64 = match raw_score.parse() {
                Ok(v) => v,
                Err(_) if row == 1 => continue, // headerless two-column file
                Err(_) => {
                    return Err(Error::Row {
                        row,
                        message: format!("score is not a number: '{raw_score}'"),
                    })
                }
            };
            if !score.is_finite() {
                return Err(Error::Row {
                    row,
                    message: format!("score must be finite, got {score}"),
                });
            }
            if entries.insert(ArgumentId::new(id.clone()), score).is_some() {
                return Err(Error::Row {
                    row,
                    message: format!("duplicate prediction for argument '{id}'"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(["argument_id", "score"])?;
        for (id, score) in &self.entries {
            writer.write_record([id.as_str(), &format!("{score}")])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Gold ids in ascending order, optionally restricted, with coverage
/// checked against the predictions.
fn aligned_ids(
    gold: &QualityScores,
    restrict: Option<&BTreeSet<ArgumentId>>,
    predictions: &[&PredictionSet],
) -> Result<Vec<ArgumentId>> {
    let ids: Vec<ArgumentId> = gold
        .ids()
        .filter(|id| restrict.is_none_or(|set| set.contains(*id)))
        .cloned()
        .collect();
    if ids.is_empty() {
        return Err(Error::EmptyInput("no gold scores to evaluate against".into()));
    }
    let mut missing: Vec<ArgumentId> = Vec::new();
    for id in &ids {
        if predictions.iter().any(|p| p.get(id).is_none()) {
            missing.push(id.clone());
        }
    }
    if !missing.is_empty() {
        return Err(Error::CoverageGap(missing));
    }
    Ok(ids)
}

/// Correlations of a predictor against gold, plus per-argument residuals and
/// their RRSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutcome {
    pub correlation: CorrelationResult,
    pub rrse: f64,
    pub residuals: BTreeMap<ArgumentId, f64>,
}

/// Scores a prediction file against gold. Predictions must cover every gold
/// argument (after the optional restriction); extra predictions are ignored.
pub fn evaluate_predictions(
    predictions: &PredictionSet,
    gold: &QualityScores,
    restrict: Option<&BTreeSet<ArgumentId>>,
) -> Result<EvaluationOutcome> {
    let ids = aligned_ids(gold, restrict, &[predictions])?;
    let predicted: Vec<f64> = ids.iter().map(|id| predictions.get(id).unwrap()).collect();
    let gold_scores: Vec<f64> = ids.iter().map(|id| gold.score(id).unwrap()).collect();
    let correlation = correlations(&predicted, &gold_scores)?;
    let rrse = rrse(&predicted, &gold_scores)?;
    let residuals = ids
        .iter()
        .map(|id| {
            (
                id.clone(),
                predictions.get(id).unwrap() - gold.score(id).unwrap(),
            )
        })
        .collect();
    Ok(EvaluationOutcome {
        correlation,
        rrse,
        residuals,
    })
}

pub const DEFAULT_CUTOFF_PERCENTILES: [usize; 5] = [10, 20, 30, 40, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffPoint {
    pub percentile: usize,
    pub pearson_r: Option<f64>,
    pub spearman_rho: Option<f64>,
    pub subset_size: usize,
    /// Why the correlations are absent, when they are.
    pub notice: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCurve {
    pub points: Vec<CutoffPoint>,
}

impl CutoffCurve {
    /// Plot-ready CSV: `d,pearson_r,spearman_rho,subset_size`. Skipped
    /// percentiles keep their row with empty correlation cells.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(["d", "pearson_r", "spearman_rho", "subset_size"])?;
        for point in &self.points {
            writer.write_record([
                point.percentile.to_string(),
                point.pearson_r.map(|v| v.to_string()).unwrap_or_default(),
                point.spearman_rho.map(|v| v.to_string()).unwrap_or_default(),
                point.subset_size.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Correlations restricted to the top d% plus bottom d% of arguments by
/// gold score, for each cut-off percentile. Sorting ties break by argument
/// id; d = 50 reproduces the full-set correlations bit-exactly because the
/// subset is evaluated in the same (ascending id) order.
pub fn cutoff_correlations(
    predictions: &PredictionSet,
    gold: &QualityScores,
    restrict: Option<&BTreeSet<ArgumentId>>,
    percentiles: &[usize],
) -> Result<CutoffCurve> {
    for &d in percentiles {
        if d == 0 || d > 50 {
            return Err(Error::InvalidConfig(format!(
                "cut-off percentile must lie in 1..=50, got {d}"
            )));
        }
    }
    let ids = aligned_ids(gold, restrict, &[predictions])?;
    let n = ids.len();
    let mut by_gold: Vec<&ArgumentId> = ids.iter().collect();
    by_gold.sort_by(|a, b| {
        gold.score(a)
            .unwrap()
            .total_cmp(&gold.score(b).unwrap())
            .then_with(|| a.cmp(b))
    });

    let mut points = Vec::with_capacity(percentiles.len());
    for &d in percentiles {
        let k = (n * d).div_ceil(100);
        let subset: BTreeSet<&ArgumentId> = by_gold[..k]
            .iter()
            .chain(by_gold[n - k..].iter())
            .copied()
            .collect();
        let subset_size = subset.len();
        if subset_size < 3 {
            points.push(CutoffPoint {
                percentile: d,
                pearson_r: None,
                spearman_rho: None,
                subset_size,
                notice: Some("subset too small for a correlation".into()),
            });
            continue;
        }
        // BTreeSet iteration is ascending by id: the same evaluation order
        // as the full set.
        let predicted: Vec<f64> = subset.iter().map(|id| predictions.get(id).unwrap()).collect();
        let gold_scores: Vec<f64> = subset.iter().map(|id| gold.score(id).unwrap()).collect();
        match correlations(&predicted, &gold_scores) {
            Ok(result) => points.push(CutoffPoint {
                percentile: d,
                pearson_r: Some(result.pearson_r),
                spearman_rho: Some(result.spearman_rho),
                subset_size,
                notice: None,
            }),
            Err(e) => points.push(CutoffPoint {
                percentile: d,
                pearson_r: None,
                spearman_rho: None,
                subset_size,
                notice: Some(e.to_string()),
            }),
        }
    }
    Ok(CutoffCurve { points })
}

/// One Williams comparison: the three pairwise correlations and the test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilliamsCase {
    pub r_a_gold: f64,
    pub r_b_gold: f64,
    pub r_a_b: f64,
    pub test: WilliamsResult,
}

/// Williams comparison of two predictors against shared gold, reported for
/// Pearson and (via rank transformation) Spearman correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorComparison {
    pub n: usize,
    pub pearson: WilliamsCase,
    pub spearman: WilliamsCase,
}

fn williams_case(a: &[f64], b: &[f64], gold: &[f64], n: usize) -> Result<WilliamsCase> {
    let r_a_gold = pearson(a, gold)?;
    let r_b_gold = pearson(b, gold)?;
    let r_a_b = pearson(a, b)?;
    Ok(WilliamsCase {
        r_a_gold,
        r_b_gold,
        r_a_b,
        test: williams_test(r_a_gold, r_b_gold, r_a_b, n)?,
    })
}

/// Tests whether predictor `a` correlates with gold significantly better
/// than predictor `b` does.
pub fn compare_predictors(
    pred_a: &PredictionSet,
    pred_b: &PredictionSet,
    gold: &QualityScores,
    restrict: Option<&BTreeSet<ArgumentId>>,
) -> Result<PredictorComparison> {
    let ids = aligned_ids(gold, restrict, &[pred_a, pred_b])?;
    let n = ids.len();
    let a: Vec<f64> = ids.iter().map(|id| pred_a.get(id).unwrap()).collect();
    let b: Vec<f64> = ids.iter().map(|id| pred_b.get(id).unwrap()).collect();
    let g: Vec<f64> = ids.iter().map(|id| gold.score(id).unwrap()).collect();

    let pearson_case = williams_case(&a, &b, &g, n)?;
    let spearman_case = williams_case(&midranks(&a), &midranks(&b), &midranks(&g), n)?;
    Ok(PredictorComparison {
        n,
        pearson: pearson_case,
        spearman: spearman_case,
    })
}
