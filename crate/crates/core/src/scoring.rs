//! Closed-form per-argument quality scores: the plain positive fraction and
//! the reliability-weighted average (WA).
//!
//! WA divides the summed reliabilities of positive-voting annotators by the
//! summed reliabilities of all voting annotators. Reliabilities can be
//! negative or missing, so two policy knobs keep the score inside [0,1]:
//! a weight floor for eligible annotators and a fallback weight for
//! annotators without a reliability score.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotationSet, ArgumentId};
use crate::error::{Error, Result};
use crate::reliability::ReliabilityTable;

pub const DEFAULT_WEIGHT_FLOOR: f64 = 0.01;

/// Scoring function that produced a set of quality scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    SimpleAverage,
    Wa,
    MaceP,
}

impl ScoreMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMethod::SimpleAverage => "simple_average",
            ScoreMethod::Wa => "wa",
            ScoreMethod::MaceP => "mace_p",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simple_average" | "avg" => Some(ScoreMethod::SimpleAverage),
            "wa" => Some(ScoreMethod::Wa),
            "mace_p" | "mace-p" | "mace" => Some(ScoreMethod::MaceP),
            _ => None,
        }
    }
}

impl std::fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Weight assigned to annotators without a valid reliability score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    /// Weigh them by the task-average reliability (keeps every judgment in
    /// the data, which is the point of WA over hard filtering).
    TaskAverage,
    /// Drop their judgments from both numerator and denominator.
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightPolicy {
    /// Effective weight = max(annotator_rel, floor). Pairwise kappa can be
    /// negative, which would break the [0,1] score bound.
    pub floor: f64,
    pub fallback: FallbackPolicy,
}

impl Default for WeightPolicy {
    fn default() -> Self {
        Self {
            floor: DEFAULT_WEIGHT_FLOOR,
            fallback: FallbackPolicy::TaskAverage,
        }
    }
}

impl WeightPolicy {
    fn check(&self) -> Result<()> {
        if !self.floor.is_finite() || self.floor < 0.0 {
            return Err(Error::InvalidConfig(
                "weight floor must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Scorer selection for batch scoring of a raw annotation set. MACE-P scores
/// come from a fitted model via `mace::mace_posteriors` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMethod {
    Simple,
    Weighted(WeightPolicy),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub score: f64,
    /// Number of annotations behind the score; `None` for externally
    /// supplied scores whose support is unknown.
    pub support: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFailure {
    pub argument: ArgumentId,
    pub reason: String,
}

/// Provenance of the weighting choices, echoed into score outputs because
/// the fallback treatment of unreliable annotators is a modeling assumption.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoringMetadata {
    pub weight_floor: Option<f64>,
    pub fallback: Option<FallbackPolicy>,
    pub fallback_weight: Option<f64>,
    /// Annotators that received the fallback weight somewhere in the batch.
    pub fallback_annotators: usize,
}

/// Per-argument continuous quality scores for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub method: ScoreMethod,
    pub entries: BTreeMap<ArgumentId, ScoreEntry>,
    /// Arguments that could not be scored, with reasons; batch scoring
    /// collects these instead of aborting.
    pub failures: Vec<ScoreFailure>,
    pub metadata: ScoringMetadata,
}

impl QualityScores {
    pub fn new(method: ScoreMethod) -> Self {
        Self {
            method,
            entries: BTreeMap::new(),
            failures: Vec::new(),
            metadata: ScoringMetadata::default(),
        }
    }

    pub fn score(&self, id: &ArgumentId) -> Option<f64> {
        self.entries.get(id).map(|e| e.score)
    }

    pub fn ids(&self) -> impl Iterator<Item = &ArgumentId> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only the given arguments.
    pub fn restrict(&self, ids: &BTreeSet<ArgumentId>) -> Self {
        Self {
            method: self.method,
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| ids.contains(*id))
                .map(|(id, e)| (id.clone(), *e))
                .collect(),
            failures: self.failures.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// Writes the scores CSV: `argument_id,method,score,support`.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(["argument_id", "method", "score", "support"])?;
        for (id, entry) in &self.entries {
            writer.write_record([
                id.as_str(),
                self.method.as_str(),
                &format!("{}", entry.score),
                &entry.support.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads a scores CSV written by [`QualityScores::save_csv`]. All rows
    /// must carry the same method.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path.as_ref())?;
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("required column '{name}' not found")))
        };
        let id_idx = col("argument_id")?;
        let method_idx = col("method")?;
        let score_idx = col("score")?;
        let support_idx = col("support")?;

        let mut method: Option<ScoreMethod> = None;
        let mut entries = BTreeMap::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record?;
            let get = |idx: usize| record.get(idx).unwrap_or("");
            let row_method = ScoreMethod::parse(get(method_idx)).ok_or_else(|| Error::Row {
                row,
                message: format!("unknown method '{}'", get(method_idx)),
            })?;
            match method {
                None => method = Some(row_method),
                Some(m) if m == row_method => {}
                Some(m) => {
                    return Err(Error::Row {
                        row,
                        message: format!("mixed methods in one file: {m} vs {row_method}"),
                    })
                }
            }
            let score: f64 = get(score_idx).trim().parse().map_err(|_| Error::Row {
                row,
                message: format!("score is not a number: '{}'", get(score_idx)),
            })?;
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::Row {
                    row,
                    message: format!("score must lie in [0,1], got {score}"),
                });
            }
            let support = {
                let raw = get(support_idx).trim();
                if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse::<usize>().map_err(|_| Error::Row {
                        row,
                        message: format!("support is not an integer: '{raw}'"),
                    })?)
                }
            };
            entries.insert(
                ArgumentId::new(get(id_idx)),
                ScoreEntry { score, support },
            );
        }
        let method = method.ok_or_else(|| Error::EmptyInput("scores file has no rows".into()))?;
        Ok(Self {
            method,
            entries,
            failures: Vec::new(),
            metadata: ScoringMetadata::default(),
        })
    }
}

/// Fraction of positive quality labels for one argument.
pub fn simple_average(set: &AnnotationSet, id: &ArgumentId) -> Result<f64> {
    if set.argument(id).is_none() {
        return Err(Error::UnknownArgument(id.clone()));
    }
    let mut total = 0usize;
    let mut positive = 0usize;
    for rec in set.records_for(id) {
        total += 1;
        positive += usize::from(rec.quality_label);
    }
    if total == 0 {
        return Err(Error::EmptyInput(format!(
            "argument '{id}' has no quality annotations"
        )));
    }
    Ok(positive as f64 / total as f64)
}

/// Effective weight for one annotator under the policy, or `None` when the
/// annotator is excluded. `fallback_weight` is `max(task_average, floor)`.
fn effective_weight(
    table: &ReliabilityTable,
    policy: &WeightPolicy,
    fallback_weight: Option<f64>,
    annotator: &crate::corpus::AnnotatorId,
) -> Option<(f64, bool)> {
    match table.get(annotator).and_then(|e| e.annotator_rel) {
        Some(rel) => Some((rel.max(policy.floor), false)),
        None => match policy.fallback {
            FallbackPolicy::TaskAverage => fallback_weight.map(|w| (w, true)),
            FallbackPolicy::Exclude => None,
        },
    }
}

/// The WA score of one argument: summed weights of positive voters over
/// summed weights of all voters.
///
/// Weights are normalized by their maximum before summing, which changes
/// nothing mathematically (the score is scale-invariant) and makes the
/// uniform-weight case cancel exactly to the simple average.
pub fn weighted_average(
    set: &AnnotationSet,
    table: &ReliabilityTable,
    id: &ArgumentId,
    policy: &WeightPolicy,
) -> Result<f64> {
    policy.check()?;
    if set.argument(id).is_none() {
        return Err(Error::UnknownArgument(id.clone()));
    }
    let fallback_weight = table.task_average().map(|t| t.max(policy.floor));
    let mut weights = Vec::new();
    let mut positives = Vec::new();
    for rec in set.records_for(id) {
        if let Some((w, _)) = effective_weight(table, policy, fallback_weight, &rec.annotator_id) {
            weights.push(w);
            positives.push(rec.quality_label);
        }
    }
    if weights.is_empty() {
        return Err(if set.annotation_count(id) == 0 {
            Error::EmptyInput(format!("argument '{id}' has no quality annotations"))
        } else {
            Error::DegenerateWeights(id.clone())
        });
    }
    let w_max = weights.iter().cloned().fold(f64::MIN, f64::max);
    if w_max <= 0.0 {
        return Err(Error::DegenerateWeights(id.clone()));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (w, positive) in weights.iter().zip(&positives) {
        let v = w / w_max;
        denominator += v;
        if *positive {
            numerator += v;
        }
    }
    Ok(numerator / denominator)
}

/// Scores every argument with at least one annotation. Per-argument failures
/// are collected into the result instead of aborting the batch.
pub fn score_corpus(
    set: &AnnotationSet,
    table: Option<&ReliabilityTable>,
    method: &AveragingMethod,
) -> Result<QualityScores> {
    let (score_method, policy) = match method {
        AveragingMethod::Simple => (ScoreMethod::SimpleAverage, None),
        AveragingMethod::Weighted(p) => {
            p.check()?;
            (ScoreMethod::Wa, Some(*p))
        }
    };
    let table = match (&policy, table) {
        (Some(_), None) => {
            return Err(Error::InvalidConfig(
                "weighted averaging requires a reliability table".into(),
            ))
        }
        (_, t) => t,
    };

    let mut out = QualityScores::new(score_method);
    if let (Some(p), Some(t)) = (&policy, table) {
        let fallback_weight = t.task_average().map(|avg| avg.max(p.floor));
        let fallback_annotators = set
            .annotators()
            .iter()
            .filter(|a| t.get(a).and_then(|e| e.annotator_rel).is_none())
            .count();
        out.metadata = ScoringMetadata {
            weight_floor: Some(p.floor),
            fallback: Some(p.fallback),
            fallback_weight,
            fallback_annotators,
        };
    }

    let ids: Vec<ArgumentId> = set.argument_ids().cloned().collect();
    for id in ids {
        let support = set.annotation_count(&id);
        if support == 0 {
            continue;
        }
        let result = match (&policy, table) {
            (None, _) => simple_average(set, &id),
            (Some(p), Some(t)) => weighted_average(set, t, &id, p),
            (Some(_), None) => unreachable!("checked above"),
        };
        match result {
            Ok(score) => {
                out.entries.insert(
                    id,
                    ScoreEntry {
                        score,
                        support: Some(support),
                    },
                );
            }
            Err(e) => out.failures.push(ScoreFailure {
                argument: id,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationRecord, Argument, Stance};
    use crate::reliability::{AnnotatorReliability, LabelKind, ReliabilityConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn arg(id: &str) -> Argument {
        Argument {
            id: id.into(),
            text: format!("{id}: synthetic argument body long enough for the checks"),
            topic: "t".into(),
            declared_stance: None,
            author: None,
        }
    }

    fn rec(annotator: &str, argument: &str, label: bool) -> AnnotationRecord {
        AnnotationRecord {
            annotator_id: annotator.into(),
            argument_id: argument.into(),
            quality_label: label,
            stance_label: Stance::Pro,
            is_test_question: false,
            test_passed: None,
        }
    }

    fn one_arg_set(labels: &[bool]) -> AnnotationSet {
        let records: Vec<AnnotationRecord> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| rec(&format!("u{i:03}"), "a", l))
            .collect();
        AnnotationSet::new(vec![arg("a")], records).unwrap()
    }

    /// Table with fixed reliabilities for annotators u000, u001, ...
    fn table_with(rels: &[f64]) -> ReliabilityTable {
        let entries: BTreeMap<_, _> = rels
            .iter()
            .enumerate()
            .map(|(i, &rel)| {
                (
                    crate::corpus::AnnotatorId::new(format!("u{i:03}")),
                    AnnotatorReliability {
                        annotator_rel: Some(rel),
                        eligible: true,
                        removed_by_test_questions: false,
                        shared_counts: BTreeMap::new(),
                    },
                )
            })
            .collect();
        ReliabilityTable {
            entries,
            config: ReliabilityConfig::default(),
            label_kind: LabelKind::Quality,
        }
    }

    #[test]
    fn simple_average_examples() {
        let set = one_arg_set(&[true, true, true, false, false]);
        assert_eq!(simple_average(&set, &"a".into()).unwrap(), 0.6);
        let unanimous = one_arg_set(&[true; 4]);
        assert_eq!(simple_average(&unanimous, &"a".into()).unwrap(), 1.0);
        let negative = one_arg_set(&[false; 4]);
        assert_eq!(simple_average(&negative, &"a".into()).unwrap(), 0.0);
    }

    #[test]
    fn simple_average_unknown_argument() {
        let set = one_arg_set(&[true]);
        assert!(matches!(
            simple_average(&set, &"nope".into()),
            Err(Error::UnknownArgument(_))
        ));
    }

    #[test]
    fn weighted_average_formula_example() {
        // weights {0.5, 0.3, 0.2}, positives = first two -> 0.8
        let set = one_arg_set(&[true, true, false]);
        let table = table_with(&[0.5, 0.3, 0.2]);
        let score = weighted_average(&set, &table, &"a".into(), &WeightPolicy::default()).unwrap();
        assert_abs_diff_eq!(score, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn weighted_average_unanimous_is_exact() {
        let set = one_arg_set(&[true, true, true]);
        let table = table_with(&[0.7, 0.1, 0.4]);
        let score = weighted_average(&set, &table, &"a".into(), &WeightPolicy::default()).unwrap();
        assert_eq!(score, 1.0);
        let single = one_arg_set(&[false]);
        let table = table_with(&[0.9]);
        assert_eq!(
            weighted_average(&single, &table, &"a".into(), &WeightPolicy::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn negative_reliability_clamped_to_floor() {
        let set = one_arg_set(&[true, false]);
        let table = table_with(&[-0.4, 0.99]);
        let score = weighted_average(&set, &table, &"a".into(), &WeightPolicy::default()).unwrap();
        // 0.01 / (0.01 + 0.99) = 0.01
        assert_abs_diff_eq!(score, 0.01, epsilon = 1e-12);
        assert!((0.0..=1.0).contains(&score));
    }

    #[test]
    fn fallback_task_average_and_exclude() {
        let set = one_arg_set(&[true, false]);
        // u001 has no reliability; u000 has 0.5; task average = 0.5.
        let mut table = table_with(&[0.5]);
        table.entries.insert(
            "u001".into(),
            AnnotatorReliability {
                annotator_rel: None,
                eligible: false,
                removed_by_test_questions: false,
                shared_counts: BTreeMap::new(),
            },
        );
        let with_fallback =
            weighted_average(&set, &table, &"a".into(), &WeightPolicy::default()).unwrap();
        assert_abs_diff_eq!(with_fallback, 0.5, epsilon = 1e-12);

        let exclude = WeightPolicy {
            fallback: FallbackPolicy::Exclude,
            ..Default::default()
        };
        let without = weighted_average(&set, &table, &"a".into(), &exclude).unwrap();
        assert_eq!(without, 1.0); // only the positive u000 remains
    }

    #[test]
    fn degenerate_weights_detected() {
        let set = one_arg_set(&[true, false]);
        // Nobody has a reliability value and fallback is exclude.
        let table = ReliabilityTable {
            entries: BTreeMap::new(),
            config: ReliabilityConfig::default(),
            label_kind: LabelKind::Quality,
        };
        let exclude = WeightPolicy {
            fallback: FallbackPolicy::Exclude,
            ..Default::default()
        };
        assert!(matches!(
            weighted_average(&set, &table, &"a".into(), &exclude),
            Err(Error::DegenerateWeights(_))
        ));
        // All reliabilities clamp to a zero floor -> degenerate.
        let zero_floor = WeightPolicy {
            floor: 0.0,
            fallback: FallbackPolicy::Exclude,
        };
        let negative_table = table_with(&[-0.2, -0.1]);
        assert!(matches!(
            weighted_average(&set, &negative_table, &"a".into(), &zero_floor),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn batch_equals_per_argument_calls() {
        let args = vec![arg("a"), arg("b")];
        let records = vec![
            rec("u000", "a", true),
            rec("u001", "a", false),
            rec("u000", "b", true),
            rec("u001", "b", true),
        ];
        let set = AnnotationSet::new(args, records).unwrap();
        let scores = score_corpus(&set, None, &AveragingMethod::Simple).unwrap();
        assert_eq!(scores.len(), 2);
        for (id, entry) in &scores.entries {
            assert_eq!(entry.score, simple_average(&set, id).unwrap());
            assert_eq!(entry.support, Some(2));
        }
    }

    #[test]
    fn uniform_weights_equal_simple_average_exactly() {
        for labels in [
            vec![true, false, true],
            vec![true, true, false, false, true, false, true],
            vec![false, false, true],
        ] {
            let set = one_arg_set(&labels);
            let table = table_with(&vec![0.137; labels.len()]);
            let wa = weighted_average(&set, &table, &"a".into(), &WeightPolicy::default()).unwrap();
            let avg = simple_average(&set, &"a".into()).unwrap();
            assert_eq!(wa, avg, "labels {labels:?}");
        }
    }

    #[test]
    fn wa_requires_table() {
        let set = one_arg_set(&[true]);
        assert!(matches!(
            score_corpus(&set, None, &AveragingMethod::Weighted(WeightPolicy::default())),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn metadata_records_fallback_assumption() {
        let set = one_arg_set(&[true, false]);
        let mut table = table_with(&[0.5]);
        table.entries.insert(
            "u001".into(),
            AnnotatorReliability {
                annotator_rel: None,
                eligible: false,
                removed_by_test_questions: false,
                shared_counts: BTreeMap::new(),
            },
        );
        let scores = score_corpus(
            &set,
            Some(&table),
            &AveragingMethod::Weighted(WeightPolicy::default()),
        )
        .unwrap();
        assert_eq!(scores.metadata.weight_floor, Some(DEFAULT_WEIGHT_FLOOR));
        assert_eq!(scores.metadata.fallback, Some(FallbackPolicy::TaskAverage));
        assert_eq!(scores.metadata.fallback_annotators, 1);
        assert_eq!(scores.metadata.fallback_weight, Some(0.5));
    }

    #[test]
    fn scores_csv_round_trip() {
        let set = one_arg_set(&[true, false, true]);
        let scores = score_corpus(&set, None, &AveragingMethod::Simple).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        scores.save_csv(&path).unwrap();
        let loaded = QualityScores::load_csv(&path).unwrap();
        assert_eq!(loaded.method, ScoreMethod::SimpleAverage);
        assert_eq!(loaded.entries, scores.entries);
    }

    proptest! {
        /// Flipping any single annotation from 0 to 1 never decreases WA.
        #[test]
        fn single_flip_monotonicity(
            labels in proptest::collection::vec(any::<bool>(), 1..12),
            rels in proptest::collection::vec(-0.5f64..1.0, 12),
            flip_at in 0usize..12,
        ) {
            let flip_at = flip_at % labels.len();
            prop_assume!(!labels[flip_at]);
            let set = one_arg_set(&labels);
            let table = table_with(&rels[..labels.len()]);
            let before =
                weighted_average(&set, &table, &"a".into(), &WeightPolicy::default()).unwrap();
            let mut flipped = labels.clone();
            flipped[flip_at] = true;
            let set2 = one_arg_set(&flipped);
            let after =
                weighted_average(&set2, &table, &"a".into(), &WeightPolicy::default()).unwrap();
            prop_assert!(after >= before, "before {before}, after {after}");
        }

        /// Scaling every reliability by a power of two leaves scores
        /// bit-identical, and scores always stay in [0,1].
        #[test]
        fn scale_invariance_and_bounds(
            labels in proptest::collection::vec(any::<bool>(), 1..12),
            rels in proptest::collection::vec(0.01f64..1.0, 12),
            exponent in -6i32..7,
        ) {
            let set = one_arg_set(&labels);
            let rels = &rels[..labels.len()];
            let table = table_with(rels);
            let policy = WeightPolicy { floor: 0.0, fallback: FallbackPolicy::Exclude };
            let base = weighted_average(&set, &table, &"a".into(), &policy).unwrap();
            let factor = 2f64.powi(exponent);
            let scaled_rels: Vec<f64> = rels.iter().map(|r| r * factor).collect();
            let scaled_table = table_with(&scaled_rels);
            let scaled = weighted_average(&set, &scaled_table, &"a".into(), &policy).unwrap();
            prop_assert_eq!(base, scaled);
            prop_assert!((0.0..=1.0).contains(&base));
        }
    }
}
