//! Split-annotation consistency: each argument's annotations are split into
//! two random halves, scores are recomputed independently per half (with
//! reduced reliability thresholds, since each half carries less evidence per
//! annotator), and the two score vectors are correlated.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotationRecord, AnnotationSet, ArgumentId};
use crate::error::{Error, Result};
use crate::mace::{mace_fit, mace_posteriors, MaceConfig};
use crate::reliability::{compute_reliability, ReliabilityConfig};
use crate::scoring::{score_corpus, AveragingMethod, QualityScores, WeightPolicy};
use crate::stats::{correlations, CorrelationResult};

/// Scoring function under the consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyMethod {
    Wa,
    MaceP,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitHalfConfig {
    /// Reduced thresholds for the halves; default halves the shared-judgment
    /// floor (25 instead of 50).
    pub reliability: ReliabilityConfig,
    pub weight_policy: WeightPolicy,
    pub mace: MaceConfig,
}

impl Default for SplitHalfConfig {
    fn default() -> Self {
        Self {
            reliability: ReliabilityConfig {
                min_shared: 25,
                min_peers: 5,
            },
            weight_policy: WeightPolicy::default(),
            mace: MaceConfig::default(),
        }
    }
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn score_half(
    half: &AnnotationSet,
    method: ConsistencyMethod,
    config: &SplitHalfConfig,
    mace_seed: u64,
) -> Result<QualityScores> {
    match method {
        ConsistencyMethod::Wa => {
            let table = compute_reliability(half, &config.reliability);
            if table.task_average().is_none() {
                return Err(Error::Numerical(
                    "no annotator qualifies for a reliability score in a split half, \
                     even at the reduced thresholds"
                        .into(),
                ));
            }
            score_corpus(
                half,
                Some(&table),
                &AveragingMethod::Weighted(config.weight_policy),
            )
        }
        ConsistencyMethod::MaceP => {
            let mace_config = MaceConfig {
                seed: mace_seed,
                ..config.mace
            };
            Ok(mace_posteriors(&mace_fit(half, &mace_config)?))
        }
    }
}

/// Splits each argument's annotations into two random halves (odd counts
/// drop one annotation at random; single-annotation arguments are skipped),
/// scores both halves independently, and returns the Pearson and Spearman
/// correlations between the two per-argument score vectors.
pub fn split_half_consistency(
    set: &AnnotationSet,
    method: ConsistencyMethod,
    seed: u64,
    config: &SplitHalfConfig,
) -> Result<CorrelationResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut half_a: Vec<AnnotationRecord> = Vec::new();
    let mut half_b: Vec<AnnotationRecord> = Vec::new();
    let ids: Vec<ArgumentId> = set.argument_ids().cloned().collect();
    for id in &ids {
        let mut records: Vec<&AnnotationRecord> = set.records_for(id).collect();
        if records.len() < 2 {
            continue;
        }
        records.shuffle(&mut rng);
        let even = records.len() & !1;
        let records = &records[..even];
        let mid = records.len() / 2;
        half_a.extend(records[..mid].iter().map(|r| (*r).clone()));
        half_b.extend(records[mid..].iter().map(|r| (*r).clone()));
    }
    if half_a.is_empty() {
        return Err(Error::EmptyInput(
            "no argument has at least two annotations to split".into(),
        ));
    }
    let arguments: Vec<_> = set.arguments().cloned().collect();
    let set_a = AnnotationSet::new(arguments.clone(), half_a)?;
    let set_b = AnnotationSet::new(arguments, half_b)?;

    let scores_a = score_half(&set_a, method, config, derive_seed(seed, 1))?;
    let scores_b = score_half(&set_b, method, config, derive_seed(seed, 2))?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for id in &ids {
        if let (Some(a), Some(b)) = (scores_a.score(id), scores_b.score(id)) {
            xs.push(a);
            ys.push(b);
        }
    }
    correlations(&xs, &ys)
}
