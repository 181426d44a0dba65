//! Argument pair generation: all unordered same-topic, same-stance pairs,
//! and the subset on which two scoring functions disagree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{majority_stance, AnnotationSet, ArgumentId, ScoredCorpus, Split, Stance};
use crate::error::{Error, Result};
use crate::scoring::QualityScores;

/// A pairable argument: stance already resolved, split optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairItem {
    pub id: ArgumentId,
    pub topic: String,
    pub stance: Stance,
    pub split: Option<Split>,
}

/// Pairable view of a released corpus; undetermined-stance arguments are
/// excluded because pairs require a shared stance.
pub fn pair_items_from_scored(corpus: &ScoredCorpus) -> Vec<PairItem> {
    corpus
        .iter()
        .filter_map(|row| {
            row.stance.stance().map(|stance| PairItem {
                id: row.id.clone(),
                topic: row.topic.clone(),
                stance,
                split: row.split,
            })
        })
        .collect()
}

/// Pairable view of a raw annotation set: stance via majority vote, with
/// ties and unannotated arguments excluded.
pub fn pair_items_from_annotations(set: &AnnotationSet) -> Vec<PairItem> {
    set.arguments()
        .filter_map(|arg| {
            let (resolved, _) = majority_stance(set, &arg.id).ok()?;
            resolved.stance().map(|stance| PairItem {
                id: arg.id.clone(),
                topic: arg.topic.clone(),
                stance,
                split: None,
            })
        })
        .collect()
}

/// An unordered same-topic, same-stance argument pair, stored with
/// `first < second` by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentPair {
    pub first: ArgumentId,
    pub second: ArgumentId,
    pub topic: String,
    pub stance: Stance,
}

impl ArgumentPair {
    /// |score(first) - score(second)| under one scoring function.
    pub fn score_delta(&self, scores: &QualityScores) -> Result<f64> {
        let first = scores
            .score(&self.first)
            .ok_or_else(|| Error::MissingScore(self.first.clone()))?;
        let second = scores
            .score(&self.second)
            .ok_or_else(|| Error::MissingScore(self.second.clone()))?;
        Ok((first - second).abs())
    }
}

/// All unordered pairs within each (topic, stance) group, optionally
/// restricted to one split. Output is sorted by (first, second) id.
pub fn generate_pairs(items: &[PairItem], split: Option<Split>) -> Vec<ArgumentPair> {
    let mut groups: BTreeMap<(&str, Stance), Vec<&PairItem>> = BTreeMap::new();
    for item in items {
        if let Some(wanted) = split {
            if item.split != Some(wanted) {
                continue;
            }
        }
        groups
            .entry((item.topic.as_str(), item.stance))
            .or_default()
            .push(item);
    }
    let mut pairs = Vec::new();
    for ((topic, stance), mut members) in groups {
        members.sort_by(|a, b| a.id.cmp(&b.id));
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                pairs.push(ArgumentPair {
                    first: members[i].id.clone(),
                    second: members[j].id.clone(),
                    topic: topic.to_string(),
                    stance,
                });
            }
        }
    }
    pairs.sort_by(|a, b| (&a.first, &a.second).cmp(&(&b.first, &b.second)));
    pairs
}

/// Pairs on which the two scoring functions order the arguments in strictly
/// opposite ways; pairs tied under either function are excluded.
pub fn disagreement_pairs(
    scores_a: &QualityScores,
    scores_b: &QualityScores,
    pairs: &[ArgumentPair],
) -> Result<Vec<ArgumentPair>> {
    let mut out = Vec::new();
    for pair in pairs {
        let a_first = scores_a
            .score(&pair.first)
            .ok_or_else(|| Error::MissingScore(pair.first.clone()))?;
        let a_second = scores_a
            .score(&pair.second)
            .ok_or_else(|| Error::MissingScore(pair.second.clone()))?;
        let b_first = scores_b
            .score(&pair.first)
            .ok_or_else(|| Error::MissingScore(pair.first.clone()))?;
        let b_second = scores_b
            .score(&pair.second)
            .ok_or_else(|| Error::MissingScore(pair.second.clone()))?;
        let order_a = a_first.partial_cmp(&a_second).expect("scores are finite");
        let order_b = b_first.partial_cmp(&b_second).expect("scores are finite");
        if order_a == order_b.reverse() && order_a != std::cmp::Ordering::Equal {
            out.push(pair.clone());
        }
    }
    Ok(out)
}
