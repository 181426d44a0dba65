//! The experimental protocols: pair generation, disagreement pairs,
//! delta-bin precision against pairwise gold, split-half consistency,
//! external-predictor evaluation, cut-off percentile curves, and predictor
//! comparison via the Williams test.

mod bins;
mod consistency;
mod pairs;
mod predictions;

pub use bins::{
    delta_bin_evaluation, DeltaBin, DeltaBinReport, DEFAULT_AGREEMENT_THRESHOLD,
    DEFAULT_SAMPLE_PER_BIN,
};
pub use consistency::{split_half_consistency, ConsistencyMethod, SplitHalfConfig};
pub use pairs::{
    disagreement_pairs, generate_pairs, pair_items_from_annotations, pair_items_from_scored,
    ArgumentPair, PairItem,
};
pub use predictions::{
    compare_predictors, cutoff_correlations, evaluate_predictions, CutoffCurve, CutoffPoint,
    EvaluationOutcome, PredictionSet, PredictorComparison, WilliamsCase,
    DEFAULT_CUTOFF_PERCENTILES,
};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ArgumentId;
use crate::error::{Error, Result};

/// Which member of an (ordered) argument pair is preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMember {
    First,
    Second,
}

impl PairMember {
    pub fn flip(self) -> Self {
        match self {
            PairMember::First => PairMember::Second,
            PairMember::Second => PairMember::First,
        }
    }
}

/// Majority preference over one pair plus the annotator agreement fraction,
/// which is always at least 0.5 by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldPreference {
    pub preferred: PairMember,
    pub agreement: f64,
}

/// Pairwise preference gold, keyed by unordered argument pairs. Lookups
/// reorient the preference to the queried order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairwiseGold {
    entries: BTreeMap<(ArgumentId, ArgumentId), GoldPreference>,
}

impl PairwiseGold {
    pub fn insert(
        &mut self,
        first: ArgumentId,
        second: ArgumentId,
        preferred: PairMember,
        agreement: f64,
    ) {
        if first <= second {
            self.entries
                .insert((first, second), GoldPreference { preferred, agreement });
        } else {
            self.entries.insert(
                (second, first),
                GoldPreference {
                    preferred: preferred.flip(),
                    agreement,
                },
            );
        }
    }

    pub fn get(&self, first: &ArgumentId, second: &ArgumentId) -> Option<GoldPreference> {
        if first <= second {
            self.entries.get(&(first.clone(), second.clone())).copied()
        } else {
            self.entries
                .get(&(second.clone(), first.clone()))
                .map(|g| GoldPreference {
                    preferred: g.preferred.flip(),
                    agreement: g.agreement,
                })
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ArgumentId, ArgumentId), &GoldPreference)> {
        self.entries.iter()
    }

    /// Writes `first_id,second_id,preferred,agreement`.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(["first_id", "second_id", "preferred", "agreement"])?;
        for ((first, second), gold) in &self.entries {
            writer.write_record([
                first.as_str(),
                second.as_str(),
                match gold.preferred {
                    PairMember::First => "first",
                    PairMember::Second => "second",
                },
                &format!("{}", gold.agreement),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path.as_ref())?;
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("required column '{name}' not found")))
        };
        let first_idx = col("first_id")?;
        let second_idx = col("second_id")?;
        let pref_idx = col("preferred")?;
        let agree_idx = col("agreement")?;
        let mut gold = PairwiseGold::default();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record?;
            let get = |idx: usize| record.get(idx).unwrap_or("");
            let preferred = match get(pref_idx).trim().to_ascii_lowercase().as_str() {
                "first" => PairMember::First,
                "second" => PairMember::Second,
                other => {
                    return Err(Error::Row {
                        row,
                        message: format!("preferred must be 'first' or 'second', got '{other}'"),
                    })
                }
            };
            let agreement: f64 = get(agree_idx).trim().parse().map_err(|_| Error::Row {
                row,
                message: format!("agreement is not a number: '{}'", get(agree_idx)),
            })?;
            if !(0.5..=1.0).contains(&agreement) {
                return Err(Error::Row {
                    row,
                    message: format!("agreement must lie in [0.5,1], got {agreement}"),
                });
            }
            gold.insert(
                ArgumentId::new(get(first_idx)),
                ArgumentId::new(get(second_idx)),
                preferred,
                agreement,
            );
        }
        Ok(gold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gold_lookup_reorients() {
        let mut gold = PairwiseGold::default();
        gold.insert("b".into(), "a".into(), PairMember::First, 0.8);
        // Stored normalized: (a, b) with preferred = second.
        let forward = gold.get(&"a".into(), &"b".into()).unwrap();
        assert_eq!(forward.preferred, PairMember::Second);
        let backward = gold.get(&"b".into(), &"a".into()).unwrap();
        assert_eq!(backward.preferred, PairMember::First);
        assert_eq!(backward.agreement, 0.8);
    }

    #[test]
    fn gold_csv_round_trip() {
        let mut gold = PairwiseGold::default();
        gold.insert("a".into(), "b".into(), PairMember::First, 1.0);
        gold.insert("c".into(), "d".into(), PairMember::Second, 6.0 / 7.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gold.csv");
        gold.save_csv(&path).unwrap();
        let loaded = PairwiseGold::load_csv(&path).unwrap();
        assert_eq!(gold, loaded);
    }
}
