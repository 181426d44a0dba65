//! Delta-bin agreement with pairwise gold: pairs are bucketed by the score
//! difference of their members, a fixed-size sample per bin is checked
//! against pairwise-preference gold, and per-bin precision is reported.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::pairs::ArgumentPair;
use crate::evaluation::{PairMember, PairwiseGold};
use crate::scoring::{QualityScores, ScoreMethod};

pub const DEFAULT_SAMPLE_PER_BIN: usize = 150;
pub const DEFAULT_AGREEMENT_THRESHOLD: f64 = 0.7;

/// The four delta bins partition [0,1], closed on the right:
/// [0, 0.25], (0.25, 0.5], (0.5, 0.75], (0.75, 1].
const BIN_LABELS: [&str; 4] = ["<=0.25", "(0.25,0.50]", "(0.50,0.75]", ">0.75"];

fn bin_index(delta: f64) -> usize {
    if delta <= 0.25 {
        0
    } else if delta <= 0.5 {
        1
    } else if delta <= 0.75 {
        2
    } else {
        3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBin {
    pub label: String,
    /// Pairs whose delta falls in this bin, before sampling.
    pub pair_count: usize,
    pub sampled: usize,
    /// Sampled pairs dropped for gold agreement below the threshold.
    pub filtered_out: usize,
    pub filtered_fraction: f64,
    /// Retained pairs with no score preference (exact tie); they carry no
    /// prediction, so they sit outside the precision denominator.
    pub tied: usize,
    /// Retained pairs with a strict score preference.
    pub decided: usize,
    pub correct: usize,
    /// correct / decided; absent when nothing was decided.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBinReport {
    pub method: ScoreMethod,
    pub bins: Vec<DeltaBin>,
    pub sample_per_bin: usize,
    pub agreement_threshold: f64,
    pub seed: u64,
}

/// Buckets `pairs` by score delta, samples up to `sample_per_bin` pairs per
/// bin (seeded, without replacement), filters the sample by gold agreement,
/// and scores precision as the fraction of decided pairs whose higher-scored
/// argument matches the gold preference.
pub fn delta_bin_evaluation(
    pairs: &[ArgumentPair],
    scores: &QualityScores,
    gold: &PairwiseGold,
    sample_per_bin: usize,
    agreement_threshold: f64,
    seed: u64,
) -> Result<DeltaBinReport> {
    if !(0.0..=1.0).contains(&agreement_threshold) {
        return Err(Error::InvalidConfig(
            "agreement threshold must lie in [0,1]".into(),
        ));
    }
    let mut bins: [Vec<usize>; 4] = Default::default();
    for (idx, pair) in pairs.iter().enumerate() {
        let delta = pair.score_delta(scores)?;
        bins[bin_index(delta)].push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(4);
    for (label, members) in BIN_LABELS.iter().zip(&bins) {
        let selected: Vec<usize> = if members.len() > sample_per_bin {
            let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), sample_per_bin)
                .into_iter()
                .map(|i| members[i])
                .collect();
            picks.sort_unstable();
            picks
        } else {
            members.clone()
        };

        let mut filtered_out = 0usize;
        let mut tied = 0usize;
        let mut decided = 0usize;
        let mut correct = 0usize;
        for &idx in &selected {
            let pair = &pairs[idx];
            let preference = gold.get(&pair.first, &pair.second).ok_or_else(|| {
                Error::MissingGold {
                    first: pair.first.clone(),
                    second: pair.second.clone(),
                }
            })?;
            if preference.agreement < agreement_threshold {
                filtered_out += 1;
                continue;
            }
            let score_first = scores.score(&pair.first).expect("delta already computed");
            let score_second = scores.score(&pair.second).expect("delta already computed");
            if score_first == score_second {
                tied += 1;
                continue;
            }
            decided += 1;
            let predicted = if score_first > score_second {
                PairMember::First
            } else {
                PairMember::Second
            };
            if predicted == preference.preferred {
                correct += 1;
            }
        }
        out.push(DeltaBin {
            label: (*label).to_string(),
            pair_count: members.len(),
            sampled: selected.len(),
            filtered_out,
            filtered_fraction: if selected.is_empty() {
                0.0
            } else {
                filtered_out as f64 / selected.len() as f64
            },
            tied,
            decided,
            correct,
            precision: if decided > 0 {
                Some(correct as f64 / decided as f64)
            } else {
                None
            },
        });
    }
    Ok(DeltaBinReport {
        method: scores.method,
        bins: out,
        sample_per_bin,
        agreement_threshold,
        seed,
    })
}
