//! Synthetic ground truth: latent argument qualities, annotators with known
//! competences, binary annotations, and pairwise preference gold.
//!
//! The annotation channel mirrors the MACE generative form on purpose: an
//! annotator of competence theta reads the argument and answers positive
//! with probability equal to the (bias-adjusted) latent quality, and with
//! probability 1 - theta ignores it and answers positive at the spam base
//! rate. That gives recovery-style acceptance tests a well-specified target.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    AnnotationRecord, AnnotationSet, AnnotatorId, Argument, ArgumentId, Stance,
};
use crate::error::{Error, Result};
use crate::evaluation::{ArgumentPair, PairMember, PairwiseGold};

/// A one-dimensional sampling distribution over [0,1] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDistribution {
    Uniform { lo: f64, hi: f64 },
    PointMasses(Vec<WeightedValue>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedValue {
    pub value: f64,
    pub weight: f64,
}

impl ValueDistribution {
    pub fn point(value: f64) -> Self {
        ValueDistribution::PointMasses(vec![WeightedValue { value, weight: 1.0 }])
    }

    fn check(&self, name: &str) -> Result<()> {
        match self {
            ValueDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo > hi || *lo < 0.0 || *hi > 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "{name}: uniform bounds must satisfy 0 <= lo <= hi <= 1"
                    )));
                }
            }
            ValueDistribution::PointMasses(masses) => {
                if masses.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "{name}: point-mass list is empty"
                    )));
                }
                for m in masses {
                    if !(0.0..=1.0).contains(&m.value) || !(m.weight > 0.0) {
                        return Err(Error::InvalidConfig(format!(
                            "{name}: point masses need values in [0,1] and positive weights"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ValueDistribution::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ValueDistribution::PointMasses(masses) => {
                let total: f64 = masses.iter().map(|m| m.weight).sum();
                let mut u = rng.random::<f64>() * total;
                for m in masses {
                    u -= m.weight;
                    if u <= 0.0 {
                        return m.value;
                    }
                }
                masses.last().expect("non-empty").value
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ValueDistribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            ValueDistribution::PointMasses(masses) => {
                let total: f64 = masses.iter().map(|m| m.weight).sum();
                masses.iter().map(|m| m.value * m.weight).sum::<f64>() / total
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        match self {
            ValueDistribution::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            ValueDistribution::PointMasses(masses) => {
                let total: f64 = masses.iter().map(|m| m.weight).sum();
                masses
                    .iter()
                    .map(|m| m.weight * (m.value - mean) * (m.value - mean))
                    .sum::<f64>()
                    / total
            }
        }
    }

    /// Moments of clamp(X + bias, 0, 1), via midpoint quadrature for the
    /// uniform case; used for analytic expectations in tests and summaries.
    pub fn shifted_clamped_moments(&self, bias: f64) -> (f64, f64) {
        let clamp = |v: f64| (v + bias).clamp(0.0, 1.0);
        match self {
            ValueDistribution::PointMasses(masses) => {
                let total: f64 = masses.iter().map(|m| m.weight).sum();
                let mean = masses
                    .iter()
                    .map(|m| m.weight * clamp(m.value))
                    .sum::<f64>()
                    / total;
                let var = masses
                    .iter()
                    .map(|m| {
                        let c = clamp(m.value);
                        m.weight * (c - mean) * (c - mean)
                    })
                    .sum::<f64>()
                    / total;
                (mean, var)
            }
            ValueDistribution::Uniform { lo, hi } => {
                if hi == lo {
                    let c = clamp(*lo);
                    return (c, 0.0);
                }
                let steps = 100_000;
                let width = (hi - lo) / steps as f64;
                let mut mean = 0.0;
                for k in 0..steps {
                    mean += clamp(lo + (k as f64 + 0.5) * width);
                }
                mean /= steps as f64;
                let mut var = 0.0;
                for k in 0..steps {
                    let c = clamp(lo + (k as f64 + 0.5) * width);
                    var += (c - mean) * (c - mean);
                }
                var /= steps as f64;
                (mean, var)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_topics: usize,
    pub args_per_topic: usize,
    pub n_annotators: usize,
    pub annotations_per_argument: usize,
    pub competence: ValueDistribution,
    pub quality: ValueDistribution,
    /// Added to latent quality (then clamped to [0,1]) before it drives the
    /// positive-label probability; skews annotations positive.
    pub positivity_bias: f64,
    /// Probability a spammed annotation comes out positive.
    pub spam_base_rate: f64,
    /// Probability a stance label is flipped from the true stance.
    pub stance_noise: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        // Tuned so roughly 65% of annotations come out positive, echoing the
        // positive-skewed reference data.
        Self {
            n_topics: 20,
            args_per_topic: 25,
            n_annotators: 30,
            annotations_per_argument: 10,
            competence: ValueDistribution::Uniform { lo: 0.1, hi: 0.95 },
            quality: ValueDistribution::Uniform { lo: 0.0, hi: 1.0 },
            positivity_bias: 0.16,
            spam_base_rate: 0.65,
            stance_noise: 0.05,
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_topics == 0 || self.args_per_topic == 0 || self.n_annotators == 0 {
            return Err(Error::InvalidConfig(
                "simulation needs at least one topic, argument, and annotator".into(),
            ));
        }
        if self.annotations_per_argument == 0 {
            return Err(Error::InvalidConfig(
                "annotations_per_argument must be at least 1".into(),
            ));
        }
        if self.annotations_per_argument > self.n_annotators {
            return Err(Error::InvalidConfig(format!(
                "cannot assign {} annotators per argument out of {}",
                self.annotations_per_argument, self.n_annotators
            )));
        }
        self.competence.check("competence")?;
        self.quality.check("quality")?;
        for (name, p) in [
            ("spam_base_rate", self.spam_base_rate),
            ("stance_noise", self.stance_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0,1]")));
            }
        }
        if !self.positivity_bias.is_finite() {
            return Err(Error::InvalidConfig("positivity_bias must be finite".into()));
        }
        Ok(())
    }

    pub fn n_arguments(&self) -> usize {
        self.n_topics * self.args_per_topic
    }

    /// Analytic marginal positive-annotation rate:
    /// E[theta] E[q'] + (1 - E[theta]) b.
    pub fn expected_positive_rate(&self) -> f64 {
        let mean_theta = self.competence.mean();
        let (mean_quality, _) = self.quality.shifted_clamped_moments(self.positivity_bias);
        mean_theta * mean_quality + (1.0 - mean_theta) * self.spam_base_rate
    }
}

/// Ground truth behind one simulated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub qualities: BTreeMap<ArgumentId, f64>,
    pub stances: BTreeMap<ArgumentId, Stance>,
    pub competences: BTreeMap<AnnotatorId, f64>,
}

impl SimTruth {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let raw = std::fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&raw)?)
    }
}

fn argument_id(topic: usize, index: usize) -> ArgumentId {
    ArgumentId::new(format!("arg_{topic:03}_{index:04}"))
}

fn annotator_id(index: usize) -> AnnotatorId {
    AnnotatorId::new(format!("annotator_{index:04}"))
}

// Placeholder text with quality-independent length variation, so length
// bounds are exercised and a length-based predictor has variance to work
// with.
fn synthetic_text(id: &ArgumentId, topic: &str, stance: Stance, salt: usize) -> String {
    let mut text = format!(
        "{id}: a synthetic argument {} {topic}, long enough to clear the length floor.",
        match stance {
            Stance::Pro => "supporting",
            Stance::Con => "contesting",
        }
    );
    for _ in 0..(salt % 6) {
        text.push_str(" More filler detail.");
    }
    text
}

/// Draws a full corpus: latent qualities and stances per argument, annotator
/// competences, a balanced random annotator assignment, and binary labels
/// from the competence-gated channel. Bit-deterministic given the config.
pub fn simulate_corpus(config: &SimConfig) -> Result<(SimTruth, AnnotationSet)> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let competences: Vec<f64> = (0..config.n_annotators)
        .map(|_| config.competence.sample(&mut rng))
        .collect();

    let mut arguments = Vec::with_capacity(config.n_arguments());
    let mut qualities = BTreeMap::new();
    let mut stances = BTreeMap::new();
    for topic_idx in 0..config.n_topics {
        let topic = format!("topic_{topic_idx:03}");
        for arg_idx in 0..config.args_per_topic {
            let id = argument_id(topic_idx, arg_idx);
            let quality = config.quality.sample(&mut rng);
            let stance = if rng.random_bool(0.5) {
                Stance::Pro
            } else {
                Stance::Con
            };
            arguments.push(Argument {
                id: id.clone(),
                text: synthetic_text(&id, &topic, stance, topic_idx * 13 + arg_idx * 7),
                topic: topic.clone(),
                declared_stance: Some(stance),
                // At most 6 arguments per author per topic, matching the
                // collection cap the validator enforces.
                author: Some(format!("writer_{topic_idx:03}_{:02}", arg_idx / 6)),
            });
            qualities.insert(id.clone(), quality);
            stances.insert(id, stance);
        }
    }

    // Balanced assignment: every argument gets exactly k distinct
    // annotators, always the currently least-loaded ones with random
    // tie-breaking.
    let mut load = vec![0usize; config.n_annotators];
    let mut assignments: Vec<Vec<usize>> = Vec::with_capacity(arguments.len());
    for _ in &arguments {
        let mut candidates: Vec<(usize, u64, usize)> = (0..config.n_annotators)
            .map(|j| (load[j], rng.random::<u64>(), j))
            .collect();
        candidates.sort_unstable();
        let mut chosen: Vec<usize> = candidates
            .iter()
            .take(config.annotations_per_argument)
            .map(|&(_, _, j)| j)
            .collect();
        chosen.sort_unstable();
        for &j in &chosen {
            load[j] += 1;
        }
        assignments.push(chosen);
    }

    let mut records = Vec::with_capacity(arguments.len() * config.annotations_per_argument);
    for (argument, assigned) in arguments.iter().zip(&assignments) {
        let quality = qualities[&argument.id];
        let adjusted = (quality + config.positivity_bias).clamp(0.0, 1.0);
        let true_stance = stances[&argument.id];
        for &j in assigned {
            let theta = competences[j];
            let p_positive = theta * adjusted + (1.0 - theta) * config.spam_base_rate;
            let quality_label = rng.random_bool(p_positive);
            let stance_label = if rng.random_bool(config.stance_noise) {
                match true_stance {
                    Stance::Pro => Stance::Con,
                    Stance::Con => Stance::Pro,
                }
            } else {
                true_stance
            };
            records.push(AnnotationRecord {
                annotator_id: annotator_id(j),
                argument_id: argument.id.clone(),
                quality_label,
                stance_label,
                is_test_question: false,
                test_passed: None,
            });
        }
    }

    let truth = SimTruth {
        qualities,
        stances,
        competences: competences
            .iter()
            .enumerate()
            .map(|(j, &c)| (annotator_id(j), c))
            .collect(),
    };
    let set = AnnotationSet::new(arguments, records)?;
    Ok((truth, set))
}

/// Simulates the pairwise-annotation step: each of `judges_per_pair` judges
/// prefers the higher-latent-quality member with probability
/// 1 - pair_noise; the majority wins and the majority fraction is recorded
/// as agreement. Latent-equal pairs get fair-coin judges.
pub fn simulate_pairwise_gold(
    truth: &SimTruth,
    pairs: &[ArgumentPair],
    judges_per_pair: usize,
    pair_noise: f64,
    seed: u64,
) -> Result<PairwiseGold> {
    if judges_per_pair == 0 {
        return Err(Error::InvalidConfig(
            "judges_per_pair must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&pair_noise) {
        return Err(Error::InvalidConfig("pair_noise must lie in [0,1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gold = PairwiseGold::default();
    for pair in pairs {
        let q_first = *truth
            .qualities
            .get(&pair.first)
            .ok_or_else(|| Error::UnknownArgument(pair.first.clone()))?;
        let q_second = *truth
            .qualities
            .get(&pair.second)
            .ok_or_else(|| Error::UnknownArgument(pair.second.clone()))?;
        let p_first = if q_first > q_second {
            1.0 - pair_noise
        } else if q_second > q_first {
            pair_noise
        } else {
            0.5
        };
        let votes_first = (0..judges_per_pair)
            .filter(|_| rng.random_bool(p_first))
            .count();
        let votes_second = judges_per_pair - votes_first;
        let preferred = if votes_first > votes_second {
            PairMember::First
        } else if votes_second > votes_first {
            PairMember::Second
        } else if rng.random_bool(0.5) {
            PairMember::First
        } else {
            PairMember::Second
        };
        let agreement = votes_first.max(votes_second) as f64 / judges_per_pair as f64;
        gold.insert(pair.first.clone(), pair.second.clone(), preferred, agreement);
    }
    Ok(gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{validate_corpus, ValidationConfig};
    use crate::evaluation::generate_pairs;
    use crate::evaluation::pair_items_from_annotations;
    use crate::scoring::{score_corpus, AveragingMethod};
    use crate::stats;

    fn small_config() -> SimConfig {
        SimConfig {
            n_topics: 4,
            args_per_topic: 10,
            n_annotators: 8,
            annotations_per_argument: 5,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn determinism_bit_identical() {
        let config = small_config();
        let (truth_a, set_a) = simulate_corpus(&config).unwrap();
        let (truth_b, set_b) = simulate_corpus(&config).unwrap();
        assert_eq!(truth_a, truth_b);
        assert_eq!(set_a, set_b);
        let (_, set_c) = simulate_corpus(&SimConfig {
            seed: 12,
            ..config
        })
        .unwrap();
        assert_ne!(set_a, set_c);
    }

    #[test]
    fn infeasible_assignment_rejected() {
        let config = SimConfig {
            n_annotators: 10,
            annotations_per_argument: 11,
            ..Default::default()
        };
        assert!(matches!(
            simulate_corpus(&config),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn every_argument_gets_exact_annotation_count() {
        let config = small_config();
        let (_, set) = simulate_corpus(&config).unwrap();
        for id in set.argument_ids() {
            assert_eq!(set.annotation_count(id), config.annotations_per_argument);
        }
        // Balanced: loads differ by at most one.
        let mut counts: BTreeMap<AnnotatorId, usize> = BTreeMap::new();
        for rec in set.records() {
            *counts.entry(rec.annotator_id.clone()).or_default() += 1;
        }
        let min = counts.values().min().unwrap();
        let max = counts.values().max().unwrap();
        assert!(max - min <= 1, "loads {min}..{max}");
    }

    #[test]
    fn simulator_output_validates_cleanly() {
        let (_, set) = simulate_corpus(&SimConfig {
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let report = validate_corpus(&set, &ValidationConfig::default());
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn noiseless_channel_recovers_quality_exactly() {
        let config = SimConfig {
            competence: ValueDistribution::point(1.0),
            quality: ValueDistribution::PointMasses(vec![
                WeightedValue { value: 0.0, weight: 1.0 },
                WeightedValue { value: 1.0, weight: 1.0 },
            ]),
            positivity_bias: 0.0,
            seed: 5,
            ..small_config()
        };
        let (truth, set) = simulate_corpus(&config).unwrap();
        let scores = score_corpus(&set, None, &AveragingMethod::Simple).unwrap();
        for (id, entry) in &scores.entries {
            assert_eq!(entry.score, truth.qualities[id]);
        }
    }

    #[test]
    fn zero_competence_channel_carries_no_signal() {
        let config = SimConfig {
            n_topics: 20,
            args_per_topic: 25,
            competence: ValueDistribution::point(0.0),
            positivity_bias: 0.0,
            seed: 17,
            ..Default::default()
        };
        let (truth, set) = simulate_corpus(&config).unwrap();
        let scores = score_corpus(&set, None, &AveragingMethod::Simple).unwrap();
        let ids: Vec<ArgumentId> = scores.ids().cloned().collect();
        let predicted: Vec<f64> = ids.iter().map(|id| scores.score(id).unwrap()).collect();
        let latent: Vec<f64> = ids.iter().map(|id| truth.qualities[id]).collect();
        let r = stats::pearson(&predicted, &latent).unwrap();
        assert!(r.abs() < 0.1, "spurious correlation {r}");
        // Positive rate approaches the spam base rate.
        let positives = set.records().iter().filter(|r| r.quality_label).count();
        let rate = positives as f64 / set.n_records() as f64;
        assert!((rate - config.spam_base_rate).abs() < 0.03, "rate {rate}");
    }

    #[test]
    fn positive_rate_matches_analytic_expectation() {
        let config = SimConfig {
            n_topics: 25,
            args_per_topic: 20,
            seed: 23,
            ..Default::default()
        };
        let (_, set) = simulate_corpus(&config).unwrap();
        let positives = set.records().iter().filter(|r| r.quality_label).count();
        let rate = positives as f64 / set.n_records() as f64;
        let expected = config.expected_positive_rate();

        // Annotations sharing an argument are correlated through the latent
        // quality, and annotations by one annotator through the competence,
        // so the binomial standard error alone understates the spread.
        let n = set.n_records() as f64;
        let mean_theta = config.competence.mean();
        let var_theta = config.competence.variance();
        let (mean_q, var_q) = config
            .quality
            .shifted_clamped_moments(config.positivity_bias);
        let cluster_var = var_q * mean_theta * mean_theta / config.n_arguments() as f64
            + var_theta * (mean_q - config.spam_base_rate).powi(2) / config.n_annotators as f64
            + expected * (1.0 - expected) / n;
        let tolerance = 3.0 * cluster_var.sqrt();
        assert!(
            (rate - expected).abs() <= tolerance,
            "rate {rate} vs expected {expected} (tolerance {tolerance})"
        );
    }

    #[test]
    fn pairwise_gold_noiseless_matches_latent_order() {
        let (truth, set) = simulate_corpus(&small_config()).unwrap();
        let items = pair_items_from_annotations(&set);
        let pairs = generate_pairs(&items, None);
        let gold = simulate_pairwise_gold(&truth, &pairs, 7, 0.0, 99).unwrap();
        for pair in &pairs {
            let pref = gold.get(&pair.first, &pair.second).unwrap();
            let (q1, q2) = (truth.qualities[&pair.first], truth.qualities[&pair.second]);
            if q1 != q2 {
                assert_eq!(pref.agreement, 1.0);
                let expected = if q1 > q2 {
                    PairMember::First
                } else {
                    PairMember::Second
                };
                assert_eq!(pref.preferred, expected);
            }
        }
    }

    #[test]
    fn coin_flip_gold_matches_binomial_tail() {
        // With 7 fair judges, P(agreement < 0.7) = P(majority of 4-3)
        // = 2 * C(7,3) / 2^7 = 0.546875 exactly.
        let config = SimConfig {
            n_topics: 12,
            args_per_topic: 20,
            seed: 31,
            ..small_config()
        };
        let (truth, set) = simulate_corpus(&config).unwrap();
        let items = pair_items_from_annotations(&set);
        let pairs = generate_pairs(&items, None);
        assert!(pairs.len() > 800, "want many pairs, got {}", pairs.len());
        let gold = simulate_pairwise_gold(&truth, &pairs, 7, 0.5, 7).unwrap();
        let below = pairs
            .iter()
            .filter(|p| gold.get(&p.first, &p.second).unwrap().agreement < 0.7)
            .count();
        let fraction = below as f64 / pairs.len() as f64;
        let expected = 0.546875;
        let se = (expected * (1.0 - expected) / pairs.len() as f64).sqrt();
        assert!(
            (fraction - expected).abs() < 4.0 * se,
            "fraction {fraction}, expected {expected} +- {se}"
        );
    }

    #[test]
    fn latent_equal_pair_agreement_is_binomial_regardless_of_noise() {
        // Two arguments with identical latent quality: judges flip fair
        // coins whatever the noise setting, so agreement 4/7 (the modal
        // outcome) must appear with the binomial frequency.
        let mut qualities = BTreeMap::new();
        let mut stances = BTreeMap::new();
        let mut pairs = Vec::new();
        for i in 0..4000 {
            let a = ArgumentId::new(format!("eq_{i:05}_a"));
            let b = ArgumentId::new(format!("eq_{i:05}_b"));
            qualities.insert(a.clone(), 0.5);
            qualities.insert(b.clone(), 0.5);
            stances.insert(a.clone(), Stance::Pro);
            stances.insert(b.clone(), Stance::Pro);
            pairs.push(ArgumentPair {
                first: a,
                second: b,
                topic: "t".into(),
                stance: Stance::Pro,
            });
        }
        let truth = SimTruth {
            qualities,
            stances,
            competences: BTreeMap::new(),
        };
        let gold = simulate_pairwise_gold(&truth, &pairs, 7, 0.0, 13).unwrap();
        let close = pairs
            .iter()
            .filter(|p| {
                (gold.get(&p.first, &p.second).unwrap().agreement - 4.0 / 7.0).abs() < 1e-12
            })
            .count();
        let fraction = close as f64 / pairs.len() as f64;
        let expected = 0.546875;
        let se = (expected * (1.0 - expected) / pairs.len() as f64).sqrt();
        assert!(
            (fraction - expected).abs() < 4.0 * se,
            "fraction {fraction}, expected {expected}"
        );
    }
}
