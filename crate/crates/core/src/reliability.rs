//! Annotator quality control: test-question filtering and the Annotator-Rel
//! score, the mean of an annotator's pairwise Cohen's kappa with peers that
//! share enough common judgments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotationSet, AnnotatorId, ArgumentId, Stance};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_SHARED: usize = 50;
pub const DEFAULT_MIN_PEERS: usize = 5;
pub const DEFAULT_MAX_FAIL_RATE: f64 = 0.2;

/// Cohen's kappa for two aligned binary judgment sequences.
///
/// kappa = (p_o - p_e) / (1 - p_e), with chance agreement p_e taken from the
/// two annotators' own marginals. Two constant, identical sequences yield
/// exactly 1 by continuity (p_o = 1). A chance agreement of 1 with imperfect
/// observed agreement cannot arise from binary marginals, but is reported as
/// an undefined-kappa error rather than a NaN if it ever does.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("kappa requires at least one item".into()));
    }
    let n = a.len();
    let mut agree = 0usize;
    let mut a_pos = 0usize;
    let mut b_pos = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x == y {
            agree += 1;
        }
        a_pos += usize::from(x);
        b_pos += usize::from(y);
    }
    if agree == n {
        return Ok(1.0);
    }
    // Integer counts keep p_o and p_e exact for n^2 <= 2^53.
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let p_e = (a_pos * b_pos + (n - a_pos) * (n - b_pos)) as f64 / (nf * nf);
    if p_e >= 1.0 {
        return Err(Error::UndefinedKappa(
            "chance agreement is 1 with imperfect observed agreement".into(),
        ));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Which label stream to compute agreement over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Quality,
    Stance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReliabilityConfig {
    /// Minimum common judgments for a peer to count.
    pub min_shared: usize,
    /// Minimum qualifying peers for an annotator to receive a score.
    pub min_peers: usize,
}

impl Default for ReliabilityConfig {
    fn default() -> Self {
        Self {
            min_shared: DEFAULT_MIN_SHARED,
            min_peers: DEFAULT_MIN_PEERS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatorReliability {
    /// Mean pairwise kappa over qualifying peers; present iff `eligible`.
    pub annotator_rel: Option<f64>,
    pub eligible: bool,
    pub removed_by_test_questions: bool,
    /// Common-judgment counts with every peer sharing at least one item.
    pub shared_counts: BTreeMap<AnnotatorId, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReliabilityTable {
    pub entries: BTreeMap<AnnotatorId, AnnotatorReliability>,
    pub config: ReliabilityConfig,
    pub label_kind: LabelKind,
}

impl ReliabilityTable {
    pub fn get(&self, id: &AnnotatorId) -> Option<&AnnotatorReliability> {
        self.entries.get(id)
    }

    /// Mean of eligible annotator reliabilities; `None` when no annotator is
    /// eligible.
    pub fn task_average(&self) -> Option<f64> {
        let rels: Vec<f64> = self
            .entries
            .values()
            .filter_map(|e| e.annotator_rel)
            .collect();
        if rels.is_empty() {
            None
        } else {
            Some(rels.iter().sum::<f64>() / rels.len() as f64)
        }
    }

    /// Records annotators removed upstream by test-question filtering so the
    /// table covers the full annotator population.
    pub fn mark_removed(&mut self, removed: &[AnnotatorId]) {
        for id in removed {
            self.entries
                .entry(id.clone())
                .or_insert_with(|| AnnotatorReliability {
                    annotator_rel: None,
                    eligible: false,
                    removed_by_test_questions: true,
                    shared_counts: BTreeMap::new(),
                })
                .removed_by_test_questions = true;
        }
    }

    pub fn eligible_count(&self) -> usize {
        self.entries.values().filter(|e| e.eligible).count()
    }
}

/// Removes annotators whose test-question failure rate strictly exceeds
/// `max_fail_rate`, dropping *all* of their records. Annotators with no test
/// questions are retained. Returns the filtered set and the removed
/// annotators, ascending.
pub fn filter_by_test_questions(
    set: &AnnotationSet,
    max_fail_rate: f64,
) -> (AnnotationSet, Vec<AnnotatorId>) {
    let mut tested: BTreeMap<&AnnotatorId, (usize, usize)> = BTreeMap::new();
    for rec in set.records() {
        if rec.is_test_question {
            let entry = tested.entry(&rec.annotator_id).or_default();
            entry.0 += 1;
            if rec.test_passed == Some(false) {
                entry.1 += 1;
            }
        }
    }
    let removed: Vec<AnnotatorId> = tested
        .into_iter()
        .filter(|&(_, (total, failed))| failed as f64 / total as f64 > max_fail_rate)
        .map(|(id, _)| id.clone())
        .collect();
    let filtered = set.retain_records(|rec| !removed.contains(&rec.annotator_id));
    (filtered, removed)
}

fn label_of(rec: &crate::corpus::AnnotationRecord, kind: LabelKind) -> bool {
    match kind {
        LabelKind::Quality => rec.quality_label,
        LabelKind::Stance => rec.stance_label == Stance::Pro,
    }
}

/// Computes the reliability table over the requested label stream.
///
/// For every annotator pair sharing at least `min_shared` common judgments a
/// pairwise kappa is computed; an annotator with at least `min_peers` such
/// peers receives the mean as their score. Degenerate pairs with undefined
/// kappa are left out of the mean rather than poisoning it.
pub fn compute_reliability_for(
    set: &AnnotationSet,
    kind: LabelKind,
    config: &ReliabilityConfig,
) -> ReliabilityTable {
    let annotators = set.annotators();
    let mut labels: BTreeMap<&AnnotatorId, BTreeMap<&ArgumentId, bool>> = BTreeMap::new();
    for rec in set.records() {
        labels
            .entry(&rec.annotator_id)
            .or_default()
            .insert(&rec.argument_id, label_of(rec, kind));
    }

    let n = annotators.len();
    let mut shared: Vec<BTreeMap<AnnotatorId, usize>> = vec![BTreeMap::new(); n];
    let mut kappas: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];

    for i in 0..n {
        for j in (i + 1)..n {
            let map_i = &labels[&annotators[i]];
            let map_j = &labels[&annotators[j]];
            let mut seq_i = Vec::new();
            let mut seq_j = Vec::new();
            // Both maps iterate in ascending argument order, so the aligned
            // sequences are canonical.
            for (arg, &li) in map_i {
                if let Some(&lj) = map_j.get(arg) {
                    seq_i.push(li);
                    seq_j.push(lj);
                }
            }
            let count = seq_i.len();
            if count == 0 {
                continue;
            }
            shared[i].insert(annotators[j].clone(), count);
            shared[j].insert(annotators[i].clone(), count);
            if count >= config.min_shared {
                if let Ok(kappa) = cohen_kappa(&seq_i, &seq_j) {
                    kappas[i].insert(j, kappa);
                    kappas[j].insert(i, kappa);
                }
            }
        }
    }

    let mut entries = BTreeMap::new();
    for (i, id) in annotators.iter().enumerate() {
        let qualifying_peers = shared[i]
            .values()
            .filter(|&&count| count >= config.min_shared)
            .count();
        let pair_kappas: Vec<f64> = kappas[i].values().copied().collect();
        let eligible = qualifying_peers >= config.min_peers && !pair_kappas.is_empty();
        let annotator_rel = if eligible {
            Some(pair_kappas.iter().sum::<f64>() / pair_kappas.len() as f64)
        } else {
            None
        };
        entries.insert(
            id.clone(),
            AnnotatorReliability {
                annotator_rel,
                eligible,
                removed_by_test_questions: false,
                shared_counts: std::mem::take(&mut shared[i]),
            },
        );
    }
    ReliabilityTable {
        entries,
        config: config.clone(),
        label_kind: kind,
    }
}

/// Reliability over the quality labels, the table the weighted-average
/// scoring function consumes.
pub fn compute_reliability(set: &AnnotationSet, config: &ReliabilityConfig) -> ReliabilityTable {
    compute_reliability_for(set, LabelKind::Quality, config)
}

/// Task-level agreement summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskStats {
    /// Mean eligible Annotator-Rel over quality labels.
    pub task_average_kappa: Option<f64>,
    /// Same computation over stance labels.
    pub stance_average_kappa: Option<f64>,
    /// Fraction of the table's annotators removed by test questions.
    pub removed_annotator_fraction: f64,
}

/// Summarizes a reliability table, recomputing the stance-label counterpart
/// with the same thresholds.
pub fn task_stats(set: &AnnotationSet, table: &ReliabilityTable) -> TaskStats {
    let stance_table = compute_reliability_for(set, LabelKind::Stance, &table.config);
    let total = table.entries.len();
    let removed = table
        .entries
        .values()
        .filter(|e| e.removed_by_test_questions)
        .count();
    TaskStats {
        task_average_kappa: table.task_average(),
        stance_average_kappa: stance_table.task_average(),
        removed_annotator_fraction: if total == 0 {
            0.0
        } else {
            removed as f64 / total as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationRecord, Argument};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn kappa_hand_examples() {
        // p_o = 0.5, p_e = 0.5
        let a = [true, true, false, false];
        let b = [true, false, false, true];
        assert_eq!(cohen_kappa(&a, &b).unwrap(), 0.0);
        // perfect agreement
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        // p_o = 0, p_e = 0.5
        let c = [true, false, true, false];
        let d = [false, true, false, true];
        assert_eq!(cohen_kappa(&c, &d).unwrap(), -1.0);
    }

    #[test]
    fn kappa_constant_identical_is_one() {
        let a = [true; 8];
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn kappa_one_constant_annotator_is_zero() {
        let a = [true; 6];
        let b = [true, false, true, true, false, true];
        assert_eq!(cohen_kappa(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn kappa_rejects_mismatched_or_empty() {
        assert!(matches!(
            cohen_kappa(&[true], &[true, false]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(cohen_kappa(&[], &[]), Err(Error::EmptyInput(_))));
    }

    proptest! {
        #[test]
        fn kappa_symmetric_and_swap_invariant(
            pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40)
        ) {
            let a: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let ab = cohen_kappa(&a, &b).unwrap();
            let ba = cohen_kappa(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            let a_swapped: Vec<bool> = a.iter().map(|&x| !x).collect();
            let b_swapped: Vec<bool> = b.iter().map(|&x| !x).collect();
            let swapped = cohen_kappa(&a_swapped, &b_swapped).unwrap();
            prop_assert_eq!(ab, swapped);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }

    // --- fixture builders ------------------------------------------------

    fn arg(id: &str) -> Argument {
        Argument {
            id: id.into(),
            text: format!("{id}: synthetic argument body long enough for checks"),
            topic: "t".into(),
            declared_stance: None,
            author: None,
        }
    }

    fn quality_rec(annotator: &str, argument: &str, label: bool) -> AnnotationRecord {
        AnnotationRecord {
            annotator_id: annotator.into(),
            argument_id: argument.into(),
            quality_label: label,
            stance_label: Stance::Pro,
            is_test_question: false,
            test_passed: None,
        }
    }

    fn test_rec(annotator: &str, argument: &str, passed: bool) -> AnnotationRecord {
        AnnotationRecord {
            annotator_id: annotator.into(),
            argument_id: argument.into(),
            quality_label: true,
            stance_label: Stance::Pro,
            is_test_question: true,
            test_passed: Some(passed),
        }
    }

    /// Set where annotators label arguments per a truth table:
    /// `labels[annotator][argument]` with `None` = not annotated.
    fn grid_set(labels: &[(&str, Vec<Option<bool>>)]) -> AnnotationSet {
        let n_args = labels[0].1.len();
        let args: Vec<Argument> = (0..n_args).map(|i| arg(&format!("a{i:03}"))).collect();
        let mut records = Vec::new();
        for (annotator, row) in labels {
            for (i, label) in row.iter().enumerate() {
                if let Some(l) = label {
                    records.push(quality_rec(annotator, &format!("a{i:03}"), *l));
                }
            }
        }
        AnnotationSet::new(args, records).unwrap()
    }

    #[test]
    fn test_question_filter_thresholds() {
        let mut records = Vec::new();
        // u1 fails 3/10 -> removed, u2 fails 2/10 -> retained,
        // u3 has no test questions -> retained.
        for i in 0..10 {
            records.push(test_rec("u1", &format!("a{i:03}"), i >= 3));
            records.push(test_rec("u2", &format!("a{i:03}"), i >= 2));
            records.push(quality_rec("u3", &format!("a{i:03}"), true));
        }
        // u1 also has ordinary records that must disappear with them.
        records.push(quality_rec("u1", "a010", true));
        let args: Vec<Argument> = (0..11).map(|i| arg(&format!("a{i:03}"))).collect();
        let set = AnnotationSet::new(args, records).unwrap();

        let (filtered, removed) = filter_by_test_questions(&set, DEFAULT_MAX_FAIL_RATE);
        assert_eq!(removed, vec![AnnotatorId::new("u1")]);
        assert!(filtered
            .records()
            .iter()
            .all(|r| r.annotator_id.as_str() != "u1"));
        assert_eq!(filtered.annotators().len(), 2);
    }

    #[test]
    fn test_question_filter_vacuous_without_tests() {
        let set = grid_set(&[
            ("u1", vec![Some(true), Some(false)]),
            ("u2", vec![Some(true), Some(true)]),
        ]);
        let (filtered, removed) = filter_by_test_questions(&set, 0.2);
        assert!(removed.is_empty());
        assert_eq!(filtered, set);
    }

    #[test]
    fn reliability_peer_threshold() {
        // u0 shares 60 judgments with each of 4 peers only -> ineligible
        // under min_peers = 5.
        let n = 60;
        let truth: Vec<Option<bool>> = (0..n).map(|i| Some(i % 2 == 0)).collect();
        let rows: Vec<(&str, Vec<Option<bool>>)> = vec![
            ("u0", truth.clone()),
            ("u1", truth.clone()),
            ("u2", truth.clone()),
            ("u3", truth.clone()),
            ("u4", truth.clone()),
        ];
        let set = grid_set(&rows);
        let table = compute_reliability(
            &set,
            &ReliabilityConfig {
                min_shared: 50,
                min_peers: 5,
            },
        );
        let entry = table.get(&"u0".into()).unwrap();
        assert!(!entry.eligible);
        assert!(entry.annotator_rel.is_none());
        assert_eq!(entry.shared_counts.len(), 4);
    }

    #[test]
    fn reliability_mean_of_pairwise_kappas() {
        // Against u0: u1 agrees on 6/10 with balanced marginals -> kappa 0.2;
        // u2 agrees on 5/10 with balanced marginals -> kappa 0.0.
        let u0: Vec<Option<bool>> = [true, true, true, true, true, false, false, false, false, false]
            .iter()
            .map(|&b| Some(b))
            .collect();
        let u1: Vec<Option<bool>> = [true, true, true, false, false, true, false, false, false, true]
            .iter()
            .map(|&b| Some(b))
            .collect();
        let u2: Vec<Option<bool>> = [true, true, true, false, false, false, false, true, true, true]
            .iter()
            .map(|&b| Some(b))
            .collect();
        let set = grid_set(&[("u0", u0), ("u1", u1), ("u2", u2)]);
        let config = ReliabilityConfig {
            min_shared: 10,
            min_peers: 2,
        };
        let table = compute_reliability(&set, &config);
        let entry = table.get(&"u0".into()).unwrap();
        assert!(entry.eligible);
        assert_abs_diff_eq!(entry.annotator_rel.unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn reliability_perfect_agreement() {
        let truth: Vec<Option<bool>> = (0..12).map(|i| Some(i % 3 == 0)).collect();
        let set = grid_set(&[
            ("u0", truth.clone()),
            ("u1", truth.clone()),
            ("u2", truth.clone()),
        ]);
        let config = ReliabilityConfig {
            min_shared: 10,
            min_peers: 2,
        };
        let table = compute_reliability(&set, &config);
        for entry in table.entries.values() {
            assert_eq!(entry.annotator_rel, Some(1.0));
        }
        assert_eq!(table.task_average(), Some(1.0));
    }

    #[test]
    fn reliability_empty_set() {
        let set = AnnotationSet::new(vec![], vec![]).unwrap();
        let table = compute_reliability(&set, &ReliabilityConfig::default());
        assert!(table.entries.is_empty());
        assert!(table.task_average().is_none());
    }

    #[test]
    fn reliability_invariant_under_reordering() {
        let u0: Vec<Option<bool>> = (0..20).map(|i| Some(i % 2 == 0)).collect();
        let u1: Vec<Option<bool>> = (0..20).map(|i| Some(i % 3 == 0)).collect();
        let set = grid_set(&[("u0", u0.clone()), ("u1", u1.clone())]);
        let set_reversed = {
            let args: Vec<Argument> = set.arguments().cloned().collect();
            let mut records: Vec<AnnotationRecord> = set.records().to_vec();
            records.reverse();
            AnnotationSet::new(args, records).unwrap()
        };
        let config = ReliabilityConfig {
            min_shared: 10,
            min_peers: 1,
        };
        let t1 = compute_reliability(&set, &config);
        let t2 = compute_reliability(&set_reversed, &config);
        for (id, e1) in &t1.entries {
            assert_eq!(e1.annotator_rel, t2.get(id).unwrap().annotator_rel);
        }
    }

    #[test]
    fn task_stats_mean_and_removed_fraction() {
        // Two annotators agreeing at kappa 0.2 and a third independent pair
        // is overkill; instead check the arithmetic directly on a table.
        let u0: Vec<Option<bool>> = [true, true, true, true, true, false, false, false, false, false]
            .iter()
            .map(|&b| Some(b))
            .collect();
        let u1: Vec<Option<bool>> = [true, true, true, false, false, true, false, false, false, true]
            .iter()
            .map(|&b| Some(b))
            .collect();
        let set = grid_set(&[("u0", u0), ("u1", u1)]);
        let config = ReliabilityConfig {
            min_shared: 10,
            min_peers: 1,
        };
        let mut table = compute_reliability(&set, &config);
        table.mark_removed(&["ghost".into()]);
        let stats = task_stats(&set, &table);
        assert_abs_diff_eq!(stats.task_average_kappa.unwrap(), 0.2, epsilon = 1e-12);
        // Stance labels in these fixtures are constant pro -> kappa 1.
        assert_eq!(stats.stance_average_kappa, Some(1.0));
        assert_abs_diff_eq!(stats.removed_annotator_fraction, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn task_stats_absent_when_no_one_eligible() {
        let set = grid_set(&[("u0", vec![Some(true)]), ("u1", vec![Some(false)])]);
        let table = compute_reliability(&set, &ReliabilityConfig::default());
        let stats = task_stats(&set, &table);
        assert!(stats.task_average_kappa.is_none());
        assert!(stats.stance_average_kappa.is_none());
    }
}
