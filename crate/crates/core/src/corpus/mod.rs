//! Domain model and ingestion for arguments, topics, and crowd annotations.
//!
//! The central type is [`AnnotationSet`]: a validated, canonically ordered
//! collection of binary quality/stance judgments over arguments. Everything
//! downstream (reliability, scoring, evaluation) consumes it read-only.
//! [`ScoredCorpus`] models the released dataset layout, where per-argument
//! continuous scores are already present and raw judgments may be absent.

pub mod io;
pub mod schema;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Identifiers and small enums
// ---------------------------------------------------------------------------

/// Opaque argument identifier, unique within a corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArgumentId(String);

impl ArgumentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ArgumentId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Opaque annotator identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnnotatorId(String);

impl AnnotatorId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AnnotatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AnnotatorId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Stance of an annotation (or a declared argument stance) toward its topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Pro,
    Con,
}

impl Stance {
    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Pro => "pro",
            Stance::Con => "con",
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stance resolved by majority vote over annotations.
///
/// Exact ties are a first-class value rather than an error: pair generation
/// must be able to exclude arguments whose stance could not be resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolvedStance {
    Pro,
    Con,
    Undetermined,
}

impl ResolvedStance {
    /// The stance as a plain pro/con value, if determined.
    pub fn stance(self) -> Option<Stance> {
        match self {
            ResolvedStance::Pro => Some(Stance::Pro),
            ResolvedStance::Con => Some(Stance::Con),
            ResolvedStance::Undetermined => None,
        }
    }
}

impl From<Stance> for ResolvedStance {
    fn from(s: Stance) -> Self {
        match s {
            Stance::Pro => ResolvedStance::Pro,
            Stance::Con => ResolvedStance::Con,
        }
    }
}

impl fmt::Display for ResolvedStance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResolvedStance::Pro => "pro",
            ResolvedStance::Con => "con",
            ResolvedStance::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// Dataset split labels used by the released corpus layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(Split::Train),
            "dev" | "validation" | "valid" => Some(Split::Dev),
            "test" => Some(Split::Test),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------------------
// Arguments and annotations
// ---------------------------------------------------------------------------

/// A collected argument. `declared_stance` is the stance the contributor was
/// asked to argue; `None` when unknown. `author` is optional contributor
/// metadata used only by corpus validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgumentId,
    pub text: String,
    pub topic: String,
    pub declared_stance: Option<Stance>,
    pub author: Option<String>,
}

/// One binary judgment of one argument by one annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotator_id: AnnotatorId,
    pub argument_id: ArgumentId,
    /// `true` = positive quality judgment.
    pub quality_label: bool,
    pub stance_label: Stance,
    pub is_test_question: bool,
    /// Present iff `is_test_question`.
    pub test_passed: Option<bool>,
}

impl AnnotationRecord {
    fn check(&self) -> Result<()> {
        if self.is_test_question != self.test_passed.is_some() {
            return Err(Error::Schema(format!(
                "record ({}, {}): test_passed must be present iff is_test_question",
                self.annotator_id, self.argument_id
            )));
        }
        Ok(())
    }
}

/// A validated set of annotations over a table of arguments.
///
/// Construction canonicalizes order (arguments by id, records by
/// `(argument_id, annotator_id)`), so equality and every downstream
/// computation are invariant under input permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    arguments: BTreeMap<ArgumentId, Argument>,
    records: Vec<AnnotationRecord>,
    #[serde(skip)]
    by_argument: BTreeMap<ArgumentId, Vec<usize>>,
}

impl AnnotationSet {
    /// Validates and canonicalizes. Rejects dangling argument references,
    /// duplicate argument ids, duplicate `(annotator, argument)` keys, and
    /// inconsistent test-question metadata.
    pub fn new(arguments: Vec<Argument>, mut records: Vec<AnnotationRecord>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for arg in arguments {
            if table.contains_key(&arg.id) {
                return Err(Error::DuplicateArgument(arg.id));
            }
            table.insert(arg.id.clone(), arg);
        }
        for rec in &records {
            rec.check()?;
            if !table.contains_key(&rec.argument_id) {
                return Err(Error::UnknownArgument(rec.argument_id.clone()));
            }
        }
        records.sort_by(|a, b| {
            (&a.argument_id, &a.annotator_id).cmp(&(&b.argument_id, &b.annotator_id))
        });
        for pair in records.windows(2) {
            if pair[0].argument_id == pair[1].argument_id
                && pair[0].annotator_id == pair[1].annotator_id
            {
                return Err(Error::DuplicateAnnotation {
                    annotator: pair[0].annotator_id.clone(),
                    argument: pair[0].argument_id.clone(),
                });
            }
        }
        let mut by_argument: BTreeMap<ArgumentId, Vec<usize>> = BTreeMap::new();
        for (idx, rec) in records.iter().enumerate() {
            by_argument
                .entry(rec.argument_id.clone())
                .or_default()
                .push(idx);
        }
        Ok(Self {
            arguments: table,
            records,
            by_argument,
        })
    }

    pub fn arguments(&self) -> impl Iterator<Item = &Argument> {
        self.arguments.values()
    }

    pub fn argument(&self, id: &ArgumentId) -> Option<&Argument> {
        self.arguments.get(id)
    }

    pub fn argument_ids(&self) -> impl Iterator<Item = &ArgumentId> {
        self.arguments.keys()
    }

    /// All records in canonical `(argument_id, annotator_id)` order.
    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    /// Records for one argument, in ascending annotator order.
    pub fn records_for(&self, id: &ArgumentId) -> impl Iterator<Item = &AnnotationRecord> {
        self.by_argument
            .get(id)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn annotation_count(&self, id: &ArgumentId) -> usize {
        self.by_argument.get(id).map_or(0, Vec::len)
    }

    /// Distinct annotators, ascending.
    pub fn annotators(&self) -> Vec<AnnotatorId> {
        let mut ids: Vec<AnnotatorId> = self
            .records
            .iter()
            .map(|r| r.annotator_id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn n_arguments(&self) -> usize {
        self.arguments.len()
    }

    pub fn n_records(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Rebuilds the set keeping only records that pass `keep`. The argument
    /// table is preserved, so arguments may be left with zero annotations;
    /// scoring skips such arguments.
    pub fn retain_records(&self, keep: impl Fn(&AnnotationRecord) -> bool) -> Self {
        let records: Vec<AnnotationRecord> =
            self.records.iter().filter(|r| keep(r)).cloned().collect();
        // Construction cannot fail: the inputs come from an already-valid set.
        Self::new(self.arguments.values().cloned().collect(), records)
            .expect("filtered subset of a valid set is valid")
    }
}

/// Modal stance over an argument's annotations plus the agreement fraction
/// (modal count / total votes). Exact ties resolve to `Undetermined`.
pub fn majority_stance(set: &AnnotationSet, id: &ArgumentId) -> Result<(ResolvedStance, f64)> {
    if set.argument(id).is_none() {
        return Err(Error::UnknownArgument(id.clone()));
    }
    let mut pro = 0usize;
    let mut con = 0usize;
    for rec in set.records_for(id) {
        match rec.stance_label {
            Stance::Pro => pro += 1,
            Stance::Con => con += 1,
        }
    }
    let total = pro + con;
    if total == 0 {
        return Err(Error::EmptyInput(format!(
            "argument '{id}' has no stance annotations"
        )));
    }
    let modal = pro.max(con);
    let stance = if pro > con {
        ResolvedStance::Pro
    } else if con > pro {
        ResolvedStance::Con
    } else {
        ResolvedStance::Undetermined
    };
    Ok((stance, modal as f64 / total as f64))
}

// ---------------------------------------------------------------------------
// Corpus validation
// ---------------------------------------------------------------------------

/// Collection-constraint thresholds. Defaults follow the reference
/// collection protocol: 35-210 characters per argument, at most 6 arguments
/// per author per topic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    pub min_chars: usize,
    pub max_chars: usize,
    pub max_arguments_per_author_per_topic: usize,
    pub min_annotations_per_argument: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            min_chars: 35,
            max_chars: 210,
            max_arguments_per_author_per_topic: 6,
            min_annotations_per_argument: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TextTooShort {
        argument: ArgumentId,
        length: usize,
        min: usize,
    },
    TextTooLong {
        argument: ArgumentId,
        length: usize,
        max: usize,
    },
    AuthorTopicCap {
        author: String,
        topic: String,
        count: usize,
        max: usize,
    },
    TooFewAnnotations {
        argument: ArgumentId,
        count: usize,
        min: usize,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Report-only check of collection constraints: text length bounds,
/// per-author per-topic caps (skipped for arguments without author
/// metadata), and annotation-count shortfalls.
pub fn validate_corpus(set: &AnnotationSet, config: &ValidationConfig) -> ValidationReport {
    let mut violations = Vec::new();
    let mut author_topic: BTreeMap<(&str, &str), usize> = BTreeMap::new();

    for arg in set.arguments() {
        let length = arg.text.chars().count();
        if length < config.min_chars {
            violations.push(Violation::TextTooShort {
                argument: arg.id.clone(),
                length,
                min: config.min_chars,
            });
        } else if length > config.max_chars {
            violations.push(Violation::TextTooLong {
                argument: arg.id.clone(),
                length,
                max: config.max_chars,
            });
        }
        if let Some(author) = &arg.author {
            *author_topic
                .entry((author.as_str(), arg.topic.as_str()))
                .or_default() += 1;
        }
        let count = set.annotation_count(&arg.id);
        if count < config.min_annotations_per_argument {
            violations.push(Violation::TooFewAnnotations {
                argument: arg.id.clone(),
                count,
                min: config.min_annotations_per_argument,
            });
        }
    }
    for ((author, topic), count) in author_topic {
        if count > config.max_arguments_per_author_per_topic {
            violations.push(Violation::AuthorTopicCap {
                author: author.to_string(),
                topic: topic.to_string(),
                count,
                max: config.max_arguments_per_author_per_topic,
            });
        }
    }
    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// Released (scored) corpus
// ---------------------------------------------------------------------------

/// One row of the released dataset layout: continuous scores already derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredArgument {
    pub id: ArgumentId,
    pub text: String,
    pub topic: String,
    pub split: Option<Split>,
    pub wa_score: f64,
    pub mace_p_score: f64,
    pub stance: ResolvedStance,
}

/// The released-dataset form of a corpus: per-argument WA and MACE-P scores
/// plus split and stance metadata, without raw judgments.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScoredCorpus {
    entries: BTreeMap<ArgumentId, ScoredArgument>,
}

impl ScoredCorpus {
    pub fn new(rows: Vec<ScoredArgument>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for row in rows {
            if !(0.0..=1.0).contains(&row.wa_score) || !(0.0..=1.0).contains(&row.mace_p_score) {
                return Err(Error::Schema(format!(
                    "argument '{}': scores must lie in [0,1]",
                    row.id
                )));
            }
            if entries.contains_key(&row.id) {
                return Err(Error::DuplicateArgument(row.id));
            }
            entries.insert(row.id.clone(), row);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, id: &ArgumentId) -> Option<&ScoredArgument> {
        self.entries.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoredArgument> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
