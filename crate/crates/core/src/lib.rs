//! Continuous argument-quality scores from binary crowd annotations, plus
//! the statistical machinery to evaluate them.
//!
//! The pipeline mirrors a crowd annotation campaign: ingest binary
//! quality/stance judgments ([`corpus`]), remove annotators who fail hidden
//! test questions and score the rest by averaged pairwise kappa
//! ([`reliability`]), derive per-argument scores in [0,1] by simple
//! averaging, reliability-weighted averaging, or MACE posterior
//! probabilities ([`scoring`], [`mace`]), and evaluate scoring functions or
//! external ranking predictors with rank correlations, the Williams test,
//! delta-bin precision against pairwise gold, split-half consistency, and
//! cut-off percentile curves ([`stats`], [`evaluation`]). A seeded
//! [`simulator`] provides synthetic corpora with known ground truth, which
//! is what the aggregate-level test suites check recovery against.
//!
//! ```
//! use argrank::prelude::*;
//!
//! let config = SimConfig { n_topics: 4, args_per_topic: 8, seed: 1, ..Default::default() };
//! let (_truth, set) = simulate_corpus(&config).unwrap();
//! let (set, removed) = filter_by_test_questions(&set, 0.2);
//! assert!(removed.is_empty());
//! let table = compute_reliability(&set, &ReliabilityConfig { min_shared: 5, min_peers: 2 });
//! let scores = score_corpus(
//!     &set,
//!     Some(&table),
//!     &AveragingMethod::Weighted(WeightPolicy::default()),
//! )
//! .unwrap();
//! assert_eq!(scores.len(), 32);
//! ```

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod mace;
pub mod reliability;
pub mod scoring;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};

/// One-stop imports for pipeline code.
pub mod prelude {
    pub use crate::corpus::{
        majority_stance, validate_corpus, AnnotationRecord, AnnotationSet, AnnotatorId, Argument,
        ArgumentId, ResolvedStance, ScoredCorpus, Split, Stance, ValidationConfig,
        ValidationReport,
    };
    pub use crate::corpus::io::{load_annotations, load_scored_corpus, save_annotations};
    pub use crate::corpus::schema::{load_schema, AnnotationSchema, ScoredCorpusSchema};
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{
        compare_predictors, cutoff_correlations, delta_bin_evaluation, disagreement_pairs,
        evaluate_predictions, generate_pairs, pair_items_from_annotations,
        pair_items_from_scored, split_half_consistency, ArgumentPair, ConsistencyMethod,
        CutoffCurve, DeltaBinReport, EvaluationOutcome, PairItem, PairMember, PairwiseGold,
        PredictionSet, PredictorComparison, SplitHalfConfig,
    };
    pub use crate::mace::{mace_fit, mace_log_likelihood, mace_posteriors, MaceConfig, MaceModel};
    pub use crate::reliability::{
        cohen_kappa, compute_reliability, compute_reliability_for, filter_by_test_questions,
        task_stats, LabelKind, ReliabilityConfig, ReliabilityTable, TaskStats,
    };
    pub use crate::scoring::{
        score_corpus, simple_average, weighted_average, AveragingMethod, FallbackPolicy,
        QualityScores, ScoreMethod, WeightPolicy,
    };
    pub use crate::simulator::{
        simulate_corpus, simulate_pairwise_gold, SimConfig, SimTruth, ValueDistribution,
        WeightedValue,
    };
    pub use crate::stats::{
        correlations, pearson, rrse, spearman, williams_test, CorrelationResult, WilliamsResult,
    };
}
