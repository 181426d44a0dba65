//! From-scratch MACE: an unsupervised item-response generative model over
//! binary annotations, fit by EM with random restarts.
//!
//! Each item i carries a latent true label T_i with a uniform prior. For an
//! annotation of item i by annotator j, a spam coin S is drawn with
//! P(S = 0) = theta_j (the annotator's competence); the annotation copies
//! T_i when S = 0 and otherwise draws from the annotator's spam strategy
//! xi_j, a distribution over the two labels. The per-item posterior
//! P(T_i = 1 | annotations) is the MACE-P quality score.
//!
//! The label space is binary by construction (`quality_label: bool`), so the
//! non-binary-input error of a generic MACE lives at the parsing layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotationSet, AnnotatorId, ArgumentId};
use crate::error::{Error, Result};
use crate::scoring::{QualityScores, ScoreEntry, ScoreMethod};

// Keeps theta away from exact 0/1 so no item can reach zero marginal
// likelihood under both labels.
const THETA_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaceConfig {
    /// EM iterations per restart.
    pub iterations: usize,
    /// Independent restarts; the best final log-likelihood wins.
    pub restarts: usize,
    /// Added to expected counts in the M-step.
    pub smoothing_delta: f64,
    /// Stop a restart when the relative log-likelihood change drops below
    /// this.
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for MaceConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            restarts: 10,
            smoothing_delta: 0.1,
            convergence_tol: 1e-6,
            seed: 42,
        }
    }
}

impl MaceConfig {
    fn check(&self) -> Result<()> {
        if self.iterations < 1 || self.restarts < 1 {
            return Err(Error::InvalidConfig(
                "mace requires iterations >= 1 and restarts >= 1".into(),
            ));
        }
        if !(self.smoothing_delta >= 0.0) || !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "mace requires smoothing_delta >= 0 and convergence_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A fitted MACE model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaceModel {
    /// Items in ascending argument-id order; parallel to `posteriors`.
    pub item_ids: Vec<ArgumentId>,
    /// Annotators ascending; parallel to `competence` and `spam_strategy`.
    pub annotator_ids: Vec<AnnotatorId>,
    /// P(T_i = 1 | annotations) per item.
    pub posteriors: Vec<f64>,
    /// theta_j per annotator.
    pub competence: Vec<f64>,
    /// xi_j = [P(label 0 | spam), P(label 1 | spam)] per annotator.
    pub spam_strategy: Vec<[f64; 2]>,
    /// Annotations per item.
    pub item_support: Vec<usize>,
    /// Marginal log-likelihood at the returned parameters.
    pub log_likelihood: f64,
    /// Log-likelihood after each EM update of the winning restart; the last
    /// entry equals `log_likelihood`.
    pub log_likelihood_trace: Vec<f64>,
    pub best_restart: usize,
    pub config: MaceConfig,
}

impl MaceModel {
    pub fn posterior(&self, id: &ArgumentId) -> Option<f64> {
        self.item_ids
            .binary_search(id)
            .ok()
            .map(|i| self.posteriors[i])
    }

    pub fn competence_of(&self, id: &AnnotatorId) -> Option<f64> {
        self.annotator_ids
            .binary_search(id)
            .ok()
            .map(|i| self.competence[i])
    }
}

/// Annotations indexed for the EM loops: per item, the (annotator index,
/// label) list in ascending annotator order.
struct Compact {
    items: Vec<Vec<(u32, bool)>>,
    n_annotators: usize,
    empirical_positive: f64,
}

fn compact(set: &AnnotationSet) -> Result<(Compact, Vec<ArgumentId>, Vec<AnnotatorId>)> {
    if set.is_empty() {
        return Err(Error::EmptyInput("cannot fit MACE on an empty set".into()));
    }
    let annotator_ids = set.annotators();
    let annotator_index: std::collections::BTreeMap<&AnnotatorId, u32> = annotator_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id, i as u32))
        .collect();
    let item_ids: Vec<ArgumentId> = set
        .argument_ids()
        .filter(|id| set.annotation_count(id) > 0)
        .cloned()
        .collect();
    let mut items = Vec::with_capacity(item_ids.len());
    let mut positives = 0usize;
    let mut total = 0usize;
    for id in &item_ids {
        let mut annotations: Vec<(u32, bool)> = set
            .records_for(id)
            .map(|r| (annotator_index[&r.annotator_id], r.quality_label))
            .collect();
        annotations.sort_unstable();
        positives += annotations.iter().filter(|(_, l)| *l).count();
        total += annotations.len();
        items.push(annotations);
    }
    Ok((
        Compact {
            items,
            n_annotators: annotator_ids.len(),
            empirical_positive: positives as f64 / total as f64,
        },
        item_ids,
        annotator_ids,
    ))
}

/// P(annotation = label | T = t) for one annotator.
#[inline]
fn emission(label: bool, t: bool, theta: f64, xi: &[f64; 2]) -> f64 {
    let copy = if label == t { theta } else { 0.0 };
    copy + (1.0 - theta) * xi[usize::from(label)]
}

struct EStep {
    log_likelihood: f64,
    posteriors: Vec<f64>,
    knowing: Vec<f64>,
    spam: Vec<[f64; 2]>,
}

fn e_step(data: &Compact, theta: &[f64], xi: &[[f64; 2]]) -> EStep {
    let mut log_likelihood = 0.0;
    let mut posteriors = Vec::with_capacity(data.items.len());
    let mut knowing = vec![0.0; data.n_annotators];
    let mut spam = vec![[0.0, 0.0]; data.n_annotators];

    for annotations in &data.items {
        let mut prod0 = 0.5;
        let mut prod1 = 0.5;
        for &(j, label) in annotations {
            let j = j as usize;
            prod0 *= emission(label, false, theta[j], &xi[j]);
            prod1 *= emission(label, true, theta[j], &xi[j]);
        }
        let marginal = prod0 + prod1;
        log_likelihood += marginal.ln();
        let r1 = prod1 / marginal;
        let r0 = prod0 / marginal;
        posteriors.push(r1);

        for &(j, label) in annotations {
            let j = j as usize;
            for (t, weight) in [(false, r0), (true, r1)] {
                let copy = if label == t { theta[j] } else { 0.0 };
                let spam_mass = (1.0 - theta[j]) * xi[j][usize::from(label)];
                let denom = copy + spam_mass;
                if denom > 0.0 {
                    knowing[j] += weight * copy / denom;
                    spam[j][usize::from(label)] += weight * spam_mass / denom;
                }
            }
        }
    }
    EStep {
        log_likelihood,
        posteriors,
        knowing,
        spam,
    }
}

fn m_step(theta: &mut [f64], xi: &mut [[f64; 2]], step: &EStep, delta: f64) {
    for j in 0..theta.len() {
        let knowing = step.knowing[j];
        let spam_total = step.spam[j][0] + step.spam[j][1];
        let denom = knowing + spam_total + 2.0 * delta;
        if denom > 0.0 {
            theta[j] = ((knowing + delta) / denom).clamp(THETA_GUARD, 1.0 - THETA_GUARD);
        }
        let xi_denom = spam_total + 2.0 * delta;
        if xi_denom > 0.0 {
            xi[j] = [
                (step.spam[j][0] + delta) / xi_denom,
                (step.spam[j][1] + delta) / xi_denom,
            ];
        }
        // xi_denom == 0 (possible only with delta = 0 and no expected spam)
        // leaves xi unchanged; any strategy is optimal then.
    }
}

struct RestartOutcome {
    log_likelihood: f64,
    trace: Vec<f64>,
    posteriors: Vec<f64>,
    theta: Vec<f64>,
    xi: Vec<[f64; 2]>,
}

fn run_restart(data: &Compact, config: &MaceConfig, restart: u64) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart);
    // Competence starts in the honest half so restarts favor the
    // non-label-flipped optimum; the spam strategy starts at the empirical
    // label distribution, which is label-swap symmetric.
    let mut theta: Vec<f64> = (0..data.n_annotators)
        .map(|_| 0.5 + 0.5 * rng.random::<f64>())
        .collect();
    let mut xi =
        vec![[1.0 - data.empirical_positive, data.empirical_positive]; data.n_annotators];

    let mut trace = Vec::with_capacity(config.iterations + 1);
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..config.iterations {
        let step = e_step(data, &theta, &xi);
        trace.push(step.log_likelihood);
        if prev.is_finite() {
            let relative_change = ((step.log_likelihood - prev) / prev).abs();
            if relative_change < config.convergence_tol {
                break;
            }
        }
        m_step(&mut theta, &mut xi, &step, config.smoothing_delta);
        prev = step.log_likelihood;
    }
    let final_step = e_step(data, &theta, &xi);
    trace.push(final_step.log_likelihood);
    RestartOutcome {
        log_likelihood: final_step.log_likelihood,
        trace,
        posteriors: final_step.posteriors,
        theta,
        xi,
    }
}

/// Fits the model by EM with `config.restarts` independent restarts and
/// returns the restart with the best final log-likelihood. Deterministic
/// given the seed: restart r draws from stream r of a counter RNG.
pub fn mace_fit(set: &AnnotationSet, config: &MaceConfig) -> Result<MaceModel> {
    config.check()?;
    let (data, item_ids, annotator_ids) = compact(set)?;

    let mut best: Option<(usize, RestartOutcome)> = None;
    for restart in 0..config.restarts {
        let outcome = run_restart(&data, config, restart as u64);
        let better = match &best {
            None => true,
            Some((_, current)) => outcome.log_likelihood > current.log_likelihood,
        };
        if better {
            best = Some((restart, outcome));
        }
    }
    let (best_restart, outcome) = best.expect("restarts >= 1");
    let item_support = data.items.iter().map(Vec::len).collect();
    Ok(MaceModel {
        item_ids,
        annotator_ids,
        posteriors: outcome.posteriors,
        competence: outcome.theta,
        spam_strategy: outcome.xi,
        item_support,
        log_likelihood: outcome.log_likelihood,
        log_likelihood_trace: outcome.trace,
        best_restart,
        config: *config,
    })
}

/// Projects the per-item positive-label posteriors into a score set
/// (method = MACE-P).
pub fn mace_posteriors(model: &MaceModel) -> QualityScores {
    let mut scores = QualityScores::new(ScoreMethod::MaceP);
    for ((id, &posterior), &support) in model
        .item_ids
        .iter()
        .zip(&model.posteriors)
        .zip(&model.item_support)
    {
        scores.entries.insert(
            id.clone(),
            ScoreEntry {
                score: posterior,
                support: Some(support),
            },
        );
    }
    scores
}

/// Marginal log-likelihood of `set` under the model's parameters, summing
/// out true labels and spam indicators.
pub fn mace_log_likelihood(set: &AnnotationSet, model: &MaceModel) -> Result<f64> {
    let (data, item_ids, annotator_ids) = compact(set)?;
    if item_ids != model.item_ids || annotator_ids != model.annotator_ids {
        return Err(Error::DimensionMismatch(
            "annotation set does not match the model's items and annotators".into(),
        ));
    }
    Ok(e_step(&data, &model.competence, &model.spam_strategy).log_likelihood)
}
