//! The weak-learner interface.
//!
//! A γ-weak learner is queried with a distribution over domain points and
//! must return a hypothesis whose weighted error is at most `1/2 - γ`.

use std::sync::Arc;

use crate::domain::{weighted_error_unchecked, Concept, Hypothesis, WeightVector};
use crate::error::{LabError, Result};
use crate::ledger::QueryLedger;

/// Slack allowed when checking `error <= 1/2 - γ` in floating point.
pub const CONTRACT_TOLERANCE: f64 = 1e-12;

pub trait WeakLearner: Send + Sync {
    /// The advantage γ this learner promises.
    fn advantage(&self) -> f64;

    fn domain_size(&self) -> usize;

    /// Answers one query. Implementations that cannot meet the contract
    /// return [`LabError::WeakLearnerContractViolation`].
    fn query(&self, dist: &WeightVector) -> Result<Arc<Hypothesis>>;
}

/// Issues `dist` to `oracle` and logs the exchange in `round` of `ledger`.
pub fn weak_learner_query(
    oracle: &dyn WeakLearner,
    dist: &WeightVector,
    ledger: &mut QueryLedger,
    round: usize,
) -> Result<Arc<Hypothesis>> {
    ledger.check_round(round)?;
    if let Some(max) = dist.max_index() {
        if max >= oracle.domain_size() {
            return Err(LabError::invalid(format!(
                "query index {max} outside oracle domain of size {}",
                oracle.domain_size()
            )));
        }
    }
    let h = oracle.query(dist)?;
    ledger.record(round, dist.clone(), &h)?;
    Ok(h)
}

/// Empirical risk minimization over a finite hypothesis class.
///
/// Returns the hypothesis of least weighted error, breaking ties by the
/// lowest id.
#[derive(Clone, Debug)]
pub struct ErmOracle {
    concept: Concept,
    class: Vec<Arc<Hypothesis>>,
    gamma: f64,
}

impl ErmOracle {
    pub fn new(concept: Concept, class: Vec<Hypothesis>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(LabError::invalid(format!("gamma {gamma} outside (0, 1/2)")));
        }
        if class.is_empty() {
            return Err(LabError::invalid("empty hypothesis class"));
        }
        if let Some(h) = class.iter().find(|h| h.len() != concept.len()) {
            return Err(LabError::invalid(format!(
                "hypothesis {} has length {}, domain has {}",
                h.id(),
                h.len(),
                concept.len()
            )));
        }
        let mut class: Vec<Arc<Hypothesis>> = class.into_iter().map(Arc::new).collect();
        class.sort_by_key(|h| h.id());
        if class.windows(2).any(|w| w[0].id() == w[1].id()) {
            return Err(LabError::invalid("hypothesis ids must be unique"));
        }
        Ok(Self { concept, class, gamma })
    }

    pub fn concept(&self) -> &Concept {
        &self.concept
    }

    pub fn class(&self) -> &[Arc<Hypothesis>] {
        &self.class
    }

    /// Minimizer and its error, without the contract check.
    pub fn best(&self, dist: &WeightVector) -> (Arc<Hypothesis>, f64) {
        let mut best = (&self.class[0], f64::INFINITY);
        for h in &self.class {
            let e = weighted_error_unchecked(h, &self.concept, dist);
            if e < best.1 {
                best = (h, e);
            }
        }
        (Arc::clone(best.0), best.1)
    }
}

impl WeakLearner for ErmOracle {
    fn advantage(&self) -> f64 {
        self.gamma
    }

    fn domain_size(&self) -> usize {
        self.concept.len()
    }

    fn query(&self, dist: &WeightVector) -> Result<Arc<Hypothesis>> {
        let (h, err) = self.best(dist);
        let threshold = 0.5 - self.gamma;
        if err > threshold + CONTRACT_TOLERANCE {
            return Err(LabError::WeakLearnerContractViolation {
                best_error: err,
                threshold,
            });
        }
        Ok(h)
    }
}
