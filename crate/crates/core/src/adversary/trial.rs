use serde::{Deserialize, Serialize};

use super::params::AdversaryParams;
use super::state::{build_adversary, AdversaryState};
use crate::domain::{Label, TrainingSet};
use crate::error::{LabError, Result};
use crate::ledger::{OracleSession, ParallelBudget};
use crate::rng;

/// A weak-to-strong learner run against an oracle under a declared budget.
pub trait LearnerUnderTest: Send + Sync {
    fn name(&self) -> String;

    /// Declared `(p, t)`, possibly depending on the domain size.
    fn budget(&self, domain_size: usize) -> ParallelBudget;

    /// Returns the output hypothesis as predictions over the whole domain.
    fn learn(
        &self,
        sample: &TrainingSet,
        domain_size: usize,
        session: &mut OracleSession<'_>,
        seed: u64,
    ) -> Result<Vec<Label>>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub event_e: bool,
    /// Error under the uniform distribution on the domain.
    pub test_error: f64,
    /// Disagreement with the concept on `X_p \ S`; `None` when that set is empty.
    pub error_on_hidden: Option<f64>,
    pub hidden_size: usize,
    pub rounds_used: usize,
    pub max_width: usize,
}

/// Like [`event_e_trial`], also handing back the adversary.
pub fn run_trial(
    params: &AdversaryParams,
    learner: &dyn LearnerUnderTest,
    m_train: usize,
    seed: u64,
) -> Result<(TrialRecord, AdversaryState)> {
    if m_train == 0 {
        return Err(LabError::invalid("m_train must be at least 1"));
    }
    let state = build_adversary(params, rng::derive_seed(seed, &[0]))?;
    let n = params.domain_size();
    let sample = TrainingSet::sample_uniform(state.concept(), m_train, &mut rng::stream(seed, &[1]))?;
    let budget = learner.budget(n);
    let mut session = OracleSession::with_budget(&state, budget);
    let predictions = learner.learn(&sample, n, &mut session, rng::derive_seed(seed, &[2]))?;
    if predictions.len() != n {
        return Err(LabError::invalid(format!(
            "learner returned {} predictions for a domain of {n}",
            predictions.len()
        )));
    }
    let ledger = session.into_ledger();

    let c = state.concept();
    let wrong = |x: usize| predictions[x] != c.label(x);
    let test_error = (0..n).filter(|&x| wrong(x)).count() as f64 / n as f64;
    let hidden = state.hidden_points(&sample);
    let error_on_hidden =
        (!hidden.is_empty()).then(|| hidden.iter().filter(|&&x| wrong(x)).count() as f64 / hidden.len() as f64);
    let record = TrialRecord {
        event_e: state.event_e(),
        test_error,
        error_on_hidden,
        hidden_size: hidden.len(),
        rounds_used: ledger.p(),
        max_width: ledger.t(),
    };
    Ok((record, state))
}

/// Samples `S` uniformly (`m_train` draws over the `2m` points), runs the
/// learner against a freshly built adversary, and reports whether event E
/// held together with the learner's errors.
///
/// A learner that exceeds its declared budget yields
/// [`LabError::ProtocolViolation`].
pub fn event_e_trial(
    params: &AdversaryParams,
    learner: &dyn LearnerUnderTest,
    m_train: usize,
    seed: u64,
) -> Result<TrialRecord> {
    run_trial(params, learner, m_train, seed).map(|(record, _)| record)
}
