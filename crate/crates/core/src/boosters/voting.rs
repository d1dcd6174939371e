use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{sign, Hypothesis, Label, TrainingSet};
use crate::error::{LabError, Result};

/// `g(x) = (1/K) Σ h_k(x)`, predicting `sign(g(x))` (ties predict +1).
///
/// Vote totals are kept as exact integers.
#[derive(Clone, Debug)]
pub struct VotingClassifier {
    hypotheses: Vec<Arc<Hypothesis>>,
    votes: Vec<i64>,
}

impl VotingClassifier {
    pub fn new(hypotheses: Vec<Arc<Hypothesis>>) -> Result<Self> {
        let first = hypotheses
            .first()
            .ok_or_else(|| LabError::invalid("a voting classifier needs at least one hypothesis"))?;
        let n = first.len();
        if hypotheses.iter().any(|h| h.len() != n) {
            return Err(LabError::invalid("hypotheses disagree on domain size"));
        }
        let mut votes = vec![0i64; n];
        for h in &hypotheses {
            for (v, &p) in votes.iter_mut().zip(h.predictions()) {
                *v += p as i64;
            }
        }
        Ok(Self { hypotheses, votes })
    }

    /// Number of voters `K`.
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn domain_size(&self) -> usize {
        self.votes.len()
    }

    pub fn hypotheses(&self) -> &[Arc<Hypothesis>] {
        &self.hypotheses
    }

    /// `Σ_k h_k(x)`.
    pub fn vote_sum(&self, x: usize) -> i64 {
        self.votes[x]
    }

    pub fn aggregate(&self, x: usize) -> f64 {
        self.votes[x] as f64 / self.len() as f64
    }

    pub fn predict(&self, x: usize) -> Label {
        sign(self.votes[x])
    }

    pub fn predictions(&self) -> Vec<Label> {
        self.votes.iter().map(|&v| sign(v)).collect()
    }

    /// Fraction of training slots misclassified by `sign(g)`.
    pub fn training_error(&self, sample: &TrainingSet) -> f64 {
        let wrong = (0..sample.len())
            .filter(|&s| self.predict(sample.point(s)) != sample.label(s))
            .count();
        wrong as f64 / sample.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginProfile {
    /// `c(x) g(x)` per training slot.
    pub margins: Vec<f64>,
    pub min_margin: f64,
}

pub fn margins(g: &VotingClassifier, sample: &TrainingSet) -> Result<MarginProfile> {
    if sample.min_domain_size() > g.domain_size() {
        return Err(LabError::invalid("training set references points outside the classifier's domain"));
    }
    let k = g.len() as f64;
    let margins: Vec<f64> = (0..sample.len())
        .map(|s| (sample.label(s) as i64 * g.vote_sum(sample.point(s))) as f64 / k)
        .collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MarginProfile { margins, min_margin })
}
