use serde::{Deserialize, Serialize};

use super::voting::{MarginProfile, VotingClassifier};
use super::MultisetKey;
use crate::domain::TrainingSet;
use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// `er_k`, the error of `h_k` under `D_k`.
    pub error: f64,
    /// `Z_k`, the normalizer of the update.
    pub z: f64,
    /// Samples rejected by the re-draw loop before `h_k` was accepted.
    pub redraws: usize,
    pub hypothesis_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_key: Option<MultisetKey>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub gamma: f64,
    pub w: f64,
    /// Draws per sampled query (`n`); zero for the sequential booster.
    pub sample_size: usize,
    pub rounds: Vec<RoundTrace>,
    /// `D_{K+1}` over training slots.
    pub final_distribution: Vec<f64>,
    pub margins: MarginProfile,
}

impl RunTrace {
    pub fn max_z(&self) -> f64 {
        self.rounds.iter().map(|r| r.z).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_error(&self) -> f64 {
        self.rounds.iter().map(|r| r.error).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_redraws(&self) -> usize {
        self.rounds.iter().map(|r| r.redraws).sum()
    }

    /// `ln(m) / (K w)`: the margin floor implied by the loss argument.
    pub fn margin_floor(&self) -> f64 {
        let m = self.final_distribution.len() as f64;
        m.ln() / (self.rounds.len() as f64 * self.w)
    }
}

#[derive(Clone, Debug)]
pub struct BoostRun {
    pub classifier: VotingClassifier,
    pub trace: RunTrace,
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Relative gap between `Σ_i exp(-w c(x_i) Σ_k h_k(x_i))` and `m Π_k Z_k`,
/// both evaluated in log space. The two agree exactly in exact arithmetic.
pub fn exponential_loss_identity_check(
    trace: &RunTrace,
    classifier: &VotingClassifier,
    sample: &TrainingSet,
) -> Result<f64> {
    if trace.rounds.len() != classifier.len() {
        return Err(LabError::invalid("trace and classifier disagree on the number of rounds"));
    }
    if trace.final_distribution.len() != sample.len() {
        return Err(LabError::invalid("trace and training set disagree on m"));
    }
    let w = trace.w;
    let exponents = (0..sample.len())
        .map(move |s| -w * (sample.label(s) as i64 * classifier.vote_sum(sample.point(s))) as f64);
    let log_lhs = log_sum_exp(exponents);
    let log_rhs = (sample.len() as f64).ln() + trace.rounds.iter().map(|r| r.z.ln()).sum::<f64>();
    Ok((log_lhs - log_rhs).exp_m1().abs())
}
