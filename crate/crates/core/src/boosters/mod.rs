//! Fixed-weight boosting: the sequential baseline, the single-round
//! sampled booster, and margin analysis of the resulting voters.

mod adaboost;
mod sampled;
mod trace;
mod voting;

pub use adaboost::adaboost_fixed;
pub use sampled::{
    multiset_query_distribution, nominal_query_count, sampled_boost, BoostConfig, MultisetKey,
    NominalQueryCount,
};
pub use trace::{exponential_loss_identity_check, BoostRun, RoundTrace, RunTrace};
pub use voting::{margins, MarginProfile, VotingClassifier};

use crate::domain::{Hypothesis, TrainingSet, WeightVector};
use crate::error::{LabError, Result};

/// `w = ½ ln((1/2 + γ/4) / (1/2 - γ/4))`, the per-round reweighting step.
pub fn fixed_weight(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    // ½ ln((1+x)/(1-x)) with x = γ/2
    Ok((gamma / 2.0).atanh())
}

/// `√(1 - γ²/4)`: the largest normalizer a round can produce when its
/// hypothesis has error at most `1/2 - γ/4`.
pub fn contraction_bound(gamma: f64) -> f64 {
    (1.0 - gamma * gamma / 4.0).sqrt()
}

/// `max(1, ⌈16 γ⁻² ln m⌉)` rounds.
pub fn default_round_count(gamma: f64, m: usize) -> Result<usize> {
    check_gamma(gamma)?;
    if m == 0 {
        return Err(LabError::invalid("training set is empty"));
    }
    let k = (16.0 / (gamma * gamma) * (m as f64).ln()).ceil();
    Ok((k as usize).max(1))
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 0.5 {
        Ok(())
    } else {
        Err(LabError::invalid(format!("gamma {gamma} outside (0, 1/2)")))
    }
}

/// Error of `h` under a distribution over training slots.
pub(crate) fn slot_error(h: &Hypothesis, sample: &TrainingSet, dist: &[f64]) -> f64 {
    dist.iter()
        .enumerate()
        .filter(|&(slot, _)| h.predict(sample.point(slot)) != sample.label(slot))
        .map(|(_, &d)| d)
        .sum()
}

/// `D(i) ← D(i) exp(-w c(x_i) h(x_i)) / Z`, returning `Z`.
pub(crate) fn reweight(dist: &mut [f64], h: &Hypothesis, sample: &TrainingSet, w: f64) -> f64 {
    let (up, down) = (w.exp(), (-w).exp());
    let mut z = 0.0;
    for (slot, d) in dist.iter_mut().enumerate() {
        let agree = h.predict(sample.point(slot)) == sample.label(slot);
        *d *= if agree { down } else { up };
        z += *d;
    }
    dist.iter_mut().for_each(|d| *d /= z);
    z
}

/// The slot distribution pushed onto domain points (duplicates merged).
pub(crate) fn domain_distribution(sample: &TrainingSet, dist: &[f64]) -> Result<WeightVector> {
    WeightVector::from_pairs(dist.iter().enumerate().map(|(slot, &d)| (sample.point(slot), d)))
}

fn check_oracle_domain(sample: &TrainingSet, domain_size: usize) -> Result<()> {
    if sample.min_domain_size() > domain_size {
        return Err(LabError::invalid(format!(
            "training set references point {} but the oracle domain has {domain_size} points",
            sample.min_domain_size() - 1
        )));
    }
    Ok(())
}
