//! Chernoff-type tails for sums drawn without replacement.
//!
//! For `Y_1..Y_n` drawn without replacement from values in `[0, 1/ρ]`:
//! `Pr[Σ Y ≤ (1-δ)μ] ≤ exp(-ρδ²μ/2)` when `μ ≤ E[Σ Y]`, and
//! `Pr[Σ Y ≥ (1+δ)μ] ≤ exp(-ρδ²μ/3)` when `μ ≥ E[Σ Y]`.

use rayon::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng;

const WILSON_Z: f64 = 1.959_963_984_540_054;
const TRIALS_PER_BLOCK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Lower,
    Upper,
}

impl std::fmt::Display for Tail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tail::Lower => "lower",
            Tail::Upper => "upper",
        })
    }
}

/// A finite population of values in `[0, 1/ρ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    values: Vec<f64>,
    rho: f64,
}

impl Population {
    pub fn new(values: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(LabError::invalid(format!("rho {rho} must be positive")));
        }
        if values.is_empty() {
            return Err(LabError::invalid("empty population"));
        }
        let cap = 1.0 / rho;
        if let Some(v) = values.iter().find(|v| !(0.0..=cap).contains(*v)) {
            return Err(LabError::invalid(format!("value {v} outside [0, {cap}]")));
        }
        Ok(Self { values, rho })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `E[Σ Y_i]` for `n` draws.
    pub fn expected_sum(&self, n: usize) -> f64 {
        n as f64 * self.mean()
    }
}

/// The analytic tail bound for `n` draws at deviation `delta` around `mu`.
pub fn without_replacement_tail_bound(pop: &Population, n: usize, delta: f64, mu: f64, side: Tail) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::invalid(format!("delta {delta} outside (0, 1)")));
    }
    if n == 0 || n > pop.len() {
        return Err(LabError::invalid(format!("cannot draw {n} of {} without replacement", pop.len())));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(LabError::invalid(format!("mu {mu} must be a nonnegative number")));
    }
    let expected = pop.expected_sum(n);
    let slack = 1e-12 * expected.max(1.0);
    match side {
        Tail::Lower if mu > expected + slack => {
            return Err(LabError::invalid(format!("lower tail needs mu <= E[sum] = {expected}, got {mu}")))
        }
        Tail::Upper if mu < expected - slack => {
            return Err(LabError::invalid(format!("upper tail needs mu >= E[sum] = {expected}, got {mu}")))
        }
        _ => {}
    }
    let divisor = match side {
        Tail::Lower => 2.0,
        Tail::Upper => 3.0,
    };
    Ok((-pop.rho() * delta * delta * mu / divisor).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 95% Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the endpoints are exactly 0 and 1 at the extremes; avoid rounding dust
    let low = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Fraction of `trials` uniform without-replacement draws of size `n` whose
/// sum lands at or beyond `threshold` on the given side.
///
/// Sums within `1e-9` of the threshold count as hits.
pub fn monte_carlo_tail_estimate(
    pop: &Population,
    n: usize,
    threshold: f64,
    side: Tail,
    trials: u64,
    seed: u64,
) -> Result<TailEstimate> {
    if n > pop.len() {
        return Err(LabError::invalid(format!("cannot draw {n} of {} without replacement", pop.len())));
    }
    if trials == 0 {
        return Err(LabError::invalid("trials must be at least 1"));
    }
    let blocks = (trials as usize).div_ceil(TRIALS_PER_BLOCK);
    let tol = 1e-9 * threshold.abs().max(1.0);
    let values = pop.values();
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * TRIALS_PER_BLOCK;
            let count = TRIALS_PER_BLOCK.min(trials as usize - start);
            let mut rng = rng::stream(seed, &[block as u64]);
            let mut order: Vec<usize> = (0..values.len()).collect();
            let mut hits = 0u64;
            for _ in 0..count {
                // partial Fisher–Yates: the first n slots become a uniform n-subset
                let mut sum = 0.0;
                for i in 0..n {
                    let j = rng.random_range(i..order.len());
                    order.swap(i, j);
                    sum += values[order[i]];
                }
                let hit = match side {
                    Tail::Lower => sum <= threshold + tol,
                    Tail::Upper => sum >= threshold - tol,
                };
                hits += u64::from(hit);
            }
            hits
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(hits, trials);
    Ok(TailEstimate {
        hits,
        trials,
        estimate: hits as f64 / trials as f64,
        ci_low,
        ci_high,
    })
}
