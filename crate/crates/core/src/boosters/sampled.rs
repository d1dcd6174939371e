//! Single-round sampled boosting.
//!
//! Nominally the weak learner is queried once, in parallel, with `D_T` for
//! every size-`n` multiset `T` of training slots. Those queries are
//! materialized lazily: a multiset is sent to the oracle the first time it
//! is drawn and the answer is memoized under its canonical key. Every
//! materialized query belongs to the same ledger round, and none of them
//! depends on a response from an earlier round.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::trace::{BoostRun, RoundTrace, RunTrace};
use super::voting::{margins, VotingClassifier};
use super::{check_gamma, check_oracle_domain, default_round_count, fixed_weight, reweight, slot_error};
use crate::domain::{Hypothesis, TrainingSet, WeightVector};
use crate::error::{LabError, Result};
use crate::ledger::OracleSession;
use crate::rng;

/// Canonical multiset of training slots: `(slot, multiplicity)` pairs in
/// increasing slot order, zero multiplicities omitted.
pub type MultisetKey = Vec<(u32, u32)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub gamma: f64,
    /// VC-dimension bound `d` of the weak learner's class.
    pub vc_dim: u32,
    /// The constant `a` in `n = ⌈a d γ⁻²⌉`.
    pub sample_factor: f64,
    /// Overrides `K = ⌈16 γ⁻² ln m⌉`.
    pub rounds: Option<usize>,
    /// Re-draws allowed per round before giving up.
    pub retry_cap: usize,
    pub seed: u64,
    /// Keep each round's accepted multiset in the trace.
    pub record_query_keys: bool,
}

impl BoostConfig {
    pub fn new(gamma: f64, vc_dim: u32) -> Self {
        Self {
            gamma,
            vc_dim,
            sample_factor: 4.0,
            rounds: None,
            retry_cap: 1000,
            seed: 0,
            record_query_keys: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.vc_dim == 0 {
            return Err(LabError::invalid("vc_dim must be positive"));
        }
        if !(self.sample_factor.is_finite() && self.sample_factor > 0.0) {
            return Err(LabError::invalid(format!("sample factor {} must be positive", self.sample_factor)));
        }
        if self.rounds == Some(0) {
            return Err(LabError::invalid("round count must be at least 1"));
        }
        if self.retry_cap == 0 {
            return Err(LabError::invalid("retry cap must be positive"));
        }
        self.sample_size().map(|_| ())
    }

    /// `n = ⌈a d γ⁻²⌉`.
    pub fn sample_size(&self) -> Result<usize> {
        let n = (self.sample_factor * self.vc_dim as f64 / (self.gamma * self.gamma)).ceil();
        if !(1.0..=u32::MAX as f64).contains(&n) {
            return Err(LabError::invalid(format!("derived sample size {n} out of range")));
        }
        Ok(n as usize)
    }

    pub fn rounds_for(&self, m: usize) -> Result<usize> {
        match self.rounds {
            Some(k) => Ok(k),
            None => default_round_count(self.gamma, m),
        }
    }
}

/// `D_T`: mass `multiplicity / |T|` on each element of the multiset `T`.
pub fn multiset_query_distribution(t: &[usize]) -> Result<WeightVector> {
    WeightVector::uniform(t)
}

/// Size of the nominal single-round query family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NominalQueryCount {
    /// `C(m + n - 1, n)`, the number of size-`n` multisets of an `m`-set.
    pub multisets: BigUint,
    /// `m^n`.
    pub bound: BigUint,
}

impl NominalQueryCount {
    /// `log10` of the multiset count, for reporting.
    pub fn log10_multisets(&self) -> f64 {
        biguint_log10(&self.multisets)
    }
}

fn biguint_log10(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).log10();
    }
    let shift = bits - 52;
    let top = (x >> shift).iter_u64_digits().next().unwrap_or(0) as f64;
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

pub fn nominal_query_count(m: u64, n: u64) -> Result<NominalQueryCount> {
    if m == 0 || n == 0 {
        return Err(LabError::invalid("m and n must be at least 1"));
    }
    let exp = u32::try_from(n).map_err(|_| LabError::invalid("n too large"))?;
    // C(m-1+i, i) = C(m-2+i, i-1) (m-1+i) / i, exact at every step
    let mut multisets = BigUint::from(1u32);
    for i in 1..=n {
        multisets = multisets * BigUint::from(m - 1 + i) / BigUint::from(i);
    }
    let bound = BigUint::from(m).pow(exp);
    assert!(multisets <= bound, "C(m+n-1, n) exceeded m^n");
    Ok(NominalQueryCount { multisets, bound })
}

/// Draws `T ~ D^n` as slot multiplicities via sequential binomials.
fn draw_multiset<R: Rng + ?Sized>(n: u64, dist: &[f64], rng: &mut R, counts: &mut [u32]) -> Result<()> {
    counts.iter_mut().for_each(|c| *c = 0);
    let last = match dist.iter().rposition(|&d| d > 0.0) {
        Some(i) => i,
        None => return Err(LabError::invalid("distribution has no mass")),
    };
    let mut left = n;
    let mut mass_left: f64 = dist.iter().sum();
    for (slot, &d) in dist.iter().enumerate() {
        if left == 0 {
            break;
        }
        if d <= 0.0 {
            continue;
        }
        let k = if slot == last {
            left
        } else {
            let p = (d / mass_left).clamp(0.0, 1.0);
            Binomial::new(left, p)
                .map_err(|e| LabError::invalid(format!("binomial({left}, {p}): {e}")))?
                .sample(rng)
        };
        counts[slot] = k as u32;
        left -= k;
        mass_left -= d;
    }
    Ok(())
}

fn key_of(counts: &[u32]) -> MultisetKey {
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(slot, &c)| (slot as u32, c))
        .collect()
}

fn materialize(sample: &TrainingSet, key: &MultisetKey, n: usize) -> Result<WeightVector> {
    let n = n as f64;
    WeightVector::from_pairs(key.iter().map(|&(slot, c)| (sample.point(slot as usize), c as f64 / n)))
}

/// Runs sampled boosting against the session's weak learner.
///
/// Round `k` draws `T_k ~ D_k^n` and takes `h_k = h_{T_k}`, re-drawing
/// while `L_{D_k}(h_k) > 1/2 - γ/4`. Each draw uses the sub-stream
/// `(seed, k, attempt)`.
pub fn sampled_boost(sample: &TrainingSet, session: &mut OracleSession<'_>, cfg: &BoostConfig) -> Result<BoostRun> {
    cfg.validate()?;
    check_oracle_domain(sample, session.oracle().domain_size())?;
    let m = sample.len();
    if m > u32::MAX as usize {
        return Err(LabError::invalid("training set too large"));
    }
    let w = fixed_weight(cfg.gamma)?;
    let n = cfg.sample_size()?;
    let rounds = cfg.rounds_for(m)?;
    let accept = 0.5 - cfg.gamma / 4.0;
    let query_round = session.ledger().p();

    let mut dist = vec![1.0 / m as f64; m];
    let mut counts = vec![0u32; m];
    let mut memo: HashMap<MultisetKey, Arc<Hypothesis>> = HashMap::new();
    let mut hypotheses = Vec::with_capacity(rounds);
    let mut trace_rounds = Vec::with_capacity(rounds);

    for k in 0..rounds {
        let mut redraws = 0usize;
        let (h, error, key) = loop {
            let mut rng = rng::stream(cfg.seed, &[k as u64, redraws as u64]);
            draw_multiset(n as u64, &dist, &mut rng, &mut counts)?;
            let key = key_of(&counts);
            let h = match memo.get(&key) {
                Some(h) => Arc::clone(h),
                None => {
                    let query = materialize(sample, &key, n)?;
                    let h = session.query(query_round, &query)?;
                    memo.insert(key.clone(), Arc::clone(&h));
                    h
                }
            };
            let error = slot_error(&h, sample, &dist);
            if error <= accept {
                break (h, error, key);
            }
            redraws += 1;
            if redraws > cfg.retry_cap {
                return Err(LabError::TerminationFailure { round: k, redraws: cfg.retry_cap });
            }
        };
        let z = reweight(&mut dist, &h, sample, w);
        trace_rounds.push(RoundTrace {
            error,
            z,
            redraws,
            hypothesis_id: h.id(),
            query_key: cfg.record_query_keys.then_some(key),
        });
        hypotheses.push(h);
    }

    let classifier = VotingClassifier::new(hypotheses)?;
    let margins = margins(&classifier, sample)?;
    Ok(BoostRun {
        classifier,
        trace: RunTrace {
            gamma: cfg.gamma,
            w,
            sample_size: n,
            rounds: trace_rounds,
            final_distribution: dist,
            margins,
        },
    })
}
