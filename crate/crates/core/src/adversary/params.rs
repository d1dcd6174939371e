use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Materialized state is capped at this many stored labels.
const MAX_STATE_ENTRIES: u128 = 1 << 28;

/// `β = 1 + max{32γ, a′ ln(tp) γ² / d}`.
pub fn beta_from_params(gamma: f64, d: u32, t: u64, p: usize, a_prime: f64) -> f64 {
    let tp = t as f64 * p as f64;
    let spread = a_prime * tp.ln() * gamma * gamma / d as f64;
    1.0 + f64::max(32.0 * gamma, spread)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryParams {
    /// Half the domain size: the domain has `2m` points.
    pub m: usize,
    /// VC budget; each group holds `2^⌈d/2⌉` masked and as many random hypotheses.
    pub d: u32,
    pub gamma: f64,
    /// Number of hypothesis groups (rounds the construction defends).
    pub p: usize,
    /// Per-level shrink factor of the nested subsets.
    pub beta: f64,
    /// Reject parameter sets whose hypothesis count exceeds `2^d`.
    pub enforce_hypothesis_budget: bool,
}

impl AdversaryParams {
    pub fn new(m: usize, d: u32, gamma: f64, p: usize, beta: f64) -> Result<Self> {
        let params = Self {
            m,
            d,
            gamma,
            p,
            beta,
            enforce_hypothesis_budget: true,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with β derived from a declared query width `t`.
    pub fn from_budget(m: usize, d: u32, gamma: f64, p: usize, t: u64, a_prime: f64) -> Result<Self> {
        if t == 0 || p == 0 {
            return Err(LabError::invalid("t and p must be at least 1"));
        }
        if !(a_prime.is_finite() && a_prime >= 0.0) {
            return Err(LabError::invalid(format!("a' = {a_prime} must be nonnegative")));
        }
        Self::new(m, d, gamma, p, beta_from_params(gamma, d, t, p, a_prime))
    }

    /// Same parameters with the `|H| <= 2^d` check switched off, for
    /// tiny-`d` experiments that deliberately overspend the VC budget.
    pub fn relax_hypothesis_budget(mut self) -> Self {
        self.enforce_hypothesis_budget = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(LabError::invalid("m must be at least 1"));
        }
        if self.d < 1 {
            return Err(LabError::invalid("d must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(LabError::invalid(format!("gamma {} outside (0, 1/2)", self.gamma)));
        }
        if self.gamma >= 1.0 / 16.0 {
            log::warn!(
                "gamma {} >= 1/16: the construction's guarantees are only argued below 1/16",
                self.gamma
            );
        }
        if self.p == 0 {
            return Err(LabError::invalid("p must be at least 1"));
        }
        if !(self.beta.is_finite() && self.beta > 1.0) {
            return Err(LabError::invalid(format!("beta {} must exceed 1", self.beta)));
        }
        if self.subset_size(self.p) < 1 {
            return Err(LabError::invalid(format!(
                "X_p is empty: floor(2m beta^-p) = 0 for 2m = {}, beta = {}, p = {}",
                self.domain_size(),
                self.beta,
                self.p
            )));
        }
        let half = self.group_half_size();
        let total = self.hypothesis_count();
        if half.is_none() || total.is_none() {
            return Err(LabError::invalid(format!("d = {} is too large to materialize", self.d)));
        }
        let total = total.unwrap();
        if self.enforce_hypothesis_budget && total > 1u128 << self.d.min(127) {
            return Err(LabError::invalid(format!(
                "{total} hypotheses exceed the 2^{} budget; lower p or raise d",
                self.d
            )));
        }
        if total * self.domain_size() as u128 > MAX_STATE_ENTRIES {
            return Err(LabError::invalid(format!(
                "{total} hypotheses over {} points is too large to materialize",
                self.domain_size()
            )));
        }
        Ok(())
    }

    pub fn domain_size(&self) -> usize {
        2 * self.m
    }

    /// `|X_i| = ⌊2m β^{-i}⌋`, with `X_0` the whole domain.
    pub fn subset_size(&self, level: usize) -> usize {
        if level == 0 {
            return self.domain_size();
        }
        let exp = i32::try_from(level).unwrap_or(i32::MAX);
        (self.domain_size() as f64 * self.beta.powi(-exp)).floor() as usize
    }

    /// `2^⌈d/2⌉`: masked (and random) hypotheses per group.
    pub fn group_half_size(&self) -> Option<u128> {
        1u128.checked_shl(self.d.div_ceil(2))
    }

    /// `p · 2 · 2^⌈d/2⌉ + 1`, counting the fallback concept.
    pub fn hypothesis_count(&self) -> Option<u128> {
        (self.p as u128)
            .checked_mul(2)?
            .checked_mul(self.group_half_size()?)?
            .checked_add(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_formula() {
        // first branch: 32 * 0.05 = 1.6 dominates ln(12) * 0.0025 / 16
        let b = beta_from_params(0.05, 16, 4, 3, 1.0);
        assert!((b - 2.6).abs() < 1e-12);
        assert!((beta_from_params(0.07, 5, 1, 1, 4.0) - (1.0 + 32.0 * 0.07)).abs() < 1e-12);
        // second branch 4 ln(1e7) 1e-4 / 4 ≈ 0.00161 loses to 0.32
        let spread = 4.0 * 1e7f64.ln() * 1e-4 / 4.0;
        assert!((spread - 0.00161).abs() < 1e-5);
        assert!((beta_from_params(0.01, 4, 1_000_000, 10, 4.0) - 1.32).abs() < 1e-12);
        // second branch wins for a large a'
        let b = beta_from_params(0.01, 4, 1_000_000, 10, 1000.0);
        assert!((b - (1.0 + 1000.0 * 1e7f64.ln() * 1e-4 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn subset_sizes() {
        let p = AdversaryParams::new(64, 10, 0.05, 3, 2.0).unwrap();
        assert_eq!((p.subset_size(1), p.subset_size(2), p.subset_size(3)), (64, 32, 16));
        let p = AdversaryParams::new(10, 10, 0.05, 1, 20.0).unwrap();
        assert_eq!(p.subset_size(1), 1);
    }

    #[test]
    fn hypothesis_budget() {
        let p = AdversaryParams::new(64, 10, 0.05, 3, 2.0).unwrap();
        assert_eq!(p.hypothesis_count(), Some(193));
        assert!(AdversaryParams::new(64, 4, 0.05, 1, 2.0).is_ok());
        assert!(AdversaryParams::new(64, 4, 0.05, 2, 2.0).is_err());
        assert!(AdversaryParams::new(64, 2, 0.05, 1, 2.0).is_err());
        let relaxed = AdversaryParams {
            enforce_hypothesis_budget: false,
            ..AdversaryParams::new(64, 4, 0.05, 1, 2.0).unwrap()
        };
        let relaxed = AdversaryParams { d: 2, ..relaxed };
        assert!(relaxed.validate().is_ok());
    }

    #[test]
    fn invalid_parameters() {
        assert!(AdversaryParams::new(2, 10, 0.05, 3, 2.0).is_err()); // X_3 empty
        assert!(AdversaryParams::new(64, 10, 0.05, 1, 1.0).is_err());
        assert!(AdversaryParams::new(64, 10, 0.0, 1, 2.0).is_err());
        assert!(AdversaryParams::new(64, 10, 0.05, 0, 2.0).is_err());
        assert!(AdversaryParams::from_budget(64, 10, 0.05, 1, 0, 4.0).is_err());
    }
}
