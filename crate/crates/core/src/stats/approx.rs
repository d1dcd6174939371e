use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::domain::{weighted_error, Concept, Hypothesis, WeightVector};
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsApproximation {
    pub holds: bool,
    /// Id of the hypothesis with the largest gap (first one on ties).
    pub worst_h: usize,
    pub worst_gap: f64,
}

/// Checks, hypothesis by hypothesis, whether the multiset `t` is an
/// ε-approximation for `(c, D, H)`: every `|L_D(h) - err_T(h)| ≤ ε`.
pub fn is_eps_approximation<H: Borrow<Hypothesis>>(
    t: &[usize],
    dist: &WeightVector,
    class: &[H],
    c: &Concept,
    eps: f64,
) -> Result<EpsApproximation> {
    if t.is_empty() {
        return Err(LabError::invalid("empty sample"));
    }
    if class.is_empty() {
        return Err(LabError::invalid("empty hypothesis class"));
    }
    if let Some(&x) = t.iter().find(|&&x| x >= c.len()) {
        return Err(LabError::invalid(format!("sample point {x} outside the domain")));
    }
    let mut worst: Option<(usize, f64)> = None;
    for h in class {
        let h = h.borrow();
        let true_error = weighted_error(h, c, dist)?;
        let wrong = t.iter().filter(|&&x| h.predict(x) != c.label(x)).count();
        let gap = (true_error - wrong as f64 / t.len() as f64).abs();
        if worst.is_none_or(|(_, g)| gap > g) {
            worst = Some((h.id(), gap));
        }
    }
    let (worst_h, worst_gap) = worst.expect("class is nonempty");
    Ok(EpsApproximation {
        holds: worst_gap <= eps,
        worst_h,
        worst_gap,
    })
}

fn ceil_tolerant(x: f64) -> f64 {
    // absorbs representation error such as ln(1/(1/e)) = 1 + 2^-52
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// `⌈b (d + ln(1/δ)) ε⁻²⌉`.
pub fn epsilon_approximation_sample_size(d: u64, eps: f64, delta: f64, b: f64) -> Result<u64> {
    if d == 0 || !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) || !(b > 0.0) {
        return Err(LabError::invalid("d, eps, b must be positive and delta in (0, 1)"));
    }
    let n = ceil_tolerant(b * (d as f64 + (1.0 / delta).ln()) / (eps * eps));
    if !(n.is_finite() && n <= u64::MAX as f64) {
        return Err(LabError::invalid("sample size overflows"));
    }
    Ok(n as u64)
}
