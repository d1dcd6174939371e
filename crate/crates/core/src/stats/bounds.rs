use crate::error::{LabError, Result};

fn margin_style_bound(d: u64, m: u64, delta: f64, scale: f64, constant: f64) -> Result<f64> {
    if d == 0 || m <= d {
        return Err(LabError::invalid(format!("need m > d >= 1, got d = {d}, m = {m}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(LabError::invalid(format!("delta {delta} outside (0, 1]")));
    }
    if !(scale > 0.0) || !(constant > 0.0) {
        return Err(LabError::invalid("gamma/margin and the constant must be positive"));
    }
    let (d, m) = (d as f64, m as f64);
    Ok(constant * (d * m.ln() * (m / d).ln() + (1.0 / delta).ln()) / (scale * scale * m))
}

/// `constant · (d ln m ln(m/d) + ln(1/δ)) / (γ² m)`: AdaBoost's
/// generalization error, up to the unspecified universal constant.
pub fn adaboost_generalization_bound(d: u64, m: u64, delta: f64, gamma: f64, constant: f64) -> Result<f64> {
    margin_style_bound(d, m, delta, gamma, constant)
}

/// Breiman's min-margin bound for voting classifiers whose training
/// margins are all at least `margin`, up to the universal constant.
/// Values above 1 are vacuous.
pub fn breiman_min_margin_bound(d: u64, m: u64, delta: f64, margin: f64, constant: f64) -> Result<f64> {
    margin_style_bound(d, m, delta, margin, constant)
}
