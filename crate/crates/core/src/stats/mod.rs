//! Concentration and generalization utilities.
//!
//! Every bound calculator takes its universal constant as an explicit
//! argument; results hold only up to that unspecified constant.

mod approx;
mod bounds;
mod tail;

pub use approx::{epsilon_approximation_sample_size, is_eps_approximation, EpsApproximation};
pub use bounds::{adaboost_generalization_bound, breiman_min_margin_bound};
pub use tail::{
    monte_carlo_tail_estimate, wilson_interval, without_replacement_tail_bound, Population, Tail, TailEstimate,
};
