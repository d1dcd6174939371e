//! The lower-bound construction: a random concept over `2m` points, nested
//! random subsets `X_1 ⊇ .. ⊇ X_p`, per-level hypothesis groups, and a
//! first-match weak learner that reveals nothing about labels on `X_p`
//! outside the sample unless it is forced to return the concept itself.

mod learners;
mod params;
mod state;
mod trial;

pub use learners::{ConstantLearner, SingletonProber, SubsetProber, TruncatedAdaBoost};
pub use params::{beta_from_params, AdversaryParams};
pub use state::{build_adversary, AdversaryDump, AdversaryState, HypothesisGroup};
pub use trial::{event_e_trial, run_trial, LearnerUnderTest, TrialRecord};
