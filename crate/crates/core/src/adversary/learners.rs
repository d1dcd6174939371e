//! Learners used to probe the adversary.

use rand::seq::index;

use super::trial::LearnerUnderTest;
use crate::boosters::{adaboost_fixed, VotingClassifier};
use crate::domain::{Label, TrainingSet, WeightVector};
use crate::error::{LabError, Result};
use crate::ledger::{OracleSession, ParallelBudget};
use crate::rng;

/// Outputs a constant labeling without querying.
#[derive(Clone, Copy, Debug)]
pub struct ConstantLearner {
    pub label: Label,
}

impl Default for ConstantLearner {
    fn default() -> Self {
        Self { label: 1 }
    }
}

impl LearnerUnderTest for ConstantLearner {
    fn name(&self) -> String {
        "constant".into()
    }

    fn budget(&self, _domain_size: usize) -> ParallelBudget {
        ParallelBudget::new(0, 0)
    }

    fn learn(&self, _: &TrainingSet, domain_size: usize, _: &mut OracleSession<'_>, _: u64) -> Result<Vec<Label>> {
        if self.label != 1 && self.label != -1 {
            return Err(LabError::invalid("constant label must be -1 or +1"));
        }
        Ok(vec![self.label; domain_size])
    }
}

/// One round querying the point mass on every domain point. A reply with
/// error below 1/2 must be correct at that point, so the output copies it.
#[derive(Clone, Copy, Debug, Default)]
pub struct SingletonProber;

impl LearnerUnderTest for SingletonProber {
    fn name(&self) -> String {
        "singleton".into()
    }

    fn budget(&self, domain_size: usize) -> ParallelBudget {
        ParallelBudget::new(1, domain_size as u64)
    }

    fn learn(&self, _: &TrainingSet, domain_size: usize, session: &mut OracleSession<'_>, _: u64) -> Result<Vec<Label>> {
        (0..domain_size)
            .map(|x| session.query(0, &WeightVector::singleton(x)).map(|h| h.predict(x)))
            .collect()
    }
}

/// Issues `width` queries in each of `rounds` rounds, each uniform over a
/// random set of `subset_size` distinct training points, and outputs the
/// majority vote of the replies.
#[derive(Clone, Copy, Debug)]
pub struct SubsetProber {
    pub rounds: usize,
    pub width: u64,
    pub subset_size: usize,
}

impl LearnerUnderTest for SubsetProber {
    fn name(&self) -> String {
        "subset-prober".into()
    }

    fn budget(&self, _domain_size: usize) -> ParallelBudget {
        ParallelBudget::new(self.rounds, self.width)
    }

    fn learn(
        &self,
        sample: &TrainingSet,
        domain_size: usize,
        session: &mut OracleSession<'_>,
        seed: u64,
    ) -> Result<Vec<Label>> {
        if self.subset_size == 0 {
            return Err(LabError::invalid("subset size must be positive"));
        }
        let points = sample.distinct_points();
        let k = self.subset_size.min(points.len());
        let mut replies = Vec::new();
        for round in 0..self.rounds {
            for q in 0..self.width {
                let mut rng = rng::stream(seed, &[round as u64, q]);
                let chosen: Vec<usize> = index::sample(&mut rng, points.len(), k).iter().map(|i| points[i]).collect();
                replies.push(session.query(round, &WeightVector::uniform(&chosen)?)?);
            }
        }
        if replies.is_empty() {
            return Ok(vec![1; domain_size]);
        }
        Ok(VotingClassifier::new(replies)?.predictions())
    }
}

/// Fixed-weight AdaBoost cut off after `rounds` rounds of one query each.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedAdaBoost {
    pub rounds: usize,
}

impl LearnerUnderTest for TruncatedAdaBoost {
    fn name(&self) -> String {
        "adaboost".into()
    }

    fn budget(&self, _domain_size: usize) -> ParallelBudget {
        ParallelBudget::new(self.rounds, 1)
    }

    fn learn(
        &self,
        sample: &TrainingSet,
        _domain_size: usize,
        session: &mut OracleSession<'_>,
        seed: u64,
    ) -> Result<Vec<Label>> {
        let gamma = session.oracle().advantage();
        let run = adaboost_fixed(sample, session, gamma, self.rounds, seed)?;
        Ok(run.classifier.predictions())
    }
}
