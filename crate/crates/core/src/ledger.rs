//! Parallel-complexity accounting.
//!
//! A learner has parallel complexity `(p, t)` when it invokes the weak
//! learner in `p` rounds of at most `t` queries each. The ledger records
//! every query and its response, grouped by round, and reports `(p, t)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{Hypothesis, WeightVector};
use crate::error::{LabError, Result};
use crate::oracle::{weak_learner_query, WeakLearner};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query: WeightVector,
    pub response_id: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub queries: Vec<QueryRecord>,
}

/// Append-only log of weak-learner invocations.
///
/// Rounds are numbered from zero. A query may be recorded into the current
/// (latest) round or open the next one; earlier rounds are closed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    rounds: Vec<RoundRecord>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails unless `round` is the current round or the next one.
    pub fn check_round(&self, round: usize) -> Result<()> {
        let next = self.rounds.len();
        if round + 1 == next || round == next {
            Ok(())
        } else if round < next {
            Err(LabError::protocol(format!(
                "round {round} is closed (current round is {})",
                next - 1
            )))
        } else {
            Err(LabError::protocol(format!(
                "round {round} skips ahead (next round is {next})"
            )))
        }
    }

    pub fn record(&mut self, round: usize, query: WeightVector, response: &Hypothesis) -> Result<()> {
        self.check_round(round)?;
        if round == self.rounds.len() {
            self.rounds.push(RoundRecord::default());
        }
        self.rounds[round].queries.push(QueryRecord {
            query,
            response_id: response.id(),
        });
        Ok(())
    }

    /// Number of rounds in which the weak learner was invoked.
    pub fn p(&self) -> usize {
        self.rounds.len()
    }

    /// Largest number of queries issued within one round.
    pub fn t(&self) -> usize {
        self.rounds.iter().map(|r| r.queries.len()).max().unwrap_or(0)
    }

    pub fn total_queries(&self) -> usize {
        self.rounds.iter().map(|r| r.queries.len()).sum()
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn queries_in_round(&self, round: usize) -> usize {
        self.rounds.get(round).map_or(0, |r| r.queries.len())
    }
}

/// A declared `(p, t)` budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelBudget {
    pub rounds: usize,
    pub width: u64,
}

impl ParallelBudget {
    pub fn new(rounds: usize, width: u64) -> Self {
        Self { rounds, width }
    }
}

/// A weak learner paired with the ledger that logs its use, optionally
/// enforcing a declared parallel budget.
pub struct OracleSession<'a> {
    oracle: &'a dyn WeakLearner,
    ledger: QueryLedger,
    budget: Option<ParallelBudget>,
}

impl<'a> OracleSession<'a> {
    pub fn new(oracle: &'a dyn WeakLearner) -> Self {
        Self {
            oracle,
            ledger: QueryLedger::new(),
            budget: None,
        }
    }

    pub fn with_budget(oracle: &'a dyn WeakLearner, budget: ParallelBudget) -> Self {
        Self {
            budget: Some(budget),
            ..Self::new(oracle)
        }
    }

    pub fn oracle(&self) -> &'a dyn WeakLearner {
        self.oracle
    }

    pub fn budget(&self) -> Option<ParallelBudget> {
        self.budget
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    /// Queries the weak learner in `round`, after checking the protocol and
    /// the budget. Nothing is sent to the oracle when either check fails.
    pub fn query(&mut self, round: usize, dist: &WeightVector) -> Result<Arc<Hypothesis>> {
        self.ledger.check_round(round)?;
        if let Some(budget) = self.budget {
            if round >= budget.rounds {
                return Err(LabError::protocol(format!(
                    "round {} exceeds the declared budget of {} rounds",
                    round + 1,
                    budget.rounds
                )));
            }
            let used = self.ledger.queries_in_round(round) as u64;
            if used >= budget.width {
                return Err(LabError::protocol(format!(
                    "query {} in round {round} exceeds the declared width {}",
                    used + 1,
                    budget.width
                )));
            }
        }
        weak_learner_query(self.oracle, dist, &mut self.ledger, round)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Concept;

    fn h(id: usize) -> Hypothesis {
        Hypothesis::new(id, vec![1, -1]).unwrap()
    }

    fn q() -> WeightVector {
        WeightVector::singleton(0)
    }

    #[test]
    fn counting() {
        let mut l = QueryLedger::new();
        assert_eq!((l.p(), l.t()), (0, 0));
        for _ in 0..3 {
            l.record(0, q(), &h(0)).unwrap();
        }
        assert_eq!((l.p(), l.t()), (1, 3));

        let mut l = QueryLedger::new();
        for _ in 0..2 {
            l.record(0, q(), &h(0)).unwrap();
        }
        for _ in 0..5 {
            l.record(1, q(), &h(1)).unwrap();
        }
        assert_eq!((l.p(), l.t()), (2, 5));
        assert_eq!(l.total_queries(), 7);
    }

    #[test]
    fn closed_rounds_reject_writes() {
        let mut l = QueryLedger::new();
        l.record(0, q(), &h(0)).unwrap();
        l.record(1, q(), &h(0)).unwrap();
        assert!(matches!(l.record(0, q(), &h(0)), Err(LabError::ProtocolViolation(_))));
        assert!(matches!(l.record(3, q(), &h(0)), Err(LabError::ProtocolViolation(_))));
        assert_eq!(l.total_queries(), 2);
    }

    #[test]
    fn session_enforces_budget() {
        let c = Concept::new(vec![1, -1]).unwrap();
        let oracle = crate::oracle::ErmOracle::new(c.clone(), vec![c.as_hypothesis(0)], 0.1).unwrap();
        let mut s = OracleSession::with_budget(&oracle, ParallelBudget::new(1, 2));
        s.query(0, &q()).unwrap();
        s.query(0, &q()).unwrap();
        assert!(matches!(s.query(0, &q()), Err(LabError::ProtocolViolation(_))));
        assert!(matches!(s.query(1, &q()), Err(LabError::ProtocolViolation(_))));
        assert_eq!((s.ledger().p(), s.ledger().t()), (1, 2));
    }

    #[test]
    fn ledger_is_monotone_under_random_appends() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, &[]);
        let mut l = QueryLedger::new();
        let mut last = (0, 0);
        for _ in 0..500 {
            let round = l.p().saturating_sub(1) + usize::from(rng.random_bool(0.2));
            l.record(round, q(), &h(round)).unwrap();
            let now = (l.p(), l.t());
            assert!(now.0 >= last.0 && now.1 >= last.1);
            last = now;
        }
        let recorded: usize = l.rounds().iter().map(|r| r.queries.len()).sum();
        assert_eq!(recorded, 500);
    }
}
