use super::trace::{BoostRun, RoundTrace, RunTrace};
use super::voting::{margins, VotingClassifier};
use super::{check_oracle_domain, domain_distribution, fixed_weight, reweight, slot_error};
use crate::domain::TrainingSet;
use crate::error::{LabError, Result};
use crate::ledger::OracleSession;

/// Fixed-weight AdaBoost: `rounds` sequential rounds, one query per round
/// on `D_k` itself, and the same uniform step `w` as the sampled booster.
///
/// The procedure is deterministic; `_seed` is accepted so every booster
/// shares one calling convention.
pub fn adaboost_fixed(
    sample: &TrainingSet,
    session: &mut OracleSession<'_>,
    gamma: f64,
    rounds: usize,
    _seed: u64,
) -> Result<BoostRun> {
    if rounds == 0 {
        return Err(LabError::invalid("at least one round is required"));
    }
    let w = fixed_weight(gamma)?;
    check_oracle_domain(sample, session.oracle().domain_size())?;

    let m = sample.len();
    let first_round = session.ledger().p();
    let mut dist = vec![1.0 / m as f64; m];
    let mut hypotheses = Vec::with_capacity(rounds);
    let mut trace_rounds = Vec::with_capacity(rounds);

    for k in 0..rounds {
        let query = domain_distribution(sample, &dist)?;
        let h = session.query(first_round + k, &query)?;
        let error = slot_error(&h, sample, &dist);
        let z = reweight(&mut dist, &h, sample, w);
        trace_rounds.push(RoundTrace {
            error,
            z,
            redraws: 0,
            hypothesis_id: h.id(),
            query_key: None,
        });
        hypotheses.push(h);
    }

    let classifier = VotingClassifier::new(hypotheses)?;
    let margins = margins(&classifier, sample)?;
    Ok(BoostRun {
        classifier,
        trace: RunTrace {
            gamma,
            w,
            sample_size: 0,
            rounds: trace_rounds,
            final_distribution: dist,
            margins,
        },
    })
}
