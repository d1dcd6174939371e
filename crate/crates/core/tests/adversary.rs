use boostlab::adversary::{
    beta_from_params, build_adversary, event_e_trial, run_trial, AdversaryParams, AdversaryState, ConstantLearner,
    LearnerUnderTest, SingletonProber, SubsetProber, TruncatedAdaBoost,
};
use boostlab::oracle::CONTRACT_TOLERANCE;
use boostlab::{weighted_error, Concept, Label, LabError, OracleSession, ParallelBudget, TrainingSet, WeightVector};
use proptest::prelude::*;
use rand::Rng;

fn random_query(rng: &mut impl Rng, n: usize) -> WeightVector {
    let k = rng.random_range(1..=n.min(16));
    WeightVector::from_pairs((0..k).map(|_| (rng.random_range(0..n), rng.random::<f64>() + 1e-3))).unwrap()
}

#[test]
fn beta_examples() {
    assert!((beta_from_params(0.05, 16, 4, 3, 1.0) - 2.6).abs() < 1e-12);
    assert!((beta_from_params(0.03, 8, 1, 1, 4.0) - 1.96).abs() < 1e-12);
    assert!((beta_from_params(0.01, 4, 1_000_000, 10, 4.0) - 1.32).abs() < 1e-12);
}

#[test]
fn build_examples() {
    let p = AdversaryParams::new(64, 10, 0.05, 3, 2.0).unwrap();
    let s = build_adversary(&p, 1).unwrap();
    let sizes: Vec<usize> = s.groups().iter().map(|g| g.subset.len()).collect();
    assert_eq!(sizes, vec![64, 32, 16]);
    assert_eq!(s.hypothesis_count(), 193);
    let tight = AdversaryParams::new(64, 10, 0.05, 1, 128.0).unwrap();
    assert_eq!(build_adversary(&tight, 1).unwrap().innermost_subset().len(), 1);
}

#[test]
fn off_subset_query_gets_first_masked_hypothesis() {
    let p = AdversaryParams::new(64, 8, 0.05, 2, 2.0).unwrap();
    let s = build_adversary(&p, 9).unwrap();
    let outside: Vec<usize> = (0..128).filter(|x| s.groups()[0].subset.binary_search(x).is_err()).collect();
    let h = s.respond(&WeightVector::uniform(&outside).unwrap()).unwrap();
    assert_eq!(h.id(), s.groups()[0].masked[0].id());
    assert!(s.event_e());
}

/// `2m = 8`, `d = 2`, `p = 1`: every masked and random hypothesis is wrong
/// at point 3 in `X_1`.
fn explicit_tiny_state() -> AdversaryState {
    let params = AdversaryParams {
        m: 4,
        d: 2,
        gamma: 0.1,
        p: 1,
        beta: 2.0,
        enforce_hypothesis_budget: false,
    };
    let labels: Vec<Label> = vec![1, -1, 1, 1, -1, -1, 1, -1];
    let concept = Concept::new(labels.clone()).unwrap();
    let subset = vec![1, 3, 5, 6];
    let flip_at = |xs: &[usize]| -> Vec<Label> {
        labels.iter().enumerate().map(|(x, &l)| if xs.contains(&x) { -l } else { l }).collect()
    };
    let masked = vec![flip_at(&[3]), flip_at(&[3, 5])];
    let random = vec![flip_at(&[0, 3, 7]), flip_at(&[2, 3, 4, 6])];
    AdversaryState::from_parts(params, concept, vec![(subset, masked, random)]).unwrap()
}

#[test]
fn exhausted_groups_reveal_the_concept_for_good() {
    let s = explicit_tiny_state();
    s.check_structure().unwrap();
    assert!(s.event_e());
    let h = s.respond(&WeightVector::singleton(3)).unwrap();
    assert_eq!(h.predictions(), s.concept().labels());
    assert!(!s.event_e());
    // a query that a masked hypothesis answers does not restore E
    let h = s.respond(&WeightVector::singleton(0)).unwrap();
    assert_eq!(h.id(), s.groups()[0].masked[0].id());
    assert!(!s.event_e());
}

#[test]
fn constant_learner_keeps_event_e() {
    let p = AdversaryParams::new(128, 10, 0.05, 1, 2.0).unwrap();
    let mut errors = Vec::new();
    for seed in 0..40 {
        let r = event_e_trial(&p, &ConstantLearner::default(), 64, seed).unwrap();
        assert!(r.event_e);
        assert_eq!((r.rounds_used, r.max_width), (0, 0));
        errors.push(r.test_error);
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    assert!((mean - 0.5).abs() < 0.03, "mean {mean}");
}

#[test]
fn singleton_prober_breaks_event_e_at_tiny_d() {
    // each point of X_1 defeats all four group members with chance 1/16, so
    // E survives |X_1| = 64 singleton probes with chance (15/16)^64 ≈ 0.016
    let p = AdversaryParams {
        enforce_hypothesis_budget: false,
        ..AdversaryParams::new(64, 4, 0.05, 1, 2.0).unwrap()
    };
    let p = AdversaryParams { d: 2, ..p };
    p.validate().unwrap();
    let held = (0..1000).filter(|&seed| event_e_trial(&p, &SingletonProber, 64, seed).unwrap().event_e).count();
    assert!(held <= 40, "E held in {held} of 1000 trials");
}

struct Greedy;

impl LearnerUnderTest for Greedy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn budget(&self, _: usize) -> ParallelBudget {
        ParallelBudget::new(1, 2)
    }

    fn learn(&self, _: &TrainingSet, n: usize, session: &mut OracleSession<'_>, _: u64) -> boostlab::Result<Vec<Label>> {
        for x in 0..3 {
            session.query(0, &WeightVector::singleton(x))?;
        }
        Ok(vec![1; n])
    }
}

#[test]
fn over_budget_learner_is_a_protocol_violation() {
    let p = AdversaryParams::new(32, 8, 0.05, 1, 2.0).unwrap();
    assert!(matches!(event_e_trial(&p, &Greedy, 16, 0), Err(LabError::ProtocolViolation(_))));
}

#[test]
fn truncated_adaboost_uses_its_budget() {
    let p = AdversaryParams::new(128, 10, 0.05, 3, 2.0).unwrap();
    let (r, state) = run_trial(&p, &TruncatedAdaBoost { rounds: 3 }, 128, 4).unwrap();
    assert_eq!((r.rounds_used, r.max_width), (3, 1));
    assert_eq!(state.innermost_subset().len(), 32);
    assert!(r.hidden_size <= 32);
    let prober = SubsetProber {
        rounds: 2,
        width: 5,
        subset_size: 3,
    };
    let r = event_e_trial(&AdversaryParams::new(128, 10, 0.05, 2, 2.0).unwrap(), &prober, 64, 1).unwrap();
    assert_eq!((r.rounds_used, r.max_width), (2, 5));
}

fn params_strategy() -> impl Strategy<Value = (AdversaryParams, u64)> {
    (4u32..=16, 1usize..=4, 3usize..=9, 0usize..4, any::<u64>())
        .prop_filter_map("parameters must validate", |(d, p, log_n, bi, seed)| {
            let beta = [1.5, 2.0, 2.6, 4.0][bi];
            let m = 1usize << (log_n);
            AdversaryParams::new(m.min(512), d, 0.05, p, beta).ok().map(|params| (params, seed))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn built_states_hold_every_invariant((params, seed) in params_strategy()) {
        let state = build_adversary(&params, seed).unwrap();
        state.check_invariants().unwrap();
        prop_assert!(state.hypothesis_count() as u128 <= 1u128 << params.d);
        let mut rng = boostlab::rng::stream(seed, &[99]);
        let mut seen_false = false;
        for _ in 0..30 {
            let q = random_query(&mut rng, params.domain_size());
            let h = state.respond(&q).unwrap();
            let err = weighted_error(&h, state.concept(), &q).unwrap();
            prop_assert!(err <= 0.5 - params.gamma + CONTRACT_TOLERANCE);
            // stickiness
            prop_assert!(!(seen_false && state.event_e()));
            seen_false |= !state.event_e();
        }
    }

    #[test]
    fn same_seed_same_state_and_replies((params, seed) in params_strategy()) {
        let a = build_adversary(&params, seed).unwrap();
        let b = build_adversary(&params, seed).unwrap();
        prop_assert_eq!(a.concept(), b.concept());
        prop_assert_eq!(a.groups(), b.groups());
        let mut rng = boostlab::rng::stream(seed, &[7]);
        for _ in 0..10 {
            let q = random_query(&mut rng, params.domain_size());
            prop_assert_eq!(a.respond(&q).unwrap().id(), b.respond(&q).unwrap().id());
        }
    }
}
