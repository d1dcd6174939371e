use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::AdversaryParams;
use crate::domain::{weighted_error_unchecked, Concept, FiniteDomain, Hypothesis, Label, TrainingSet, WeightVector};
use crate::error::{LabError, Result};
use crate::oracle::WeakLearner;
use crate::rng;

/// One level of the construction: the subset `X_i` and the group `H_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisGroup {
    /// `X_i`, sorted.
    pub subset: Vec<usize>,
    /// Equal to the concept off `X_i`, uniform on `X_i`.
    pub masked: Vec<Arc<Hypothesis>>,
    /// Uniform everywhere.
    pub random: Vec<Arc<Hypothesis>>,
}

/// The randomized weak learner.
///
/// Answers a query with the first hypothesis, scanning `H_1, .., H_p` in
/// construction order (masked before random within a group), whose error
/// is at most `1/2 - γ`. When none qualifies it returns the concept itself
/// and event E (the concept has never been revealed) becomes false for good.
#[derive(Debug)]
pub struct AdversaryState {
    params: AdversaryParams,
    concept: Concept,
    groups: Vec<HypothesisGroup>,
    fallback: Arc<Hypothesis>,
    event_e: AtomicBool,
}

/// Debug dump of a full adversary. Reveals the concept.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryDump {
    pub params: AdversaryParams,
    pub concept: Concept,
    pub groups: Vec<HypothesisGroup>,
    pub event_e: bool,
}

fn random_label<R: Rng + ?Sized>(rng: &mut R) -> Label {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// Samples the concept, the nested subsets and the hypothesis groups.
pub fn build_adversary(params: &AdversaryParams, seed: u64) -> Result<AdversaryState> {
    params.validate()?;
    let domain = FiniteDomain::new(params.domain_size())?;
    let concept = Concept::random(domain, &mut rng::stream(seed, &[0]));

    let mut subset_rng = rng::stream(seed, &[1]);
    let mut parent: Vec<usize> = (0..domain.size()).collect();
    let mut subsets = Vec::with_capacity(params.p);
    for level in 1..=params.p {
        let picks = index::sample(&mut subset_rng, parent.len(), params.subset_size(level));
        let mut subset: Vec<usize> = picks.iter().map(|i| parent[i]).collect();
        subset.sort_unstable();
        parent = subset.clone();
        subsets.push(subset);
    }

    let half = params.group_half_size().expect("validated") as usize;
    let mut next_id = 0usize;
    let mut groups = Vec::with_capacity(params.p);
    for (level, subset) in subsets.into_iter().enumerate() {
        let mut rng = rng::stream(seed, &[2, level as u64]);
        let mut inside = vec![false; domain.size()];
        subset.iter().for_each(|&x| inside[x] = true);
        let mut masked = Vec::with_capacity(half);
        for _ in 0..half {
            let labels = (0..domain.size())
                .map(|x| if inside[x] { random_label(&mut rng) } else { concept.label(x) })
                .collect();
            masked.push(Arc::new(Hypothesis::new(next_id, labels)?));
            next_id += 1;
        }
        let mut random = Vec::with_capacity(half);
        for _ in 0..half {
            let labels = (0..domain.size()).map(|_| random_label(&mut rng)).collect();
            random.push(Arc::new(Hypothesis::new(next_id, labels)?));
            next_id += 1;
        }
        groups.push(HypothesisGroup { subset, masked, random });
    }

    let fallback = Arc::new(concept.as_hypothesis(next_id));
    Ok(AdversaryState {
        params: params.clone(),
        concept,
        groups,
        fallback,
        event_e: AtomicBool::new(true),
    })
}

impl AdversaryState {
    /// Assembles a state from explicit parts; hypothesis ids are reassigned
    /// in scan order. Nesting, masking and label validity are checked, but
    /// subset and group sizes are left free.
    pub fn from_parts(
        params: AdversaryParams,
        concept: Concept,
        parts: Vec<(Vec<usize>, Vec<Vec<Label>>, Vec<Vec<Label>>)>,
    ) -> Result<Self> {
        if concept.len() != params.domain_size() {
            return Err(LabError::invalid("concept length differs from 2m"));
        }
        let mut next_id = 0;
        let mut relabel = |preds: Vec<Label>| -> Result<Arc<Hypothesis>> {
            if preds.len() != concept.len() {
                return Err(LabError::invalid("hypothesis length differs from 2m"));
            }
            let h = Hypothesis::new(next_id, preds)?;
            next_id += 1;
            Ok(Arc::new(h))
        };
        let mut groups = Vec::with_capacity(parts.len());
        for (mut subset, masked, random) in parts {
            subset.sort_unstable();
            subset.dedup();
            let masked = masked.into_iter().map(&mut relabel).collect::<Result<Vec<_>>>()?;
            let random = random.into_iter().map(&mut relabel).collect::<Result<Vec<_>>>()?;
            groups.push(HypothesisGroup { subset, masked, random });
        }
        let fallback = Arc::new(concept.as_hypothesis(next_id));
        let state = Self {
            params,
            concept,
            groups,
            fallback,
            event_e: AtomicBool::new(true),
        };
        state.check_structure()?;
        Ok(state)
    }

    pub fn params(&self) -> &AdversaryParams {
        &self.params
    }

    pub fn concept(&self) -> &Concept {
        &self.concept
    }

    pub fn groups(&self) -> &[HypothesisGroup] {
        &self.groups
    }

    pub fn fallback(&self) -> &Arc<Hypothesis> {
        &self.fallback
    }

    /// `X_p`, the innermost subset.
    pub fn innermost_subset(&self) -> &[usize] {
        self.groups.last().map_or(&[][..], |g| &g.subset)
    }

    /// `X_p \ S`.
    pub fn hidden_points(&self, sample: &TrainingSet) -> Vec<usize> {
        let seen = sample.distinct_points();
        self.innermost_subset()
            .iter()
            .copied()
            .filter(|x| seen.binary_search(x).is_err())
            .collect()
    }

    /// True while the concept has never been returned.
    pub fn event_e(&self) -> bool {
        self.event_e.load(Ordering::Acquire)
    }

    /// Every hypothesis in scan order, ending with the fallback.
    pub fn hypotheses(&self) -> impl Iterator<Item = &Arc<Hypothesis>> {
        self.groups
            .iter()
            .flat_map(|g| g.masked.iter().chain(g.random.iter()))
            .chain(std::iter::once(&self.fallback))
    }

    pub fn hypothesis_count(&self) -> usize {
        self.hypotheses().count()
    }

    /// First-match reply to `dist`.
    pub fn respond(&self, dist: &WeightVector) -> Result<Arc<Hypothesis>> {
        if let Some(max) = dist.max_index() {
            if max >= self.concept.len() {
                return Err(LabError::invalid(format!(
                    "query index {max} outside domain of size {}",
                    self.concept.len()
                )));
            }
        }
        let threshold = 0.5 - self.params.gamma;
        let hit = self
            .groups
            .iter()
            .flat_map(|g| g.masked.iter().chain(g.random.iter()))
            .find(|h| weighted_error_unchecked(h, &self.concept, dist) <= threshold);
        match hit {
            Some(h) => Ok(Arc::clone(h)),
            None => {
                self.event_e.store(false, Ordering::Release);
                Ok(Arc::clone(&self.fallback))
            }
        }
    }

    /// Nesting `X_p ⊆ .. ⊆ X_1 ⊆ X`, masking off each `X_i`, and sorted,
    /// in-range subsets.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.concept.len();
        let mut parent: Option<&[usize]> = None;
        for (level, g) in self.groups.iter().enumerate() {
            let level = level + 1;
            if g.subset.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LabError::invalid(format!("X_{level} is not sorted and distinct")));
            }
            if g.subset.last().is_some_and(|&x| x >= n) {
                return Err(LabError::invalid(format!("X_{level} leaves the domain")));
            }
            if let Some(parent) = parent {
                if let Some(x) = g.subset.iter().find(|x| parent.binary_search(x).is_err()) {
                    return Err(LabError::invalid(format!("X_{level} contains {x} outside X_{}", level - 1)));
                }
            }
            let mut inside = vec![false; n];
            g.subset.iter().for_each(|&x| inside[x] = true);
            for h in &g.masked {
                if let Some(x) = (0..n).find(|&x| !inside[x] && h.predict(x) != self.concept.label(x)) {
                    return Err(LabError::invalid(format!(
                        "masked hypothesis {} disagrees with the concept at {x} outside X_{level}",
                        h.id()
                    )));
                }
            }
            parent = Some(&g.subset);
        }
        if self.fallback.predictions() != self.concept.labels() {
            return Err(LabError::invalid("fallback differs from the concept"));
        }
        Ok(())
    }

    /// [`check_structure`](Self::check_structure) plus the sizes the
    /// parameters prescribe: `|X_i| = ⌊2m β^{-i}⌋`, `2^⌈d/2⌉` hypotheses of
    /// each kind per group and, when enforced, `|H| <= 2^d`.
    pub fn check_invariants(&self) -> Result<()> {
        self.check_structure()?;
        let p = &self.params;
        if self.groups.len() != p.p {
            return Err(LabError::invalid("group count differs from p"));
        }
        let half = p.group_half_size().unwrap_or(u128::MAX);
        for (level, g) in self.groups.iter().enumerate() {
            let level = level + 1;
            if g.subset.len() != p.subset_size(level) {
                return Err(LabError::invalid(format!(
                    "|X_{level}| = {} but floor(2m beta^-{level}) = {}",
                    g.subset.len(),
                    p.subset_size(level)
                )));
            }
            if g.masked.len() as u128 != half || g.random.len() as u128 != half {
                return Err(LabError::invalid(format!("group {level} has the wrong size")));
            }
        }
        if p.enforce_hypothesis_budget && p.d < 127 && self.hypothesis_count() as u128 > 1u128 << p.d {
            return Err(LabError::invalid("hypothesis count exceeds 2^d"));
        }
        Ok(())
    }

    pub fn dump(&self) -> AdversaryDump {
        AdversaryDump {
            params: self.params.clone(),
            concept: self.concept.clone(),
            groups: self.groups.clone(),
            event_e: self.event_e(),
        }
    }
}

impl WeakLearner for AdversaryState {
    fn advantage(&self) -> f64 {
        self.params.gamma
    }

    fn domain_size(&self) -> usize {
        self.concept.len()
    }

    fn query(&self, dist: &WeightVector) -> Result<Arc<Hypothesis>> {
        self.respond(dist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_uniform_weights, weighted_error};

    #[test]
    fn built_state_satisfies_invariants() {
        let params = AdversaryParams::new(64, 10, 0.05, 3, 2.0).unwrap();
        let state = build_adversary(&params, 5).unwrap();
        state.check_invariants().unwrap();
        let sizes: Vec<usize> = state.groups().iter().map(|g| g.subset.len()).collect();
        assert_eq!(sizes, vec![64, 32, 16]);
        assert_eq!(state.hypothesis_count(), 193);
        assert!(state.event_e());
    }

    #[test]
    fn deterministic_given_seed() {
        let params = AdversaryParams::new(32, 6, 0.05, 2, 2.0).unwrap();
        let a = build_adversary(&params, 9).unwrap();
        let b = build_adversary(&params, 9).unwrap();
        let c = build_adversary(&params, 10).unwrap();
        assert_eq!(a.concept(), b.concept());
        assert_eq!(a.groups(), b.groups());
        assert_ne!(a.concept(), c.concept());
    }

    #[test]
    fn query_off_x1_gets_first_masked_hypothesis() {
        let params = AdversaryParams::new(64, 10, 0.05, 3, 2.0).unwrap();
        let state = build_adversary(&params, 1).unwrap();
        let x1 = &state.groups()[0].subset;
        let outside: Vec<usize> = (0..128).filter(|x| x1.binary_search(x).is_err()).collect();
        let d = make_uniform_weights(&outside).unwrap();
        let h = state.respond(&d).unwrap();
        assert_eq!(h.id(), state.groups()[0].masked[0].id());
        assert_eq!(weighted_error(&h, state.concept(), &d).unwrap(), 0.0);
        assert!(state.event_e());
    }

    #[test]
    fn explicit_state_falls_back_to_concept() {
        // d = 2, p = 1: two masked and two random hypotheses, all wrong at x = 3
        let params = AdversaryParams {
            m: 3,
            d: 2,
            gamma: 0.05,
            p: 1,
            beta: 2.0,
            enforce_hypothesis_budget: false,
        };
        let concept = Concept::new(vec![1, -1, 1, 1, -1, -1]).unwrap();
        let x = 3;
        let masked = |flip_other: bool| {
            let mut v = concept.labels().to_vec();
            v[x] = -v[x];
            if flip_other {
                v[1] = -v[1];
            }
            v
        };
        let random = |seed: i8| (0..6).map(|i| if i == x { -1 } else if (i as i8 + seed) % 2 == 0 { 1 } else { -1 }).collect::<Vec<_>>();
        let state = AdversaryState::from_parts(
            params,
            concept.clone(),
            vec![(vec![1, 3, 5], vec![masked(false), masked(true)], vec![random(0), random(1)])],
        )
        .unwrap();
        let d = WeightVector::singleton(x);
        // enumerate: every non-fallback hypothesis has error 1 at the singleton
        for h in state.hypotheses().take(4) {
            assert_eq!(weighted_error(h, &concept, &d).unwrap(), 1.0);
        }
        let h = state.respond(&d).unwrap();
        assert_eq!(h.id(), state.fallback().id());
        assert!(!state.event_e());
        // sticky: a query the masked hypotheses can answer does not restore E
        let easy = WeightVector::singleton(0);
        assert_ne!(state.respond(&easy).unwrap().id(), state.fallback().id());
        assert!(!state.event_e());
    }

    #[test]
    fn from_parts_rejects_broken_masking() {
        let params = AdversaryParams {
            m: 2,
            d: 2,
            gamma: 0.05,
            p: 1,
            beta: 2.0,
            enforce_hypothesis_budget: false,
        };
        let concept = Concept::new(vec![1, -1, 1, 1]).unwrap();
        // disagrees at 0, which is outside X_1 = {2, 3}
        let bad = vec![-1, -1, 1, 1];
        assert!(AdversaryState::from_parts(params, concept, vec![(vec![2, 3], vec![bad], vec![])]).is_err());
    }
}
