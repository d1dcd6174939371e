//! Synthetic training sets paired with weak learners that honor the
//! `1/2 - γ` contract.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Concept, FiniteDomain, Hypothesis, Label, TrainingSet};
use crate::error::{LabError, Result};
use crate::oracle::ErmOracle;
use crate::rng;

/// Most cover hypotheses a finite-class dataset uses.
const MAX_COVER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    /// Points on a line labeled by a threshold; the class holds every
    /// threshold and polarity.
    RealizableByStumps,
    /// A random concept with a class of noisy copies: every point is
    /// mislabeled by the same number of copies, so any distribution has a
    /// copy with error at most `1/2 - γ`.
    FiniteClass,
    /// The class `{-c}`: every query violates the contract.
    Negated,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::RealizableByStumps => "realizable-by-stumps",
            DatasetKind::FiniteClass => "finite-class",
            DatasetKind::Negated => "negated",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "realizable-by-stumps" | "stumps" => Ok(DatasetKind::RealizableByStumps),
            "finite-class" => Ok(DatasetKind::FiniteClass),
            "negated" => Ok(DatasetKind::Negated),
            _ => Err(LabError::InvalidInput(format!("unknown dataset kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    /// Training-set size; the domain has `2m` points.
    pub m: usize,
    /// Class-size budget for finite-class (`|H| <= 2^d`); ignored otherwise.
    pub d: u32,
    pub gamma: f64,
    /// Whether the concept itself joins the class.
    pub include_concept: bool,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, m: usize, d: u32, gamma: f64) -> Self {
        Self {
            kind,
            m,
            d,
            gamma,
            include_concept: true,
        }
    }

    pub fn without_concept(mut self) -> Self {
        self.include_concept = false;
        self
    }

    /// Number of noisy copies and how many of them mislabel each point.
    fn cover_shape(&self) -> (usize, usize) {
        let k = if self.d >= 63 { MAX_COVER } else { MAX_COVER.min((1usize << self.d) - 1) };
        let flips = (k as f64 * (0.5 - self.gamma) + 1e-9).floor() as usize;
        (k, flips)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(LabError::invalid("m must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(LabError::invalid(format!("gamma {} outside (0, 1/2)", self.gamma)));
        }
        if self.kind == DatasetKind::FiniteClass {
            if self.d < 2 {
                return Err(LabError::invalid("finite-class needs d >= 2"));
            }
            let (k, flips) = self.cover_shape();
            if flips == 0 {
                return Err(LabError::invalid(format!(
                    "gamma {} leaves no room for noise with {k} copies",
                    self.gamma
                )));
            }
        }
        Ok(())
    }

    /// VC-dimension bound of the class.
    pub fn vc_dim(&self) -> u32 {
        match self.kind {
            DatasetKind::RealizableByStumps => 2,
            DatasetKind::FiniteClass => self.d,
            DatasetKind::Negated => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub concept: Concept,
    pub sample: TrainingSet,
    pub oracle: ErmOracle,
}

impl Dataset {
    pub fn vc_dim(&self) -> u32 {
        self.spec.vc_dim()
    }
}

/// Builds a concept over `2m` points, a sample of `m` uniform draws and an
/// ERM weak learner over the kind's class.
pub fn synthesize_dataset(spec: &DatasetSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let domain = FiniteDomain::new(2 * spec.m)?;
    let n = domain.size();
    let mut concept_rng = rng::stream(seed, &[0]);
    let mut class_rng = rng::stream(seed, &[1]);
    let (concept, mut class) = match spec.kind {
        DatasetKind::RealizableByStumps => {
            let threshold = concept_rng.random_range(1..n);
            let polarity: Label = if concept_rng.random_bool(0.5) { 1 } else { -1 };
            let stump = |t: usize, s: Label| (0..n).map(|x| if x < t { s } else { -s }).collect::<Vec<_>>();
            let concept = Concept::new(stump(threshold, polarity))?;
            let mut class = Vec::with_capacity(2 * (n + 1));
            for t in 0..=n {
                for (j, s) in [1, -1].into_iter().enumerate() {
                    if !(t == threshold && s == polarity) {
                        class.push(Hypothesis::new(2 * t + j, stump(t, s))?);
                    }
                }
            }
            (concept, class)
        }
        DatasetKind::FiniteClass => {
            let concept = Concept::random(domain, &mut concept_rng);
            let (k, flips) = spec.cover_shape();
            let mut preds: Vec<Vec<Label>> = vec![concept.labels().to_vec(); k];
            for x in 0..n {
                for j in index::sample(&mut class_rng, k, flips) {
                    preds[j][x] = -preds[j][x];
                }
            }
            let class = preds
                .into_iter()
                .enumerate()
                .map(|(id, p)| Hypothesis::new(id, p))
                .collect::<Result<Vec<_>>>()?;
            (concept, class)
        }
        DatasetKind::Negated => {
            let concept = Concept::random(domain, &mut concept_rng);
            let negated = concept.as_hypothesis(0).negated(0);
            return Ok(Dataset {
                spec: *spec,
                sample: TrainingSet::sample_uniform(&concept, spec.m, &mut rng::stream(seed, &[2]))?,
                oracle: ErmOracle::new(concept.clone(), vec![negated], spec.gamma)?,
                concept,
            });
        }
    };
    if spec.include_concept {
        let id = class.iter().map(|h| h.id() + 1).max().unwrap_or(0);
        class.push(concept.as_hypothesis(id));
    }
    let sample = TrainingSet::sample_uniform(&concept, spec.m, &mut rng::stream(seed, &[2]))?;
    let oracle = ErmOracle::new(concept.clone(), class, spec.gamma)?;
    Ok(Dataset {
        spec: *spec,
        concept,
        sample,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{weighted_error, WeightVector};

    #[test]
    fn finite_class_shape() {
        let spec = DatasetSpec::new(DatasetKind::FiniteClass, 50, 5, 0.1).without_concept();
        let ds = synthesize_dataset(&spec, 3).unwrap();
        assert_eq!(ds.oracle.class().len(), 20);
        assert_eq!(ds.sample.len(), 50);
        // each point is mislabeled by exactly floor(20 * 0.4) = 8 copies
        for x in 0..100 {
            let wrong = ds.oracle.class().iter().filter(|h| h.predict(x) != ds.concept.label(x)).count();
            assert_eq!(wrong, 8);
        }
        let with_c = synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 50, 5, 0.1), 3).unwrap();
        assert_eq!(with_c.oracle.class().len(), 21);
        assert!(with_c.oracle.class().len() <= 1 << 5);
    }

    #[test]
    fn stumps_contain_concept_exactly_once() {
        let ds = synthesize_dataset(&DatasetSpec::new(DatasetKind::RealizableByStumps, 10, 2, 0.2), 1).unwrap();
        let perfect = ds.oracle.class().iter().filter(|h| h.predictions() == ds.concept.labels()).count();
        assert_eq!(perfect, 1);
        assert_eq!(ds.vc_dim(), 2);
    }

    #[test]
    fn cover_meets_contract_on_random_distributions() {
        let ds = synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 30, 4, 0.15).without_concept(), 9).unwrap();
        let mut r = rng::stream(4, &[]);
        for _ in 0..200 {
            let d = WeightVector::from_pairs((0..60).map(|x| (x, r.random::<f64>()))).unwrap();
            let best = ds.oracle.class().iter().map(|h| weighted_error(h, &ds.concept, &d).unwrap()).fold(1.0, f64::min);
            assert!(best <= 0.35 + 1e-12);
        }
    }

    #[test]
    fn infeasible_and_deterministic() {
        assert!(synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 10, 1, 0.1), 0).is_err());
        assert!(synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 10, 2, 0.4), 0).is_err());
        assert!(synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 0, 5, 0.1), 0).is_err());
        let spec = DatasetSpec::new(DatasetKind::FiniteClass, 100, 5, 0.1);
        let (a, b) = (synthesize_dataset(&spec, 5).unwrap(), synthesize_dataset(&spec, 5).unwrap());
        assert_eq!((a.concept, a.sample, a.oracle.class()), (b.concept, b.sample, b.oracle.class()));
    }
}
