//! Finite domains, ±1 labelings, training sets and distributions over indices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A ±1 label. Stored as `i8`; only `-1` and `+1` are ever admitted.
pub type Label = i8;

/// Absolute tolerance on `Σ weights = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

fn check_labels(labels: &[Label], what: &str) -> Result<()> {
    match labels.iter().position(|&l| l != 1 && l != -1) {
        Some(i) => Err(LabError::invalid(format!(
            "{what} entry {i} is {}, expected -1 or +1",
            labels[i]
        ))),
        None => Ok(()),
    }
}

#[inline]
pub fn sign(v: i64) -> Label {
    if v >= 0 {
        1
    } else {
        -1
    }
}

/// The unstructured point set `{0, .., size-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteDomain {
    size: usize,
}

impl FiniteDomain {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(LabError::invalid(format!("domain size {size} < 2")));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.size
    }
}

#[derive(Deserialize)]
struct ConceptRepr {
    labels: Vec<Label>,
}

/// The unknown target labeling `c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConceptRepr")]
pub struct Concept {
    labels: Vec<Label>,
}

impl TryFrom<ConceptRepr> for Concept {
    type Error = LabError;
    fn try_from(r: ConceptRepr) -> Result<Self> {
        Concept::new(r.labels)
    }
}

impl Concept {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        check_labels(&labels, "concept")?;
        Ok(Self { labels })
    }

    /// I.i.d. uniform ±1 labels.
    pub fn random<R: Rng + ?Sized>(domain: FiniteDomain, rng: &mut R) -> Self {
        let labels = (0..domain.size())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self { labels }
    }

    pub fn domain(&self) -> FiniteDomain {
        FiniteDomain { size: self.labels.len() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn label(&self, x: usize) -> Label {
        self.labels[x]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// The concept viewed as a hypothesis with the given id.
    pub fn as_hypothesis(&self, id: usize) -> Hypothesis {
        Hypothesis {
            id,
            predictions: self.labels.clone(),
        }
    }
}

#[derive(Deserialize)]
struct HypothesisRepr {
    id: usize,
    predictions: Vec<Label>,
}

/// A dense ±1 prediction vector over the domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HypothesisRepr")]
pub struct Hypothesis {
    id: usize,
    predictions: Vec<Label>,
}

impl TryFrom<HypothesisRepr> for Hypothesis {
    type Error = LabError;
    fn try_from(r: HypothesisRepr) -> Result<Self> {
        Hypothesis::new(r.id, r.predictions)
    }
}

impl Hypothesis {
    pub fn new(id: usize, predictions: Vec<Label>) -> Result<Self> {
        check_labels(&predictions, "hypothesis")?;
        Ok(Self { id, predictions })
    }

    pub fn constant(id: usize, domain: FiniteDomain, label: Label) -> Result<Self> {
        Self::new(id, vec![label; domain.size()])
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    #[inline]
    pub fn predict(&self, x: usize) -> Label {
        self.predictions[x]
    }

    pub fn predictions(&self) -> &[Label] {
        &self.predictions
    }

    /// `-h`, carrying a new id.
    pub fn negated(&self, id: usize) -> Self {
        Self {
            id,
            predictions: self.predictions.iter().map(|&l| -l).collect(),
        }
    }
}

#[derive(Deserialize)]
struct TrainingSetRepr {
    indices: Vec<usize>,
    labels: Vec<Label>,
}

/// A labeled multiset sample `S, c(S)`. Position `i` in `indices` is
/// training slot `i`; duplicate domain points occupy separate slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TrainingSetRepr")]
pub struct TrainingSet {
    indices: Vec<usize>,
    labels: Vec<Label>,
}

impl TryFrom<TrainingSetRepr> for TrainingSet {
    type Error = LabError;
    fn try_from(r: TrainingSetRepr) -> Result<Self> {
        check_labels(&r.labels, "training label")?;
        if r.indices.len() != r.labels.len() {
            return Err(LabError::invalid("training indices and labels differ in length"));
        }
        if r.indices.is_empty() {
            return Err(LabError::invalid("empty training set"));
        }
        Ok(Self {
            indices: r.indices,
            labels: r.labels,
        })
    }
}

impl TrainingSet {
    /// Labels the given domain indices with the concept.
    pub fn new(concept: &Concept, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(LabError::invalid("empty training set"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= concept.len()) {
            return Err(LabError::invalid(format!(
                "training index {bad} outside domain of size {}",
                concept.len()
            )));
        }
        let labels = indices.iter().map(|&i| concept.label(i)).collect();
        Ok(Self { indices, labels })
    }

    /// `m` i.i.d. uniform draws from the domain.
    pub fn sample_uniform<R: Rng + ?Sized>(concept: &Concept, m: usize, rng: &mut R) -> Result<Self> {
        let n = concept.len();
        let indices = (0..m).map(|_| rng.random_range(0..n)).collect();
        Self::new(concept, indices)
    }

    /// Checks that every stored label matches `concept`.
    pub fn validate_against(&self, concept: &Concept) -> Result<()> {
        for (slot, (&x, &y)) in self.indices.iter().zip(&self.labels).enumerate() {
            if x >= concept.len() || concept.label(x) != y {
                return Err(LabError::invalid(format!(
                    "training slot {slot} (point {x}) disagrees with the concept"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn point(&self, slot: usize) -> usize {
        self.indices[slot]
    }

    #[inline]
    pub fn label(&self, slot: usize) -> Label {
        self.labels[slot]
    }

    /// Sorted distinct domain points.
    pub fn distinct_points(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Largest referenced domain index plus one.
    pub fn min_domain_size(&self) -> usize {
        self.indices.iter().max().map_or(0, |&x| x + 1)
    }
}

/// A probability distribution over a finite set of indices.
///
/// The support is kept sorted and duplicate-free; constructing from a list
/// with repeated indices merges their mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Builds a distribution from `(index, mass)` pairs, merging repeated
    /// indices and renormalizing to total mass one.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(LabError::invalid("empty support"));
        }
        if let Some(&(i, w)) = pairs.iter().find(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(LabError::invalid(format!("weight {w} at index {i} is not a nonnegative number")));
        }
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let mut support = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            if support.last() == Some(&i) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(i);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(LabError::invalid("distribution has zero total mass"));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { support, weights })
    }

    /// Uniform mass over the listed entries; repeats accumulate mass.
    pub fn uniform(support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(LabError::invalid("empty support"));
        }
        let mass = 1.0 / support.len() as f64;
        Self::from_pairs(support.iter().map(|&i| (i, mass)))
    }

    pub fn singleton(index: usize) -> Self {
        Self {
            support: vec![index],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// Mass on `index` (zero off the support).
    pub fn mass(&self, index: usize) -> f64 {
        self.support
            .binary_search(&index)
            .map_or(0.0, |pos| self.weights[pos])
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.support.last().copied()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }
}

/// Uniform distribution over `support`.
pub fn make_uniform_weights(support: &[usize]) -> Result<WeightVector> {
    WeightVector::uniform(support)
}

/// `Pr_{x~D}[h(x) != c(x)]`, summed exactly over the support of `D`.
pub fn weighted_error(h: &Hypothesis, c: &Concept, dist: &WeightVector) -> Result<f64> {
    if h.len() != c.len() {
        return Err(LabError::invalid(format!(
            "hypothesis length {} differs from concept length {}",
            h.len(),
            c.len()
        )));
    }
    if let Some(max) = dist.max_index() {
        if max >= c.len() {
            return Err(LabError::invalid(format!(
                "distribution index {max} outside domain of size {}",
                c.len()
            )));
        }
    }
    Ok(weighted_error_unchecked(h, c, dist))
}

#[inline]
pub(crate) fn weighted_error_unchecked(h: &Hypothesis, c: &Concept, dist: &WeightVector) -> f64 {
    dist.iter()
        .filter(|&(x, _)| h.predict(x) != c.label(x))
        .map(|(_, w)| w)
        .sum()
}
