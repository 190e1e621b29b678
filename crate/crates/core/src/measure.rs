//! Signed measures, node subsets and external fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signed atomic measure on the node universe: one weight per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn zeros(m: usize) -> Self {
        Self::new(vec![0.0; m])
    }

    /// Point mass `mass` at node `index`.
    pub fn atom(m: usize, index: usize, mass: f64) -> Self {
        let mut w = vec![0.0; m];
        w[index] = mass;
        Self::new(w)
    }

    /// Embeds `values` (one per element of `set`) into the full universe.
    pub fn embed(m: usize, set: &SupportSet, values: &[f64]) -> Self {
        let mut w = vec![0.0; m];
        for (&i, &v) in set.indices().iter().zip(values) {
            w[i] = v;
        }
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Values of the measure at the nodes of `set`, in set order.
    pub fn restricted(&self, set: &SupportSet) -> Vec<f64> {
        set.indices().iter().map(|&i| self.weights[i]).collect()
    }

    pub fn positive_part(&self) -> Self {
        Self::new(self.weights.iter().map(|&w| w.max(0.0)).collect())
    }

    pub fn negative_part(&self) -> Self {
        Self::new(self.weights.iter().map(|&w| (-w).max(0.0)).collect())
    }

    /// |μ| = μ⁺ + μ⁻.
    pub fn variation(&self) -> Self {
        Self::new(self.weights.iter().map(|w| w.abs()).collect())
    }

    /// μ(X), the signed total mass.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_positive(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    pub fn scaled(&self, q: f64) -> Self {
        Self::new(self.weights.iter().map(|w| q * w).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.weights.iter().zip(&other.weights).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// True iff every node carrying nonzero weight lies in `set`.
    pub fn is_carried_by(&self, set: &SupportSet) -> bool {
        self.weights
            .iter()
            .enumerate()
            .all(|(i, &w)| w == 0.0 || set.contains(i))
    }

    /// Nodes with weight strictly above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > threshold)
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn check_len(&self, m: usize) -> Result<()> {
        if self.weights.len() != m {
            return Err(Error::SizeMismatch {
                expected: m,
                found: self.weights.len(),
            });
        }
        Ok(())
    }
}

/// Nonempty, strictly increasing list of node indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<usize>,
    #[serde(default)]
    label: String,
}

impl SupportSet {
    /// Sorts `indices`; rejects empty input, duplicates and indices `>= m`.
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSupport("empty set".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSupport("duplicate index".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= m {
                return Err(Error::InvalidSupport(format!(
                    "index {last} out of range for {m} nodes"
                )));
            }
        }
        Ok(Self {
            indices,
            label: String::new(),
        })
    }

    pub fn full(m: usize) -> Result<Self> {
        Self::new((0..m).collect(), m)
    }

    pub fn range(range: std::ops::Range<usize>, m: usize) -> Result<Self> {
        Self::new(range.collect(), m)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Position of node `i` within the set.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.binary_search(&i).ok()
    }

    /// Upper bound on valid node indices is not stored; callers validate
    /// against the kernel with this.
    pub(crate) fn check_universe(&self, m: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last < m => Ok(()),
            Some(&last) => Err(Error::InvalidSupport(format!(
                "index {last} out of range for {m} nodes"
            ))),
            None => Err(Error::InvalidSupport("empty set".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldOrigin {
    /// f = −U^ω for a charge ω.
    FromCharge,
    Direct,
}

/// External field f on the node universe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
    origin: FieldOrigin,
}

impl Field {
    pub fn direct(values: Vec<f64>) -> Self {
        Self {
            values,
            origin: FieldOrigin::Direct,
        }
    }

    /// f = −K·ω.
    pub fn from_charge(kernel: &crate::KernelMatrix, omega: &Measure) -> Result<Self> {
        let u = crate::energy::potential(kernel, omega)?;
        Ok(Self {
            values: u.into_iter().map(|v| -v).collect(),
            origin: FieldOrigin::FromCharge,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> FieldOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
