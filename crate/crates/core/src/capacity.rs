//! Capacities in Möbius form over a flat list of elementary criteria.
//!
//! The elicitation and sampling path works exclusively with 2-additive
//! capacities ([`MobiusCapacity2Add`]). A general Möbius representation over
//! at most [`GENERAL_MAX_CRITERIA`] criteria ([`GeneralMobius`]) is kept for
//! cross-checking the closed forms against the textbook definitions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest criteria count accepted by the exhaustive routines.
pub const GENERAL_MAX_CRITERIA: usize = 12;

/// Default validation tolerance for internally generated capacities.
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("unknown criterion ordinal {ordinal} (capacity has {count} criteria)")]
    UnknownCriterion { ordinal: usize, count: usize },
    #[error("interaction index needs two distinct criteria, got {0} twice")]
    IdenticalCriteria(usize),
    #[error("expected {expected} coefficients, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("exhaustive routines support at most {GENERAL_MAX_CRITERIA} criteria, got {0}")]
    TooManyCriteria(usize),
    #[error("evaluation at position {position} is {value}, expected a finite value in [0, 1]")]
    EvaluationOutOfRange { position: usize, value: f64 },
}

/// Stable identifier of an elementary criterion plus its dense position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementaryCriterionId {
    pub id: String,
    pub ordinal: usize,
}

/// Index arithmetic for the flat coefficient vector of a 2-additive capacity.
///
/// Singletons occupy positions `0..n`, followed by the `n(n-1)/2` unordered
/// pairs in lexicographic order `(0,1), (0,2), ..., (n-2,n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobiusLayout {
    criteria: usize,
}

impl MobiusLayout {
    pub fn new(criteria: usize) -> Self {
        Self { criteria }
    }

    pub fn criteria(&self) -> usize {
        self.criteria
    }

    pub fn pair_count(&self) -> usize {
        self.criteria * self.criteria.saturating_sub(1) / 2
    }

    /// Total number of coefficients (singletons plus pairs).
    pub fn dim(&self) -> usize {
        self.criteria + self.pair_count()
    }

    pub fn singleton(&self, i: usize) -> usize {
        debug_assert!(i < self.criteria);
        i
    }

    /// Position of the pair `{i, j}`; argument order is irrelevant.
    pub fn pair(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.criteria && j < self.criteria);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.criteria + a * (2 * self.criteria - a - 1) / 2 + (b - a - 1)
    }

    /// Iterates `(i, j, position)` over all pairs with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.criteria;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.pair(i, j))))
    }
}

/// Normalized performance of one alternative, one entry per elementary criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationVector(Vec<f64>);

impl EvaluationVector {
    pub fn new(values: Vec<f64>) -> Result<Self, CapacityError> {
        if let Some((position, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(CapacityError::EvaluationOutOfRange { position, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for EvaluationVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A set function over criteria subsets encoded as bitmasks (bit `i` = ordinal `i`).
pub trait SetFunction {
    fn criteria_count(&self) -> usize;
    fn measure_mask(&self, mask: u64) -> f64;
}

fn mask_of(set: &[usize], count: usize) -> Result<u64, CapacityError> {
    set.iter().try_fold(0u64, |mask, &ordinal| {
        if ordinal >= count || ordinal >= 64 {
            Err(CapacityError::UnknownCriterion { ordinal, count })
        } else {
            Ok(mask | (1 << ordinal))
        }
    })
}

/// 2-additive capacity in Möbius form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobiusCapacity2Add {
    singletons: Vec<f64>,
    pairs: Vec<f64>,
}

impl MobiusCapacity2Add {
    pub fn new(singletons: Vec<f64>, pairs: Vec<f64>) -> Result<Self, CapacityError> {
        let layout = MobiusLayout::new(singletons.len());
        if pairs.len() != layout.pair_count() {
            return Err(CapacityError::DimensionMismatch {
                expected: layout.pair_count(),
                actual: pairs.len(),
            });
        }
        Ok(Self { singletons, pairs })
    }

    /// Builds a capacity from a flat vector in [`MobiusLayout`] order.
    pub fn from_vector(criteria: usize, coefficients: &[f64]) -> Result<Self, CapacityError> {
        let layout = MobiusLayout::new(criteria);
        if coefficients.len() != layout.dim() {
            return Err(CapacityError::DimensionMismatch {
                expected: layout.dim(),
                actual: coefficients.len(),
            });
        }
        Ok(Self {
            singletons: coefficients[..criteria].to_vec(),
            pairs: coefficients[criteria..].to_vec(),
        })
    }

    /// Equal singletons `1/n`, all pairs zero.
    pub fn uniform_additive(criteria: usize) -> Self {
        let layout = MobiusLayout::new(criteria);
        Self {
            singletons: vec![1.0 / criteria as f64; criteria],
            pairs: vec![0.0; layout.pair_count()],
        }
    }

    pub fn layout(&self) -> MobiusLayout {
        MobiusLayout::new(self.singletons.len())
    }

    pub fn criteria_count(&self) -> usize {
        self.singletons.len()
    }

    pub fn singletons(&self) -> &[f64] {
        &self.singletons
    }

    pub fn pairs(&self) -> &[f64] {
        &self.pairs
    }

    pub fn singleton(&self, i: usize) -> f64 {
        self.singletons[i]
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.pairs[self.layout().pair(i, j) - self.criteria_count()]
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = self.singletons.clone();
        v.extend_from_slice(&self.pairs);
        v
    }

    fn check(&self, i: usize) -> Result<(), CapacityError> {
        if i >= self.criteria_count() {
            Err(CapacityError::UnknownCriterion {
                ordinal: i,
                count: self.criteria_count(),
            })
        } else {
            Ok(())
        }
    }

    /// `μ(S) = Σ_{R⊆S} m(R)`.
    pub fn capacity(&self, set: &[usize]) -> Result<f64, CapacityError> {
        for &i in set {
            self.check(i)?;
        }
        let mut members: Vec<usize> = set.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut total = 0.0;
        for (k, &i) in members.iter().enumerate() {
            total += self.singletons[i];
            for &j in &members[k + 1..] {
                total += self.pair(i, j);
            }
        }
        Ok(total)
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut violations = Vec::new();
        let sum: f64 = self.singletons.iter().sum::<f64>() + self.pairs.iter().sum::<f64>();
        if (sum - 1.0).abs() > tol {
            violations.push(Violation::Normalization {
                sum,
                residual: sum - 1.0,
            });
        }
        let n = self.criteria_count();
        for i in 0..n {
            let single = self.singletons[i];
            if single < -tol {
                violations.push(Violation::NegativeSingleton {
                    criterion: i,
                    value: single,
                });
            }
            // The most negative subset sum uses exactly the negative pair terms.
            let worst = single
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.pair(i, j).min(0.0))
                    .sum::<f64>();
            if worst < -tol {
                violations.push(Violation::Monotonicity {
                    criterion: i,
                    worst_sum: worst,
                });
            }
        }
        ValidationReport { violations }
    }

    /// Σ m({i})·x_i + Σ m({i,j})·min(x_i, x_j).
    pub fn choquet(&self, x: &EvaluationVector) -> Result<f64, CapacityError> {
        self.expect_len(x.len())?;
        Ok(self.choquet_unchecked(x.values()))
    }

    pub(crate) fn choquet_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.criteria_count();
        let mut total: f64 = self.singletons.iter().zip(x).map(|(m, v)| m * v).sum();
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                total += self.pairs[k] * x[i].min(x[j]);
                k += 1;
            }
        }
        total
    }

    fn expect_len(&self, len: usize) -> Result<(), CapacityError> {
        if len != self.criteria_count() {
            Err(CapacityError::DimensionMismatch {
                expected: self.criteria_count(),
                actual: len,
            })
        } else {
            Ok(())
        }
    }

    /// `φ(i) = m({i}) + ½ Σ_{j≠i} m({i,j})`.
    pub fn shapley(&self, i: usize) -> Result<f64, CapacityError> {
        self.check(i)?;
        let n = self.criteria_count();
        Ok(self.singletons[i]
            + 0.5
                * (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.pair(i, j))
                    .sum::<f64>())
    }

    /// For 2-additive capacities the pairwise interaction index is the pair coefficient.
    pub fn interaction(&self, i: usize, j: usize) -> Result<f64, CapacityError> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(CapacityError::IdenticalCriteria(i));
        }
        Ok(self.pair(i, j))
    }
}

impl SetFunction for MobiusCapacity2Add {
    fn criteria_count(&self) -> usize {
        self.singletons.len()
    }

    fn measure_mask(&self, mask: u64) -> f64 {
        let n = self.criteria_count();
        let mut total = 0.0;
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            total += self.singletons[i];
            for j in ((i + 1)..n).filter(|j| mask & (1 << j) != 0) {
                total += self.pair(i, j);
            }
        }
        total
    }
}

/// One failed constraint in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "kebab-case")]
pub enum Violation {
    /// Coefficients do not sum to one.
    Normalization { sum: f64, residual: f64 },
    NegativeSingleton { criterion: usize, value: f64 },
    /// `m({i}) + Σ_{j: m(ij)<0} m({i,j})` is negative.
    Monotonicity { criterion: usize, worst_sum: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Möbius representation over every subset of a small criteria set.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMobius {
    criteria: usize,
    values: Vec<f64>,
}

impl GeneralMobius {
    /// `values[mask]` is `m(T)` for the subset encoded by `mask`; `values[0]` must be 0.
    pub fn new(criteria: usize, values: Vec<f64>) -> Result<Self, CapacityError> {
        if criteria > GENERAL_MAX_CRITERIA {
            return Err(CapacityError::TooManyCriteria(criteria));
        }
        if values.len() != 1 << criteria {
            return Err(CapacityError::DimensionMismatch {
                expected: 1 << criteria,
                actual: values.len(),
            });
        }
        Ok(Self { criteria, values })
    }

    pub fn from_2additive(m: &MobiusCapacity2Add) -> Result<Self, CapacityError> {
        let n = m.criteria_count();
        if n > GENERAL_MAX_CRITERIA {
            return Err(CapacityError::TooManyCriteria(n));
        }
        let mut values = vec![0.0; 1 << n];
        for i in 0..n {
            values[1 << i] = m.singleton(i);
            for j in (i + 1)..n {
                values[(1 << i) | (1 << j)] = m.pair(i, j);
            }
        }
        Ok(Self {
            criteria: n,
            values,
        })
    }

    pub fn value(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn capacity(&self, set: &[usize]) -> Result<f64, CapacityError> {
        Ok(self.measure_mask(mask_of(set, self.criteria)?))
    }

    /// Full monotonicity check: `Σ_{T⊆S} m(T ∪ {i}) ≥ -tol` for all `i` and `S ⊆ G∖{i}`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        let full = (1u64 << self.criteria) - 1;
        (0..self.criteria).all(|i| {
            let bit = 1u64 << i;
            let rest = full & !bit;
            subsets(rest).all(|s| subsets(s).map(|t| self.value(t | bit)).sum::<f64>() >= -tol)
        })
    }

    /// `Σ_T m(T) · min_{i∈T} x_i`.
    pub fn choquet(&self, x: &[f64]) -> f64 {
        (1..self.values.len())
            .map(|mask| {
                let low = (0..self.criteria)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| x[i])
                    .fold(f64::INFINITY, f64::min);
                self.values[mask] * low
            })
            .sum()
    }
}

impl SetFunction for GeneralMobius {
    fn criteria_count(&self) -> usize {
        self.criteria
    }

    fn measure_mask(&self, mask: u64) -> f64 {
        subsets(mask).map(|t| self.value(t)).sum()
    }
}

/// All submasks of `mask`, including `mask` itself and 0.
pub(crate) fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            Some((current - 1) & mask)
        };
        Some(current)
    })
}

/// Choquet integral by the sorted-evaluations definition.
///
/// Ties are ordered by criterion ordinal; the value does not depend on it.
pub fn choquet_sorted<F: SetFunction + ?Sized>(mu: &F, x: &[f64]) -> f64 {
    let n = mu.criteria_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut upper: u64 = order.iter().fold(0, |m, &i| m | (1 << i));
    let mut previous = 0.0;
    let mut total = 0.0;
    for &i in &order {
        total += (x[i] - previous) * mu.measure_mask(upper);
        previous = x[i];
        upper &= !(1 << i);
    }
    total
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// Shapley value from the permutation-weighted marginal contributions.
pub fn shapley_exhaustive<F: SetFunction + ?Sized>(mu: &F, i: usize) -> Result<f64, CapacityError> {
    let n = mu.criteria_count();
    if n > GENERAL_MAX_CRITERIA {
        return Err(CapacityError::TooManyCriteria(n));
    }
    if i >= n {
        return Err(CapacityError::UnknownCriterion { ordinal: i, count: n });
    }
    let fact = factorials(n);
    let bit = 1u64 << i;
    let rest = ((1u64 << n) - 1) & !bit;
    Ok(subsets(rest)
        .map(|t| {
            let size = t.count_ones() as usize;
            let weight = fact[n - size - 1] * fact[size] / fact[n];
            weight * (mu.measure_mask(t | bit) - mu.measure_mask(t))
        })
        .sum())
}

/// Pairwise interaction index from its defining sum over coalitions.
pub fn interaction_exhaustive<F: SetFunction + ?Sized>(
    mu: &F,
    i: usize,
    j: usize,
) -> Result<f64, CapacityError> {
    let n = mu.criteria_count();
    if n > GENERAL_MAX_CRITERIA {
        return Err(CapacityError::TooManyCriteria(n));
    }
    for k in [i, j] {
        if k >= n {
            return Err(CapacityError::UnknownCriterion { ordinal: k, count: n });
        }
    }
    if i == j {
        return Err(CapacityError::IdenticalCriteria(i));
    }
    let fact = factorials(n);
    let (bi, bj) = (1u64 << i, 1u64 << j);
    let rest = ((1u64 << n) - 1) & !bi & !bj;
    Ok(subsets(rest)
        .map(|t| {
            let size = t.count_ones() as usize;
            let weight = fact[n - size - 2] * fact[size] / fact[n - 1];
            weight
                * (mu.measure_mask(t | bi | bj) - mu.measure_mask(t | bi) - mu.measure_mask(t | bj)
                    + mu.measure_mask(t))
        })
        .sum())
}
