//! Performance tables: alternatives × elementary criteria.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::Direction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("performance table has no alternatives")]
    NoAlternatives,
    #[error("performance table has no criteria")]
    NoCriteria,
    #[error("row {row} has {actual} values, expected {expected}")]
    Shape { row: usize, expected: usize, actual: usize },
    #[error("duplicate alternative id `{0}`")]
    DuplicateAlternative(String),
    #[error("value of `{alternative}` on `{criterion}` is not finite")]
    NonFinite { alternative: String, criterion: String },
    #[error("criterion `{0}` is constant across alternatives; min-max normalization is undefined")]
    ConstantColumn(String),
    #[error("value of `{alternative}` on `{criterion}` is {value}, outside [0, 1]")]
    OutOfRange {
        alternative: String,
        criterion: String,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub id: String,
    pub name: String,
}

impl Alternative {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            name: id.clone(),
            id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTable {
    pub alternatives: Vec<Alternative>,
    /// Criterion ids in elementary-ordinal order.
    pub criteria: Vec<String>,
    pub directions: Vec<Direction>,
    pub raw: Vec<Vec<f64>>,
    pub normalized: Vec<Vec<f64>>,
}

impl PerformanceTable {
    /// Builds a table from raw evaluations and min-max normalizes every column.
    pub fn new(
        alternatives: Vec<Alternative>,
        criteria: Vec<String>,
        directions: Vec<Direction>,
        raw: Vec<Vec<f64>>,
    ) -> Result<Self, TableError> {
        check_shape(&alternatives, &criteria, &raw)?;
        let normalized = normalize(&raw, &directions, &criteria)?;
        Ok(Self {
            alternatives,
            criteria,
            directions,
            raw,
            normalized,
        })
    }

    /// Builds a table whose evaluations are already on the [0, 1] scale; no rescaling is applied.
    pub fn from_evaluations(
        alternatives: Vec<Alternative>,
        criteria: Vec<String>,
        evaluations: Vec<Vec<f64>>,
    ) -> Result<Self, TableError> {
        check_shape(&alternatives, &criteria, &evaluations)?;
        for (a, row) in alternatives.iter().zip(&evaluations) {
            for (c, &value) in criteria.iter().zip(row) {
                if !(0.0..=1.0).contains(&value) {
                    return Err(TableError::OutOfRange {
                        alternative: a.id.clone(),
                        criterion: c.clone(),
                        value,
                    });
                }
            }
        }
        Ok(Self {
            directions: vec![Direction::Increasing; criteria.len()],
            alternatives,
            criteria,
            raw: evaluations.clone(),
            normalized: evaluations,
        })
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    pub fn criteria_count(&self) -> usize {
        self.criteria.len()
    }

    pub fn alternative_index(&self, id: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a.id == id)
    }

    /// Normalized evaluations of alternative `a`.
    pub fn row(&self, a: usize) -> &[f64] {
        &self.normalized[a]
    }

    pub fn ids(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.id.clone()).collect()
    }
}

fn check_shape(
    alternatives: &[Alternative],
    criteria: &[String],
    rows: &[Vec<f64>],
) -> Result<(), TableError> {
    if alternatives.is_empty() {
        return Err(TableError::NoAlternatives);
    }
    if criteria.is_empty() {
        return Err(TableError::NoCriteria);
    }
    if rows.len() != alternatives.len() {
        return Err(TableError::Shape {
            row: rows.len(),
            expected: alternatives.len(),
            actual: rows.len(),
        });
    }
    let mut seen = HashSet::new();
    for (i, (a, row)) in alternatives.iter().zip(rows).enumerate() {
        if !seen.insert(a.id.as_str()) {
            return Err(TableError::DuplicateAlternative(a.id.clone()));
        }
        if row.len() != criteria.len() {
            return Err(TableError::Shape {
                row: i,
                expected: criteria.len(),
                actual: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(TableError::NonFinite {
                alternative: a.id.clone(),
                criterion: criteria[j].clone(),
            });
        }
    }
    Ok(())
}

/// Min-max normalization per column; decreasing criteria are reversed so that 1 is always best.
pub fn normalize(
    raw: &[Vec<f64>],
    directions: &[Direction],
    criteria: &[String],
) -> Result<Vec<Vec<f64>>, TableError> {
    let mut out = vec![vec![0.0; directions.len()]; raw.len()];
    for (j, direction) in directions.iter().enumerate() {
        let (lo, hi) = raw
            .iter()
            .map(|row| row[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi <= lo {
            return Err(TableError::ConstantColumn(criteria[j].clone()));
        }
        let span = hi - lo;
        for (row, target) in raw.iter().zip(out.iter_mut()) {
            target[j] = match direction {
                Direction::Increasing => (row[j] - lo) / span,
                Direction::Decreasing => (hi - row[j]) / span,
            };
        }
    }
    Ok(out)
}
