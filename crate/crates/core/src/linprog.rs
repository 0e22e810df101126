//! Dense two-phase simplex for desk-scale linear programs.
//!
//! Besides ordinary linear rows, a [`LinearConstraintSystem`] can carry
//! [`NegativePartConstraint`]s of the form `a·x + Σ_k min(0, x_k) ≥ b`. These
//! are concave and describe a polyhedron that would need exponentially many
//! linear rows. The solver lowers them exactly by reusing the negative part of
//! the split free variables, and the hit-and-run sampler handles them in
//! closed form along each chord.
//!
//! Pivoting follows Bland's rule, so the solver always terminates and
//! identical inputs produce bitwise-identical outputs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feasibility classification tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("constraint system is infeasible")]
    Infeasible,
    #[error("polytope has an empty interior (largest inscribed radius {radius:.3e})")]
    EmptyInterior { radius: f64 },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("simplex exceeded {MAX_PIVOTS} pivots")]
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Free,
    NonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
    /// Provenance: which statement or base constraint produced this row.
    pub tag: String,
}

/// `coefficients·x + Σ_{k ∈ terms} min(0, x_k) ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativePartConstraint {
    pub coefficients: Vec<f64>,
    pub terms: Vec<usize>,
    pub rhs: f64,
    pub tag: String,
}

impl NegativePartConstraint {
    fn lhs(&self, point: &[f64]) -> f64 {
        dot(&self.coefficients, point) + self.terms.iter().map(|&k| point[k].min(0.0)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraintSystem {
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub negative_part: Vec<NegativePartConstraint>,
    /// Maximized by [`solve_max`].
    pub objective: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearConstraintSystem {
    pub fn new(variables: Vec<Variable>) -> Self {
        let n = variables.len();
        Self {
            variables,
            constraints: Vec::new(),
            negative_part: Vec::new(),
            objective: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn push(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64, tag: impl Into<String>) {
        self.constraints.push(LinearConstraint {
            coefficients,
            relation,
            rhs,
            tag: tag.into(),
        });
    }

    pub fn push_negative_part(
        &mut self,
        coefficients: Vec<f64>,
        terms: Vec<usize>,
        rhs: f64,
        tag: impl Into<String>,
    ) {
        self.negative_part.push(NegativePartConstraint {
            coefficients,
            terms,
            rhs,
            tag: tag.into(),
        });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.dim();
        if self.objective.len() != n {
            return Err(LpError::Malformed(format!(
                "objective has {} coefficients for {n} variables",
                self.objective.len()
            )));
        }
        let mut tags = std::collections::HashSet::new();
        let rows = self
            .constraints
            .iter()
            .map(|c| (&c.tag, &c.coefficients, c.rhs))
            .chain(self.negative_part.iter().map(|c| (&c.tag, &c.coefficients, c.rhs)));
        for (tag, coefficients, rhs) in rows {
            if tag.is_empty() {
                return Err(LpError::Malformed("constraint with empty provenance tag".into()));
            }
            if !tags.insert(tag.as_str()) {
                return Err(LpError::Malformed(format!("duplicate provenance tag `{tag}`")));
            }
            if coefficients.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint `{tag}` has {} coefficients for {n} variables",
                    coefficients.len()
                )));
            }
            if !rhs.is_finite() || coefficients.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed(format!("constraint `{tag}` is not finite")));
            }
        }
        for c in &self.negative_part {
            if let Some(&k) = c.terms.iter().find(|&&k| k >= n) {
                return Err(LpError::Malformed(format!(
                    "constraint `{}` references unknown variable {k}",
                    c.tag
                )));
            }
        }
        Ok(())
    }

    /// Slack of every constraint at `point`, linear rows first. Equalities report `-|residual|`.
    pub fn slacks(&self, point: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .constraints
            .iter()
            .map(|c| {
                let lhs = dot(&c.coefficients, point);
                match c.relation {
                    Relation::Le => c.rhs - lhs,
                    Relation::Ge => lhs - c.rhs,
                    Relation::Eq => -(lhs - c.rhs).abs(),
                }
            })
            .collect();
        out.extend(self.negative_part.iter().map(|c| c.lhs(point) - c.rhs));
        out.extend(
            self.variables
                .iter()
                .zip(point)
                .filter(|(v, _)| v.domain == Domain::NonNegative)
                .map(|(_, &x)| x),
        );
        out
    }

    /// Smallest slack over all constraints and variable bounds (`+∞` if there are none).
    pub fn min_slack(&self, point: &[f64]) -> f64 {
        self.slacks(point).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_satisfied(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.dim() && self.min_slack(point) >= -tol
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Substitutes a constant for one variable and removes it from the system.
    pub fn fix_variable(&self, index: usize, value: f64) -> Result<Self, LpError> {
        if index >= self.dim() {
            return Err(LpError::Malformed(format!("unknown variable {index}")));
        }
        if self.negative_part.iter().any(|c| c.terms.contains(&index)) {
            return Err(LpError::Malformed(format!(
                "variable `{}` appears inside a negative-part term",
                self.variables[index].name
            )));
        }
        let drop = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .filter(|(j, _)| *j != index)
                .map(|(_, &x)| x)
                .collect()
        };
        let shift = |k: usize| if k > index { k - 1 } else { k };
        let mut variables = self.variables.clone();
        variables.remove(index);
        Ok(Self {
            variables,
            constraints: self
                .constraints
                .iter()
                .map(|c| LinearConstraint {
                    coefficients: drop(&c.coefficients),
                    relation: c.relation,
                    rhs: c.rhs - c.coefficients[index] * value,
                    tag: c.tag.clone(),
                })
                .collect(),
            negative_part: self
                .negative_part
                .iter()
                .map(|c| NegativePartConstraint {
                    coefficients: drop(&c.coefficients),
                    terms: c.terms.iter().map(|&k| shift(k)).collect(),
                    rhs: c.rhs - c.coefficients[index] * value,
                    tag: c.tag.clone(),
                })
                .collect(),
            objective: drop(&self.objective),
        })
    }

    /// Human-readable dump in CPLEX LP syntax, one constraint per line with a provenance comment.
    ///
    /// Negative-part constraints are written in their lowered form with one
    /// auxiliary `neg_<var>` column per referenced variable.
    pub fn to_lp_format(&self) -> String {
        let names: Vec<String> = self.variables.iter().map(|v| lp_name(&v.name)).collect();
        let term = |coefficients: &[f64]| -> String {
            let mut s = String::new();
            for (c, name) in coefficients.iter().zip(&names).filter(|(c, _)| **c != 0.0) {
                let _ = write!(s, " {} {} {}", if *c < 0.0 { "-" } else { "+" }, c.abs(), name);
            }
            if s.is_empty() {
                s.push_str(" 0 ");
                s.push_str(names.first().map(String::as_str).unwrap_or("x"));
            }
            s
        };
        let mut out = String::from("\\ linear constraint system\nMaximize\n obj:");
        out.push_str(&term(&self.objective));
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(out, "\\ {}", c.tag);
            let _ = writeln!(out, " c{}:{} {} {}", i, term(&c.coefficients), c.relation.symbol(), c.rhs);
        }
        let mut negatives = std::collections::BTreeSet::new();
        for (i, c) in self.negative_part.iter().enumerate() {
            let _ = writeln!(out, "\\ {} (with neg_v >= -v, neg_v >= 0)", c.tag);
            let mut line = term(&c.coefficients);
            for &k in &c.terms {
                negatives.insert(k);
                let _ = write!(line, " - 1 neg_{}", names[k]);
            }
            let _ = writeln!(out, " n{}:{} >= {}", i, line, c.rhs);
        }
        for &k in &negatives {
            let _ = writeln!(out, " negdef_{0}: + 1 neg_{0} + 1 {0} >= 0", names[k]);
        }
        out.push_str("Bounds\n");
        for (v, name) in self.variables.iter().zip(&names) {
            match v.domain {
                Domain::Free => {
                    let _ = writeln!(out, " {name} free");
                }
                Domain::NonNegative => {
                    let _ = writeln!(out, " {name} >= 0");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

fn lp_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if cleaned.starts_with(|c: char| c.is_ascii_digit()) || cleaned.is_empty() {
        format!("v_{cleaned}")
    } else {
        cleaned
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Objective value at `point` (`NaN` when not optimal).
    pub objective: f64,
    /// Variable assignment (empty when infeasible).
    pub point: Vec<f64>,
}

/// Dense simplex tableau in the maximization convention.
struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`, the last column is the right-hand side.
    data: Vec<f64>,
    /// Reduced costs (`cols` entries) followed by the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.at(r, c);
        for v in &mut self.data[r * width..(r + 1) * width] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * width..(r + 1) * width].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.at(i, c);
            if factor != 0.0 {
                let row = &mut self.data[i * width..(i + 1) * width];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[c] = 0.0;
            }
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Sets reduced costs for maximizing `c·x` given the current basis.
    fn price(&mut self, c: &[f64]) {
        let width = self.cols + 1;
        self.cost = c.iter().map(|v| -v).collect();
        self.cost.push(0.0);
        for i in 0..self.rows {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for (v, a) in self.cost.iter_mut().zip(&self.data[i * width..(i + 1) * width]) {
                    *v += cb * a;
                }
            }
        }
    }

    /// Runs Bland's rule over columns `< allowed`. Returns `false` on unboundedness.
    fn optimize(&mut self, allowed: usize) -> Result<bool, LpError> {
        for _ in 0..MAX_PIVOTS {
            let Some(entering) = (0..allowed).find(|&j| self.cost[j] < -REDUCED_COST_TOL) else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, entering);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((best, best_ratio)) => {
                            if ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[best])
                            {
                                Some((i, ratio))
                            } else {
                                Some((best, best_ratio))
                            }
                        }
                    };
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, entering),
                None => return Ok(false),
            }
        }
        Err(LpError::IterationLimit)
    }

    fn remove_row(&mut self, r: usize) {
        let width = self.cols + 1;
        self.data.drain(r * width..(r + 1) * width);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Column layout of the standard form: each variable gets a positive part,
/// free variables also a negative part.
struct Columns {
    positive: Vec<usize>,
    negative: Vec<Option<usize>>,
    count: usize,
}

impl Columns {
    fn new(variables: &[Variable]) -> Self {
        let mut count = 0;
        let mut positive = Vec::with_capacity(variables.len());
        let mut negative = Vec::with_capacity(variables.len());
        for v in variables {
            positive.push(count);
            count += 1;
            if v.domain == Domain::Free {
                negative.push(Some(count));
                count += 1;
            } else {
                negative.push(None);
            }
        }
        Self {
            positive,
            negative,
            count,
        }
    }

    fn expand(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut row = vec![0.0; self.count];
        for (j, &a) in coefficients.iter().enumerate() {
            row[self.positive[j]] += a;
            if let Some(q) = self.negative[j] {
                row[q] -= a;
            }
        }
        row
    }
}

/// Maximizes `sys.objective` subject to the system.
///
/// Infeasibility and unboundedness are reported through [`LpOutcome::status`];
/// errors are reserved for malformed input and pivot-limit exhaustion.
pub fn solve_max(sys: &LinearConstraintSystem) -> Result<LpOutcome, LpError> {
    sys.validate()?;
    let columns = Columns::new(&sys.variables);
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &sys.constraints {
        rows.push((columns.expand(&c.coefficients), c.relation, c.rhs));
    }
    for c in &sys.negative_part {
        let mut row = columns.expand(&c.coefficients);
        for &k in &c.terms {
            if let Some(q) = columns.negative[k] {
                row[q] -= 1.0;
            }
        }
        rows.push((row, Relation::Ge, c.rhs));
    }
    for (row, relation, rhs) in &mut rows {
        if *rhs < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *relation = relation.flipped();
        }
    }

    let structural = columns.count;
    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificial_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = structural + slack_count + artificial_count;
    let m = rows.len();
    let mut tab = Tableau {
        rows: m,
        cols,
        data: vec![0.0; m * (cols + 1)],
        cost: vec![0.0; cols + 1],
        basis: vec![0; m],
    };
    let width = cols + 1;
    let mut next_slack = structural;
    let mut next_artificial = structural + slack_count;
    for (i, (row, relation, rhs)) in rows.iter().enumerate() {
        tab.data[i * width..i * width + structural].copy_from_slice(row);
        tab.data[i * width + cols] = *rhs;
        match relation {
            Relation::Le => {
                tab.data[i * width + next_slack] = 1.0;
                tab.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                tab.data[i * width + next_slack] = -1.0;
                next_slack += 1;
                tab.data[i * width + next_artificial] = 1.0;
                tab.basis[i] = next_artificial;
                next_artificial += 1;
            }
            Relation::Eq => {
                tab.data[i * width + next_artificial] = 1.0;
                tab.basis[i] = next_artificial;
                next_artificial += 1;
            }
        }
    }

    let first_artificial = structural + slack_count;
    if artificial_count > 0 {
        let mut phase1 = vec![0.0; cols];
        phase1[first_artificial..].iter_mut().for_each(|v| *v = -1.0);
        tab.price(&phase1);
        tab.optimize(cols)?;
        if tab.cost[cols] < -FEASIBILITY_TOL {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                point: Vec::new(),
            });
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows {
            if tab.basis[i] >= first_artificial {
                match (0..first_artificial).find(|&j| tab.at(i, j).abs() > PIVOT_TOL) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => tab.remove_row(i),
                }
            } else {
                i += 1;
            }
        }
    }

    let mut phase2 = columns.expand(&sys.objective);
    phase2.resize(cols, 0.0);
    tab.price(&phase2);
    if !tab.optimize(first_artificial)? {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            objective: f64::INFINITY,
            point: Vec::new(),
        });
    }

    let mut values = vec![0.0; cols];
    for i in 0..tab.rows {
        values[tab.basis[i]] = tab.rhs(i);
    }
    let point: Vec<f64> = (0..sys.dim())
        .map(|j| values[columns.positive[j]] - columns.negative[j].map_or(0.0, |q| values[q]))
        .collect();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        objective: dot(&sys.objective, &point),
        point,
    })
}

/// Orthonormal bases of the row space and null space of the equality rows.
#[derive(Debug, Clone)]
pub struct AffineHull {
    row_basis: Vec<Vec<f64>>,
    null_basis: Vec<Vec<f64>>,
}

impl AffineHull {
    pub fn of(sys: &LinearConstraintSystem) -> Self {
        let n = sys.dim();
        let mut row_basis: Vec<Vec<f64>> = Vec::new();
        for c in sys.constraints.iter().filter(|c| c.relation == Relation::Eq) {
            let scale = c.coefficients.iter().map(|v| v * v).sum::<f64>().sqrt();
            if let Some(v) = orthogonalize(&c.coefficients, &row_basis, 1e-10 * scale.max(1.0)) {
                row_basis.push(v);
            }
        }
        let mut null_basis: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let against: Vec<Vec<f64>> = row_basis.iter().chain(&null_basis).cloned().collect();
            if let Some(v) = orthogonalize(&e, &against, 1e-8) {
                null_basis.push(v);
            }
            if row_basis.len() + null_basis.len() == n {
                break;
            }
        }
        Self {
            row_basis,
            null_basis,
        }
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        self.null_basis.len()
    }

    pub fn null_basis(&self) -> &[Vec<f64>] {
        &self.null_basis
    }

    /// Component of `v` parallel to the affine hull.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for q in &self.row_basis {
            let c = dot(q, &out);
            out.iter_mut().zip(q).for_each(|(o, qv)| *o -= c * qv);
        }
        out
    }
}

/// Twice-iterated Gram-Schmidt; `None` if the residual norm falls below `tol`.
fn orthogonalize(v: &[f64], basis: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let mut out = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &out);
            out.iter_mut().zip(q).for_each(|(o, qv)| *o -= c * qv);
        }
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= tol {
        None
    } else {
        out.iter_mut().for_each(|x| *x /= norm);
        Some(out)
    }
}

/// Center of the largest ball inscribed in the polytope within its affine hull.
///
/// For linear rows the ball radius is measured against the row normal
/// projected onto the hull, which gives the exact Chebyshev center. A
/// negative-part row bounds the normals of all its linear pieces by
/// `‖|a| + 1_terms‖`, so the returned ball is inscribed but may be smaller
/// than the largest one. The objective of `sys` is ignored.
pub fn chebyshev_center(sys: &LinearConstraintSystem) -> Result<Vec<f64>, LpError> {
    sys.validate()?;
    let n = sys.dim();
    let hull = AffineHull::of(sys);
    let radius_var = n;
    let mut variables = sys.variables.clone();
    variables.push(Variable {
        name: "__radius".into(),
        domain: Domain::NonNegative,
    });
    let mut lifted = LinearConstraintSystem::new(variables);
    let widen = |coefficients: &[f64], radius: f64| {
        let mut row = coefficients.to_vec();
        row.push(radius);
        row
    };
    for c in &sys.constraints {
        let norm = || {
            hull.project(&c.coefficients)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        };
        let radius = match c.relation {
            Relation::Le => norm(),
            Relation::Ge => -norm(),
            Relation::Eq => 0.0,
        };
        lifted.push(widen(&c.coefficients, radius), c.relation, c.rhs, c.tag.clone());
    }
    for c in &sys.negative_part {
        let mut bound: Vec<f64> = c.coefficients.iter().map(|v| v.abs()).collect();
        for &k in &c.terms {
            bound[k] += 1.0;
        }
        let norm = bound.iter().map(|v| v * v).sum::<f64>().sqrt();
        lifted.push_negative_part(widen(&c.coefficients, -norm), c.terms.clone(), c.rhs, c.tag.clone());
    }
    // Variable bounds are inequalities too.
    for (j, v) in sys.variables.iter().enumerate() {
        if v.domain == Domain::NonNegative {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let norm = hull.project(&e).iter().map(|v| v * v).sum::<f64>().sqrt();
            e.push(-norm);
            lifted.push(e, Relation::Ge, 0.0, format!("__bound_{j}"));
        }
    }
    lifted.objective[radius_var] = 1.0;
    let outcome = solve_max(&lifted)?;
    match outcome.status {
        LpStatus::Infeasible => Err(LpError::Infeasible),
        LpStatus::Unbounded => Err(LpError::Unbounded),
        LpStatus::Optimal => {
            let radius = outcome.point[radius_var];
            let point = outcome.point[..n].to_vec();
            let strict = sys
                .constraints
                .iter()
                .zip(sys.slacks(&point))
                .filter(|(c, _)| c.relation != Relation::Eq)
                .map(|(_, s)| s)
                .chain(sys.slacks(&point).into_iter().skip(sys.constraints.len()))
                .fold(f64::INFINITY, f64::min);
            if radius <= 1e-10 || strict <= 0.0 {
                Err(LpError::EmptyInterior { radius })
            } else {
                Ok(point)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str], domain: Domain) -> Vec<Variable> {
        names
            .iter()
            .map(|n| Variable {
                name: n.to_string(),
                domain,
            })
            .collect()
    }

    #[test]
    fn single_variable_bound() {
        let mut sys = LinearConstraintSystem::new(vars(&["eps"], Domain::Free));
        sys.push(vec![1.0], Relation::Le, 3.0, "cap");
        sys.push(vec![1.0], Relation::Ge, 0.0, "nonneg");
        sys.objective = vec![1.0];
        let out = solve_max(&sys).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut sys = LinearConstraintSystem::new(vars(&["eps"], Domain::Free));
        sys.push(vec![1.0], Relation::Ge, 1.0, "low");
        sys.push(vec![1.0], Relation::Le, 0.0, "high");
        sys.objective = vec![1.0];
        assert_eq!(solve_max(&sys).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn two_variable_box() {
        let mut sys = LinearConstraintSystem::new(vars(&["x", "y"], Domain::NonNegative));
        sys.push(vec![1.0, 0.0], Relation::Le, 1.0, "x");
        sys.push(vec![0.0, 1.0], Relation::Le, 2.0, "y");
        sys.objective = vec![1.0, 1.0];
        let out = solve_max(&sys).unwrap();
        assert!((out.objective - 3.0).abs() < 1e-12);
        assert!((out.point[0] - 1.0).abs() < 1e-12 && (out.point[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_a_status() {
        let mut sys = LinearConstraintSystem::new(vars(&["x"], Domain::Free));
        sys.push(vec![1.0], Relation::Ge, 0.0, "low");
        sys.objective = vec![1.0];
        assert_eq!(solve_max(&sys).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equalities_and_redundant_rows() {
        let mut sys = LinearConstraintSystem::new(vars(&["x", "y"], Domain::Free));
        sys.push(vec![1.0, 1.0], Relation::Eq, 1.0, "sum");
        sys.push(vec![2.0, 2.0], Relation::Eq, 2.0, "sum twice");
        sys.push(vec![1.0, 0.0], Relation::Ge, -0.5, "x low");
        sys.push(vec![0.0, 1.0], Relation::Ge, -3.0, "y low");
        sys.objective = vec![0.0, 1.0];
        let out = solve_max(&sys).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 1.5).abs() < 1e-12);
        assert!(sys.is_satisfied(&out.point, 1e-9));
    }

    #[test]
    fn negative_part_constraint_is_lowered_exactly() {
        // s + min(0, p) + min(0, q) >= 0 with s = 0.3 forces p + q >= -0.3 when both negative.
        let mut sys = LinearConstraintSystem::new(vec![
            Variable { name: "s".into(), domain: Domain::NonNegative },
            Variable { name: "p".into(), domain: Domain::Free },
            Variable { name: "q".into(), domain: Domain::Free },
        ]);
        sys.push(vec![1.0, 0.0, 0.0], Relation::Eq, 0.3, "s fixed");
        sys.push(vec![0.0, 1.0, -1.0], Relation::Eq, 0.0, "p = q");
        sys.push_negative_part(vec![1.0, 0.0, 0.0], vec![1, 2], 0.0, "monotone");
        sys.objective = vec![0.0, -1.0, 0.0];
        let out = solve_max(&sys).unwrap();
        assert!((out.point[1] + 0.15).abs() < 1e-12, "{:?}", out.point);
        // A positive value of p is unconstrained by the negative part.
        sys.objective = vec![0.0, 1.0, 0.0];
        assert_eq!(solve_max(&sys).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn malformed_systems_are_rejected() {
        let mut sys = LinearConstraintSystem::new(vars(&["x"], Domain::Free));
        sys.push(vec![1.0], Relation::Le, 1.0, "a");
        sys.push(vec![1.0], Relation::Le, 2.0, "a");
        assert!(matches!(solve_max(&sys), Err(LpError::Malformed(_))));
        let mut sys = LinearConstraintSystem::new(vars(&["x"], Domain::Free));
        sys.push(vec![1.0, 2.0], Relation::Le, 1.0, "a");
        assert!(matches!(solve_max(&sys), Err(LpError::Malformed(_))));
        let mut sys = LinearConstraintSystem::new(vars(&["x"], Domain::Free));
        sys.push(vec![1.0], Relation::Le, 1.0, "");
        assert!(matches!(solve_max(&sys), Err(LpError::Malformed(_))));
    }

    #[test]
    fn chebyshev_unit_square() {
        let mut sys = LinearConstraintSystem::new(vars(&["x", "y"], Domain::NonNegative));
        sys.push(vec![1.0, 0.0], Relation::Le, 1.0, "x");
        sys.push(vec![0.0, 1.0], Relation::Le, 1.0, "y");
        let c = chebyshev_center(&sys).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_triangle() {
        let mut sys = LinearConstraintSystem::new(vars(&["x", "y"], Domain::Free));
        sys.push(vec![1.0, 0.0], Relation::Ge, 0.0, "x");
        sys.push(vec![0.0, 1.0], Relation::Ge, 0.0, "y");
        sys.push(vec![1.0, 1.0], Relation::Le, 1.0, "sum");
        let c = chebyshev_center(&sys).unwrap();
        let r = 1.0 / (2.0 + 2f64.sqrt());
        assert!((c[0] - r).abs() < 1e-12 && (c[1] - r).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn chebyshev_respects_equalities() {
        // Segment x + y = 1 with x, y in [0, 1]: center (0.5, 0.5).
        let mut sys = LinearConstraintSystem::new(vars(&["x", "y"], Domain::NonNegative));
        sys.push(vec![1.0, 1.0], Relation::Eq, 1.0, "sum");
        let c = chebyshev_center(&sys).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn chebyshev_errors() {
        let mut sys = LinearConstraintSystem::new(vars(&["x"], Domain::Free));
        sys.push(vec![1.0], Relation::Ge, 1.0, "low");
        sys.push(vec![1.0], Relation::Le, 0.0, "high");
        assert_eq!(chebyshev_center(&sys), Err(LpError::Infeasible));
        let mut flat = LinearConstraintSystem::new(vars(&["x", "y"], Domain::NonNegative));
        flat.push(vec![1.0, 0.0], Relation::Le, 0.0, "pinned");
        flat.push(vec![0.0, 1.0], Relation::Le, 1.0, "y");
        assert!(matches!(chebyshev_center(&flat), Err(LpError::EmptyInterior { .. })));
        let mut open = LinearConstraintSystem::new(vars(&["x"], Domain::NonNegative));
        open.push(vec![1.0], Relation::Ge, 0.0, "low");
        assert_eq!(chebyshev_center(&open), Err(LpError::Unbounded));
    }

    #[test]
    fn fix_variable_moves_terms_to_rhs() {
        let mut sys = LinearConstraintSystem::new(vars(&["x", "eps"], Domain::NonNegative));
        sys.push(vec![1.0, -1.0], Relation::Ge, 0.0, "x >= eps");
        sys.push(vec![1.0, 0.0], Relation::Le, 1.0, "x <= 1");
        let fixed = sys.fix_variable(1, 0.25).unwrap();
        assert_eq!(fixed.dim(), 1);
        assert_eq!(fixed.constraints[0].rhs, 0.25);
        assert!(fixed.is_satisfied(&[0.3], 0.0));
        assert!(!fixed.is_satisfied(&[0.2], 1e-9));
    }

    #[test]
    fn lp_dump_has_one_line_per_constraint() {
        let mut sys = LinearConstraintSystem::new(vars(&["m 1", "eps"], Domain::Free));
        sys.push(vec![1.0, -1.0], Relation::Ge, 0.0, "statement 1");
        sys.push_negative_part(vec![1.0, 0.0], vec![1], 0.0, "monotonicity");
        let text = sys.to_lp_format();
        assert!(text.contains("\\ statement 1"));
        assert!(text.contains(" c0: + 1 m_1 - 1 eps >= 0"));
        assert!(text.contains("negdef_eps"));
        assert!(text.contains("m_1 free"));
        assert!(text.ends_with("End\n"));
    }
}
