//! Preference statements, their linear translation and the robust ordinal
//! regression queries built on top of it (consistency, necessary and possible
//! preference, dominance, inconsistency diagnostics).
//!
//! Every constraint is linear in the Möbius coefficients plus one shared
//! auxiliary variable `ε`. Statements scoped at a node `r` are multiplied
//! through by `μ(E(g_r))`; a strict statement then reads `numerator ≥ ε`
//! instead of `numerator ≥ ε·μ(E(g_r))`, which is the stronger of the two.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::MobiusLayout;
use crate::hierarchy::{CriteriaHierarchy, HierarchyError, NodeId};
use crate::linprog::{
    solve_max, Domain, LinearConstraintSystem, LpError, LpStatus, Relation, Variable,
    FEASIBILITY_TOL,
};
use crate::table::PerformanceTable;

/// `ε*` at or below this value is not strictly positive.
pub const EPSILON_THRESHOLD: f64 = FEASIBILITY_TOL;

/// Upper bound on `ε`; keeps the LP bounded when no statement is strict.
pub const EPSILON_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatementKind {
    /// `a ≻ b` (a chain `a ≻ b ≻ c ...` is accepted).
    AltStrict,
    AltIndifferent,
    /// `(a, b) ≻* (c, d)`.
    AltIntensityStrict,
    AltIntensityEqual,
    /// `g1 ≻ g2` (chains accepted).
    CritMoreImportant,
    CritEqual,
    CritPositiveInteraction,
    CritNegativeInteraction,
    /// Interaction of the first pair exceeds that of the second; needs `sign`.
    CritInteractionCompare,
    CritIntensityStrict,
    CritIntensityEqual,
}

impl StatementKind {
    pub fn is_criterion_level(self) -> bool {
        !matches!(
            self,
            StatementKind::AltStrict
                | StatementKind::AltIndifferent
                | StatementKind::AltIntensityStrict
                | StatementKind::AltIntensityEqual
        )
    }

    fn arity(self) -> Arity {
        use StatementKind::*;
        match self {
            AltStrict | CritMoreImportant => Arity::AtLeast(2),
            AltIndifferent | CritEqual | CritPositiveInteraction | CritNegativeInteraction => {
                Arity::Exactly(2)
            }
            AltIntensityStrict | AltIntensityEqual | CritInteractionCompare
            | CritIntensityStrict | CritIntensityEqual => Arity::Exactly(4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl std::fmt::Display for Arity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arity::Exactly(n) => write!(f, "{n}"),
            Arity::AtLeast(n) => write!(f, "at least {n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionSign {
    Positive,
    Negative,
}

fn root_scope() -> String {
    "root".into()
}

/// One piece of preference information from the decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceStatement {
    pub kind: StatementKind,
    /// Node the statement refers to, by name or path; the root means the comprehensive level.
    #[serde(default = "root_scope")]
    pub scope: String,
    /// Hierarchy level of criterion subjects; inferred from the subjects when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    /// Alternative ids, or criterion names/paths.
    pub subjects: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<InteractionSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PreferenceStatement {
    pub fn new(kind: StatementKind, scope: &str, subjects: &[&str]) -> Self {
        Self {
            kind,
            scope: scope.to_string(),
            level: None,
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
            sign: None,
            label: None,
            note: None,
        }
    }

    pub fn with_level(mut self, level: usize) -> Self {
        self.level = Some(level);
        self
    }

    pub fn with_sign(mut self, sign: InteractionSign) -> Self {
        self.sign = Some(sign);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatementError {
    #[error("{kind:?} takes {expected} subjects, got {actual}")]
    Arity {
        kind: StatementKind,
        expected: String,
        actual: usize,
    },
    #[error("unknown alternative `{0}`")]
    UnknownAlternative(String),
    #[error("criterion comparison statements need a `sign`")]
    MissingSign,
    #[error("subjects are on level {actual}, statement declares level {declared}")]
    Level { declared: usize, actual: usize },
    #[error("subject `{0}` is repeated")]
    RepeatedSubject(String),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreferenceError {
    #[error("{} statement(s) could not be translated: {}", .0.len(), describe(.0))]
    Statements(Vec<(usize, StatementError)>),
    #[error("{0}")]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("preference information is inconsistent (ε* = {eps_star:?})")]
    Inconsistent { eps_star: Option<f64> },
    #[error("preference information is consistent; nothing to diagnose")]
    ConsistentInput,
    #[error("unknown alternative `{0}`")]
    UnknownAlternative(String),
}

fn describe(errors: &[(usize, StatementError)]) -> String {
    errors
        .iter()
        .map(|(i, e)| format!("#{i}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// One emitted row over `[Möbius coefficients..., ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedConstraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
    pub tag: String,
}

/// Builders for linear forms in the Möbius coefficients (numerator forms).
struct Forms<'a> {
    h: &'a CriteriaHierarchy,
    layout: MobiusLayout,
}

impl<'a> Forms<'a> {
    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.layout.dim() + 1]
    }

    /// `C_μ(x_r)` as a linear form.
    fn choquet(&self, r: &NodeId, x: &[f64]) -> Result<Vec<f64>, HierarchyError> {
        let leaves = self.h.elementary_descendants(r)?;
        let mut row = self.zero();
        for (k, &t1) in leaves.iter().enumerate() {
            row[self.layout.singleton(t1)] += x[t1];
            for &t2 in &leaves[k + 1..] {
                row[self.layout.pair(t1, t2)] += x[t1].min(x[t2]);
            }
        }
        Ok(row)
    }

    /// `μ(E(g_r))` as a linear form.
    fn importance(&self, r: &NodeId) -> Result<Vec<f64>, HierarchyError> {
        let leaves = self.h.elementary_descendants(r)?;
        let mut row = self.zero();
        for (k, &t1) in leaves.iter().enumerate() {
            row[self.layout.singleton(t1)] = 1.0;
            for &t2 in &leaves[k + 1..] {
                row[self.layout.pair(t1, t2)] = 1.0;
            }
        }
        Ok(row)
    }

    /// Numerator of the importance of `subject` within `r`.
    fn shapley(&self, r: &NodeId, subject: &NodeId) -> Result<Vec<f64>, HierarchyError> {
        self.h.check_below(subject, r)?;
        let inside = self.h.elementary_descendants(subject)?;
        let others: Vec<NodeId> = self
            .h
            .level_members(r, subject.depth())?
            .into_iter()
            .filter(|id| id != subject)
            .collect();
        let outside = self.h.elementary_of_family(&others)?;
        let mut row = self.zero();
        for (k, &t1) in inside.iter().enumerate() {
            row[self.layout.singleton(t1)] += 1.0;
            for &t2 in &inside[k + 1..] {
                row[self.layout.pair(t1, t2)] += 1.0;
            }
            for &t2 in &outside {
                row[self.layout.pair(t1, t2)] += 0.5;
            }
        }
        Ok(row)
    }

    /// Numerator of the interaction of two sub-criteria of `r`.
    fn interaction(&self, r: &NodeId, first: &NodeId, second: &NodeId) -> Result<Vec<f64>, HierarchyError> {
        self.h.check_below(first, r)?;
        self.h.check_below(second, r)?;
        if first == second {
            return Err(HierarchyError::IdenticalSubjects(first.clone()));
        }
        let a = self.h.elementary_descendants(first)?;
        let b = self.h.elementary_descendants(second)?;
        let mut row = self.zero();
        for &t1 in &a {
            for &t2 in &b {
                row[self.layout.pair(t1, t2)] += 1.0;
            }
        }
        Ok(row)
    }
}

fn combine(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = vec![0.0; terms[0].1.len()];
    for (weight, row) in terms {
        out.iter_mut().zip(row.iter()).for_each(|(o, v)| *o += weight * v);
    }
    out
}

/// Translates one statement into linear constraints over `[m..., ε]`.
///
/// `tag` prefixes the provenance tags of the emitted rows.
pub fn translate(
    statement: &PreferenceStatement,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    tag: &str,
) -> Result<Vec<TranslatedConstraint>, StatementError> {
    use StatementKind::*;
    let kind = statement.kind;
    let count = statement.subjects.len();
    let arity_ok = match kind.arity() {
        Arity::Exactly(n) => count == n,
        Arity::AtLeast(n) => count >= n,
    };
    if !arity_ok {
        return Err(StatementError::Arity {
            kind,
            expected: kind.arity().to_string(),
            actual: count,
        });
    }
    let scope = h.resolve(&statement.scope)?;
    if h.node(&scope)?.is_elementary() {
        return Err(HierarchyError::Elementary { node: scope }.into());
    }
    let forms = Forms {
        h,
        layout: MobiusLayout::new(h.elementary_count()),
    };
    let eps = forms.layout.dim();
    let mut out = Vec::new();
    let mut emit = |mut coefficients: Vec<f64>, relation: Relation, strict: bool| {
        if strict {
            coefficients[eps] = match relation {
                Relation::Ge => -1.0,
                _ => 1.0,
            };
        }
        let tag = format!("{tag}#{}", out.len() + 1);
        out.push(TranslatedConstraint {
            coefficients,
            relation,
            rhs: 0.0,
            tag,
        });
    };

    if !kind.is_criterion_level() {
        let rows = statement
            .subjects
            .iter()
            .map(|id| {
                let a = table
                    .alternative_index(id)
                    .ok_or_else(|| StatementError::UnknownAlternative(id.clone()))?;
                Ok(forms.choquet(&scope, table.row(a))?)
            })
            .collect::<Result<Vec<_>, StatementError>>()?;
        match kind {
            AltStrict => {
                for w in rows.windows(2) {
                    emit(combine(&[(1.0, &w[0]), (-1.0, &w[1])]), Relation::Ge, true);
                }
            }
            AltIndifferent => emit(combine(&[(1.0, &rows[0]), (-1.0, &rows[1])]), Relation::Eq, false),
            AltIntensityStrict | AltIntensityEqual => {
                let gap = combine(&[(1.0, &rows[0]), (-1.0, &rows[1]), (-1.0, &rows[2]), (1.0, &rows[3])]);
                if kind == AltIntensityStrict {
                    emit(gap, Relation::Ge, true);
                } else {
                    emit(gap, Relation::Eq, false);
                }
                emit(combine(&[(1.0, &rows[2]), (-1.0, &rows[3])]), Relation::Ge, true);
            }
            _ => unreachable!(),
        }
        return Ok(out);
    }

    let subjects = statement
        .subjects
        .iter()
        .map(|s| h.resolve(s))
        .collect::<Result<Vec<_>, _>>()?;
    for s in &subjects {
        h.check_below(s, &scope)?;
    }
    let depth = subjects[0].depth();
    if let Some(other) = subjects.iter().find(|s| s.depth() != depth) {
        return Err(HierarchyError::LevelMismatch {
            first: subjects[0].clone(),
            second: other.clone(),
        }
        .into());
    }
    if let Some(declared) = statement.level {
        if declared != depth {
            return Err(StatementError::Level {
                declared,
                actual: depth,
            });
        }
    }
    let distinct = |a: usize, b: usize| {
        if subjects[a] == subjects[b] {
            Err(StatementError::RepeatedSubject(statement.subjects[a].clone()))
        } else {
            Ok(())
        }
    };
    match kind {
        CritMoreImportant | CritEqual | CritIntensityStrict | CritIntensityEqual => {
            let phi = subjects
                .iter()
                .map(|s| forms.shapley(&scope, s))
                .collect::<Result<Vec<_>, _>>()?;
            match kind {
                CritMoreImportant => {
                    for (k, w) in phi.windows(2).enumerate() {
                        distinct(k, k + 1)?;
                        emit(combine(&[(1.0, &w[0]), (-1.0, &w[1])]), Relation::Ge, true);
                    }
                }
                CritEqual => {
                    distinct(0, 1)?;
                    emit(combine(&[(1.0, &phi[0]), (-1.0, &phi[1])]), Relation::Eq, false);
                }
                _ => {
                    distinct(0, 1)?;
                    distinct(2, 3)?;
                    let gap = combine(&[(1.0, &phi[0]), (-1.0, &phi[1]), (-1.0, &phi[2]), (1.0, &phi[3])]);
                    if kind == CritIntensityStrict {
                        emit(gap, Relation::Ge, true);
                        emit(combine(&[(1.0, &phi[2]), (-1.0, &phi[3])]), Relation::Ge, true);
                    } else {
                        emit(gap, Relation::Eq, false);
                    }
                }
            }
        }
        CritPositiveInteraction => emit(forms.interaction(&scope, &subjects[0], &subjects[1])?, Relation::Ge, true),
        CritNegativeInteraction => emit(forms.interaction(&scope, &subjects[0], &subjects[1])?, Relation::Le, true),
        CritInteractionCompare => {
            let sign = statement.sign.ok_or(StatementError::MissingSign)?;
            let first = forms.interaction(&scope, &subjects[0], &subjects[1])?;
            let second = forms.interaction(&scope, &subjects[2], &subjects[3])?;
            let gap = combine(&[(1.0, &first), (-1.0, &second)]);
            let relation = match sign {
                InteractionSign::Positive => Relation::Ge,
                InteractionSign::Negative => Relation::Le,
            };
            emit(gap, relation, true);
            emit(second, relation, true);
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// The assembled constraint system over `[Möbius coefficients..., ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdmSystem {
    pub system: LinearConstraintSystem,
    pub layout: MobiusLayout,
}

impl EdmSystem {
    /// Index of `ε` in the variable list.
    pub fn epsilon(&self) -> usize {
        self.layout.dim()
    }

    /// Forces every pair coefficient to zero, restricting the system to additive capacities.
    pub fn force_additive(&mut self) {
        let width = self.system.dim();
        for (i, j, p) in self.layout.pairs() {
            let mut row = vec![0.0; width];
            row[p] = 1.0;
            self.system.push(row, Relation::Eq, 0.0, format!("additive[{i},{j}]"));
        }
    }

    fn augmented(&self, coefficients: Vec<f64>, relation: Relation, tag: &str) -> LinearConstraintSystem {
        let mut sys = self.system.clone();
        sys.push(coefficients, relation, 0.0, tag);
        sys
    }

    /// `max ε` subject to the system.
    pub fn max_epsilon(&self) -> Result<Option<f64>, LpError> {
        max_epsilon(&self.system)
    }
}

fn max_epsilon(sys: &LinearConstraintSystem) -> Result<Option<f64>, LpError> {
    let outcome = solve_max(sys)?;
    Ok(match outcome.status {
        LpStatus::Optimal => Some(outcome.objective),
        LpStatus::Infeasible => None,
        LpStatus::Unbounded => Some(f64::INFINITY),
    })
}

fn variables(h: &CriteriaHierarchy) -> Vec<Variable> {
    let names: Vec<&str> = h.elementary().iter().map(|c| c.id.as_str()).collect();
    let layout = MobiusLayout::new(names.len());
    let mut vars: Vec<Variable> = names
        .iter()
        .map(|n| Variable {
            name: format!("m[{n}]"),
            domain: Domain::NonNegative,
        })
        .collect();
    vars.extend(layout.pairs().map(|(i, j, _)| Variable {
        name: format!("m[{},{}]", names[i], names[j]),
        domain: Domain::Free,
    }));
    vars.push(Variable {
        name: "eps".into(),
        domain: Domain::NonNegative,
    });
    vars
}

/// Base constraints plus the translation of every statement; objective `max ε`.
///
/// Base constraints: normalization, monotonicity in closed form (one
/// negative-part row per criterion), `ε ≤ 1`, and `μ(E(g_r)) ≥ ε` for every
/// non-root internal node so that node-level values stay defined.
pub fn assemble_edm(
    statements: &[PreferenceStatement],
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
) -> Result<EdmSystem, PreferenceError> {
    let layout = MobiusLayout::new(h.elementary_count());
    let eps = layout.dim();
    let mut sys = LinearConstraintSystem::new(variables(h));
    let width = sys.dim();

    let mut normalization = vec![1.0; width];
    normalization[eps] = 0.0;
    sys.push(normalization, Relation::Eq, 1.0, "normalization");
    for (i, criterion) in h.elementary().iter().enumerate() {
        let mut row = vec![0.0; width];
        row[layout.singleton(i)] = 1.0;
        let terms = (0..layout.criteria())
            .filter(|&j| j != i)
            .map(|j| layout.pair(i, j))
            .collect();
        sys.push_negative_part(row, terms, 0.0, format!("monotonicity[{}]", criterion.id));
    }
    let mut cap = vec![0.0; width];
    cap[eps] = 1.0;
    sys.push(cap, Relation::Le, EPSILON_CAP, "epsilon-cap");

    let forms = Forms { h, layout };
    for node in h.internal_nodes().into_iter().filter(|n| !n.is_root()) {
        let mut row = forms.importance(&node)?;
        row[eps] = -1.0;
        sys.push(row, Relation::Ge, 0.0, format!("importance[{}]", h.name(&node)?));
    }

    let mut errors = Vec::new();
    for (index, statement) in statements.iter().enumerate() {
        let tag = match &statement.label {
            Some(label) => format!("statement {index} ({label})"),
            None => format!("statement {index}"),
        };
        match translate(statement, h, table, &tag) {
            Ok(rows) => {
                for r in rows {
                    sys.push(r.coefficients, r.relation, r.rhs, r.tag);
                }
            }
            Err(e) => errors.push((index, e)),
        }
    }
    if !errors.is_empty() {
        return Err(PreferenceError::Statements(errors));
    }
    sys.objective[eps] = 1.0;
    Ok(EdmSystem { system: sys, layout })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub feasible: bool,
    /// `None` when the system has no solution at all.
    pub eps_star: Option<f64>,
}

/// A compatible capacity exists iff the system is feasible with `ε* > 1e-8`.
pub fn check_consistency(edm: &EdmSystem) -> Result<Consistency, LpError> {
    let eps_star = edm.max_epsilon()?;
    Ok(Consistency {
        feasible: eps_star.is_some_and(|e| e > EPSILON_THRESHOLD),
        eps_star,
    })
}

fn difference(
    edm: &EdmSystem,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    r: &NodeId,
    better: usize,
    worse: usize,
) -> Result<Vec<f64>, HierarchyError> {
    let forms = Forms {
        h,
        layout: edm.layout,
    };
    let a = forms.choquet(r, table.row(better))?;
    let b = forms.choquet(r, table.row(worse))?;
    Ok(combine(&[(1.0, &a), (-1.0, &b)]))
}

/// `a ≿^N_r b`: reversing the preference strictly is impossible for every compatible capacity.
pub fn necessary(
    edm: &EdmSystem,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    r: &NodeId,
    a: usize,
    b: usize,
) -> Result<bool, PreferenceError> {
    if a == b {
        return Ok(true);
    }
    let mut row = difference(edm, h, table, r, b, a)?;
    row[edm.epsilon()] = -1.0;
    let eps = max_epsilon(&edm.augmented(row, Relation::Ge, "necessary-query"))?;
    Ok(eps.is_none_or(|e| e <= EPSILON_THRESHOLD))
}

/// `a ≿^P_r b`: some compatible capacity ranks `a` at least as high as `b`.
pub fn possible(
    edm: &EdmSystem,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    r: &NodeId,
    a: usize,
    b: usize,
) -> Result<bool, PreferenceError> {
    let row = difference(edm, h, table, r, a, b)?;
    let eps = max_epsilon(&edm.augmented(row, Relation::Ge, "possible-query"))?;
    Ok(eps.is_some_and(|e| e > EPSILON_THRESHOLD))
}

/// Necessary and possible relations at one node; `necessary[a][b]` means `a ≿^N b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NapRelation {
    pub node: NodeId,
    pub node_name: String,
    pub alternatives: Vec<String>,
    pub necessary: Vec<Vec<bool>>,
    pub possible: Vec<Vec<bool>>,
}

impl NapRelation {
    /// Pairs where `necessary` holds without `possible`; empty for a sound relation.
    pub fn violations(&self) -> Vec<(usize, usize)> {
        let n = self.alternatives.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.necessary[a][b] && !self.possible[a][b])
            .collect()
    }
}

fn weakly_dominates(table: &PerformanceTable, leaves: &[usize], a: usize, b: usize) -> bool {
    leaves.iter().all(|&t| table.row(a)[t] >= table.row(b)[t])
}

/// Computes the full necessary/possible relation at node `r`.
///
/// Pairs ordered by weak dominance on `E(g_r)` hold in both relations
/// without solving; the remaining pairs run their LPs in parallel.
pub fn nap_relation(
    edm: &EdmSystem,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    r: &NodeId,
) -> Result<NapRelation, PreferenceError> {
    let consistency = check_consistency(edm)?;
    if !consistency.feasible {
        return Err(PreferenceError::Inconsistent {
            eps_star: consistency.eps_star,
        });
    }
    let leaves = h.elementary_descendants(r)?;
    let n = table.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let flags = pairs
        .par_iter()
        .map(|&(a, b)| {
            if a == b || weakly_dominates(table, &leaves, a, b) {
                return Ok((true, true));
            }
            Ok((necessary(edm, h, table, r, a, b)?, possible(edm, h, table, r, a, b)?))
        })
        .collect::<Result<Vec<_>, PreferenceError>>()?;
    let mut necessary_m = vec![vec![false; n]; n];
    let mut possible_m = vec![vec![false; n]; n];
    for (&(a, b), (nec, pos)) in pairs.iter().zip(flags) {
        necessary_m[a][b] = nec;
        possible_m[a][b] = pos;
    }
    let relation = NapRelation {
        node: r.clone(),
        node_name: h.name(r)?.to_string(),
        alternatives: table.ids(),
        necessary: necessary_m,
        possible: possible_m,
    };
    debug_assert!(relation.violations().is_empty());
    Ok(relation)
}

/// `dominance[a][b]`: `a` is at least as good as `b` on every criterion and better on one.
pub fn dominance(table: &PerformanceTable) -> Vec<Vec<bool>> {
    let n = table.len();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let (x, y) = (table.row(a), table.row(b));
                    x.iter().zip(y).all(|(p, q)| p >= q) && x.iter().zip(y).any(|(p, q)| p > q)
                })
                .collect()
        })
        .collect()
}

/// Result of the greedy inconsistency scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Always true: the scan only looks at removals of one or two statements.
    pub heuristic: bool,
    pub method: String,
    /// Statement index sets whose removal restores consistency, minimal by inclusion.
    pub restoring_subsets: Vec<Vec<usize>>,
}

/// Looks for single statements, then pairs, whose removal restores `ε* > 1e-8`.
pub fn diagnose_inconsistency(
    statements: &[PreferenceStatement],
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
) -> Result<Diagnostic, PreferenceError> {
    let full = assemble_edm(statements, h, table)?;
    if check_consistency(&full)?.feasible {
        return Err(PreferenceError::ConsistentInput);
    }
    let restores = |removed: &[usize]| -> Result<bool, PreferenceError> {
        let kept: Vec<PreferenceStatement> = statements
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, s)| s.clone())
            .collect();
        Ok(check_consistency(&assemble_edm(&kept, h, table)?)?.feasible)
    };
    let n = statements.len();
    let singles: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| restores(&[i]).map(|ok| ok.then_some(i)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let candidates: Vec<usize> = (0..n).filter(|i| !singles.contains(i)).collect();
    let pair_list: Vec<(usize, usize)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(k, &i)| candidates[k + 1..].iter().map(move |&j| (i, j)))
        .collect();
    let pairs: Vec<Vec<usize>> = pair_list
        .par_iter()
        .map(|&(i, j)| restores(&[i, j]).map(|ok| ok.then(|| vec![i, j])))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut restoring_subsets: Vec<Vec<usize>> = singles.into_iter().map(|i| vec![i]).collect();
    restoring_subsets.extend(pairs);
    Ok(Diagnostic {
        heuristic: true,
        method: "greedy single-removal scan followed by pair-removal scan".into(),
        restoring_subsets,
    })
}
