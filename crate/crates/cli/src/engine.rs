//! Pipeline operations shared by the command line and the HTTP service.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use hchoquet_core::dataio::{
    self, case_study, load_problem_file, rank_summaries, DataError, Issue, Problem, RankSummary,
};
use hchoquet_core::hierarchy::HierarchyError;
use hchoquet_core::preference::{
    check_consistency, diagnose_inconsistency, dominance, nap_relation, Consistency, Diagnostic,
    NapRelation, PreferenceError,
};
use hchoquet_core::smaa::{
    barycenter_ranking, run_smaa, NodeRanking, RunControl, SamplerConfig, SmaaError, SmaaResult,
};
use hchoquet_core::{CriteriaHierarchy, NodeId};

/// Problem source naming the bundled case study.
pub const CASE_STUDY: &str = "case-study";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    Unprocessable,
    Internal,
}

/// Machine-readable failure shared by every front end.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("{message}")]
pub struct EngineError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<Issue>,
}

impl EngineError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            issues: Vec::new(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Conflict, message)
    }
}

/// `{"error": {...}}` envelope printed by the CLI and returned by the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error: EngineError,
}

impl From<DataError> for EngineError {
    fn from(e: DataError) -> Self {
        let code = match e {
            DataError::Write { .. } => ErrorCode::Internal,
            _ => ErrorCode::BadRequest,
        };
        Self {
            code,
            message: e.to_string(),
            issues: e.issues(),
        }
    }
}

impl From<HierarchyError> for EngineError {
    fn from(e: HierarchyError) -> Self {
        let code = match e {
            HierarchyError::UnknownNode(_) => ErrorCode::NotFound,
            HierarchyError::ZeroImportance { .. } => ErrorCode::Unprocessable,
            _ => ErrorCode::BadRequest,
        };
        Self::new(code, e.to_string())
    }
}

impl From<PreferenceError> for EngineError {
    fn from(e: PreferenceError) -> Self {
        match e {
            PreferenceError::Statements(ref errors) => Self {
                code: ErrorCode::BadRequest,
                message: e.to_string(),
                issues: errors
                    .iter()
                    .map(|(i, err)| Issue {
                        location: format!("statements[{i}]"),
                        message: err.to_string(),
                    })
                    .collect(),
            },
            PreferenceError::Hierarchy(h) => h.into(),
            PreferenceError::Inconsistent { .. } => Self::new(ErrorCode::Unprocessable, e.to_string()),
            PreferenceError::ConsistentInput => Self::conflict(e.to_string()),
            PreferenceError::UnknownAlternative(_) => Self::bad_request(e.to_string()),
            PreferenceError::Lp(_) => Self::new(ErrorCode::Internal, e.to_string()),
        }
    }
}

impl From<SmaaError> for EngineError {
    fn from(e: SmaaError) -> Self {
        let code = match e {
            SmaaError::Config(_) => ErrorCode::BadRequest,
            SmaaError::Inconsistent { .. } | SmaaError::EpsilonAboveOptimum { .. } => ErrorCode::Unprocessable,
            SmaaError::Cancelled => ErrorCode::Conflict,
            SmaaError::Hierarchy(h) => return h.into(),
            SmaaError::UnboundedChord | SmaaError::NoSamples | SmaaError::Lp(_) => ErrorCode::Internal,
        };
        Self::new(code, e.to_string())
    }
}

/// Loads `source`, a document path or [`CASE_STUDY`]; `table` replaces the referenced table.
pub fn load(source: &str, table: Option<&Path>) -> Result<Problem, EngineError> {
    if source != CASE_STUDY {
        return Ok(load_problem_file(Path::new(source), table)?);
    }
    let Some(path) = table else { return Ok(case_study()) };
    let text = fs::read_to_string(path).map_err(|source| DataError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut doc = dataio::parse_problem_document(dataio::CASE_STUDY_JSON)?;
    doc.table.path = None;
    Ok(dataio::load_problem(&doc, Some(&text))?)
}

/// Resolves node references by name or dotted path; no references selects every internal node.
pub fn resolve_nodes(h: &CriteriaHierarchy, refs: &[String]) -> Result<Vec<NodeId>, EngineError> {
    if refs.is_empty() {
        return Ok(h.internal_nodes());
    }
    refs.iter()
        .map(|r| {
            let id = h.resolve(r)?;
            if h.node(&id)?.is_elementary() {
                return Err(EngineError::bad_request(format!(
                    "`{r}` is an elementary criterion; choose a node with sub-criteria"
                )));
            }
            Ok(id)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub problem: String,
    pub synthetic: bool,
    pub alternatives: usize,
    pub criteria: usize,
    pub internal_nodes: Vec<String>,
    pub statements: usize,
}

pub fn validate(p: &Problem) -> ValidationReport {
    let h = &p.hierarchy;
    ValidationReport {
        valid: true,
        problem: p.name.clone(),
        synthetic: p.synthetic,
        alternatives: p.table.len(),
        criteria: h.elementary_count(),
        internal_nodes: h
            .internal_nodes()
            .iter()
            .map(|id| h.name(id).map(str::to_string))
            .collect::<Result<_, _>>()
            .unwrap_or_default(),
        statements: p.statements.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub alternatives: Vec<String>,
    /// `matrix[a][b]`: `a` dominates `b`.
    pub matrix: Vec<Vec<bool>>,
    pub pairs: Vec<(String, String)>,
}

pub fn dominance_report(p: &Problem) -> DominanceReport {
    let ids = p.table.ids();
    let matrix = dominance(&p.table);
    let pairs = matrix
        .iter()
        .enumerate()
        .flat_map(|(a, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, d)| **d)
                .map(|(b, _)| (ids[a].clone(), ids[b].clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    DominanceReport {
        alternatives: ids,
        matrix,
        pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub feasible: bool,
    pub eps_star: Option<f64>,
    /// Present only for inconsistent statement sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

impl ConsistencyReport {
    pub fn consistency(&self) -> Consistency {
        Consistency {
            feasible: self.feasible,
            eps_star: self.eps_star,
        }
    }
}

pub fn consistency(p: &Problem) -> Result<ConsistencyReport, EngineError> {
    let c = check_consistency(&p.edm()?).map_err(PreferenceError::from)?;
    let diagnostic = if c.feasible {
        None
    } else {
        Some(diagnose_inconsistency(&p.statements, &p.hierarchy, &p.table)?)
    };
    Ok(ConsistencyReport {
        feasible: c.feasible,
        eps_star: c.eps_star,
        diagnostic,
    })
}

pub fn nap(p: &Problem, nodes: &[NodeId]) -> Result<Vec<NapRelation>, EngineError> {
    let edm = p.edm()?;
    nodes
        .iter()
        .map(|r| Ok(nap_relation(&edm, &p.hierarchy, &p.table, r)?))
        .collect()
}

pub fn smaa(
    p: &Problem,
    nodes: &[NodeId],
    cfg: &SamplerConfig,
    control: RunControl<'_>,
) -> Result<SmaaResult, EngineError> {
    Ok(run_smaa(&p.edm()?, &p.hierarchy, &p.table, nodes, cfg, control)?)
}

/// Barycenter rankings at `nodes`, all nodes of the result when empty.
pub fn rankings(p: &Problem, result: &SmaaResult, nodes: &[NodeId]) -> Result<Vec<NodeRanking>, EngineError> {
    let bary = result
        .barycenter
        .as_ref()
        .ok_or_else(|| EngineError::bad_request("the SMAA result carries no barycenter"))?;
    let nodes: Vec<NodeId> = if nodes.is_empty() {
        result.nodes.iter().map(|n| n.node.clone()).collect()
    } else {
        nodes.to_vec()
    };
    Ok(barycenter_ranking(bary, &p.hierarchy, &p.table, &nodes)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: NodeId,
    pub node_name: String,
    pub summaries: Vec<RankSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<NodeRanking>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub synthetic: bool,
    pub sample_count: usize,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub eps_star: Option<f64>,
    /// Whether the barycenter is a normalized monotone capacity.
    pub barycenter_valid: Option<bool>,
    pub nodes: Vec<NodeReport>,
}

/// Rank summaries per node of `result`, joined with the matching barycenter ranking.
pub fn report(p: &Problem, result: &SmaaResult, rankings: &[NodeRanking]) -> Report {
    Report {
        problem: p.name.clone(),
        synthetic: p.synthetic,
        sample_count: result.sample_count,
        seed: result.config.seed,
        epsilon: result.epsilon,
        eps_star: result.eps_star,
        barycenter_valid: result.barycenter.as_ref().map(|b| b.validate(1e-9).is_valid()),
        nodes: result
            .nodes
            .iter()
            .map(|n| NodeReport {
                node: n.node.clone(),
                node_name: n.node_name.clone(),
                summaries: rank_summaries(n, &result.alternatives),
                ranking: rankings.iter().find(|r| r.node == n.node).cloned(),
            })
            .collect(),
    }
}
