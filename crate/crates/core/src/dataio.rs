//! Problem documents, performance tables, the bundled case study and result export.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::MobiusCapacity2Add;
use crate::hierarchy::{CriteriaHierarchy, NodeSpec};
use crate::preference::{
    assemble_edm, translate, Consistency, EdmSystem, NapRelation, PreferenceError,
    PreferenceStatement,
};
use crate::smaa::{NodeIndices, NodeRanking, SmaaResult};
use crate::table::{Alternative, PerformanceTable};

pub const SCHEMA_VERSION: u32 = 1;

/// Seed of the bundled synthetic performance table.
pub const CASE_STUDY_SEED: u64 = 20_140_251;

pub const CASE_STUDY_JSON: &str = include_str!("../data/case_study.json");
pub const CASE_STUDY_CSV: &str = include_str!("../data/case_study_table.csv");

/// One validation problem and where it was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

impl Issue {
    fn new(location: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{} validation error(s): {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Issue>),
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl DataError {
    /// Validation issues; I/O and parse failures are reported as a single issue.
    pub fn issues(&self) -> Vec<Issue> {
        match self {
            DataError::Invalid(issues) => issues.clone(),
            other => vec![Issue::new("document", other)],
        }
    }
}

/// Where the performance table comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableRef {
    /// Delimited file, relative to the problem document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Inline delimited text; takes precedence over `path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    /// Values are already on [0, 1] and are used without rescaling.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub prenormalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
    pub hierarchy: NodeSpec,
    pub table: TableRef,
    #[serde(default)]
    pub statements: Vec<PreferenceStatement>,
}

/// A validated problem: hierarchy, normalized table and statements.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub description: Option<String>,
    pub synthetic: bool,
    pub hierarchy: CriteriaHierarchy,
    pub hierarchy_spec: NodeSpec,
    pub table: PerformanceTable,
    pub prenormalized: bool,
    pub statements: Vec<PreferenceStatement>,
}

impl Problem {
    pub fn edm(&self) -> Result<EdmSystem, PreferenceError> {
        assemble_edm(&self.statements, &self.hierarchy, &self.table)
    }

    /// Document with the table embedded inline.
    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            description: self.description.clone(),
            synthetic: self.synthetic,
            hierarchy: self.hierarchy_spec.clone(),
            table: TableRef {
                path: None,
                csv: Some(write_table_csv(&self.table)),
                prenormalized: self.prenormalized,
            },
            statements: self.statements.clone(),
        }
    }

    /// Validates `statements` against this problem and returns a copy using them.
    pub fn with_statements(&self, statements: Vec<PreferenceStatement>) -> Result<Self, DataError> {
        let issues = statement_issues(&statements, &self.hierarchy, Some(&self.table));
        if !issues.is_empty() {
            return Err(DataError::Invalid(issues));
        }
        Ok(Self {
            statements,
            ..self.clone()
        })
    }
}

fn statement_issues(
    statements: &[PreferenceStatement],
    h: &CriteriaHierarchy,
    table: Option<&PerformanceTable>,
) -> Vec<Issue> {
    // Without a table only criterion-level statements are checked.
    let placeholder;
    let checked_table = table.is_some();
    let table = match table {
        Some(t) => Some(t),
        None => {
            placeholder = PerformanceTable::from_evaluations(
                vec![Alternative::new("")],
                h.elementary().iter().map(|c| c.id.clone()).collect(),
                vec![vec![0.0; h.elementary_count()]],
            )
            .ok();
            placeholder.as_ref()
        }
    };
    let Some(table) = table else { return Vec::new() };
    statements
        .iter()
        .enumerate()
        .filter(|(_, s)| checked_table || s.kind.is_criterion_level())
        .filter_map(|(i, s)| {
            translate(s, h, table, "check")
                .err()
                .map(|e| Issue::new(format!("statements[{i}]"), e))
        })
        .collect()
}

/// Validates a document; `table_text` is the delimited table when not inline.
///
/// Every problem found is reported, each with its location.
pub fn load_problem(doc: &ProblemDocument, table_text: Option<&str>) -> Result<Problem, DataError> {
    let mut issues = Vec::new();
    if doc.schema_version != SCHEMA_VERSION {
        issues.push(Issue::new(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", doc.schema_version),
        ));
    }
    let hierarchy = match CriteriaHierarchy::from_spec(&doc.hierarchy) {
        Ok(h) => h,
        Err(e) => {
            issues.push(Issue::new("hierarchy", e));
            return Err(DataError::Invalid(issues));
        }
    };
    let text = doc.table.csv.as_deref().or(table_text);
    let table = match text {
        None => {
            issues.push(Issue::new("table", "no performance table given"));
            None
        }
        Some(text) => match read_table_csv(text, &hierarchy, doc.table.prenormalized) {
            Ok(t) => Some(t),
            Err(mut e) => {
                issues.append(&mut e);
                None
            }
        },
    };
    issues.extend(statement_issues(&doc.statements, &hierarchy, table.as_ref()));
    match (issues.is_empty(), table) {
        (true, Some(table)) => Ok(Problem {
            name: doc.name.clone(),
            description: doc.description.clone(),
            synthetic: doc.synthetic,
            hierarchy,
            hierarchy_spec: doc.hierarchy.clone(),
            table,
            prenormalized: doc.table.prenormalized,
            statements: doc.statements.clone(),
        }),
        _ => Err(DataError::Invalid(issues)),
    }
}

pub fn parse_problem_document(text: &str) -> Result<ProblemDocument, DataError> {
    Ok(serde_json::from_str(text)?)
}

/// Reads a problem document and its table; `table_override` replaces the referenced table.
pub fn load_problem_file(path: &Path, table_override: Option<&Path>) -> Result<Problem, DataError> {
    let text = read(path)?;
    let doc = parse_problem_document(&text)?;
    let table_path = match (table_override, &doc.table.path) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(rel)) if doc.table.csv.is_none() => {
            Some(path.parent().unwrap_or(Path::new(".")).join(rel))
        }
        _ => None,
    };
    let table_text = table_path.as_deref().map(read).transpose()?;
    let mut doc = doc;
    if table_override.is_some() {
        doc.table.csv = None;
    }
    load_problem(&doc, table_text.as_deref())
}

fn read(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// The bundled case study with its synthetic table.
pub fn case_study() -> Problem {
    let doc = parse_problem_document(CASE_STUDY_JSON).expect("bundled document parses");
    load_problem(&doc, Some(CASE_STUDY_CSV)).expect("bundled case study is valid")
}

/// Parses a delimited table: first column alternative id, optional `name`
/// column, then one column per elementary criterion (any order).
pub fn read_table_csv(
    text: &str,
    h: &CriteriaHierarchy,
    prenormalized: bool,
) -> Result<PerformanceTable, Vec<Issue>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| vec![Issue::new("table header", e)])?
        .clone();
    let mut issues = Vec::new();
    if headers.is_empty() {
        return Err(vec![Issue::new("table header", "empty header row")]);
    }
    let name_column = headers.get(1).is_some_and(|c| c.eq_ignore_ascii_case("name"));
    let first_criterion = if name_column { 2 } else { 1 };
    let leaf_index: HashMap<&str, usize> = h
        .elementary()
        .iter()
        .map(|c| (c.id.as_str(), c.ordinal))
        .collect();
    let mut column_of = vec![None; h.elementary_count()];
    for (col, header) in headers.iter().enumerate().skip(first_criterion) {
        match leaf_index.get(header) {
            Some(&ordinal) if column_of[ordinal].is_some() => {
                issues.push(Issue::new(format!("table column {}", col + 1), format!("duplicate criterion `{header}`")))
            }
            Some(&ordinal) => column_of[ordinal] = Some(col),
            None => issues.push(Issue::new(
                format!("table column {}", col + 1),
                format!("`{header}` is not an elementary criterion"),
            )),
        }
    }
    for (ordinal, col) in column_of.iter().enumerate() {
        if col.is_none() {
            issues.push(Issue::new(
                "table header",
                format!("missing column for criterion `{}`", h.elementary()[ordinal].id),
            ));
        }
    }
    let mut alternatives = Vec::new();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let location = format!("table row {}", line + 1);
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                issues.push(Issue::new(location, e));
                continue;
            }
        };
        if record.len() != headers.len() {
            issues.push(Issue::new(
                location,
                format!("{} fields, expected {}", record.len(), headers.len()),
            ));
            continue;
        }
        let id = record[0].to_string();
        let name = if name_column { record[1].to_string() } else { id.clone() };
        let mut row = vec![0.0; h.elementary_count()];
        for (ordinal, col) in column_of.iter().enumerate() {
            let Some(col) = *col else { continue };
            match record[col].parse::<f64>() {
                Ok(v) => row[ordinal] = v,
                Err(_) => issues.push(Issue::new(
                    format!("{location}, column `{}`", &headers[col]),
                    format!("`{}` is not a number", &record[col]),
                )),
            }
        }
        alternatives.push(Alternative { id, name });
        rows.push(row);
    }
    if !issues.is_empty() {
        return Err(issues);
    }
    let criteria: Vec<String> = h.elementary().iter().map(|c| c.id.clone()).collect();
    let built = if prenormalized {
        PerformanceTable::from_evaluations(alternatives, criteria, rows)
    } else {
        PerformanceTable::new(alternatives, criteria, h.directions(), rows)
    };
    built.map_err(|e| vec![Issue::new("table", e)])
}

/// Raw values with an `id,name,<criteria>` header.
pub fn write_table_csv(table: &PerformanceTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "name".to_string()];
    header.extend(table.criteria.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (a, row) in table.alternatives.iter().zip(&table.raw) {
        let mut record = vec![a.id.clone(), a.name.clone()];
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

const MUNICIPALITIES: [&str; 51] = [
    "Aci Bonaccorsi", "Aci Catena", "Aci Sant'Antonio", "Acireale", "Adrano", "Belpasso",
    "Biancavilla", "Bronte", "Calatabiano", "Caltagirone", "Camporotondo Etneo",
    "Castel di Iudica", "Castiglione di Sicilia", "Fiumefreddo di Sicilia", "Giarre",
    "Grammichele", "Licodia Eubea", "Linguaglossa", "Maletto", "Maniace", "Mascali",
    "Mascalucia", "Mazzarrone", "Militello in Val di Catania", "Milo", "Mineo",
    "Mirabella Imbaccari", "Nicolosi", "Palagonia", "Paternò", "Pedara", "Piedimonte Etneo",
    "Raddusa", "Ragalna", "Ramacca", "Randazzo", "Riposto", "San Cono",
    "San Giovanni la Punta", "San Michele di Ganzaria", "San Pietro Clarenza",
    "Santa Maria di Licodia", "Santa Venerina", "Sant'Alfio", "Scordia", "Trecastagni",
    "Tremestieri Etneo", "Valverde", "Viagrande", "Vizzini", "Zafferana Etnea",
];

/// (criterion, low, high, decimals) per column of the synthetic table.
const SYNTHETIC_RANGES: [(&str, f64, f64, usize); 10] = [
    ("OH", 0.55, 0.90, 4),
    ("AA", 0.02, 0.25, 4),
    ("BS", 0.0, 12.0, 3),
    ("PSI", 0.0, 0.35, 4),
    ("CP", 30.0, 2500.0, 1),
    ("R", 900.0, 55000.0, 0),
    ("TPR", 0.01, 0.15, 4),
    ("IWU", 200.0, 4000.0, 1),
    ("LS", 0.0, 1.5, 4),
    ("OU", 0.0, 0.40, 4),
];

/// Synthetic 51 × 10 performance table in the bundled format, drawn uniformly
/// within a plausible range per indicator.
pub fn synthetic_case_study_csv(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "name".to_string()];
    header.extend(SYNTHETIC_RANGES.iter().map(|r| r.0.to_string()));
    w.write_record(&header).expect("in-memory write");
    for (k, name) in MUNICIPALITIES.iter().enumerate() {
        let mut record = vec![format!("a{}", k + 1), name.to_string()];
        for &(_, lo, hi, decimals) in &SYNTHETIC_RANGES {
            let v = lo + (hi - lo) * rng.random::<f64>();
            record.push(format!("{v:.decimals$}"));
        }
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    /// Delimited text tables.
    Tabular,
    /// One JSON document.
    Structured,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tabular" | "csv" => Ok(Self::Tabular),
            "structured" | "json" => Ok(Self::Structured),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

/// Everything a pipeline run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub problem: String,
    #[serde(default)]
    pub synthetic: bool,
    pub alternatives: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<Consistency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance: Option<Vec<Vec<bool>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nap: Vec<NapRelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smaa: Option<SmaaResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rankings: Vec<NodeRanking>,
}

impl ResultsDocument {
    pub fn new(problem: &Problem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem: problem.name.clone(),
            synthetic: problem.synthetic,
            alternatives: problem.table.ids(),
            consistency: None,
            dominance: None,
            nap: Vec::new(),
            smaa: None,
            rankings: Vec::new(),
        }
    }
}

pub fn results_to_json(doc: &ResultsDocument) -> String {
    serde_json::to_string_pretty(doc).expect("results serialize")
}

pub fn results_from_json(text: &str) -> Result<ResultsDocument, DataError> {
    Ok(serde_json::from_str(text)?)
}

/// A rank and how often it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankFrequency {
    pub rank: usize,
    pub frequency: f64,
}

/// The three most frequent ranks plus the best and worst attained ranks of one alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub alternative: String,
    pub highest: Vec<RankFrequency>,
    pub best: RankFrequency,
    pub worst: RankFrequency,
}

/// Summaries ordered by most frequent rank, then by its frequency.
pub fn rank_summaries(node: &NodeIndices, alternatives: &[String]) -> Vec<RankSummary> {
    let mut out: Vec<(usize, RankSummary)> = node
        .rank_counts
        .iter()
        .enumerate()
        .map(|(a, counts)| {
            let freq = |rank: usize| RankFrequency {
                rank,
                frequency: node.rai[a][rank - 1],
            };
            let mut attained: Vec<usize> = (1..=counts.len()).filter(|&s| counts[s - 1] > 0).collect();
            let best = freq(attained[0]);
            let worst = freq(*attained.last().expect("every alternative has a rank"));
            attained.sort_by(|&s, &t| counts[t - 1].cmp(&counts[s - 1]).then(s.cmp(&t)));
            let summary = RankSummary {
                alternative: alternatives[a].clone(),
                highest: attained.iter().take(3).map(|&s| freq(s)).collect(),
                best,
                worst,
            };
            (a, summary)
        })
        .collect();
    out.sort_by(|(a, x), (b, y)| {
        x.highest[0]
            .rank
            .cmp(&y.highest[0].rank)
            .then(y.highest[0].frequency.total_cmp(&x.highest[0].frequency))
            .then(a.cmp(b))
    });
    out.into_iter().map(|(_, s)| s).collect()
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn percent(f: f64) -> String {
    format!("{:.2}", 100.0 * f)
}

/// Per alternative: three highest rank acceptabilities, best and worst positions (percentages).
pub fn summary_csv(node: &NodeIndices, alternatives: &[String]) -> String {
    let mut rows = vec![[
        "alternative", "high1", "high1_pct", "high2", "high2_pct", "high3", "high3_pct", "best",
        "best_pct", "worst", "worst_pct",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    for s in rank_summaries(node, alternatives) {
        let mut row = vec![s.alternative.clone()];
        for k in 0..3 {
            match s.highest.get(k) {
                Some(h) => row.extend([h.rank.to_string(), percent(h.frequency)]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        row.extend([s.best.rank.to_string(), percent(s.best.frequency)]);
        row.extend([s.worst.rank.to_string(), percent(s.worst.frequency)]);
        rows.push(row);
    }
    csv_string(rows)
}

/// Alternatives × ranks.
pub fn rai_csv(node: &NodeIndices, alternatives: &[String]) -> String {
    let mut header = vec!["alternative".to_string()];
    header.extend((1..=alternatives.len()).map(|s| format!("rank_{s}")));
    let mut rows = vec![header];
    for (a, row) in node.rai.iter().enumerate() {
        let mut r = vec![alternatives[a].clone()];
        r.extend(row.iter().map(|v| v.to_string()));
        rows.push(r);
    }
    csv_string(rows)
}

/// Row beats column.
pub fn pwi_csv(node: &NodeIndices, alternatives: &[String]) -> String {
    let mut header = vec!["alternative".to_string()];
    header.extend(alternatives.iter().cloned());
    let mut rows = vec![header];
    for (a, row) in node.pwi.iter().enumerate() {
        let mut r = vec![alternatives[a].clone()];
        r.extend(row.iter().map(|v| v.to_string()));
        rows.push(r);
    }
    csv_string(rows)
}

pub fn ranking_csv(ranking: &NodeRanking) -> String {
    let mut rows = vec![vec!["rank".to_string(), "alternative".into(), "value".into()]];
    for a in ranking.order() {
        rows.push(vec![
            ranking.ranks[a].to_string(),
            ranking.alternatives[a].clone(),
            format!("{:.6}", ranking.values[a]),
        ]);
    }
    csv_string(rows)
}

/// Coefficients laid out in blocks: one header/value row pair for the
/// singletons, then the pairs in lexicographic order, `width` per block.
pub fn barycenter_csv(bary: &MobiusCapacity2Add, criteria: &[String], width: usize) -> String {
    let mut rows: Vec<Vec<String>> = vec![
        criteria.iter().map(|c| format!("m({{{c}}})")).collect(),
        bary.singletons().iter().map(|v| format!("{v:.4}")).collect(),
    ];
    let pairs: Vec<(String, f64)> = bary
        .layout()
        .pairs()
        .map(|(i, j, _)| (format!("m({{{},{}}})", criteria[i], criteria[j]), bary.pair(i, j)))
        .collect();
    for chunk in pairs.chunks(width.max(1)) {
        rows.push(chunk.iter().map(|(l, _)| l.clone()).collect());
        rows.push(chunk.iter().map(|(_, v)| format!("{v:.4}")).collect());
    }
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn file_stem(node_name: &str) -> String {
    node_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// Writes results into `dir`; returns the files written in a fixed order.
pub fn export_results(
    doc: &ResultsDocument,
    criteria: &[String],
    dir: &Path,
    format: ExportFormat,
) -> Result<Vec<PathBuf>, DataError> {
    fs::create_dir_all(dir).map_err(|source| DataError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<(String, String)> = Vec::new();
    match format {
        ExportFormat::Structured => files.push(("results.json".into(), results_to_json(doc))),
        ExportFormat::Tabular => {
            if let Some(smaa) = &doc.smaa {
                for node in &smaa.nodes {
                    let stem = file_stem(&node.node_name);
                    files.push((format!("rai_{stem}.csv"), rai_csv(node, &smaa.alternatives)));
                    files.push((format!("pwi_{stem}.csv"), pwi_csv(node, &smaa.alternatives)));
                    files.push((format!("summary_{stem}.csv"), summary_csv(node, &smaa.alternatives)));
                }
                if let Some(bary) = &smaa.barycenter {
                    files.push(("barycenter.csv".into(), barycenter_csv(bary, criteria, 11)));
                }
            }
            for ranking in &doc.rankings {
                files.push((format!("ranking_{}.csv", file_stem(&ranking.node_name)), ranking_csv(ranking)));
            }
        }
    }
    files
        .into_iter()
        .map(|(name, content)| {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|source| DataError::Write {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
