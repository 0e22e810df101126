//! Hit-And-Run sampling of the compatible-capacity polytope and SMAA indices.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{MobiusCapacity2Add, MobiusLayout};
use crate::hierarchy::{CriteriaHierarchy, HierarchyError, NodeId, TIE_TOLERANCE};
use crate::linprog::{
    chebyshev_center, dot, AffineHull, Domain, LinearConstraintSystem, LpError, Relation,
    FEASIBILITY_TOL,
};
use crate::preference::{check_consistency, EdmSystem, EPSILON_THRESHOLD};
use crate::table::PerformanceTable;

/// Samples reported between progress callbacks.
const PROGRESS_STRIDE: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmaaError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("preference information is inconsistent (ε* = {eps_star:?})")]
    Inconsistent { eps_star: Option<f64> },
    #[error("fixed ε = {value} exceeds ε* = {eps_star}")]
    EpsilonAboveOptimum { value: f64, eps_star: f64 },
    #[error("feasible chord is unbounded; the polytope is not bounded")]
    UnboundedChord,
    #[error("sampling was cancelled")]
    Cancelled,
    #[error("no samples to aggregate")]
    NoSamples,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// How the auxiliary `ε` is fixed before sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    Fixed(f64),
    FractionOfEpsStar(f64),
}

impl Default for EpsilonMode {
    fn default() -> Self {
        EpsilonMode::FractionOfEpsStar(0.5)
    }
}

impl fmt::Display for EpsilonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonMode::Fixed(v) => write!(f, "fixed:{v}"),
            EpsilonMode::FractionOfEpsStar(r) => write!(f, "fraction:{r}"),
        }
    }
}

impl FromStr for EpsilonMode {
    type Err = String;

    /// Accepts `fixed:<value>` or `fraction:<ratio>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `fixed:<value>` or `fraction:<ratio>`, got `{s}`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("`{value}` is not a number"))?;
        match kind.trim() {
            "fixed" => Ok(EpsilonMode::Fixed(value)),
            "fraction" | "fraction_of_eps_star" => Ok(EpsilonMode::FractionOfEpsStar(value)),
            other => Err(format!("unknown epsilon mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub sample_count: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub epsilon_mode: EpsilonMode,
    /// Independent chains; chain `c` uses stream `c` of the seeded generator.
    pub chains: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            sample_count: 100_000,
            burn_in: 10_000,
            thinning: 5,
            seed: 0,
            epsilon_mode: EpsilonMode::default(),
            chains: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SmaaError> {
        if self.sample_count == 0 {
            return Err(SmaaError::Config("sample_count must be positive".into()));
        }
        if self.thinning == 0 {
            return Err(SmaaError::Config("thinning must be at least 1".into()));
        }
        if self.chains == 0 || self.chains > self.sample_count {
            return Err(SmaaError::Config(
                "chains must be between 1 and sample_count".into(),
            ));
        }
        match self.epsilon_mode {
            EpsilonMode::Fixed(v) if !(v.is_finite() && v >= 0.0) => {
                Err(SmaaError::Config(format!("fixed ε must be a nonnegative number, got {v}")))
            }
            EpsilonMode::FractionOfEpsStar(r) if !(r > 0.0 && r <= 1.0) => {
                Err(SmaaError::Config(format!("ε fraction must lie in (0, 1], got {r}")))
            }
            _ => Ok(()),
        }
    }
}

/// Progress observer and cancellation flag for long runs.
#[derive(Default, Clone, Copy)]
pub struct RunControl<'a> {
    /// Called with (samples completed, total samples).
    pub progress: Option<&'a (dyn Fn(usize, usize) + Sync)>,
    pub cancel: Option<&'a AtomicBool>,
}

impl RunControl<'_> {
    fn cancelled(&self) -> bool {
        self.cancel.is_some_and(|c| c.load(Ordering::Relaxed))
    }
}

/// A sampling-ready view of the inequalities: `a·x ≥ b` rows and negative-part rows.
struct Polytope {
    rows: Vec<(Vec<f64>, f64)>,
    negative: Vec<(Vec<f64>, Vec<usize>, f64)>,
}

impl Polytope {
    fn of(sys: &LinearConstraintSystem) -> Self {
        let n = sys.dim();
        let mut rows = Vec::new();
        for c in &sys.constraints {
            match c.relation {
                Relation::Ge => rows.push((c.coefficients.clone(), c.rhs)),
                Relation::Le => rows.push((c.coefficients.iter().map(|v| -v).collect(), -c.rhs)),
                Relation::Eq => {}
            }
        }
        for (j, v) in sys.variables.iter().enumerate() {
            if v.domain == Domain::NonNegative {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                rows.push((e, 0.0));
            }
        }
        rows.retain(|(a, _)| a.iter().any(|v| *v != 0.0));
        let negative = sys
            .negative_part
            .iter()
            .map(|c| (c.coefficients.clone(), c.terms.clone(), c.rhs))
            .collect();
        Self { rows, negative }
    }

    /// Feasible interval of `t` for `x + t·d`; contains 0 when `x` is feasible.
    fn chord(&self, x: &[f64], d: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (a, b) in &self.rows {
            let rate = dot(a, d);
            let slack = (dot(a, x) - b).max(0.0);
            if rate > 0.0 {
                lo = lo.max(-slack / rate);
            } else if rate < 0.0 {
                hi = hi.min(slack / -rate);
            }
        }
        for (a, terms, b) in &self.negative {
            hi = hi.min(negative_part_reach(a, terms, *b, x, d, 1.0));
            lo = lo.max(-negative_part_reach(a, terms, *b, x, d, -1.0));
        }
        (lo.min(0.0), hi.max(0.0))
    }
}

/// Largest `t ≥ 0` with `a·(x + s·t·d) + Σ min(0, x_k + s·t·d_k) ≥ b`.
///
/// The left side is concave and piecewise linear in `t`, so the feasible set
/// along the ray is an interval starting at 0.
fn negative_part_reach(a: &[f64], terms: &[usize], b: f64, x: &[f64], d: &[f64], sign: f64) -> f64 {
    let value = |t: f64| {
        dot(a, x) + sign * t * dot(a, d) - b
            + terms
                .iter()
                .map(|&k| (x[k] + sign * t * d[k]).min(0.0))
                .sum::<f64>()
    };
    let mut breaks: Vec<f64> = terms
        .iter()
        .filter(|&&k| d[k] != 0.0)
        .map(|&k| -x[k] / (sign * d[k]))
        .filter(|t| *t > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    let (mut t0, mut f0) = (0.0, value(0.0).max(0.0));
    for t1 in breaks {
        let f1 = value(t1);
        if f1 < 0.0 {
            return t0 + (t1 - t0) * f0 / (f0 - f1);
        }
        (t0, f0) = (t1, f1);
    }
    let tail = sign * dot(a, d)
        + terms
            .iter()
            .map(|&k| (sign * d[k]).min(0.0))
            .sum::<f64>();
    if tail < 0.0 {
        t0 + f0 / -tail
    } else {
        f64::INFINITY
    }
}

/// Hit-And-Run over `sys` starting at its Chebyshev center.
///
/// Directions are isotropic within the affine hull of the equality rows and
/// each step lands uniformly on the feasible chord. After `burn_in` steps every
/// `thinning`-th point is emitted. The objective and `epsilon_mode` are ignored.
pub fn har_sample(
    sys: &LinearConstraintSystem,
    cfg: &SamplerConfig,
    control: RunControl<'_>,
) -> Result<Vec<Vec<f64>>, SmaaError> {
    cfg.validate()?;
    let start = chebyshev_center(sys)?;
    let hull = AffineHull::of(sys);
    let polytope = Polytope::of(sys);
    let done = std::sync::atomic::AtomicUsize::new(0);
    let total = cfg.sample_count;
    let per_chain: Vec<usize> = (0..cfg.chains)
        .map(|c| total / cfg.chains + usize::from(c < total % cfg.chains))
        .collect();
    let chains = per_chain
        .par_iter()
        .enumerate()
        .map(|(chain, &count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chain as u64);
            let mut x = start.clone();
            let mut out = Vec::with_capacity(count);
            let mut step = 0usize;
            while out.len() < count {
                if step % PROGRESS_STRIDE == 0 && control.cancelled() {
                    return Err(SmaaError::Cancelled);
                }
                har_step(&mut x, &hull, &polytope, &mut rng)?;
                step += 1;
                if step > cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0 {
                    out.push(x.clone());
                    let completed = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if let Some(progress) = control.progress {
                        if completed % PROGRESS_STRIDE == 0 || completed == total {
                            progress(completed, total);
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, SmaaError>>()?;
    Ok(chains.into_iter().flatten().collect())
}

fn har_step(
    x: &mut [f64],
    hull: &AffineHull,
    polytope: &Polytope,
    rng: &mut ChaCha8Rng,
) -> Result<(), SmaaError> {
    let mut d = vec![0.0; x.len()];
    for q in hull.null_basis() {
        let z: f64 = rng.sample(StandardNormal);
        d.iter_mut().zip(q).for_each(|(di, qi)| *di += z * qi);
    }
    let (lo, hi) = polytope.chord(x, &d);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(SmaaError::UnboundedChord);
    }
    let u: f64 = rng.random();
    let t = lo + u * (hi - lo);
    x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += t * di);
    Ok(())
}

/// Capacities sampled from `E^DM` with `ε` fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySamples {
    /// Möbius vectors in [`MobiusLayout`] order.
    pub points: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub eps_star: f64,
}

/// Resolves `ε` from the configuration and `ε*` of the system.
pub fn resolve_epsilon(edm: &EdmSystem, mode: EpsilonMode) -> Result<(f64, f64), SmaaError> {
    let consistency = check_consistency(edm)?;
    let eps_star = match consistency.eps_star {
        Some(e) if consistency.feasible => e,
        other => return Err(SmaaError::Inconsistent { eps_star: other }),
    };
    let epsilon = match mode {
        EpsilonMode::Fixed(value) => {
            if value > eps_star + FEASIBILITY_TOL {
                return Err(SmaaError::EpsilonAboveOptimum { value, eps_star });
            }
            value
        }
        EpsilonMode::FractionOfEpsStar(ratio) => ratio * eps_star,
    };
    debug_assert!(eps_star > EPSILON_THRESHOLD);
    Ok((epsilon, eps_star))
}

/// Samples compatible capacities with `ε` resolved per `cfg.epsilon_mode`.
pub fn sample_capacities(
    edm: &EdmSystem,
    cfg: &SamplerConfig,
    control: RunControl<'_>,
) -> Result<CapacitySamples, SmaaError> {
    cfg.validate()?;
    let (epsilon, eps_star) = resolve_epsilon(edm, cfg.epsilon_mode)?;
    let fixed = edm.system.fix_variable(edm.epsilon(), epsilon)?;
    let points = har_sample(&fixed, cfg, control)?;
    Ok(CapacitySamples {
        points,
        epsilon,
        eps_star,
    })
}

/// `rank(k) = 1 + #{j : v_j > v_k}`; values within `1e-12` count as tied.
pub fn rank_function(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|&v| 1 + values.iter().filter(|&&w| beats(w, v)).count())
        .collect()
}

fn beats(a: f64, b: f64) -> bool {
    a > b + TIE_TOLERANCE
}

/// Indices at one node. `rai[a][s]` is the frequency of rank `s + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeIndices {
    pub node: NodeId,
    pub node_name: String,
    pub rank_counts: Vec<Vec<u64>>,
    pub win_counts: Vec<Vec<u64>>,
    pub tie_counts: Vec<Vec<u64>>,
    pub rai: Vec<Vec<f64>>,
    pub pwi: Vec<Vec<f64>>,
    pub ties: Vec<Vec<f64>>,
    pub down_cum: Vec<Vec<f64>>,
    pub up_cum: Vec<Vec<f64>>,
}

impl NodeIndices {
    fn from_counts(
        node: NodeId,
        node_name: String,
        rank_counts: Vec<Vec<u64>>,
        win_counts: Vec<Vec<u64>>,
        samples: u64,
    ) -> Self {
        let n = rank_counts.len();
        let total = samples as f64;
        let tie_counts: Vec<Vec<u64>> = (0..n)
            .map(|a| (0..n).map(|b| samples - win_counts[a][b] - win_counts[b][a]).collect())
            .collect();
        let freq = |m: &[Vec<u64>]| -> Vec<Vec<f64>> {
            m.iter()
                .map(|row| row.iter().map(|&c| c as f64 / total).collect())
                .collect()
        };
        let cumulative = |ascending: bool| -> Vec<Vec<f64>> {
            rank_counts
                .iter()
                .map(|row| {
                    let mut acc = 0u64;
                    let mut out = vec![0.0; row.len()];
                    let order: Vec<usize> = if ascending {
                        (0..row.len()).collect()
                    } else {
                        (0..row.len()).rev().collect()
                    };
                    for s in order {
                        acc += row[s];
                        out[s] = acc as f64 / total;
                    }
                    out
                })
                .collect()
        };
        Self {
            node,
            node_name,
            rai: freq(&rank_counts),
            pwi: freq(&win_counts),
            ties: freq(&tie_counts),
            down_cum: cumulative(true),
            up_cum: cumulative(false),
            rank_counts,
            win_counts,
            tie_counts,
        }
    }

    /// Rank (1-based) attained with the highest frequency, ties resolved toward the better rank.
    pub fn modal_rank(&self, a: usize) -> usize {
        let row = &self.rank_counts[a];
        let best = row.iter().copied().max().unwrap_or(0);
        row.iter().position(|&c| c == best).unwrap_or(0) + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmaaResult {
    pub alternatives: Vec<String>,
    pub sample_count: usize,
    pub nodes: Vec<NodeIndices>,
    /// Coordinatewise mean of the samples; absent for the additive baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barycenter: Option<MobiusCapacity2Add>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_star: Option<f64>,
    pub config: SamplerConfig,
}

impl SmaaResult {
    pub fn node(&self, id: &NodeId) -> Option<&NodeIndices> {
        self.nodes.iter().find(|n| &n.node == id)
    }
}

/// Sparse linear forms: numerator of each alternative's value and the node importance.
struct NodeForms {
    alternatives: Vec<Vec<(usize, f64)>>,
    importance: Vec<usize>,
}

impl NodeForms {
    fn build(h: &CriteriaHierarchy, table: &PerformanceTable, r: &NodeId) -> Result<Self, HierarchyError> {
        let leaves = h.elementary_descendants(r)?;
        let layout = MobiusLayout::new(h.elementary_count());
        let mut importance = Vec::new();
        for (k, &t1) in leaves.iter().enumerate() {
            importance.push(layout.singleton(t1));
            importance.extend(leaves[k + 1..].iter().map(|&t2| layout.pair(t1, t2)));
        }
        let alternatives = (0..table.len())
            .map(|a| {
                let x = table.row(a);
                let mut form = Vec::new();
                for (k, &t1) in leaves.iter().enumerate() {
                    if x[t1] != 0.0 {
                        form.push((layout.singleton(t1), x[t1]));
                    }
                    for &t2 in &leaves[k + 1..] {
                        let v = x[t1].min(x[t2]);
                        if v != 0.0 {
                            form.push((layout.pair(t1, t2), v));
                        }
                    }
                }
                form
            })
            .collect();
        Ok(Self {
            alternatives,
            importance,
        })
    }

    fn values(&self, m: &[f64]) -> Vec<f64> {
        let scale: f64 = self.importance.iter().map(|&k| m[k]).sum();
        self.alternatives
            .iter()
            .map(|form| form.iter().map(|&(k, v)| v * m[k]).sum::<f64>() / scale)
            .collect()
    }
}

#[derive(Clone)]
struct Counts {
    ranks: Vec<Vec<u64>>,
    wins: Vec<Vec<u64>>,
}

impl Counts {
    fn new(n: usize) -> Self {
        Self {
            ranks: vec![vec![0; n]; n],
            wins: vec![vec![0; n]; n],
        }
    }

    fn record(&mut self, values: &[f64]) {
        for (a, rank) in rank_function(values).into_iter().enumerate() {
            self.ranks[a][rank - 1] += 1;
        }
        for (a, &va) in values.iter().enumerate() {
            for (b, &vb) in values.iter().enumerate() {
                if beats(va, vb) {
                    self.wins[a][b] += 1;
                }
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (x, y) in self.ranks.iter_mut().zip(&other.ranks) {
            x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
        }
        for (x, y) in self.wins.iter_mut().zip(&other.wins) {
            x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
        }
        self
    }
}

/// RAI, PWI and cumulative indices at each requested node.
///
/// Counting is an integer reduction, so the result does not depend on the
/// parallel schedule.
pub fn compute_indices(
    samples: &[Vec<f64>],
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    nodes: &[NodeId],
) -> Result<Vec<NodeIndices>, SmaaError> {
    if samples.is_empty() {
        return Err(SmaaError::NoSamples);
    }
    let n = table.len();
    nodes
        .iter()
        .map(|r| {
            let forms = NodeForms::build(h, table, r)?;
            let counts = samples
                .par_iter()
                .fold(
                    || Counts::new(n),
                    |mut acc, m| {
                        acc.record(&forms.values(m));
                        acc
                    },
                )
                .reduce(|| Counts::new(n), Counts::merge);
            Ok(NodeIndices::from_counts(
                r.clone(),
                h.name(r)?.to_string(),
                counts.ranks,
                counts.wins,
                samples.len() as u64,
            ))
        })
        .collect()
}

/// Coordinatewise mean of Möbius vectors.
pub fn barycenter(samples: &[Vec<f64>], criteria: usize) -> Result<MobiusCapacity2Add, SmaaError> {
    let first = samples.first().ok_or(SmaaError::NoSamples)?;
    let mut sum = vec![0.0; first.len()];
    for s in samples {
        sum.iter_mut().zip(s).for_each(|(acc, v)| *acc += v);
    }
    let count = samples.len() as f64;
    sum.iter_mut().for_each(|v| *v /= count);
    MobiusCapacity2Add::from_vector(criteria, &sum)
        .map_err(|e| SmaaError::Hierarchy(HierarchyError::Capacity(e)))
}

/// Full pipeline: sample, aggregate indices at `nodes`, compute the barycenter.
pub fn run_smaa(
    edm: &EdmSystem,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    nodes: &[NodeId],
    cfg: &SamplerConfig,
    control: RunControl<'_>,
) -> Result<SmaaResult, SmaaError> {
    let samples = sample_capacities(edm, cfg, control)?;
    let indices = compute_indices(&samples.points, h, table, nodes)?;
    let bary = barycenter(&samples.points, h.elementary_count())?;
    Ok(SmaaResult {
        alternatives: table.ids(),
        sample_count: samples.points.len(),
        nodes: indices,
        barycenter: Some(bary),
        epsilon: Some(samples.epsilon),
        eps_star: Some(samples.eps_star),
        config: *cfg,
    })
}

/// Ranking of the alternatives at one node under a single capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRanking {
    pub node: NodeId,
    pub node_name: String,
    pub alternatives: Vec<String>,
    pub values: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl NodeRanking {
    /// Alternative indices ordered by rank, ties kept in table order.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranks.len()).collect();
        idx.sort_by_key(|&a| self.ranks[a]);
        idx
    }
}

pub fn barycenter_ranking(
    bary: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    table: &PerformanceTable,
    nodes: &[NodeId],
) -> Result<Vec<NodeRanking>, SmaaError> {
    let m = bary.to_vector();
    nodes
        .iter()
        .map(|r| {
            crate::hierarchy::node_importance(bary, h, r)?;
            let values = NodeForms::build(h, table, r)?.values(&m);
            Ok(NodeRanking {
                node: r.clone(),
                node_name: h.name(r)?.to_string(),
                alternatives: table.ids(),
                ranks: rank_function(&values),
                values,
            })
        })
        .collect()
}

/// Additive baseline: weights uniform on the simplex, weighted-sum values, root only.
pub fn smaa2_additive(table: &PerformanceTable, cfg: &SamplerConfig) -> Result<SmaaResult, SmaaError> {
    cfg.validate()?;
    let n = table.len();
    let criteria = table.criteria_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = Counts::new(n);
    let mut w = vec![0.0; criteria];
    for _ in 0..cfg.sample_count {
        w.iter_mut().for_each(|wi| *wi = rng.sample(Exp1));
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= total);
        let values: Vec<f64> = (0..n).map(|a| dot(&w, table.row(a))).collect();
        counts.record(&values);
    }
    Ok(SmaaResult {
        alternatives: table.ids(),
        sample_count: cfg.sample_count,
        nodes: vec![NodeIndices::from_counts(
            NodeId::root(),
            "root".into(),
            counts.ranks,
            counts.wins,
            cfg.sample_count as u64,
        )],
        barycenter: None,
        epsilon: None,
        eps_star: None,
        config: *cfg,
    })
}
