//! Criteria trees and node-level Choquet, Shapley and interaction values.
//!
//! Node ids are 1-based index paths: the root is the empty path, child `k` of
//! node `r` is `(r, k)`. Elementary criteria (the leaves) receive ordinals in
//! depth-first order, and the global capacity lives on those ordinals only.
//! Every node-level quantity is derived from it by restricting to the leaves
//! below the node and dividing by the node's importance `μ(E(g_r))`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::capacity::{CapacityError, ElementaryCriterionId, MobiusCapacity2Add};

/// Denominators at or below this value are treated as zero importance.
pub const ZERO_IMPORTANCE: f64 = 1e-12;

/// Node values closer than this compare as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("unknown criterion node `{0}`")]
    UnknownNode(String),
    #[error("criterion name `{0}` is used more than once")]
    DuplicateName(String),
    #[error("invalid hierarchy: {0}")]
    Structure(String),
    #[error("node {node} is elementary and has no sub-criteria")]
    Elementary { node: NodeId },
    #[error("node {node} is not a sub-criterion of {scope}")]
    NotDescendant { node: NodeId, scope: NodeId },
    #[error("nodes {first} and {second} are not on the same level")]
    LevelMismatch { first: NodeId, second: NodeId },
    #[error("node {0} is given twice where two distinct criteria are required")]
    IdenticalSubjects(NodeId),
    #[error("criteria below {node} have null importance (μ = {value})")]
    ZeroImportance { node: NodeId, value: f64 },
    #[error("expected {expected} evaluations, got {actual}")]
    EvaluationLength { expected: usize, actual: usize },
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

/// Index-path identifier of a criterion node; the root is the empty path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(Vec<usize>);

impl NodeId {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn from_path(path: Vec<usize>) -> Self {
        Self(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Level in the hierarchy; the root is at level 0.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, k: usize) -> Self {
        let mut path = self.0.clone();
        path.push(k);
        Self(path)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(Self(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// True if `self` lies strictly below `ancestor`.
    pub fn is_strictly_below(&self, ancestor: &NodeId) -> bool {
        self.0.len() > ancestor.0.len() && self.0.starts_with(&ancestor.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for NodeId {
    type Err = HierarchyError;

    /// Accepts `root`, `0` or an empty string for the root, otherwise dotted 1-based indices.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "root" || s == "0" {
            return Ok(Self::root());
        }
        s.split('.')
            .map(|part| match part.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(HierarchyError::UnknownNode(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Preference direction of an elementary criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafDescriptor {
    pub criterion: ElementaryCriterionId,
    pub direction: Direction,
    pub unit: String,
}

/// Serializable description of a criteria tree, as found in problem documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl NodeSpec {
    pub fn leaf(name: &str, direction: Direction) -> Self {
        Self {
            name: name.to_string(),
            description: None,
            children: Vec::new(),
            direction: Some(direction),
            unit: None,
        }
    }

    pub fn group(name: &str, children: Vec<NodeSpec>) -> Self {
        Self {
            name: name.to_string(),
            description: None,
            children,
            direction: None,
            unit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionNode {
    pub id: NodeId,
    pub name: String,
    pub children: Vec<CriterionNode>,
    pub leaf: Option<LeafDescriptor>,
}

impl CriterionNode {
    pub fn is_elementary(&self) -> bool {
        self.leaf.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaHierarchy {
    root: CriterionNode,
    elementary: Vec<ElementaryCriterionId>,
    leaf_paths: Vec<NodeId>,
    by_name: HashMap<String, NodeId>,
}

impl CriteriaHierarchy {
    pub fn from_spec(spec: &NodeSpec) -> Result<Self, HierarchyError> {
        if spec.children.is_empty() {
            return Err(HierarchyError::Structure(
                "the root criterion needs at least one sub-criterion".into(),
            ));
        }
        let mut elementary = Vec::new();
        let mut leaf_paths = Vec::new();
        let mut by_name = HashMap::new();
        let root = build_node(
            spec,
            NodeId::root(),
            &mut elementary,
            &mut leaf_paths,
            &mut by_name,
        )?;
        Ok(Self {
            root,
            elementary,
            leaf_paths,
            by_name,
        })
    }

    /// Single-level hierarchy with every criterion attached to the root.
    pub fn flat(names: &[&str]) -> Result<Self, HierarchyError> {
        let children = names
            .iter()
            .map(|n| NodeSpec::leaf(n, Direction::Increasing))
            .collect();
        Self::from_spec(&NodeSpec::group("root", children))
    }

    pub fn to_spec(&self) -> NodeSpec {
        fn go(node: &CriterionNode) -> NodeSpec {
            NodeSpec {
                name: node.name.clone(),
                description: None,
                children: node.children.iter().map(go).collect(),
                direction: node.leaf.as_ref().map(|l| l.direction),
                unit: node
                    .leaf
                    .as_ref()
                    .map(|l| l.unit.clone())
                    .filter(|u| !u.is_empty()),
            }
        }
        go(&self.root)
    }

    pub fn root(&self) -> &CriterionNode {
        &self.root
    }

    pub fn elementary(&self) -> &[ElementaryCriterionId] {
        &self.elementary
    }

    pub fn elementary_count(&self) -> usize {
        self.elementary.len()
    }

    pub fn leaf_path(&self, ordinal: usize) -> &NodeId {
        &self.leaf_paths[ordinal]
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.leaf_paths
            .iter()
            .map(|p| self.node(p).expect("leaf path").leaf.as_ref().expect("leaf").direction)
            .collect()
    }

    pub fn node(&self, id: &NodeId) -> Result<&CriterionNode, HierarchyError> {
        let mut node = &self.root;
        for &k in id.path() {
            node = k
                .checked_sub(1)
                .and_then(|i| node.children.get(i))
                .ok_or_else(|| HierarchyError::UnknownNode(id.to_string()))?;
        }
        Ok(node)
    }

    pub fn name(&self, id: &NodeId) -> Result<&str, HierarchyError> {
        Ok(&self.node(id)?.name)
    }

    /// Resolves a criterion by name or by dotted path.
    pub fn resolve(&self, reference: &str) -> Result<NodeId, HierarchyError> {
        if let Some(id) = self.by_name.get(reference.trim()) {
            return Ok(id.clone());
        }
        let id: NodeId = reference
            .parse()
            .map_err(|_| HierarchyError::UnknownNode(reference.to_string()))?;
        self.node(&id)?;
        Ok(id)
    }

    /// Non-elementary nodes in depth-first order, root first.
    pub fn internal_nodes(&self) -> Vec<NodeId> {
        fn go(node: &CriterionNode, out: &mut Vec<NodeId>) {
            if !node.is_elementary() {
                out.push(node.id.clone());
                for child in &node.children {
                    go(child, out);
                }
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out
    }

    /// Ordinals of the elementary criteria below `id` (the node itself if elementary), ascending.
    pub fn elementary_descendants(&self, id: &NodeId) -> Result<Vec<usize>, HierarchyError> {
        fn go(node: &CriterionNode, out: &mut Vec<usize>) {
            match &node.leaf {
                Some(leaf) => out.push(leaf.criterion.ordinal),
                None => node.children.iter().for_each(|c| go(c, out)),
            }
        }
        let mut out = Vec::new();
        go(self.node(id)?, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    /// Union of the elementary descendants of a family of nodes.
    pub fn elementary_of_family(&self, family: &[NodeId]) -> Result<Vec<usize>, HierarchyError> {
        let mut set = BTreeSet::new();
        for id in family {
            set.extend(self.elementary_descendants(id)?);
        }
        Ok(set.into_iter().collect())
    }

    /// Sub-criteria of `scope` located at hierarchy level `level`.
    pub fn level_members(&self, scope: &NodeId, level: usize) -> Result<Vec<NodeId>, HierarchyError> {
        fn go(node: &CriterionNode, level: usize, out: &mut Vec<NodeId>) {
            if node.id.depth() == level {
                out.push(node.id.clone());
            } else if node.id.depth() < level {
                node.children.iter().for_each(|c| go(c, level, out));
            }
        }
        let node = self.node(scope)?;
        let mut out = Vec::new();
        if level > scope.depth() {
            node.children.iter().for_each(|c| go(c, level, &mut out));
        }
        Ok(out)
    }

    fn internal(&self, id: &NodeId) -> Result<&CriterionNode, HierarchyError> {
        let node = self.node(id)?;
        if node.is_elementary() {
            Err(HierarchyError::Elementary { node: id.clone() })
        } else {
            Ok(node)
        }
    }

    /// Checks that `subject` is a sub-criterion of the non-elementary node `scope`.
    pub fn check_below(&self, subject: &NodeId, scope: &NodeId) -> Result<(), HierarchyError> {
        self.internal(scope)?;
        self.node(subject)?;
        if subject.is_strictly_below(scope) {
            Ok(())
        } else {
            Err(HierarchyError::NotDescendant {
                node: subject.clone(),
                scope: scope.clone(),
            })
        }
    }
}

fn build_node(
    spec: &NodeSpec,
    id: NodeId,
    elementary: &mut Vec<ElementaryCriterionId>,
    leaf_paths: &mut Vec<NodeId>,
    by_name: &mut HashMap<String, NodeId>,
) -> Result<CriterionNode, HierarchyError> {
    let name = spec.name.trim().to_string();
    if name.is_empty() {
        return Err(HierarchyError::Structure(format!("node {id} has an empty name")));
    }
    if by_name.insert(name.clone(), id.clone()).is_some() {
        return Err(HierarchyError::DuplicateName(name));
    }
    if spec.children.is_empty() {
        let direction = spec.direction.ok_or_else(|| {
            HierarchyError::Structure(format!("elementary criterion `{name}` has no direction"))
        })?;
        let criterion = ElementaryCriterionId {
            id: name.clone(),
            ordinal: elementary.len(),
        };
        elementary.push(criterion.clone());
        leaf_paths.push(id.clone());
        return Ok(CriterionNode {
            id,
            name,
            children: Vec::new(),
            leaf: Some(LeafDescriptor {
                criterion,
                direction,
                unit: spec.unit.clone().unwrap_or_default(),
            }),
        });
    }
    if spec.direction.is_some() {
        return Err(HierarchyError::Structure(format!(
            "criterion `{name}` has sub-criteria and must not declare a direction"
        )));
    }
    let children = spec
        .children
        .iter()
        .enumerate()
        .map(|(k, child)| build_node(child, id.child(k + 1), elementary, leaf_paths, by_name))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CriterionNode {
        id,
        name,
        children,
        leaf: None,
    })
}

/// `μ(E(g_r))`, erroring when it vanishes.
pub fn node_importance(
    m: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    r: &NodeId,
) -> Result<f64, HierarchyError> {
    let leaves = h.elementary_descendants(r)?;
    let value = m.capacity(&leaves)?;
    if value <= ZERO_IMPORTANCE {
        return Err(HierarchyError::ZeroImportance {
            node: r.clone(),
            value,
        });
    }
    Ok(value)
}

/// Capacity `μ_r(F)` induced on the immediate sub-criteria of `r`.
pub fn derived_capacity(
    m: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    r: &NodeId,
    family: &[NodeId],
) -> Result<f64, HierarchyError> {
    let node = h.internal(r)?;
    for member in family {
        if !node.children.iter().any(|c| &c.id == member) {
            return Err(HierarchyError::NotDescendant {
                node: member.clone(),
                scope: r.clone(),
            });
        }
    }
    let denominator = node_importance(m, h, r)?;
    Ok(m.capacity(&h.elementary_of_family(family)?)? / denominator)
}

/// Choquet integral of an alternative on criterion `r`.
///
/// Evaluations outside `E(g_r)` are replaced by zero before integrating with
/// the global capacity, and the result is rescaled by `μ(E(g_r))`.
pub fn hierarchical_choquet(
    m: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    r: &NodeId,
    x: &[f64],
) -> Result<f64, HierarchyError> {
    if x.len() != m.criteria_count() {
        return Err(HierarchyError::EvaluationLength {
            expected: m.criteria_count(),
            actual: x.len(),
        });
    }
    let leaves = h.elementary_descendants(r)?;
    let mut restricted = vec![0.0; x.len()];
    for &t in &leaves {
        restricted[t] = x[t];
    }
    let denominator = node_importance(m, h, r)?;
    Ok(m.choquet_unchecked(&restricted) / denominator)
}

/// Importance of `subject` (a sub-criterion of `r` at some level below it) within `r`.
///
/// The comparison level is the level of `subject` itself: pair coefficients
/// linking it to the other members of that level are split in half, pairs
/// inside it count fully.
pub fn hierarchical_shapley(
    m: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    r: &NodeId,
    subject: &NodeId,
) -> Result<f64, HierarchyError> {
    h.check_below(subject, r)?;
    let inside = h.elementary_descendants(subject)?;
    let siblings: Vec<NodeId> = h
        .level_members(r, subject.depth())?
        .into_iter()
        .filter(|id| id != subject)
        .collect();
    let outside = h.elementary_of_family(&siblings)?;
    let mut total = 0.0;
    for (k, &t1) in inside.iter().enumerate() {
        total += m.singleton(t1);
        for &t2 in &inside[k + 1..] {
            total += m.pair(t1, t2);
        }
        for &t2 in &outside {
            total += 0.5 * m.pair(t1, t2);
        }
    }
    Ok(total / node_importance(m, h, r)?)
}

/// Interaction of two sub-criteria of `r` on the same level.
pub fn hierarchical_interaction(
    m: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    r: &NodeId,
    first: &NodeId,
    second: &NodeId,
) -> Result<f64, HierarchyError> {
    h.check_below(first, r)?;
    h.check_below(second, r)?;
    if first == second {
        return Err(HierarchyError::IdenticalSubjects(first.clone()));
    }
    if first.depth() != second.depth() {
        return Err(HierarchyError::LevelMismatch {
            first: first.clone(),
            second: second.clone(),
        });
    }
    let a = h.elementary_descendants(first)?;
    let b = h.elementary_descendants(second)?;
    let total: f64 = a
        .iter()
        .flat_map(|&t1| b.iter().map(move |&t2| (t1, t2)))
        .map(|(t1, t2)| m.pair(t1, t2))
        .sum();
    Ok(total / node_importance(m, h, r)?)
}

/// Compares two alternatives on criterion `r`; `Greater` means `a` is better.
pub fn node_preference(
    m: &MobiusCapacity2Add,
    h: &CriteriaHierarchy,
    r: &NodeId,
    a: &[f64],
    b: &[f64],
) -> Result<Ordering, HierarchyError> {
    let va = hierarchical_choquet(m, h, r, a)?;
    let vb = hierarchical_choquet(m, h, r, b)?;
    Ok(if (va - vb).abs() <= TIE_TOLERANCE {
        Ordering::Equal
    } else if va > vb {
        Ordering::Greater
    } else {
        Ordering::Less
    })
}
