use hchoquet_core::hierarchy::{
    derived_capacity, hierarchical_choquet, hierarchical_interaction, hierarchical_shapley,
    node_importance, HierarchyError,
};
use hchoquet_core::{CriteriaHierarchy, Direction, MobiusCapacity2Add, MobiusLayout, NodeId, NodeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_capacity(n: usize, rng: &mut ChaCha8Rng) -> MobiusCapacity2Add {
    let layout = MobiusLayout::new(n);
    let singletons: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let mut pairs = vec![0.0; layout.pair_count()];
    for (i, j, p) in layout.pairs() {
        let r: f64 = rng.random_range(-1.0..1.0);
        pairs[p - n] = if r < 0.0 {
            r * singletons[i].min(singletons[j]) / (n - 1) as f64
        } else {
            0.5 * r
        };
    }
    let total: f64 = singletons.iter().sum::<f64>() + pairs.iter().sum::<f64>();
    MobiusCapacity2Add::new(
        singletons.iter().map(|v| v / total).collect(),
        pairs.iter().map(|v| v / total).collect(),
    )
    .unwrap()
}

/// Root → {A: {a1, a2, a3}, B: {b1, B2: {b2, b3}}, c}.
fn three_level() -> CriteriaHierarchy {
    let leaf = |n: &str| NodeSpec::leaf(n, Direction::Increasing);
    CriteriaHierarchy::from_spec(&NodeSpec::group(
        "root",
        vec![
            NodeSpec::group("A", vec![leaf("a1"), leaf("a2"), leaf("a3")]),
            NodeSpec::group(
                "B",
                vec![leaf("b1"), NodeSpec::group("B2", vec![leaf("b2"), leaf("b3")])],
            ),
            leaf("c"),
        ],
    ))
    .unwrap()
}

/// `ν(S) = μ(E(S)) / μ(E(g_r))` over a family of sub-criteria.
fn family_capacity(m: &MobiusCapacity2Add, h: &CriteriaHierarchy, r: &NodeId, family: &[NodeId], mask: usize) -> f64 {
    let members: Vec<NodeId> = family
        .iter()
        .enumerate()
        .filter(|(k, _)| mask & (1 << k) != 0)
        .map(|(_, id)| id.clone())
        .collect();
    let leaves = h.elementary_of_family(&members).unwrap();
    let all = h.elementary_descendants(r).unwrap();
    m.capacity(&leaves).unwrap() / m.capacity(&all).unwrap()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Classical Shapley value of member `k` in the family game.
fn oracle_shapley(m: &MobiusCapacity2Add, h: &CriteriaHierarchy, r: &NodeId, family: &[NodeId], k: usize) -> f64 {
    let n = family.len();
    (0..1usize << n)
        .filter(|t| t & (1 << k) == 0)
        .map(|t| {
            let size = t.count_ones() as usize;
            let w = factorial(n - size - 1) * factorial(size) / factorial(n);
            w * (family_capacity(m, h, r, family, t | (1 << k)) - family_capacity(m, h, r, family, t))
        })
        .sum()
}

/// Classical pairwise interaction index in the family game.
fn oracle_interaction(m: &MobiusCapacity2Add, h: &CriteriaHierarchy, r: &NodeId, family: &[NodeId], i: usize, j: usize) -> f64 {
    let n = family.len();
    let (bi, bj) = (1 << i, 1 << j);
    (0..1usize << n)
        .filter(|t| t & (bi | bj) == 0)
        .map(|t| {
            let size = t.count_ones() as usize;
            let w = factorial(n - size - 2) * factorial(size) / factorial(n - 1);
            let v = |s| family_capacity(m, h, r, family, s);
            w * (v(t | bi | bj) - v(t | bi) - v(t | bj) + v(t))
        })
        .sum()
}

/// Sorted-chain Choquet integral over `E(g_r)` with the normalized restricted capacity.
fn oracle_choquet(m: &MobiusCapacity2Add, h: &CriteriaHierarchy, r: &NodeId, x: &[f64]) -> f64 {
    let mut leaves = h.elementary_descendants(r).unwrap();
    let scale = m.capacity(&leaves).unwrap();
    leaves.sort_by(|a, b| x[*a].partial_cmp(&x[*b]).unwrap());
    let mut total = 0.0;
    let mut below = 0.0;
    for k in 0..leaves.len() {
        total += (x[leaves[k]] - below) * m.capacity(&leaves[k..]).unwrap() / scale;
        below = x[leaves[k]];
    }
    total
}

fn level_families(h: &CriteriaHierarchy) -> Vec<(NodeId, usize, Vec<NodeId>)> {
    let mut out = Vec::new();
    for r in h.internal_nodes() {
        for level in r.depth() + 1..=3 {
            let family = h.level_members(&r, level).unwrap();
            if family.len() >= 2 {
                out.push((r.clone(), level, family));
            }
        }
    }
    out
}

#[test]
fn node_quantities_match_family_game_oracles() {
    let h = three_level();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let m = random_capacity(h.elementary_count(), &mut rng);
        for (r, _, family) in level_families(&h) {
            let mut efficiency = 0.0;
            for (k, subject) in family.iter().enumerate() {
                let phi = hierarchical_shapley(&m, &h, &r, subject).unwrap();
                assert!((phi - oracle_shapley(&m, &h, &r, &family, k)).abs() < 1e-10);
                efficiency += phi;
                for (j, other) in family.iter().enumerate().skip(k + 1) {
                    let i_kj = hierarchical_interaction(&m, &h, &r, subject, other).unwrap();
                    assert!((i_kj - oracle_interaction(&m, &h, &r, &family, k, j)).abs() < 1e-10);
                }
            }
            // Members of a level partition only part of E(g_r) when leaves sit higher up.
            let covered = h.elementary_of_family(&family).unwrap();
            let expected = m.capacity(&covered).unwrap() / node_importance(&m, &h, &r).unwrap();
            assert!((efficiency - expected).abs() < 1e-10);
        }
        for r in h.internal_nodes() {
            let x: Vec<f64> = (0..h.elementary_count()).map(|_| rng.random()).collect();
            let value = hierarchical_choquet(&m, &h, &r, &x).unwrap();
            assert!((value - oracle_choquet(&m, &h, &r, &x)).abs() < 1e-10);
        }
    }
}

#[test]
fn derived_capacity_is_normalized_and_monotone() {
    let h = three_level();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = random_capacity(h.elementary_count(), &mut rng);
    for r in h.internal_nodes() {
        let children: Vec<NodeId> = h.node(&r).unwrap().children.iter().map(|c| c.id.clone()).collect();
        assert!((derived_capacity(&m, &h, &r, &children).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(derived_capacity(&m, &h, &r, &[]).unwrap(), 0.0);
        for k in 0..children.len() {
            let without: Vec<NodeId> = children.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, c)| c.clone()).collect();
            assert!(derived_capacity(&m, &h, &r, &without).unwrap() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn root_quantities_reduce_to_flat_ones() {
    let h = CriteriaHierarchy::flat(&["g1", "g2", "g3", "g4"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = random_capacity(4, &mut rng);
    let root = NodeId::root();
    for i in 0..4 {
        let leaf = h.leaf_path(i).clone();
        assert!((hierarchical_shapley(&m, &h, &root, &leaf).unwrap() - m.shapley(i).unwrap()).abs() < 1e-12);
    }
    let x = [0.2, 0.9, 0.4, 0.6];
    let flat = m.choquet(&hchoquet_core::EvaluationVector::new(x.to_vec()).unwrap()).unwrap();
    assert!((hierarchical_choquet(&m, &h, &root, &x).unwrap() - flat).abs() < 1e-12);
}

#[test]
fn zero_importance_node_is_an_error() {
    let h = three_level();
    // Every coefficient touching A's leaves (ordinals 0..3) is zero.
    let n = h.elementary_count();
    let layout = MobiusLayout::new(n);
    let mut singletons = vec![0.0; n];
    singletons[3..].iter_mut().for_each(|v| *v = 1.0 / (n - 3) as f64);
    let m = MobiusCapacity2Add::new(singletons, vec![0.0; layout.pair_count()]).unwrap();
    let a = h.resolve("A").unwrap();
    assert!(matches!(
        hierarchical_choquet(&m, &h, &a, &vec![0.5; n]),
        Err(HierarchyError::ZeroImportance { .. })
    ));
}

#[test]
fn resolution_by_name_and_path() {
    let h = three_level();
    assert_eq!(h.resolve("B2").unwrap(), NodeId::from_path(vec![2, 2]));
    assert_eq!(h.resolve("2.2").unwrap(), NodeId::from_path(vec![2, 2]));
    assert_eq!(h.resolve("root").unwrap(), NodeId::root());
    assert!(h.resolve("9.9").is_err());
    assert!(h.resolve("nope").is_err());
    assert_eq!(h.elementary_descendants(&h.resolve("B").unwrap()).unwrap(), vec![3, 4, 5]);
    // Level 2 below the root mixes grandchildren of A and B; c sits on level 1 only.
    let level2 = h.level_members(&NodeId::root(), 2).unwrap();
    assert_eq!(level2.len(), 5);
}
