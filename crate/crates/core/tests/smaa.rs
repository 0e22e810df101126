use std::sync::atomic::{AtomicUsize, Ordering};

use hchoquet_core::dataio::case_study;
use hchoquet_core::linprog::{Domain, LinearConstraintSystem, Relation, Variable};
use hchoquet_core::preference::{assemble_edm, dominance};
use hchoquet_core::smaa::{
    barycenter_ranking, har_sample, run_smaa, smaa2_additive, EpsilonMode, RunControl,
    SamplerConfig, SmaaError,
};
use hchoquet_core::table::Alternative;
use hchoquet_core::{CriteriaHierarchy, MobiusCapacity2Add, NodeId, PerformanceTable};

fn nonnegative(names: &[&str]) -> LinearConstraintSystem {
    LinearConstraintSystem::new(
        names
            .iter()
            .map(|n| Variable {
                name: n.to_string(),
                domain: Domain::NonNegative,
            })
            .collect(),
    )
}

fn config(samples: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        sample_count: samples,
        burn_in: 2_000,
        thinning: 5,
        seed,
        ..SamplerConfig::default()
    }
}

fn mean_and_variance(points: &[Vec<f64>], k: usize) -> (f64, f64) {
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p[k]).sum::<f64>() / n;
    let var = points.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

#[test]
fn triangle_samples_have_uniform_mean() {
    let mut sys = nonnegative(&["x", "y"]);
    sys.push(vec![1.0, 1.0], Relation::Le, 1.0, "x+y<=1");
    let points = har_sample(&sys, &config(50_000, 3), RunControl::default()).unwrap();
    assert_eq!(points.len(), 50_000);
    assert!(points.iter().all(|p| sys.is_satisfied(p, 1e-12)));
    for k in 0..2 {
        let (mean, _) = mean_and_variance(&points, k);
        assert!((mean - 1.0 / 3.0).abs() < 0.01, "coordinate {k}: mean {mean}");
    }
}

#[test]
fn square_samples_have_uniform_variance() {
    let mut sys = nonnegative(&["x", "y"]);
    sys.push(vec![1.0, 0.0], Relation::Le, 1.0, "x<=1");
    sys.push(vec![0.0, 1.0], Relation::Le, 1.0, "y<=1");
    let points = har_sample(&sys, &config(50_000, 11), RunControl::default()).unwrap();
    for k in 0..2 {
        let (mean, var) = mean_and_variance(&points, k);
        assert!((mean - 0.5).abs() < 0.01);
        assert!((var - 1.0 / 12.0).abs() < 0.005, "coordinate {k}: variance {var}");
    }
}

#[test]
fn simplex_with_equality_stays_on_the_hyperplane() {
    let mut sys = nonnegative(&["x", "y", "z"]);
    sys.push(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0, "sum");
    let cfg = SamplerConfig {
        chains: 4,
        ..config(20_000, 5)
    };
    let points = har_sample(&sys, &cfg, RunControl::default()).unwrap();
    assert_eq!(points.len(), 20_000);
    for p in &points {
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|v| *v >= -1e-12));
    }
    for k in 0..3 {
        let (mean, _) = mean_and_variance(&points, k);
        assert!((mean - 1.0 / 3.0).abs() < 0.01);
    }
}

fn flat_problem(names: &[&str], rows: Vec<Vec<f64>>) -> (CriteriaHierarchy, PerformanceTable) {
    let h = CriteriaHierarchy::flat(names).unwrap();
    let alts = (0..rows.len()).map(|k| Alternative::new(format!("a{k}"))).collect();
    let table = PerformanceTable::from_evaluations(alts, names.iter().map(|s| s.to_string()).collect(), rows).unwrap();
    (h, table)
}

#[test]
fn index_identities_hold_on_the_case_study() {
    let p = case_study();
    let nodes = p.hierarchy.internal_nodes();
    let result = run_smaa(&p.edm().unwrap(), &p.hierarchy, &p.table, &nodes, &config(5_000, 1), RunControl::default()).unwrap();
    let dom = dominance(&p.table);
    let n = p.table.len();
    assert_eq!(result.nodes.len(), 4);
    for idx in &result.nodes {
        for a in 0..n {
            assert_eq!(idx.rank_counts[a].iter().sum::<u64>(), 5_000);
            assert!((idx.rai[a].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((idx.down_cum[a][n - 1] - 1.0).abs() < 1e-12);
            assert!((idx.up_cum[a][0] - 1.0).abs() < 1e-12);
            for s in 0..n {
                let expected: f64 = idx.rai[a][..=s].iter().sum();
                assert!((idx.down_cum[a][s] - expected).abs() < 1e-12);
            }
            for b in 0..n {
                let total = idx.win_counts[a][b] + idx.win_counts[b][a] + idx.tie_counts[a][b];
                assert_eq!(total, 5_000);
                if idx.node.is_root() && dom[b][a] {
                    assert_eq!(idx.win_counts[a][b], 0, "dominated alternative wins");
                }
            }
        }
    }
}

#[test]
fn symmetric_alternatives_share_first_place() {
    let (h, table) = flat_problem(&["g1", "g2"], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let edm = assemble_edm(&[], &h, &table).unwrap();
    let result = run_smaa(&edm, &h, &table, &[NodeId::root()], &config(20_000, 8), RunControl::default()).unwrap();
    let rai = &result.nodes[0].rai;
    assert!((rai[0][0] - 0.5).abs() < 0.02, "{}", rai[0][0]);
    assert!((rai[1][0] - 0.5).abs() < 0.02);
}

#[test]
fn additive_restriction_matches_the_weighted_sum_baseline() {
    let (h, table) = flat_problem(
        &["g1", "g2", "g3"],
        vec![
            vec![0.9, 0.1, 0.4],
            vec![0.2, 0.8, 0.5],
            vec![0.5, 0.5, 0.5],
            vec![0.3, 0.3, 0.9],
        ],
    );
    let mut edm = assemble_edm(&[], &h, &table).unwrap();
    edm.force_additive();
    let cfg = config(20_000, 21);
    let choquet = run_smaa(&edm, &h, &table, &[NodeId::root()], &cfg, RunControl::default()).unwrap();
    let additive = smaa2_additive(&table, &cfg).unwrap();
    for a in 0..4 {
        for s in 0..4 {
            let (x, y) = (choquet.nodes[0].rai[a][s], additive.nodes[0].rai[a][s]);
            assert!((x - y).abs() < 0.02, "rank {} of a{a}: {x} vs {y}", s + 1);
        }
    }
}

#[test]
fn barycenter_is_a_compatible_capacity() {
    let p = case_study();
    let edm = p.edm().unwrap();
    let result = run_smaa(&edm, &p.hierarchy, &p.table, &[NodeId::root()], &config(5_000, 2), RunControl::default()).unwrap();
    let bary = result.barycenter.unwrap();
    assert!(bary.validate(1e-9).is_valid());
    let mut point = bary.to_vector();
    point.push(result.epsilon.unwrap());
    assert!(edm.system.is_satisfied(&point, 1e-9));
    assert!(result.epsilon.unwrap() < result.eps_star.unwrap());
}

#[test]
fn barycenter_ranking_matches_hand_computation() {
    let (h, table) = flat_problem(
        &["g1", "g2", "g3"],
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.5, 0.5],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
    );
    // m1 = m2 = 0.3, m3 = 0.2, m12 = m13 = 0.1, m23 = 0.
    let m = MobiusCapacity2Add::new(vec![0.3, 0.3, 0.2], vec![0.1, 0.1, 0.0]).unwrap();
    let ranking = barycenter_ranking(&m, &h, &table, &[NodeId::root()]).unwrap().remove(0);
    let expected = [0.3, 0.3, 0.5, 0.7, 0.2];
    for (v, e) in ranking.values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12);
    }
    assert_eq!(ranking.ranks, vec![3, 3, 2, 1, 5]);
    assert_eq!(ranking.order(), vec![3, 2, 0, 1, 4]);
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let p = case_study();
    let edm = p.edm().unwrap();
    let nodes = p.hierarchy.internal_nodes();
    let cfg = SamplerConfig {
        chains: 3,
        ..config(3_000, 99)
    };
    let run = || run_smaa(&edm, &p.hierarchy, &p.table, &nodes, &cfg, RunControl::default()).unwrap();
    let parallel = run();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    assert_eq!(parallel, single);
    let other = run_smaa(&edm, &p.hierarchy, &p.table, &nodes, &config(3_000, 100), RunControl::default()).unwrap();
    assert_ne!(parallel.nodes, other.nodes);
}

#[test]
fn progress_is_reported_and_epsilon_is_checked() {
    let p = case_study();
    let edm = p.edm().unwrap();
    let calls = AtomicUsize::new(0);
    let progress = |done: usize, total: usize| {
        assert!(done <= total);
        calls.fetch_add(1, Ordering::Relaxed);
    };
    let control = RunControl {
        progress: Some(&progress),
        cancel: None,
    };
    run_smaa(&edm, &p.hierarchy, &p.table, &[NodeId::root()], &config(4_000, 4), control).unwrap();
    assert!(calls.load(Ordering::Relaxed) >= 4);

    let cfg = SamplerConfig {
        epsilon_mode: EpsilonMode::Fixed(0.5),
        ..config(100, 0)
    };
    assert!(matches!(
        run_smaa(&edm, &p.hierarchy, &p.table, &[NodeId::root()], &cfg, RunControl::default()),
        Err(SmaaError::EpsilonAboveOptimum { .. })
    ));
}
