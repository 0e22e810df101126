use hchoquet_core::capacity::{
    choquet_sorted, interaction_exhaustive, shapley_exhaustive, GeneralMobius, SetFunction,
    Violation,
};
use hchoquet_core::{EvaluationVector, MobiusCapacity2Add, MobiusLayout};
use proptest::prelude::*;

/// Random monotone normalized 2-additive capacity.
///
/// Negative pairs are bounded by `min(s_i, s_j)/(n-1)` so every monotonicity
/// sum stays nonnegative before the final rescaling.
fn capacity_strategy() -> impl Strategy<Value = MobiusCapacity2Add> {
    (2usize..=6).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            proptest::collection::vec(0.01f64..1.0, n),
            proptest::collection::vec(-1.0f64..1.0, pairs),
        )
            .prop_map(move |(singletons, raw)| {
                let layout = MobiusLayout::new(n);
                let mut pairs = vec![0.0; layout.pair_count()];
                for (i, j, p) in layout.pairs() {
                    let r = raw[p - n];
                    pairs[p - n] = if r < 0.0 {
                        r * singletons[i].min(singletons[j]) / (n - 1) as f64
                    } else {
                        r * 0.5
                    };
                }
                let total: f64 = singletons.iter().sum::<f64>() + pairs.iter().sum::<f64>();
                MobiusCapacity2Add::new(
                    singletons.iter().map(|v| v / total).collect(),
                    pairs.iter().map(|v| v / total).collect(),
                )
                .unwrap()
            })
    })
}

fn with_evaluations() -> impl Strategy<Value = (MobiusCapacity2Add, Vec<f64>)> {
    capacity_strategy().prop_flat_map(|m| {
        let n = m.criteria_count();
        (Just(m), proptest::collection::vec(0.0f64..=1.0, n))
    })
}

/// Capacity rebuilt from subset sums of Möbius coefficients.
fn oracle_capacity(m: &MobiusCapacity2Add, set: &[usize]) -> f64 {
    let mut total = 0.0;
    for (k, &i) in set.iter().enumerate() {
        total += m.singletons()[i];
        for &j in &set[k + 1..] {
            total += m.pair(i.min(j), i.max(j));
        }
    }
    total
}

/// Sorted-chain definition over `oracle_capacity`.
fn oracle_choquet(m: &MobiusCapacity2Add, x: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| x[*a].partial_cmp(&x[*b]).unwrap());
    let mut total = 0.0;
    for k in 0..order.len() {
        let below = if k == 0 { 0.0 } else { x[order[k - 1]] };
        total += (x[order[k]] - below) * oracle_capacity(m, &order[k..]);
    }
    total
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Independent oracle: mean marginal contribution over all arrival orders.
fn oracle_shapley(m: &MobiusCapacity2Add, i: usize) -> f64 {
    let perms = permutations(m.criteria_count());
    let total: f64 = perms
        .iter()
        .map(|p| {
            let before: Vec<usize> = p.iter().take_while(|&&k| k != i).copied().collect();
            let mut with = before.clone();
            with.push(i);
            oracle_capacity(m, &with) - oracle_capacity(m, &before)
        })
        .sum();
    total / perms.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn choquet_routes_agree((m, x) in with_evaluations()) {
        let closed = m.choquet(&EvaluationVector::new(x.clone()).unwrap()).unwrap();
        let general = GeneralMobius::from_2additive(&m).unwrap();
        prop_assert!((closed - choquet_sorted(&m, &x)).abs() <= 1e-10);
        prop_assert!((closed - general.choquet(&x)).abs() <= 1e-10);
        prop_assert!((closed - oracle_choquet(&m, &x)).abs() <= 1e-10);
    }

    #[test]
    fn shapley_and_interaction_routes_agree(m in capacity_strategy()) {
        let n = m.criteria_count();
        let mut sum = 0.0;
        for i in 0..n {
            let phi = m.shapley(i).unwrap();
            prop_assert!((phi - shapley_exhaustive(&m, i).unwrap()).abs() <= 1e-10);
            prop_assert!((phi - oracle_shapley(&m, i)).abs() <= 1e-10);
            sum += phi;
            for j in (i + 1)..n {
                let closed = m.interaction(i, j).unwrap();
                prop_assert!((closed - interaction_exhaustive(&m, i, j).unwrap()).abs() <= 1e-10);
            }
        }
        prop_assert!((sum - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn generated_capacities_are_valid_and_monotone(m in capacity_strategy()) {
        prop_assert!(m.validate(1e-9).is_valid());
        prop_assert!(GeneralMobius::from_2additive(&m).unwrap().is_monotone(1e-12));
        let all: Vec<usize> = (0..m.criteria_count()).collect();
        prop_assert!((m.capacity(&all).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choquet_bounded_by_min_and_max((m, x) in with_evaluations()) {
        let v = m.choquet(&EvaluationVector::new(x.clone()).unwrap()).unwrap();
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }
}

#[test]
fn monotonicity_violation_is_located() {
    // m1 + m12 + m13 = 0.1 - 0.1 - 0.1 < 0.
    let m = MobiusCapacity2Add::new(vec![0.1, 0.5, 0.5], vec![-0.1, -0.1, 0.2]).unwrap();
    let report = m.validate(1e-9);
    assert!(!report.is_valid());
    assert!(report.violations.iter().any(|v| matches!(
        v,
        Violation::Monotonicity { criterion: 0, worst_sum } if (worst_sum + 0.1).abs() < 1e-12
    )));
    assert!(!GeneralMobius::from_2additive(&m).unwrap().is_monotone(1e-12));
}

#[test]
fn set_function_view_matches_capacity() {
    let m = MobiusCapacity2Add::new(vec![0.2, 0.3, 0.4], vec![0.05, -0.05, 0.1]).unwrap();
    assert!((m.measure_mask(0b101) - m.capacity(&[0, 2]).unwrap()).abs() < 1e-15);
    assert!((m.measure_mask(0b111) - 1.0).abs() < 1e-12);
}
