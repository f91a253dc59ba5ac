mod support;

use ndarray::{array, Array2};
use proptest::prelude::*;
use spike_alloc::ideal::{replay, solve_rates, DEFAULT_THRESHOLD};
use spike_alloc::scenario::{base_rates, generate_scenario};
use spike_alloc::{solve, GenRanges, Scenario64};

fn seeded(seed: u64, n: usize, m: usize) -> Scenario64 {
    generate_scenario(seed, n, m, &GenRanges::default()).unwrap()
}

fn all_connected(n: usize, m: usize) -> Array2<bool> {
    Array2::from_elem((n, m), true)
}

#[test]
fn matches_fixed_step_integration() {
    for seed in 0..10 {
        let s = seeded(seed, 3, 3);
        let gamma = base_rates(&s);
        let max = gamma.iter().copied().fold(0.0, f64::max);
        let reference = support::fixed_step_events(&gamma, s.connectivity(), 1.0, 1e-4 / max);
        let got = solve(&s, 1.0).unwrap();
        let pairs: Vec<_> = got.events.iter().map(|e| (e.vehicle, e.task)).collect();
        let ref_pairs: Vec<_> = reference.iter().map(|&(_, i, j)| (i, j)).collect();
        assert_eq!(pairs, ref_pairs, "seed {seed}");
        for (e, r) in got.events.iter().zip(&reference) {
            assert!((e.time - r.0).abs() < 1e-9 * r.0.max(1.0), "seed {seed}: {} vs {}", e.time, r.0);
        }
    }
}

#[test]
fn first_event_is_rate_argmax() {
    let r = solve_rates(&array![[0.9, 0.1], [0.2, 0.3]], &all_connected(2, 2), 1.0).unwrap();
    assert_eq!((r.events[0].vehicle, r.events[0].task), (0, 0));
    assert_eq!(r.events[0].time, 1.0 / 0.9);
}

#[test]
fn dominant_task_takes_two_vehicles() {
    let r = solve_rates(&array![[3.0, 0.2], [2.9, 0.3]], &all_connected(2, 2), 1.0).unwrap();
    assert_eq!(r.allocation.tasks(), &[1, 1]);
}

#[test]
fn unassignable_rows_are_reported() {
    let cm = array![[true, true], [false, false], [true, false]];
    let r = solve_rates(&array![[1.0, 0.5], [0.8, 0.8], [0.0, 0.7]], &cm, 1.0).unwrap();
    assert_eq!(r.unassignable, vec![1, 2]);
    assert_eq!(r.allocation.tasks(), &[1, 0, 0]);
}

#[test]
fn zero_rates_terminate_at_once() {
    let r = solve_rates(&Array2::<f64>::zeros((2, 3)), &all_connected(2, 3), 1.0).unwrap();
    assert!(r.events.is_empty());
    assert_eq!(r.unassignable, vec![0, 1]);
}

#[test]
fn single_precision_agrees_on_seeded_cases() {
    for seed in 0..20 {
        let s64 = seeded(seed, 4, 4);
        let s32 = generate_scenario::<f32>(seed, 4, 4, &GenRanges::default()).unwrap();
        let a = solve(&s64, 1.0).unwrap().allocation;
        let b = solve(&s32, 1.0).unwrap().allocation;
        assert_eq!(a, b, "seed {seed}");
    }
}

fn gamma_strategy() -> impl Strategy<Value = Array2<f64>> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(n, m)| {
        prop::collection::vec(0.01f64..2.0, n * m).prop_map(move |v| Array2::from_shape_vec((n, m), v).unwrap())
    })
}

fn cm_strategy(n: usize, m: usize) -> impl Strategy<Value = Array2<bool>> {
    prop::collection::vec(prop::bool::weighted(0.8), n * m).prop_map(move |v| Array2::from_shape_vec((n, m), v).unwrap())
}

fn gamma_and_cm() -> impl Strategy<Value = (Array2<f64>, Array2<bool>)> {
    gamma_strategy().prop_flat_map(|g| {
        let (n, m) = g.dim();
        (Just(g), cm_strategy(n, m))
    })
}

proptest! {
    #[test]
    fn each_vehicle_fires_at_most_once((gamma, cm) in gamma_and_cm()) {
        let r = solve_rates(&gamma, &cm, DEFAULT_THRESHOLD).unwrap();
        let mut seen = vec![false; gamma.nrows()];
        for e in &r.events {
            prop_assert!(!seen[e.vehicle]);
            seen[e.vehicle] = true;
            prop_assert!(cm[[e.vehicle, e.task]]);
            prop_assert_eq!(r.allocation.tasks()[e.vehicle], e.task + 1);
        }
        for i in 0..gamma.nrows() {
            prop_assert_eq!(seen[i], !r.unassignable.contains(&i));
        }
        prop_assert!(r.events.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn halving_audit_after_each_event((gamma, cm) in gamma_and_cm()) {
        let r = solve_rates(&gamma, &cm, DEFAULT_THRESHOLD).unwrap();
        let states = replay(&gamma, &cm, &r.events).unwrap();
        let mut per_task = vec![0i32; gamma.ncols()];
        let mut assigned = vec![false; gamma.nrows()];
        for (e, st) in r.events.iter().zip(&states) {
            per_task[e.task] += 1;
            assigned[e.vehicle] = true;
            let d: u32 = st.d_count.iter().sum();
            prop_assert_eq!(d as usize, st.tau.iter().filter(|t| !**t).count());
            let j = e.task;
            prop_assert_eq!(st.beta[j], 0.5f64.powi(per_task[j]));
            for i in 0..gamma.nrows() {
                let rate = spike_alloc::ideal::effective_rates(&gamma, &cm, &st.beta, &st.tau).unwrap()[[i, j]];
                let expected = if cm[[i, j]] && !assigned[i] { gamma[[i, j]] * 0.5f64.powi(per_task[j]) } else { 0.0 };
                prop_assert_eq!(rate, expected);
            }
        }
    }

    #[test]
    fn scaling_rates_rescales_time((gamma, cm) in gamma_and_cm(), c in prop::sample::select(vec![0.1, 1.0, 37.5])) {
        let base = solve_rates(&gamma, &cm, 1.0).unwrap();
        let scaled = solve_rates(&gamma.mapv(|g| g * c), &cm, 1.0).unwrap();
        prop_assert_eq!(&base.allocation, &scaled.allocation);
        prop_assert_eq!(base.events.len(), scaled.events.len());
        for (a, b) in base.events.iter().zip(&scaled.events) {
            prop_assert_eq!((a.vehicle, a.task), (b.vehicle, b.task));
            prop_assert!((a.time / c - b.time).abs() <= 1e-9 * b.time);
        }
    }

    #[test]
    fn threshold_only_rescales_time((gamma, cm) in gamma_and_cm(), theta in 0.01f64..100.0) {
        let base = solve_rates(&gamma, &cm, 1.0).unwrap();
        let other = solve_rates(&gamma, &cm, theta).unwrap();
        prop_assert_eq!(base.allocation, other.allocation);
    }

    #[test]
    fn deterministic((gamma, cm) in gamma_and_cm()) {
        prop_assert_eq!(solve_rates(&gamma, &cm, 1.0).unwrap(), solve_rates(&gamma, &cm, 1.0).unwrap());
    }
}
