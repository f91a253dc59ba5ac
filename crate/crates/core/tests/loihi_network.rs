use ndarray::{array, Array2};
use proptest::prelude::*;
use spike_alloc::ideal::solve_rates;
use spike_alloc::loihi::{neuron_count, quantize_rates, run_rates, Layer, Network, NetworkConfig};

fn connected(n: usize, m: usize) -> Array2<bool> {
    Array2::from_elem((n, m), true)
}

/// Steps `net` for `ticks` ticks, returning `(tick, potentials after it)`
/// and every accumulation fire.
fn trace(net: &mut Network<f64>, ticks: u64) -> (Vec<Vec<i64>>, Vec<(u64, usize)>) {
    let mut volts = Vec::new();
    let mut fires = Vec::new();
    for _ in 0..ticks {
        let ev = net.step();
        fires.extend(ev.acc_fired.iter().map(|&k| (ev.tick, k)));
        volts.push(net.potentials().to_vec());
    }
    (volts, fires)
}

#[test]
fn neuron_counts_for_square_sizes() {
    let expected = [(2, 12), (3, 24), (4, 40), (5, 60), (6, 84), (7, 112), (8, 144)];
    for (n, total) in expected {
        assert_eq!(neuron_count(n, n), total);
        let net = Network::<f64>::from_rates(Array2::from_elem((n, n), 1.0), &connected(n, n), NetworkConfig::default()).unwrap();
        assert_eq!(net.total_neurons(), total);
    }
}

#[test]
fn distinct_winners_agree_across_engines() {
    let gamma = array![[1.0, 0.2, 0.1], [0.15, 0.9, 0.2], [0.1, 0.2, 0.8]];
    let cm = connected(3, 3);
    let ideal = solve_rates(&gamma, &cm, 1.0).unwrap();
    let sim = run_rates(gamma, &cm, NetworkConfig::default()).unwrap();
    assert_eq!(ideal.allocation.tasks(), &[1, 2, 3]);
    assert_eq!(sim.allocation, ideal.allocation);
    assert!(sim.conflicts.is_empty());
}

#[test]
fn equal_rates_collide_and_resolve() {
    for n in 2..=4 {
        let sim = run_rates(Array2::from_elem((n, n), 0.7), &connected(n, n), NetworkConfig::default()).unwrap();
        let first = &sim.conflicts[0];
        assert_eq!(first.fires.len(), n * n);
        assert_eq!(first.resolution.admitted.len(), n);
        assert_eq!(sim.allocation.assigned_count(), n);
        assert!(!sim.timed_out());
    }
}

#[test]
fn raster_and_voltage_shapes() {
    let sim = run_rates(array![[0.9, 0.4], [0.3, 0.8]], &connected(2, 2), NetworkConfig::default().with_threshold(2550)).unwrap();
    assert_eq!(sim.voltage_trace.len(), 4);
    assert!(sim.voltage_trace.iter().all(|v| v.len() as u64 == sim.ticks));
    let inputs = sim.raster.iter().filter(|(_, l, _)| *l == Layer::Input).count() as u64;
    assert_eq!(inputs, 4 * sim.ticks.div_ceil(4));
    assert_eq!(sim.acc_spikes().count(), 2);
}

fn halving_case(g: f64) -> (i64, Vec<i64>) {
    let gamma = array![[1.0, 0.02], [g, 0.02]];
    let w = quantize_rates(&gamma, &connected(2, 2)).unwrap()[[1, 0]] as i64;
    let mut net = Network::from_rates(gamma, &connected(2, 2), NetworkConfig::default()).unwrap();
    let (volts, fires) = trace(&mut net, 4000);
    let armed = net.armed_at(net.task_control(0)).expect("task 1 control armed") as usize;
    let k = net.acc_index(1, 0);
    let stop = fires.iter().find(|&&(_, f)| f == k).map_or(volts.len(), |&(t, _)| t as usize);
    // whole input periods that start after the first inhibition arrives
    let start = armed + 3;
    let gains = (start..stop.saturating_sub(4)).step_by(4).map(|t| volts[t + 4][k] - volts[t][k]).collect();
    (w, gains)
}

#[test]
fn competing_neuron_slows_to_about_half() {
    let (w, gains) = halving_case(0.8);
    assert_eq!(w, 204);
    assert!(gains.len() > 10);
    assert!(gains.iter().all(|&d| d == 102), "{gains:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slope_halves_after_task_control_arms(g in 0.3f64..0.99) {
        let (w, gains) = halving_case(g);
        let expected = w - 2 * ((w + 2) / 4);
        prop_assert!(!gains.is_empty());
        for d in gains {
            prop_assert!((d - expected).abs() <= 1, "w {} gain {} expected {}", w, d, expected);
        }
    }

    #[test]
    fn locked_vehicles_never_fire_again(v in prop::collection::vec(0.05f64..1.0, 9)) {
        let gamma = Array2::from_shape_vec((3, 3), v).unwrap();
        let cfg = NetworkConfig { threshold_acc: 510, ..NetworkConfig::default() };
        let mut net = Network::from_rates(gamma, &connected(3, 3), cfg).unwrap();
        let (_, fires) = trace(&mut net, 100_000);
        for i in 0..3 {
            let Some(armed) = net.armed_at(net.vehicle_control(i)) else { continue };
            for &(t, k) in &fires {
                if net.pair_of(k).0 == i {
                    prop_assert!(t <= armed, "vehicle {} fired at {} after arming at {}", i, t, armed);
                }
            }
        }
        prop_assert!(net.potentials().iter().all(|&p| p >= cfg.potential_floor));
    }

    #[test]
    fn resolved_allocation_is_single_assignment(v in prop::collection::vec(0.05f64..1.0, 12)) {
        let gamma = Array2::from_shape_vec((4, 3), v).unwrap();
        let sim = run_rates(gamma, &connected(4, 3), NetworkConfig::default().with_threshold(1020)).unwrap();
        let mut seen = [false; 4];
        for (_, f) in &sim.admitted {
            prop_assert!(!seen[f.vehicle]);
            seen[f.vehicle] = true;
        }
        prop_assert_eq!(sim.allocation.assigned_count(), 4);
    }
}
