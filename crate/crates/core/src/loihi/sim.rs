use std::cmp::Ordering;
use std::io::{self, Write};

use ndarray::Array2;

use super::{Layer, Network, NetworkConfig, SimError};
use crate::scalar::Scalar;
use crate::scenario::{base_rates, Allocation, Scenario};

pub const RASTER_HEADER: &str = "# spike-alloc raster v1";
pub const VOLTAGE_HEADER: &str = "# spike-alloc voltage v1";

/// An accumulation-layer spike, as a 0-based vehicle-task pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccFire {
    pub vehicle: usize,
    pub task: usize,
}

/// Allocation bookkeeping applied to accumulation spikes as they arrive.
#[derive(Debug, Clone, PartialEq)]
pub struct Bookkeeping {
    pub allocation: Allocation,
    /// `true` while the vehicle is still unassigned.
    pub tau: Vec<bool>,
    pub d_count: Vec<u32>,
}

impl Bookkeeping {
    pub fn new(n_vehicles: usize, m_tasks: usize) -> Self {
        Bookkeeping {
            allocation: Allocation::unassigned(n_vehicles),
            tau: vec![true; n_vehicles],
            d_count: vec![0; m_tasks],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    pub admitted: Vec<AccFire>,
    pub discarded: Vec<AccFire>,
}

/// Resolves accumulation spikes that landed on the same tick.
///
/// Fires are taken in order of descending unquantized rate (ties: lower
/// vehicle, then lower task). Each admitted fire locks its vehicle at once,
/// so any later fire of an already assigned vehicle is discarded.
pub fn resolve_conflicts<T: Scalar>(fires: &[AccFire], gamma: &Array2<T>, book: &mut Bookkeeping) -> Resolution {
    let mut order = fires.to_vec();
    order.sort_by(|a, b| {
        let (ga, gb) = (gamma[[a.vehicle, a.task]], gamma[[b.vehicle, b.task]]);
        gb.partial_cmp(&ga)
            .unwrap_or(Ordering::Equal)
            .then(a.vehicle.cmp(&b.vehicle))
            .then(a.task.cmp(&b.task))
    });
    let mut res = Resolution::default();
    for f in order {
        if book.tau[f.vehicle] {
            book.tau[f.vehicle] = false;
            book.d_count[f.task] += 1;
            book.allocation.assign(f.vehicle, f.task);
            res.admitted.push(f);
        } else {
            res.discarded.push(f);
        }
    }
    res
}

/// A tick on which more than one accumulation neuron fired, or on which a
/// fire had to be discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGroup {
    pub tick: u64,
    pub fires: Vec<AccFire>,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimStatus {
    Completed,
    /// `max_ticks` ran out first; the result holds the partial allocation.
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T> {
    pub status: SimStatus,
    pub allocation: Allocation,
    /// Admitted fires in order.
    pub admitted: Vec<(u64, AccFire)>,
    /// Every spike: `(tick, layer, index within layer)`.
    pub raster: Vec<(u64, Layer, usize)>,
    /// `voltage_trace[k][t]` is accumulation neuron `k`'s potential after tick
    /// `t`. Empty when voltage recording is off.
    pub voltage_trace: Vec<Vec<i64>>,
    pub conflicts: Vec<ConflictGroup>,
    /// Vehicles with no positive weight.
    pub unassignable: Vec<usize>,
    pub ticks: u64,
    pub neuron_count: usize,
    pub gamma: Array2<T>,
    pub acc_weights: Array2<i32>,
}

impl<T> SimResult<T> {
    pub fn timed_out(&self) -> bool {
        self.status == SimStatus::TimedOut
    }

    /// Accumulation spikes as `(tick, index)`.
    pub fn acc_spikes(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.raster
            .iter()
            .filter(|(_, l, _)| *l == Layer::Accumulation)
            .map(|&(t, _, k)| (t, k))
    }
}

/// Runs a scenario until every vehicle with a positive weight is allocated
/// or `max_ticks` is reached.
pub fn run<T: Scalar>(scenario: &Scenario<T>, cfg: NetworkConfig) -> Result<SimResult<T>, SimError> {
    run_rates(base_rates(scenario), scenario.connectivity(), cfg)
}

pub fn run_rates<T: Scalar>(gamma: Array2<T>, cm: &Array2<bool>, cfg: NetworkConfig) -> Result<SimResult<T>, SimError> {
    let net = Network::from_rates(gamma, cm, cfg)?;
    Ok(run_network(net))
}

/// Runs an already built network from its current state.
pub fn run_network<T: Scalar>(mut net: Network<T>) -> SimResult<T> {
    let (n, m) = (net.n_vehicles(), net.m_tasks());
    let cfg = *net.config();
    let unassignable: Vec<usize> = (0..n)
        .filter(|&i| (0..m).all(|j| net.acc_weights()[[i, j]] == 0))
        .collect();
    let active = n - unassignable.len();

    let mut book = Bookkeeping::new(n, m);
    let mut admitted = Vec::new();
    let mut raster = Vec::new();
    let mut conflicts = Vec::new();
    let mut voltage_trace = if cfg.record_voltage {
        vec![Vec::new(); n * m]
    } else {
        Vec::new()
    };
    let mut status = SimStatus::TimedOut;
    let mut ticks = 0;

    while ticks < cfg.max_ticks {
        let ev = net.step();
        ticks += 1;
        if ev.input_spiked {
            raster.extend((0..net.n_input()).map(|k| (ev.tick, Layer::Input, k)));
        }
        raster.extend(ev.acc_fired.iter().map(|&k| (ev.tick, Layer::Accumulation, k)));
        raster.extend(ev.control_fired.iter().map(|&c| (ev.tick, Layer::Control, c)));
        if cfg.record_voltage {
            for (trace, &v) in voltage_trace.iter_mut().zip(net.potentials()) {
                trace.push(v);
            }
        }
        if !ev.acc_fired.is_empty() {
            let fires: Vec<AccFire> = ev
                .acc_fired
                .iter()
                .map(|&k| {
                    let (vehicle, task) = net.pair_of(k);
                    AccFire { vehicle, task }
                })
                .collect();
            let res = resolve_conflicts(&fires, net.gamma(), &mut book);
            admitted.extend(res.admitted.iter().map(|&f| (ev.tick, f)));
            if fires.len() > 1 || !res.discarded.is_empty() {
                conflicts.push(ConflictGroup {
                    tick: ev.tick,
                    fires,
                    resolution: res,
                });
            }
        }
        if book.allocation.assigned_count() == active {
            status = SimStatus::Completed;
            break;
        }
    }

    SimResult {
        status,
        allocation: book.allocation,
        admitted,
        raster,
        voltage_trace,
        conflicts,
        unassignable,
        ticks,
        neuron_count: net.total_neurons(),
        gamma: net.gamma().clone(),
        acc_weights: net.acc_weights().clone(),
    }
}

/// Writes `tick,layer,neuron_id` rows; ids are 0-based within each layer
/// (control ids: vehicles first, then tasks).
pub fn write_raster<T, W: Write>(mut w: W, result: &SimResult<T>) -> io::Result<()> {
    writeln!(w, "{RASTER_HEADER}")?;
    writeln!(w, "tick,layer,neuron_id")?;
    for &(t, layer, k) in &result.raster {
        writeln!(w, "{t},{},{k}", layer.name())?;
    }
    Ok(())
}

/// Writes `tick,neuron_id,potential` rows for every accumulation neuron.
pub fn write_voltage_trace<T, W: Write>(mut w: W, result: &SimResult<T>) -> io::Result<()> {
    writeln!(w, "{VOLTAGE_HEADER}")?;
    writeln!(w, "tick,neuron_id,potential")?;
    let len = result.voltage_trace.first().map_or(0, Vec::len);
    for t in 0..len {
        for (k, trace) in result.voltage_trace.iter().enumerate() {
            writeln!(w, "{t},{k},{}", trace[t])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fire(vehicle: usize, task: usize) -> AccFire {
        AccFire { vehicle, task }
    }

    #[test]
    fn same_vehicle_keeps_larger_rate() {
        let g = array![[0.9, 0.8]];
        let mut book = Bookkeeping::new(1, 2);
        let res = resolve_conflicts(&[fire(0, 1), fire(0, 0)], &g, &mut book);
        assert_eq!(res.admitted, vec![fire(0, 0)]);
        assert_eq!(res.discarded, vec![fire(0, 1)]);
        assert_eq!(book.allocation.tasks(), &[1]);
        assert_eq!(book.d_count, vec![1, 0]);
    }

    #[test]
    fn distinct_vehicles_all_admitted() {
        let g = array![[0.5, 0.1], [0.1, 0.7]];
        let mut book = Bookkeeping::new(2, 2);
        let res = resolve_conflicts(&[fire(0, 0), fire(1, 1)], &g, &mut book);
        assert_eq!(res.admitted.len(), 2);
        assert!(res.discarded.is_empty());
    }

    #[test]
    fn nine_fires_for_eight_vehicles() {
        let g = Array2::from_shape_fn((8, 8), |(i, j)| 1.0 + (i * 8 + j) as f64 / 100.0);
        let mut fires: Vec<AccFire> = (0..8).map(|i| fire(i, (i * 3) % 8)).collect();
        fires.push(fire(4, 6));
        let mut book = Bookkeeping::new(8, 8);
        let res = resolve_conflicts(&fires, &g, &mut book);
        assert_eq!(res.admitted.len(), 8);
        assert_eq!(res.discarded.len(), 1);
        assert_eq!(book.allocation.assigned_count(), 8);
        // vehicle 5 keeps the pair with the larger rate: (4, 6) beats (4, 4)
        assert_eq!(book.allocation.task_of(4), Some(6));
    }

    #[test]
    fn one_by_one_tick_count() {
        for threshold in [255, 256, 1000, 25_500] {
            let cfg = NetworkConfig::default().with_threshold(threshold);
            let r = run_rates(array![[0.3]], &array![[true]], cfg).unwrap();
            assert_eq!(r.status, SimStatus::Completed);
            assert_eq!(r.allocation.tasks(), &[1]);
            let spikes = (threshold as u64).div_ceil(255);
            // k-th input spike is emitted at tick 4(k-1) and lands one tick later
            let (tick, _) = r.acc_spikes().next().unwrap();
            assert_eq!(tick, 4 * (spikes - 1) + 1);
        }
    }

    #[test]
    fn symmetric_2x2_conflicts() {
        let r = run_rates(Array2::from_elem((2, 2), 1.0), &Array2::from_elem((2, 2), true), NetworkConfig::default()).unwrap();
        assert_eq!(r.conflicts.len(), 1);
        assert_eq!(r.conflicts[0].fires.len(), 4);
        assert_eq!(r.conflicts[0].resolution.admitted.len(), 2);
        assert_eq!(r.allocation.tasks(), &[1, 1]);
    }

    #[test]
    fn timeout_keeps_partial_state() {
        let cfg = NetworkConfig {
            max_ticks: 10,
            ..NetworkConfig::default()
        };
        let r = run_rates(array![[1.0]], &array![[true]], cfg).unwrap();
        assert!(r.timed_out());
        assert_eq!(r.ticks, 10);
        assert_eq!(r.voltage_trace[0].len(), 10);
        assert_eq!(r.allocation.tasks(), &[0]);
    }

    #[test]
    fn exports() {
        let cfg = NetworkConfig::default().with_threshold(255);
        let r = run_rates(array![[1.0]], &array![[true]], cfg).unwrap();
        let mut raster = Vec::new();
        write_raster(&mut raster, &r).unwrap();
        let raster = String::from_utf8(raster).unwrap();
        assert_eq!(
            raster,
            "# spike-alloc raster v1\ntick,layer,neuron_id\n0,input,0\n1,accumulation,0\n"
        );
        let mut volt = Vec::new();
        write_voltage_trace(&mut volt, &r).unwrap();
        assert_eq!(
            String::from_utf8(volt).unwrap(),
            "# spike-alloc voltage v1\ntick,neuron_id,potential\n0,0,0\n1,0,0\n"
        );
    }
}
