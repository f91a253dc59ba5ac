//! Discrete-tick simulator of the three-layer allocation network.
//!
//! Layers, for `N` vehicles and `M` tasks:
//!
//! * input: `N*M` bias-driven neurons spiking every `input_period` ticks,
//!   each wired one-to-one to an accumulation neuron with the quantized base
//!   rate as weight;
//! * accumulation: `N*M` integer integrate-and-fire neurons, listed
//!   `V1T1, V1T2, ..., V1TM, V2T1, ..., VNTM`;
//! * control: `N` vehicle neurons then `M` task neurons. An accumulation spike
//!   from pair `(i, j)` arms vehicle neuron `i` and task neuron `j`; an armed
//!   neuron fires every `control_period` ticks forever. Vehicle neurons inhibit
//!   their vehicle's accumulation neurons with weight `-255`; task neurons
//!   inhibit each accumulation neuron of the task with `-round(w / 4)`.
//!
//! All layers update synchronously and every spike is delivered one tick
//! after it is emitted. Weights are integers in `[-255, 255]`.

mod sim;

use ndarray::Array2;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::scenario::{base_rates, Scenario};

pub use sim::{
    resolve_conflicts, run, run_network, run_rates, write_raster, write_voltage_trace, AccFire, Bookkeeping, ConflictGroup,
    Resolution, SimResult, SimStatus, RASTER_HEADER, VOLTAGE_HEADER,
};

/// Largest weight magnitude the hardware supports.
pub const WEIGHT_MAX: i32 = 255;
/// Weight from a vehicle control neuron to its accumulation neurons.
pub const VEHICLE_CONTROL_WEIGHT: i32 = -WEIGHT_MAX;
/// Control neurons fire on a single incoming spike.
pub const CONTROL_THRESHOLD: i32 = 1;
/// Recurrent self-excitation that keeps an armed control neuron firing.
pub const CONTROL_SELF_WEIGHT: i32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("cannot quantize: no connected pair has a positive rate")]
    Quantization,
    #[error("dimension mismatch: rates are {rates:?}, connectivity is {connectivity:?}")]
    Dimension {
        rates: (usize, usize),
        connectivity: (usize, usize),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    /// Ticks between input-layer spikes. Even, at least 2.
    pub input_period: u32,
    /// Ticks between spikes of an armed control neuron; half the input period.
    pub control_period: u32,
    /// Accumulation-neuron firing threshold.
    pub threshold_acc: i64,
    /// Lower clamp on accumulation potentials.
    pub potential_floor: i64,
    pub max_ticks: u64,
    /// Keep per-tick accumulation potentials in the result.
    pub record_voltage: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            input_period: 4,
            control_period: 2,
            threshold_acc: 25_500,
            potential_floor: -(1 << 20),
            max_ticks: 1_000_000,
            record_voltage: true,
        }
    }
}

impl NetworkConfig {
    /// Sets the input period and derives the control period from it.
    pub fn with_input_period(mut self, input_period: u32) -> Self {
        self.input_period = input_period;
        self.control_period = input_period / 2;
        self
    }

    pub fn with_threshold(mut self, threshold_acc: i64) -> Self {
        self.threshold_acc = threshold_acc;
        self
    }

    pub fn weight_max(&self) -> i32 {
        WEIGHT_MAX
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.input_period < 2 || !self.input_period.is_multiple_of(2) {
            return Err(SimError::Config(format!(
                "input_period must be even and >= 2, got {}",
                self.input_period
            )));
        }
        if self.control_period * 2 != self.input_period {
            return Err(SimError::Config(format!(
                "control_period must be input_period / 2 = {}, got {}",
                self.input_period / 2,
                self.control_period
            )));
        }
        if self.threshold_acc <= 0 {
            return Err(SimError::Config("threshold_acc must be > 0".into()));
        }
        if self.potential_floor > 0 {
            return Err(SimError::Config("potential_floor must be <= 0".into()));
        }
        if self.max_ticks == 0 {
            return Err(SimError::Config("max_ticks must be > 0".into()));
        }
        Ok(())
    }
}

/// Scales rates to integer weights: `round(255 * gamma / max gamma)` with
/// halves rounded up, raised to at least 1 for any connected positive rate,
/// and 0 where the rate or the connectivity is zero. The maximum is taken
/// over connected pairs.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn quantize_rates<T: Scalar>(gamma: &Array2<T>, cm: &Array2<bool>) -> Result<Array2<i32>, SimError> {
    if gamma.dim() != cm.dim() {
        return Err(SimError::Dimension {
            rates: gamma.dim(),
            connectivity: cm.dim(),
        });
    }
    let max = gamma
        .iter()
        .zip(cm.iter())
        .filter(|(_, &c)| c)
        .map(|(&g, _)| g)
        .fold(T::zero(), T::max);
    if !(max > T::zero()) {
        return Err(SimError::Quantization);
    }
    let full = T::of(WEIGHT_MAX as f64);
    let half = T::of(0.5);
    Ok(Array2::from_shape_fn(gamma.dim(), |(i, j)| {
        let g = gamma[[i, j]];
        if !cm[[i, j]] || !(g > T::zero()) {
            return 0;
        }
        let w = (full * g / max + half).floor().to_i32().unwrap_or(WEIGHT_MAX);
        w.clamp(1, WEIGHT_MAX)
    }))
}

/// Neuron layer, as written to raster files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Input,
    Accumulation,
    Control,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Input => "input",
            Layer::Accumulation => "accumulation",
            Layer::Control => "control",
        }
    }
}

/// Total neuron count `2*N*M + N + M`.
pub fn neuron_count(n_vehicles: usize, m_tasks: usize) -> usize {
    2 * n_vehicles * m_tasks + n_vehicles + m_tasks
}

/// Spikes emitted during one tick. Indices are within the layer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TickEvents {
    pub tick: u64,
    pub input_spiked: bool,
    pub acc_fired: Vec<usize>,
    pub control_fired: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct ControlNeuron {
    armed_at: Option<u64>,
}

/// The built network plus its mutable run state.
#[derive(Debug, Clone)]
pub struct Network<T> {
    cfg: NetworkConfig,
    n: usize,
    m: usize,
    gamma: Array2<T>,
    acc_weights: Array2<i32>,
    task_ctrl_weights: Array2<i32>,
    tick: u64,
    potential: Vec<i64>,
    fired: Vec<bool>,
    control: Vec<ControlNeuron>,
    // spikes emitted on the previous tick, delivered on the next one
    pending_input: bool,
    pending_acc: Vec<usize>,
    pending_control: Vec<usize>,
}

/// Builds the network for a scenario.
pub fn build_network<T: Scalar>(scenario: &Scenario<T>, cfg: NetworkConfig) -> Result<Network<T>, SimError> {
    Network::from_rates(base_rates(scenario), scenario.connectivity(), cfg)
}

impl<T: Scalar> Network<T> {
    pub fn from_rates(gamma: Array2<T>, cm: &Array2<bool>, cfg: NetworkConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let acc_weights = quantize_rates(&gamma, cm)?;
        Ok(Self::from_weights(gamma, acc_weights, cfg))
    }

    /// Builds from explicit integer weights; `gamma` is kept only for
    /// ordering simultaneous fires. Weights must lie in `[0, 255]`.
    pub fn from_weights(gamma: Array2<T>, acc_weights: Array2<i32>, cfg: NetworkConfig) -> Self {
        assert_eq!(gamma.dim(), acc_weights.dim());
        assert!(acc_weights.iter().all(|&w| (0..=WEIGHT_MAX).contains(&w)));
        let (n, m) = gamma.dim();
        let task_ctrl_weights = acc_weights.mapv(|w| -((w + 2) / 4));
        Network {
            cfg,
            n,
            m,
            gamma,
            acc_weights,
            task_ctrl_weights,
            tick: 0,
            potential: vec![0; n * m],
            fired: vec![false; n * m],
            control: vec![ControlNeuron::default(); n + m],
            pending_input: false,
            pending_acc: Vec::new(),
            pending_control: Vec::new(),
        }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn n_vehicles(&self) -> usize {
        self.n
    }

    pub fn m_tasks(&self) -> usize {
        self.m
    }

    pub fn n_input(&self) -> usize {
        self.n * self.m
    }

    pub fn n_acc(&self) -> usize {
        self.n * self.m
    }

    pub fn n_control(&self) -> usize {
        self.n + self.m
    }

    pub fn total_neurons(&self) -> usize {
        self.n_input() + self.n_acc() + self.n_control()
    }

    pub fn gamma(&self) -> &Array2<T> {
        &self.gamma
    }

    pub fn acc_weights(&self) -> &Array2<i32> {
        &self.acc_weights
    }

    pub fn task_ctrl_weights(&self) -> &Array2<i32> {
        &self.task_ctrl_weights
    }

    pub fn vehicle_ctrl_weight(&self) -> i32 {
        VEHICLE_CONTROL_WEIGHT
    }

    /// Accumulation index (0-based) of pair `(vehicle, task)`.
    pub fn acc_index(&self, vehicle: usize, task: usize) -> usize {
        vehicle * self.m + task
    }

    /// `(vehicle, task)` of accumulation index `k`.
    pub fn pair_of(&self, k: usize) -> (usize, usize) {
        (k / self.m, k % self.m)
    }

    pub fn vehicle_control(&self, vehicle: usize) -> usize {
        vehicle
    }

    pub fn task_control(&self, task: usize) -> usize {
        self.n + task
    }

    /// Control neurons `(vehicle, task)` that accumulation neuron `k` drives.
    pub fn control_targets(&self, k: usize) -> (usize, usize) {
        let (i, j) = self.pair_of(k);
        (self.vehicle_control(i), self.task_control(j))
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn potentials(&self) -> &[i64] {
        &self.potential
    }

    pub fn has_fired(&self, k: usize) -> bool {
        self.fired[k]
    }

    /// Tick at which control neuron `c` armed, if it has.
    pub fn armed_at(&self, c: usize) -> Option<u64> {
        self.control[c].armed_at
    }

    /// Advances one synchronous tick.
    ///
    /// Accumulation neurons integrate the input and control spikes emitted on
    /// the previous tick, clamp at the floor and fire (resetting to 0 and
    /// latching) at threshold. Control neurons arm on accumulation spikes from
    /// the previous tick and fire on the arming tick and every
    /// `control_period` ticks after. Input neurons fire on ticks divisible by
    /// `input_period`.
    pub fn step(&mut self) -> TickEvents {
        let t = self.tick;
        let mut events = TickEvents {
            tick: t,
            ..TickEvents::default()
        };

        let mut vehicle_inhibited = vec![false; self.n];
        let mut task_inhibited = vec![false; self.m];
        for &c in &self.pending_control {
            if c < self.n {
                vehicle_inhibited[c] = true;
            } else {
                task_inhibited[c - self.n] = true;
            }
        }
        let any_control = !self.pending_control.is_empty();
        for k in 0..self.n * self.m {
            if self.fired[k] {
                continue;
            }
            let (i, j) = self.pair_of(k);
            let mut delta: i64 = 0;
            if self.pending_input {
                delta += self.acc_weights[[i, j]] as i64;
            }
            if any_control {
                if vehicle_inhibited[i] {
                    delta += VEHICLE_CONTROL_WEIGHT as i64;
                }
                if task_inhibited[j] {
                    delta += self.task_ctrl_weights[[i, j]] as i64;
                }
            }
            if delta == 0 {
                continue;
            }
            let v = (self.potential[k] + delta).max(self.cfg.potential_floor);
            if v >= self.cfg.threshold_acc {
                self.potential[k] = 0;
                self.fired[k] = true;
                events.acc_fired.push(k);
            } else {
                self.potential[k] = v;
            }
        }

        let cp = self.cfg.control_period as u64;
        for k in std::mem::take(&mut self.pending_acc) {
            let (vc, tc) = self.control_targets(k);
            for c in [vc, tc] {
                if self.control[c].armed_at.is_none() {
                    self.control[c].armed_at = Some(t);
                }
            }
        }
        for (c, neuron) in self.control.iter().enumerate() {
            if let Some(a) = neuron.armed_at {
                if (t - a).is_multiple_of(cp) {
                    events.control_fired.push(c);
                }
            }
        }

        events.input_spiked = t.is_multiple_of(self.cfg.input_period as u64);

        self.pending_input = events.input_spiked;
        self.pending_acc = events.acc_fired.clone();
        self.pending_control = events.control_fired.clone();
        self.tick += 1;
        events
    }
}
