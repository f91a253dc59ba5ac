//! Exact event-driven solver.
//!
//! Each vehicle-task neuron integrates its effective rate
//! `A = CM * beta_j * tau_i * gamma_ij` from zero. Rates are piecewise
//! constant between firings, so the next firing time is found in closed form
//! and the simulation jumps straight to it. On a firing of `(i, j)` vehicle
//! `i` is locked (`tau_i = 0`), task `j` gains one more vehicle and its
//! `beta_j` halves. Potentials of the other neurons are kept; only their
//! slopes change.
//!
//! Simultaneous fire times (within [`Scalar::TIE_TOLERANCE`]) go to the
//! lowest vehicle index, then the lowest task index.

use std::io::{self, Write};

use ndarray::Array2;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::scenario::{base_rates, Allocation, Scenario};

pub const DEFAULT_THRESHOLD: f64 = 1.0;
pub const EVENT_LOG_HEADER: &str = "# spike-alloc events v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("firing threshold must be > 0, got {0}")]
    Threshold(f64),
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    Dimension {
        axis: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("event {index} reuses vehicle {vehicle}, which was already assigned")]
    DuplicateVehicle { index: usize, vehicle: usize },
    #[error("event {index} is out of order or out of range")]
    BadEvent { index: usize },
}

/// Mutable solver state: potentials plus the lockout and halving controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub potential: Array2<T>,
    /// `true` while the vehicle is still unassigned.
    pub tau: Vec<bool>,
    /// Vehicles already allocated to each task.
    pub d_count: Vec<u32>,
    /// `2^-d_count[j]`.
    pub beta: Vec<T>,
    pub clock: T,
}

impl<T: Scalar> SolverState<T> {
    pub fn new(n_vehicles: usize, m_tasks: usize) -> Self {
        SolverState {
            potential: Array2::zeros((n_vehicles, m_tasks)),
            tau: vec![true; n_vehicles],
            d_count: vec![0; m_tasks],
            beta: vec![T::one(); m_tasks],
            clock: T::zero(),
        }
    }

    /// Applies the control update for a firing of `(vehicle, task)`.
    pub fn assign(&mut self, vehicle: usize, task: usize) {
        self.tau[vehicle] = false;
        self.d_count[task] += 1;
        self.beta[task] = T::of(0.5).powi(self.d_count[task] as i32);
    }

    /// Advances every potential by `dt * rates` and the clock by `dt`.
    fn advance(&mut self, dt: T, rates: &Array2<T>) {
        self.potential.zip_mut_with(rates, |p, &a| *p = *p + dt * a);
        self.clock = self.clock + dt;
    }
}

/// One firing: 0-based vehicle and task indices and the simulated time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FireEvent<T> {
    pub time: T,
    pub vehicle: usize,
    pub task: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub allocation: Allocation,
    /// Firings in order.
    pub events: Vec<FireEvent<T>>,
    /// 0-based vehicles with no connected, nonzero rate.
    pub unassignable: Vec<usize>,
}

/// `A_ij = CM_ij * beta_j * tau_i * gamma_ij`.
pub fn effective_rates<T: Scalar>(
    gamma: &Array2<T>,
    cm: &Array2<bool>,
    beta: &[T],
    tau: &[bool],
) -> Result<Array2<T>, SolveError> {
    let (n, m) = gamma.dim();
    check_dim("connectivity rows", n, cm.nrows())?;
    check_dim("connectivity columns", m, cm.ncols())?;
    check_dim("beta", m, beta.len())?;
    check_dim("tau", n, tau.len())?;
    let gate = |b: bool| if b { T::one() } else { T::zero() };
    Ok(Array2::from_shape_fn((n, m), |(i, j)| {
        gate(cm[[i, j]]) * beta[j] * gate(tau[i]) * gamma[[i, j]]
    }))
}

fn check_dim(axis: &'static str, expected: usize, found: usize) -> Result<(), SolveError> {
    if expected != found {
        return Err(SolveError::Dimension { axis, expected, found });
    }
    Ok(())
}

/// Solves a scenario with the given firing threshold (use
/// [`DEFAULT_THRESHOLD`] unless there is a reason not to).
pub fn solve<T: Scalar>(scenario: &Scenario<T>, threshold: T) -> Result<SolveResult<T>, SolveError> {
    solve_rates(&base_rates(scenario), scenario.connectivity(), threshold)
}

/// Solves directly from a base-rate matrix and connectivity mask.
pub fn solve_rates<T: Scalar>(
    gamma: &Array2<T>,
    cm: &Array2<bool>,
    threshold: T,
) -> Result<SolveResult<T>, SolveError> {
    if !(threshold > T::zero() && threshold.is_finite()) {
        return Err(SolveError::Threshold(threshold.as_f64()));
    }
    let (n, m) = gamma.dim();
    check_dim("connectivity rows", n, cm.nrows())?;
    check_dim("connectivity columns", m, cm.ncols())?;

    let unassignable: Vec<usize> = (0..n)
        .filter(|&i| (0..m).all(|j| !(cm[[i, j]] && gamma[[i, j]] > T::zero())))
        .collect();

    let tol = T::of(T::TIE_TOLERANCE);
    let mut state = SolverState::new(n, m);
    let mut allocation = Allocation::unassigned(n);
    let mut events = Vec::new();

    loop {
        let rates = effective_rates(gamma, cm, &state.beta, &state.tau)?;
        // Scan in (vehicle, task) order; a later candidate only wins if it
        // is earlier by more than the tie tolerance.
        let mut next: Option<(T, usize, usize)> = None;
        for ((i, j), &a) in rates.indexed_iter() {
            if a <= T::zero() {
                continue;
            }
            let dt = (threshold - state.potential[[i, j]]).max(T::zero()) / a;
            match next {
                Some((best, _, _)) if dt >= best - tol => {}
                _ => next = Some((dt, i, j)),
            }
        }
        let Some((dt, i, j)) = next else { break };
        state.advance(dt, &rates);
        state.potential[[i, j]] = threshold;
        state.assign(i, j);
        allocation.assign(i, j);
        events.push(FireEvent {
            time: state.clock,
            vehicle: i,
            task: j,
        });
    }

    Ok(SolveResult {
        allocation,
        events,
        unassignable,
    })
}

/// Replays an event log and returns the solver state right after each event.
///
/// Fails if a vehicle fires twice, an index is out of range, or times go
/// backwards.
pub fn replay<T: Scalar>(
    gamma: &Array2<T>,
    cm: &Array2<bool>,
    events: &[FireEvent<T>],
) -> Result<Vec<SolverState<T>>, SolveError> {
    let (n, m) = gamma.dim();
    let mut state = SolverState::new(n, m);
    let mut out = Vec::with_capacity(events.len());
    for (index, ev) in events.iter().enumerate() {
        if ev.vehicle >= n || ev.task >= m || ev.time < state.clock {
            return Err(SolveError::BadEvent { index });
        }
        if !state.tau[ev.vehicle] {
            return Err(SolveError::DuplicateVehicle {
                index,
                vehicle: ev.vehicle,
            });
        }
        let rates = effective_rates(gamma, cm, &state.beta, &state.tau)?;
        state.advance(ev.time - state.clock, &rates);
        state.assign(ev.vehicle, ev.task);
        out.push(state.clone());
    }
    Ok(out)
}

/// Writes `time,vehicle,task` rows (1-based vehicle and task) after a
/// version header.
pub fn write_event_log<T: Scalar, W: Write>(mut w: W, events: &[FireEvent<T>]) -> io::Result<()> {
    writeln!(w, "{EVENT_LOG_HEADER}")?;
    writeln!(w, "time,vehicle,task")?;
    for ev in events {
        writeln!(w, "{},{},{}", ev.time, ev.vehicle + 1, ev.task + 1)?;
    }
    Ok(())
}
