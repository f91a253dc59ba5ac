//! Problem data: the allocation scenario, rate weights, allocations and the
//! reward function used to score them.

mod generate;
mod io;
mod rates;
mod reward;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use generate::{generate_scenario, GenRanges};
pub use io::{load_scenario, save_scenario, scenario_from_str, scenario_to_string, SCENARIO_HEADER};
pub use rates::{base_rates, compute_ttc, rate_matrix, time_reward};
pub use reward::{reward, RewardModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    Dimension {
        axis: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid value at {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("vehicle {vehicle} cannot serve any task (all-zero connectivity row) and the scenario does not allow unassignable vehicles")]
    Unassignable { vehicle: usize },
    #[error("vehicle {vehicle} is assigned to task {task} but the pair is not connected")]
    ConstraintViolation { vehicle: usize, task: usize },
    #[error("invalid allocation: {0}")]
    Allocation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error{}: {message}", path.as_ref().map(|p| format!(" in {p}")).unwrap_or_default())]
    Parse {
        path: Option<String>,
        message: String,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Weights applied to priority, success probability and time reward when
/// forming the base accumulation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateWeights<T> {
    pub w_p: T,
    pub w_s: T,
    pub w_t: T,
}

impl<T: Scalar> RateWeights<T> {
    pub fn new(w_p: T, w_s: T, w_t: T) -> Result<Self, ScenarioError> {
        let w = RateWeights { w_p, w_s, w_t };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (name, v) in [("weights.w_p", self.w_p), ("weights.w_s", self.w_s), ("weights.w_t", self.w_t)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(invalid(name, format!("{v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Default for RateWeights<T> {
    /// `w_p = 0.45`, `w_s = 0.1`, `w_t = 0.5`.
    fn default() -> Self {
        RateWeights {
            w_p: T::of(0.45),
            w_s: T::of(0.1),
            w_t: T::of(0.5),
        }
    }
}

/// One allocation problem instance: `n_vehicles` vehicles, `m_tasks` tasks.
///
/// Matrices are indexed `[vehicle, task]`. A validated scenario is immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    priority: Vec<T>,
    success: Vec<T>,
    ttc: Array2<T>,
    connectivity: Array2<bool>,
    weights: RateWeights<T>,
    allow_unassignable: bool,
}

impl<T: Scalar> Scenario<T> {
    /// Builds a fully connected scenario with the given weights.
    pub fn new(
        priority: Vec<T>,
        success: Vec<T>,
        ttc: Array2<T>,
        weights: RateWeights<T>,
    ) -> Result<Self, ScenarioError> {
        let connectivity = Array2::from_elem(ttc.dim(), true);
        Self::with_connectivity(priority, success, ttc, connectivity, weights, false)
    }

    /// Builds a scenario with an explicit connectivity mask.
    ///
    /// A vehicle whose row in `connectivity` is all false is rejected unless
    /// `allow_unassignable` is set.
    pub fn with_connectivity(
        priority: Vec<T>,
        success: Vec<T>,
        ttc: Array2<T>,
        connectivity: Array2<bool>,
        weights: RateWeights<T>,
        allow_unassignable: bool,
    ) -> Result<Self, ScenarioError> {
        let s = Scenario {
            priority,
            success,
            ttc,
            connectivity,
            weights,
            allow_unassignable,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let (n, m) = self.ttc.dim();
        if n == 0 {
            return Err(invalid("n_vehicles", "must be at least 1"));
        }
        if m == 0 {
            return Err(invalid("m_tasks", "must be at least 1"));
        }
        check_len("priority", m, self.priority.len())?;
        check_len("success", m, self.success.len())?;
        if self.connectivity.dim() != (n, m) {
            let (cn, cm) = self.connectivity.dim();
            if cn != n {
                check_len("connectivity rows", n, cn)?;
            }
            check_len("connectivity columns", m, cm)?;
        }
        for (j, &p) in self.priority.iter().enumerate() {
            if !(p.is_finite() && p >= T::zero()) {
                return Err(invalid(format!("priority[{j}]"), format!("{p} must be finite and >= 0")));
            }
        }
        for (j, &s) in self.success.iter().enumerate() {
            if !(s >= T::zero() && s <= T::one()) {
                return Err(invalid(format!("success[{j}]"), format!("{s} is outside [0, 1]")));
            }
        }
        for ((i, j), &c) in self.ttc.indexed_iter() {
            if !(c.is_finite() && c > T::zero()) {
                return Err(invalid(format!("ttc[{i}][{j}]"), format!("{c} must be finite and > 0")));
            }
        }
        self.weights.validate()?;
        if !self.allow_unassignable {
            if let Some(i) = self.unassignable_vehicles().first() {
                return Err(ScenarioError::Unassignable { vehicle: *i });
            }
        }
        Ok(())
    }

    pub fn n_vehicles(&self) -> usize {
        self.ttc.nrows()
    }

    pub fn m_tasks(&self) -> usize {
        self.ttc.ncols()
    }

    pub fn priority(&self) -> &[T] {
        &self.priority
    }

    pub fn success(&self) -> &[T] {
        &self.success
    }

    pub fn ttc(&self) -> &Array2<T> {
        &self.ttc
    }

    pub fn connectivity(&self) -> &Array2<bool> {
        &self.connectivity
    }

    pub fn weights(&self) -> RateWeights<T> {
        self.weights
    }

    pub fn allows_unassignable(&self) -> bool {
        self.allow_unassignable
    }

    /// Vehicles (0-based) whose connectivity row is entirely zero.
    pub fn unassignable_vehicles(&self) -> Vec<usize> {
        self.connectivity
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, row)| row.iter().all(|&c| !c))
            .map(|(i, _)| i)
            .collect()
    }

    /// Returns a copy with different rate weights.
    pub fn with_weights(&self, weights: RateWeights<T>) -> Result<Self, ScenarioError> {
        weights.validate()?;
        Ok(Scenario { weights, ..self.clone() })
    }
}

fn check_len(axis: &str, expected: usize, found: usize) -> Result<(), ScenarioError> {
    if expected != found {
        return Err(ScenarioError::Dimension {
            axis: axis.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

/// Vehicle to task assignment. Position is the vehicle, the value is the
/// 1-based task number, and 0 means unassigned. Displays as `[4 1 1 3]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<usize>);

impl Allocation {
    pub fn unassigned(n_vehicles: usize) -> Self {
        Allocation(vec![0; n_vehicles])
    }

    /// Wraps a task vector (1-based tasks, 0 = unassigned).
    pub fn from_tasks(tasks: Vec<usize>) -> Self {
        Allocation(tasks)
    }

    pub fn tasks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 0-based task index served by `vehicle`, if any.
    pub fn task_of(&self, vehicle: usize) -> Option<usize> {
        match self.0[vehicle] {
            0 => None,
            t => Some(t - 1),
        }
    }

    /// Assigns `vehicle` to the 0-based `task`.
    pub fn assign(&mut self, vehicle: usize, task: usize) {
        self.0[vehicle] = task + 1;
    }

    pub fn assigned_count(&self) -> usize {
        self.0.iter().filter(|&&t| t != 0).count()
    }

    /// Checks shape against a scenario and that every assigned pair is connected.
    pub fn validate_for<T: Scalar>(&self, scenario: &Scenario<T>) -> Result<(), ScenarioError> {
        let (n, m) = (scenario.n_vehicles(), scenario.m_tasks());
        if self.0.len() != n {
            return Err(ScenarioError::Dimension {
                axis: "allocation length".into(),
                expected: n,
                found: self.0.len(),
            });
        }
        for (i, &t) in self.0.iter().enumerate() {
            if t > m {
                return Err(ScenarioError::Allocation(format!(
                    "vehicle {} assigned to task {t}, but there are only {m} tasks",
                    i + 1
                )));
            }
            if t > 0 && !scenario.connectivity()[[i, t - 1]] {
                return Err(ScenarioError::ConstraintViolation { vehicle: i + 1, task: t });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, t) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for Allocation {
    type Err = ScenarioError;

    /// Accepts `[4 1 1 3]`, `4 1 1 3` or `4,1,1,3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let tasks = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| ScenarioError::Allocation(format!("'{t}' is not a task number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if tasks.is_empty() {
            return Err(ScenarioError::Allocation("empty allocation".into()));
        }
        Ok(Allocation(tasks))
    }
}
