use ndarray::Array2;

use super::{base_rates, Allocation, Scenario, ScenarioError};
use crate::scalar::Scalar;

/// Precomputed reward evaluator for one scenario.
///
/// For each task the assigned vehicles are ordered by base rate (descending,
/// ties to the lower vehicle index); the k-th of them contributes
/// `2^-k * gamma[i][j]`. The scenario reward is the sum over tasks, in task
/// order. Evaluating the same allocation always performs the same sequence
/// of floating-point operations, so equal allocations give bit-equal rewards.
#[derive(Debug, Clone)]
pub struct RewardModel<T> {
    gamma: Array2<T>,
    connectivity: Array2<bool>,
    /// Per task: vehicles sorted by descending gamma, ties by index.
    order: Vec<Vec<usize>>,
}

impl<T: Scalar> RewardModel<T> {
    pub fn new(scenario: &Scenario<T>) -> Self {
        Self::from_rates(base_rates(scenario), scenario.connectivity().clone())
    }

    pub fn from_rates(gamma: Array2<T>, connectivity: Array2<bool>) -> Self {
        let (n, m) = gamma.dim();
        let order = (0..m)
            .map(|j| {
                let mut v: Vec<usize> = (0..n).collect();
                v.sort_by(|&a, &b| {
                    gamma[[b, j]]
                        .partial_cmp(&gamma[[a, j]])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                v
            })
            .collect();
        RewardModel {
            gamma,
            connectivity,
            order,
        }
    }

    pub fn gamma(&self) -> &Array2<T> {
        &self.gamma
    }

    pub fn n_vehicles(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn m_tasks(&self) -> usize {
        self.gamma.ncols()
    }

    /// Whether every assigned pair in `tasks` (1-based, 0 = none) is connected.
    pub fn feasible(&self, tasks: &[usize]) -> bool {
        tasks
            .iter()
            .enumerate()
            .all(|(i, &t)| t == 0 || self.connectivity[[i, t - 1]])
    }

    /// Reward of a task vector, skipping feasibility and bounds checks.
    pub fn evaluate_unchecked(&self, tasks: &[usize]) -> T {
        let half = T::of(0.5);
        let mut total = T::zero();
        for (j, order) in self.order.iter().enumerate() {
            let mut factor = T::one();
            for &i in order {
                if tasks[i] == j + 1 {
                    total = total + factor * self.gamma[[i, j]];
                    factor = factor * half;
                }
            }
        }
        total
    }

    /// Reward of a validated allocation.
    pub fn evaluate(&self, alloc: &Allocation) -> Result<T, ScenarioError> {
        let (n, m) = self.gamma.dim();
        if alloc.len() != n {
            return Err(ScenarioError::Dimension {
                axis: "allocation length".into(),
                expected: n,
                found: alloc.len(),
            });
        }
        for (i, &t) in alloc.tasks().iter().enumerate() {
            if t > m {
                return Err(ScenarioError::Allocation(format!(
                    "vehicle {} assigned to task {t}, but there are only {m} tasks",
                    i + 1
                )));
            }
            if t > 0 && !self.connectivity[[i, t - 1]] {
                return Err(ScenarioError::ConstraintViolation { vehicle: i + 1, task: t });
            }
        }
        Ok(self.evaluate_unchecked(alloc.tasks()))
    }
}

/// Reward of `alloc` under `scenario`; see [`RewardModel`] for the definition.
pub fn reward<T: Scalar>(scenario: &Scenario<T>, alloc: &Allocation) -> Result<T, ScenarioError> {
    RewardModel::new(scenario).evaluate(alloc)
}
