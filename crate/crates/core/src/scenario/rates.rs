use ndarray::{Array2, Axis};

use super::{check_len, invalid, RateWeights, Scenario, ScenarioError};
use crate::scalar::Scalar;

/// Time to completion: `ttc[i][j] = tta[i][j] + tot[j]`.
pub fn compute_ttc<T: Scalar>(tta: &Array2<T>, tot: &[T]) -> Result<Array2<T>, ScenarioError> {
    check_len("tot (task axis)", tta.ncols(), tot.len())?;
    for ((i, j), &a) in tta.indexed_iter() {
        if !(a.is_finite() && a >= T::zero()) {
            return Err(invalid(format!("tta[{i}][{j}]"), format!("{a} must be finite and >= 0")));
        }
    }
    for (j, &t) in tot.iter().enumerate() {
        if !(t.is_finite() && t >= T::zero()) {
            return Err(invalid(format!("tot[{j}]"), format!("{t} must be finite and >= 0")));
        }
    }
    let ttc = Array2::from_shape_fn(tta.dim(), |(i, j)| tta[[i, j]] + tot[j]);
    if let Some(((i, j), _)) = ttc.indexed_iter().find(|(_, &c)| c <= T::zero()) {
        return Err(invalid(
            format!("ttc[{i}][{j}]"),
            "time to arrival and time on task are both zero",
        ));
    }
    Ok(ttc)
}

/// Relative completion-time reward `1 - ttc[i][j] / max_i ttc[i][j]`.
///
/// The column maximum is taken over vehicles, so every task column holds at
/// least one exact zero.
pub fn time_reward<T: Scalar>(ttc: &Array2<T>) -> Result<Array2<T>, ScenarioError> {
    for ((i, j), &c) in ttc.indexed_iter() {
        if !(c.is_finite() && c > T::zero()) {
            return Err(invalid(format!("ttc[{i}][{j}]"), format!("{c} must be finite and > 0")));
        }
    }
    let col_max: Vec<T> = ttc
        .axis_iter(Axis(1))
        .map(|col| col.iter().copied().fold(T::zero(), T::max))
        .collect();
    Ok(Array2::from_shape_fn(ttc.dim(), |(i, j)| {
        let c = ttc[[i, j]];
        if c == col_max[j] {
            T::zero()
        } else {
            T::one() - c / col_max[j]
        }
    }))
}

/// Base accumulation rate `w_p P_j + w_s S_j + w_t T_ij` from raw arrays.
pub fn rate_matrix<T: Scalar>(
    priority: &[T],
    success: &[T],
    ttc: &Array2<T>,
    weights: RateWeights<T>,
) -> Result<Array2<T>, ScenarioError> {
    check_len("priority", ttc.ncols(), priority.len())?;
    check_len("success", ttc.ncols(), success.len())?;
    let t = time_reward(ttc)?;
    Ok(Array2::from_shape_fn(ttc.dim(), |(i, j)| {
        weights.w_p * priority[j] + weights.w_s * success[j] + weights.w_t * t[[i, j]]
    }))
}

/// Base accumulation rates for every vehicle-task pair of a scenario.
///
/// Connectivity is not applied here; see [`crate::ideal::effective_rates`].
pub fn base_rates<T: Scalar>(scenario: &Scenario<T>) -> Array2<T> {
    rate_matrix(scenario.priority(), scenario.success(), scenario.ttc(), scenario.weights())
        .expect("validated scenario has positive ttc and matching dimensions")
}
