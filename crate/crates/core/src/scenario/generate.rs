use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RateWeights, Scenario, ScenarioError};
use crate::scalar::Scalar;

/// Closed value ranges used when drawing random scenarios.
///
/// The defaults keep priority and success on the same unit scale as the time
/// reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenRanges {
    pub priority: (f64, f64),
    pub success: (f64, f64),
    pub ttc: (f64, f64),
}

impl Default for GenRanges {
    fn default() -> Self {
        GenRanges {
            priority: (0.0, 1.0),
            success: (0.0, 1.0),
            ttc: (1.0, 100.0),
        }
    }
}

impl GenRanges {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let check = |name: &str, (lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) || hi < lo {
                return Err(ScenarioError::Config(format!("{name} range [{lo}, {hi}] is empty or not finite")));
            }
            Ok(())
        };
        check("priority", self.priority)?;
        check("success", self.success)?;
        check("ttc", self.ttc)?;
        if self.priority.0 < 0.0 {
            return Err(ScenarioError::Config("priority range must be >= 0".into()));
        }
        if self.success.0 < 0.0 || self.success.1 > 1.0 {
            return Err(ScenarioError::Config("success range must lie within [0, 1]".into()));
        }
        if self.ttc.0 <= 0.0 {
            return Err(ScenarioError::Config("ttc range lower bound must be > 0".into()));
        }
        Ok(())
    }
}

/// Draws a fully connected scenario with default weights.
///
/// Values are drawn in `f64` from a ChaCha8 stream seeded with `seed`, in the
/// order: priorities, success probabilities, then ttc row by row. The same
/// seed always yields the same scenario.
pub fn generate_scenario<T: Scalar>(
    seed: u64,
    n_vehicles: usize,
    m_tasks: usize,
    ranges: &GenRanges,
) -> Result<Scenario<T>, ScenarioError> {
    if n_vehicles == 0 || m_tasks == 0 {
        return Err(ScenarioError::Config(format!(
            "scenario size {n_vehicles}x{m_tasks} must be at least 1x1"
        )));
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| T::of(rng.random_range(lo..=hi));
    let priority = (0..m_tasks).map(|_| draw(ranges.priority)).collect();
    let success = (0..m_tasks).map(|_| draw(ranges.success)).collect();
    let mut ttc = Array2::zeros((n_vehicles, m_tasks));
    for v in ttc.iter_mut() {
        *v = draw(ranges.ttc);
    }
    Scenario::new(priority, success, ttc, RateWeights::default())
}
