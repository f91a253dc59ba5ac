//! Exhaustive search over every allocation.
//!
//! Each vehicle independently picks one of the `M` tasks or none, giving
//! `(M + 1)^N` candidates. Candidate `k` is the mixed-radix little-endian
//! expansion of `k` in base `M + 1`: vehicle 1 is the fastest digit, digit
//! value 0 means unassigned and `d > 0` means task `d`.
//!
//! Candidates that use a disconnected pair are visited but never score; they
//! cannot beat a candidate and cannot be the optimum.

use std::io::{self, Write};
use std::ops::Range;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::scenario::{Allocation, RewardModel, Scenario, ScenarioError};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const REPORT_HEADER: &str = "# spike-alloc rank-report v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("solution space has {count} candidates, above the budget of {budget}; raise the budget to proceed")]
    BudgetExceeded { count: BigUint, budget: u64 },
    #[error("invalid candidate: {0}")]
    Candidate(#[from] ScenarioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest solution space the oracle will enumerate.
    pub budget: u64,
    /// Number of contiguous index ranges to scan in parallel; 0 picks one
    /// per rayon worker (times four).
    pub chunks: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            budget: DEFAULT_BUDGET,
            chunks: 0,
        }
    }
}

impl OracleConfig {
    pub fn unlimited() -> Self {
        OracleConfig {
            budget: u64::MAX,
            ..Self::default()
        }
    }

    fn chunk_count(&self) -> usize {
        if self.chunks > 0 {
            self.chunks
        } else {
            rayon::current_num_threads() * 4
        }
    }
}

/// `(m_tasks + 1)^n_vehicles`, exactly.
pub fn solution_count(n_vehicles: usize, m_tasks: usize) -> BigUint {
    num_traits::pow(BigUint::from(m_tasks) + BigUint::one(), n_vehicles)
}

fn checked_total(n: usize, m: usize, cfg: &OracleConfig) -> Result<u64, OracleError> {
    let count = solution_count(n, m);
    match count.to_u64() {
        Some(c) if c <= cfg.budget => Ok(c),
        _ => Err(OracleError::BudgetExceeded {
            count,
            budget: cfg.budget,
        }),
    }
}

/// Odometer over a contiguous range of candidate indices.
#[derive(Debug, Clone)]
pub struct Enumerator {
    digits: Vec<usize>,
    radix: usize,
    next: u64,
    end: u64,
}

impl Enumerator {
    pub fn new(n_vehicles: usize, m_tasks: usize, range: Range<u64>) -> Self {
        Enumerator {
            digits: decode(range.start, n_vehicles, m_tasks),
            radix: m_tasks + 1,
            next: range.start,
            end: range.end,
        }
    }

    /// Visits every candidate in the range in index order.
    pub fn for_each(mut self, mut f: impl FnMut(u64, &[usize])) {
        while self.next < self.end {
            f(self.next, &self.digits);
            self.next += 1;
            for d in self.digits.iter_mut() {
                *d += 1;
                if *d < self.radix {
                    break;
                }
                *d = 0;
            }
        }
    }
}

/// Task vector of candidate `index`.
pub fn decode(mut index: u64, n_vehicles: usize, m_tasks: usize) -> Vec<usize> {
    let radix = m_tasks as u64 + 1;
    (0..n_vehicles)
        .map(|_| {
            let d = index % radix;
            index /= radix;
            d as usize
        })
        .collect()
}

/// Index of a task vector; inverse of [`decode`].
pub fn encode(tasks: &[usize], m_tasks: usize) -> u64 {
    let radix = m_tasks as u64 + 1;
    tasks.iter().rev().fold(0, |acc, &d| acc * radix + d as u64)
}

/// Splits `0..total` into `k` contiguous ranges of near-equal size.
pub fn partition(total: u64, k: usize) -> Vec<Range<u64>> {
    let k = (k.max(1) as u64).min(total.max(1));
    (0..k).map(|c| (total * c / k)..(total * (c + 1) / k)).collect()
}

/// Number of feasible candidates in `range` whose reward is strictly above
/// `target`.
pub fn count_better_in_range<T: Scalar>(model: &RewardModel<T>, target: T, range: Range<u64>) -> u64 {
    let mut count = 0;
    Enumerator::new(model.n_vehicles(), model.m_tasks(), range).for_each(|_, tasks| {
        if model.feasible(tasks) && model.evaluate_unchecked(tasks) > target {
            count += 1;
        }
    });
    count
}

/// Counts over `k` contiguous chunks in parallel and sums.
pub fn count_better_partitioned<T: Scalar>(model: &RewardModel<T>, target: T, total: u64, k: usize) -> u64 {
    partition(total, k)
        .into_par_iter()
        .map(|r| count_better_in_range(model, target, r))
        .sum()
}

#[derive(Debug, Clone)]
struct Best<T> {
    reward: T,
    tasks: Vec<usize>,
}

impl<T: Scalar> Best<T> {
    fn better_than(&self, other: &Best<T>) -> bool {
        self.reward > other.reward || (self.reward == other.reward && self.tasks < other.tasks)
    }
}

fn best_in_range<T: Scalar>(model: &RewardModel<T>, range: Range<u64>) -> Option<Best<T>> {
    let mut best: Option<Best<T>> = None;
    Enumerator::new(model.n_vehicles(), model.m_tasks(), range).for_each(|_, tasks| {
        if !model.feasible(tasks) {
            return;
        }
        let r = model.evaluate_unchecked(tasks);
        let replace = match &best {
            None => true,
            Some(b) => r > b.reward || (r == b.reward && tasks < &b.tasks[..]),
        };
        if replace {
            best = Some(Best {
                reward: r,
                tasks: tasks.to_vec(),
            });
        }
    });
    best
}

fn search_model<T: Scalar>(model: &RewardModel<T>, total: u64, chunks: usize) -> (Allocation, T) {
    let best = partition(total, chunks)
        .into_par_iter()
        .filter_map(|r| best_in_range(model, r))
        .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
        .expect("the all-unassigned candidate is always feasible");
    (Allocation::from_tasks(best.tasks), best.reward)
}

/// Highest-reward allocation; ties go to the lexicographically smallest
/// task vector.
pub fn search_best<T: Scalar>(scenario: &Scenario<T>, cfg: &OracleConfig) -> Result<(Allocation, T), OracleError> {
    let total = checked_total(scenario.n_vehicles(), scenario.m_tasks(), cfg)?;
    let model = RewardModel::new(scenario);
    Ok(search_model(&model, total, cfg.chunk_count()))
}

/// Where a candidate falls in the reward-ordered solution space.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport<T> {
    /// 1 + number of candidates with strictly greater reward.
    pub rank: BigUint,
    pub total: BigUint,
    /// Percentile in hundredths of a percent (9996 = 99.96%).
    pub percentile_hundredths: u64,
    pub best_reward: T,
    pub best_allocation: Allocation,
    pub candidate_reward: T,
    pub candidate: Allocation,
}

impl<T: Scalar> RankReport<T> {
    pub fn percentile(&self) -> f64 {
        self.percentile_hundredths as f64 / 100.0
    }

    /// Percentile formatted with two decimals, e.g. `99.96`.
    pub fn percentile_str(&self) -> String {
        format_hundredths(self.percentile_hundredths)
    }
}

pub fn format_hundredths(h: u64) -> String {
    format!("{}.{:02}", h / 100, h % 100)
}

/// `10000` for rank 1, otherwise `floor(10000 * (total - rank) / total)`,
/// i.e. `100 * (total - rank) / total` truncated to two decimals.
pub fn percentile_hundredths(rank: &BigUint, total: &BigUint) -> u64 {
    if rank.is_one() {
        return 10_000;
    }
    let scaled = (total - rank) * BigUint::from(10_000u32) / total;
    scaled.to_u64().expect("percentile fits in u64")
}

/// Ranks candidates for one scenario; the optimum is found once up front.
#[derive(Debug, Clone)]
pub struct Ranker<T> {
    model: RewardModel<T>,
    total: u64,
    chunks: usize,
    best_allocation: Allocation,
    best_reward: T,
}

impl<T: Scalar> Ranker<T> {
    pub fn new(scenario: &Scenario<T>, cfg: &OracleConfig) -> Result<Self, OracleError> {
        let total = checked_total(scenario.n_vehicles(), scenario.m_tasks(), cfg)?;
        let model = RewardModel::new(scenario);
        let chunks = cfg.chunk_count();
        let (best_allocation, best_reward) = search_model(&model, total, chunks);
        Ok(Ranker {
            model,
            total,
            chunks,
            best_allocation,
            best_reward,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn best(&self) -> (&Allocation, T) {
        (&self.best_allocation, self.best_reward)
    }

    pub fn rank(&self, candidate: &Allocation) -> Result<RankReport<T>, OracleError> {
        let candidate_reward = self.model.evaluate(candidate)?;
        let better = count_better_partitioned(&self.model, candidate_reward, self.total, self.chunks);
        let rank = BigUint::from(better + 1);
        let total = BigUint::from(self.total);
        Ok(RankReport {
            percentile_hundredths: percentile_hundredths(&rank, &total),
            rank,
            total,
            best_reward: self.best_reward,
            best_allocation: self.best_allocation.clone(),
            candidate_reward,
            candidate: candidate.clone(),
        })
    }
}

/// Ranks `candidate` against every allocation of the scenario.
pub fn rank_allocation<T: Scalar>(
    scenario: &Scenario<T>,
    candidate: &Allocation,
    cfg: &OracleConfig,
) -> Result<RankReport<T>, OracleError> {
    candidate.validate_for(scenario)?;
    Ranker::new(scenario, cfg)?.rank(candidate)
}

/// Writes a report with the same columns as a results table row: baseline
/// reward and result, candidate reward and result, rank and percentile.
pub fn write_report<T: Scalar, W: Write>(mut w: W, report: &RankReport<T>) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    writeln!(w, "baseline_reward: {}", report.best_reward)?;
    writeln!(w, "baseline_result: {}", report.best_allocation)?;
    writeln!(w, "candidate_reward: {}", report.candidate_reward)?;
    writeln!(w, "candidate_result: {}", report.candidate)?;
    writeln!(w, "rank: {} of {}", report.rank, report.total)?;
    writeln!(w, "percentile: {}%", report.percentile_str())?;
    Ok(())
}
