//! Asset allocation with first-to-fire spiking neurons.
//!
//! `N` vehicles are assigned to `M` tasks (at most one task per vehicle, any
//! number of vehicles per task). Every vehicle-task pair owns an integrate and
//! fire neuron whose accumulation rate is a weighted mix of task priority,
//! success probability and relative completion time. The first neuron to reach
//! threshold claims its pair; per-vehicle lockout and per-task rate halving
//! then shape the rest of the run.
//!
//! The crate provides:
//!
//! * [`scenario`]: problem data, rate equations, the reward used for ranking,
//!   seeded generation and the TOML scenario format.
//! * [`ideal`]: an exact event-driven solver in continuous time.
//! * [`loihi`]: a discrete-tick simulator of the three-layer integer-weight
//!   network (input, accumulation and control layers).
//! * [`oracle`]: exhaustive enumeration of the `(M + 1)^N` solution space for
//!   optima and rank/percentile reports.
//! * [`bench`]: seeded benchmark sweeps combining the above.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64` or `f32`.

pub mod bench;
pub mod ideal;
pub mod loihi;
pub mod oracle;
pub mod scalar;
pub mod scenario;

pub use ideal::{solve, FireEvent, SolveError, SolveResult, SolverState};
pub use loihi::{run, Network, NetworkConfig, SimError, SimResult};
pub use oracle::{rank_allocation, search_best, solution_count, OracleConfig, OracleError, RankReport};
pub use scalar::Scalar;
pub use scenario::{Allocation, GenRanges, RateWeights, Scenario, ScenarioError};

pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type RateWeights64 = RateWeights<f64>;
pub type RateWeights32 = RateWeights<f32>;
pub type SolveResult64 = SolveResult<f64>;
pub type SolveResult32 = SolveResult<f32>;
pub type SolverState64 = SolverState<f64>;
pub type SolverState32 = SolverState<f32>;
pub type SimResult64 = SimResult<f64>;
pub type SimResult32 = SimResult<f32>;
pub type Network64 = Network<f64>;
pub type Network32 = Network<f32>;
pub type RankReport64 = RankReport<f64>;
pub type RankReport32 = RankReport<f32>;
