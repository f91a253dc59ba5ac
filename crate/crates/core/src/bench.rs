//! Seeded benchmark sweeps: generate scenarios, solve them with each engine,
//! rank the answers against the exhaustive optimum and aggregate per size.
//!
//! Trial `t` of every size uses scenario seed `seed + t`, so any record can
//! be regenerated and re-ranked from its stored seed.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;

use crate::ideal::{self, DEFAULT_THRESHOLD};
use crate::loihi::{self, neuron_count, NetworkConfig, SimStatus};
use crate::oracle::{format_hundredths, OracleConfig, Ranker};
use crate::scalar::Scalar;
use crate::scenario::{generate_scenario, Allocation, GenRanges, Scenario};

pub const BENCH_HEADER: &str = "# spike-alloc bench v1";
pub const RECORDS_HEADER: &str = "# spike-alloc bench-records v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Ideal,
    Loihi,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Ideal => "ideal",
            Engine::Loihi => "loihi",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(Engine::Ideal),
            "loihi" => Ok(Engine::Loihi),
            other => Err(format!("unknown engine '{other}' (expected ideal or loihi)")),
        }
    }
}

/// Outcome of running one engine on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineRun {
    pub allocation: Allocation,
    pub wall_time: Duration,
    pub timed_out: bool,
    /// Fires recorded: solver events, or admitted accumulation spikes.
    pub events: usize,
}

/// Solves `scenario` with `engine`, timing the call.
pub fn run_engine<T: Scalar>(
    engine: Engine,
    scenario: &Scenario<T>,
    threshold: T,
    network: NetworkConfig,
) -> Result<EngineRun, String> {
    let start = Instant::now();
    match engine {
        Engine::Ideal => {
            let r = ideal::solve(scenario, threshold).map_err(|e| e.to_string())?;
            Ok(EngineRun {
                wall_time: start.elapsed(),
                events: r.events.len(),
                allocation: r.allocation,
                timed_out: false,
            })
        }
        Engine::Loihi => {
            let r = loihi::run(scenario, network).map_err(|e| e.to_string())?;
            Ok(EngineRun {
                wall_time: start.elapsed(),
                events: r.admitted.len(),
                allocation: r.allocation,
                timed_out: r.status == SimStatus::TimedOut,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// `(n_vehicles, m_tasks)` pairs.
    pub sizes: Vec<(usize, usize)>,
    pub trials: usize,
    pub seed: u64,
    pub ranges: GenRanges,
    pub engines: Vec<Engine>,
    pub oracle: OracleConfig,
    pub threshold: f64,
    pub network: NetworkConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![(3, 3), (4, 4), (5, 5), (6, 6)],
            trials: 20,
            seed: 1,
            ranges: GenRanges::default(),
            engines: vec![Engine::Ideal, Engine::Loihi],
            oracle: OracleConfig::default(),
            threshold: DEFAULT_THRESHOLD,
            network: NetworkConfig {
                record_voltage: false,
                ..NetworkConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordStatus {
    Ok,
    TimedOut,
    Failed(String),
}

impl RecordStatus {
    pub fn label(&self) -> String {
        match self {
            RecordStatus::Ok => "ok".into(),
            RecordStatus::TimedOut => "timeout".into(),
            RecordStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub seed: u64,
    pub n_vehicles: usize,
    pub m_tasks: usize,
    pub engine: Engine,
    pub wall_time: Option<Duration>,
    pub allocation: Option<Allocation>,
    pub reward: Option<f64>,
    pub rank: Option<u64>,
    pub total: Option<u64>,
    pub percentile_hundredths: Option<u64>,
    pub status: RecordStatus,
}

/// Aggregate over the trials of one size and engine. Percentile statistics
/// cover records with status `ok` only.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub n_vehicles: usize,
    pub m_tasks: usize,
    pub engine: Engine,
    pub trials: usize,
    pub completed: usize,
    pub median_percentile: Option<f64>,
    pub min_percentile: Option<f64>,
    pub median_wall_time: Option<Duration>,
    pub neuron_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub summary: Vec<BenchSummary>,
}

fn bench_trial<T: Scalar>(cfg: &BenchConfig, n: usize, m: usize, seed: u64) -> Vec<BenchRecord> {
    let blank = |engine, status| BenchRecord {
        seed,
        n_vehicles: n,
        m_tasks: m,
        engine,
        wall_time: None,
        allocation: None,
        reward: None,
        rank: None,
        total: None,
        percentile_hundredths: None,
        status,
    };
    let scenario = match generate_scenario::<T>(seed, n, m, &cfg.ranges) {
        Ok(s) => s,
        Err(e) => {
            return cfg
                .engines
                .iter()
                .map(|&eng| blank(eng, RecordStatus::Failed(e.to_string())))
                .collect()
        }
    };
    let ranker = Ranker::new(&scenario, &cfg.oracle);
    cfg.engines
        .iter()
        .map(|&engine| {
            let run = match run_engine(engine, &scenario, T::of(cfg.threshold), cfg.network) {
                Ok(r) => r,
                Err(e) => return blank(engine, RecordStatus::Failed(e)),
            };
            let mut rec = blank(
                engine,
                if run.timed_out {
                    RecordStatus::TimedOut
                } else {
                    RecordStatus::Ok
                },
            );
            rec.wall_time = Some(run.wall_time);
            match &ranker {
                Ok(ranker) => match ranker.rank(&run.allocation) {
                    Ok(rep) => {
                        rec.reward = Some(rep.candidate_reward.as_f64());
                        rec.rank = rep.rank.to_u64();
                        rec.total = rep.total.to_u64();
                        rec.percentile_hundredths = Some(rep.percentile_hundredths);
                    }
                    Err(e) => rec.status = RecordStatus::Failed(e.to_string()),
                },
                Err(e) => rec.status = RecordStatus::Failed(e.to_string()),
            }
            rec.allocation = Some(run.allocation);
            rec
        })
        .collect()
}

fn median_of<V: Copy + Ord>(mut v: Vec<V>, mid: impl Fn(V, V) -> f64, one: impl Fn(V) -> f64) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort();
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { one(v[k]) } else { mid(v[k - 1], v[k]) })
}

fn summarize(records: &[BenchRecord], n: usize, m: usize, engine: Engine) -> BenchSummary {
    let rows: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.n_vehicles == n && r.m_tasks == m && r.engine == engine)
        .collect();
    let ok: Vec<&&BenchRecord> = rows.iter().filter(|r| r.status == RecordStatus::Ok).collect();
    let pct: Vec<u64> = ok.iter().filter_map(|r| r.percentile_hundredths).collect();
    let walls: Vec<Duration> = rows.iter().filter_map(|r| r.wall_time).collect();
    BenchSummary {
        n_vehicles: n,
        m_tasks: m,
        engine,
        trials: rows.len(),
        completed: ok.len(),
        median_percentile: median_of(pct.clone(), |a, b| (a + b) as f64 / 200.0, |a| a as f64 / 100.0),
        min_percentile: pct.iter().min().map(|&h| h as f64 / 100.0),
        median_wall_time: median_of(
            walls,
            |a, b| (a + b).as_secs_f64() / 2.0,
            |a| a.as_secs_f64(),
        )
        .map(Duration::from_secs_f64),
        neuron_count: neuron_count(n, m),
    }
}

/// Runs the sweep. Failures are recorded per row and do not stop the run.
pub fn run_bench<T: Scalar>(cfg: &BenchConfig) -> BenchReport {
    let mut records = Vec::new();
    for &(n, m) in &cfg.sizes {
        for trial in 0..cfg.trials {
            records.extend(bench_trial::<T>(cfg, n, m, cfg.seed.wrapping_add(trial as u64)));
        }
    }
    let summary = cfg
        .sizes
        .iter()
        .flat_map(|&(n, m)| cfg.engines.iter().map(move |&e| (n, m, e)))
        .map(|(n, m, e)| summarize(&records, n, m, e))
        .collect();
    BenchReport { records, summary }
}

fn opt_pct(p: Option<f64>) -> String {
    p.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

/// Per-size, per-engine aggregate table. Wall-time columns are written only
/// when `timing` is set, which keeps untimed output reproducible byte for byte.
pub fn write_summary<W: Write>(mut w: W, report: &BenchReport, timing: bool) -> io::Result<()> {
    writeln!(w, "{BENCH_HEADER}")?;
    write!(w, "size,engine,trials,completed,median_percentile,min_percentile,neurons")?;
    if timing {
        write!(w, ",median_wall_ms")?;
    }
    writeln!(w)?;
    for s in &report.summary {
        write!(
            w,
            "{}x{},{},{},{},{},{},{}",
            s.n_vehicles,
            s.m_tasks,
            s.engine,
            s.trials,
            s.completed,
            opt_pct(s.median_percentile),
            opt_pct(s.min_percentile),
            s.neuron_count
        )?;
        if timing {
            let ms = s.median_wall_time.map(|d| format!("{:.3}", d.as_secs_f64() * 1e3));
            write!(w, ",{}", ms.unwrap_or_else(|| "-".into()))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One row per trial and engine.
pub fn write_records<W: Write>(mut w: W, report: &BenchReport, timing: bool) -> io::Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    write!(w, "seed,size,engine,allocation,reward,rank,total,percentile,status")?;
    if timing {
        write!(w, ",wall_ms")?;
    }
    writeln!(w)?;
    let dash = || "-".to_string();
    for r in &report.records {
        write!(
            w,
            "{},{}x{},{},{},{},{},{},{},{}",
            r.seed,
            r.n_vehicles,
            r.m_tasks,
            r.engine,
            r.allocation.as_ref().map(|a| a.to_string()).unwrap_or_else(dash),
            r.reward.map(|v| v.to_string()).unwrap_or_else(dash),
            r.rank.map(|v| v.to_string()).unwrap_or_else(dash),
            r.total.map(|v| v.to_string()).unwrap_or_else(dash),
            r.percentile_hundredths.map(format_hundredths).unwrap_or_else(dash),
            r.status.label().replace(',', ";"),
        )?;
        if timing {
            let ms = r.wall_time.map(|d| format!("{:.3}", d.as_secs_f64() * 1e3));
            write!(w, ",{}", ms.unwrap_or_else(dash))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> BenchConfig {
        BenchConfig {
            sizes: vec![(2, 2), (3, 3)],
            trials: 3,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn records_and_summary_shape() {
        let report = run_bench::<f64>(&small_cfg());
        assert_eq!(report.records.len(), 2 * 3 * 2);
        assert_eq!(report.summary.len(), 4);
        let counts: Vec<usize> = report.summary.iter().map(|s| s.neuron_count).collect();
        assert_eq!(counts, vec![12, 12, 24, 24]);
        assert!(report.records.iter().all(|r| r.status == RecordStatus::Ok));
    }

    #[test]
    fn untimed_tables_are_reproducible() {
        let render = || {
            let report = run_bench::<f64>(&small_cfg());
            let mut a = Vec::new();
            write_summary(&mut a, &report, false).unwrap();
            write_records(&mut a, &report, false).unwrap();
            a
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn budget_failures_are_marked() {
        let cfg = BenchConfig {
            sizes: vec![(3, 3)],
            trials: 2,
            oracle: OracleConfig { budget: 10, chunks: 0 },
            ..BenchConfig::default()
        };
        let report = run_bench::<f64>(&cfg);
        assert!(report.records.iter().all(|r| matches!(r.status, RecordStatus::Failed(_))));
        assert!(report.records.iter().all(|r| r.allocation.is_some()));
        assert_eq!(report.summary[0].median_percentile, None);
    }

    #[test]
    fn median_even_and_odd() {
        let one = |a: u64| a as f64;
        let mid = |a: u64, b: u64| (a + b) as f64 / 2.0;
        assert_eq!(median_of(vec![3, 1, 2], mid, one), Some(2.0));
        assert_eq!(median_of(vec![4, 1, 2, 3], mid, one), Some(2.5));
        assert_eq!(median_of(Vec::<u64>::new(), mid, one), None);
    }

    #[test]
    fn engine_names() {
        assert_eq!("ideal".parse::<Engine>().unwrap(), Engine::Ideal);
        assert_eq!("loihi".parse::<Engine>().unwrap(), Engine::Loihi);
        assert!("gpu".parse::<Engine>().is_err());
    }
}
