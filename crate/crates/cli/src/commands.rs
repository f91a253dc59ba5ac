use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use spike_alloc::bench::{self, BenchConfig, BenchReport, Engine, RecordStatus};
use spike_alloc::ideal::{self, write_event_log};
use spike_alloc::loihi::{self, write_raster, write_voltage_trace};
use spike_alloc::oracle::{format_hundredths, write_report, OracleConfig, RankReport, Ranker};
use spike_alloc::scenario::{generate_scenario, load_scenario, reward, save_scenario};
use spike_alloc::{Allocation, RateWeights, Scalar, Scenario};

use crate::{BenchArgs, Command, Format, GenArgs, RankArgs, SolveArgs, EXIT_TIMEOUT};

pub const SOLVE_HEADER: &str = "# spike-alloc solve v1";

pub fn dispatch<T: Scalar>(command: Command, out_dir: &Path) -> Result<ExitCode> {
    match command {
        Command::Gen(a) => gen::<T>(a, out_dir),
        Command::Solve(a) => solve::<T>(a, out_dir),
        Command::Rank(a) => rank::<T>(a),
        Command::Bench(a) => bench::<T>(a),
    }
}

fn weights<T: Scalar>(w: (f64, f64, f64)) -> Result<RateWeights<T>> {
    Ok(RateWeights::new(T::of(w.0), T::of(w.1), T::of(w.2))?)
}

fn load<T: Scalar>(path: &Path, w: Option<(f64, f64, f64)>) -> Result<Scenario<T>> {
    let s = load_scenario::<T>(path).with_context(|| format!("loading {}", path.display()))?;
    match w {
        Some(w) => Ok(s.with_weights(weights(w)?)?),
        None => Ok(s),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn gen<T: Scalar>(a: GenArgs, out_dir: &Path) -> Result<ExitCode> {
    let (n, m) = a.size;
    let mut s = generate_scenario::<T>(a.seed, n, m, &a.ranges.ranges())?;
    if let Some(w) = a.weights {
        s = s.with_weights(weights(w)?)?;
    }
    let path = a
        .out
        .unwrap_or_else(|| out_dir.join(format!("scenario-{}-{n}x{m}.toml", a.seed)));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_scenario(&s, &path)?;
    println!("{}", path.display());
    Ok(ExitCode::SUCCESS)
}

/// Fields shared by both engines' solve reports, in print order.
struct SolveReport {
    fields: Vec<(&'static str, Value)>,
    timed_out: bool,
}

impl SolveReport {
    fn push(&mut self, key: &'static str, v: impl Into<Value>) {
        self.fields.push((key, v.into()));
    }

    fn write_text(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{SOLVE_HEADER}")?;
        for (k, v) in &self.fields {
            match v {
                Value::String(s) => writeln!(w, "{k}: {s}")?,
                other => writeln!(w, "{k}: {other}")?,
            }
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("format".into(), json!(SOLVE_HEADER.trim_start_matches("# ")));
        for (k, v) in &self.fields {
            map.insert((*k).into(), v.clone());
        }
        Value::Object(map)
    }
}

fn one_based(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("[{}]", items.join(" "))
}

fn solve<T: Scalar>(a: SolveArgs, out_dir: &Path) -> Result<ExitCode> {
    let s = load::<T>(&a.scenario, a.weights)?;
    let trace_dir = a.out.clone().unwrap_or_else(|| out_dir.to_path_buf());
    let stem = a
        .scenario
        .file_stem()
        .map(|x| x.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let trace_path = |kind: &str| trace_dir.join(format!("{stem}-{}-{kind}.csv", Engine::from(a.engine)));

    let mut report = SolveReport {
        fields: Vec::new(),
        timed_out: false,
    };
    report.push("engine", Engine::from(a.engine).name());
    let mut traces: Vec<(&'static str, PathBuf)> = Vec::new();
    let start = Instant::now();
    match Engine::from(a.engine) {
        Engine::Ideal => {
            let r = ideal::solve(&s, T::of(a.network.threshold))?;
            let wall = start.elapsed();
            report.push("status", "completed");
            report.push("allocation", r.allocation.to_string());
            report.push("reward", reward(&s, &r.allocation)?.as_f64());
            report.push("events", r.events.len());
            if !r.unassignable.is_empty() {
                report.push("unassignable", one_based(&r.unassignable));
            }
            if !a.no_timing {
                report.push("wall_ms", wall.as_secs_f64() * 1e3);
            }
            if a.trace {
                let p = trace_path("events");
                let mut w = create(&p)?;
                write_event_log(&mut w, &r.events)?;
                w.flush()?;
                traces.push(("events_file", p));
            }
        }
        Engine::Loihi => {
            let r = loihi::run(&s, a.network.network(a.trace))?;
            let wall = start.elapsed();
            report.timed_out = r.timed_out();
            report.push("status", if r.timed_out() { "timeout" } else { "completed" });
            report.push("allocation", r.allocation.to_string());
            report.push("reward", reward(&s, &r.allocation)?.as_f64());
            report.push("events", r.admitted.len());
            report.push("ticks", r.ticks);
            report.push("conflicts", r.conflicts.len());
            report.push("neurons", r.neuron_count);
            if !r.unassignable.is_empty() {
                report.push("unassignable", one_based(&r.unassignable));
            }
            if !a.no_timing {
                report.push("wall_ms", wall.as_secs_f64() * 1e3);
            }
            if a.trace {
                let p = trace_path("raster");
                let mut w = create(&p)?;
                write_raster(&mut w, &r)?;
                w.flush()?;
                traces.push(("raster_file", p));
                let p = trace_path("voltage");
                let mut w = create(&p)?;
                write_voltage_trace(&mut w, &r)?;
                w.flush()?;
                traces.push(("voltage_file", p));
            }
        }
    }
    for (key, p) in traces {
        report.push(key, p.display().to_string());
    }

    match a.format {
        Format::Text => report.write_text(io::stdout().lock())?,
        Format::Json => print_json(&report.to_json())?,
    }
    if report.timed_out {
        eprintln!(
            "error: loihi run reached max_ticks ({}) before every vehicle was allocated; the allocation is partial",
            a.network.max_ticks
        );
        return Ok(ExitCode::from(EXIT_TIMEOUT));
    }
    Ok(ExitCode::SUCCESS)
}

fn rank_json<T: Scalar>(r: &RankReport<T>) -> Value {
    json!({
        "format": "spike-alloc rank-report v1",
        "baseline_reward": r.best_reward.as_f64(),
        "baseline_result": r.best_allocation.to_string(),
        "candidate_reward": r.candidate_reward.as_f64(),
        "candidate_result": r.candidate.to_string(),
        "rank": r.rank.to_string(),
        "total": r.total.to_string(),
        "percentile": r.percentile_str(),
    })
}

fn rank<T: Scalar>(a: RankArgs) -> Result<ExitCode> {
    let s = load::<T>(&a.scenario, a.weights)?;
    let cfg = OracleConfig {
        budget: a.budget,
        ..OracleConfig::default()
    };
    let candidate: Allocation = match (&a.allocation, a.engine) {
        (Some(text), _) => text
            .parse()
            .map_err(|e| anyhow::anyhow!("bad --allocation '{text}': {e}"))?,
        (None, Some(engine)) => {
            let run = bench::run_engine(engine.into(), &s, T::of(a.network.threshold), a.network.network(false))
                .map_err(anyhow::Error::msg)?;
            if run.timed_out {
                eprintln!("warning: loihi run timed out; ranking its partial allocation");
            }
            run.allocation
        }
        (None, None) => bail!("give --allocation or --engine"),
    };
    candidate.validate_for(&s)?;
    let report = Ranker::new(&s, &cfg)?.rank(&candidate)?;
    match a.format {
        Format::Text => write_report(io::stdout().lock(), &report)?,
        Format::Json => print_json(&rank_json(&report))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_json(report: &BenchReport, timing: bool) -> Value {
    let pct = |p: Option<f64>| p.map(|v| json!(format!("{v:.2}"))).unwrap_or(Value::Null);
    let summary: Vec<Value> = report
        .summary
        .iter()
        .map(|s| {
            let mut v = json!({
                "size": format!("{}x{}", s.n_vehicles, s.m_tasks),
                "engine": s.engine.name(),
                "trials": s.trials,
                "completed": s.completed,
                "median_percentile": pct(s.median_percentile),
                "min_percentile": pct(s.min_percentile),
                "neurons": s.neuron_count,
            });
            if timing {
                v["median_wall_ms"] = json!(s.median_wall_time.map(|d| d.as_secs_f64() * 1e3));
            }
            v
        })
        .collect();
    let records: Vec<Value> = report
        .records
        .iter()
        .map(|r| {
            let mut v = json!({
                "seed": r.seed,
                "size": format!("{}x{}", r.n_vehicles, r.m_tasks),
                "engine": r.engine.name(),
                "allocation": r.allocation.as_ref().map(|a| a.to_string()),
                "reward": r.reward,
                "rank": r.rank,
                "total": r.total,
                "percentile": r.percentile_hundredths.map(format_hundredths),
                "status": r.status.label(),
            });
            if timing {
                v["wall_ms"] = json!(r.wall_time.map(|d| d.as_secs_f64() * 1e3));
            }
            v
        })
        .collect();
    json!({ "format": "spike-alloc bench v1", "summary": summary, "records": records })
}

fn bench<T: Scalar>(a: BenchArgs) -> Result<ExitCode> {
    let cfg = BenchConfig {
        sizes: a.sizes,
        trials: a.trials,
        seed: a.seed,
        ranges: a.ranges.ranges(),
        engines: a.engines.into_iter().map(Engine::from).collect(),
        oracle: OracleConfig {
            budget: a.budget,
            ..OracleConfig::default()
        },
        threshold: a.network.threshold,
        network: a.network.network(false),
    };
    cfg.ranges.validate()?;
    cfg.network.validate()?;
    let report = bench::run_bench::<T>(&cfg);
    let timing = !a.no_timing;

    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    match a.format {
        Format::Text => bench::write_summary(&mut out, &report, timing)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &bench_json(&report, timing))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let Some(p) = &a.records {
        let mut w = create(p)?;
        bench::write_records(&mut w, &report, timing)?;
        w.flush()?;
    }

    let bad: Vec<_> = report.records.iter().filter(|r| r.status != RecordStatus::Ok).collect();
    if !bad.is_empty() {
        for r in &bad {
            eprintln!(
                "trial seed {} ({}x{}, {}): {}",
                r.seed,
                r.n_vehicles,
                r.m_tasks,
                r.engine,
                r.status.label()
            );
        }
        eprintln!("error: {} of {} runs did not complete", bad.len(), report.records.len());
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
