use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spike_alloc::bench::Engine;
use spike_alloc::loihi::NetworkConfig;
use spike_alloc::oracle::DEFAULT_BUDGET;
use spike_alloc::GenRanges;

mod commands;

/// Exit status for a Loihi run that hit `max_ticks` before every vehicle
/// was allocated.
pub const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "spike-alloc", version, about = "Spiking-neuron vehicle-task allocation")]
struct Cli {
    /// Floating-point precision for all computation.
    #[arg(long, global = true, value_enum, default_value_t = Precision::F64)]
    precision: Precision,

    /// Directory for generated scenarios and trace files.
    #[arg(long, global = true, env = "SPIKE_ALLOC_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded random scenario file.
    Gen(GenArgs),
    /// Solve a scenario with one engine.
    Solve(SolveArgs),
    /// Rank an allocation against every possible allocation.
    Rank(RankArgs),
    /// Generate, solve and rank seeded scenarios across sizes.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Ideal,
    Loihi,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Ideal => Engine::Ideal,
            EngineArg::Loihi => Engine::Loihi,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RangeArgs {
    /// Priority range `lo,hi`.
    #[arg(long, value_parser = parse_range, default_value = "0,1")]
    pub priority: (f64, f64),
    /// Success-probability range `lo,hi`.
    #[arg(long, value_parser = parse_range, default_value = "0,1")]
    pub success: (f64, f64),
    /// Completion-time range `lo,hi`; `lo` must be positive.
    #[arg(long, value_parser = parse_range, default_value = "1,100")]
    pub ttc: (f64, f64),
}

impl RangeArgs {
    pub fn ranges(&self) -> GenRanges {
        GenRanges {
            priority: self.priority,
            success: self.success,
            ttc: self.ttc,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    /// Accumulation-neuron threshold (Loihi engine).
    #[arg(long, default_value_t = NetworkConfig::default().threshold_acc)]
    pub threshold_acc: i64,
    /// Ticks between input spikes; control neurons fire twice as often.
    #[arg(long, default_value_t = NetworkConfig::default().input_period)]
    pub input_period: u32,
    #[arg(long, default_value_t = NetworkConfig::default().max_ticks)]
    pub max_ticks: u64,
    /// Firing threshold for the ideal engine.
    #[arg(long, default_value_t = spike_alloc::ideal::DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

impl NetworkArgs {
    pub fn network(&self, record_voltage: bool) -> NetworkConfig {
        NetworkConfig {
            threshold_acc: self.threshold_acc,
            max_ticks: self.max_ticks,
            record_voltage,
            ..NetworkConfig::default().with_input_period(self.input_period)
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Problem size as `NxM` (vehicles x tasks).
    #[arg(long, value_parser = parse_size)]
    pub size: (usize, usize),
    #[command(flatten)]
    pub ranges: RangeArgs,
    /// Rate weights `wp,ws,wt` to store in the file.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<(f64, f64, f64)>,
    /// Output file; defaults to `scenario-<seed>-<N>x<M>.toml` under
    /// `--out-dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Ideal)]
    pub engine: EngineArg,
    /// Override the scenario's rate weights, `wp,ws,wt`.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<(f64, f64, f64)>,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Write event, raster and voltage files to the output directory.
    #[arg(long)]
    pub trace: bool,
    /// Directory for trace files; defaults to `--out-dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave wall-clock times out of the report.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    pub scenario: PathBuf,
    /// Candidate allocation, e.g. `[4 1 1 3]` (0 = unassigned).
    #[arg(long, conflicts_with = "engine", required_unless_present = "engine")]
    pub allocation: Option<String>,
    /// Solve with this engine and rank its answer.
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<(f64, f64, f64)>,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Largest solution space to enumerate.
    #[arg(long = "budget-override", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated sizes, e.g. `3x3,4x4`.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "3x3,4x4,5x5,6x6")]
    pub sizes: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Seed of the first trial; trial `t` uses `seed + t`.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "ideal,loihi")]
    pub engines: Vec<EngineArg>,
    #[command(flatten)]
    pub ranges: RangeArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long = "budget-override", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-trial records to this file.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got '{s}'"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad vehicle count in '{s}'"))?;
    let m: usize = m.trim().parse().map_err(|_| format!("bad task count in '{s}'"))?;
    if n == 0 || m == 0 {
        return Err(format!("size '{s}' needs at least one vehicle and one task"));
    }
    Ok((n, m))
}

fn parse_floats(s: &str, want: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != want {
        return Err(format!("expected {want} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_weights(s: &str) -> Result<(f64, f64, f64), String> {
    let v = parse_floats(s, 3)?;
    if v.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(format!("weights must lie in [0, 1], got '{s}'"));
    }
    Ok((v[0], v[1], v[2]))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.precision {
        Precision::F64 => commands::dispatch::<f64>(cli.command, &cli.out_dir),
        Precision::F32 => commands::dispatch::<f32>(cli.command, &cli.out_dir),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("4x3"), Ok((4, 3)));
        assert_eq!(parse_size("8X8"), Ok((8, 8)));
        assert!(parse_size("0x3").is_err());
        assert!(parse_size("4").is_err());
        assert!(parse_size("ax2").is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(parse_weights("0.45,0.1,0.5"), Ok((0.45, 0.1, 0.5)));
        assert!(parse_weights("0.4,0.1").is_err());
        assert!(parse_weights("1.5,0,0").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
