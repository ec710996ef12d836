use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyqubo_bench::{emit_table, gen_micro_instances, run_benchmark, HarnessError, OutputFormat, RunConfig, SolverConfig};

#[derive(Parser)]
#[command(name = "bench", version, about = "Benchmark hybrid QUBO workflows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a workflow repeatedly over instance files and print statistics.
    Run(RunArgs),
    /// Write the micro corpus and its manifest of brute-force optima.
    GenMicro {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance files, added to those of the config.
    instances: Vec<PathBuf>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// exact, anneal or remote:<url>
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Record wall times in JSON output.
    #[arg(long)]
    times: bool,
    /// Exit nonzero if any instance fails.
    #[arg(long)]
    strict: bool,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => {
                let name = self
                    .solver
                    .clone()
                    .ok_or_else(|| HarnessError::Config("either --config or --solver is required".into()))?;
                RunConfig::new(Vec::new(), SolverConfig::named(name))
            }
        };
        cfg.instances.extend(self.instances);
        if let Some(s) = self.solver {
            cfg.solver.name = s;
        }
        if let Some(r) = self.reps {
            cfg = cfg.with_repetitions(r)?;
        }
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        let s = &mut cfg.solver;
        if let Some(b) = self.backend {
            s.backend = b;
        }
        s.fraction = self.fraction.or(s.fraction);
        s.rounds = self.rounds.or(s.rounds);
        s.iterations = self.iterations.or(s.iterations);
        s.threads = self.threads.or(s.threads);
        s.time_limit_secs = self.time_limit.or(s.time_limit_secs);
        s.node_limit = self.node_limit.or(s.node_limit);
        cfg.record_times |= self.times;
        Ok(cfg)
    }
}

fn run(args: RunArgs) -> Result<ExitCode, HarnessError> {
    let strict = args.strict;
    let output = args.output.clone();
    let cfg = args.into_config()?;
    let report = run_benchmark(&cfg)?;
    let text = emit_table(&report.stats, cfg.format);
    match output {
        Some(path) => std::fs::write(&path, text).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            source: e,
        })?,
        None => print!("{text}"),
    }
    for e in &report.errors {
        eprintln!("error: {}: {}", e.instance, e.message);
    }
    Ok(if strict && !report.errors.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::GenMicro { seed, out } => gen_micro_instances(seed, &out).map(|m| {
            println!("wrote {} instances to {}", m.entries.len(), out.display());
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
