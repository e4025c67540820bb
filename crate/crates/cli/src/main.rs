use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mlru_core::config::load_experiments;
use mlru_core::engine::{run_sweep, ExperimentConfig, RunOptions};
use mlru_core::format::sig;
use mlru_core::metrics::{write_csv, MetricRule};
use mlru_core::policies::StrategyRegistry;
use mlru_core::traffic::{ccsr, generate_trace, TrafficConfig};

/// Spatial multi-LRU edge caching simulator.
#[derive(Debug, Parser)]
#[command(name = "mlru", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an experiment file and print the number of sweep points.
    Validate { config: PathBuf },
    /// Run an experiment file and write the results table.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use seeds 1..=N instead of those in the file.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        metric_rule: Option<MetricRule>,
        /// Record wall-clock runtime per row (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
    },
    /// Print closed-form traffic quantities.
    Analytics {
        /// Take the traffic block (and capacity) from an experiment file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 240.0)]
        lambda_c: f64,
        #[arg(long, default_value_t = 2.1)]
        volume_mean: f64,
        #[arg(long, default_value_t = 35.0)]
        lifespan_mean: f64,
        /// Span in days for the expected request count.
        #[arg(long)]
        span: Option<f64>,
        #[arg(long)]
        capacity: Option<usize>,
    },
    /// Dump the request trace of the first sweep point as CSV.
    Trace {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Stop after this many requests.
        #[arg(long)]
        limit: Option<u64>,
    },
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Run(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Run(e) => e,
        }
    }
}

fn load(path: &Path, registry: &StrategyRegistry) -> Result<Vec<ExperimentConfig>, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)?;
    load_experiments(&text, registry)
        .with_context(|| format!("invalid experiment file {}", path.display()))
        .map_err(Failure::Config)
}

/// Writes through a temporary file in the target directory, so a failed run
/// never leaves a truncated table behind.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let registry = StrategyRegistry::standard();
    match cli.command {
        Command::Validate { config } => {
            let points = load(&config, &registry)?;
            let seeds: usize = points.iter().map(|p| p.seeds.len()).sum();
            println!("ok: {} points, {} runs", points.len(), seeds);
        }
        Command::Run {
            config,
            out,
            seeds,
            threads,
            metric_rule,
            timing,
        } => {
            let mut points = load(&config, &registry)?;
            for p in &mut points {
                if let Some(n) = seeds {
                    p.seeds = (1..=n).collect();
                }
                if let Some(rule) = metric_rule {
                    p.metric_rule = rule;
                }
            }
            let options = RunOptions { record_timing: timing };
            let rows = run_sweep(&points, &registry, threads, options)
                .map_err(|e| Failure::Run(e.into()))?;
            write_atomic(&out, |w| write_csv(w, &rows)).map_err(Failure::Run)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Analytics {
            config,
            lambda_c,
            volume_mean,
            lifespan_mean,
            span,
            capacity,
        } => {
            let (traffic, capacity) = match config {
                Some(path) => {
                    let points = load(&path, &registry)?;
                    let first = &points[0];
                    (first.traffic.clone(), capacity.or(Some(first.capacity)))
                }
                None => {
                    let mut t = TrafficConfig::desk_scale();
                    t.lambda_c = lambda_c;
                    t.volume_mean = Some(volume_mean);
                    t.volume_beta = None;
                    t.lifespan_mean = lifespan_mean;
                    t.validate().map_err(|e| Failure::Config(e.into()))?;
                    (t, capacity)
                }
            };
            let s = traffic.summary().map_err(|e| Failure::Config(e.into()))?;
            let span = span.unwrap_or(traffic.horizon);
            println!("volume_beta                {}", sig(s.volume_beta, 9));
            println!("lifespan_beta              {}", sig(s.lifespan_beta, 9));
            println!("p_volume_gt_1              {}", sig(s.prob_more_than_one, 9));
            println!("volume_mean_nominal        {}", sig(s.volume_mean_nominal, 9));
            println!("volume_mean_rounded        {}", sig(s.volume_mean_discrete, 9));
            println!("catalogue_mean             {}", sig(s.catalogue_mean, 9));
            println!("requests_per_day_nominal   {}", sig(s.requests_per_day_nominal, 9));
            println!("requests_per_day           {}", sig(s.requests_per_day, 9));
            println!("requests_over_{}_days {}", sig(span, 6), sig(traffic.expected_requests(span).map_err(|e| Failure::Config(e.into()))?, 9));
            if let Some(k) = capacity {
                println!("rho_at_K={k}               {}", sig(ccsr(k as f64, traffic.lambda_c, traffic.lifespan_mean), 9));
            }
        }
        Command::Trace {
            config,
            out,
            seed,
            limit,
        } => {
            let points = load(&config, &registry)?;
            let first = &points[0];
            let win = first.network.window();
            let mut traffic = first.traffic.clone();
            traffic.window = Some([win.width, win.height]);
            traffic.master_seed = seed;
            let mut stream = generate_trace(&traffic).map_err(|e| Failure::Run(e.into()))?;
            let limit = limit.unwrap_or(u64::MAX);
            write_atomic(&out, |w| {
                writeln!(w, "time,content_id,x,y")?;
                for r in stream.by_ref().take(limit.min(usize::MAX as u64) as usize) {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        sig(r.time, 9),
                        r.content_id,
                        sig(r.position.x, 9),
                        sig(r.position.y, 9)
                    )?;
                }
                match stream.take_error() {
                    Some(e) => Err(std::io::Error::other(e.to_string())),
                    None => Ok(()),
                }
            })
            .map_err(Failure::Run)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
