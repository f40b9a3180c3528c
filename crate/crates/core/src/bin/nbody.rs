use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use nbody_core::bench::{self, BenchMatrix};
use nbody_core::ladder::{self, VariantId};
use nbody_core::physics::{DynSystem, Precision, SimulationConfig, Threads, DEFAULT_DT, DEFAULT_G, DEFAULT_SOFTENING};
use nbody_core::sloc::{self, CommentProfile};
use nbody_core::verify::{self, DEFAULT_GUARD, RELAXED_TOL_DOUBLE, TOL_SINGLE};
use nbody_core::{generate, write_snapshot, EnvironmentReport};

#[derive(Parser)]
#[command(
    name = "nbody",
    version,
    about = "All-pairs N-body kernels, benchmarks and effort metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic initial condition as a snapshot file.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "double")]
        precision: String,
    },
    /// Run a benchmark sweep and write results.csv plus sidecars to a directory.
    Bench {
        /// Comma-separated variant ids, or `all`.
        #[arg(long, default_value = "all")]
        variants: String,
        #[arg(long, default_value = "1024,4096,16384")]
        n: String,
        #[arg(long, default_value = "auto")]
        threads: String,
        #[arg(long, default_value = "single,double")]
        precision: String,
        #[arg(long, default_value = "8,16,32")]
        blocks: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check one variant against the double-precision oracle.
    Verify {
        #[arg(long)]
        variant: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value = "double")]
        precision: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        threads: String,
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = DEFAULT_G)]
        g: f64,
        #[arg(long, default_value_t = DEFAULT_SOFTENING)]
        softening: f64,
    },
    /// Count code, comment and blank lines.
    Sloc {
        /// Comment profile: c, rust or hash.
        #[arg(long)]
        profile: String,
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List the ladder variants available in this build.
    Variants,
}

fn parse_list<T>(text: &str) -> anyhow::Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().with_context(|| format!("invalid list item `{s}`")))
        .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate {
            n,
            seed,
            out,
            precision,
        } => {
            let precision: Precision = precision.parse()?;
            let system = DynSystem::Double(generate(n, seed)?).to_precision(precision);
            write_snapshot(&system, &out)?;
            println!("wrote {n} bodies ({precision}) to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            variants,
            n,
            threads,
            precision,
            blocks,
            steps,
            reps,
            warmup,
            seed,
            out,
        } => {
            let variants = if variants == "all" {
                VariantId::ALL.to_vec()
            } else {
                parse_list(&variants)?
            };
            let matrix = BenchMatrix {
                variants,
                ns: parse_list(&n)?,
                threads: parse_list(&threads)?,
                precisions: parse_list(&precision)?,
                block_sizes: parse_list(&blocks)?,
                steps,
                base: SimulationConfig::default(),
            };
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let records = bench::run_benchmark(&matrix, reps, warmup, seed)?;
            let path = out.join("results.csv");
            bench::write_results(&records, &EnvironmentReport::detect(), &path)?;
            for r in &records {
                let perf = r.gflops.map_or_else(|| "-".to_owned(), |g| format!("{g:.3} GFLOPS"));
                println!(
                    "{:<24} n={:<6} {:<6} threads={:<4} block={:<3} {:>16}  {}",
                    r.variant.as_str(),
                    r.n,
                    r.precision.as_str(),
                    r.threads_requested.to_string(),
                    r.block_size.map_or_else(|| "-".into(), |b| b.to_string()),
                    perf,
                    r.status.as_csv()
                );
            }
            println!("wrote {}", path.display());
            let failed = records.iter().any(|r| r.is_error());
            Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Verify {
            variant,
            n,
            steps,
            precision,
            seed,
            threads,
            block_size,
            dt,
            g,
            softening,
        } => {
            let variant: VariantId = variant.parse()?;
            let precision: Precision = precision.parse()?;
            let config = SimulationConfig {
                dt,
                steps,
                g,
                softening,
                precision,
                threads: threads.parse::<Threads>()?,
                block_size,
            };
            let input = generate(n, seed)?;
            let reference = verify::reference_simulate(&input, &config)?;
            let candidate = ladder::run_simulation_dyn(
                variant,
                &DynSystem::Double(input.clone()).to_precision(precision),
                &config,
            )?;
            let (report, conservation) = match &candidate {
                DynSystem::Single(c) => (
                    verify::compare_states(c, &reference, DEFAULT_GUARD)?,
                    verify::check_conservation(&input.cast::<f32>(), c, g, softening)?,
                ),
                DynSystem::Double(c) => (
                    verify::compare_states(c, &reference, DEFAULT_GUARD)?,
                    verify::check_conservation(&input, c, g, softening)?,
                ),
            };
            let strict = variant.descriptor().strict_math && precision == Precision::Double;
            let tolerance = match precision {
                Precision::Double if strict => 0.0,
                Precision::Double => RELAXED_TOL_DOUBLE,
                Precision::Single => TOL_SINGLE,
            };
            println!("variant            {variant} ({precision}, n={n}, steps={steps}, seed={seed})");
            println!("bitwise equal      {}", report.bitwise_equal);
            println!(
                "max rel pos error  {:.3e} (body {})",
                report.max_rel_pos_error, report.argmax_body
            );
            println!("max rel vel error  {:.3e}", report.max_rel_vel_error);
            println!("momentum drift     {:.3e}", conservation.momentum_drift);
            println!("energy drift       {:.3e}", conservation.energy_drift);
            let pass = if strict {
                report.bitwise_equal
            } else {
                report.max_rel_pos_error < tolerance
            };
            if pass {
                println!("PASS");
                Ok(ExitCode::SUCCESS)
            } else if strict {
                println!("FAIL: strict variant differs from the oracle");
                Ok(ExitCode::FAILURE)
            } else {
                println!("FAIL: error exceeds {tolerance:e}");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Sloc { profile, paths, json } => {
            let Some(profile) = CommentProfile::by_name(&profile) else {
                bail!("unknown comment profile `{profile}` (expected c, rust or hash)");
            };
            let report = sloc::count_sloc(&paths, profile);
            for f in &report.files {
                match (&f.counts, &f.error) {
                    (Some(c), _) => println!(
                        "{:>6} code {:>6} comment {:>6} blank  {}",
                        c.code,
                        c.comment,
                        c.blank,
                        f.path.display()
                    ),
                    (None, Some(e)) => println!("error: {}: {e}", f.path.display()),
                    (None, None) => {}
                }
            }
            let t = report.totals;
            println!(
                "{:>6} code {:>6} comment {:>6} blank  total",
                t.code, t.comment, t.blank
            );
            for (name, c) in &report.regions {
                println!(
                    "{:>6} code {:>6} comment {:>6} blank  [{name}]",
                    c.code, c.comment, c.blank
                );
            }
            if let Some(path) = json {
                sloc::write_report(&report, &path)?;
            }
            let errors = report.files.iter().any(|f| f.error.is_some());
            Ok(if errors { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Variants => {
            for v in ladder::list_variants() {
                println!(
                    "{:<24} {:<6} {}",
                    v.id.as_str(),
                    if v.strict_math { "strict" } else { "fast" },
                    if v.available { "available" } else { "unavailable" }
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
