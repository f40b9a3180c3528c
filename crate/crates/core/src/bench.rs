//! Sweep runner, GFLOPS conversion and result files.
//!
//! Performance is reported as `GFLOPS = 20·N²·I / (T·10⁹)` with `N` bodies, `I`
//! steps and `T` the mean wall-clock seconds of one simulation. The factor 20
//! is the conventional operation count of one pairwise interaction.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::initial::generate;
use crate::ladder::{self, list_variants, resolve_thread_count, VariantDescriptor, VariantId};
use crate::physics::{DynSystem, Precision, SimulationConfig, Threads};
use crate::{Error, Result};

/// Exact CSV header of the results file.
pub const CSV_HEADER: [&str; 12] = [
    "variant",
    "n",
    "steps",
    "threads_requested",
    "threads_resolved",
    "precision",
    "block_size",
    "repetitions",
    "mean_seconds",
    "stddev_seconds",
    "gflops",
    "status",
];

/// Floating-point operations counted per pairwise interaction.
pub const FLOPS_PER_INTERACTION: f64 = 20.0;

/// `20·n²·steps / (seconds·10⁹)`.
pub fn gflops(n: usize, steps: usize, seconds: f64) -> Result<f64> {
    if seconds.is_nan() || seconds <= 0.0 || seconds.is_infinite() {
        return Err(Error::InvalidConfig(format!(
            "elapsed time must be positive, got {seconds}"
        )));
    }
    let n = n as f64;
    Ok(FLOPS_PER_INTERACTION * n * n * steps as f64 / (seconds * 1e9))
}

/// The workload sweep: every variant × N × thread spec × precision, and for
/// the blocked variant additionally every block size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchMatrix {
    pub variants: Vec<VariantId>,
    pub ns: Vec<usize>,
    pub threads: Vec<Threads>,
    pub precisions: Vec<Precision>,
    pub block_sizes: Vec<usize>,
    pub steps: usize,
    /// Template for dt, g and softening; the swept fields are overwritten.
    pub base: SimulationConfig,
}

impl Default for BenchMatrix {
    fn default() -> Self {
        BenchMatrix {
            variants: VariantId::ALL.to_vec(),
            ns: vec![1024, 4096, 16384],
            threads: vec![Threads::Auto],
            precisions: vec![Precision::Single, Precision::Double],
            block_sizes: ladder::BLOCK_SIZES.to_vec(),
            steps: 10,
            base: SimulationConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "reason", rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Skipped(String),
    Error(String),
}

impl RecordStatus {
    pub fn as_csv(&self) -> String {
        match self {
            RecordStatus::Ok => "ok".into(),
            RecordStatus::Skipped(reason) => format!("skipped:{reason}"),
            RecordStatus::Error(reason) => format!("error:{reason}"),
        }
    }
}

/// One measured cell of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub variant: VariantId,
    pub n: usize,
    pub steps: usize,
    pub threads_requested: Threads,
    pub threads_resolved: Option<usize>,
    pub precision: Precision,
    pub block_size: Option<usize>,
    pub repetitions: usize,
    pub mean_seconds: Option<f64>,
    pub stddev_seconds: Option<f64>,
    pub gflops: Option<f64>,
    pub status: RecordStatus,
    /// Raw wall-clock seconds of every measured repetition.
    pub samples: Vec<f64>,
    /// Digest of the final state of the last repetition.
    pub checksum: Option<u64>,
}

impl BenchmarkRecord {
    fn unmeasured(cell: &Cell, reps: usize, status: RecordStatus) -> Self {
        BenchmarkRecord {
            variant: cell.variant,
            n: cell.n,
            steps: cell.steps,
            threads_requested: cell.threads,
            threads_resolved: None,
            precision: cell.precision,
            block_size: cell.block_size,
            repetitions: reps,
            mean_seconds: None,
            stddev_seconds: None,
            gflops: None,
            status,
            samples: Vec::new(),
            checksum: None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self.status, RecordStatus::Error(_))
    }

    pub fn min_seconds(&self) -> Option<f64> {
        self.samples.iter().copied().reduce(f64::min)
    }
}

#[derive(Clone, Debug)]
struct Cell {
    variant: VariantId,
    n: usize,
    steps: usize,
    threads: Threads,
    precision: Precision,
    block_size: Option<usize>,
}

impl BenchMatrix {
    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.ns {
            for &precision in &self.precisions {
                for &variant in &self.variants {
                    let blocks: Vec<Option<usize>> = if variant.descriptor().requires_block_size {
                        self.block_sizes.iter().copied().map(Some).collect()
                    } else {
                        vec![None]
                    };
                    for &threads in &self.threads {
                        for &block_size in &blocks {
                            cells.push(Cell {
                                variant,
                                n,
                                steps: self.steps,
                                threads,
                                precision,
                                block_size,
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Runs every cell of `matrix` sequentially. Each cell simulates from the
/// same generated input for its N: `warmup` unmeasured runs, then `reps`
/// timed runs.
///
/// Cells that cannot run (unavailable variant, invalid configuration) are
/// returned as skipped records; a cell whose final state is non-finite is
/// returned as an error record.
pub fn run_benchmark(matrix: &BenchMatrix, reps: usize, warmup: usize, seed: u64) -> Result<Vec<BenchmarkRecord>> {
    if reps == 0 {
        return Err(Error::InvalidConfig("at least one repetition is required".into()));
    }
    let mut inputs: Vec<(usize, DynSystem)> = Vec::new();
    let mut records = Vec::new();
    for cell in matrix.cells() {
        if !inputs.iter().any(|(n, _)| *n == cell.n) {
            log::info!("generating N={} (seed {seed})", cell.n);
            let generated = match generate(cell.n, seed) {
                Ok(s) => DynSystem::Double(s),
                Err(e) => {
                    records.push(BenchmarkRecord::unmeasured(
                        &cell,
                        reps,
                        RecordStatus::Skipped(e.to_string()),
                    ));
                    continue;
                }
            };
            inputs.push((cell.n, generated));
        }
        let input = &inputs.iter().find(|(n, _)| *n == cell.n).unwrap().1;
        records.push(run_cell(&cell, input, &matrix.base, reps, warmup));
    }
    Ok(records)
}

fn run_cell(cell: &Cell, input: &DynSystem, base: &SimulationConfig, reps: usize, warmup: usize) -> BenchmarkRecord {
    let config = SimulationConfig {
        steps: cell.steps,
        precision: cell.precision,
        threads: cell.threads,
        block_size: cell.block_size,
        ..base.clone()
    };
    let descriptor = cell.variant.descriptor();
    if let Err(e) = descriptor.check_config(&config) {
        return BenchmarkRecord::unmeasured(cell, reps, RecordStatus::Skipped(e.to_string()));
    }
    let resolved = if descriptor.requires_threads {
        match resolve_thread_count(cell.threads) {
            Ok(t) => t,
            Err(e) => return BenchmarkRecord::unmeasured(cell, reps, RecordStatus::Skipped(e.to_string())),
        }
    } else {
        1
    };
    let input = input.to_precision(cell.precision);
    log::info!(
        "{} n={} {} threads={} block={:?}",
        cell.variant,
        cell.n,
        cell.precision,
        cell.threads,
        cell.block_size
    );

    let mut samples = Vec::with_capacity(reps);
    let mut last = None;
    for rep in 0..warmup + reps {
        let start = Instant::now();
        let result = ladder::run_simulation_dyn(cell.variant, &input, &config);
        let elapsed = start.elapsed().as_secs_f64();
        match result {
            Ok(out) => last = Some(out),
            Err(e) => return BenchmarkRecord::unmeasured(cell, reps, RecordStatus::Error(e.to_string())),
        }
        if rep >= warmup {
            samples.push(elapsed);
        }
    }
    let last = last.expect("at least one repetition ran");

    let mut record = BenchmarkRecord::unmeasured(cell, reps, RecordStatus::Ok);
    record.threads_resolved = Some(resolved);
    record.checksum = Some(last.checksum());
    if !last.is_finite() {
        record.status = RecordStatus::Error("non-finite final state".into());
        record.samples = samples;
        return record;
    }
    let (mean, stddev) = mean_stddev(&samples);
    // Clock resolution can report 0 for trivially small cells.
    let mean = mean.max(f64::MIN_POSITIVE);
    record.mean_seconds = Some(mean);
    record.stddev_seconds = Some(stddev);
    record.gflops = gflops(cell.n, cell.steps, mean).ok();
    record.samples = samples;
    record
}

/// Mean and sample standard deviation (zero for a single sample).
fn mean_stddev(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Machine summary written next to every results file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvironmentReport {
    pub logical_processors: usize,
    pub physical_cores: usize,
    pub simd_capability: String,
    pub build_profile: String,
    pub allocator: String,
    pub artifact_version: String,
    pub timestamp: String,
}

impl EnvironmentReport {
    pub fn detect() -> Self {
        let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
        let mut features = Vec::new();
        if cfg!(feature = "simd") {
            features.push("simd");
        }
        if cfg!(feature = "jemalloc") {
            features.push("jemalloc");
        }
        let build_profile = if features.is_empty() {
            profile.to_owned()
        } else {
            format!("{profile}+{}", features.join("+"))
        };
        EnvironmentReport {
            logical_processors: num_cpus::get(),
            physical_cores: num_cpus::get_physical(),
            simd_capability: ladder::simd_capability().to_owned(),
            build_profile,
            allocator: if cfg!(feature = "jemalloc") {
                "jemalloc"
            } else {
                "system"
            }
            .to_owned(),
            artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    environment: &'a EnvironmentReport,
    /// Ladder order, used to pair consecutive rungs when computing speedups.
    variants: Vec<VariantDescriptor>,
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Path of the environment/manifest sidecar for a results CSV.
pub fn metadata_path(csv: &Path) -> PathBuf {
    sidecar(csv, "meta.json")
}

/// Path of the per-repetition sidecar for a results CSV.
pub fn samples_path(csv: &Path) -> PathBuf {
    sidecar(csv, "runs.json")
}

/// Writes the CSV plus two JSON sidecars: environment and variant manifest
/// (`<stem>.meta.json`) and raw per-repetition timings (`<stem>.runs.json`).
pub fn write_results(records: &[BenchmarkRecord], env: &EnvironmentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to write".into()));
    }
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Serialization(format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        w.write_record([
            r.variant.to_string(),
            r.n.to_string(),
            r.steps.to_string(),
            r.threads_requested.to_string(),
            r.threads_resolved.map(|t| t.to_string()).unwrap_or_default(),
            r.precision.to_string(),
            r.block_size.map(|b| b.to_string()).unwrap_or_default(),
            r.repetitions.to_string(),
            opt(r.mean_seconds),
            opt(r.stddev_seconds),
            opt(r.gflops),
            r.status.as_csv(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let meta = Metadata {
        environment: env,
        variants: list_variants(),
    };
    write_json(&metadata_path(path), &meta)?;
    write_json(&samples_path(path), &records)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
