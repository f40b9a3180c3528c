//! All-pairs gravitational N-body simulation with a ladder of progressively
//! optimized kernels.
//!
//! The crate is organized around the pieces needed to run and measure the
//! ladder:
//!
//! - [`physics`]: the particle state, pairwise gravitation, Leapfrog update and
//!   conservation diagnostics.
//! - [`ladder`]: the named kernel variants and the two-phase simulation driver.
//! - [`initial`]: deterministic input generation and the hex-float snapshot format.
//! - [`bench`]: the sweep runner, GFLOPS conversion and CSV output.
//! - [`verify`]: an independent double-precision oracle and state comparison.
//! - [`sloc`]: a line counter used to compare the size of the kernels.

pub mod bench;
mod error;
pub mod initial;
pub mod ladder;
pub mod physics;
mod real;
pub mod sloc;
pub mod verify;

#[cfg(feature = "jemalloc")]
#[global_allocator]
static GLOBAL: tikv_jemallocator::Jemalloc = tikv_jemallocator::Jemalloc;

pub use error::{Error, Result, SnapshotError, SnapshotErrorKind};
pub use real::Real;

pub use bench::{gflops, run_benchmark, write_results, BenchMatrix, BenchmarkRecord, EnvironmentReport};
pub use initial::{generate, read_snapshot, write_snapshot, SplitMix64};
pub use ladder::{list_variants, resolve_thread_count, run_simulation, VariantDescriptor, VariantId};
pub use physics::{DynSystem, ParticleSystem, Precision, SimulationConfig, Threads, Vec3};
pub use verify::{check_conservation, compare_states, reference_simulate, ComparisonReport};
