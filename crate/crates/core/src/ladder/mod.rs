//! The optimization ladder: named kernel variants sharing one driver.
//!
//! Each rung adds one optimization to the previous one, so the performance
//! delta between consecutive rungs is attributable to that change alone.
//!
//! | id                        | math   | notes                                         |
//! |---------------------------|--------|-----------------------------------------------|
//! | `seq-baseline`            | strict | one worker, plain nested loops                |
//! | `parallel`                | strict | bodies split evenly across workers            |
//! | `parallel-fold`           | strict | inner sum written as a fold                   |
//! | `parallel-fastmath`       | fast   | reassociated, reciprocal, fused inner kernel  |
//! | `parallel-fastmath-simd`  | fast   | same kernel built for the widest SIMD ISA     |
//! | `parallel-fastmath-alloc` | fast   | same kernel, jemalloc as process allocator    |
//! | `parallel-blocked`        | fast   | inner loop tiled in blocks of 8, 16 or 32     |
//!
//! Every step runs two phases separated by a full barrier: all accelerations
//! are computed from the current positions, then every body is advanced.

mod kernels;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::physics::{DynSystem, ParticleSystem, SimulationConfig, Threads};
use crate::{Error, Real, Result};

pub use kernels::simd_capability;

/// Block sizes accepted by the blocked variant.
pub const BLOCK_SIZES: [usize; 3] = [8, 16, 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantId {
    #[serde(rename = "seq-baseline")]
    SeqBaseline,
    #[serde(rename = "parallel")]
    Parallel,
    #[serde(rename = "parallel-fold")]
    ParallelFold,
    #[serde(rename = "parallel-fastmath")]
    ParallelFastmath,
    #[serde(rename = "parallel-fastmath-simd")]
    ParallelFastmathSimd,
    #[serde(rename = "parallel-fastmath-alloc")]
    ParallelFastmathAlloc,
    #[serde(rename = "parallel-blocked")]
    ParallelBlocked,
}

impl VariantId {
    /// Ladder order, baseline first.
    pub const ALL: [VariantId; 7] = [
        VariantId::SeqBaseline,
        VariantId::Parallel,
        VariantId::ParallelFold,
        VariantId::ParallelFastmath,
        VariantId::ParallelFastmathSimd,
        VariantId::ParallelFastmathAlloc,
        VariantId::ParallelBlocked,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantId::SeqBaseline => "seq-baseline",
            VariantId::Parallel => "parallel",
            VariantId::ParallelFold => "parallel-fold",
            VariantId::ParallelFastmath => "parallel-fastmath",
            VariantId::ParallelFastmathSimd => "parallel-fastmath-simd",
            VariantId::ParallelFastmathAlloc => "parallel-fastmath-alloc",
            VariantId::ParallelBlocked => "parallel-blocked",
        }
    }

    pub fn descriptor(self) -> VariantDescriptor {
        use VariantId::*;
        VariantDescriptor {
            id: self,
            strict_math: matches!(self, SeqBaseline | Parallel | ParallelFold),
            requires_threads: self != SeqBaseline,
            requires_block_size: self == ParallelBlocked,
            build_gated: matches!(self, ParallelFastmathSimd | ParallelFastmathAlloc),
            available: self.is_available(),
        }
    }

    fn is_available(self) -> bool {
        match self {
            VariantId::ParallelFastmathSimd => kernels::simd_available(),
            VariantId::ParallelFastmathAlloc => cfg!(feature = "jemalloc"),
            _ => true,
        }
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VariantId::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_owned()))
    }
}

/// Identity and capability flags of one ladder rung.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantDescriptor {
    pub id: VariantId,
    pub strict_math: bool,
    pub requires_threads: bool,
    pub requires_block_size: bool,
    /// Availability depends on how the crate was built.
    pub build_gated: bool,
    pub available: bool,
}

impl VariantDescriptor {
    /// Checks that `config` can drive this variant and returns the block size
    /// it will use, if any.
    pub fn check_config(&self, config: &SimulationConfig) -> Result<Option<usize>> {
        if !self.available {
            return Err(Error::UnavailableVariant(self.id));
        }
        config.validate()?;
        match (self.requires_block_size, config.block_size) {
            (true, Some(b)) if BLOCK_SIZES.contains(&b) => Ok(Some(b)),
            (true, Some(b)) => Err(Error::InvalidConfig(format!(
                "block size {b} not supported; expected one of {BLOCK_SIZES:?}"
            ))),
            (true, None) => Err(Error::InvalidConfig(format!("{} needs a block size", self.id))),
            (false, Some(b)) => {
                log::warn!("{}: ignoring block size {b}", self.id);
                Ok(None)
            }
            (false, None) => Ok(None),
        }
    }
}

/// All variants in ladder order.
pub fn list_variants() -> Vec<VariantDescriptor> {
    VariantId::ALL.iter().map(|v| v.descriptor()).collect()
}

/// Resolves a thread request to a concrete worker count. `Auto` is the number
/// of logical processors.
pub fn resolve_thread_count(requested: Threads) -> Result<usize> {
    match requested {
        Threads::Count(0) => Err(Error::InvalidConfig("thread count must be positive".into())),
        Threads::Count(n) => Ok(n),
        Threads::Auto => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `config.steps` steps of `variant` starting from `system` and returns
/// the final state.
pub fn run_simulation<T: Real>(
    variant: VariantId,
    system: &ParticleSystem<T>,
    config: &SimulationConfig,
) -> Result<ParticleSystem<T>> {
    let descriptor = variant.descriptor();
    let block = descriptor.check_config(config)?;
    if config.precision != T::PRECISION {
        return Err(Error::InvalidConfig(format!(
            "config asks for {} precision but the system is {}",
            config.precision,
            T::PRECISION
        )));
    }
    system.validate()?;

    let mut state = system.clone();
    if config.steps == 0 {
        return Ok(state);
    }
    let params = kernels::Params::new(config);

    if variant == VariantId::SeqBaseline {
        for _ in 0..config.steps {
            kernels::seq_step(&mut state, &params);
        }
        return Ok(state);
    }

    let threads = resolve_thread_count(config.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let phase1 = kernels::Phase1::select(variant, block);
    pool.install(|| {
        for _ in 0..config.steps {
            kernels::parallel_step(&mut state, &params, phase1, threads);
        }
    });
    Ok(state)
}

/// [`run_simulation`] on a system whose precision is chosen at run time.
pub fn run_simulation_dyn(variant: VariantId, system: &DynSystem, config: &SimulationConfig) -> Result<DynSystem> {
    match system {
        DynSystem::Single(s) => run_simulation(variant, s, config).map(DynSystem::Single),
        DynSystem::Double(s) => run_simulation(variant, s, config).map(DynSystem::Double),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::generate;
    use crate::physics::Precision;

    #[test]
    fn ladder_order_and_uniqueness() {
        let variants = list_variants();
        let ids: Vec<&str> = variants.iter().map(|v| v.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "seq-baseline",
                "parallel",
                "parallel-fold",
                "parallel-fastmath",
                "parallel-fastmath-simd",
                "parallel-fastmath-alloc",
                "parallel-blocked"
            ]
        );
        assert!(variants.iter().filter(|v| v.available).count() >= 5);
        for v in &variants {
            assert_eq!(v.id.as_str().parse::<VariantId>().unwrap(), v.id);
            assert_eq!(v.available, !v.build_gated || v.id.is_available());
        }
        assert!(matches!(
            "warp-drive".parse::<VariantId>(),
            Err(Error::UnknownVariant(_))
        ));
    }

    #[test]
    fn flags() {
        let d = |id: VariantId| id.descriptor();
        assert!(d(VariantId::SeqBaseline).strict_math);
        assert!(d(VariantId::ParallelFold).strict_math);
        assert!(!d(VariantId::ParallelFastmath).strict_math);
        assert!(!d(VariantId::SeqBaseline).requires_threads);
        assert!(d(VariantId::ParallelBlocked).requires_block_size);
        assert!(d(VariantId::ParallelFastmathSimd).build_gated);
        assert!(!d(VariantId::ParallelBlocked).build_gated);
    }

    #[test]
    fn thread_resolution() {
        assert_eq!(resolve_thread_count(Threads::Count(56)).unwrap(), 56);
        assert_eq!(resolve_thread_count(Threads::Count(1)).unwrap(), 1);
        assert!(resolve_thread_count(Threads::Count(0)).is_err());
        assert_eq!(resolve_thread_count(Threads::Auto).unwrap(), num_cpus::get());
    }

    #[test]
    fn block_size_rules() {
        let sys = generate(16, 1).unwrap();
        let mut cfg = SimulationConfig {
            steps: 1,
            block_size: Some(12),
            ..Default::default()
        };
        assert!(matches!(
            run_simulation(VariantId::ParallelBlocked, &sys, &cfg),
            Err(Error::InvalidConfig(_))
        ));
        cfg.block_size = None;
        assert!(run_simulation(VariantId::ParallelBlocked, &sys, &cfg).is_err());
        // a block size on a non-blocked variant is ignored
        cfg.block_size = Some(12);
        assert!(run_simulation(VariantId::Parallel, &sys, &cfg).is_ok());
    }

    #[test]
    fn zero_steps_is_identity() {
        let sys = generate(33, 5).unwrap();
        let cfg = SimulationConfig {
            steps: 0,
            block_size: Some(8),
            ..Default::default()
        };
        for v in list_variants().into_iter().filter(|v| v.available) {
            let out = run_simulation(v.id, &sys, &cfg).unwrap();
            assert!(out.bitwise_eq(&sys), "{}", v.id);
        }
    }

    #[test]
    fn precision_must_match() {
        let sys = generate(4, 5).unwrap().cast::<f32>();
        let cfg = SimulationConfig::default();
        assert!(run_simulation(VariantId::Parallel, &sys, &cfg).is_err());
        let cfg = SimulationConfig {
            precision: Precision::Single,
            ..cfg
        };
        assert!(run_simulation(VariantId::Parallel, &sys, &cfg).is_ok());
    }
}
