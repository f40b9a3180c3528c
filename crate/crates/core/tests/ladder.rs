use nbody_core::ladder::{self, VariantId, BLOCK_SIZES};
use nbody_core::physics::{Precision, SimulationConfig, Threads};
use nbody_core::verify::compare_states;
use nbody_core::{generate, Error};

fn config(steps: usize) -> SimulationConfig {
    SimulationConfig {
        steps,
        ..Default::default()
    }
}

#[test]
fn listed_in_ladder_order() {
    let ids: Vec<&str> = ladder::list_variants().iter().map(|v| v.id.as_str()).collect();
    assert_eq!(
        ids,
        [
            "seq-baseline",
            "parallel",
            "parallel-fold",
            "parallel-fastmath",
            "parallel-fastmath-simd",
            "parallel-fastmath-alloc",
            "parallel-blocked",
        ]
    );
    assert!(ladder::list_variants().iter().filter(|v| v.available).count() >= 5);
}

#[test]
fn strict_variants_ignore_worker_count() {
    let input = generate(256, 11).unwrap();
    let cfg = config(10);
    let baseline = ladder::run_simulation(VariantId::SeqBaseline, &input, &cfg).unwrap();
    for variant in [VariantId::Parallel, VariantId::ParallelFold] {
        for threads in [1, 2, 3, 7, 300] {
            let cfg = SimulationConfig {
                threads: Threads::Count(threads),
                ..cfg.clone()
            };
            let out = ladder::run_simulation(variant, &input, &cfg).unwrap();
            assert!(out.bitwise_eq(&baseline), "{variant} with {threads} threads");
        }
    }
}

#[test]
fn fastmath_variants_ignore_worker_count() {
    let input = generate(200, 5).unwrap();
    for variant in [
        VariantId::ParallelFastmath,
        VariantId::ParallelFastmathSimd,
        VariantId::ParallelBlocked,
    ] {
        if !variant.descriptor().available {
            continue;
        }
        let block_size = variant.descriptor().requires_block_size.then_some(16);
        let run = |threads| {
            let cfg = SimulationConfig {
                threads: Threads::Count(threads),
                block_size,
                ..config(10)
            };
            ladder::run_simulation(variant, &input, &cfg).unwrap()
        };
        let one = run(1);
        for threads in [2, 3, 5] {
            let report = compare_states(&run(threads), &one, 1e-12).unwrap();
            assert!(report.max_rel_pos_error < 1e-12, "{variant}: {report:?}");
        }
    }
}

#[test]
fn block_sizes_agree() {
    let input = generate(256, 42).unwrap();
    let runs: Vec<_> = BLOCK_SIZES
        .iter()
        .map(|&b| {
            let cfg = SimulationConfig {
                block_size: Some(b),
                ..config(10)
            };
            ladder::run_simulation(VariantId::ParallelBlocked, &input, &cfg).unwrap()
        })
        .collect();
    for a in &runs {
        for b in &runs {
            assert!(compare_states(a, b, 1e-12).unwrap().max_rel_pos_error < 1e-12);
        }
    }
}

/// Many short steps with more workers than bodies per chunk: any overlap of
/// the two phases within a step changes the final checksum.
#[test]
fn phase_barrier_stress() {
    let input = generate(97, 3).unwrap();
    let cfg = SimulationConfig {
        dt: 0.5,
        g: 1e-3,
        softening: 1e-2,
        ..config(400)
    };
    let expected = ladder::run_simulation(VariantId::SeqBaseline, &input, &cfg)
        .unwrap()
        .checksum();
    for threads in [2, 4, 13, 97] {
        for variant in [VariantId::Parallel, VariantId::ParallelFold] {
            let cfg = SimulationConfig {
                threads: Threads::Count(threads),
                ..cfg.clone()
            };
            let out = ladder::run_simulation(variant, &input, &cfg).unwrap();
            assert_eq!(out.checksum(), expected, "{variant} with {threads} threads");
        }
    }
}

#[test]
fn block_size_validation() {
    let input = generate(8, 1).unwrap();
    let blocked = |block_size| SimulationConfig {
        block_size,
        ..config(1)
    };
    assert!(matches!(
        ladder::run_simulation(VariantId::ParallelBlocked, &input, &blocked(Some(12))),
        Err(Error::InvalidConfig(_))
    ));
    assert!(matches!(
        ladder::run_simulation(VariantId::ParallelBlocked, &input, &blocked(None)),
        Err(Error::InvalidConfig(_))
    ));
    // ignored with a warning on other variants
    let a = ladder::run_simulation(VariantId::Parallel, &input, &blocked(Some(12))).unwrap();
    let b = ladder::run_simulation(VariantId::Parallel, &input, &config(1)).unwrap();
    assert!(a.bitwise_eq(&b));
}

#[test]
fn precision_must_match_element_type() {
    let input = generate(8, 1).unwrap();
    let cfg = SimulationConfig {
        precision: Precision::Single,
        ..config(1)
    };
    assert!(matches!(
        ladder::run_simulation(VariantId::Parallel, &input, &cfg),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn explicit_thread_counts() {
    assert_eq!(ladder::resolve_thread_count(Threads::Count(56)).unwrap(), 56);
    assert_eq!(ladder::resolve_thread_count(Threads::Count(1)).unwrap(), 1);
    assert!("0".parse::<Threads>().is_err());
}
