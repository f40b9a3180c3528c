use nbody_core::bench::{self, metadata_path, samples_path, BenchMatrix, RecordStatus};
use nbody_core::ladder::VariantId;
use nbody_core::physics::{Precision, Threads};
use nbody_core::EnvironmentReport;

fn small(variants: Vec<VariantId>) -> BenchMatrix {
    BenchMatrix {
        variants,
        ns: vec![32],
        precisions: vec![Precision::Double],
        steps: 2,
        ..Default::default()
    }
}

#[test]
fn one_cell_one_record() {
    let records = bench::run_benchmark(&small(vec![VariantId::Parallel]), 3, 0, 1).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert_eq!(r.repetitions, 3);
    assert_eq!(r.samples.len(), 3);
    assert_eq!(r.status, RecordStatus::Ok);
    assert!(r.mean_seconds.unwrap() >= r.min_seconds().unwrap());
}

#[test]
fn same_cell_same_checksum() {
    let m = small(vec![VariantId::ParallelFastmath]);
    let a = bench::run_benchmark(&m, 1, 0, 9).unwrap();
    let b = bench::run_benchmark(&m, 1, 0, 9).unwrap();
    assert!(a[0].checksum.is_some());
    assert_eq!(a[0].checksum, b[0].checksum);
}

#[test]
fn record_count_is_cartesian() {
    let m = BenchMatrix {
        variants: vec![VariantId::SeqBaseline, VariantId::Parallel, VariantId::ParallelFold],
        ns: vec![16, 24, 32],
        threads: vec![Threads::Count(1), Threads::Auto],
        precisions: vec![Precision::Single],
        steps: 1,
        ..Default::default()
    };
    assert_eq!(bench::run_benchmark(&m, 1, 0, 1).unwrap().len(), 3 * 3 * 2);
}

#[test]
fn invalid_block_size_is_skipped() {
    let m = BenchMatrix {
        block_sizes: vec![16, 5],
        ..small(vec![VariantId::ParallelBlocked])
    };
    let records = bench::run_benchmark(&m, 1, 0, 1).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].status, RecordStatus::Ok);
    assert!(matches!(&records[1].status, RecordStatus::Skipped(_)));
    assert!(records[1].gflops.is_none());
}

#[test]
fn results_and_sidecars() {
    let records = bench::run_benchmark(&small(vec![VariantId::Parallel, VariantId::ParallelBlocked]), 1, 0, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    bench::write_results(&records, &EnvironmentReport::detect(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,n,steps,threads_requested,threads_resolved,precision,block_size,repetitions,mean_seconds,stddev_seconds,gflops,status"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "parallel");
    assert_eq!(first[6], "");
    assert_eq!(lines.count(), 3);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(metadata_path(&path)).unwrap()).unwrap();
    assert!(meta.get("environment").is_some());
    assert!(samples_path(&path).exists());
}

#[test]
fn zero_reps_rejected() {
    assert!(bench::run_benchmark(&small(vec![VariantId::Parallel]), 0, 0, 1).is_err());
}
