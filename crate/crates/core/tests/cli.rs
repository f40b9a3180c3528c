use std::path::Path;
use std::process::{Command, Output};

fn nbody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbody")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_writes_a_readable_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ic.nbody");
    let o = nbody(&[
        "generate",
        "--n",
        "16",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--precision",
        "single",
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("NBODY 1 16 single\n"));
    let system = nbody_core::read_snapshot(&out).unwrap();
    assert_eq!(system.len(), 16);
}

#[test]
fn verify_strict_and_relaxed() {
    let o = nbody(&["verify", "--variant", "parallel", "--n", "32", "--steps", "2"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("bitwise equal      true"));
    assert!(stdout(&o).trim_end().ends_with("PASS"));

    let o = nbody(&[
        "verify",
        "--variant",
        "parallel-blocked",
        "--block-size",
        "8",
        "--n",
        "32",
        "--precision",
        "single",
    ]);
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn verify_rejects_bad_block_size() {
    let o = nbody(&[
        "verify",
        "--variant",
        "parallel-blocked",
        "--block-size",
        "7",
        "--n",
        "8",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("block"));
}

#[test]
fn bench_writes_csv_and_reports_skips() {
    let dir = tempfile::tempdir().unwrap();
    let o = nbody(&[
        "bench",
        "--variants",
        "parallel,parallel-blocked",
        "--n",
        "32",
        "--precision",
        "double",
        "--blocks",
        "8,9",
        "--steps",
        "1",
        "--reps",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().last().unwrap().contains("skipped:"));
    assert!(dir.path().join("results.meta.json").exists());
}

#[test]
fn sloc_counts_fixtures() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sloc/basic.c");
    let o = nbody(&["sloc", "--profile", "c", fixture.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    assert!(
        stdout(&o).contains("     4 code      1 comment      1 blank  total"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn variants_lists_the_ladder() {
    let o = nbody(&["variants"]);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("seq-baseline"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn unknown_variant_is_an_error() {
    let o = nbody(&["verify", "--variant", "turbo"]);
    assert_eq!(o.status.code(), Some(2));
}
