use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &std::ffi::CStr) {
    Python::initialize();
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(nbody::nbody)(py);
        let globals = PyDict::new(py);
        globals.set_item("nbody", module).unwrap();
        py.run(code, Some(&globals), None).unwrap();
    });
}

#[test]
fn strict_variant_matches_oracle() {
    run(c"
s = nbody.generate(32, 5)
ref = nbody.reference_simulate(s, steps=3)
out = nbody.run_simulation('parallel-fold', s, steps=3, threads=2)
assert nbody.compare_states(out, ref)['bitwise_equal']
assert out.checksum() == ref.checksum()
");
}

#[test]
fn errors_map_to_python_exceptions() {
    run(c"
s = nbody.generate(4, 1)
for bad in [lambda: nbody.run_simulation('warp', s),
            lambda: nbody.run_simulation('parallel-blocked', s, block_size=3),
            lambda: nbody.generate(0, 1),
            lambda: nbody.gflops(4, 1, 0.0)]:
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError('accepted')
try:
    nbody.read_snapshot('/nonexistent/x.nbody')
except OSError:
    pass
else:
    raise AssertionError('missing file accepted')
");
}

#[test]
fn single_precision_round_trip() {
    run(c"
s = nbody.generate(8, 2, precision='single')
assert s.precision == 'single' and len(s) == 8
assert len(s.positions()) == 8 and len(s.velocities()[0]) == 3
assert s.to_precision('double').precision == 'double'
ids = [v['id'] for v in nbody.list_variants()]
assert ids[-1] == 'parallel-blocked'
");
}
