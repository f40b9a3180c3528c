"""Smoke test for the `nbody` extension module.

Build and copy the module next to this file first:

    cargo build --release -p nbody-py --features extension-module
    cp target/release/libnbody.so python/nbody.so
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import nbody  # noqa: E402


def main():
    ids = [v["id"] for v in nbody.list_variants()]
    assert ids[0] == "seq-baseline" and "parallel-blocked" in ids, ids

    system = nbody.generate(64, seed=7)
    assert len(system) == 64 and system.precision == "double"
    assert all(m > 0 for m in system.masses())

    reference = nbody.reference_simulate(system, steps=5)
    strict = nbody.run_simulation("parallel", system, steps=5, threads=2)
    report = nbody.compare_states(strict, reference)
    assert report["bitwise_equal"], report

    fast = nbody.run_simulation("parallel-blocked", system.to_precision("single"), steps=5, block_size=16)
    report = nbody.compare_states(fast, reference)
    assert report["max_rel_pos_error"] < 1e-3, report

    try:
        nbody.run_simulation("parallel-blocked", system, steps=1, block_size=12)
    except ValueError:
        pass
    else:
        raise AssertionError("block size 12 accepted")

    assert abs(nbody.gflops(65536, 100, 100.0) - 85.89934592) < 1e-9

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.nbody")
        strict.write_snapshot(path)
        back = nbody.read_snapshot(path)
        assert back.checksum() == strict.checksum()

        src = os.path.join(tmp, "a.py")
        with open(src, "w") as f:
            f.write("# comment\n\nx = 1\n")
        counts = json.loads(nbody.count_sloc([src], "hash"))
        assert counts["totals"]["code"] == 1, counts

    print("nbody smoke test ok:", nbody.__version__)


if __name__ == "__main__":
    main()
