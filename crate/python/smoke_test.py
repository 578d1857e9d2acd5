"""Smoke test for the hypercone_lab extension module.

Build first:
    cargo build --release -p hypercone-py --features extension-module
    cp target/release/libhypercone_lab.so python/hypercone_lab.so
then run `python3 python/smoke_test.py` or `pytest python/`.
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hypercone_lab  # noqa: E402

SIMONS = json.dumps({"label": "simons", "kind": "product_sphere", "p": 3, "q": 3})
LEAF = json.dumps(
    {"kind": "I", "cone": "simons", "density": 1.4726, "m": 1,
     "x": [0.0] * 8, "R": 1.0, "rho": 0.0, "children": []}
)


def test_spectrum():
    rows = hypercone_lab.spectrum(SIMONS, 10.0)
    assert rows[0] == (-6.0, 1, -2.0, -3.0, False)
    assert rows[1][:2] == (0.0, 8)


def test_threshold():
    k_star, _, _, worst = hypercone_lab.threshold_k(1.0, "power")
    assert k_star == 6.0
    assert worst < 0.0


def test_trees():
    assert hypercone_lab.validate(LEAF) == []
    bad = json.loads(LEAF)
    bad["rho"] = 0.8
    assert any("R >= 2 rho" in rule for _, rule in hypercone_lab.validate(json.dumps(bad)))
    assert hypercone_lab.close(LEAF, LEAF, 0.01)
    try:
        hypercone_lab.validate("{")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON must raise ValueError")


def test_scap():
    dag = {
        "cones": [{"id": "a", "density": 2.0}, {"id": "b", "density": 1.5}, {"id": "c", "density": 1.2}],
        "scenarios": [{"parent": "a", "children": ["b", "c"]}, {"parent": "b", "children": ["c", "c"]}],
    }
    assert hypercone_lab.scap(json.dumps(dag)) == [("a", 5), ("b", 3), ("c", 1)]


def test_accept_spectrum():
    rows = hypercone_lab.accept("spectrum", 7)
    assert [r[0] for r in rows] == ["SP-1", "SP-2", "SP-3"]
    assert all(r[1] for r in rows)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
