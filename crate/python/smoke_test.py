"""Smoke test for the simsub_py extension.

Build first:  cargo build -p simsub-py --release --features extension-module
Then run:     python3 python/smoke_test.py
"""

import importlib.util
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    try:
        import simsub_py

        return simsub_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = os.path.join(ROOT, "target", profile, "libsimsub_py.so")
        if os.path.exists(lib):
            tmp = tempfile.mkdtemp()
            dst = os.path.join(tmp, "simsub_py.so")
            shutil.copy(lib, dst)
            spec = importlib.util.spec_from_file_location("simsub_py", dst)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("simsub_py not built; run cargo build -p simsub-py --release --features extension-module")


def main():
    s = load_module()
    t = [(0.0, 0.0), (1.0, 0.0), (5.0, 5.0), (2.0, 0.0)]
    q = [(1.0, 0.0), (2.0, 0.0)]

    assert s.distance(q, q) == 0.0
    assert s.distance([(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)], [(0.0, 0.0), (4.0, 0.0)]) == 2.0

    best = s.search(t, q, algo="exacts")
    assert (best.start, best.end, best.dissimilarity) == (2, 2, 1.0), best
    ar, mr, rr = s.score(t, q, best)
    assert (ar, mr) == (1.0, 1)

    for algo in ("sizes", "pss", "pos", "pos-d", "random-s", "spring"):
        out = s.search(t, q, algo=algo)
        assert out.dissimilarity >= best.dissimilarity, (algo, out)
    fr = s.search(t, q, algo="exacts", measure="frechet")
    assert math.isclose(fr.dissimilarity, 1.0)

    try:
        s.search(t, q, algo="nope")
        raise AssertionError("unknown algorithm accepted")
    except ValueError:
        pass

    db = s.Dataset.from_trajectories([("a", t), ("b", [(10.0, 10.0), (11.0, 10.0)])])
    assert len(db) == 2 and db.ids() == ["a", "b"]
    rows = s.topk(db, q, k=2)
    assert rows[0] == ("a", 2, 2, 1.0), rows
    assert s.topk(db, q, k=2, use_index=True) == rows[:1]

    pairs = [(t, q), ([(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)], [(1.0, 1.0)])]
    policy = s.train(pairs, episodes=5, seed=3, k=2)
    assert policy.k == 2 and policy.measure == "dtw"
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "p.json")
        policy.save(path)
        again = s.Policy.load(path)
        assert again.to_json() == policy.to_json()
        out = s.search(t, q, algo="rls-skip", policy=again)
        assert out.dissimilarity >= best.dissimilarity
        store = os.path.join(d, "db.store")
        db.save_store(store)
        assert s.Dataset.load(store).points("b") == [(10.0, 10.0), (11.0, 10.0)]

    print("smoke test passed")


if __name__ == "__main__":
    main()
