"""Smoke test for the relaywalk_py extension.

Build and install first:
    maturin develop --release -m crates/python/Cargo.toml
"""

import math
import pathlib

import relaywalk_py as rw

PRESETS = pathlib.Path(__file__).resolve().parent.parent / "presets"


def main():
    g = rw.Graph.random_regular(100, 5, 42)
    assert g.vertex_count() == 100 and g.degree() == 5 and g.is_connected()
    assert len(g.edges()) == 250

    assert math.isclose(rw.theta(5), 4 / 3)
    assert rw.theta("complete") == 1.0
    assert math.isclose(rw.expected_delay_const(100, 5, 10, 6, 4), 239.42, abs_tol=0.01)
    assert rw.optimal_n_const(10, 4) == (6, False)
    assert rw.optimal_n_const(15, 1) == (3, True)
    assert rw.optimal_n_random(100, 5, 10, 4, 100.0, 1.0) == 5

    msg = bytes(range(200))
    chunks = rw.encode(msg, 4, 6)
    assert len(chunks) == 6
    picked = [(i, chunks[i]) for i in (5, 1, 3, 4)]
    assert rw.decode(picked, len(msg), 4, 6) == msg

    warden = rw.DetectionModel.patrolling_constant(10, 100)
    assert math.isclose(warden.detect_prob(25.0), 0.075)
    assert warden.argmax_k(10, 100.0)[0] == 1

    stats = rw.run_trials(7, "complete", 4, 16, 1, 3, trials=20000, seed=1)
    expected = 91 / 12
    assert abs(stats["s_a"]["mean"] - expected) < 4 * stats["s_a"]["stderr"], stats["s_a"]

    linear = rw.DetectionModel.patrolling_linear(10, 100, 100.0)
    points = rw.sweep(100, 5, 15, 100, linear, "max-prob", 1, 10)
    assert [p["k"] for p in points] == list(range(1, 11))

    csv = rw.run_experiment(str(PRESETS / "fig3.cfg"), mode="analytic")
    rows = [line.split(",") for line in csv.splitlines() if not line.startswith("#")][1:]
    assert all(r[5] == "6" for r in rows if r[0] == "4")

    try:
        rw.optimal_n_const(3, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("k > r accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
