import json
import math
from pathlib import Path

import pytest

import follmer_kit as fk

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


def test_walk_quadratic_variation_is_time():
    walk = fk.scaled_walk(1024, 1.0, 42)
    dyadic = fk.build_partition("dyadic", 1.0)
    assert fk.discrete_scalar_qv(walk, dyadic, 10, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert fk.discrete_scalar_qv(walk, dyadic, 10, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_pure_jump_scalar_qv():
    x = fk.build_path({"kind": "pure_jump", "space": 2, "start": [0, 0], "horizon": 1.0,
                       "jumps": [[0.3, 0.3, 0.4], [0.7, 1.2, -1.6]]})
    r = fk.scalar_qv(x, fk.build_partition("dyadic", 1.0), [1.0], 12)
    assert r["established"]
    assert r["points"][0]["limit"] == pytest.approx(4.25, abs=1e-10)


def test_path_accessors_and_round_trip():
    x = fk.build_path({"kind": "pure_jump", "start": 1.0, "horizon": 2.0, "jumps": [[0.5, 2.0]]})
    assert x.horizon == 2.0 and x.dim == 1
    assert x.value(0.5) == [3.0]
    assert x.left_limit(0.5) == [1.0]
    assert x.jumps() == [(0.5, [2.0])]
    again = fk.build_path(x.to_json())
    assert again.value(1.7) == x.value(1.7)


def test_partition_points_and_mesh():
    seq = fk.build_partition({"kind": "uniform", "k0": 3, "growth": 2}, 1.0)
    assert len(seq.points(2)) == 13
    assert seq.mesh(2) == pytest.approx(1.0 / 12.0)


def test_crossnorm_sandwich():
    inj, frob, proj = fk.crossnorm_sandwich([[1.0, 0.0], [0.0, 1.0]])
    assert inj == pytest.approx(1.0)
    assert frob == pytest.approx(math.sqrt(2.0))
    assert proj == pytest.approx(2.0)
    inj, frob, proj = fk.crossnorm_sandwich([[2.0, 4.0], [1.0, 2.0]])
    assert inj == pytest.approx(5.0) and frob == pytest.approx(5.0) and proj == pytest.approx(5.0)


def test_taylor_remainder_quadratic():
    r = fk.taylor_remainder("quadratic", [0.0], [0.3, -0.7], [1.5, 2.0], 2)
    assert r["remainder"][0] == pytest.approx(6.25, abs=1e-12)
    assert r["agrees"]
    assert "quadratic" in fk.fixture_ids()


def test_run_scenario():
    cfg = json.loads((SCENARIOS / "quadratic_ito.json").read_text())
    out = fk.run("ito-check", cfg)
    assert out["pass"] and out["id"] == "quadratic-ito"
    assert out["report"]["n_max"] == 12
    assert fk.run("ito-check", cfg)["csv"] == out["csv"]
    diag = fk.run("partition-diag", json.loads((SCENARIOS / "irrational_jump_dyadic.json").read_text()))
    assert not diag["pass"]
    assert "lemma2g-check" in fk.commands()


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        fk.build_path({"kind": "warp"})
    with pytest.raises(ValueError):
        fk.scaled_walk(0)
    with pytest.raises(ValueError):
        fk.run("frobnicate", {})
    with pytest.raises(ValueError):
        fk.run("qv", {"x": {"kind": "constant"}})
