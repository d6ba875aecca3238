import json
import math
import os
from pathlib import Path

import pytest

import hca

SCENARIOS = Path(os.environ.get("HCA_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))

TRIANGLE = """
cycles: {cycles}
paths:
  - {{type: triangle, center: [0, 0], length: 1500, corner_radius: 40}}
"""


def test_step_straight():
    s = hca.step(hca.UavState(0, 0, 0), 0.0)
    assert s.x == pytest.approx(1.9)
    assert s.y == 0.0


def test_saturate_and_regions():
    assert hca.saturate(0.9) == 0.6
    assert hca.classify_region(55.0) == hca.Region.inner
    assert hca.classify_region(55.0001) == hca.Region.middle
    with pytest.raises(hca.GeometryError):
        hca.classify_region(-1.0)


def test_reactive_values():
    p = hca.Vec2(50, 0)
    assert hca.reactive_input(hca.Vec2(38, 0), p) == -0.6
    assert abs(hca.reactive_input(hca.Vec2(0, 19), p)) < 1e-12
    assert hca.reactive_input(hca.Vec2(-38, 0), p) == 0.6


def test_metric_helpers():
    assert hca.avg_collision_free_distance(9500.0, 74) == 128.38
    assert math.isinf(hca.avg_collision_free_distance(9500.0, 0))
    assert hca.count_failures([31, 29.5, 29, 30.5, 29.9]) == 2


def test_run_single_uav():
    sc = hca.parse_scenario(TRIANGLE.format(cycles=200))
    out = hca.run(sc)
    assert out["metrics"]["distance_per_uav"] == pytest.approx(380.0)
    assert out["metrics"]["failures"] == 0
    assert len(out["tracks"][0]) == 201
    assert out["trajectory_csv"].startswith("cycle,uav_id,")


def test_bad_scenario_raises():
    with pytest.raises(hca.ConfigError, match="strategy"):
        hca.parse_scenario("strategy: nope\n" + TRIANGLE.format(cycles=1))


def test_default_scenario_compare():
    sc = hca.load_scenario(SCENARIOS / "default.yaml")
    assert sc.uav_count == 5
    sc.cycles = 30
    tables = json.loads(hca.compare(sc, [1], 1))
    assert [t["sensing"] for t in tables] == ["deterministic", "probabilistic"]
