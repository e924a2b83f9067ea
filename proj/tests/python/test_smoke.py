"""Smoke tests for the python module: thin checks that the bindings expose the
core operations with the same numbers the C++ tests pin down."""

import os

import pytest

import migbatchsim as mbs

DATA = os.environ["MIGBATCHSIM_DATA"]


def profile_path(name):
    return os.path.join(DATA, "profiles", name)


def test_module_identity():
    assert mbs.__version__ == "1.0.0"
    assert mbs.VGpuShape(1, 5).notation(7) == "1g.5gb(7x)"


def test_profile_lookup_matches_known_cells():
    prof = mbs.load_profile(profile_path("vision_1g.csv"), model="resnet50")
    assert prof.model_name == "resnet50"
    assert prof.exec_latency_us(16, 1.0) == pytest.approx(35000.0, abs=1e-6)
    assert prof.exec_latency_us(1, 1.0) == pytest.approx(30078.125, abs=1e-6)
    assert prof.batch_grid[0] == 1
    assert prof.max_length_s == 1.0


def test_knee_and_time_queue():
    prof = mbs.load_profile(profile_path("vision_1g.csv"))
    curve = mbs.sweep_curve(prof, 1.0, list(prof.batch_grid))
    knee = mbs.find_batch_knee(curve)
    assert knee == 16
    assert mbs.tail_at_knee(curve, knee) == pytest.approx(35000.0)
    assert mbs.derive_time_queue_us(35000.0, 7) == 5000
    assert mbs.derive_time_queue_us(35000.0, 1) == 35000


def test_build_policy_dict():
    prof = mbs.load_profile(profile_path("audio_1g.csv"), model="whisper_small")
    policy = mbs.build_policy(prof, vgpu_count=7)
    assert policy["batch_max"][0] == 32
    assert policy["batch_max"] == sorted(policy["batch_max"], reverse=True)
    assert policy["time_queue_us"] == 5000
    assert policy["tail_knee_us"] == 35000
    assert policy["bucket_width_s"] == pytest.approx(2.5)


def test_bucket_index():
    assert mbs.bucket_index(6.0, 2.5, 6) == 2
    assert mbs.bucket_index(2.5, 2.5, 6) == 1
    assert mbs.bucket_index(0.1, 2.5, 6) == 0
    assert mbs.bucket_index(200.0, 2.5, 6) == 5


def test_percentile_nearest_rank():
    assert mbs.percentile([float(i) for i in range(1, 101)], 95.0) == 95.0
    assert mbs.percentile([42.5], 1.0) == 42.5
    with pytest.raises(ValueError):
        mbs.percentile([], 50.0)
    with pytest.raises(ValueError):
        mbs.percentile([1.0], 0.0)


def test_pipeline_completions():
    done = mbs.pipeline_completions([[2000.0, 3000.0, 1000.0, 2000.0]] * 2, [0, 0])
    assert done == [8000, 11000]
    serial = mbs.serial_completions([1000.0, 1000.0], [0, 0])
    assert serial == [1000, 2000]


def test_cost_efficiency_linearity():
    base = mbs.cost_efficiency(100.0, 10000.0, 0.4, 8760.0)
    assert base == pytest.approx(83.5317, abs=1e-3)
    assert mbs.cost_efficiency(200.0, 10000.0, 0.4, 8760.0) == pytest.approx(2.0 * base)


def test_run_scenario_is_deterministic():
    cfg = os.path.join(DATA, "configs", "vision_dpu.json")
    a = mbs.run_scenario(cfg, seed=11)
    b = mbs.run_scenario(cfg, seed=11)
    assert a["report"] == b["report"]
    assert a["dispatch_count"] == b["dispatch_count"]
    assert a["policy"]["batch_max"] == [16]
    assert a["report"]["counts"]["completed"] > 0
    c = mbs.run_scenario(cfg, seed=12)
    assert c["report"] != a["report"]
