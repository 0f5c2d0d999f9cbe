import json
import math
import os
import subprocess
import sys

import pytest

import groupnav as gn


def test_action_table():
    assert gn.n_actions == 81
    assert gn.action_velocity(0) == (0.0, 0.0)
    speeds = sorted({round(math.hypot(*gn.action_velocity(i)), 12) for i in range(1, 81)})
    assert speeds == [0.2, 0.4, 0.6, 0.8, 1.0]
    with pytest.raises(ValueError):
        gn.action_velocity(81)


def test_convex_hull():
    square = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    hull = gn.convex_hull(square)
    assert len(hull) == 4
    assert (0.5, 0.5) not in hull


def test_env_determinism():
    env_a = gn.CrowdEnv(n_pedestrians=4)
    env_b = gn.CrowdEnv(n_pedestrians=4)
    obs_a = env_a.reset(7)
    obs_b = env_b.reset(7)
    assert obs_a.pedestrians == obs_b.pedestrians
    for _ in range(10):
        ra = env_a.step(65)
        rb = env_b.step(65)
        assert ra == rb
        if ra[1]:
            break


def test_env_episode_runs_to_completion():
    env = gn.CrowdEnv(n_pedestrians=3, single_group=True)
    env.reset(3)
    assert env.n_groups == 1
    done = False
    steps = 0
    while not done:
        reward, done, outcome, breakdown = env.step(65)
        steps += 1
        assert steps <= 100
        assert set(breakdown) == {"progress", "goal", "discomfort", "collision", "group"}
    assert outcome in ("goal", "collision", "timeout")


def test_policy_forward_and_roundtrip(tmp_path):
    policy = gn.Policy.init(1)
    assert policy.n_params == 105283
    env = gn.CrowdEnv(n_pedestrians=5)
    obs = env.reset(11)
    probs = policy.probs(obs)
    assert len(probs) == 81
    assert abs(sum(probs) - 1.0) < 1e-12
    assert math.isfinite(policy.value(obs))

    path = str(tmp_path / "policy.ckpt")
    policy.save(path)
    again = gn.Policy.load(path)
    assert again.probs(obs) == probs
    assert again.act(obs) == policy.act(obs)


def test_robot_frame_features():
    env = gn.CrowdEnv(n_pedestrians=2)
    obs = env.reset(5)
    robot9, peds = gn.robot_frame(obs)
    assert len(robot9) == 9
    assert robot9[0] == 0.0 and robot9[1] == 0.0  # robot sits at the frame origin
    assert robot9[5] == pytest.approx(8.0)  # start-to-goal distance on the crossing circle
    assert len(peds) == 2 and all(len(p) == 5 for p in peds)


def test_t_test_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    a = [1.0, 2.0, 3.0, 4.0]
    b = [3.0, 4.0, 5.0, 6.0]
    ours = gn.pooled_t_test(a, b)
    ref = scipy_stats.ttest_ind(a, b, equal_var=True)
    assert ours["valid"]
    assert ours["t"] == pytest.approx(ref.statistic, rel=1e-12)
    assert ours["p"] == pytest.approx(ref.pvalue, rel=1e-9)
    assert ours["df"] == 6


def test_cli_rollout(tmp_path):
    cli = os.environ.get("GROUPNAV_CLI")
    if not cli:
        pytest.skip("GROUPNAV_CLI not set")
    ckpt = str(tmp_path / "policy.ckpt")
    gn.Policy.init(2).save(ckpt)
    out_dir = str(tmp_path / "out")
    subprocess.run(
        [cli, "rollout", "--checkpoint", ckpt, "--episode-seed", "4", "--out", out_dir,
         "--override", "env.n_pedestrians=3"],
        check=True, capture_output=True, text=True)
    lines = (tmp_path / "out" / "trajectory.jsonl").read_text().splitlines()
    assert len(lines) >= 2
    first = json.loads(lines[0])
    assert first["step"] == 0 and first["done"] == "running"
    assert len(first["robot"]) == 9
    last = json.loads(lines[-1])
    assert last["done"] in ("goal", "collision", "timeout")
