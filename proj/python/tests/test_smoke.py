import json
import math
import os
import subprocess

import pytest

import mfirange as m


def test_rips_umr():
    p = m.design_rips(400e6, 40e6, 41, c=3e8)
    assert len(p) == 41
    assert m.umr(p) == pytest.approx(300.0)
    assert m.epsilon_of(p) == 0.0


def test_prime_design():
    plan, k = m.design_prime(40e6, 41, 65, 1, 400e6, c=3e8)
    assert k == 199
    assert m.practical_umr(plan) == pytest.approx(23193, rel=2e-3)
    primes, k2, start = m.prime_window_select(40.378e6, 31, 65, 12)
    assert (k2, start, primes[0], primes[-1]) == (200, 12, 37, 179)
    assert k2 * 65 * sum(primes) == 40378000
    ok, hits = m.coprime_check(plan)
    assert ok and hits == []


def test_permutations():
    assert m.permute_min_error([1, 2, 3, 4, 5]) == [1, 3, 5, 4, 2]
    assert m.permute_min_error([1, 2, 3, 4, 5], mirrored=True) == [2, 4, 5, 3, 1]
    assert m.permute_max_error([1, 2, 3, 4, 5]) == [4, 3, 1, 2, 5]
    assert m.quadform(m.permute_min_error([1, 2, 3, 4, 5])) > m.quadform(
        m.permute_max_error([1, 2, 3, 4, 5]))


def test_bounds_and_closed_forms():
    v, ok = m.pa_lower_bound(10.0, 1.0, 40, 0.1, 5.0)
    assert v == pytest.approx(0.308, abs=2e-3)
    assert ok
    p = m.design_rips(400e6, 20e6, 21)
    s = m.sigma_theta_from_snr_db(20.0)
    assert m.hmse(p, s) == pytest.approx(m.crb(p, math.sqrt(2) * s), rel=1e-14)
    assert m.mmse(p, s) > m.hmse(p, s)
    assert m.ambiguity_fn(p, 0.0) == pytest.approx(1.0)


def test_estimate_and_errors():
    p = m.design_rips(400e6, 20e6, 21)
    ph = m.synth_phases(p, 1.25)
    e = m.ls_estimate(ph, p, -7.0, 7.0, 0.01)
    assert e["q_hat"] == pytest.approx(1.25)
    assert m.unwrap_ok(e["q_hat"], 1.25, p)
    noisy = m.synth_phases(p, 1.25, snr_db=30.0, kind="phase-gaussian", seed=4)
    assert noisy == m.synth_phases(p, 1.25, snr_db=30.0, kind="phase-gaussian", seed=4)
    with pytest.raises(m.MfiError):
        m.design_rips(400e6, 40e6, 3, resolution_hz=65)
    with pytest.raises(ValueError):
        m.ls_estimate(ph, p, 1.0, 0.0, 0.01)


def test_plan_json_round_trip():
    p = m.design_rips(400e6, 20e6, 21)
    assert m.FrequencyPlan.from_json(p.to_json()) == p


def test_simulation_bindings():
    p = m.design_rips(400e6, 20e6, 21)
    rows = m.simulate_mse(p, 0.0, [30.0], 50, 3, -15.0, 15.0, 0.01, True)
    assert rows[0]["mse"] <= 1.5 * rows[0]["crb"]
    assert rows == m.simulate_mse(p, 0.0, [30.0], 50, 3, -15.0, 15.0, 0.01, True)
    r = m.run_pumr_check(m.FrequencyPlan(390.1e6, 1e6, [1] * 39), 5.0, 500, 9)
    assert r["applicable"]
    assert r["bound"] == pytest.approx(0.308, abs=3e-3)


@pytest.mark.skipif("MFI_CLI" not in os.environ, reason="cli path not given")
def test_cli(tmp_path):
    cli = os.environ["MFI_CLI"]
    out = subprocess.run([cli, "design", "--method", "rips", "--B", "40e6", "--N", "41",
                          "--f1", "400e6", "--c-mode", "paper-repro", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    plan = json.loads((tmp_path / "plan.json").read_text())
    assert m.umr(m.FrequencyPlan.from_json(json.dumps(plan))) == pytest.approx(300.0)
    bad = subprocess.run([cli, "design", "--method", "rips", "--B", "40e6", "--N", "3",
                          "--res", "65", "--f1", "400e6"], capture_output=True, text=True)
    assert bad.returncode != 0
    assert bad.stderr.startswith("error: off_grid:")
