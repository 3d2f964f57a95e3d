import json
import math

import pytest

import vranfair


def test_fairness_scalars():
    assert vranfair.f_alpha(1.0, 1.0) == 0.0
    assert vranfair.f_alpha(1.0, 0.0) == 0.0
    # alpha = 0 branch is u - 1
    assert vranfair.f_alpha(3.0, 0.0) == pytest.approx(2.0)
    # log branch
    assert vranfair.f_alpha(math.e, 1.0) == pytest.approx(1.0)
    assert vranfair.f_alpha_prime(2.0, 2.0) == pytest.approx(0.25)
    with pytest.raises(Exception):
        vranfair.f_alpha(0.0, 1.0)


def test_fairness_sum_and_dual_gradient():
    assert vranfair.fairness_sum([1.0, 1.0], 1.0) == 0.0
    g = vranfair.dual_gradient([-1.0, -0.25], [2.0, 3.0], 1.0)
    # (-theta)^(-1/alpha) - u
    assert g[0] == pytest.approx(1.0 - 2.0)
    assert g[1] == pytest.approx(4.0 - 3.0)


def test_canonical_scenario_roundtrip():
    doc = '{"kind": "mintb-1", "I": 4, "T": 7, "seed": 3}'
    canon = vranfair.canonical_scenario(doc)
    parsed = json.loads(canon)
    assert parsed["kind"] == "mintb-1"
    assert parsed["T"] == 7
    # canonical form is a fixed point
    assert vranfair.canonical_scenario(canon) == canon
    with pytest.raises(Exception):
        vranfair.canonical_scenario('{"kind": "mintb-1", "bogus": 1}')


def test_simulate_is_deterministic():
    doc = '{"kind": "mintb-1", "I": 4, "T": 30, "seed": 5}'
    a = vranfair.simulate(doc, policy="alg2", seed=5)
    b = vranfair.simulate(doc, policy="alg2", seed=5)
    assert a == b
    assert a["scenario"] == "mintb-1"
    assert math.isfinite(a["final_regret"])
    assert a["total_utility"] > 0.0

    c = vranfair.simulate(doc, policy="alg2", seed=6)
    assert c != a  # seed participates


def test_simulate_assignment_family():
    doc = '{"kind": "assignment-1", "I": 3, "J": 2, "T": 25, "seed": 2}'
    out = vranfair.simulate(doc, policy="alg1")
    assert math.isfinite(out["final_regret"])
    assert 0.0 < out["jain_utility"] <= 1.0
    assert "jain_saving" in out


def test_fit_profiles():
    csv = (
        "pu_id,snr_db,tb_size_bits,proc_time_s,energy_j\n"
        "cpu0,10,10000,1.2e-4,2.3e-4\n"
        "cpu0,10,30000,1.6e-4,2.9e-4\n"
        "ha1,10,10000,3.0e-4,2.8e-3\n"
        "ha1,10,30000,3.0e-4,2.8e-3\n"
    )
    profiles = json.loads(vranfair.fit_profiles(csv))
    assert [p["id"] for p in profiles] == ["cpu0", "ha1"]
    assert profiles[0]["kind"] == "cpu"
    assert profiles[1]["kind"] == "ha"
    assert profiles[0]["coeffs"][0]["zeta"] == pytest.approx(2e-9)
