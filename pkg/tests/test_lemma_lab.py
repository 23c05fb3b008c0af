import json
import math

import numpy as np
import pytest

from landau_blowdown import lemma_lab as lab
from landau_blowdown.collision_kernel import inject_lambda1_fault
from landau_blowdown.gaussian_profiles import BlowdownProfile, GaussianParams, UNIT_MAXWELLIAN
from landau_blowdown.radial_grid import RadialField, make_grid


def test_fit_slope():
    x = np.array([0.1, 0.2, 0.4])
    assert lab.fit_loglog_slope(x, 3 * x**-1.5) == pytest.approx(-1.5, abs=1e-12)
    with pytest.raises(ValueError):
        lab.fit_loglog_slope([1.0], [1.0])


def test_scaling_report_sides():
    assert lab.ScalingReport("x", 0.9, 1.0, []).passed
    assert not lab.ScalingReport("x", 0.8, 1.0, []).passed
    assert lab.ScalingReport("x", 3.0, 1.0, []).passed
    assert not lab.ScalingReport("x", 1.2, 1.0, [], one_sided=False).passed


def test_identities_maxwellian():
    rep = lab.check_identities(UNIT_MAXWELLIAN)
    assert rep.passed
    assert rep.values["div_residual"][0] < 1e-2 and rep.values["lap_residual"][0] < 1e-2
    assert min(rep.values["order"]) >= 1.8


def test_identities_zero_field():
    rep = lab.check_identities(lambda r: 0.0 * r)
    assert rep.passed and rep.values["div_residual"] == [0.0, 0.0] and rep.values["lap_residual"] == [0.0, 0.0]


def test_identities_narrow_maxwellian():
    rep = lab.check_identities(GaussianParams(1.0, 0.1), n=1024)
    assert rep.passed, rep.values


def test_coercivity():
    rep = lab.check_coercivity_sign()
    v = rep.values
    assert rep.passed
    assert abs(v["kernel_M_value"]) < 1e-6 and abs(v["kernel_r2M_value"]) < 1e-5
    assert v["M_half_value"] < 0 and v["M_half_ratio"] > 0
    assert v["c_bar_min"] > 0


def test_linearized_kernel_fields_vanish():
    g = make_grid(8.0, 1024)
    M = RadialField(g, UNIT_MAXWELLIAN(g.nodes))
    minv = 1.0 / UNIT_MAXWELLIAN(g.nodes)
    for k in (M, M * g.nodes**2):
        L = lab.linearized(M, k)
        assert math.sqrt(np.dot(g.volumes, L.values**2 * minv)) < 1e-6 * math.sqrt(np.dot(g.volumes, k.values**2 * minv))


def test_le_sign():
    rep = lab.check_LE_sign(T=0.2, m=0.3)
    assert rep.passed and rep.values["max_normalized_value"] <= 1e-8
    g = lab.grid_for_temperature(0.2)
    assert lab.le_value(RadialField(g, np.zeros(g.size)), 0.2, 0.3) == 0.0
    E = RadialField(g, GaussianParams(0.3, 0.2)(g.nodes))
    assert abs(lab.le_value(E, 0.2, 0.3)) < 1e-8 * np.dot(g.volumes, E.values**2 / GaussianParams(1, 0.2)(g.nodes))


def test_test_functions_are_seeded_and_normalized():
    g = lab.grid_for_temperature(0.2)
    for kind in lab.TestFunctionFamily.KINDS:
        a = lab.TestFunctionFamily(kind, 0.2, 7).sample(g, 3)
        b = lab.TestFunctionFamily(kind, 0.2, 7).sample(g, 3)
        np.testing.assert_array_equal(a.values, b.values)
        assert lab.norm_L2mu(a, 0.2) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        lab.TestFunctionFamily("cubic", 0.2)


def test_source_term_vanishes_without_mass():
    g = make_grid(8.0, 256)
    assert not lab.source_term_SE(GaussianParams(0.0, 0.1), g).values.any()


def test_SE_scaling_example():
    rep = lab.check_SE_scaling(BlowdownProfile(0.05, 0.4), (0.0, 0.05, 0.1, 0.2, 0.4))
    q = rep.values["quadratic_constant"]
    assert abs(q[0] - q[1]) <= 1e-3 * q[1]
    slope = rep.scalings[0]["measured_exponent"]
    assert -0.55 <= slope <= -0.2, f"fitted T-slope of ||S_E||/m is {slope:.3f}"


def test_Ah_bounds():
    rep = lab.check_Ah_bounds("gaussian_bump", (0.4, 0.2, 0.1, 0.05))
    assert rep.passed, rep.scalings
    ahee = next(s for s in rep.scalings if s["lemma_id"] == "Ahee")
    assert abs(ahee["measured_exponent"] - 1.0) <= 0.15
    assert np.isfinite(rep.values["nabla_a_v_C"])
    g = lab.grid_for_temperature(0.1)
    h = lab.TestFunctionFamily("gaussian_bump", 0.1).sample(g)
    assert lab._ah_lhs(h, 0.1, (0.0,))["Ahvv"] == [0.0]


def test_Ah_bounds_requires_small_T():
    with pytest.raises(ValueError):
        lab.check_Ah_bounds("gaussian_bump", (2.0, 1.0))


def test_mu_calculus():
    rep = lab.check_mu_calculus()
    assert rep.passed
    assert rep.values["grad_at_origin"] == 0.0
    assert rep.values["time_rel_error"] < 1e-3


def test_ev_monotonicity():
    rep = lab.check_ev_monotonicity()
    assert rep.passed
    assert rep.values["lambda1_drop_0_to_1"] > 0
    assert rep.values["lambda1_prime_rel_error"] < 1e-3


def test_fault_injection_is_detected():
    with inject_lambda1_fault(1.1):
        reps = lab.run_suite(["identities", "trace_identity"])
    assert not all(r.passed for r in reps)
    assert all(r.passed for r in lab.run_suite(["trace_identity"]))


def test_suite_ids_and_json():
    assert len(lab.CHECKS) >= 8
    assert lab.run_suite([]) == []
    reps = lab.run_suite(["mu_calculus", "trace_identity"])
    json.dumps([r.to_dict() for r in reps])
    assert "mu_calculus" in lab.summary_table(reps)
    with pytest.raises(KeyError):
        lab.run_suite(["nope"])
