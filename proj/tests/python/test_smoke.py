import math

import numpy as np
import pytest

lear = pytest.importorskip("lear")

SPEC = {
    "n_subjects": 200,
    "seed": 7,
    "times": [1, 2, 3, 4, 5],
    "beta": [1.0],
    "covariance": {"model": "lear", "sigma2": 1.0, "rho_l": 0.5, "delta": 3.0},
}


def test_lear_matrix_examples():
    c = lear.lear_correlation(0.5, 1.0, [1, 2, 3])
    np.testing.assert_allclose(c, [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]], rtol=0, atol=1e-15)
    cs = lear.lear_covariance(2.0, 0.5, 0.0, [1, 2, 3])
    assert cs[0, 2] == 1.0
    assert cs[1, 1] == 2.0


def test_reparam_identity_and_round_trip():
    times = [1, 2, 3, 4, 5, 6]
    image = lear.lear_to_arma(1.3, 0.7, 2.5, times)
    lear_cov = lear.lear_covariance(1.3, 0.7, 2.5, times)
    arma_cov = lear.arma11_covariance(image["sigma2"], image["tau"], image["rho_a"], len(times))
    assert np.max(np.abs(lear_cov - arma_cov)) < 1e-12
    back = lear.arma_to_lear(image["sigma2"], image["tau"], image["rho_a"], times)
    assert math.isclose(back["rho_l"], 0.7, rel_tol=1e-12)
    assert math.isclose(back["delta"], 2.5, rel_tol=1e-12)


def test_special_case_report():
    assert lear.check_special_case([[1, 2, 3], [2, 3]])["eligible"]
    assert not lear.check_special_case([1, 2, 4])["eligible"]


def test_errors_carry_codes():
    with pytest.raises(lear.LearError) as info:
        lear.arma_to_lear(1.0, -0.2, 0.5, [1, 2, 3])
    assert info.value.code == "OutsideLearImage"
    with pytest.raises(lear.LearError) as info:
        lear.lear_correlation(1.5, 0.0, [1, 2])
    assert info.value.code == "InvalidParams"


def test_simulate_is_deterministic():
    a = lear.simulate(SPEC)
    b = lear.simulate(SPEC)
    assert a == b
    assert len(a["y"]) == 200 * 5
    assert a["subject"][0] == "s1"


def test_fit_compare_and_likelihood_equivalence():
    d = lear.simulate(SPEC)
    fit = lear.fit(d["subject"], d["time"], d["y"], param="lear", criterion="reml")
    assert fit["kind"] == "fit_result"
    assert fit["max_loglik"] >= fit["grid_best_loglik"]
    est = fit["estimates"]
    assert abs(est["rho_l"] - 0.5) < 0.15

    image = lear.lear_to_arma(1.0, est["rho_l"], est["delta"], [1, 2, 3, 4, 5])
    a = lear.profile_loglik(d["subject"], d["time"], d["y"], "lear", est["rho_l"], est["delta"], "reml")
    b = lear.profile_loglik(d["subject"], d["time"], d["y"], "arma11", image["tau"], image["rho_a"], "reml")
    assert abs(a - b) < 1e-10
    assert abs(a - fit["max_loglik"]) < 1e-9

    report = lear.compare(d["subject"], d["time"], d["y"])
    assert report["agree"]
    assert abs(report["loglik_difference"]) < 1e-4


def test_fit_thread_count_does_not_change_result():
    d = lear.simulate(SPEC)
    one = lear.fit(d["subject"], d["time"], d["y"], threads=1)
    four = lear.fit(d["subject"], d["time"], d["y"], threads=4)
    assert one == four
