import math

import pytest

import unmeasure as um


def test_extended_kl_of_point_masses():
    assert um.kl_extended([2.0], [1.0]) == pytest.approx(2 * math.log(2) - 1, abs=1e-15)
    assert um.kl_extended([1.0, 0.0], [0.0, 1.0]) == math.inf
    assert um.f_divergence([0.5, 0.5], [0.5, 0.5], "reverse-kl") == 0.0


def test_thinning_poisson():
    thinned = um.thin_poisson(3.0, 0.4)
    target = um.poisson_pmf(1.2)
    overlap = min(len(thinned["probs"]), len(target["probs"]))
    assert max(abs(a - b) for a, b in zip(thinned["probs"][:overlap], target["probs"][:overlap])) < 1e-12


def test_signed_root_and_qq_gap():
    assert um.g_statistic(20, 15) == pytest.approx(2.28746, abs=1e-5)
    assert um.g_statistic(20, 5) == pytest.approx(-2.28746, abs=1e-5)
    _, classical = um.classical_qq(20)
    rows, poisson = um.poisson_qq(20.0)
    assert poisson < classical
    assert rows[0][0] == 0.0


def test_projection_of_the_die():
    result = um.project(
        [1 / 6] * 6,
        {"equalities": [{"g": [1, 2, 3, 4, 5, 6], "target": 4.5}], "probability": True},
    )
    assert result["converged"]
    assert result["q_star"]["weights"][5] == pytest.approx(0.347494, abs=1e-6)


def test_alternating_minimization_variants_agree():
    constraints = [([1, 2, 3, 4, 5, 6], 4.5)]
    fast = um.altmin([1 / 6] * 6, constraints, "orthogonalized")
    plain = um.altmin([1 / 6] * 6, constraints, "unnormalized")
    assert fast["converged"] and plain["converged"]
    assert fast["cycles_to_tol"] <= plain["cycles_to_tol"]
    assert max(abs(a - b) for a, b in zip(fast["fixed_point"], plain["fixed_point"])) < 1e-9


def test_scan_and_dutch_book():
    scan = um.inequality_scan(samples=2000, seed=4)
    assert scan["min_slack"] >= -1e-9
    assert scan["seed"] == 4
    book = um.dutchbook([[1, -2], [-2, 1]])
    assert book["branch"] == "ARBITRAGE" and book["verified"]


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        um.kl_extended([-1.0], [1.0])
    with pytest.raises(um.InfeasibleError):
        um.project([0.5, 0.5], {"equalities": [{"g": [1, 2], "target": 5}], "probability": True})
