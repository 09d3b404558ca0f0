import json
from fractions import Fraction

import numpy as np
import pytest

from basin_atlas.dynamics import (UNRESOLVED, AttractorClassifier, IntegratorOptions, ModelParams,
                                  classify_attractor, classify_stability, equilibria,
                                  equilibria_json, integrate, jacobian, rhs)
from basin_atlas.errors import (EquilibriumError, IntegrationError, InvalidParamsError,
                                InvalidStateError, NonHyperbolicError, NotEquilibriumError)

DEFAULT = dict(p=1, q=2, r=2, a=5, b=4, c=3, e=7, f=7, g=10, u=3, v=2, w=1)


def _solve_exact(M, rhs_vec):
    """Gauss-Jordan elimination over the rationals."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(M, rhs_vec)]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        A[c] = [x / A[c][c] for x in A[c]]
        for r in range(n):
            if r != c:
                A[r] = [x - A[r][c] * y for x, y in zip(A[r], A[c])]
    return [A[r][n] for r in range(n)]


def test_params_must_be_positive():
    with pytest.raises(InvalidParamsError):
        ModelParams(**{**DEFAULT, "g": 0})
    with pytest.raises(InvalidParamsError):
        ModelParams(**{**DEFAULT, "u": float("nan")})


@pytest.mark.parametrize("s, expected", [
    ((0, 0, 0), (0, 0, 0)),
    ((3, 0, 0), (0, 0, 0)),
    ((1, 1, 1), (-25 / 3, -9, -17)),
])
def test_rhs_values(params, s, expected):
    np.testing.assert_allclose(rhs(params, s), expected, atol=1e-14)


def test_rhs_rejects_nonfinite(params):
    with pytest.raises(InvalidStateError):
        rhs(params, (np.nan, 0, 0))
    with pytest.raises(InvalidStateError):
        rhs(params, (1, 2))


def test_jacobian_at_origin_and_e1(params):
    np.testing.assert_array_equal(jacobian(params, (0, 0, 0)), np.diag([1.0, 2.0, 2.0]))
    assert jacobian(params, (3, 0, 0))[0, 0] == -1.0


def test_jacobian_matches_central_differences(params, rng):
    h = 1e-6
    for s in rng.uniform(0, 3, size=(100, 3)):
        fd = np.empty((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd[:, j] = (rhs(params, s + e) - rhs(params, s - e)) / (2 * h)
        assert np.max(np.abs(jacobian(params, s) - fd)) <= 1e-6


def test_equilibria_axes_exact(params):
    eqs = {eq.label: eq for eq in equilibria(params)}
    assert len(eqs) == 8
    np.testing.assert_array_equal(eqs["E1"].point, [3, 0, 0])
    np.testing.assert_array_equal(eqs["E2"].point, [0, 2, 0])
    np.testing.assert_array_equal(eqs["E3"].point, [0, 0, 1])


def test_e7_matches_exact_rational_solution(params):
    P = DEFAULT
    M = [[Fraction(P["p"], P["u"]), P["a"], P["b"]],
         [P["c"], Fraction(P["q"], P["v"]), P["e"]],
         [P["f"], P["g"], Fraction(P["r"], P["w"])]]
    exact = _solve_exact(M, [P["p"], P["q"], P["r"]])
    assert exact == [Fraction(162, 853), Fraction(23, 853), Fraction(171, 853)]
    e7 = {eq.label: eq for eq in equilibria(params)}["E7"].point
    np.testing.assert_allclose(e7, [float(x) for x in exact], rtol=0, atol=1e-15)
    np.testing.assert_allclose(e7, [0.1899, 0.0270, 0.2005], atol=1e-3)


def test_two_species_equilibria_follow_formulas(params):
    P = {k: Fraction(v) for k, v in DEFAULT.items()}
    e4x = P["u"] * P["q"] * (P["a"] * P["v"] - P["p"]) / (P["c"] * P["u"] * P["v"] * P["a"] - P["p"] * P["q"])
    e4y = P["p"] * P["v"] * (P["c"] * P["u"] - P["q"]) / (P["c"] * P["u"] * P["v"] * P["a"] - P["p"] * P["q"])
    assert (e4x, e4y) == (Fraction(27, 44), Fraction(7, 44))
    eqs = {eq.label: eq for eq in equilibria(params)}
    np.testing.assert_allclose(eqs["E4"].point, [27 / 44, 7 / 44, 0], atol=1e-15)
    np.testing.assert_allclose(eqs["E5"].point, [0.21951, 0, 0.23171], atol=1e-5)
    np.testing.assert_allclose(eqs["E6"].point, [0, 0.14706, 0.26471], atol=1e-5)


def test_all_equilibria_have_vanishing_field(params):
    for eq in equilibria(params):
        assert np.max(np.abs(rhs(params, eq.point))) <= 1e-10
        assert eq.feasible


def test_stability_pattern(params):
    stab = {eq.label: eq.stability for eq in equilibria(params)}
    assert stab == {"E0": "unstable", "E1": "stable", "E2": "stable", "E3": "stable",
                    "E4": "saddle", "E5": "saddle", "E6": "saddle", "E7": "saddle"}
    for eq in equilibria(params):
        re = eq.eigenvalues.real
        assert (eq.stability == "stable") == bool(np.all(re < 0))
        assert (eq.stability == "unstable") == bool(np.all(re > 0))


def test_e1_eigenvalues(params):
    eq = classify_stability(params, (3, 0, 0))
    np.testing.assert_allclose(sorted(eq.eigenvalues.real), [-19, -7, -1])


def test_classify_stability_errors(params):
    with pytest.raises(NotEquilibriumError):
        classify_stability(params, (1, 1, 1))
    # p = a v on the y-axis makes the x-direction eigenvalue at E2 vanish
    marginal = ModelParams(**{**DEFAULT, "p": 10.0, "a": 5.0})
    with pytest.raises(NonHyperbolicError):
        classify_stability(marginal, (0, 2, 0))


def test_equilibria_report_json(params):
    doc = json.loads(equilibria_json(equilibria(params)))
    row = doc["equilibria"][7]
    assert row["label"] == "E7" and row["stability"] == "saddle" and row["feasible"] is True
    assert len(row["eigenvalues"]) == 3 and all(len(p) == 2 for p in row["eigenvalues"])


def test_infeasible_two_species_equilibrium_is_flagged():
    # weak self-limitation of x relative to competition pushes E4 out of the octant
    P = ModelParams(**{**DEFAULT, "a": 0.1})
    eqs = {eq.label: eq for eq in equilibria(P)}
    assert not eqs["E4"].feasible
    assert np.any(eqs["E4"].point < 0)


def test_singular_coexistence_system():
    # rows of the per-capita system made proportional
    P = ModelParams(p=1, q=1, r=1, a=1, b=1, c=1, e=1, f=1, g=1, u=1, v=1, w=1)
    with pytest.raises(EquilibriumError):
        equilibria(P)


@pytest.mark.parametrize("x0, label", [
    ((3, 0, 0), "E1"),
    ((0, 0, 0.5), "E3"),
    ((3.01, 0.01, 0.01), "E1"),
])
def test_classify_attractor(params, x0, label):
    assert classify_attractor(params, x0) == label
    traj = integrate(params, x0)
    assert traj.classification == label


def test_start_on_equilibrium_is_captured_immediately(params):
    traj = integrate(params, (3, 0, 0))
    assert traj.n_steps == 0 and len(traj.times) == 1


def test_origin_is_unresolved(params):
    assert classify_attractor(params, (0, 0, 0), IntegratorOptions(t_max=50)) == UNRESOLVED


def test_trajectory_shape_and_monotone_time(params):
    traj = integrate(params, (1.0, 2.0, 0.5))
    assert traj.states.shape == (len(traj.times), 3)
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(np.isfinite(traj.states))


@pytest.mark.parametrize("x0", [(0.0, 1.0, 2.0), (1.5, 0.0, 0.3), (2.0, 4.0, 0.0), (0.0, 0.0, 3.0)])
def test_coordinate_planes_are_invariant(params, x0):
    traj = integrate(params, x0)
    zero = np.array(x0) == 0
    assert np.all(np.abs(traj.states[:, zero]) <= 1e-12)


def test_classification_is_deterministic(params, rng):
    clf = AttractorClassifier(params)
    pts = rng.uniform(0, 6, size=(20, 3))
    assert [clf(p) for p in pts] == [clf(p) for p in pts]


def test_initial_state_outside_bound(params):
    with pytest.raises(InvalidStateError):
        classify_attractor(params, (7.0, 0, 0))
    with pytest.raises(InvalidStateError):
        classify_attractor(params, (-0.1, 0, 0))


def test_blowup_is_an_error(params):
    # the x-axis trajectory heads to x=3, beyond this artificial bound
    opts = IntegratorOptions(x_max=2.5)
    with pytest.raises(IntegrationError):
        AttractorClassifier(params, opts).integrate((2.4, 0.0, 0.0))


def test_step_budget_is_an_error(params):
    with pytest.raises(IntegrationError):
        classify_attractor(params, (1, 1, 1), IntegratorOptions(max_steps=3))
