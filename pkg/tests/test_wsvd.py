import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from basin_atlas.errors import BasisError
from basin_atlas.kernels import RadialKernel, kernel_matrix
from basin_atlas.wsvd import (WeightScheme, build_basis, discrete_inner, evaluate, fit,
                              wsvd_basis)

C6 = RadialKernel("WendlandC6", 1.0)


def _nodes(n, seed):
    return np.random.default_rng(seed).uniform(0, 1, (n, 3))


def _weights(n, seed):
    w = np.random.default_rng(seed + 1).uniform(0.5, 1.5, n)
    return WeightScheme(w / w.sum(), 1.0)


def test_single_node():
    x = np.array([[0.2, 0.3, 0.4]])
    b = wsvd_basis(C6, x, WeightScheme.uniform(1, 2.0))
    assert b.rank == 1
    assert b.sigma[0] == pytest.approx(2.0)  # w * phi(0)
    I = fit(b, [2.0])
    pts = np.random.default_rng(0).uniform(-0.5, 1.5, (50, 3))
    r = np.linalg.norm(pts - x, axis=1)
    np.testing.assert_allclose(I(pts), 2.0 * C6(r), rtol=1e-14, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 100), seed=st.integers(0, 10_000))
def test_basis_identities(n, seed):
    X = _nodes(n, seed)
    W = _weights(n, seed)
    A = kernel_matrix(C6, X)
    b = build_basis(A, W, trunc_tol=0.0, nodes=X, kernel=C6)
    assert b.rank == n
    assert np.all(np.diff(b.sigma) <= 0)
    # orthonormal in the native space
    np.testing.assert_allclose(b.D.T @ A @ b.D, np.eye(n), atol=1e-9)
    # discretely orthogonal with norms sigma
    G = b.V.T @ (W.weights[:, None] * b.V)
    np.testing.assert_allclose(G, np.diag(b.sigma), atol=1e-13 * b.sigma[0])
    # values at the nodes
    np.testing.assert_allclose(A @ b.D, b.V, atol=1e-11)
    np.testing.assert_allclose(b.values(X), b.V, atol=1e-11)
    # sum of sigma is the weighted trace
    assert b.sigma.sum() == pytest.approx(float(W.weights @ np.diag(A)), rel=1e-13)
    sw = np.sqrt(W.weights)
    np.testing.assert_allclose(b.sigma, np.linalg.eigvalsh(sw[:, None] * A * sw)[::-1], atol=1e-14)


def test_sigma_equals_discrete_norm():
    X = _nodes(30, 3)
    W = _weights(30, 3)
    b = wsvd_basis(C6, X, W, trunc_tol=0.0)
    for k in range(b.rank):
        assert discrete_inner(b.V[:, k], b.V[:, k], W) == pytest.approx(b.sigma[k], rel=1e-10)


def test_fitting_a_basis_function_gives_unit_vector():
    X = _nodes(40, 7)
    b = wsvd_basis(C6, X, _weights(40, 7), trunc_tol=0.0)
    for k in (0, 5, 39):
        I = fit(b, b.V[:, k])
        e = np.zeros(b.rank)
        e[k] = 1.0
        np.testing.assert_allclose(I.beta, e, atol=1e-9)


def test_untruncated_fit_matches_direct_solve():
    X = _nodes(60, 11)
    f = np.sin(3 * X[:, 0]) + X[:, 1] * X[:, 2]
    b = wsvd_basis(C6, X, trunc_tol=0.0)
    I = fit(b, f)
    A = kernel_matrix(C6, X)
    np.testing.assert_allclose(I.coef, np.linalg.solve(A, f), rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(I(X), f, atol=1e-10)


def test_truncation_stabilises_ill_conditioned_gaussian():
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (200, 3))
    T = rng.uniform(0, 1, (2000, 3))

    def f(P):
        return np.sin(P[:, 0]) + np.cos(2 * P[:, 1]) * P[:, 2]

    k = RadialKernel("Gaussian", 0.5)
    A = kernel_matrix(k, X)
    assert np.linalg.cond(A) > 1e16
    direct = np.linalg.solve(A, f(X))
    I = fit(wsvd_basis(k, X, trunc_tol=1e-14), f(X))
    assert I.basis.rank < len(X)
    assert np.abs(I.coef).max() < 1e-2 * np.abs(direct).max()
    assert np.abs(I(T) - f(T)).max() < 1e-3


def test_truncation_rule():
    X = _nodes(50, 5)
    b = wsvd_basis(RadialKernel("Gaussian", 1.0), X, trunc_tol=1e-8)
    kept = b.sigma[:b.rank]
    assert np.all(kept >= 1e-8 * b.sigma[0])
    if b.rank < b.size:
        assert b.sigma[b.rank] < 1e-8 * b.sigma[0]


def test_evaluate_in_chunks_matches_direct(rng):
    X = rng.uniform(0, 1, (30, 3))
    I = fit(wsvd_basis(C6, X), rng.normal(size=30))
    P = rng.uniform(0, 1, (9000, 3))
    np.testing.assert_allclose(evaluate(I, P), C6.cross(P, X) @ I.coef, rtol=1e-13, atol=1e-13)


def test_weight_scheme_validation():
    with pytest.raises(BasisError):
        WeightScheme([0.5, 0.4], 1.0)
    with pytest.raises(BasisError):
        WeightScheme([1.0, -0.0], 1.0)
    with pytest.raises(BasisError):
        discrete_inner([1, 2, 3], [1, 2], WeightScheme.uniform(2))


def test_indefinite_matrix_rejected():
    A = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(BasisError):
        build_basis(A, WeightScheme.uniform(2))


def test_fit_length_mismatch():
    b = wsvd_basis(C6, _nodes(5, 0))
    with pytest.raises(BasisError):
        fit(b, np.ones(4))
