"""Weighted-SVD (WSVD) stable basis for kernel interpolation.

Given the kernel matrix A on nodes x_1..x_N and positive cubature weights w,
the weighted matrix A_W = sqrt(W) A sqrt(W) is symmetric positive definite, so
its SVD coincides with the eigendecomposition Q diag(sigma) Q^T.  The basis
u_k = sum_i D[i, k] Phi(., x_i) has

    D = sqrt(W) Q diag(sigma)^(-1/2)      (coefficients on the translates)
    V = sqrt(W)^(-1) Q diag(sigma)^(1/2)  (values u_k(x_i))

so that D^T A D = I, V^T W V = diag(sigma), A D = V and sum(sigma) = trace(A_W).
The interpolant of data f is R = sum_k beta_k u_k with
beta_k = (f, u_k)_W / sigma_k; dropping the smallest sigma_k stabilises it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisError
from .kernels import RadialKernel, kernel_matrix


@dataclass(frozen=True)
class WeightScheme:
    weights: np.ndarray
    measure: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.size == 0 or np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise BasisError("weights must be positive and finite")
        if not self.measure > 0:
            raise BasisError("domain measure must be positive")
        if abs(w.sum() - self.measure) > 1e-12 * self.measure:
            raise BasisError(f"weights sum to {w.sum()!r}, expected the domain measure {self.measure!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "measure", float(self.measure))

    @classmethod
    def uniform(cls, n: int, measure: float = 1.0) -> "WeightScheme":
        return cls(np.full(n, measure / n), measure)

    def __len__(self):
        return self.weights.size


def discrete_inner(f, g, scheme: WeightScheme) -> float:
    """Weighted l2 inner product sum_i w_i f_i g_i."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape[0] != len(scheme) or g.shape[0] != len(scheme):
        raise BasisError(f"length mismatch: {f.shape[0]}, {g.shape[0]} vs {len(scheme)} weights")
    return (scheme.weights * f) @ g


@dataclass(frozen=True)
class WsvdBasis:
    sigma: np.ndarray  # all N eigenvalues of A_W, descending
    D: np.ndarray  # N x m
    V: np.ndarray  # N x m
    scheme: WeightScheme
    nodes: np.ndarray | None = None
    kernel: RadialKernel | None = None

    @property
    def rank(self) -> int:
        return self.D.shape[1]

    @property
    def size(self) -> int:
        return self.D.shape[0]

    def values(self, points) -> np.ndarray:
        """u_k(x) for every point (rows) and retained basis function (columns)."""
        return self.kernel.cross(points, self.nodes) @ self.D

    def summary(self) -> dict:
        s = self.sigma
        return {
            "n": int(self.size),
            "rank": int(self.rank),
            "sigma_max": float(s[0]),
            "sigma_min": float(s[-1]),
            "sigma_min_kept": float(s[self.rank - 1]),
            "sigma_sum": float(s.sum()),
        }


def build_basis(A, scheme: WeightScheme, trunc_tol: float = 1e-14, *,
                nodes=None, kernel: RadialKernel | None = None) -> WsvdBasis:
    """WSVD basis from kernel matrix ``A``.

    Keeps the m basis functions with sigma_k >= trunc_tol * sigma_max. Eigenvalues
    that are non-positive yet at least that large in magnitude raise BasisError.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise BasisError(f"kernel matrix must be square, got {A.shape}")
    if len(scheme) != n:
        raise BasisError(f"{len(scheme)} weights for a {n}x{n} kernel matrix")
    if trunc_tol < 0:
        raise BasisError("trunc_tol must be nonnegative")
    sw = np.sqrt(scheme.weights)
    AW = sw[:, None] * A * sw[None, :]
    sigma, Q = np.linalg.eigh(AW)
    sigma = sigma[::-1].copy()
    Q = Q[:, ::-1]
    smax = sigma[0]
    if not smax > 0:
        raise BasisError(f"weighted kernel matrix has no positive singular value (max {smax!r})")
    cut = trunc_tol * smax
    bad = np.flatnonzero((sigma <= 0) & (np.abs(sigma) >= cut))
    if bad.size:
        k = int(bad[0])
        raise BasisError(f"singular value {k} is {sigma[k]!r} <= 0 (cutoff {cut:.3e})")
    m = int(np.count_nonzero((sigma >= cut) & (sigma > 0)))
    Qm = Q[:, :m]
    rs = np.sqrt(sigma[:m])
    D = sw[:, None] * Qm / rs[None, :]
    V = Qm * rs[None, :] / sw[:, None]
    if nodes is not None:
        nodes = np.asarray(nodes, dtype=np.float64).reshape(-1, 3)
    return WsvdBasis(sigma=sigma, D=D, V=V, scheme=scheme, nodes=nodes, kernel=kernel)


def wsvd_basis(kernel: RadialKernel, nodes, scheme: WeightScheme | None = None,
               trunc_tol: float = 1e-14, measure: float = 1.0) -> WsvdBasis:
    """Assemble the kernel matrix on ``nodes`` and build its WSVD basis (uniform weights by default)."""
    nodes = np.asarray(nodes, dtype=np.float64).reshape(-1, 3)
    scheme = scheme or WeightScheme.uniform(len(nodes), measure)
    A = kernel_matrix(kernel, nodes)
    return build_basis(A, scheme, trunc_tol, nodes=nodes, kernel=kernel)


@dataclass(frozen=True)
class StableInterpolant:
    nodes: np.ndarray
    kernel: RadialKernel
    beta: np.ndarray  # spectral coefficients, length rank
    coef: np.ndarray  # D @ beta, coefficients on the translates
    basis: WsvdBasis | None = None

    def __call__(self, points) -> np.ndarray:
        return evaluate(self, points)


def fit(basis: WsvdBasis, f) -> StableInterpolant:
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    if f.size != basis.size:
        raise BasisError(f"{f.size} data values for {basis.size} nodes")
    if basis.nodes is None or basis.kernel is None:
        raise BasisError("basis was built without nodes/kernel; cannot form an interpolant")
    beta = (basis.V.T @ (basis.scheme.weights * f)) / basis.sigma[:basis.rank]
    return StableInterpolant(nodes=basis.nodes, kernel=basis.kernel, beta=beta,
                             coef=basis.D @ beta, basis=basis)


_CHUNK = 4096


def evaluate(interp: StableInterpolant, points) -> np.ndarray:
    """R(x) = sum_k beta_k u_k(x), computed through the collapsed translate coefficients."""
    X = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    out = np.empty(len(X))
    for s in range(0, len(X), _CHUNK):
        out[s:s + _CHUNK] = interp.kernel.cross(X[s:s + _CHUNK], interp.nodes) @ interp.coef
    return out
