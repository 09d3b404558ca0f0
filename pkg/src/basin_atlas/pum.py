"""Partition-of-unity blending of local WSVD interpolants.

The domain is covered by a regular grid of overlapping balls Omega_j.  Each
ball carries a local interpolant R_j on the nodes it contains and a compactly
supported Wendland bump phi_j; the global approximant is

    I(x) = sum_j R_j(x) W_j(x),   W_j = phi_j / sum_k phi_k.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import CoverageError
from .kernels import RadialKernel
from .wsvd import StableInterpolant, WeightScheme, fit, wsvd_basis


@dataclass(frozen=True)
class Cover:
    centers: np.ndarray  # (d, 3)
    radius: float
    lo: np.ndarray
    hi: np.ndarray
    counts: tuple[int, int, int]
    shepard_family: str = "WendlandC2"

    def __len__(self):
        return len(self.centers)

    @property
    def measure(self) -> float:
        """Volume of one ball subdomain."""
        return 4.0 / 3.0 * np.pi * self.radius ** 3

    @property
    def generator(self) -> RadialKernel:
        return RadialKernel(self.shepard_family, 1.0 / self.radius)

    def members(self, j: int, X: np.ndarray, tree: cKDTree | None = None) -> np.ndarray:
        """Sorted indices of the points of X strictly inside ball j."""
        tree = tree or cKDTree(X)
        idx = np.sort(np.asarray(tree.query_ball_point(self.centers[j], self.radius), dtype=np.intp))
        d = X[idx] - self.centers[j]
        return idx[np.einsum("ij,ij->i", d, d) < self.radius ** 2]

    def covered(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64).reshape(-1, 3)
        dist, _ = cKDTree(self.centers).query(X)
        return dist < self.radius


def build_cover(lo, hi, counts=(4, 4, 4), overlap: float = 1.25, data=None,
                shepard_family: str = "WendlandC2") -> Cover:
    """Balls centred on a regular counts[0] x counts[1] x counts[2] grid of cells over [lo, hi].

    The radius is ``overlap`` times half the cell diagonal. Raises CoverageError
    if any point of ``data`` (default: the box corners) lies outside every ball.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    counts = tuple(int(c) for c in counts)
    if len(counts) != 3 or min(counts) < 1:
        raise CoverageError(f"cover counts must be three integers >= 1, got {counts}")
    if np.any(hi < lo):
        raise CoverageError("cover box has hi < lo")
    if not overlap > 0:
        raise CoverageError("overlap factor must be positive")
    h = (hi - lo) / np.array(counts)
    axes = [lo[a] + (np.arange(counts[a]) + 0.5) * h[a] for a in range(3)]
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    radius = float(overlap * 0.5 * np.sqrt(h @ h))
    if not radius > 0:
        raise CoverageError("cover box is degenerate")
    cover = Cover(centers, radius, lo, hi, counts, shepard_family)
    if data is None:
        data = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(3, -1).T
    missed = ~cover.covered(data)
    if missed.any():
        raise CoverageError(f"{int(missed.sum())} point(s) outside every subdomain, "
                            f"e.g. {np.asarray(data).reshape(-1, 3)[missed][0]}; increase overlap")
    return cover


def _shepard(cover: Cover, X: np.ndarray, active: np.ndarray):
    """Per-subdomain (indices, weights) for the points of X, plus the uncovered mask."""
    tree = cKDTree(X)
    gen = cover.generator
    parts = []
    den = np.zeros(len(X))
    for j in np.flatnonzero(active):
        idx = cover.members(j, X, tree)
        d = X[idx] - cover.centers[j]
        phi = gen(np.sqrt(np.einsum("ij,ij->i", d, d)))
        den[idx] += phi
        parts.append((j, idx, phi))
    uncovered = den <= 0
    out = []
    for j, idx, phi in parts:
        keep = ~uncovered[idx]
        idx, phi = idx[keep], phi[keep]
        out.append((j, idx, phi / den[idx]))
    return out, uncovered


def shepard(cover: Cover, x) -> np.ndarray:
    """Shepard weights W_j(x) over all subdomains; shape (d,) or (n, d)."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = X.reshape(-1, 3)
    parts, uncovered = _shepard(cover, X, np.ones(len(cover), dtype=bool))
    if uncovered.any():
        raise CoverageError(f"{int(uncovered.sum())} point(s) outside every subdomain")
    W = np.zeros((len(X), len(cover)))
    for j, idx, w in parts:
        W[idx, j] = w
    return W[0] if single else W


@dataclass
class PuInterpolant:
    cover: Cover
    locals: list[StableInterpolant | None]
    kernel: RadialKernel
    stats: list[dict] = field(default_factory=list)

    @property
    def active(self) -> np.ndarray:
        return np.array([loc is not None for loc in self.locals], dtype=bool)

    def __call__(self, x) -> np.ndarray:
        return evaluate_pu(self, x)


def fit_pu(cover: Cover, nodes, values, kernel: RadialKernel,
           trunc_tol: float = 1e-14) -> PuInterpolant:
    """Fit a WSVD interpolant on the nodes inside each subdomain.

    Subdomains without nodes get no local fit and drop out of the Shepard
    normalisation.
    """
    X = np.asarray(nodes, dtype=np.float64).reshape(-1, 3)
    f = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(f) != len(X):
        raise ValueError(f"{len(f)} values for {len(X)} nodes")
    if not cover.covered(X).all():
        raise CoverageError("some nodes lie outside every subdomain")
    tree = cKDTree(X)
    meas = cover.measure
    locs, stats = [], []
    for j in range(len(cover)):
        idx = cover.members(j, X, tree)
        if idx.size == 0:
            locs.append(None)
            stats.append({"subdomain": j, "n": 0})
            continue
        basis = wsvd_basis(kernel, X[idx], WeightScheme.uniform(idx.size, meas), trunc_tol)
        loc = fit(basis, f[idx])
        locs.append(loc)
        stats.append({"subdomain": j, **basis.summary()})
    return PuInterpolant(cover=cover, locals=locs, kernel=kernel, stats=stats)


def evaluate_pu(interp: PuInterpolant, x) -> np.ndarray | float:
    """I(x) = sum_j W_j(x) R_j(x); only subdomains containing x contribute."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = X.reshape(-1, 3)
    parts, uncovered = _shepard(interp.cover, X, interp.active)
    if uncovered.any():
        raise CoverageError(f"{int(uncovered.sum())} evaluation point(s) outside every subdomain, "
                            f"e.g. {X[uncovered][0]}")
    out = np.zeros(len(X))
    for j, idx, w in parts:
        if idx.size:
            out[idx] += w * interp.locals[j](X[idx])
    return float(out[0]) if single else out
