"""Radial kernels phi(eps * r) and kernel matrix assembly.

Wendland functions are the compactly supported C2, C4, C6 members positive
definite on R^3, normalised so that phi(0) = 1:

    C2: (1 - t)_+^4 (4t + 1)
    C4: (1 - t)_+^6 (35t^2 + 18t + 3) / 3
    C6: (1 - t)_+^8 (32t^3 + 25t^2 + 8t + 1)

with t = eps * r. The Gaussian exp(-t^2) is kept for conditioning comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from . import _backend
from .errors import DuplicateNodeError, KernelError

FAMILIES = {
    "WendlandC2": _backend.python.WENDLAND_C2,
    "WendlandC4": _backend.python.WENDLAND_C4,
    "WendlandC6": _backend.python.WENDLAND_C6,
    "Gaussian": _backend.python.GAUSSIAN,
}

_ALIASES = {name.lower().replace("_", "").replace("-", ""): name for name in FAMILIES}

DUPLICATE_TOL = 1e-14


def family_name(name: str) -> str:
    """Canonical family name; accepts e.g. 'wendland_c6', 'WendlandC6', 'gaussian'."""
    key = str(name).lower().replace("_", "").replace("-", "")
    try:
        return _ALIASES[key]
    except KeyError:
        raise KernelError(f"unknown kernel family {name!r}; expected one of {sorted(FAMILIES)}") from None


@dataclass(frozen=True)
class RadialKernel:
    family: str = "WendlandC6"
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", family_name(self.family))
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise KernelError(f"shape parameter must be positive, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def code(self) -> int:
        return FAMILIES[self.family]

    @property
    def compact(self) -> bool:
        return self.family != "Gaussian"

    @property
    def support_radius(self) -> float:
        return 1.0 / self.epsilon if self.compact else np.inf

    @property
    def phi0(self) -> float:
        return 1.0

    def __call__(self, r):
        return eval_kernel(self, r)

    def cross(self, X, Y) -> np.ndarray:
        """Matrix of phi(eps |X_i - Y_j|)."""
        X = np.asarray(X, dtype=np.float64).reshape(-1, 3)
        Y = np.asarray(Y, dtype=np.float64).reshape(-1, 3)
        return _backend.kernels.cross_kernel(X, Y, self.code, self.epsilon)


def eval_kernel(kernel: RadialKernel, r):
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise KernelError("radial distance must be nonnegative")
    out = _backend.python.radial(r, kernel.code, kernel.epsilon)
    return float(out) if out.ndim == 0 else out


def kernel_matrix(kernel: RadialKernel, nodes) -> np.ndarray:
    """Symmetric interpolation matrix A_ij = phi(eps |x_i - x_j|)."""
    X = np.asarray(nodes, dtype=np.float64).reshape(-1, 3)
    if len(X) > 1:
        dmin = pdist(X).min()
        if dmin < DUPLICATE_TOL:
            raise DuplicateNodeError(f"nodes are not pairwise distinct (min distance {dmin:.3e})")
    return kernel.cross(X, X)
