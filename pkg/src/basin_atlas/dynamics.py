"""Three-species Lotka-Volterra competition model with logistic growth.

The vector field is

    dx/dt = p (1 - x/u) x - a x y - b x z
    dy/dt = q (1 - y/v) y - c x y - e y z
    dz/dt = r (1 - z/w) z - f x z - g y z

This module holds the model parameters, the field and its Jacobian, the eight
equilibria with their stability, and adaptive trajectory integration with
classification by the attracting equilibrium.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from . import _backend
from .errors import (
    EquilibriumError,
    IntegrationError,
    InvalidParamsError,
    InvalidStateError,
    NonHyperbolicError,
    NotEquilibriumError,
)

UNRESOLVED = "Unresolved"
LABELS = tuple(f"E{i}" for i in range(8))

_NEWTON_MAXITER = 20
_EQ_TOL = 1e-10
_MARGINAL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Growth rates p, q, r; competition rates a, b, c, e, f, g; carrying capacities u, v, w."""

    p: float
    q: float
    r: float
    a: float
    b: float
    c: float
    e: float
    f: float
    g: float
    u: float
    v: float
    w: float

    def __post_init__(self):
        for fld in fields(self):
            val = getattr(self, fld.name)
            if not (isinstance(val, (int, float, np.floating, np.integer)) and math.isfinite(val)):
                raise InvalidParamsError(f"parameter {fld.name} must be a finite number, got {val!r}")
            if val <= 0:
                raise InvalidParamsError(f"parameter {fld.name} must be positive, got {val!r}")
            object.__setattr__(self, fld.name, float(val))

    @classmethod
    def default(cls) -> "ModelParams":
        """The tristable parameter set (E1, E2, E3 all stable)."""
        return cls(p=1, q=2, r=2, a=5, b=4, c=3, e=7, f=7, g=10, u=3, v=2, w=1)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, fld.name) for fld in fields(self))

    def to_dict(self) -> dict[str, float]:
        return {fld.name: getattr(self, fld.name) for fld in fields(self)}

    @property
    def x_max(self) -> float:
        """Default state bound, twice the largest carrying capacity."""
        return 2.0 * max(self.u, self.v, self.w)


def _state(s) -> np.ndarray:
    arr = np.asarray(s, dtype=np.float64)
    if arr.shape != (3,):
        raise InvalidStateError(f"state must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError(f"state must be finite, got {arr}")
    return arr


def rhs(params: ModelParams, s) -> np.ndarray:
    x, y, z = _state(s)
    return np.array(_backend.python._rhs(params.as_tuple(), x, y, z))


def jacobian(params: ModelParams, s) -> np.ndarray:
    x, y, z = _state(s)
    P = params
    return np.array([
        [P.p * (1 - 2 * x / P.u) - P.a * y - P.b * z, -P.a * x, -P.b * x],
        [-P.c * y, P.q * (1 - 2 * y / P.v) - P.c * x - P.e * z, -P.e * y],
        [-P.f * z, -P.g * z, P.r * (1 - 2 * z / P.w) - P.f * x - P.g * y],
    ])


@dataclass(frozen=True)
class Equilibrium:
    label: str
    point: np.ndarray
    eigenvalues: np.ndarray
    stability: str  # "stable" | "unstable" | "saddle"
    feasible: bool = True

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "point": [float(c) for c in self.point],
            "eigenvalues": [[float(ev.real), float(ev.imag)] for ev in self.eigenvalues],
            "stability": self.stability,
            "feasible": self.feasible,
        }


def classify_stability(params: ModelParams, point, label: str = "") -> Equilibrium:
    """Linear stability of an equilibrium from the sign pattern of Re(eigenvalues)."""
    pt = _state(point)
    res = np.max(np.abs(rhs(params, pt)))
    if res > 1e-8:
        raise NotEquilibriumError(f"{label or pt} is not an equilibrium: |rhs|_inf = {res:.3e}")
    eig = np.linalg.eigvals(jacobian(params, pt))
    eig = eig[np.lexsort((eig.imag, eig.real))]
    re = eig.real
    if np.any(np.abs(re) <= _MARGINAL):
        raise NonHyperbolicError(f"equilibrium {label or pt} is non-hyperbolic: eigenvalues {eig}")
    if np.all(re < 0):
        stability = "stable"
    elif np.all(re > 0):
        stability = "unstable"
    else:
        stability = "saddle"
    return Equilibrium(label=label, point=pt, eigenvalues=eig, stability=stability,
                       feasible=bool(np.all(pt >= 0)))


def _newton(params: ModelParams, x: np.ndarray) -> np.ndarray:
    for _ in range(_NEWTON_MAXITER):
        F = rhs(params, x)
        if np.max(np.abs(F)) <= 1e-15:
            break
        dx = np.linalg.solve(jacobian(params, x), F)
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-16 * max(1.0, np.max(np.abs(x))):
            break
    return x


def _two_species(num1, num2, den, name):
    if den == 0:
        raise EquilibriumError(f"{name} undefined: zero denominator")
    return num1 / den, num2 / den


def equilibria(params: ModelParams) -> list[Equilibrium]:
    """All eight equilibria E0..E7 with eigenvalues and stability.

    Equilibria with a negative coordinate are returned with ``feasible=False``.
    """
    P = params
    pts = [
        (0.0, 0.0, 0.0),
        (P.u, 0.0, 0.0),
        (0.0, P.v, 0.0),
        (0.0, 0.0, P.w),
    ]
    x4, y4 = _two_species(P.u * P.q * (P.a * P.v - P.p), P.p * P.v * (P.c * P.u - P.q),
                          P.c * P.u * P.v * P.a - P.p * P.q, "E4")
    x5, z5 = _two_species(P.u * P.r * (P.b * P.w - P.p), P.w * P.p * (P.f * P.u - P.r),
                          P.f * P.u * P.w * P.b - P.r * P.p, "E5")
    y6, z6 = _two_species(P.v * P.r * (P.w * P.e - P.q), P.w * P.q * (P.v * P.g - P.r),
                          P.g * P.v * P.w * P.e - P.q * P.r, "E6")
    pts += [(x4, y4, 0.0), (x5, 0.0, z5), (0.0, y6, z6)]

    # per-capita growth rates vanish: a linear system in (x, y, z)
    M = np.array([
        [P.p / P.u, P.a, P.b],
        [P.c, P.q / P.v, P.e],
        [P.f, P.g, P.r / P.w],
    ])
    if abs(np.linalg.det(M)) <= 1e-14 * np.linalg.norm(M) ** 3:
        raise EquilibriumError("E7 absent: coexistence system is singular")
    e7 = np.linalg.solve(M, np.array([P.p, P.q, P.r]))
    pts.append(tuple(_newton(P, e7)))

    out = []
    for label, pt in zip(LABELS, pts):
        pt = np.asarray(pt, dtype=np.float64)
        res = np.max(np.abs(rhs(P, pt)))
        if res > _EQ_TOL:
            raise EquilibriumError(f"{label} residual {res:.3e} exceeds {_EQ_TOL}")
        out.append(classify_stability(P, pt, label))
    return out


def stable_equilibria(params: ModelParams) -> list[Equilibrium]:
    return [eq for eq in equilibria(params) if eq.stability == "stable" and eq.feasible]


def equilibria_json(eqs: Sequence[Equilibrium]) -> str:
    return json.dumps({"equilibria": [eq.to_dict() for eq in eqs]}, indent=2)


@dataclass(frozen=True)
class IntegratorOptions:
    """Step control and termination for attractor classification."""

    t_max: float = 1000.0
    rtol: float = 1e-8
    atol: float = 1e-10
    capture_radius: float = 1e-2
    x_max: float | None = None  # None: 2 * max(u, v, w)
    max_steps: int = 1_000_000

    def __post_init__(self):
        for name in ("t_max", "rtol", "atol", "capture_radius"):
            if not getattr(self, name) > 0:
                raise InvalidParamsError(f"integrator.{name} must be positive")
        if self.x_max is not None and not self.x_max > 0:
            raise InvalidParamsError("integrator.x_max must be positive")
        if self.max_steps < 1:
            raise InvalidParamsError("integrator.max_steps must be >= 1")


# states may dip this far below zero through round-off near invariant planes
_NEG_SLACK = 1e-8


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    classification: str
    n_steps: int = 0


class AttractorClassifier:
    """Callable mapping an initial state to the label of the stable equilibrium it reaches.

    Targets (the stable feasible equilibria) are computed once, so repeated calls
    only pay for the integration.
    """

    def __init__(self, params: ModelParams, opts: IntegratorOptions | None = None,
                 backend: str | None = None):
        self.params = params
        self.opts = opts or IntegratorOptions()
        self.kernels = _backend.get(backend)
        stable = stable_equilibria(params)
        self.labels = [eq.label for eq in stable]
        self.targets = np.array([eq.point for eq in stable], dtype=np.float64).reshape(-1, 3)
        self.x_max = self.opts.x_max if self.opts.x_max is not None else params.x_max
        self._P = params.as_tuple()

    def _check_start(self, x0):
        x0 = _state(x0)
        if np.any(x0 < 0) or np.any(x0 > self.x_max):
            raise InvalidStateError(f"initial state {x0} outside [0, {self.x_max}]^3")
        return x0

    def _run(self, x0, record):
        o = self.opts
        status, label, t, s, n, ts, ys = self.kernels.integrate_dopri5(
            self._P, x0, self.targets, o.capture_radius, o.t_max, o.rtol, o.atol,
            -_NEG_SLACK, self.x_max, o.max_steps, record)
        if status == _backend.BLOWUP:
            raise IntegrationError(f"state left [0, {self.x_max}]^3 at t={t:.6g}: {s}")
        if status == _backend.UNDERFLOW:
            raise IntegrationError(f"step size underflow at t={t:.6g}, state {s}")
        if status == _backend.BUDGET:
            raise IntegrationError(f"step budget {o.max_steps} exhausted at t={t:.6g}")
        lab = self.labels[label] if status == _backend.CAPTURED else UNRESOLVED
        return lab, n, ts, ys

    def __call__(self, x0) -> str:
        lab, _, _, _ = self._run(self._check_start(x0), False)
        return lab

    def integrate(self, x0) -> Trajectory:
        lab, n, ts, ys = self._run(self._check_start(x0), True)
        return Trajectory(times=np.asarray(ts), states=np.asarray(ys).reshape(-1, 3),
                          classification=lab, n_steps=n)


def integrate(params: ModelParams, x0, opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate from ``x0`` until capture by a stable equilibrium or ``t_max``."""
    return AttractorClassifier(params, opts).integrate(x0)


def classify_attractor(params: ModelParams, x0, opts: IntegratorOptions | None = None) -> str:
    return AttractorClassifier(params, opts)(x0)
