"""Separatrix sampling: classify initial conditions on the faces of a cube and
bisect along segments joining opposite faces whose endpoints reach different
attractors."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import UNRESOLVED, AttractorClassifier, IntegratorOptions, ModelParams
from .errors import BisectionError, EmptyCloudError, IntegrationError, SamplingError

log = logging.getLogger(__name__)

Classifier = Callable[[np.ndarray], str]


@dataclass(frozen=True)
class GridSpec:
    n: int
    gamma: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise SamplingError(f"grid.n must be an integer >= 2, got {self.n!r}")
        if not self.gamma > 0:
            raise SamplingError(f"grid.gamma must be positive, got {self.gamma!r}")


def face_grid(spec: GridSpec) -> np.ndarray:
    """Initial conditions on the six faces, shape (6, n, n, 3).

    Face k (0-based) holds P^{k+1}_{i1,i2}: z=0, z=gamma, y=0, y=gamma, x=0, x=gamma.
    """
    n, g = int(spec.n), float(spec.gamma)
    c = np.linspace(0.0, g, n)
    I1, I2 = np.meshgrid(c, c, indexing="ij")
    zero = np.zeros_like(I1)
    full = np.full_like(I1, g)
    faces = [
        (I1, I2, zero), (I1, I2, full),
        (I1, zero, I2), (I1, full, I2),
        (zero, I1, I2), (full, I1, I2),
    ]
    return np.stack([np.stack(f, axis=-1) for f in faces])


def pair_opposite_faces(grid: np.ndarray) -> np.ndarray:
    """Segments joining matching-index points of opposite faces, shape (3n^2, 2, 3)."""
    segs = [np.stack([grid[2 * k].reshape(-1, 3), grid[2 * k + 1].reshape(-1, 3)], axis=1)
            for k in range(3)]
    return np.concatenate(segs)


def boundary_key(la: str, lb: str) -> tuple[str, str]:
    return tuple(sorted((la, lb)))


def boundary_name(pair: tuple[str, str]) -> str:
    return f"{pair[0]}-{pair[1]}"


@dataclass(frozen=True)
class SeparatrixPoint:
    position: np.ndarray
    boundary: tuple[str, str]
    width: float
    # unit vector along the generating segment, pointing into the basin of boundary[1]
    direction: np.ndarray
    segment: int = -1


def bisect(classify: Classifier, a, b, tol: float = 1e-4,
           la: str | None = None, lb: str | None = None) -> SeparatrixPoint:
    """Locate a basin boundary on the segment [a, b] by interval bisection.

    Endpoint labels may be passed in to skip reclassification. If a midpoint
    reaches a third attractor, the bracket follows the crossing nearest ``a``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    la = classify(a) if la is None else la
    lb = classify(b) if lb is None else lb
    if la == UNRESOLVED or lb == UNRESOLVED:
        raise BisectionError("segment endpoint is unresolved")
    if la == lb:
        raise BisectionError(f"both endpoints reach {la}; nothing to bracket")
    if not tol > 0:
        raise BisectionError("bisection tolerance must be positive")
    d = b - a
    length = float(np.sqrt(d @ d))
    lo, hi = 0.0, 1.0
    while length * (hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        lm = classify(a + mid * d)
        if lm == la:
            lo = mid
        elif lm == lb:
            hi = mid
        elif lm == UNRESOLVED:
            raise BisectionError(f"unresolved classification inside bracket at t={mid}")
        else:
            hi = mid
            lb = lm
    t = 0.5 * (lo + hi)
    pair = boundary_key(la, lb)
    unit = d / length
    direction = unit if la == pair[0] else -unit
    return SeparatrixPoint(position=a + t * d, boundary=pair,
                           width=length * (hi - lo), direction=direction)


def straddles(classify: Classifier, pt: SeparatrixPoint, tol: float) -> bool:
    """True when the points 10*tol either side of ``pt`` along its segment reach different attractors."""
    off = 10.0 * tol * pt.direction
    lm = classify(pt.position - off)
    lp = classify(pt.position + off)
    return lm != lp and UNRESOLVED not in (lm, lp)


@dataclass
class SeparatrixCloud:
    points: list[SeparatrixPoint]
    stats: dict = field(default_factory=dict)

    @property
    def groups(self) -> dict[tuple[str, str], list[SeparatrixPoint]]:
        out: dict[tuple[str, str], list[SeparatrixPoint]] = {}
        for p in self.points:
            out.setdefault(p.boundary, []).append(p)
        return dict(sorted(out.items()))

    def positions(self, pair=None) -> np.ndarray:
        pts = self.points if pair is None else self.groups.get(tuple(pair), [])
        return np.array([p.position for p in pts]).reshape(-1, 3)

    def directions(self, pair=None) -> np.ndarray:
        pts = self.points if pair is None else self.groups.get(tuple(pair), [])
        return np.array([p.direction for p in pts]).reshape(-1, 3)

    def __len__(self):
        return len(self.points)


def thread_count(threads: int | None = None) -> int:
    """Worker count: ``threads`` or the CPU count, capped by $BASIN_ATLAS_THREADS."""
    n = int(threads) if threads is not None else (os.cpu_count() or 1)
    env = os.environ.get("BASIN_ATLAS_THREADS")
    if env:
        n = min(n, int(env))
    return max(1, n)


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _safe_label(classify: Classifier, x) -> str:
    try:
        return classify(x)
    except IntegrationError as exc:
        log.warning("classification of %s failed: %s", x, exc)
        return UNRESOLVED


def sample_separatrices(params: ModelParams, spec: GridSpec, tol: float = 1e-4,
                        opts: IntegratorOptions | None = None, threads: int | None = None,
                        classify: Classifier | None = None) -> SeparatrixCloud:
    """Classify the face grid and bisect every opposite-face segment with differing endpoints.

    Output order follows segment index, independent of ``threads``.
    """
    classify = classify or AttractorClassifier(params, opts)
    threads = thread_count(threads)
    segs = pair_opposite_faces(face_grid(spec))

    # corner and edge points are shared between faces; classify each once
    uniq, inverse = np.unique(segs.reshape(-1, 3), axis=0, return_inverse=True)
    labels = _map(lambda x: _safe_label(classify, x), list(uniq), threads)
    ends = np.asarray(labels, dtype=object)[inverse.reshape(-1)].reshape(len(segs), 2)

    todo = [i for i, (la, lb) in enumerate(ends)
            if la != lb and UNRESOLVED not in (la, lb)]
    n_unres_end = sum(1 for la, lb in ends if UNRESOLVED in (la, lb))

    def work(i):
        try:
            sp = bisect(classify, segs[i, 0], segs[i, 1], tol, la=ends[i, 0], lb=ends[i, 1])
        except (BisectionError, IntegrationError) as exc:
            log.warning("segment %d discarded: %s", i, exc)
            return None
        return SeparatrixPoint(sp.position, sp.boundary, sp.width, sp.direction, segment=i)

    results = _map(work, todo, threads)
    points = [p for p in results if p is not None]
    basins = sorted({lab for lab in labels if lab != UNRESOLVED})
    stats = {
        "grid_points": int(6 * spec.n ** 2),
        "segments": int(len(segs)),
        "segments_bracketed": len(todo),
        "segments_unresolved_endpoint": int(n_unres_end),
        "segments_discarded": len(todo) - len(points),
        "basins_on_grid": basins,
    }
    if not points:
        raise EmptyCloudError(
            f"no separatrix points found; attractors reached on the grid: {basins or 'none'}")
    return SeparatrixCloud(points=points, stats=stats)
