"""Space-filling design points and discrepancy of point sets.

Generators
----------
``sobol``
    Unscrambled Sobol sequence, Gray-code ordering, Joe-Kuo direction
    numbers for up to 10 dimensions. The first point is the origin.
``lhs``
    Seeded Latin hypercube: one point per row/column stratum, placed at the
    cell midpoint (or uniformly inside the cell with ``jitter=True``).
``centered-grid``
    ``(2i - 1) / (2q)`` for ``i = 1..q``; one dimension only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METHODS = ("sobol", "lhs", "centered-grid")

# (degree s, coefficient bits a, initial m_1..m_s) for dimensions 2..10
_SOBOL_TABLE = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
)
SOBOL_MAX_DIM = len(_SOBOL_TABLE) + 1
_BITS = 32

DEFAULT_BUDGET = 10**8


class DimensionError(ValueError):
    pass


class DiscrepancyBudgetError(RuntimeError):
    pass


@dataclass
class DesignPointSet:
    points: np.ndarray
    method: str
    seed: int = 0

    @property
    def q(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]


def sobol_directions(d: int) -> np.ndarray:
    """Direction integers ``v[j, k]`` scaled to 32 bits; shape ``(d, 32)``."""
    if not 1 <= d <= SOBOL_MAX_DIM:
        raise DimensionError(f"Sobol generator supports 1 <= d <= {SOBOL_MAX_DIM}, got d={d}")
    V = np.zeros((d, _BITS), dtype=np.uint64)
    V[0] = [1 << (_BITS - 1 - k) for k in range(_BITS)]
    for j in range(1, d):
        s, a, m_init = _SOBOL_TABLE[j - 1]
        m = list(m_init)
        for k in range(s, _BITS):
            new = m[k - s] ^ (m[k - s] << s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    new ^= m[k - i] << i
            m.append(new)
        V[j] = [m[k] << (_BITS - 1 - k) for k in range(_BITS)]
    return V


def sobol_points(q: int, d: int) -> np.ndarray:
    """First ``q`` Sobol points by the Gray-code recurrence."""
    V = sobol_directions(d)
    out = np.zeros((q, d), dtype=np.uint64)
    state = np.zeros(d, dtype=np.uint64)
    for i in range(1, q):
        # index of the lowest zero bit of i - 1
        c = (~(i - 1) & i).bit_length() - 1
        state ^= V[:, c]
        out[i] = state
    return out.astype(float) / float(1 << _BITS)


def lhs_points(q: int, d: int, seed: int, jitter: bool = False) -> np.ndarray:
    rng = np.random.default_rng(seed)
    cells = np.column_stack([rng.permutation(q) for _ in range(d)]).astype(float)
    offset = rng.uniform(size=(q, d)) if jitter else 0.5
    return (cells + offset) / q


def centered_grid(q: int) -> np.ndarray:
    return ((2.0 * np.arange(1, q + 1) - 1.0) / (2.0 * q))[:, None]


def generate_design(method: str, q: int, d: int, seed: int = 0, **kwargs) -> DesignPointSet:
    """Generate ``q`` design points in ``[0, 1)^d``; deterministic in all inputs."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if d < 1:
        raise DimensionError("d must be >= 1")
    if method == "sobol":
        pts = sobol_points(q, d)
    elif method == "lhs":
        pts = lhs_points(q, d, seed, **kwargs)
    elif method == "centered-grid":
        if d != 1:
            raise DimensionError("centered-grid design is only supported for d=1")
        pts = centered_grid(q)
    else:
        raise ValueError(f"unknown design method {method!r}; choose from {METHODS}")
    return DesignPointSet(pts, method, int(seed))


def _coords(points) -> np.ndarray:
    pts = getattr(points, "points", points)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) == 0:
        raise ValueError("point set is empty")
    return pts


def local_discrepancy(points, a) -> float:
    """``| #{x_i in [0, a)} / q - prod(a) |`` with strict upper inequalities."""
    pts = _coords(points)
    a = np.asarray(a, dtype=float).ravel()
    if a.shape[0] != pts.shape[1]:
        raise ValueError("corner dimension does not match the points")
    if np.any(a < 0) or np.any(a > 1) or not np.all(np.isfinite(a)):
        raise ValueError("box corner must lie in [0, 1]^d")
    inside = np.all(pts < a, axis=1).sum()
    return float(abs(inside / len(pts) - np.prod(a)))


class DiscrepancyValue(float):
    """A float that remembers whether it is only a lower bound."""

    lower_bound: bool

    def __new__(cls, value, lower_bound=False):
        obj = super().__new__(cls, value)
        obj.lower_bound = bool(lower_bound)
        return obj

    def __repr__(self):
        tag = " (lower bound)" if self.lower_bound else ""
        return f"{float(self)!r}{tag}"


def _corner_residuals(pts: np.ndarray, corners: np.ndarray, chunk: int) -> float:
    """Max over corners of ``max(vol - open/q, closed/q - vol)``."""
    q = len(pts)
    best = 0.0
    for start in range(0, len(corners), chunk):
        C = corners[start:start + chunk]
        vol = np.prod(C, axis=1)
        less = pts[None, :, :] < C[:, None, :]
        leq = pts[None, :, :] <= C[:, None, :]
        n_open = np.all(less, axis=2).sum(axis=1)
        n_closed = np.all(leq, axis=2).sum(axis=1)
        val = np.maximum(vol - n_open / q, n_closed / q - vol).max()
        best = max(best, float(val))
    return best


def _exact_on_grid(pts: np.ndarray, axes: list) -> float:
    """Corner evaluation over the full grid via cumulative dominance counts.

    Every point coordinate is a grid value, so ``x < a_k`` on an axis is the
    same as ``x <= a_(k-1)``: the open count at a corner is the closed count
    at the corner one step down on every axis.
    """
    q, d = pts.shape
    idx = tuple(np.searchsorted(ax, pts[:, j]) for j, ax in enumerate(axes))
    closed = np.zeros([len(ax) for ax in axes])
    np.add.at(closed, idx, 1.0)
    for j in range(d):
        closed = np.cumsum(closed, axis=j)
    open_ = np.pad(closed, [(1, 0)] * d)[tuple(slice(0, -1) for _ in range(d))]
    vol = axes[0]
    for ax in axes[1:]:
        vol = np.multiply.outer(vol, ax)
    return float(np.maximum(vol - open_ / q, closed / q - vol).max())


def _grid_axes(pts: np.ndarray) -> list:
    return [np.unique(np.append(pts[:, j], 1.0)) for j in range(pts.shape[1])]


def star_discrepancy(points, mode: str = "exact", *, n_corners: int = 20000, seed: int = 0,
                     budget: int = DEFAULT_BUDGET) -> DiscrepancyValue:
    """Star discrepancy of a point set in the unit cube.

    ``mode="exact"`` enumerates every corner on the grid spanned by the point
    coordinates (plus 1.0) and evaluates both the open-box and closed-box
    counts there, which attains the supremum over anchored boxes. Cost grows
    as ``q^(d+1)``, capped by ``budget``.

    ``mode="approximate"`` evaluates a seeded random subset of those corners
    together with every one-dimensional projection corner. The result is a
    lower bound on the exact value and is flagged as such.
    """
    pts = _coords(points)
    if np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("points must lie in [0, 1]^d")
    q, d = pts.shape
    axes = _grid_axes(pts)
    chunk = max(1, 4_000_000 // max(1, q * d))

    if mode == "exact":
        cost = float(q) ** d * q
        if cost > budget:
            raise DiscrepancyBudgetError(
                f"exact star discrepancy needs ~{cost:.2e} operations (budget {budget:.0e}); "
                "use mode='approximate' for a lower bound"
            )
        return DiscrepancyValue(_exact_on_grid(pts, axes), lower_bound=False)

    if mode in ("approximate", "approx"):
        rng = np.random.default_rng(seed)
        sampled = np.column_stack([ax[rng.integers(0, len(ax), n_corners)] for ax in axes])
        proj = []
        for j, ax in enumerate(axes):
            c = np.ones((len(ax), d))
            c[:, j] = ax
            proj.append(c)
        corners = np.vstack([sampled] + proj)
        return DiscrepancyValue(_corner_residuals(pts, corners, chunk), lower_bound=True)

    raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'approximate'")
