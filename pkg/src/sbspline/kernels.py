"""Null-space bases and reproducing kernels for the supported spline families.

Three families are available:

``cubic-1d``
    Univariate cubic smoothing spline on [0, 1] built from scaled Bernoulli
    polynomials. Null space ``{1, k1(x)}``.
``ssanova-2way``
    Tensor-product smoothing spline ANOVA with all main effects and all
    two-way interactions, every term weighted 1 under a single smoothing
    parameter.
``thinplate-2d``
    The d=2 thin-plate semi-kernel ``r^2 log(r) / (8 pi)``. It is only
    conditionally positive definite, so fits must impose ``S*' c = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

FAMILIES = ("cubic-1d", "ssanova-2way", "thinplate-2d")

# short names accepted on the command line
ALIASES = {
    "cubic": "cubic-1d",
    "ssanova": "ssanova-2way",
    "tps": "thinplate-2d",
}


class KernelDomainError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    family: str
    d: int

    def __post_init__(self):
        family = ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if family == "cubic-1d" and self.d != 1:
            raise ValueError("cubic-1d requires d=1")
        if family == "thinplate-2d" and self.d != 2:
            raise ValueError("thinplate-2d requires d=2")

    @property
    def m(self) -> int:
        """Dimension of the null space."""
        if self.family == "cubic-1d":
            return 2
        if self.family == "thinplate-2d":
            return 3
        return 1 + self.d + self.d * (self.d - 1) // 2

    @property
    def conditional(self) -> bool:
        """True when the kernel needs the ``S*' c = 0`` side condition."""
        return self.family == "thinplate-2d"


def k1(x):
    return np.asarray(x, dtype=float) - 0.5


def k2(x):
    u = k1(x)
    return (u * u - 1.0 / 12.0) / 2.0


def k4(x):
    u = k1(x)
    u2 = u * u
    return (u2 * u2 - u2 / 2.0 + 7.0 / 240.0) / 24.0


def cubic_rk(s, t):
    """Cubic-spline kernel ``k2(s) k2(t) - k4(|s - t|)`` (broadcasting)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return k2(s) * k2(t) - k4(np.abs(s - t))


def linear_rk(s, t):
    return k1(s) * k1(t)


def _as_points(x, d: int, name: str = "points") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, d) if d > 1 else arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"{name} must have {d} columns, got shape {np.shape(x)}")
    return arr


def _check_unit_cube(x: np.ndarray, name: str, tol: float = 1e-12):
    if x.size and (np.nanmin(x) < -tol or np.nanmax(x) > 1 + tol or not np.all(np.isfinite(x))):
        raise KernelDomainError(f"{name} must lie in [0, 1]^d")


def null_basis(spec: KernelSpec, x) -> np.ndarray:
    """Evaluate the null-space basis at each row of ``x``; returns ``(n, m)``.

    Column order: constant, then ``k1(x_j)`` for each coordinate, then
    ``k1(x_j) k1(x_k)`` for ``j < k`` in lexicographic order (ssanova);
    ``(1, x1, x2)`` for thin-plate.
    """
    x = _as_points(x, spec.d)
    _check_unit_cube(x, "x")
    if spec.family == "thinplate-2d":
        return np.column_stack([np.ones(len(x)), x[:, 0], x[:, 1]])
    lin = k1(x)
    cols = [np.ones(len(x))]
    cols.extend(lin[:, j] for j in range(spec.d))
    if spec.family == "ssanova-2way":
        cols.extend(lin[:, j] * lin[:, k] for j, k in combinations(range(spec.d), 2))
    return np.column_stack(cols)


def null_basis_eval(spec: KernelSpec, x) -> np.ndarray:
    """Null-space basis at a single point, length ``m``."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != spec.d:
        raise ValueError(f"point has dimension {x.shape[1]}, kernel expects {spec.d}")
    return null_basis(spec, x)[0]


def gram(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix with entry ``(i, j) = R(A_i, B_j)``."""
    A = _as_points(A, spec.d, "A")
    B = _as_points(B, spec.d, "B")
    if len(A) == 0 or len(B) == 0:
        raise ValueError("gram needs non-empty point sets")
    _check_unit_cube(A, "A")
    _check_unit_cube(B, "B")

    if spec.family == "thinplate-2d":
        diff0 = A[:, None, 0] - B[None, :, 0]
        diff1 = A[:, None, 1] - B[None, :, 1]
        r2 = diff0 * diff0 + diff1 * diff1
        out = np.zeros_like(r2)
        pos = r2 > 0
        # r^2 log r = r^2 log(r^2) / 2
        out[pos] = r2[pos] * np.log(r2[pos]) / (16.0 * np.pi)
        return out

    cub = [cubic_rk(A[:, None, j], B[None, :, j]) for j in range(spec.d)]
    out = np.zeros((len(A), len(B)))
    for Kc in cub:
        out += Kc
    if spec.family == "ssanova-2way" and spec.d > 1:
        lin = [linear_rk(A[:, None, j], B[None, :, j]) for j in range(spec.d)]
        for j, k in combinations(range(spec.d), 2):
            out += lin[j] * cub[k] + cub[j] * lin[k] + cub[j] * cub[k]
    return out


def rk_eval(spec: KernelSpec, s, t) -> float:
    """Reproducing kernel at a single pair of points."""
    s = np.asarray(s, dtype=float).reshape(1, -1)
    t = np.asarray(t, dtype=float).reshape(1, -1)
    if s.shape[1] != spec.d or t.shape[1] != spec.d:
        raise ValueError("point dimension does not match kernel spec")
    return float(gram(spec, s, t)[0, 0])
