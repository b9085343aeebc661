"""Basis-location subsampling: uniform, response-sliced adaptive, and space-filling."""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .design import generate_design, sobol_points
from .neighbors import kd_build, select_nearest

MAX_TOPUP_ROUNDS = 5

# CLI spellings of the three methods
METHOD_NAMES = {
    "unif": "uniform",
    "uniform": "uniform",
    "abs": "adaptive",
    "adaptive": "adaptive",
    "sbs": "space-filling",
    "space-filling": "space-filling",
}


class QuotaWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QRule:
    """``q = round(coefficient * n ** exponent)``, at least 1."""

    coefficient: float
    exponent: float

    def __post_init__(self):
        if not self.coefficient > 0:
            raise ValueError("q-rule coefficient must be positive")
        if not 0 < self.exponent < 1:
            raise ValueError("q-rule exponent must lie in (0, 1)")

    _PATTERN = re.compile(
        r"^\s*(?P<c>\d+(?:\.\d*)?)\s*\*\s*n\s*\^\s*(?:\(\s*(?P<num>\d+)\s*/\s*(?P<den>\d+)\s*\)"
        r"|(?P<dec>\d*\.\d+))\s*$"
    )

    @classmethod
    def parse(cls, text: str) -> "QRule":
        """Parse rules written like ``"5*n^(2/9)"`` or ``"10*n^0.111"``."""
        m = cls._PATTERN.match(text)
        if m is None:
            raise ValueError(f"cannot parse q-rule {text!r}; expected e.g. '5*n^(2/9)'")
        if m.group("dec") is not None:
            exponent = float(m.group("dec"))
            label = m.group("dec")
        else:
            exponent = int(m.group("num")) / int(m.group("den"))
            label = f"({m.group('num')}/{m.group('den')})"
        rule = cls(float(m.group("c")), exponent)
        object.__setattr__(rule, "_label", f"{m.group('c')}*n^{label}")
        return rule

    def __str__(self):
        return getattr(self, "_label", f"{self.coefficient:g}*n^{self.exponent:g}")

    def __call__(self, n: int) -> int:
        return essential_q(self, n)


def essential_q(rule: QRule, n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(1, int(math.floor(rule.coefficient * n**rule.exponent + 0.5)))


@dataclass
class BasisSelection:
    indices: np.ndarray
    method: str
    seed: int
    q_requested: int
    info: dict = field(default_factory=dict)

    @property
    def q_eff(self) -> int:
        return len(self.indices)


def _check_q(n: int, q: int):
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > n:
        raise ValueError(f"cannot select q={q} basis locations from n={n} rows")


def select_uniform(data, q: int, seed: int = 0) -> BasisSelection:
    n = len(data.Y)
    _check_q(n, q)
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=q, replace=False)
    return BasisSelection(idx, "uniform", seed, q)


def slice_quotas(sizes, q: int) -> list[int]:
    """Near-equal quotas summing to ``q``, shifted off slices too small to fill them.

    The remainder ``q mod K`` goes to the first slices. A slice whose quota
    exceeds its size passes the excess to the nearest slices with room,
    looking right before left at each distance.
    """
    K = len(sizes)
    base, extra = divmod(q, K)
    quotas = [base + (1 if k < extra else 0) for k in range(K)]
    moved = False
    for k in range(K):
        excess = quotas[k] - sizes[k]
        if excess <= 0:
            continue
        moved = True
        quotas[k] = sizes[k]
        for dist in range(1, K):
            for j in (k + dist, k - dist):
                if 0 <= j < K and excess > 0:
                    room = sizes[j] - quotas[j]
                    give = min(room, excess)
                    if give > 0:
                        quotas[j] += give
                        excess -= give
            if excess == 0:
                break
    if moved:
        warnings.warn("slice quota exceeded slice size; redistributed to neighbouring slices", QuotaWarning)
    return quotas


def select_adaptive(data, q: int, slices: int = 5, seed: int = 0) -> BasisSelection:
    """Stratified draw over response-quantile slices.

    Rows are sorted by response (stable), cut into ``slices`` groups of
    near-equal size, and each group contributes ``floor(q/K)`` or
    ``ceil(q/K)`` rows drawn without replacement.
    """
    Y = np.asarray(data.Y, dtype=float)
    n = len(Y)
    _check_q(n, q)
    if not 1 <= slices <= q:
        raise ValueError("slice count K must satisfy 1 <= K <= q")
    order = np.argsort(Y, kind="stable")
    groups = np.array_split(order, slices)
    quotas = slice_quotas([len(g) for g in groups], q)
    rng = np.random.default_rng(seed)
    picked = [rng.choice(g, size=k, replace=False) for g, k in zip(groups, quotas)]
    idx = np.concatenate(picked).astype(int)
    return BasisSelection(idx, "adaptive", seed, q, {"slices": slices, "quotas": quotas})


def _next_design(method: str, start: int, count: int, d: int, seed: int, round_: int):
    if method == "sobol":
        return sobol_points(start + count, d)[start:]
    # non-sequential designs: a fresh, differently seeded set
    return generate_design(method, count, d, seed=seed + 7919 * round_).points


def select_space_filling(data, q: int, design: str = "sobol", seed: int = 0, tree=None,
                         eps: float = 0.0) -> BasisSelection:
    """Rows nearest to a space-filling design.

    Design points are matched to their nearest rows with a k-d tree;
    repeated matches are dropped (first occurrence wins) and replaced by
    matching further design points against the rows not yet chosen, for at
    most ``MAX_TOPUP_ROUNDS`` rounds. When the unchosen rows are no more
    numerous than the shortfall, they are all taken.
    """
    X = np.asarray(data.X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    _check_q(n, q)
    tree = kd_build(X) if tree is None else tree
    pts = generate_design(design, q, d, seed).points
    nn = select_nearest(tree, pts, eps=eps)

    taken = np.zeros(n, dtype=bool)
    chosen = []
    for i in nn:
        if not taken[i]:
            taken[i] = True
            chosen.append(int(i))
    used = [pts]
    generated = q
    rounds = 0
    while len(chosen) < q and rounds < MAX_TOPUP_ROUNDS:
        rounds += 1
        need = q - len(chosen)
        if n - len(chosen) <= need:
            rest = np.flatnonzero(~taken)
            taken[rest] = True
            chosen.extend(int(i) for i in rest)
            break
        extra = _next_design(design, generated, need, d, seed, rounds)
        generated += need
        used.append(extra)
        for i in select_nearest(tree, extra, eps=eps, exclude=taken):
            if i >= 0 and not taken[i]:
                taken[i] = True
                chosen.append(int(i))

    info = {
        "design": design,
        "nearest": nn,
        "design_points": np.vstack(used),
        "rounds": rounds,
    }
    return BasisSelection(np.asarray(chosen, dtype=int), "space-filling", seed, q, info)


def select_basis(data, q: int, method: str, seed: int = 0, **kwargs) -> BasisSelection:
    """Dispatch on ``method`` (``unif``/``abs``/``sbs`` or the long names)."""
    name = METHOD_NAMES.get(method)
    if name is None:
        raise ValueError(f"unknown selection method {method!r}")
    if name == "uniform":
        return select_uniform(data, q, seed)
    if name == "adaptive":
        return select_adaptive(data, q, kwargs.get("slices", 5), seed)
    return select_space_filling(data, q, kwargs.get("design", "sobol"), seed,
                                tree=kwargs.get("tree"), eps=kwargs.get("eps", 0.0))
