"""Marginal rank transform of raw predictors onto the unit cube."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EmptyInputError(ValueError):
    pass


class NonFiniteInputError(ValueError):
    def __init__(self, row: int, col: int, what: str = "x"):
        super().__init__(f"non-finite value in {what} at row {row}, column {col}")
        self.row = row
        self.col = col


@dataclass
class RawTable:
    """Raw records: ``X`` is n x d, ``Y`` length n."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        self.Y = np.asarray(self.Y, dtype=float).ravel()
        if len(self.X) != len(self.Y):
            raise ValueError(f"X has {len(self.X)} rows but Y has {len(self.Y)}")

    @property
    def n(self) -> int:
        return len(self.Y)

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass
class Dataset:
    """Predictors mapped into [0, 1]^d plus the untouched response."""

    X: np.ndarray
    Y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.Y)

    @property
    def d(self) -> int:
        return self.X.shape[1]


def _validate(raw: RawTable):
    if raw.n == 0:
        raise EmptyInputError("cannot transform an empty table")
    bad = ~np.isfinite(raw.X)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFiniteInputError(int(i), int(j))
    bad_y = ~np.isfinite(raw.Y)
    if bad_y.any():
        raise NonFiniteInputError(int(np.argmax(bad_y)), raw.d, "y")


def rank_scores(column: np.ndarray) -> np.ndarray:
    """``(rank - 0.5) / n`` with ties broken by position (stable sort)."""
    n = len(column)
    order = np.argsort(column, kind="stable")
    out = np.empty(n)
    out[order] = (np.arange(1, n + 1) - 0.5) / n
    return out


def to_unit_cube(raw: RawTable) -> Dataset:
    _validate(raw)
    X = np.column_stack([rank_scores(raw.X[:, j]) for j in range(raw.d)])
    return Dataset(X, raw.Y.copy())


@dataclass
class UnitCubeTransform:
    """The fitted marginal map, reusable on new points.

    New values are placed by linear interpolation between the sorted training
    values and their scores; values beyond the training range are clamped to
    the extreme scores.
    """

    sorted_columns: list

    @classmethod
    def fit(cls, raw: RawTable | np.ndarray) -> "UnitCubeTransform":
        X = raw.X if isinstance(raw, RawTable) else np.asarray(raw, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) == 0:
            raise EmptyInputError("cannot fit a transform on an empty table")
        return cls([np.sort(X[:, j], kind="stable") for j in range(X.shape[1])])

    @property
    def d(self) -> int:
        return len(self.sorted_columns)

    def apply(self, X_new) -> np.ndarray:
        X_new = np.asarray(X_new, dtype=float)
        if X_new.ndim == 1:
            X_new = X_new[:, None] if self.d == 1 else X_new[None, :]
        if X_new.shape[1] != self.d:
            raise ValueError(f"expected {self.d} columns, got {X_new.shape[1]}")
        out = np.empty_like(X_new)
        for j, col in enumerate(self.sorted_columns):
            n = len(col)
            scores = (np.arange(1, n + 1) - 0.5) / n
            # ties share the mean of their scores so interp stays a function
            uniq, first, counts = np.unique(col, return_index=True, return_counts=True)
            tied = scores[first] + (counts - 1) / (2.0 * n)
            out[:, j] = np.interp(X_new[:, j], uniq, tied)
        return out
