"""Exact (or optionally eps-approximate) nearest-neighbour search with a k-d tree."""
from __future__ import annotations

import numpy as np


def sq_dist(P: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, summed coordinate by coordinate in order."""
    acc = (P[:, 0] - s[0]) ** 2
    for j in range(1, P.shape[1]):
        acc += (P[:, j] - s[j]) ** 2
    return acc


class KdTree:
    """Balanced k-d tree over the rows of ``X``.

    Nodes split at the median of the coordinate with the widest spread and
    stop splitting once a node holds ``leaf_size`` points or fewer. The tree is
    immutable after construction.

    Distance ties are broken towards the smallest row index, so queries agree
    with a linear scan using ``argmin`` on the same squared distances.
    """

    def __init__(self, X, leaf_size: int = 16):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) == 0:
            raise ValueError("cannot build a k-d tree on an empty point set")
        self.X = X
        self.leaf_size = max(1, int(leaf_size))
        self.n, self.d = X.shape
        # node arrays; leaves have split_dim == -1
        self._dim = []
        self._val = []
        self._left = []
        self._right = []
        self._start = []
        self._stop = []
        self._lo = []
        self._hi = []
        self.order = np.arange(self.n)
        self._build(0, self.n)
        self._dim = np.array(self._dim)
        self._val = np.array(self._val)
        self._left = np.array(self._left)
        self._right = np.array(self._right)
        self._start = np.array(self._start)
        self._stop = np.array(self._stop)
        self._lo = np.array(self._lo)
        self._hi = np.array(self._hi)
        self._leaf_points = self.X[self.order]

    def _new_node(self, start, stop, lo, hi):
        self._dim.append(-1)
        self._val.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._start.append(start)
        self._stop.append(stop)
        self._lo.append(lo)
        self._hi.append(hi)
        return len(self._dim) - 1

    def _build(self, start, stop):
        pts = self.X[self.order[start:stop]]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        node = self._new_node(start, stop, lo, hi)
        if stop - start <= self.leaf_size:
            return node
        spread = hi - lo
        dim = int(np.argmax(spread))
        if spread[dim] == 0.0:
            return node
        mid = (stop - start) // 2
        idx = self.order[start:stop]
        part = np.argpartition(self.X[idx, dim], mid, kind="introselect")
        self.order[start:stop] = idx[part]
        self._dim[node] = dim
        self._val[node] = float(self.X[self.order[start + mid], dim])
        left = self._build(start, start + mid)
        right = self._build(start + mid, stop)
        self._left[node] = left
        self._right[node] = right
        return node

    def __len__(self):
        return self.n

    def _box_dist2(self, node, s):
        gap = np.maximum(self._lo[node] - s, 0.0) + np.maximum(s - self._hi[node], 0.0)
        return float(gap @ gap)

    def query(self, s, eps: float = 0.0, exclude=None) -> tuple[int, float]:
        """Nearest row to ``s``; returns ``(index, squared distance)``.

        With ``eps > 0`` the answer is within a factor ``1 + eps`` of the true
        nearest distance. ``exclude`` is an optional boolean mask of rows that
        may not be returned.
        """
        s = np.asarray(s, dtype=float).ravel()
        if s.shape[0] != self.d:
            raise ValueError(f"query point has dimension {s.shape[0]}, tree has {self.d}")
        # slack keeps equal-distance leaves alive despite rounding in the box bound
        shrink = (1.0 + 1e-10) / (1.0 + eps) ** 2
        best_i, best_d2 = -1, np.inf
        stack = [(0.0, 0)]
        while stack:
            bound, node = stack.pop()
            if bound > best_d2 * shrink:
                continue
            dim = self._dim[node]
            if dim < 0:
                a, b = self._start[node], self._stop[node]
                d2 = sq_dist(self._leaf_points[a:b], s)
                rows = self.order[a:b]
                if exclude is not None:
                    d2 = np.where(exclude[rows], np.inf, d2)
                k = int(np.argmin(d2))
                dk = d2[k]
                if dk < best_d2 or (dk == best_d2 and np.isfinite(dk)):
                    # lowest row index among the minimizers in this leaf
                    cand = rows[d2 == dk].min()
                    if dk < best_d2 or cand < best_i:
                        best_i, best_d2 = int(cand), float(dk)
                continue
            left, right = self._left[node], self._right[node]
            dl, dr = self._box_dist2(left, s), self._box_dist2(right, s)
            # push the farther child first so the nearer one is explored next
            if dl <= dr:
                stack.append((dr, right))
                stack.append((dl, left))
            else:
                stack.append((dl, left))
                stack.append((dr, right))
        return best_i, best_d2


def kd_build(X, leaf_size: int = 16) -> KdTree:
    return KdTree(X, leaf_size=leaf_size)


def select_nearest(tree: KdTree, S, eps: float = 0.0, exclude=None) -> np.ndarray:
    """Index of the nearest tree row for every design point (may repeat)."""
    pts = getattr(S, "points", S)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if tree.d == 1 else pts[None, :]
    out = np.empty(len(pts), dtype=int)
    for i, s in enumerate(pts):
        out[i] = tree.query(s, eps=eps, exclude=exclude)[0]
    return out


def brute_nearest(X, S) -> np.ndarray:
    """Linear scan with the same squared-distance formula and tie rule."""
    X = np.asarray(X, dtype=float)
    S = np.asarray(getattr(S, "points", S), dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if S.ndim == 1:
        S = S[:, None]
    out = np.empty(len(S), dtype=int)
    for i, s in enumerate(S):
        out[i] = int(np.argmin(sq_dist(X, s)))
    return out
