import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import qmc

from sbspline.design import (
    SOBOL_MAX_DIM,
    DimensionError,
    DiscrepancyBudgetError,
    generate_design,
    local_discrepancy,
    star_discrepancy,
)


# --- independent Sobol reference -------------------------------------------------
# primitive polynomials as integers (leading and trailing bits included) and
# their initial direction numbers, written straight from the Joe-Kuo table
_POLY = {2: (3, [1]), 3: (7, [1, 3]), 4: (11, [1, 3, 1])}


def _directions(poly, m_init, bits=32):
    s = poly.bit_length() - 1
    m = list(m_init)
    for k in range(s, bits):
        val = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (poly >> (s - i)) & 1:
                val ^= m[k - i] << i
        m.append(val)
    return [m[k] << (bits - 1 - k) for k in range(bits)]


def reference_sobol(q, d, bits=32):
    dirs = [[1 << (bits - 1 - k) for k in range(bits)]]
    for j in range(2, d + 1):
        dirs.append(_directions(*_POLY[j]))
    out = []
    for i in range(q):
        g = i ^ (i >> 1)
        row = []
        for v in dirs:
            acc, k = 0, 0
            while g >> k:
                if (g >> k) & 1:
                    acc ^= v[k]
                k += 1
            row.append(Fraction(acc, 1 << bits))
        out.append(row)
    return out


def brute_star(points):
    """Loop over all (q+1)^d grid corners with open and closed counts."""
    pts = [tuple(p) for p in np.atleast_2d(points)]
    q, d = len(pts), len(pts[0])
    axes = [sorted(set(p[j] for p in pts) | {1.0}) for j in range(d)]
    best = 0.0
    for corner in itertools.product(*axes):
        vol = float(np.prod(corner))
        open_ = sum(all(p[j] < corner[j] for j in range(d)) for p in pts)
        closed = sum(all(p[j] <= corner[j] for j in range(d)) for p in pts)
        best = max(best, vol - open_ / q, closed / q - vol)
    return best


def star_1d_closed_form(x):
    x = np.sort(np.ravel(x))
    q = len(x)
    return 1 / (2 * q) + np.max(np.abs(x - (2 * np.arange(1, q + 1) - 1) / (2 * q)))


# --- generators ---------------------------------------------------------------------

def test_centered_grid():
    pts = generate_design("centered-grid", 5, 1).points
    np.testing.assert_allclose(pts[:, 0], [0.1, 0.3, 0.5, 0.7, 0.9], atol=1e-15)


def test_centered_grid_rejects_d2():
    with pytest.raises(DimensionError):
        generate_design("centered-grid", 5, 2)


@pytest.mark.parametrize("k", range(0, 11))
def test_sobol_first_dimension_dyadic(k):
    pts = generate_design("sobol", 2**k, 1).points[:, 0]
    cells = np.floor(pts * 2**k).astype(int)
    assert sorted(cells) == list(range(2**k))


def test_sobol_matches_independent_reference():
    ours = generate_design("sobol", 64, 2).points
    ref = np.array(reference_sobol(64, 2), dtype=float)
    assert np.array_equal(ours, ref)
    assert np.array_equal(ours[0], [0.0, 0.0])


@pytest.mark.parametrize("d", [3, 4])
def test_sobol_reference_higher_dims(d):
    assert np.array_equal(generate_design("sobol", 128, d).points, np.array(reference_sobol(128, d), float))


@pytest.mark.parametrize("d", range(1, SOBOL_MAX_DIM + 1))
def test_sobol_matches_scipy_unscrambled(d):
    ours = generate_design("sobol", 256, d).points
    theirs = qmc.Sobol(d, scramble=False).random(256)
    assert np.array_equal(ours, theirs)


def test_sobol_dimension_limit():
    with pytest.raises(DimensionError, match=str(SOBOL_MAX_DIM)):
        generate_design("sobol", 8, SOBOL_MAX_DIM + 1)


@pytest.mark.parametrize("method", ["sobol", "lhs"])
def test_deterministic_and_in_range(method):
    a = generate_design(method, 50, 3, seed=11).points
    b = generate_design(method, 50, 3, seed=11).points
    assert a.tobytes() == b.tobytes()
    assert np.all(a >= 0) and np.all(a < 1)


def test_lhs_one_point_per_stratum():
    pts = generate_design("lhs", 20, 4, seed=2).points
    for j in range(4):
        assert sorted(np.floor(pts[:, j] * 20).astype(int)) == list(range(20))
    jit = generate_design("lhs", 20, 4, seed=2, jitter=True).points
    for j in range(4):
        assert sorted(np.floor(jit[:, j] * 20).astype(int)) == list(range(20))


# --- discrepancy ----------------------------------------------------------------------

def test_local_discrepancy_toy():
    # ten points, four of them inside [0, 0.4) x [0, 0.5)
    inside = [[0.1, 0.1], [0.2, 0.4], [0.3, 0.2], [0.35, 0.45]]
    outside = [[0.5, 0.1], [0.1, 0.6], [0.9, 0.9], [0.4, 0.2], [0.7, 0.3], [0.2, 0.5]]
    assert local_discrepancy(inside + outside, [0.4, 0.5]) == pytest.approx(0.2, abs=1e-12)


def test_local_discrepancy_edge_boxes():
    pts = np.random.default_rng(0).uniform(0.01, 0.99, size=(17, 3))
    assert local_discrepancy(pts, [0, 0, 0]) == 0.0
    assert local_discrepancy(pts, [1, 1, 1]) == 0.0


def test_local_discrepancy_domain():
    with pytest.raises(ValueError):
        local_discrepancy([[0.5, 0.5]], [1.2, 0.5])


def test_star_single_point():
    assert float(star_discrepancy([[0.5]])) == 0.5


@pytest.mark.parametrize("q", [1, 2, 5, 16, 33])
def test_star_centered_grid(q):
    val = star_discrepancy(generate_design("centered-grid", q, 1))
    assert val == pytest.approx(1 / (2 * q), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_star_matches_brute_force_2d(seed):
    pts = np.random.default_rng(seed).uniform(size=(32, 2))
    assert float(star_discrepancy(pts)) == pytest.approx(brute_star(pts), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_star_matches_closed_form_1d(seed):
    pts = np.random.default_rng(100 + seed).uniform(size=(25, 1))
    assert float(star_discrepancy(pts)) == pytest.approx(star_1d_closed_form(pts), abs=1e-12)


def test_star_with_repeated_coordinates():
    pts = np.array([[0.25, 0.5], [0.25, 0.75], [0.5, 0.5], [0.0, 0.0]])
    assert float(star_discrepancy(pts)) == pytest.approx(brute_star(pts), abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_approximate_is_lower_bound(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 3
    pts = rng.uniform(size=(20, d))
    exact = star_discrepancy(pts)
    approx = star_discrepancy(pts, "approximate", seed=seed, n_corners=200)
    assert approx.lower_bound and not exact.lower_bound
    assert 0 <= approx <= exact <= 1


def test_budget_error_suggests_approximate():
    pts = generate_design("sobol", 512, 2).points
    with pytest.raises(DiscrepancyBudgetError, match="approximate"):
        star_discrepancy(pts)


@pytest.mark.parametrize("method,d", [("sobol", 1), ("sobol", 2), ("sobol", 3), ("lhs", 2), ("lhs", 3)])
def test_koksma_hlawka_first_coordinate(method, d):
    # h(x) = x_1: variation 1, integral 1/2
    for q in (8, 16, 30):
        pts = generate_design(method, q, d, seed=q).points
        assert abs(pts[:, 0].mean() - 0.5) <= float(star_discrepancy(pts)) + 1e-15


@pytest.mark.parametrize("d,kmax", [(1, 10), (2, 8), (3, 6)])
def test_sobol_discrepancy_non_increasing(d, kmax):
    vals = [float(star_discrepancy(generate_design("sobol", 2**k, d).points)) for k in range(4, kmax + 1)]
    assert all(b <= a for a, b in zip(vals, vals[1:])), vals
