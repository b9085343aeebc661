import math

import numpy as np
import pytest
import sympy as sp
from scipy import linalg

from sbspline.harness import eval_setting, make_dataset
from sbspline.kernels import KernelSpec, gram, null_basis
from sbspline.selection import QRule, select_space_filling, select_uniform
from sbspline.solver import (
    DegenerateDofError,
    FittedSpline,
    RankError,
    criterion,
    default_grid,
    fit_full_oracle,
    fit_restricted,
    gcv_select,
    predict,
)
from sbspline.transform import Dataset, to_unit_cube


def smooth_data(n, d, seed, noise=0.1):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, d))
    eta = np.sin(2 * np.pi * X[:, 0]) + (X[:, 1] ** 2 if d > 1 else 0)
    return Dataset(X, eta + noise * rng.normal(size=n)), eta


@pytest.mark.parametrize("family,d", [("ssanova", 2), ("cubic", 1), ("tps", 2)])
@pytest.mark.parametrize("lam", [1e-4, 1e-2, 1.0])
def test_full_basis_matches_oracle(family, d, lam):
    data, _ = smooth_data(120, d, 0)
    spec = KernelSpec(family, d)
    restricted = fit_restricted(data, np.arange(120), spec, lam)
    oracle = fit_full_oracle(data, spec, lam)
    Xt = np.random.default_rng(1).uniform(size=(300, d))
    a, b = restricted.predict(Xt), oracle.predict(Xt)
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(b))


def test_penalty_dominated_limit_is_ols():
    data, _ = smooth_data(200, 2, 2)
    spec = KernelSpec("ssanova", 2)
    sel = select_uniform(data, 30, 0)
    fit = fit_restricted(data, sel, spec, 1e8)
    S = null_basis(spec, data.X)
    ols = np.linalg.lstsq(S, data.Y, rcond=None)[0]
    assert np.linalg.norm(fit.c_coef) <= 1e-4 * np.linalg.norm(data.Y)
    np.testing.assert_allclose(fit.d_coef, ols, rtol=1e-4, atol=1e-4 * np.abs(ols).max())


def test_near_interpolation():
    rng = np.random.default_rng(3)
    X = np.sort(rng.uniform(size=50))[:, None]
    Y = np.sin(3 * X[:, 0]) + X[:, 0] ** 2
    fit = fit_restricted(Dataset(X, Y), np.arange(50), KernelSpec("cubic", 1), 1e-10)
    rms = lambda v: np.sqrt(np.mean(v**2))  # noqa: E731
    assert rms(Y - fit.predict(X)) <= 1e-4 * rms(Y)


def test_two_point_symbolic_solve():
    # three points so the kernel part is not trivially zero
    pts = [sp.Rational(1, 5), sp.Rational(1, 2), sp.Rational(9, 10)]
    ys = [sp.Rational(1), sp.Rational(-2), sp.Rational(3, 2)]
    lam = sp.Rational(1, 100)
    k1 = lambda x: x - sp.Rational(1, 2)  # noqa: E731
    k2 = lambda x: (k1(x) ** 2 - sp.Rational(1, 12)) / 2  # noqa: E731
    k4 = lambda x: (k1(x) ** 4 - k1(x) ** 2 / 2 + sp.Rational(7, 240)) / 24  # noqa: E731
    R = sp.Matrix(3, 3, lambda i, j: k2(pts[i]) * k2(pts[j]) - k4(abs(pts[i] - pts[j])))
    S = sp.Matrix(3, 2, lambda i, j: 1 if j == 0 else k1(pts[i]))
    n = 3
    K = sp.zeros(5, 5)
    K[:3, :3] = R + n * lam * sp.eye(3)
    K[:3, 3:] = S
    K[3:, :3] = S.T
    sol = K.LUsolve(sp.Matrix(ys + [0, 0]))
    data = Dataset(np.array([[float(p)] for p in pts]), np.array([float(y) for y in ys]))
    fit = fit_full_oracle(data, KernelSpec("cubic", 1), float(lam))
    np.testing.assert_allclose(fit.c_coef, [float(v) for v in sol[:3]], rtol=1e-10)
    np.testing.assert_allclose(fit.d_coef, [float(v) for v in sol[3:]], rtol=1e-10)
    # with n = m the null space interpolates and the kernel part vanishes
    two = fit_full_oracle(Dataset(data.X[:2], data.Y[:2]), KernelSpec("cubic", 1), 0.5)
    assert np.allclose(two.c_coef, 0, atol=1e-12)
    np.testing.assert_allclose(two.fitted, data.Y[:2], atol=1e-12)


def test_lambda_doubling_does_not_decrease_criterion():
    data, _ = smooth_data(150, 2, 4)
    spec = KernelSpec("ssanova", 2)
    sel = select_uniform(data, 25, 1)
    basis = data.X[sel.indices]
    for lam in (1e-6, 1e-4, 1e-2):
        fit = fit_restricted(data, sel, spec, lam)
        old = criterion(data, basis, spec, lam, fit.d_coef, fit.c_coef)
        new = criterion(data, basis, spec, 2 * lam, fit.d_coef, fit.c_coef)
        assert new >= old


def test_criterion_local_optimality():
    rng = np.random.default_rng(5)
    data, _ = smooth_data(300, 2, 5)
    spec = KernelSpec("ssanova", 2)
    sel = select_space_filling(data, 30)
    basis = data.X[sel.indices]
    fit = fit_restricted(data, sel, spec, 1e-3)
    base = criterion(data, basis, spec, 1e-3, fit.d_coef, fit.c_coef)
    theta = np.concatenate([fit.d_coef, fit.c_coef])
    for _ in range(50):
        u = rng.normal(size=theta.size)
        u *= 1e-3 / np.linalg.norm(u)
        for sgn in (1, -1):
            t = theta + sgn * u
            assert criterion(data, basis, spec, 1e-3, t[:spec.m], t[spec.m:]) >= base - 1e-12 * abs(base)


@pytest.mark.parametrize("seed", range(10))
def test_shrinkage_monotone(seed):
    data, _ = smooth_data(200, 2, 100 + seed)
    spec = KernelSpec("ssanova", 2)
    sel = select_uniform(data, 20, seed)
    R_ss = gram(spec, data.X[sel.indices], data.X[sel.indices])
    norms = []
    for lam in np.logspace(-7, 1, 9):
        c = fit_restricted(data, sel, spec, lam).c_coef
        norms.append(c @ R_ss @ c)
    assert all(b <= a * (1 + 1e-8) + 1e-14 for a, b in zip(norms, norms[1:])), norms


def test_trace_decreases_along_grid():
    data, _ = smooth_data(400, 2, 6)
    lam, model = gcv_select(data, select_space_filling(data, 40), KernelSpec("ssanova", 2))
    edf = np.array(model.diagnostics["grid_edf"])
    assert np.all(np.diff(edf) < 0)
    assert 0 < model.diagnostics["edf"] < 400
    assert min(model.diagnostics["grid_scores"]) >= model.diagnostics["gcv"] - 1e-15
    assert len(model.diagnostics["grid"]) == 40 and default_grid()[0] == 1e-8


def test_constant_response():
    rng = np.random.default_rng(7)
    data = Dataset(rng.uniform(size=(100, 2)), np.full(100, 3.25))
    sel = select_uniform(data, 15, 0)
    lam, model = gcv_select(data, sel, KernelSpec("ssanova", 2), grid=np.logspace(-6, 2, 9), refine=False)
    assert np.linalg.norm(model.c_coef) < 1e-8
    np.testing.assert_allclose(model.predict(data.X), 3.25, atol=1e-8)
    scores = np.array(model.diagnostics["grid_scores"])
    assert np.ptp(scores) <= 1e-10


def test_sweep_order_independent():
    data, _ = smooth_data(200, 2, 8)
    sel = select_uniform(data, 20, 0)
    spec = KernelSpec("ssanova", 2)
    grid = np.logspace(-6, 0, 7)
    _, a = gcv_select(data, sel, spec, grid=grid, refine=False)
    _, b = gcv_select(data, sel, spec, grid=grid[::-1], refine=False)
    np.testing.assert_allclose(a.diagnostics["grid_scores"], b.diagnostics["grid_scores"][::-1], rtol=1e-12)


def loop_predict(model, X):
    from sbspline.kernels import null_basis_eval, rk_eval
    out = []
    for x in X:
        v = float(np.dot(null_basis_eval(model.spec, x), model.d_coef))
        for b, c in zip(model.basis, model.c_coef):
            v += c * rk_eval(model.spec, b, x)
        out.append(v)
    return np.array(out)


@pytest.mark.parametrize("family,d", [("ssanova", 3), ("tps", 2), ("cubic", 1)])
def test_predict_against_loop(family, d):
    data, _ = smooth_data(150, d, 9)
    model = fit_restricted(data, select_uniform(data, 12, 0), KernelSpec(family, d), 1e-3)
    X = np.random.default_rng(10).uniform(size=(20, d))
    assert np.max(np.abs(model.predict(X) - loop_predict(model, X))) <= 1e-10
    assert np.max(np.abs(predict(model, data.X) - model.fitted)) <= 1e-10


def test_zero_coefficients_predict_zero():
    spec = KernelSpec("ssanova", 2)
    model = FittedSpline(spec, np.full((3, 2), 0.5), np.zeros(spec.m), np.zeros(3), 1.0, {})
    assert np.all(model.predict(np.random.default_rng(0).uniform(size=(5, 2))) == 0)


def test_thinplate_constraint_holds():
    data, _ = smooth_data(200, 2, 11)
    spec = KernelSpec("tps", 2)
    sel = select_space_filling(data, 30)
    model = fit_restricted(data, sel, spec, 1e-4)
    assert np.abs(null_basis(spec, model.basis).T @ model.c_coef).max() < 1e-8


def test_restricted_close_to_full_setting1():
    ratios = []
    for seed in range(10):
        raw, _ = make_dataset(1, 512, 5, seed)
        data = to_unit_cube(raw)
        Xt = np.random.default_rng(1000 + seed).uniform(size=(1000, 2))
        truth = eval_setting(1, Xt)
        spec = KernelSpec("ssanova", 2)
        q = math.ceil(5 * 512 ** (2 / 9))
        _, full_gcv = gcv_select(data, np.arange(512), spec, refine=False)
        full = fit_full_oracle(Dataset(raw.X, raw.Y), spec, full_gcv.lam)
        _, sub = gcv_select(Dataset(raw.X, raw.Y), select_space_filling(Dataset(raw.X, raw.Y), q), spec)
        ratios.append(np.mean((sub.predict(Xt) - truth) ** 2) / np.mean((full.predict(Xt) - truth) ** 2))
    assert np.median(ratios) <= 3, ratios


def test_errors():
    data, _ = smooth_data(30, 2, 12)
    spec = KernelSpec("ssanova", 2)
    with pytest.raises(ValueError):
        fit_restricted(data, [0, 1], spec, 0.0)
    with pytest.raises(ValueError):
        fit_full_oracle(Dataset(np.full((2001, 1), 0.5), np.zeros(2001)), KernelSpec("cubic", 1), 1.0)
    with pytest.raises(RankError):
        fit_full_oracle(Dataset(data.X[:3], data.Y[:3]), spec, 1.0)
    with pytest.raises(RankError):
        fit_restricted(Dataset(data.X[:3], data.Y[:3]), [0], spec, 1.0)
    with pytest.raises(DegenerateDofError):
        fit_restricted(Dataset(data.X[:4], data.Y[:4]), [0], spec, 1e-3)
    with pytest.raises(ValueError):
        gcv_select(data, [0, 1], spec, grid=[])
    model = fit_restricted(data, [0, 1, 2], spec, 1.0)
    with pytest.raises(ValueError):
        model.predict(np.zeros((3, 3)))
