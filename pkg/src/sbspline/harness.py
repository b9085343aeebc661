"""Simulation benchmark and the gridded prediction workflow.

The test functions are the additive building blocks ``g1..g4`` on [0, 1] and
the Gaussian bumps ``h1, h2`` on [0, 1]^2, combined into four regression
settings of dimension 2, 2, 4 and 6.
"""
from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from .io import read_table, write_matrix
from .kernels import KernelSpec
from .selection import METHOD_NAMES, QRule, select_basis
from .solver import fit_restricted, gcv_select
from .transform import RawTable, UnitCubeTransform, to_unit_cube

SIGMA1 = 0.3
SIGMA2 = 0.4
SETTING_DIMS = {1: 2, 2: 2, 3: 4, 4: 6}
REFERENCE_SIZE = 100_000
REFERENCE_SEED = 20_200_101


def _unit(t, name):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
        raise ValueError(f"{name} is defined on [0, 1]")
    return t


def g1(t):
    return _unit(t, "g1") * 1.0


def g2(t):
    t = _unit(t, "g2")
    return (2.0 * t - 1.0) ** 2


def g3(t):
    s = np.sin(2.0 * np.pi * _unit(t, "g3"))
    return s / (2.0 - s)


def g4(t):
    w = 2.0 * np.pi * _unit(t, "g4")
    s, c = np.sin(w), np.cos(w)
    return 0.1 * s + 0.2 * c + 0.3 * s**2 + 0.4 * c**3 + 0.5 * s**3


def _bump(t1, t2, height, c1, c2, name):
    t1, t2 = _unit(t1, name), _unit(t2, name)
    scale = height / (np.pi * SIGMA1 * SIGMA2)
    return scale * np.exp(-((t1 - c1) ** 2) / SIGMA1**2 - ((t2 - c2) ** 2) / SIGMA2**2)


def h1(t1, t2):
    return _bump(t1, t2, 0.75, 0.2, 0.3, "h1")


def h2(t1, t2):
    return _bump(t1, t2, 0.45, 0.7, 0.8, "h2")


def h(t1, t2):
    return h1(t1, t2) + h2(t1, t2)


BUILDING_BLOCKS = {"g1": g1, "g2": g2, "g3": g3, "g4": g4, "h1": h1, "h2": h2}


def eval_building_block(name: str, *t):
    try:
        f = BUILDING_BLOCKS[name]
    except KeyError:
        raise ValueError(f"unknown building block {name!r}") from None
    return f(*t)


def eval_setting(setting: int, x) -> np.ndarray:
    """True regression function of a setting at each row of ``x``."""
    if setting not in SETTING_DIMS:
        raise ValueError(f"setting must be one of {sorted(SETTING_DIMS)}")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != SETTING_DIMS[setting]:
        raise ValueError(f"setting {setting} takes d={SETTING_DIMS[setting]} inputs, got {x.shape[1]}")
    c = x.T
    if setting == 1:
        out = g1(c[0] * c[1]) + g2(c[1]) + g3(c[0]) + g4(c[1]) + g3((c[0] + c[1]) / 2)
    elif setting == 2:
        out = h1(c[0], c[1]) + h2(c[0], c[1])
    elif setting == 3:
        out = (g1(c[0]) + g2(c[1]) + g3(c[2]) + 2 * g1((c[0] + c[3]) / 2)
               + 2 * g2((c[1] + c[2]) / 2) + 2 * g3((c[0] + c[2]) / 2))
    else:
        out = h(c[0], c[1]) + h(c[0], c[4])
    return out[0] if scalar else out


@lru_cache(maxsize=None)
def signal_variance(setting: int) -> float:
    """Variance of the true function under the uniform design (fixed-seed Monte Carlo)."""
    rng = np.random.default_rng([REFERENCE_SEED, setting])
    ref = rng.uniform(size=(REFERENCE_SIZE, SETTING_DIMS[setting]))
    return float(np.var(eval_setting(setting, ref)))


def noise_variance(setting: int, snr: float) -> float:
    if snr <= 0:
        raise ValueError("SNR must be positive")
    return signal_variance(setting) / snr


def make_dataset(setting: int, n: int, snr: float, seed) -> tuple[RawTable, np.ndarray]:
    """Uniform predictors, true values and a noisy response at the given SNR."""
    sigma2 = noise_variance(setting, snr)
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, SETTING_DIMS[setting]))
    eta = eval_setting(setting, X)
    Y = eta + rng.normal(scale=np.sqrt(sigma2), size=n)
    return RawTable(X, Y), eta


def mse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} vs {truth.size}")
    if pred.size == 0:
        raise ValueError("need at least one test point")
    diff = pred - truth
    return float(diff @ diff / diff.size)


# --------------------------------------------------------------------- simulation

@dataclass
class SimulationConfig:
    setting: int = 1
    ns: tuple = (1024,)
    snr: float = 5.0
    q_rules: tuple = ("10*n^(1/9)",)
    methods: tuple = ("sbs", "abs", "unif")
    replicates: int = 10
    seed: int = 7
    n_test: int = 5000
    kernel: str = "ssanova"
    design: str = "sobol"
    slices: int = 5
    grid: tuple | None = None

    def __post_init__(self):
        if self.setting not in SETTING_DIMS:
            raise ValueError(f"setting must be one of {sorted(SETTING_DIMS)}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if isinstance(self.ns, int):
            self.ns = (self.ns,)
        if isinstance(self.q_rules, (str, QRule)):
            self.q_rules = (self.q_rules,)
        if isinstance(self.methods, str):
            self.methods = (self.methods,)
        for mth in self.methods:
            if mth not in METHOD_NAMES:
                raise ValueError(f"unknown method {mth!r}")

    @property
    def d(self) -> int:
        return SETTING_DIMS[self.setting]


@dataclass
class ResultRow:
    setting: int
    method: str
    n: int
    q_rule: str
    q_eff: int
    snr: float
    rep_count: int
    mse_mean: float
    mse_se: float
    fit_seconds_mean: float


RESULT_COLUMNS = [f.name for f in fields(ResultRow)]

# stream tags for the seed splitter
_DATA, _TEST, _SELECT = 0, 1, 2
_METHOD_TAG = {"uniform": 0, "adaptive": 1, "space-filling": 2}


def replicate_seed(master: int, n: int, rep: int, stream: int, extra: int = 0) -> np.random.SeedSequence:
    """Counter-based child seed: depends only on its coordinates, not on run order."""
    return np.random.SeedSequence(entropy=master, spawn_key=(n, rep, stream, extra))


@dataclass
class ReplicateResult:
    mse: float
    fit_seconds: float
    gcv_seconds: float
    q_eff: int
    lam: float
    extra: dict = field(default_factory=dict)


def run_replicate(cfg: SimulationConfig, n: int, rule: str | QRule, method: str, rep: int,
                  lam_override: float | None = None) -> ReplicateResult:
    """One replicate: simulate, transform, select, choose lambda, fit, score."""
    rule = rule if isinstance(rule, QRule) else QRule.parse(rule)
    raw, _ = make_dataset(cfg.setting, n, cfg.snr, replicate_seed(cfg.seed, n, rep, _DATA))
    transform = UnitCubeTransform.fit(raw)
    data = to_unit_cube(raw)
    q = rule(n)
    name = METHOD_NAMES[method]
    sel_seed = int(replicate_seed(cfg.seed, n, rep, _SELECT, _METHOD_TAG[name]).generate_state(1)[0])
    sel = select_basis(data, q, method, sel_seed, design=cfg.design, slices=cfg.slices)
    spec = KernelSpec(cfg.kernel, cfg.d)

    if lam_override is None:
        lam, model = gcv_select(data, sel, spec, cfg.grid)
        gcv_seconds = model.diagnostics["gcv_seconds"]
    else:
        lam, gcv_seconds = lam_override, 0.0

    t0 = time.perf_counter()
    model = fit_restricted(data, sel, spec, lam)
    fit_seconds = time.perf_counter() - t0

    test_rng = np.random.default_rng(replicate_seed(cfg.seed, n, rep, _TEST))
    T = test_rng.uniform(size=(cfg.n_test, cfg.d))
    truth = eval_setting(cfg.setting, T)
    pred = model.predict(transform.apply(T))
    return ReplicateResult(mse(pred, truth), fit_seconds, gcv_seconds, sel.q_eff, lam)


def aggregate(cfg: SimulationConfig, n: int, rule: str, method: str, reps: list) -> ResultRow:
    errs = np.array([r.mse for r in reps])
    se = float(errs.std(ddof=1) / np.sqrt(len(errs))) if len(errs) > 1 else 0.0
    return ResultRow(
        setting=cfg.setting,
        method=method,
        n=n,
        q_rule=str(rule),
        q_eff=int(min(r.q_eff for r in reps)),
        snr=float(cfg.snr),
        rep_count=len(reps),
        mse_mean=float(errs.mean()),
        mse_se=se,
        fit_seconds_mean=float(np.mean([r.fit_seconds for r in reps])),
    )


def run_simulation(cfg: SimulationConfig, progress=None) -> list[ResultRow]:
    """One :class:`ResultRow` per method x n x q-rule.

    Replicates draw their data, test points and selection seeds from
    :func:`replicate_seed`, so a row does not depend on which other rows or
    replicates were run, nor in what order.
    """
    rows = []
    for n in cfg.ns:
        for rule in cfg.q_rules:
            for method in cfg.methods:
                reps = []
                for rep in range(cfg.replicates):
                    try:
                        reps.append(run_replicate(cfg, n, rule, method, rep))
                    except Exception as exc:
                        raise RuntimeError(
                            f"replicate {rep} failed (setting={cfg.setting}, n={n}, method={method}, q_rule={rule})"
                        ) from exc
                row = aggregate(cfg, n, rule, method, reps)
                if progress is not None:
                    progress(row)
                rows.append(row)
    return rows


def write_results(path, rows: list[ResultRow]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])


def read_results(path) -> list[ResultRow]:
    types = {f.name: f.type for f in fields(ResultRow)}
    cast = {"int": int, "float": float, "str": str}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise ValueError(f"results header must be {','.join(RESULT_COLUMNS)}")
        for rec in reader:
            out.append(ResultRow(**{k: cast[types[k]](v) for k, v in rec.items()}))
    return out


# --------------------------------------------------------------------- gridded prediction

LON_RANGE = (-180.0, 180.0)
LAT_RANGE = (-90.0, 90.0)


def ozone_like_field(lon, lat) -> np.ndarray:
    """Setting 2 stretched over a longitude/latitude box, offset to ozone-like levels."""
    u = (np.asarray(lon, dtype=float) - LON_RANGE[0]) / (LON_RANGE[1] - LON_RANGE[0])
    v = (np.asarray(lat, dtype=float) - LAT_RANGE[0]) / (LAT_RANGE[1] - LAT_RANGE[0])
    return 300.0 + 50.0 * (h1(u, v) + h2(u, v))


def make_ozone_like(n: int, seed: int = 0, snr: float = 5.0) -> tuple[RawTable, np.ndarray]:
    """Synthetic (lon, lat, y) records with uneven latitude coverage."""
    rng = np.random.default_rng(seed)
    lon = rng.uniform(*LON_RANGE, size=n)
    lat = LAT_RANGE[0] + (LAT_RANGE[1] - LAT_RANGE[0]) * rng.beta(2.0, 2.0, size=n)
    truth = ozone_like_field(lon, lat)
    sigma = np.sqrt(np.var(truth) / snr)
    y = truth + rng.normal(scale=sigma, size=n)
    return RawTable(np.column_stack([lon, lat]), y), truth


def regular_grid(lo, hi, step: float) -> np.ndarray:
    """Regular grid from ``lo`` up to ``hi`` (inclusive) in every coordinate."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    axes = []
    for a, b in zip(np.atleast_1d(lo), np.atleast_1d(hi)):
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        axes.append(a + step * np.arange(count))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


@dataclass
class GridPrediction:
    grid: np.ndarray
    yhat: np.ndarray
    model: object
    transform: UnitCubeTransform
    q: int
    lam: float


def grid_predict(raw: RawTable, step: float, kernel: str | None = None, q_rule: str = "20*n^(2/9)",
                 method: str = "sbs", seed: int = 7, q: int | None = None) -> GridPrediction:
    """Transform, select, fit with GCV, and predict over the data's bounding-box grid."""
    if kernel is None:
        kernel = "tps" if raw.d == 2 else "ssanova"
    spec = KernelSpec(kernel, raw.d)
    transform = UnitCubeTransform.fit(raw)
    data = to_unit_cube(raw)
    q = QRule.parse(q_rule)(raw.n) if q is None else q
    q = min(q, raw.n)
    sel = select_basis(data, q, method, seed)
    lam, model = gcv_select(data, sel, spec)
    grid = regular_grid(raw.X.min(axis=0), raw.X.max(axis=0), step)
    yhat = model.predict(transform.apply(grid))
    return GridPrediction(grid, yhat, model, transform, q, lam)


def ingest_csv_and_grid_predict(input_csv, step: float, out_csv, **kwargs) -> GridPrediction:
    """Read ``x1,..,xd,y`` records, fit, and write ``x1,..,xd,yhat`` on a regular grid."""
    raw = read_table(input_csv)
    result = grid_predict(raw, step, **kwargs)
    header = [f"x{j + 1}" for j in range(raw.d)] + ["yhat"]
    write_matrix(Path(out_csv), header, np.column_stack([result.grid, result.yhat]))
    return result
