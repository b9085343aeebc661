"""Command-line entry point: ``sbspline <command> ...``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import io
from .design import generate_design, star_discrepancy
from .harness import SimulationConfig, ingest_csv_and_grid_predict, run_simulation, write_results
from .kernels import KernelSpec
from .selection import QRule, select_basis
from .solver import gcv_select
from .transform import UnitCubeTransform, to_unit_cube

log = logging.getLogger("sbspline")


def _csv_list(text, cast=str):
    return tuple(cast(v.strip()) for v in str(text).split(",") if v.strip())


def read_config(path) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value.strip().strip('"').strip("'")
    return out


def cmd_design(args):
    pts = generate_design(args.method, args.q, args.d, args.seed)
    io.write_points(args.out, pts.points)


def cmd_discrepancy(args):
    pts = io.read_points(args.input)
    mode = "exact" if args.mode == "exact" else "approximate"
    val = star_discrepancy(pts, mode, seed=args.seed)
    tag = "lower_bound" if val.lower_bound else "exact"
    print(f"{float(val)!r} {tag}")


def _select(args, data):
    q = QRule.parse(args.q_rule)(data.n) if args.q is None else args.q
    return select_basis(data, min(q, data.n), args.method, args.seed, design=args.design)


def cmd_select(args):
    raw = io.read_table(args.input)
    data = to_unit_cube(raw)
    sel = _select(args, data)
    io.write_indices(args.out, sel.indices)
    log.info("selected %d of %d requested rows", sel.q_eff, sel.q_requested)


def cmd_fit(args):
    raw = io.read_table(args.input)
    transform = UnitCubeTransform.fit(raw)
    data = to_unit_cube(raw)
    sel = _select(args, data)
    spec = KernelSpec(args.kernel, raw.d)
    lam, model = gcv_select(data, sel, spec)
    io.save_model(args.model, model, transform)
    log.info("lambda=%.4g edf=%.2f q_eff=%d", lam, model.diagnostics["edf"], model.q_eff)


def cmd_predict(args):
    model, transform = io.load_model(args.model)
    pts = io.read_points(args.points)
    if transform is not None:
        pts = transform.apply(pts)
    io.write_matrix(args.out, ["yhat"], model.predict(pts))


def cmd_simulate(args):
    cfg_file = read_config(args.config) if args.config else {}
    merged = {**cfg_file, **{k: v for k, v in vars(args).items() if v is not None}}
    cfg = SimulationConfig(
        setting=int(merged.get("setting", 1)),
        ns=_csv_list(merged.get("n", "1024"), int),
        snr=float(merged.get("snr", 5)),
        q_rules=_csv_list(merged.get("q_rule", "10*n^(1/9)")),
        methods=_csv_list(merged.get("methods", "sbs,abs,unif")),
        replicates=int(merged.get("reps", 10)),
        seed=int(merged.get("seed", 7)),
        n_test=int(merged.get("n_test", 5000)),
        kernel=merged.get("kernel", "ssanova"),
    )
    out = merged.get("out")
    if out is None:
        raise SystemExit("simulate: --out is required (flag or config file)")
    rows = run_simulation(cfg, progress=lambda r: log.info(
        "n=%d %s mse=%.4g se=%.2g fit=%.3fs", r.n, r.method, r.mse_mean, r.mse_se, r.fit_seconds_mean))
    write_results(out, rows)


def cmd_grid(args):
    res = ingest_csv_and_grid_predict(args.input, args.step, args.out, kernel=args.kernel,
                                      q_rule=args.q_rule, method=args.method, seed=args.seed)
    log.info("wrote %d grid rows (q=%d, lambda=%.4g)", len(res.grid), res.q, res.lam)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sbspline", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("design", help="write space-filling design points")
    s.add_argument("--method", default="sobol", choices=["sobol", "lhs", "centered-grid"])
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("discrepancy", help="star discrepancy of a points CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--mode", default="exact", choices=["exact", "approx", "approximate"])
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_discrepancy)

    def selection_flags(s):
        s.add_argument("--input", required=True)
        s.add_argument("--method", default="sbs", choices=["sbs", "abs", "unif"])
        s.add_argument("--q-rule", default="5*n^(2/9)")
        s.add_argument("--q", type=int, default=None, help="explicit q, overrides --q-rule")
        s.add_argument("--design", default="sobol", choices=["sobol", "lhs"])
        s.add_argument("--seed", type=int, default=7)

    s = sub.add_parser("select", help="choose basis rows from a data CSV")
    selection_flags(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("fit", help="fit a spline with GCV and save the model")
    selection_flags(s)
    s.add_argument("--kernel", default="ssanova", choices=["cubic", "ssanova", "tps"])
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("predict", help="evaluate a saved model at points")
    s.add_argument("--model", required=True)
    s.add_argument("--points", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("simulate", help="run the simulation benchmark")
    s.add_argument("--config", default=None, help="file of 'key = value' lines; flags override it")
    s.add_argument("--setting", default=None)
    s.add_argument("--snr", default=None)
    s.add_argument("--n", default=None, help="comma-separated sample sizes")
    s.add_argument("--q-rule", default=None, help="comma-separated q-rules")
    s.add_argument("--methods", default=None)
    s.add_argument("--reps", default=None)
    s.add_argument("--seed", default=None)
    s.add_argument("--n-test", default=None)
    s.add_argument("--kernel", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("grid", help="fit a CSV and predict on a regular grid")
    s.add_argument("--input", required=True)
    s.add_argument("--step", type=float, default=1.0)
    s.add_argument("--kernel", default=None, choices=["cubic", "ssanova", "tps"])
    s.add_argument("--method", default="sbs", choices=["sbs", "abs", "unif"])
    s.add_argument("--q-rule", default="20*n^(2/9)")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    func = args.func
    del args.func
    try:
        func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"sbspline {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
