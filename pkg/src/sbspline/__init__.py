"""Smoothing splines on space-filling basis subsamples.

Typical use::

    from sbspline import RawTable, to_unit_cube, QRule, select_space_filling
    from sbspline import KernelSpec, gcv_select

    data = to_unit_cube(RawTable(X, y))
    q = QRule(5, 2 / 9)(data.n)
    sel = select_space_filling(data, q)
    lam, model = gcv_select(data, sel, KernelSpec("ssanova-2way", data.d))
    yhat = model.predict(data.X)
"""
from .design import (
    DesignPointSet,
    DiscrepancyBudgetError,
    DimensionError,
    generate_design,
    local_discrepancy,
    star_discrepancy,
)
from .kernels import KernelSpec, gram, null_basis, null_basis_eval, rk_eval
from .neighbors import KdTree, kd_build, select_nearest
from .selection import (
    BasisSelection,
    QRule,
    essential_q,
    select_adaptive,
    select_basis,
    select_space_filling,
    select_uniform,
)
from .solver import FittedSpline, fit_full_oracle, fit_restricted, gcv_select, predict
from .transform import Dataset, RawTable, UnitCubeTransform, to_unit_cube

__version__ = "0.1.0"

__all__ = [
    "BasisSelection",
    "Dataset",
    "DesignPointSet",
    "DimensionError",
    "DiscrepancyBudgetError",
    "FittedSpline",
    "KdTree",
    "KernelSpec",
    "QRule",
    "RawTable",
    "UnitCubeTransform",
    "essential_q",
    "fit_full_oracle",
    "fit_restricted",
    "gcv_select",
    "generate_design",
    "gram",
    "kd_build",
    "local_discrepancy",
    "null_basis",
    "null_basis_eval",
    "predict",
    "rk_eval",
    "select_adaptive",
    "select_basis",
    "select_nearest",
    "select_space_filling",
    "select_uniform",
    "star_discrepancy",
    "to_unit_cube",
]
