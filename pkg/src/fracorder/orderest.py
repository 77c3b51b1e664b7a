"""Leading-order estimators and the double quasi-optimality selection.

Two estimators read the leading order off a fitted trajectory at a probe
time ``that``: the ratio form ``that * (psi - psi0) / int (psi - psi0) - 1``
and the logarithmic comparator ``ln|psi - psi0| / ln that``.  Both are
swept over a geometric grid of penalty weights and probe times; the
reported value sits where consecutive estimates change least, first along
the penalty axis, then along the probe axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fracorder.concurrency import ordered_map
from fracorder.fraccalc import PowerSum
from fracorder.obsmodel import FdoDescriptor, FdoKind, Observation
from fracorder.regbasis import BasisSpec
from fracorder.tikhonov import (
    FitModel,
    fit,
    model_eval,
    model_integral,
    model_integral_weighted,
)

__all__ = [
    "DegenerateEstimateError",
    "EstimateReport",
    "RegGrids",
    "SelectionFailureError",
    "default_grids",
    "log_estimate",
    "quasi_opt_select",
    "ratio_estimate",
    "run_pipeline",
]

LOG_SELECTION_MODES = ("independent", "reuse_ratio")


class DegenerateEstimateError(ArithmeticError):
    """A probe produced no usable estimate (vanishing denominator or ln 0)."""


class SelectionFailureError(RuntimeError):
    """Quasi-optimality found no admissible difference to minimise."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class RegGrids:
    """Geometric sweeps ``lambda_i = lambda1 * xi1**(i-1)`` and likewise that_j."""

    lambda1: float
    xi1: float
    k1: int
    that1: float
    xi2: float
    k2: int

    def __post_init__(self) -> None:
        if not self.lambda1 > 0:
            raise ValueError(f"lambda1 must be positive, got {self.lambda1!r}")
        if not 0.0 < self.xi1 < 1.0:
            raise ValueError(f"xi1 must lie in (0, 1), got {self.xi1!r}")
        if not 0.0 < self.xi2 < 1.0:
            raise ValueError(f"xi2 must lie in (0, 1), got {self.xi2!r}")
        if self.k1 < 2 or self.k2 < 2:
            raise ValueError("both grid lengths must be at least 2")
        if not self.that1 > 0:
            raise ValueError(f"that1 must be positive, got {self.that1!r}")

    def lambda_values(self) -> tuple[float, ...]:
        return tuple(self.lambda1 * self.xi1**i for i in range(self.k1))

    def that_values(self) -> tuple[float, ...]:
        return tuple(self.that1 * self.xi2**j for j in range(self.k2))


def default_grids(t_end: float) -> RegGrids:
    """Stock sweep: 60 penalty halvings from 1, 15 probe halvings from t_end."""
    return RegGrids(lambda1=1.0, xi1=0.5, k1=60, that1=t_end, xi2=0.5, k2=15)


def _use_weighted_form(fdo: FdoDescriptor) -> bool:
    # a constant leading coefficient cancels from both estimators, so the
    # plain form is used then; this also makes the type I/II agreement exact
    return fdo.kind is FdoKind.TYPE_II and not fdo.r0.is_constant()


def ratio_estimate(m: FitModel, psi0: float, fdo: FdoDescriptor, that: float) -> float:
    """Ratio estimator at probe time ``that``, using exact model integrals."""
    if _use_weighted_form(fdo):
        r0 = fdo.r0
        num = that * (r0(that) * model_eval(m, that) - r0(0.0) * psi0)
        den = model_integral_weighted(m, r0, that) - r0(0.0) * psi0 * that
    else:
        num = that * (model_eval(m, that) - psi0)
        den = model_integral(m, that) - psi0 * that
    if abs(den) < 1e-300:
        raise DegenerateEstimateError(
            f"ratio denominator below 1e-300 at that={that!r}"
        )
    return num / den - 1.0


def log_estimate(m: FitModel, psi0: float, fdo: FdoDescriptor, that: float) -> float:
    """Logarithmic comparator ``ln|psi - psi0| / ln that``; needs that < 1."""
    if that >= 1.0:
        raise ValueError(f"log_estimate requires that < 1, got {that!r}")
    if _use_weighted_form(fdo):
        r0 = fdo.r0
        arg = abs(r0(that) * model_eval(m, that) - r0(0.0) * psi0)
    else:
        arg = abs(model_eval(m, that) - psi0)
    if arg == 0.0:
        raise DegenerateEstimateError(f"zero ln argument at that={that!r}")
    return math.log(arg) / math.log(that)


def quasi_opt_select(table: np.ndarray, failed: np.ndarray) -> tuple[int, int]:
    """Doubly quasi-optimal cell of an estimate table.

    Per column j, pick the row minimising |table[i,j] - table[i-1,j]| over
    consecutive non-failed pairs; then minimise the change between the
    selected entries of consecutive columns.  Ties break toward the
    smallest index.  Returns 0-based ``(i, j)``.
    """
    table = np.asarray(table, dtype=float)
    failed = np.asarray(failed, dtype=bool)
    k1, k2 = table.shape
    chosen_rows: list[int] = []
    for j in range(k2):
        best_i = -1
        best_d = math.inf
        for i in range(1, k1):
            if failed[i, j] or failed[i - 1, j]:
                continue
            d = abs(table[i, j] - table[i - 1, j])
            if d < best_d:
                best_d = d
                best_i = i
        if best_i < 0:
            raise SelectionFailureError(
                f"no admissible consecutive pair in column {j}"
            )
        chosen_rows.append(best_i)
    best_j = -1
    best_d = math.inf
    for j in range(1, k2):
        d = abs(table[chosen_rows[j], j] - table[chosen_rows[j - 1], j - 1])
        if d < best_d:
            best_d = d
            best_j = j
    if best_j < 0:
        raise SelectionFailureError("no admissible difference in the outer pass")
    return chosen_rows[best_j], best_j


@dataclass(frozen=True)
class EstimateReport:
    """Both estimates with their selected sweep cells and the full tables."""

    nu_ratio: float
    nu_log: float
    ratio_lambda: float
    ratio_that: float
    log_lambda: float
    log_that: float
    ratio_index: tuple[int, int]
    log_index: tuple[int, int]
    ratio_table: tuple[tuple[float, ...], ...]
    log_table: tuple[tuple[float, ...], ...]
    ratio_failed: tuple[tuple[bool, ...], ...]
    log_failed: tuple[tuple[bool, ...], ...]
    grids: RegGrids
    log_selection: str

    def __post_init__(self) -> None:
        ri, rj = self.ratio_index
        li, lj = self.log_index
        lambdas = self.grids.lambda_values()
        thats = self.grids.that_values()
        if self.nu_ratio != self.ratio_table[ri][rj]:
            raise ValueError("nu_ratio does not match its table entry")
        if self.nu_log != self.log_table[li][lj]:
            raise ValueError("nu_log does not match its table entry")
        if (self.ratio_lambda, self.ratio_that) != (lambdas[ri], thats[rj]):
            raise ValueError("ratio selection is not a grid member")
        if (self.log_lambda, self.log_that) != (lambdas[li], thats[lj]):
            raise ValueError("log selection is not a grid member")


def _as_nested(a: np.ndarray) -> tuple[tuple, ...]:
    return tuple(tuple(row) for row in a.tolist())


def run_pipeline(
    obs: Observation,
    spec: BasisSpec,
    grids: RegGrids,
    fdo: FdoDescriptor | None = None,
    log_selection: str = "independent",
) -> EstimateReport:
    """Fit once per penalty weight, sweep both estimators, select, report.

    ``log_selection`` decides whether the logarithmic estimate gets its own
    quasi-optimality pass ("independent") or is read at the ratio-selected
    cell ("reuse_ratio").  Selection failures propagate with the full
    tables attached as diagnostics.
    """
    if log_selection not in LOG_SELECTION_MODES:
        raise ValueError(
            f"log_selection must be one of {LOG_SELECTION_MODES}, got {log_selection!r}"
        )
    fdo = fdo if fdo is not None else obs.descriptor
    lambdas = grids.lambda_values()
    thats = grids.that_values()
    if grids.that1 > spec.t_end:
        raise ValueError(
            f"probe times reach {grids.that1}, beyond the basis window {spec.t_end}"
        )
    fdo.require_positive_leading_coefficient(spec.t_end)

    models = ordered_map(lambda lam: fit(obs, spec, lam), lambdas)

    k1, k2 = grids.k1, grids.k2
    ratio_tab = np.full((k1, k2), math.nan)
    log_tab = np.full((k1, k2), math.nan)
    ratio_bad = np.zeros((k1, k2), dtype=bool)
    log_bad = np.zeros((k1, k2), dtype=bool)
    for i, m in enumerate(models):
        for j, that in enumerate(thats):
            try:
                ratio_tab[i, j] = ratio_estimate(m, obs.psi0, fdo, that)
            except DegenerateEstimateError:
                ratio_bad[i, j] = True
            try:
                log_tab[i, j] = log_estimate(m, obs.psi0, fdo, that)
            except DegenerateEstimateError:
                log_bad[i, j] = True

    diagnostics = {
        "ratio_table": _as_nested(ratio_tab),
        "log_table": _as_nested(log_tab),
        "ratio_failed": _as_nested(ratio_bad),
        "log_failed": _as_nested(log_bad),
        "grids": grids,
    }
    try:
        ratio_idx = quasi_opt_select(ratio_tab, ratio_bad)
        if log_selection == "independent":
            log_idx = quasi_opt_select(log_tab, log_bad)
        else:
            log_idx = ratio_idx
            if log_bad[log_idx]:
                raise SelectionFailureError(
                    "ratio-selected cell is degenerate for the log estimator"
                )
    except SelectionFailureError as exc:
        raise SelectionFailureError(str(exc), diagnostics) from None

    ri, rj = ratio_idx
    li, lj = log_idx
    return EstimateReport(
        nu_ratio=float(ratio_tab[ri, rj]),
        nu_log=float(log_tab[li, lj]),
        ratio_lambda=lambdas[ri],
        ratio_that=thats[rj],
        log_lambda=lambdas[li],
        log_that=thats[lj],
        ratio_index=ratio_idx,
        log_index=log_idx,
        ratio_table=_as_nested(ratio_tab),
        log_table=_as_nested(log_tab),
        ratio_failed=_as_nested(ratio_bad),
        log_failed=_as_nested(log_bad),
        grids=grids,
        log_selection=log_selection,
    )
