"""Penalized least-squares fit of observation data in the regression basis.

The fitted trajectory minimises the sum of squared misfits at the grid
nodes (the exact initial value enters as node 0) plus ``lam`` times the
squared weighted norm of the trajectory, leading to the normal equations
``(Q^T Q + lam E) a = Q^T p`` with design matrix Q and Gram matrix E.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from fracorder.fraccalc import PowerSum
from fracorder.obsmodel import Observation
from fracorder.regbasis import (
    BasisSpec,
    antideriv_basis,
    basis_functions,
    eval_basis,
    gram_matrix,
)

__all__ = [
    "FitModel",
    "SingularSystemError",
    "design_matrix",
    "fit",
    "model_eval",
    "model_integral",
    "model_integral_weighted",
]


class SingularSystemError(RuntimeError):
    """The regularized normal equations could not be solved."""


@dataclass(frozen=True)
class FitModel:
    """Fit result: basis, coefficient vector, penalty weight, data misfit."""

    spec: BasisSpec
    coeffs: tuple[float, ...]
    lam: float
    residual_norm: float

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coeffs)
        if any(not np.isfinite(c) for c in coeffs):
            raise ValueError("fit coefficients must be finite")
        if not self.residual_norm >= 0:
            raise ValueError(f"residual_norm must be >= 0, got {self.residual_norm!r}")
        object.__setattr__(self, "coeffs", coeffs)


def design_matrix(obs: Observation, spec: BasisSpec) -> np.ndarray:
    """Basis values at t=0 (row 0) and at every observation node."""
    if obs.grid.t_end > spec.t_end:
        raise ValueError(
            f"grid extends to {obs.grid.t_end}, beyond the basis window {spec.t_end}"
        )
    rows = [eval_basis(spec, 0.0)]
    rows.extend(eval_basis(spec, t) for t in obs.grid.points)
    return np.vstack(rows)


def _data_vector(obs: Observation) -> np.ndarray:
    return np.array([obs.psi0, *obs.values])


def fit(obs: Observation, spec: BasisSpec, lam: float) -> FitModel:
    """Solve the regularized normal equations for the given penalty weight.

    Uses a pivoted symmetric factorization with a couple of refinement
    passes (residuals accumulated in extended precision); deterministic for
    identical inputs.  ``lam`` must be strictly positive; the unpenalized
    limit is exercised with tiny values instead.
    """
    if not lam > 0:
        raise ValueError(f"fit requires lam > 0, got {lam!r}")
    q = design_matrix(obs, spec)
    e = gram_matrix(spec)
    p = _data_vector(obs)
    lhs = q.T @ q + lam * e
    rhs = q.T @ p

    def _solve(b: np.ndarray) -> np.ndarray:
        with warnings.catch_warnings():
            # deep-tail lam values are legitimately ill-conditioned; the
            # quasi-optimality sweep relies on getting an answer anyway
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            try:
                return scipy.linalg.solve(lhs, b, assume_a="sym")
            except np.linalg.LinAlgError as exc:
                raise SingularSystemError(
                    f"normal equations singular at lam={lam!r}: {exc}"
                ) from exc

    a = _solve(rhs)
    # fixed two refinement passes, extended-precision residuals
    lhs_w = lhs.astype(np.longdouble)
    rhs_w = rhs.astype(np.longdouble)
    best = a
    best_res = float(np.linalg.norm((rhs_w - lhs_w @ a.astype(np.longdouble)).astype(float)))
    for _ in range(2):
        r = (rhs_w - lhs_w @ best.astype(np.longdouble)).astype(float)
        cand = best + _solve(r)
        res = float(np.linalg.norm((rhs_w - lhs_w @ cand.astype(np.longdouble)).astype(float)))
        if not np.all(np.isfinite(cand)) or res >= best_res:
            break
        best, best_res = cand, res
    if not np.all(np.isfinite(best)):
        raise SingularSystemError(f"non-finite solution at lam={lam!r}")
    residual = float(np.linalg.norm(q @ best - p))
    return FitModel(spec, tuple(float(c) for c in best), float(lam), residual)


def model_eval(m: FitModel, t: float) -> float:
    """Fitted trajectory value at ``t`` in (0, t_end]."""
    if not 0.0 < t <= m.spec.t_end:
        raise ValueError(f"t={t!r} outside (0, {m.spec.t_end}]")
    return float(np.asarray(m.coeffs) @ eval_basis(m.spec, t))


def model_integral(m: FitModel, that: float) -> float:
    """Integral of the fitted trajectory over [0, that], closed form."""
    if not 0.0 < that <= m.spec.t_end:
        raise ValueError(f"that={that!r} outside (0, {m.spec.t_end}]")
    return float(np.asarray(m.coeffs) @ antideriv_basis(m.spec, that))


def model_integral_weighted(m: FitModel, r0: PowerSum, that: float) -> float:
    """Integral of ``r0 * model`` over [0, that], exact for polynomial r0."""
    if not 0.0 < that <= m.spec.t_end:
        raise ValueError(f"that={that!r} outside (0, {m.spec.t_end}]")
    monomials = PowerSum(
        tuple(
            (coeff * c, e)
            for coeff, fn in zip(m.coeffs, basis_functions(m.spec))
            for c, e in fn.terms
        )
    )
    return (r0 * monomials).antiderivative(that)
