"""Observation models: grids, operator descriptors, noise, and presets.

An :class:`Observation` is what the estimation pipeline consumes: values of
a trajectory on a short positive time grid, the exact initial value, and a
descriptor of the operator that produced it.  Two closed-form preset
scenarios generate the synthetic observations used throughout the tests and
the reference experiments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from fracorder.fraccalc import PowerSum, gamma_fn

__all__ = [
    "FdoDescriptor",
    "FdoKind",
    "GridPreset",
    "NoiseKind",
    "NoiseSpec",
    "Observation",
    "ObservationMeta",
    "TimeGrid",
    "example71_observation",
    "example72_observation",
    "noise_value",
    "preset_grid",
]


class FdoKind(enum.Enum):
    """Whether coefficients sit outside (I) or inside (II) the derivatives."""

    TYPE_I = "I"
    TYPE_II = "II"


class NoiseKind(enum.Enum):
    NONE = "none"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"


class GridPreset(enum.Enum):
    NONUNIFORM71 = "nonuniform71"
    UNIFORM72 = "uniform72"


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing observation times, all positive and below 1."""

    points: tuple[float, ...]

    def __post_init__(self) -> None:
        pts = tuple(float(t) for t in self.points)
        if len(pts) < 2:
            raise ValueError("TimeGrid needs at least two points")
        if any(not math.isfinite(t) for t in pts):
            raise ValueError("TimeGrid points must be finite")
        if pts[0] <= 0.0:
            raise ValueError(f"TimeGrid points must be positive, got {pts[0]!r}")
        if pts[-1] >= 1.0:
            raise ValueError(f"TimeGrid must stay below 1, got {pts[-1]!r}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("TimeGrid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def t_end(self) -> float:
        return self.points[-1]


@dataclass(frozen=True)
class NoiseSpec:
    """Deterministic perturbation family and its amplitude."""

    kind: NoiseKind = NoiseKind.NONE
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.kind, NoiseKind):
            object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not self.epsilon >= 0:
            raise ValueError(f"noise amplitude must be >= 0, got {self.epsilon!r}")


def noise_value(spec: NoiseSpec, t: float, nu0: float) -> float:
    """Perturbation added to the trajectory at time ``t`` in (0, 1).

    The three families grow like t|ln t|, t**nu0 and t**nu0 |ln t|; the
    initial value itself is never perturbed.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"noise_value requires t in (0, 1), got {t!r}")
    if spec.kind is NoiseKind.NONE:
        return 0.0
    if spec.kind is NoiseKind.N1:
        return spec.epsilon * t * abs(math.log(t))
    if not 0.0 < nu0 < 1.0:
        raise ValueError(f"noise_value requires nu0 in (0, 1), got {nu0!r}")
    if spec.kind is NoiseKind.N2:
        return spec.epsilon * t**nu0
    return spec.epsilon * t**nu0 * abs(math.log(t))


@dataclass(frozen=True)
class FdoDescriptor:
    """Structure of a multi-term fractional operator.

    ``orders`` are the strictly decreasing fractional orders in (0, 1);
    ``coefficients`` are the matching time-dependent factors, the first of
    which (the leading coefficient) must be a polynomial that stays strictly
    positive on the observation window.  ``neg_orders``/``neg_coefficients``
    record a subtracted branch of further lower-order terms; they are
    metadata for scenario bookkeeping and never enter the estimators.
    """

    kind: FdoKind
    orders: tuple[float, ...]
    coefficients: tuple[PowerSum, ...]
    neg_orders: tuple[float, ...] = ()
    neg_coefficients: tuple[PowerSum, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.kind, FdoKind):
            object.__setattr__(self, "kind", FdoKind(self.kind))
        orders = tuple(float(o) for o in self.orders)
        if not orders:
            raise ValueError("FdoDescriptor needs at least the leading order")
        if any(not 0.0 < o < 1.0 for o in orders):
            raise ValueError(f"all orders must lie in (0, 1), got {orders!r}")
        if any(b >= a for a, b in zip(orders, orders[1:])):
            raise ValueError("orders must be strictly decreasing")
        coeffs = tuple(
            c if isinstance(c, PowerSum) else PowerSum.constant(c)
            for c in self.coefficients
        )
        if len(coeffs) != len(orders):
            raise ValueError("one coefficient per order is required")
        if any(e != int(e) or e < 0 for _, e in coeffs[0].terms):
            raise ValueError("the leading coefficient must be a polynomial")
        neg_orders = tuple(float(o) for o in self.neg_orders)
        if any(not 0.0 < o < orders[0] for o in neg_orders):
            raise ValueError("subtracted-branch orders must lie in (0, leading order)")
        neg_coeffs = tuple(
            c if isinstance(c, PowerSum) else PowerSum.constant(c)
            for c in self.neg_coefficients
        )
        if len(neg_coeffs) != len(neg_orders):
            raise ValueError("one coefficient per subtracted-branch order is required")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "neg_orders", neg_orders)
        object.__setattr__(self, "neg_coefficients", neg_coeffs)

    @property
    def nu0(self) -> float:
        return self.orders[0]

    @property
    def r0(self) -> PowerSum:
        return self.coefficients[0]

    def require_positive_leading_coefficient(self, t_end: float) -> None:
        """Check r0 >= delta > 0 on [0, t_end] on a 1e-4 mesh plus endpoints."""
        mesh = np.arange(0.0, t_end, 1e-4)
        probe = np.concatenate((mesh, [t_end]))
        vals = [self.r0(float(t)) for t in probe]
        low = min(vals)
        if not low > 0.0:
            raise ValueError(
                f"leading coefficient drops to {low!r} on [0, {t_end}]; must stay positive"
            )


@dataclass(frozen=True)
class ObservationMeta:
    """Provenance tag for an observation; truth fields only for synthetic data."""

    scenario: str = "custom"
    nu0_true: float | None = None
    noise: NoiseSpec | None = None


@dataclass(frozen=True)
class Observation:
    """Trajectory samples on a grid, exact initial value, and operator info."""

    grid: TimeGrid
    values: tuple[float, ...]
    psi0: float
    descriptor: FdoDescriptor
    meta: ObservationMeta = field(default_factory=ObservationMeta)

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if len(values) != len(self.grid.points):
            raise ValueError(
                f"{len(values)} values for {len(self.grid.points)} grid points"
            )
        if any(not math.isfinite(v) for v in values):
            raise ValueError("observation values must be finite")
        if not math.isfinite(self.psi0):
            raise ValueError(f"psi0 must be finite, got {self.psi0!r}")
        object.__setattr__(self, "values", values)


_TAU = 1e-4


def preset_grid(preset: GridPreset | str) -> TimeGrid:
    """The two stock observation grids (21 points each, scale 1e-4).

    The nonuniform grid keeps two early points, then skips ahead; the gap
    between the second and third points is part of the preset and can only
    be changed by passing a custom grid.
    """
    preset = GridPreset(preset) if not isinstance(preset, GridPreset) else preset
    if preset is GridPreset.NONUNIFORM71:
        steps = [5, 6] + list(range(12, 31))
    else:
        steps = list(range(1, 22))
    return TimeGrid(tuple(k * _TAU for k in steps))


def _observe(grid, clean, noise, nu0, descriptor, scenario):
    values = tuple(
        clean(t) + noise_value(noise, t, nu0) for t in grid.points
    )
    meta = ObservationMeta(scenario=scenario, nu0_true=nu0, noise=noise)
    return values, meta


def example71_observation(
    nu0: float,
    fdo_kind: FdoKind | str = FdoKind.TYPE_I,
    noise: NoiseSpec = NoiseSpec(),
    grid: TimeGrid | None = None,
) -> Observation:
    """First preset scenario: trajectory t**nu0 / Gamma(1 + nu0), zero start.

    The underlying operator has leading coefficient 1 + t, one positive
    lower-order term of order nu0/3 with factor 1/2, and one subtracted
    term of order nu0/2 with factor (1 + t^2)/2.
    """
    if not 0.0 < nu0 < 1.0:
        raise ValueError(f"nu0 must lie in (0, 1), got {nu0!r}")
    grid = grid if grid is not None else preset_grid(GridPreset.NONUNIFORM71)
    scale = 1.0 / gamma_fn(1.0 + nu0)
    descriptor = FdoDescriptor(
        kind=FdoKind(fdo_kind) if not isinstance(fdo_kind, FdoKind) else fdo_kind,
        orders=(nu0, nu0 / 3.0),
        coefficients=(PowerSum(((1.0, 0.0), (1.0, 1.0))), PowerSum.constant(0.5)),
        neg_orders=(nu0 / 2.0,),
        neg_coefficients=(PowerSum(((0.5, 0.0), (0.5, 2.0))),),
    )
    values, meta = _observe(
        grid, lambda t: scale * t**nu0, noise, nu0, descriptor, "example71"
    )
    return Observation(grid, values, 0.0, descriptor, meta)


def example72_observation(
    nu0: float,
    noise: NoiseSpec = NoiseSpec(),
    grid: TimeGrid | None = None,
) -> Observation:
    """Second preset scenario: offset trajectory (256/225) (2 + t**nu0).

    Derives from a spatial problem whose profile integrates to 16/15 along
    each axis, hence the squared factor; the observation starts at 512/225.
    The operator is type I with constant leading coefficient 1/2 and a
    subtracted term of order nu0/5 with factor (1 + t^2)/4.
    """
    if not 0.0 < nu0 < 1.0:
        raise ValueError(f"nu0 must lie in (0, 1), got {nu0!r}")
    grid = grid if grid is not None else preset_grid(GridPreset.UNIFORM72)
    factor = 256.0 / 225.0
    descriptor = FdoDescriptor(
        kind=FdoKind.TYPE_I,
        orders=(nu0,),
        coefficients=(PowerSum.constant(0.5),),
        neg_orders=(nu0 / 5.0,),
        neg_coefficients=(PowerSum(((0.25, 0.0), (0.25, 2.0))),),
    )
    values, meta = _observe(
        grid, lambda t: factor * (2.0 + t**nu0), noise, nu0, descriptor, "example72"
    )
    return Observation(grid, values, 2.0 * factor, descriptor, meta)
