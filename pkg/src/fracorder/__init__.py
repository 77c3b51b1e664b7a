"""Order recovery for multi-term fractional differential operators.

The package estimates the leading Caputo derivative order of an operator
from discrete, possibly noisy observations of a single trajectory.  The
toolchain is: special functions and discrete fractional calculus
(:mod:`fracorder.fraccalc`), observation models (:mod:`fracorder.obsmodel`),
a weighted regression basis (:mod:`fracorder.regbasis`), Tikhonov fitting
(:mod:`fracorder.tikhonov`), the order estimators with quasi-optimality
selection (:mod:`fracorder.orderest`), a time-stepping solver for fractional
initial value problems (:mod:`fracorder.fodesolver`) and a command line
front end (:mod:`fracorder.cli`).
"""

from fracorder.fodesolver import (
    FodeProblem,
    FodeSolution,
    IdentifiabilityError,
    solve,
    verify_linking,
)
from fracorder.fraccalc import PowerSum, SampledFunction
from fracorder.obsmodel import (
    FdoDescriptor,
    FdoKind,
    NoiseKind,
    NoiseSpec,
    Observation,
    TimeGrid,
    example71_observation,
    example72_observation,
)
from fracorder.orderest import (
    EstimateReport,
    RegGrids,
    SelectionFailureError,
    default_grids,
    run_pipeline,
)
from fracorder.regbasis import BasisSpec, initial_power_exponents

__version__ = "0.1.0"

__all__ = [
    "PowerSum",
    "SampledFunction",
    "FdoDescriptor",
    "FdoKind",
    "NoiseKind",
    "NoiseSpec",
    "Observation",
    "TimeGrid",
    "example71_observation",
    "example72_observation",
    "BasisSpec",
    "initial_power_exponents",
    "EstimateReport",
    "RegGrids",
    "SelectionFailureError",
    "default_grids",
    "run_pipeline",
    "FodeProblem",
    "FodeSolution",
    "IdentifiabilityError",
    "solve",
    "verify_linking",
    "__version__",
]
