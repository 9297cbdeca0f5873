"""Vertical normal modes, mode mixing and modal dynamics of stratified fluids."""

__version__ = "0.1.0"

from .errors import StratoError  # noqa: E402
from .estimator import VerticalModeDecomposition  # noqa: E402
from .stratification import DensityProfile, brunt_vaisala, build_profile  # noqa: E402
from .sturm_liouville import ModeSet, derive_g, explicit_modes, solve_modes  # noqa: E402

__all__ = [
    "DensityProfile",
    "ModeSet",
    "StratoError",
    "VerticalModeDecomposition",
    "brunt_vaisala",
    "build_profile",
    "derive_g",
    "explicit_modes",
    "solve_modes",
]
