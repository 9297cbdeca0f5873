"""Sharp-stratification limit of the first vertical mode.

As the transition layer of the smoothed jump profile shrinks (delta -> 0),
the first mode tends to the two-layer interfacial mode on (-1, 0):

    cbar^2 = g (rho+ - rho-) / (rho+/(1+z0) + rho-/(-z0))
    fbar   = a (z+1) below z0,  a (1+z0) z / z0 above,
    a      = 1 / (sqrt(g (rho+ - rho-)) (1+z0)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, ResolutionError, UnstableJump
from .stratification import brunt_vaisala, build_profile
from .sturm_liouville import rayleigh_quotient, solve_modes

POINTS_PER_DELTA = 8


def _check(rho_plus, rho_minus, z0, g):
    if not rho_plus > rho_minus:
        raise UnstableJump("the lower layer must be heavier (rho_plus > rho_minus)")
    if not rho_minus > 0:
        raise InvalidParams("densities must be positive")
    if not -1.0 < z0 < 0.0:
        raise InvalidParams("z0 must lie in (-1, 0)")
    if not g > 0:
        raise InvalidParams("g must be positive")


def limit_speed(rho_plus, rho_minus, z0, g=1.0) -> float:
    _check(rho_plus, rho_minus, z0, g)
    c2 = (rho_plus - rho_minus) * g / (rho_plus / (z0 + 1.0) + rho_minus / (-z0))
    return math.sqrt(c2)


def limit_amplitude(rho_plus, rho_minus, z0, g=1.0) -> float:
    _check(rho_plus, rho_minus, z0, g)
    return 1.0 / (math.sqrt((rho_plus - rho_minus) * g) * (z0 + 1.0))


def limit_eigenfunction(rho_plus, rho_minus, z0, g, z) -> np.ndarray:
    a = limit_amplitude(rho_plus, rho_minus, z0, g)
    z = np.asarray(z, dtype=float)
    return np.where(z <= z0, a * (z + 1.0), a * (1.0 + z0) / z0 * z)


def grid_size_for(delta_min: float, points_per_delta: int = 32) -> int:
    """Uniform grid size with at least ``points_per_delta`` samples per delta.

    Nz - 1 is rounded up to a multiple of 6 so that z0 = -1/3 and -2/3
    (and -1/2) fall on nodes.
    """
    intervals = math.ceil(points_per_delta / delta_min)
    intervals = 6 * math.ceil(intervals / 6)
    return intervals + 1


@dataclass(frozen=True)
class SharpLimitReport:
    delta_values: np.ndarray
    c1_values: np.ndarray
    cbar: float
    c2_errors: np.ndarray
    sup_errors: np.ndarray
    rayleigh_bar: np.ndarray
    c2_order: float
    sup_order: float
    grid_size: int

    def rows(self):
        for d, c, e, s in zip(self.delta_values, self.c1_values, self.c2_errors, self.sup_errors):
            yield d, c, e, s


def _fit_order(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def first_mode(rho_plus, rho_minus, z0, g, delta, grid_size):
    """(c_1, z, f_1 scaled to 1 at z0, profile, N^2) for one smoothed jump."""
    h = 1.0 / (grid_size - 1)
    if h > delta / POINTS_PER_DELTA:
        raise ResolutionError(
            f"grid spacing {h:.3g} does not resolve delta={delta} (need <= delta/{POINTS_PER_DELTA})")
    profile = build_profile("smoothed_jump", {"rho_plus": rho_plus, "rho_minus": rho_minus,
                                              "z0": z0, "delta": delta}, grid_size, H=1.0, g=g)
    n2 = brunt_vaisala(profile)
    modes = solve_modes(profile, n2, 1)
    f = modes.f[0]
    f = f / np.interp(z0, profile.z, f)
    return float(modes.speeds[0]), profile.z, f, profile, n2


def delta_sweep(rho_plus, rho_minus, z0, g=1.0, deltas=(0.04, 0.02, 0.01, 0.005), grid_size=None,
                fit="last_half") -> SharpLimitReport:
    """First-mode convergence toward the two-layer limit.

    Orders are least-squares slopes of log error against log delta, over the
    smaller half of the deltas (``fit="last_half"``) or all of them
    (``fit="all"``). The grid defaults to 32 points per smallest delta.
    """
    deltas = np.asarray(deltas, dtype=float)
    if fit not in ("all", "last_half"):
        raise InvalidParams("fit must be 'all' or 'last_half'")
    if deltas.size < 2 or not np.all(np.diff(deltas) < 0):
        raise InvalidParams("deltas must be strictly decreasing with at least two entries")
    cbar = limit_speed(rho_plus, rho_minus, z0, g)
    if grid_size is None:
        grid_size = grid_size_for(deltas.min())
    c1, c2e, sup, ray = [], [], [], []
    for d in deltas:
        c, z, f, profile, n2 = first_mode(rho_plus, rho_minus, z0, g, d, grid_size)
        fbar = limit_eigenfunction(rho_plus, rho_minus, z0, g, z)
        fbar = fbar / np.interp(z0, z, fbar)
        c1.append(c)
        c2e.append(abs(c * c - cbar * cbar))
        sup.append(float(np.max(np.abs(f - fbar))))
        ray.append(rayleigh_quotient(profile, n2, fbar))
    c2e = np.array(c2e)
    sup = np.array(sup)
    sel = slice(None) if fit == "all" else slice(deltas.size // 2, None)
    if deltas[sel].size < 2:
        sel = slice(-2, None)
    return SharpLimitReport(delta_values=deltas, c1_values=np.array(c1), cbar=cbar,
                            c2_errors=c2e, sup_errors=sup, rayleigh_bar=np.array(ray),
                            c2_order=_fit_order(deltas[sel], c2e[sel]),
                            sup_order=_fit_order(deltas[sel], sup[sel]),
                            grid_size=int(grid_size))
