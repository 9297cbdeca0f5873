"""Background density profiles and the Brunt-Vaisala frequency."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import (GridError, InputError, InvalidParams, NonPositiveBuoyancy,
                     StratificationUnstable)

VARIANTS = ("full", "boussinesq")
KINDS = ("exponential", "constant_n", "tabulated", "smoothed_jump")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(100)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DensityProfile:
    """Equilibrium density sampled on a vertical grid spanning [-H, 0].

    In the boussinesq variant ``rho`` holds the nondimensional background
    density, whose negative derivative is N^2; ``g`` is then unused.
    """

    z: np.ndarray
    rho: np.ndarray
    g: float = 1.0
    variant: str = "full"

    def __post_init__(self):
        z = _frozen(self.z)
        rho = _frozen(self.rho)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "rho", rho)
        if self.variant not in VARIANTS:
            raise InvalidParams(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if z.ndim != 1 or z.shape != rho.shape:
            raise GridError("z and rho must be 1-D arrays of equal length")
        if z.size < 3:
            raise GridError("a profile needs at least 3 samples")
        if not np.all(np.diff(z) > 0):
            raise GridError("z must be strictly increasing")
        if z[-1] != 0.0:
            raise GridError("z must end exactly at 0")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise InvalidParams("rho must be finite and positive")
        if not np.all(np.diff(rho) < 0):
            i = int(np.argmax(np.diff(rho) >= 0))
            raise StratificationUnstable(
                f"density is not strictly decreasing upward near z={z[i]:.6g}")
        if not self.g > 0:
            raise InvalidParams("g must be positive")

    @property
    def H(self) -> float:
        return float(-self.z[0])

    @property
    def size(self) -> int:
        return self.z.size

    def is_uniform(self, rtol=1e-9) -> bool:
        dz = np.diff(self.z)
        return bool(np.all(np.abs(dz - dz.mean()) <= rtol * dz.mean()))


@dataclass(frozen=True)
class BruntVaisala:
    n2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n2", _frozen(self.n2))


@lru_cache(maxsize=None)
def _bump_mass() -> float:
    val, _ = quad(lambda x: np.exp(-1.0 / (x * (1.0 - x))), 0.0, 1.0,
                  epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def bump(x):
    """Unit-mass C-infinity bump C*exp(-1/(x(1-x))) supported in (0, 1)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    xi = x[inside]
    with np.errstate(over="ignore"):
        out[inside] = np.exp(-1.0 / (xi * (1.0 - xi))) / _bump_mass()
    return out


def _chi_left(x):
    # integral of the bump over [0, x] for 0 <= x <= 1/2
    t = 0.5 * x[:, None] * (_GL_NODES[None, :] + 1.0)
    return 0.5 * x * (bump(t) @ _GL_WEIGHTS)


def smooth_step(x):
    """Smoothed Heaviside function: the running integral of :func:`bump`."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.where(flat >= 1.0, 1.0, 0.0)
    left = (flat > 0) & (flat <= 0.5)
    right = (flat > 0.5) & (flat < 1.0)
    out[left] = _chi_left(flat[left])
    # symmetry of the bump about 1/2 keeps the quadrature on short intervals
    out[right] = 1.0 - _chi_left(1.0 - flat[right])
    return out.reshape(x.shape)


def smoothed_jump_density(z, rho_plus, rho_minus, z0, delta):
    z = np.asarray(z, dtype=float)
    return rho_plus * np.exp(-delta * z) - (rho_plus - rho_minus) * smooth_step((z - z0) / delta)


def read_profile_csv(path):
    """Read a ``z,rho`` CSV. Returns two float arrays in file order."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"profile file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["z", "rho"]:
            raise InputError(f"{path}: expected header 'z,rho', got {','.join(header)!r}")
        rows = [r for r in reader if r]
    try:
        data = np.array([[float(a), float(b)] for a, b in rows])
    except ValueError as exc:
        raise InputError(f"{path}: malformed row ({exc})") from None
    if data.shape[0] < 3:
        raise InputError(f"{path}: need at least 3 rows")
    return data[:, 0], data[:, 1]


def _tabulated(params, grid_size):
    if "path" in params:
        zt, rt = read_profile_csv(params["path"])
    else:
        zt = np.asarray(params["z"], dtype=float)
        rt = np.asarray(params["rho"], dtype=float)
    if not np.all(np.diff(zt) > 0):
        raise GridError("tabulated z must be strictly ascending")
    if zt[-1] != 0.0:
        raise GridError("tabulated z must end at 0")
    if np.any(rt <= 0):
        raise InvalidParams("tabulated rho must be positive")
    if not np.all(np.diff(rt) < 0):
        raise StratificationUnstable("tabulated density is not strictly decreasing upward")
    z = np.linspace(zt[0], 0.0, grid_size)
    if z.size == zt.size and np.allclose(z, zt, rtol=0, atol=1e-12 * abs(zt[0])):
        return zt.copy(), rt.copy()
    return z, PchipInterpolator(zt, rt)(z)


def build_profile(kind, params, grid_size, H=1.0, g=1.0, variant="full"):
    """Build a :class:`DensityProfile` on a uniform grid.

    Parameters
    ----------
    kind : {"exponential", "constant_n", "tabulated", "smoothed_jump"}
    params : dict
        ``exponential``: rho0, drho, d, giving rho0 - drho*exp(z/d).
        ``constant_n``: N, rho0. Full variant rho0*exp(-N^2 z/g), boussinesq
        variant rho0 - N^2 z.
        ``tabulated``: path to a ``z,rho`` CSV, or arrays z and rho. The depth
        is taken from the table.
        ``smoothed_jump``: rho_plus, rho_minus, z0, delta.
    grid_size : int
    H, g : float
    variant : {"full", "boussinesq"}
    """
    if kind not in KINDS:
        raise InvalidParams(f"unknown profile kind {kind!r}; expected one of {KINDS}")
    grid_size = int(grid_size)
    if grid_size < 3:
        raise InvalidParams("grid_size must be at least 3")
    if not H > 0:
        raise InvalidParams("H must be positive")
    params = dict(params)
    try:
        return _build(kind, params, grid_size, H, g, variant)
    except KeyError as exc:
        raise InvalidParams(f"{kind} profile is missing parameter {exc.args[0]!r}") from None


def _build(kind, params, grid_size, H, g, variant):
    if kind == "tabulated":
        z, rho = _tabulated(params, grid_size)
        return DensityProfile(z, rho, g=g, variant=variant)

    z = np.linspace(-H, 0.0, grid_size)
    if kind == "constant_n":
        N = float(params["N"])
        rho0 = float(params.get("rho0", 1.0))
        if not (N > 0 and rho0 > 0):
            raise InvalidParams("constant_n needs N > 0 and rho0 > 0")
        rho = rho0 * np.exp(-N * N * z / g) if variant == "full" else rho0 - N * N * z
    elif kind == "exponential":
        rho0, drho, d = (float(params[k]) for k in ("rho0", "drho", "d"))
        if not (d > 0 and drho > 0 and rho0 > drho):
            raise InvalidParams("exponential needs d > 0 and rho0 > drho > 0")
        rho = rho0 - drho * np.exp(z / d)
    else:
        rp, rm = float(params["rho_plus"]), float(params["rho_minus"])
        z0, delta = float(params["z0"]), float(params["delta"])
        if not 0 < delta < 1:
            raise InvalidParams(f"delta must lie in (0, 1), got {delta}")
        if not -H < z0 < 0:
            raise InvalidParams(f"z0 must lie in (-H, 0), got {z0}")
        if not rp > rm > 0:
            raise InvalidParams("smoothed_jump needs rho_plus > rho_minus > 0")
        rho = smoothed_jump_density(z, rp, rm, z0, delta)
    return DensityProfile(z, rho, g=g, variant=variant)


def brunt_vaisala(profile: DensityProfile) -> BruntVaisala:
    """N^2 by second-order finite differences.

    Full variant: N^2 = -g d(ln rho)/dz. Boussinesq variant: N^2 = -d rho/dz.
    Centered in the interior, one-sided second order at the endpoints.
    """
    data = np.log(profile.rho) if profile.variant == "full" else profile.rho
    n2 = -np.gradient(data, profile.z, edge_order=2)
    if profile.variant == "full":
        n2 *= profile.g
    if np.any(n2 <= 0) or not np.all(np.isfinite(n2)):
        i = int(np.argmax(~(n2 > 0)))
        raise NonPositiveBuoyancy(f"N^2 = {n2[i]:.3g} at z = {profile.z[i]:.6g}")
    return BruntVaisala(n2)
