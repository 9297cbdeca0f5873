"""Vertical normal modes.

Discretizes

    (w f')' + (w N^2 / c^2) f = 0,   f(-H) = f(0) = 0,

with w = rho_eq (full variant) or w = 1 (boussinesq variant), using
conservative second-order differences on a uniform grid. The problem
becomes A f = lambda B f with A symmetric tridiagonal, B diagonal and
lambda = 1/c^2.

Nodes carry f, w and rho; midpoints carry g, V and P. The derived basis
g_n = c_n f_n' is the forward difference of f_n, which lives on the
midpoints and makes the discrete g-Gram matrix exact under the midpoint
rule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import EigenFailure, GridError, InvalidParams, ResolutionError
from .stratification import BruntVaisala, DensityProfile, _frozen


@dataclass(frozen=True)
class ModeSet:
    """Eigen-speeds and basis functions of the vertical problem.

    Attributes
    ----------
    z : (Nz,) nodes on [-H, 0]
    speeds : (M,) strictly decreasing c_1 > ... > c_M
    f : (M, Nz) eigenfunctions at the nodes, zero at both ends
    weight : (Nz,) rho_eq at the nodes, ones in the boussinesq variant
    n2 : (Nz,) buoyancy frequency squared at the nodes
    variant : "full" or "boussinesq"
    gravity : g in the full variant, 1 in the boussinesq variant
    g : (M+1, Nz-1) g_0..g_M at the midpoints, or None before derive_g
    alpha0 : normalization of g_0 = alpha0 / rho_eq
    """

    z: np.ndarray
    speeds: np.ndarray
    f: np.ndarray
    weight: np.ndarray
    n2: np.ndarray
    variant: str
    gravity: float = 1.0
    g: np.ndarray | None = None
    alpha0: float | None = None

    def __post_init__(self):
        for name in ("z", "speeds", "f", "weight", "n2"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.g is not None:
            object.__setattr__(self, "g", _frozen(self.g))

    @property
    def n_modes(self) -> int:
        return self.speeds.size

    @property
    def H(self) -> float:
        return float(-self.z[0])

    @property
    def h(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def z_mid(self) -> np.ndarray:
        return 0.5 * (self.z[:-1] + self.z[1:])

    @property
    def weight_mid(self) -> np.ndarray:
        return 0.5 * (self.weight[:-1] + self.weight[1:])

    @property
    def node_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights at the nodes."""
        q = np.full(self.z.size, self.h)
        q[0] = q[-1] = 0.5 * self.h
        return q

    @property
    def mid_weights(self) -> np.ndarray:
        """Midpoint-rule quadrature weights at the midpoints."""
        return np.full(self.z.size - 1, self.h)

    def buoyancy_frequency(self, rtol=1e-6) -> float:
        """Return N if N^2 is constant to ``rtol``, else raise InvalidParams."""
        n2 = self.n2
        if np.ptp(n2) > rtol * n2.mean():
            raise InvalidParams("this operation needs a constant buoyancy frequency")
        return float(np.sqrt(n2.mean()))


def _check_uniform(profile):
    if not profile.is_uniform():
        raise GridError("the eigensolver needs a uniform vertical grid")


def _weight(profile):
    if profile.variant == "full":
        return profile.rho, profile.g
    return np.ones_like(profile.rho), 1.0


def _tridiagonal(weight, n2, h):
    """Stiffness (diagonal, off-diagonal) and mass diagonal on interior nodes."""
    wm = 0.5 * (weight[:-1] + weight[1:])
    a_diag = (wm[:-1] + wm[1:]) / h
    a_off = -wm[1:-1] / h
    b = h * weight[1:-1] * n2[1:-1]
    return a_diag, a_off, b


def solve_modes(profile: DensityProfile, n2: BruntVaisala, n_modes: int) -> ModeSet:
    """The ``n_modes`` fastest vertical modes of ``profile``.

    Eigenpairs come from bisection on the Sturm sequence followed by
    inverse iteration (LAPACK stebz/stein) on the symmetrized tridiagonal
    problem B^{-1/2} A B^{-1/2} y = lambda y, f = B^{-1/2} y. The returned
    f_n are orthonormal in the trapezoidal rho_eq N^2 inner product, with the
    first interior sample positive.
    """
    _check_uniform(profile)
    n_modes = int(n_modes)
    nz = profile.size
    if n_modes < 1:
        raise InvalidParams("need at least one mode")
    if n_modes > nz / 4:
        raise ResolutionError(
            f"{n_modes} modes requested but a grid of {nz} points resolves at most {nz // 4}")
    if n2.n2.shape != profile.z.shape:
        raise GridError("N^2 samples do not match the profile grid")

    weight, gravity = _weight(profile)
    h = float(profile.z[1] - profile.z[0])
    a_diag, a_off, b = _tridiagonal(weight, n2.n2, h)
    s = 1.0 / np.sqrt(b)
    d = a_diag * s * s
    e = a_off * s[:-1] * s[1:]
    try:
        lam, y = eigh_tridiagonal(d, e, select="i", select_range=(0, n_modes - 1),
                                  lapack_driver="stebz", tol=np.finfo(float).tiny)
    except (LinAlgError, ValueError) as exc:
        raise EigenFailure(f"tridiagonal eigensolver failed: {exc}") from None
    if lam.size != n_modes or not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise EigenFailure("eigensolver returned invalid eigenvalues")
    if not np.all(np.diff(lam) > 0):
        raise EigenFailure("eigenvalues are not simple")

    f = np.zeros((n_modes, nz))
    f[:, 1:-1] = (y * s[:, None]).T
    f *= np.sign(f[:, 1])[:, None]
    return ModeSet(z=profile.z, speeds=1.0 / np.sqrt(lam), f=f, weight=weight,
                   n2=n2.n2, variant=profile.variant, gravity=gravity)


def derive_g(modes: ModeSet) -> ModeSet:
    """Populate g_0..g_M on the midpoints.

    g_n = c_n (f_n[i+1] - f_n[i]) / h and g_0 = alpha0 / rho_eq with
    alpha0 = (int 1/rho_eq)^{-1/2}, both integrated with the midpoint rule.
    """
    h = modes.h
    g = np.empty((modes.n_modes + 1, modes.z.size - 1))
    g[1:] = modes.speeds[:, None] * np.diff(modes.f, axis=1) / h
    wm = modes.weight_mid
    alpha0 = 1.0 / np.sqrt(np.sum(h / wm))
    g[0] = alpha0 / wm
    return replace(modes, g=g, alpha0=float(alpha0))


def explicit_modes(N: float, n_modes: int, grid_size: int, H: float = 1.0) -> ModeSet:
    """Closed-form modes of f'' + (N/c)^2 f = 0 with constant N.

    c_n = N H/(n pi), f_n = sqrt(2/H)/N sin(n pi (z+H)/H) and
    g_n = sqrt(2/H) cos(n pi (z+H)/H). The g_n are sampled at the midpoints.
    """
    if not (N > 0 and H > 0):
        raise InvalidParams("N and H must be positive")
    if n_modes < 1:
        raise InvalidParams("need at least one mode")
    if n_modes > grid_size / 4:
        raise ResolutionError(
            f"{n_modes} modes requested but a grid of {grid_size} points resolves at most {grid_size // 4}")
    z = np.linspace(-H, 0.0, grid_size)
    zm = 0.5 * (z[:-1] + z[1:])
    n = np.arange(1, n_modes + 1)[:, None]
    amp = np.sqrt(2.0 / H)
    f = amp / N * np.sin(n * np.pi * (z + H) / H)
    f[:, 0] = f[:, -1] = 0.0
    g = np.empty((n_modes + 1, grid_size - 1))
    g[0] = 1.0 / np.sqrt(H)
    g[1:] = amp * np.cos(n * np.pi * (zm + H) / H)
    return ModeSet(z=z, speeds=N * H / (np.pi * n[:, 0]), f=f, weight=np.ones(grid_size),
                   n2=np.full(grid_size, N * N), variant="boussinesq", gravity=1.0,
                   g=g, alpha0=1.0 / np.sqrt(H))


def g_at_nodes(modes: ModeSet) -> np.ndarray:
    """g_0..g_M linearly interpolated from the midpoints onto the nodes."""
    if modes.g is None:
        raise InvalidParams("g basis not derived")
    g = modes.g
    out = np.empty((g.shape[0], modes.z.size))
    out[:, 1:-1] = 0.5 * (g[:, :-1] + g[:, 1:])
    out[:, 0] = 1.5 * g[:, 0] - 0.5 * g[:, 1]
    out[:, -1] = 1.5 * g[:, -1] - 0.5 * g[:, -2]
    return out


def orthonormality_residual(modes: ModeSet, which: str) -> np.ndarray:
    """Gram matrix minus identity.

    ``f_basis``: f_n in the rho_eq N^2 weight. ``g_basis``: g_0..g_M in the
    rho_eq weight. ``weighted_dual``: rho_eq N^2 f_n in the 1/(rho_eq N^2)
    weight.
    """
    if which == "f_basis":
        G = (modes.f * (modes.node_weights * modes.weight * modes.n2)) @ modes.f.T
    elif which == "g_basis":
        if modes.g is None:
            raise InvalidParams("g basis not derived")
        G = (modes.g * (modes.mid_weights * modes.weight_mid)) @ modes.g.T
    elif which == "weighted_dual":
        wn = modes.weight * modes.n2
        dual = modes.f * wn
        G = (dual * (modes.node_weights / wn)) @ dual.T
    else:
        raise InvalidParams(f"unknown basis {which!r}")
    return G - np.eye(G.shape[0])


def rayleigh_quotient(profile: DensityProfile, n2: BruntVaisala, f) -> float:
    """Discrete f^T A f / f^T B f, using the interior samples of ``f``."""
    _check_uniform(profile)
    weight, _ = _weight(profile)
    h = float(profile.z[1] - profile.z[0])
    a_diag, a_off, b = _tridiagonal(weight, n2.n2, h)
    u = np.asarray(f, dtype=float)[1:-1]
    num = np.dot(u, a_diag * u) + 2.0 * np.dot(u[:-1], a_off * u[1:])
    return float(num / np.dot(u, b * u))
