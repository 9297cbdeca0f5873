"""Dispersive and nonlinear inter-mode coupling coefficients."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from .errors import InvalidParams, MassMatrixDegenerate
from .sturm_liouville import ModeSet

log = logging.getLogger(__name__)

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def alpha_matrix(modes: ModeSet) -> np.ndarray:
    """alpha_mn = (f_m, f_n) in the rho_eq weight, trapezoidal rule."""
    F = modes.f
    a = (F * (modes.node_weights * modes.weight)) @ F.T
    return 0.5 * (a + a.T)


def selection_branch(p: int, q: int, n: int) -> int:
    """+1 if p + q = n, -1 if |p - q| = n, 0 otherwise."""
    if p + q == n:
        return 1
    if abs(p - q) == n:
        return -1
    return 0


def beta_gamma(p: int, q: int, n: int, N: float = 1.0):
    """Closed-form beta_pqn = (g_p g_q, g_n) and gamma_pqn = -N^2 (f_p f_q, g_n)
    for the constant-N modes on (-1, 0). Both are independent of N."""
    if min(p, q, n) < 1:
        raise InvalidParams("mode indices start at 1")
    branch = selection_branch(p, q, n)
    return (_SQRT_HALF if branch else 0.0), branch * _SQRT_HALF


def _gauss(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x - 1.0), 0.5 * w


def beta_gamma_quadrature(p: int, q: int, n: int, N: float = 1.0, nodes: int = 96):
    """beta_pqn and gamma_pqn by Gauss-Legendre quadrature of the explicit modes."""
    z, w = _gauss(nodes)
    g = lambda m: np.sqrt(2.0) * np.cos(m * np.pi * z)
    f = lambda m: np.sqrt(2.0) / N * np.sin(m * np.pi * z)
    beta = np.sum(w * g(p) * g(q) * g(n))
    gamma = -N * N * np.sum(w * f(p) * f(q) * g(n))
    return float(beta), float(gamma)


@dataclass(frozen=True)
class InteractionTable:
    """Flattened list of quadratic interactions feeding each mode.

    Each entry (p, q, n) is an ordered pair with p, q, n <= M satisfying
    p + q = n or |p - q| = n, together with the four coefficients of

        dV_n/dt += eps (cVV V_p dV_q/dx + cDV dV_p/dx V_q)
        drho_n/dt += eps (cVR V_p drho_q/dx + cDR dV_p/dx rho_q)

    ``dropped`` counts ordered pairs p, q <= M with p + q > M, whose output
    lies beyond the truncation.
    """

    p: np.ndarray
    q: np.ndarray
    n: np.ndarray
    cVV: np.ndarray
    cDV: np.ndarray
    cVR: np.ndarray
    cDR: np.ndarray
    n_modes: int
    convention: str
    dropped: int


def interaction_table(n_modes: int, N: float = 1.0, convention: str = "projection") -> InteractionTable:
    """Coefficients of the truncated nonlinear modal system.

    ``projection`` (default) uses the Galerkin projection of the advection
    terms onto the modes:

        cVV = -beta_pqn,              cDV = gamma_pqn q/p,
        cVR = -N^2 (g_p f_q, f_n),    cDR = N^2 (f_p g_q, f_n) q/p.

    ``displayed`` uses the signs V: -(1/sqrt2)[. +/- (q/p) .] and
    rho: +/-(1/sqrt2)(1/N^2)[. + (q/p) .], the +/- following the branch
    p + q = n or |p - q| = n. It is kept for comparison only; it does not
    conserve the modal energy.
    """
    if n_modes < 1:
        raise InvalidParams("need at least one mode")
    rows = []
    for n in range(1, n_modes + 1):
        for p in range(1, n_modes + 1):
            for q in range(1, n_modes + 1):
                plus, diff, rdiff = p + q == n, q - p == n, p - q == n
                if not (plus or diff or rdiff):
                    continue
                r = q / p
                if convention == "projection":
                    gam = _SQRT_HALF if plus else -_SQRT_HALF
                    cvv, cdv = -_SQRT_HALF, gam * r
                    cvr = -_SQRT_HALF * (plus + diff - rdiff)
                    cdr = _SQRT_HALF * r * (plus + rdiff - diff)
                elif convention == "displayed":
                    sgn = 1.0 if plus else -1.0
                    cvv, cdv = -_SQRT_HALF, -_SQRT_HALF * sgn * r
                    cvr = sgn * _SQRT_HALF / (N * N)
                    cdr = sgn * _SQRT_HALF * r / (N * N)
                else:
                    raise InvalidParams(f"unknown convention {convention!r}")
                rows.append((p, q, n, cvv, cdv, cvr, cdr))
    dropped = sum(1 for p in range(1, n_modes + 1) for q in range(1, n_modes + 1) if p + q > n_modes)
    if dropped:
        log.info("truncation at M=%d drops %d ordered pairs with p+q > M", n_modes, dropped)
    if rows:
        arr = np.array(rows)
    else:
        arr = np.zeros((0, 7))
    ints = arr[:, :3].astype(int)
    return InteractionTable(p=ints[:, 0], q=ints[:, 1], n=ints[:, 2],
                            cVV=arr[:, 3], cDV=arr[:, 4], cVR=arr[:, 5], cDR=arr[:, 6],
                            n_modes=n_modes, convention=convention, dropped=dropped)


def interaction_table_quadrature(n_modes: int, N: float = 1.0, nodes: int = 128, tol: float = 1e-12):
    """Brute-force triple loop over the projection integrals.

    Returns a dict (p, q, n) -> (cVV, cDV, cVR, cDR) for every triple with a
    coefficient larger than ``tol``.
    """
    z, w = _gauss(nodes)
    m = np.arange(1, n_modes + 1)[:, None]
    f = np.sqrt(2.0) / N * np.sin(m * np.pi * z)
    g = np.sqrt(2.0) * np.cos(m * np.pi * z)
    out = {}
    for n in range(n_modes):
        for p in range(n_modes):
            for q in range(n_modes):
                r = (q + 1) / (p + 1)
                beta = np.sum(w * g[p] * g[q] * g[n])
                gamma = -N * N * np.sum(w * f[p] * f[q] * g[n])
                cvr = -N * N * np.sum(w * g[p] * f[q] * f[n])
                cdr = N * N * r * np.sum(w * f[p] * g[q] * f[n])
                vals = (-beta, gamma * r, cvr, cdr)
                if max(abs(v) for v in vals) > tol:
                    out[(p + 1, q + 1, n + 1)] = vals
    return out


def coupled_mass_matrix(alpha, speeds, k, mu: float = 1.0) -> np.ndarray:
    """A(k) = I + mu k^2 C alpha C with C = diag(speeds); checked SPD by Cholesky."""
    alpha = np.asarray(alpha, dtype=float)
    c = np.asarray(speeds, dtype=float)
    A = np.eye(c.size) + mu * k * k * (c[:, None] * alpha * c[None, :])
    try:
        cholesky(A, lower=True)
    except LinAlgError:
        raise MassMatrixDegenerate(f"A(k) is not positive definite at k={k}") from None
    return A
