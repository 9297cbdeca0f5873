"""Projection onto the vertical bases, reconstruction and boundary diagnostics.

Field layout follows the staggering of :mod:`strato.sturm_liouville`: w and
rho are sampled at the vertical nodes, V and P at the midpoints. The first
axis of every field array is vertical; any trailing axes (typically the
horizontal grid) are carried through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import GridError, InvalidParams, OperatorSingular
from .spectral import HorizontalGrid
from .sturm_liouville import ModeSet
from .stratification import BruntVaisala, DensityProfile

BASES = ("f_weighted", "g_weighted", "dual")


@dataclass(frozen=True)
class ModalCoefficients:
    """Per-mode horizontal fields. V and P carry n = 0..M, w and rho n = 1..M."""

    V: np.ndarray
    w: np.ndarray
    rho: np.ndarray
    P: np.ndarray
    length: float = 2.0 * np.pi

    @property
    def n_modes(self) -> int:
        return self.w.shape[0]

    def __post_init__(self):
        M = self.w.shape[0]
        if self.rho.shape[0] != M or self.V.shape[0] != M + 1 or self.P.shape[0] != M + 1:
            raise GridError("inconsistent mode counts in coefficient arrays")
        tails = {a.shape[1:] for a in (self.V, self.w, self.rho, self.P)}
        if len(tails) != 1:
            raise GridError("coefficient fields do not share a horizontal grid")


@dataclass(frozen=True)
class PhysicalFields:
    """V, P on midpoints (Nz-1, ...); w, rho on nodes (Nz, ...)."""

    V: np.ndarray
    w: np.ndarray
    rho: np.ndarray
    P: np.ndarray


def _check_rows(field, rows, what):
    field = np.asarray(field, dtype=float)
    if field.shape[0] != rows:
        raise GridError(f"{what} field has {field.shape[0]} vertical samples, expected {rows}")
    return field


def _contract(basis, weights, field):
    # sum over the vertical axis of basis[n, i] * weights[i] * field[i, ...]
    return np.tensordot(basis * weights, field, axes=(1, 0))


def project(field, modes: ModeSet, basis: str):
    """Weighted vertical quadrature of ``field`` against each basis function.

    ``f_weighted``: (F, f_n) in the rho_eq N^2 weight, nodes, n = 1..M.
    ``g_weighted``: (F, g_n) in the rho_eq weight, midpoints, n = 0..M.
    ``dual``: (F, rho_eq N^2 f_n) in the 1/(rho_eq N^2) weight, i.e. the plain
    integral of F f_n, nodes, n = 1..M.
    """
    nz = modes.z.size
    if basis == "f_weighted":
        field = _check_rows(field, nz, "node")
        return _contract(modes.f, modes.node_weights * modes.weight * modes.n2, field)
    if basis == "g_weighted":
        if modes.g is None:
            raise InvalidParams("g basis not derived")
        field = _check_rows(field, nz - 1, "midpoint")
        return _contract(modes.g, modes.mid_weights * modes.weight_mid, field)
    if basis == "dual":
        field = _check_rows(field, nz, "node")
        return _contract(modes.f, modes.node_weights, field)
    raise InvalidParams(f"unknown basis {basis!r}; expected one of {BASES}")


def _expand(basis, coeffs):
    return np.tensordot(basis.T, coeffs, axes=(1, 0))


def decompose(fields: PhysicalFields, modes: ModeSet, length=2.0 * np.pi) -> ModalCoefficients:
    """Modal coefficients of physical fields, inverse of :func:`reconstruct` on the span."""
    wm = modes.weight_mid
    P = _check_rows(fields.P, modes.z.size - 1, "midpoint")
    return ModalCoefficients(
        V=project(fields.V, modes, "g_weighted"),
        w=project(fields.w, modes, "f_weighted"),
        rho=modes.gravity * project(fields.rho, modes, "dual"),
        P=project(P / wm.reshape((-1,) + (1,) * (P.ndim - 1)), modes, "g_weighted"),
        length=length,
    )


def reconstruct(coeffs: ModalCoefficients, modes: ModeSet) -> PhysicalFields:
    """V = sum V_n g_n, w = sum w_n f_n, rho = (1/g) sum rho_n rho_eq N^2 f_n,
    P = sum P_n rho_eq g_n."""
    if modes.g is None:
        raise InvalidParams("g basis not derived")
    if coeffs.n_modes != modes.n_modes:
        raise GridError("coefficients and modes have different truncations")
    V = _expand(modes.g, coeffs.V)
    w = _expand(modes.f, coeffs.w)
    rho = _expand(modes.f * (modes.weight * modes.n2 / modes.gravity), coeffs.rho)
    P = _expand(modes.g * modes.weight_mid, coeffs.P)
    return PhysicalFields(V=V, w=w, rho=rho, P=P)


def weighted_norm2(field, modes: ModeSet, kind: str):
    """Vertical weighted squared norm, per horizontal sample.

    ``V``: rho_eq weight on midpoints. ``w``: rho_eq N^2 weight on nodes.
    ``rho``: g^2 rho^2 / (rho_eq N^2) on nodes.
    """
    field = np.asarray(field, dtype=float)
    if kind == "V":
        field = _check_rows(field, modes.z.size - 1, "midpoint")
        q = modes.mid_weights * modes.weight_mid
    elif kind == "w":
        field = _check_rows(field, modes.z.size, "node")
        q = modes.node_weights * modes.weight * modes.n2
    elif kind == "rho":
        field = _check_rows(field, modes.z.size, "node")
        q = modes.node_weights * modes.gravity ** 2 / (modes.weight * modes.n2)
    else:
        raise InvalidParams(f"unknown norm kind {kind!r}")
    return np.tensordot(q, field ** 2, axes=(0, 0))


def vertical_derivative_coeffs(coeffs, modes: ModeSet, kind: str):
    """Modal coefficients of a vertical derivative.

    ``kind="w"``: input w_1..w_M, output the g-basis coefficients of d/dz w,
    which are w_n / c_n (the g_0 coefficient is zero).
    ``kind="P"``: input P_0..P_M, output the coefficients of d/dz P on the
    family rho_eq N^2 f_n, which are -P_n / c_n (P_0 drops out).
    """
    coeffs = np.asarray(coeffs)
    c = modes.speeds.reshape((-1,) + (1,) * (coeffs.ndim - 1))
    if kind == "w":
        if coeffs.shape[0] != modes.n_modes:
            raise GridError("expected M coefficients for w")
        out = np.zeros((modes.n_modes + 1,) + coeffs.shape[1:], dtype=coeffs.dtype)
        out[1:] = coeffs / c
        return out
    if kind == "P":
        if coeffs.shape[0] != modes.n_modes + 1:
            raise GridError("expected M+1 coefficients for P")
        return -coeffs[1:] / c
    raise InvalidParams(f"unknown derivative kind {kind!r}")


# ---------------------------------------------------------------------------
# T1 / T2 compatibility operators


@dataclass(frozen=True)
class VerticalOperatorPair:
    """Sparse node-to-interior discretizations of T1, T2 and their adjoints.

    Each matrix maps the Nz node values to the Nz-2 interior nodes.
    """

    z: np.ndarray
    weight: np.ndarray
    T1: sparse.csr_matrix
    T1_adj: sparse.csr_matrix
    T2: sparse.csr_matrix
    T2_adj: sparse.csr_matrix

    @property
    def h(self) -> float:
        return float(self.z[1] - self.z[0])


def vertical_operators(profile: DensityProfile, n2: BruntVaisala, floor=1e-8) -> VerticalOperatorPair:
    """Assemble T1 = d(a d(w .)), T2 = d(w d(a .)) and adjoints with a = 1/(-w').

    w is rho_eq (full) or 1 (boussinesq); -w' is taken as w N^2 / g so that it
    is consistent with the buoyancy frequency used by the eigensolver. The
    adjoints are assembled from their own stencils, T1* = w d(a d .) and
    T2* = a d(w d .).
    """
    if not profile.is_uniform():
        raise GridError("the vertical operators need a uniform grid")
    if profile.variant == "full":
        w, grav = profile.rho, profile.g
    else:
        w, grav = np.ones_like(profile.rho), 1.0
    slope = w * n2.n2 / grav
    if np.any(slope < floor * np.max(slope)):
        raise OperatorSingular("rho_eq' is too close to zero for T1/T2")
    a = 1.0 / slope
    nz = profile.size
    h = float(profile.z[1] - profile.z[0])
    Dp = sparse.diags([-np.ones(nz - 1), np.ones(nz - 1)], [0, 1], shape=(nz - 1, nz)) / h
    Dm = sparse.diags([-np.ones(nz - 2), np.ones(nz - 2)], [0, 1], shape=(nz - 2, nz - 1)) / h
    a_mid = sparse.diags(0.5 * (a[:-1] + a[1:]))
    w_mid = sparse.diags(0.5 * (w[:-1] + w[1:]))
    T1 = Dm @ a_mid @ Dp @ sparse.diags(w)
    T1_adj = sparse.diags(w[1:-1]) @ Dm @ a_mid @ Dp
    T2 = Dm @ w_mid @ Dp @ sparse.diags(a)
    T2_adj = sparse.diags(a[1:-1]) @ Dm @ w_mid @ Dp
    return VerticalOperatorPair(z=profile.z, weight=np.array(w),
                                T1=T1.tocsr(), T1_adj=T1_adj.tocsr(),
                                T2=T2.tocsr(), T2_adj=T2_adj.tocsr())


def _apply(op, u):
    # interior values, then cubic extrapolation to the two boundary nodes.
    # Linear extrapolation leaves an O(h^2) defect that the next second-order
    # operator turns into an O(1) error.
    inner = op @ u
    out = np.empty((inner.shape[0] + 2,) + inner.shape[1:])
    out[1:-1] = inner
    out[0] = 4.0 * inner[0] - 6.0 * inner[1] + 4.0 * inner[2] - inner[3]
    out[-1] = 4.0 * inner[-1] - 6.0 * inner[-2] + 4.0 * inner[-3] - inner[-4]
    return out


def _traces(u):
    return np.stack([np.max(np.abs(np.atleast_1d(u[0]))), np.max(np.abs(np.atleast_1d(u[-1])))])


def _derivative_traces(u, h):
    bottom = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
    top = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
    return np.stack([np.max(np.abs(np.atleast_1d(bottom))), np.max(np.abs(np.atleast_1d(top)))])


@dataclass(frozen=True)
class CompatibilityReport:
    """Boundary traces (bottom, top) for l = 0..k. Row 0 of ``V`` is NaN."""

    V: np.ndarray
    w: np.ndarray
    rho: np.ndarray

    def max_residual(self) -> float:
        return float(np.nanmax(np.concatenate([self.V.ravel(), self.w.ravel(), self.rho.ravel()])))


def compatibility_check(V0, w0, rho0, ops: VerticalOperatorPair, k: int) -> CompatibilityReport:
    """Traces of d/dz(w T1^{l-1} V0), (T2*)^l w0 and T2^l rho0 at z = -H, 0.

    All three fields are sampled at the nodes. The V condition carries the
    weight w = rho_eq inside the derivative; for the boussinesq weight it is
    the plain d/dz T1^{l-1} V0.

    Each power multiplies round-off by about (2/h)^2, so orders l >= 3 need
    coarse grids (a few hundred points) to stay above the noise floor.
    """
    if k < 1:
        raise InvalidParams("k must be at least 1")
    nz = ops.z.size
    V0, w0, rho0 = (_check_rows(a, nz, "node") for a in (V0, w0, rho0))
    wshape = ops.weight.reshape((-1,) + (1,) * (V0.ndim - 1))
    rV = np.full((k + 1, 2), np.nan)
    rw = np.empty((k + 1, 2))
    rr = np.empty((k + 1, 2))
    v, ww, rr_field = V0, w0, rho0
    for l in range(k + 1):
        if l >= 1:
            rV[l] = _derivative_traces(wshape * v, ops.h)
            v = _apply(ops.T1, v)
            ww = _apply(ops.T2_adj, ww)
            rr_field = _apply(ops.T2, rr_field)
        rw[l] = _traces(ww)
        rr[l] = _traces(rr_field)
    return CompatibilityReport(V=rV, w=rw, rho=rr)


def modal_decay_report(coeffs: ModalCoefficients, speeds, nu: float, s: float, grid: HorizontalGrid | None = None):
    """Partial sums over n of c_n^{-2 nu} (|V_n|^2 + |w_n|^2 + |rho_n|^2) in H^{s-nu}.

    Only n >= 1 enters. Returns an array of length M, nondecreasing.
    """
    speeds = np.asarray(speeds, dtype=float)
    if speeds.size != coeffs.n_modes:
        raise GridError("speeds and coefficients disagree on M")
    if grid is None:
        grid = HorizontalGrid(coeffs.w.shape[-1], coeffs.length)
    r = s - nu
    terms = (grid.sobolev_norm2(coeffs.V[1:], r) + grid.sobolev_norm2(coeffs.w, r)
             + grid.sobolev_norm2(coeffs.rho, r))
    return np.cumsum(speeds ** (-2.0 * nu) * terms)
