"""Linear modal dynamics on a periodic horizontal grid.

Each mode n = 1..M carries spectral fields V_hat_n(k) and rho_hat_n(k) and obeys

    A(k) dV_hat/dt = -i k C rho_hat,     d rho_hat/dt = -i k C V_hat,

with C = diag(c_n) and A(k) = I + mu k^2 C alpha C. With constant N, alpha is
diagonal and every (n, k) pair is an independent 2x2 rotation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from .errors import GridError, InvalidParams, StepFailure
from .mixing import alpha_matrix, coupled_mass_matrix
from .modal_transform import ModalCoefficients, reconstruct
from .spectral import HorizontalGrid
from .sturm_liouville import ModeSet

COUPLINGS = ("uncoupled", "coupled")


@dataclass(frozen=True)
class LinearState:
    time: float
    V_hat: np.ndarray
    rho_hat: np.ndarray

    def __post_init__(self):
        if self.V_hat.shape != self.rho_hat.shape or self.V_hat.ndim != 2:
            raise GridError("V_hat and rho_hat must both be (M, Nx)")


def dispersion(n: int, k, modes: ModeSet, mu: float = 1.0):
    """omega_n(k) = c_n |k| / sqrt(1 + mu c_n^2 k^2 / N^2) for constant N."""
    N = modes.buoyancy_frequency()
    c = modes.speeds[n - 1]
    k = np.asarray(k, dtype=float)
    return c * np.abs(k) / np.sqrt(1.0 + mu * c * c * k * k / (N * N))


class LinearModalSystem:
    """Time stepping and diagnostics for the linear modal equations.

    Parameters
    ----------
    modes : ModeSet
    grid : HorizontalGrid
    coupling : {"uncoupled", "coupled"}
        ``uncoupled`` keeps only the diagonal of alpha and applies the exact
        propagator; ``coupled`` uses the full alpha with implicit midpoint.
    alpha : array, optional
        Interaction matrix; computed from ``modes`` when omitted.
    mu : float
        Weight of the dispersive term.
    """

    def __init__(self, modes: ModeSet, grid: HorizontalGrid, coupling="uncoupled", alpha=None, mu=1.0):
        if coupling not in COUPLINGS:
            raise InvalidParams(f"coupling must be one of {COUPLINGS}")
        if not mu > 0:
            raise InvalidParams("mu must be positive")
        self.modes = modes
        self.grid = grid
        self.coupling = coupling
        self.mu = float(mu)
        self.alpha = alpha_matrix(modes) if alpha is None else np.asarray(alpha, dtype=float)
        if self.alpha.shape != (modes.n_modes, modes.n_modes):
            raise GridError("alpha does not match the number of modes")
        self._propagators = {}

    @property
    def speeds(self):
        return self.modes.speeds

    def _diag_mass(self):
        k = self.grid.k
        c = self.speeds
        return 1.0 + self.mu * (c * c * np.diag(self.alpha))[:, None] * (k * k)[None, :]

    def mass_matrices(self):
        """A(k) for every wavenumber, shape (Nx, M, M)."""
        c = self.speeds
        base = c[:, None] * self.alpha * c[None, :]
        k2 = self.grid.k ** 2
        return np.eye(c.size)[None] + self.mu * k2[:, None, None] * base[None]

    def initial_state(self, V, rho, time=0.0) -> LinearState:
        """State from physical-space coefficient fields of shape (M, Nx)."""
        V = np.asarray(V, dtype=float)
        rho = np.asarray(rho, dtype=float)
        shape = (self.modes.n_modes, self.grid.n)
        if V.shape != shape or rho.shape != shape:
            raise GridError(f"initial fields must have shape {shape}")
        return LinearState(time, self.grid.fft(V), self.grid.fft(rho))

    def physical(self, state: LinearState):
        return self.grid.ifft(state.V_hat), self.grid.ifft(state.rho_hat)

    def step(self, state: LinearState, dt: float) -> LinearState:
        if self.coupling == "uncoupled":
            return self.step_uncoupled(state, dt)
        return self.step_coupled(state, dt)

    def step_uncoupled(self, state: LinearState, dt: float) -> LinearState:
        """Exact per-(n, k) rotation."""
        m = self._diag_mass()
        sm = np.sqrt(m)
        theta = self.speeds[:, None] * self.grid.k[None, :] / sm * dt
        cs, sn = np.cos(theta), np.sin(theta)
        V, r = state.V_hat, state.rho_hat
        V1 = cs * V - 1j * sn * r / sm
        r1 = -1j * sn * sm * V + cs * r
        return LinearState(state.time + dt, V1, r1)

    def _propagator(self, dt):
        key = float(dt)
        if key not in self._propagators:
            M = self.modes.n_modes
            A = self.mass_matrices()
            c = self.speeds
            k = self.grid.k
            n = self.grid.n
            half = n // 2
            prop = np.empty((n, 2 * M, 2 * M), dtype=complex)
            for j in range(half + 1):
                # J = -i k [[0, C], [C, 0]]; mass = diag(A, I)
                Jb = -1j * k[j] * np.diag(c)
                mass = np.zeros((2 * M, 2 * M), dtype=complex)
                mass[:M, :M] = A[j]
                mass[M:, M:] = np.eye(M)
                J = np.zeros_like(mass)
                J[:M, M:] = Jb
                J[M:, :M] = Jb
                try:
                    lu = lu_factor(mass - 0.5 * dt * J)
                except (LinAlgError, ValueError) as exc:
                    raise StepFailure(f"singular midpoint matrix at k={k[j]}: {exc}") from None
                prop[j] = lu_solve(lu, mass + 0.5 * dt * J)
                if not np.all(np.isfinite(prop[j])):
                    raise StepFailure(f"singular midpoint matrix at k={k[j]}")
            for j in range(half + 1, n):
                prop[j] = np.conj(prop[n - j])
            self._propagators = {key: prop}
        return self._propagators[key]

    def step_coupled(self, state: LinearState, dt: float) -> LinearState:
        """Implicit midpoint step with per-wavenumber propagators cached per dt."""
        prop = self._propagator(dt)
        y = np.concatenate([state.V_hat, state.rho_hat], axis=0)
        y1 = np.einsum("kij,jk->ik", prop, y)
        M = self.modes.n_modes
        return LinearState(state.time + dt, y1[:M], y1[M:])

    def run(self, state: LinearState, dt: float, n_steps: int, every: int = 0):
        """Advance ``n_steps``; returns the final state and saved snapshots.

        The uncoupled propagator is exact, so each time is reached directly
        from the start state and round-off does not compound over steps.
        """
        snaps = [state] if every else []
        start = state
        for i in range(1, n_steps + 1):
            if self.coupling == "uncoupled":
                state = self.step_uncoupled(start, i * dt)
            else:
                state = self.step(state, dt)
            if every and i % every == 0:
                snaps.append(state)
        return state, snaps

    def time_derivative(self, state: LinearState):
        """(dV_hat/dt, drho_hat/dt) of the system being stepped."""
        k = self.grid.k
        c = self.speeds[:, None]
        rhs_V = -1j * k[None, :] * c * state.rho_hat
        if self.coupling == "uncoupled":
            dV = rhs_V / self._diag_mass()
        else:
            dV = np.linalg.solve(self.mass_matrices(), rhs_V.T[:, :, None])[:, :, 0].T
        return dV, -1j * k[None, :] * c * state.V_hat

    def energy(self, state: LinearState) -> float:
        """sum_k [ V^H A(k) V + |rho|^2 ] with the mass matrix of this system."""
        V = state.V_hat
        if self.coupling == "uncoupled":
            quad = np.sum(self._diag_mass() * np.abs(V) ** 2)
        else:
            quad = np.einsum("ik,kij,jk->", np.conj(V), self.mass_matrices(), V)
        return float(np.real(quad) + np.sum(np.abs(state.rho_hat) ** 2))

    def pressure_hat(self, dV_hat, rho_hat):
        """P_n = c_n rho_n + mu c_n sum_m alpha_mn dw_m/dt, with w_m = -c_m dV_m/dx."""
        c = self.speeds[:, None]
        dw = -c * 1j * self.grid.k[None, :] * dV_hat
        alpha = self.alpha if self.coupling == "coupled" else np.diag(np.diag(self.alpha))
        return c * (rho_hat + self.mu * (alpha @ dw))

    def to_coefficients(self, state: LinearState, dV_hat=None) -> ModalCoefficients:
        """Physical modal coefficients including the diagnosed w_n and P_n."""
        if dV_hat is None:
            dV_hat, _ = self.time_derivative(state)
        c = self.speeds[:, None]
        k = self.grid.k[None, :]
        ifft = self.grid.ifft
        zero = np.zeros((1, self.grid.n))
        return ModalCoefficients(
            V=np.vstack([zero, ifft(state.V_hat)]),
            w=ifft(-c * 1j * k * state.V_hat),
            rho=ifft(state.rho_hat),
            P=np.vstack([zero, ifft(self.pressure_hat(dV_hat, state.rho_hat))]),
            length=self.grid.length,
        )


def linear_energy(system: LinearModalSystem, state: LinearState) -> float:
    return system.energy(state)


@dataclass(frozen=True)
class ResidualReport:
    """Max-norm residuals of the four physical linear equations."""

    horizontal_momentum: float
    vertical_momentum: float
    density: float
    divergence: float
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {"horizontal_momentum": self.horizontal_momentum,
                "vertical_momentum": self.vertical_momentum,
                "density": self.density, "divergence": self.divergence}


def pde_residual(system: LinearModalSystem, state0: LinearState, state1: LinearState) -> ResidualReport:
    """Residuals of the linear equations between two saved states.

        dV/dt + (1/w) dP/dx = 0                (midpoints)
        mu dw/dt + (1/w)(dP/dz + g rho) = 0    (interior nodes)
        d rho/dt - (w N^2 / g) w_vel = 0       (nodes)
        dV/dx + dw/dz = 0                      (midpoints)

    Time derivatives are differences between the two states, other fields
    are averaged between them, so the residual is centered at the mid time.
    x derivatives are spectral, z derivatives are staggered differences.
    """
    dt = state1.time - state0.time
    if not dt > 0:
        raise InvalidParams("state1 must be later than state0")
    modes = system.modes
    grid = system.grid
    dV_hat = (state1.V_hat - state0.V_hat) / dt
    mid = LinearState(0.5 * (state0.time + state1.time),
                      0.5 * (state0.V_hat + state1.V_hat),
                      0.5 * (state0.rho_hat + state1.rho_hat))
    phys = reconstruct(system.to_coefficients(mid, dV_hat), modes)
    c = modes.speeds[:, None]
    zero = np.zeros((1, grid.n))
    dVdt = reconstruct(ModalCoefficients(
        V=np.vstack([zero, grid.ifft(dV_hat)]),
        w=grid.ifft(-c * 1j * grid.k * dV_hat),
        rho=np.zeros((modes.n_modes, grid.n)),
        P=np.zeros((modes.n_modes + 1, grid.n)), length=grid.length), modes)
    wn = modes.weight[:, None]
    wm = modes.weight_mid[:, None]
    h = modes.h
    r1 = dVdt.V + grid.ddx(phys.P) / wm
    dPdz = np.diff(phys.P, axis=0) / h
    r2 = system.mu * dVdt.w[1:-1] + (dPdz + modes.gravity * phys.rho[1:-1]) / wn[1:-1]
    drho = (grid.ifft(state1.rho_hat) - grid.ifft(state0.rho_hat)) / dt
    drho_phys = np.tensordot((modes.f * (modes.weight * modes.n2 / modes.gravity)).T, drho, axes=(1, 0))
    r3 = drho_phys - (modes.weight * modes.n2 / modes.gravity)[:, None] * phys.w
    r4 = grid.ddx(phys.V) + np.diff(phys.w, axis=0) / h
    return ResidualReport(*(float(np.max(np.abs(r))) for r in (r1, r2, r3, r4)))
