"""Weakly nonlinear modal system for constant N (nondimensional, depth 1).

For n = 1..M, with c_n = N/(n pi),

    (1 + mu k^2/(n pi)^2) dV_hat_n/dt = -i k c_n rho_hat_n + eps F_n
    d rho_hat_n/dt = -i k c_n V_hat_n + eps G_n

where F_n and G_n are the quadratic selection-rule sums of
:class:`strato.mixing.InteractionTable`. Products are formed in physical
space and dealiased with the two-thirds rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import BlowupDetected, GridError, InvalidParams
from .mixing import InteractionTable, interaction_table
from .spectral import HorizontalGrid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NonlinearState:
    time: float
    V_hat: np.ndarray
    rho_hat: np.ndarray


class NonlinearModalSystem:
    """RHS evaluation and RK4 stepping.

    Parameters
    ----------
    n_modes : int
    grid : HorizontalGrid
    N, epsilon, mu : float
        0 <= epsilon <= 1 and 0 < mu <= 1.
    convention : {"projection", "displayed"}
        Coefficient set, see :func:`strato.mixing.interaction_table`.
    """

    def __init__(self, n_modes, grid: HorizontalGrid, N=np.pi, epsilon=0.1, mu=1.0,
                 convention="projection"):
        if not 0 <= epsilon <= 1:
            raise InvalidParams("epsilon must lie in [0, 1]")
        if not 0 < mu <= 1:
            raise InvalidParams("mu must lie in (0, 1]")
        if not N > 0:
            raise InvalidParams("N must be positive")
        self.grid = grid
        self.N = float(N)
        self.epsilon = float(epsilon)
        self.mu = float(mu)
        self.table: InteractionTable = interaction_table(n_modes, N, convention)
        n = np.arange(1, n_modes + 1)
        self.speeds = self.N / (n * np.pi)
        k2 = grid.k ** 2
        self._mass = 1.0 + self.mu * k2[None, :] / ((n * np.pi) ** 2)[:, None]
        self._mask = grid.dealias_mask

    @property
    def n_modes(self) -> int:
        return self.speeds.size

    def initial_state(self, V, rho, time=0.0) -> NonlinearState:
        V = np.asarray(V, dtype=float)
        rho = np.asarray(rho, dtype=float)
        shape = (self.n_modes, self.grid.n)
        if V.shape != shape or rho.shape != shape:
            raise GridError(f"initial fields must have shape {shape}")
        return NonlinearState(time, self._mask * self.grid.fft(V), self._mask * self.grid.fft(rho))

    def quadratic_terms(self, V_hat, rho_hat):
        """(F, G): the unscaled nonlinear sums, spectral and dealiased."""
        t = self.table
        grid = self.grid
        F = np.zeros_like(V_hat)
        G = np.zeros_like(rho_hat)
        if t.p.size == 0 or self.epsilon == 0.0:
            return F, G
        ik = 1j * grid.k
        V = grid.ifft(V_hat)
        Vx = grid.ifft(ik * V_hat)
        R = grid.ifft(rho_hat)
        Rx = grid.ifft(ik * rho_hat)
        p, q = t.p - 1, t.q - 1
        fv = t.cVV[:, None] * V[p] * Vx[q] + t.cDV[:, None] * Vx[p] * V[q]
        fr = t.cVR[:, None] * V[p] * Rx[q] + t.cDR[:, None] * Vx[p] * R[q]
        Fp = np.zeros((self.n_modes, grid.n))
        Gp = np.zeros((self.n_modes, grid.n))
        np.add.at(Fp, t.n - 1, fv)
        np.add.at(Gp, t.n - 1, fr)
        return self._mask * grid.fft(Fp), self._mask * grid.fft(Gp)

    def rhs(self, V_hat, rho_hat):
        ik = 1j * self.grid.k[None, :]
        c = self.speeds[:, None]
        F, G = self.quadratic_terms(V_hat, rho_hat)
        dV = (-c * ik * rho_hat + self.epsilon * F) / self._mass
        drho = -c * ik * V_hat + self.epsilon * G
        return dV, drho

    def step_rk4(self, state: NonlinearState, dt: float) -> NonlinearState:
        V, R = state.V_hat, state.rho_hat
        # overflow is reported below as BlowupDetected
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = self.rhs(V, R)
            k2 = self.rhs(V + 0.5 * dt * k1[0], R + 0.5 * dt * k1[1])
            k3 = self.rhs(V + 0.5 * dt * k2[0], R + 0.5 * dt * k2[1])
            k4 = self.rhs(V + dt * k3[0], R + dt * k3[1])
            V1 = V + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            R1 = R + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        t1 = state.time + dt
        if not (np.all(np.isfinite(V1)) and np.all(np.isfinite(R1))):
            raise BlowupDetected(f"non-finite state at t={t1:.6g}", time=t1)
        return NonlinearState(t1, V1, R1)

    def cfl_limit(self) -> float:
        return 0.5 * self.grid.dx / float(self.speeds.max())

    def run(self, state: NonlinearState, dt: float, n_steps: int, every: int = 0):
        """Advance ``n_steps`` RK4 steps; returns the final state and snapshots."""
        if not dt > 0:
            raise InvalidParams("dt must be positive")
        if dt > self.cfl_limit():
            log.warning("dt=%g exceeds the advisory limit %g", dt, self.cfl_limit())
        snaps = [state] if every else []
        for i in range(1, n_steps + 1):
            state = self.step_rk4(state, dt)
            if every and i % every == 0:
                snaps.append(state)
        return state, snaps

    def energy(self, state: NonlinearState) -> float:
        """sum_n sum_k (1 + mu k^2/(n pi)^2) |V_hat_n|^2 + |rho_hat_n|^2.

        Conserved by the projection coefficient set up to time-stepping error.
        """
        return float(np.sum(self._mass * np.abs(state.V_hat) ** 2) + np.sum(np.abs(state.rho_hat) ** 2))

    def physical(self, state: NonlinearState):
        return self.grid.ifft(state.V_hat), self.grid.ifft(state.rho_hat)


def mode_activation_history(trajectory, grid: HorizontalGrid):
    """Per-snapshot L2 norms over the period of V_n and rho_n.

    Returns (times, V_norms, rho_norms), the norm arrays of shape (T, M).
    """
    times = np.array([s.time for s in trajectory])
    vn = np.array([np.sqrt(grid.length * np.sum(np.abs(s.V_hat) ** 2, axis=-1)) for s in trajectory])
    rn = np.array([np.sqrt(grid.length * np.sum(np.abs(s.rho_hat) ** 2, axis=-1)) for s in trajectory])
    return times, vn, rn
