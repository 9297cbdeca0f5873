"""Periodic horizontal grid and Fourier helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams


@dataclass(frozen=True)
class HorizontalGrid:
    """Uniform periodic grid of ``n`` points on [0, length).

    Spectral coefficients use the forward-normalized DFT, so the k = 0
    coefficient is the horizontal mean. The Nyquist wavenumber is set to
    zero in ``k`` so that spectral derivatives of real fields stay real.
    """

    n: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise InvalidParams("Nx must be an even integer >= 4")
        if not self.length > 0:
            raise InvalidParams("L must be positive")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * (self.length / self.n)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def index(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1.0 / self.n)

    @property
    def k(self) -> np.ndarray:
        k = 2.0 * np.pi / self.length * self.index
        k[self.n // 2] = 0.0
        return k

    @property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep |m| < n/3."""
        return np.abs(self.index) < self.n / 3.0

    def fft(self, u):
        return np.fft.fft(u, axis=-1, norm="forward")

    def ifft(self, u_hat):
        return np.fft.ifft(u_hat, axis=-1, norm="forward").real

    def ddx(self, u):
        return self.ifft(1j * self.k * self.fft(u))

    def sobolev_norm2(self, u, r=0.0):
        """Squared H^r norm on the period, L * sum (1+k^2)^r |u_hat|^2."""
        u_hat = self.fft(u)
        w = (1.0 + self.k ** 2) ** r
        return self.length * np.sum(w * np.abs(u_hat) ** 2, axis=-1)


def conjugate_defect(u_hat) -> float:
    """max |u_hat(k) - conj(u_hat(-k))| over the last axis."""
    u_hat = np.asarray(u_hat)
    mirrored = np.roll(u_hat[..., ::-1], 1, axis=-1)
    return float(np.max(np.abs(u_hat - np.conj(mirrored)), initial=0.0))
