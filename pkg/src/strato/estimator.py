"""Scikit-learn style front end for the vertical mode decomposition."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import GridError, InvalidParams
from .mixing import alpha_matrix
from .stratification import DensityProfile, brunt_vaisala
from .sturm_liouville import derive_g, solve_modes

FIELDS = ("w", "rho", "V", "P")


class VerticalModeDecomposition(TransformerMixin, BaseEstimator):
    """Project vertical profiles onto the normal modes of a stratification.

    ``fit`` takes the background stratification, either a
    :class:`~strato.stratification.DensityProfile` or an array with columns
    (z, rho). ``transform`` then maps an array of vertical profiles, one per
    row, to modal coefficients; ``inverse_transform`` maps them back.

    Parameters
    ----------
    n_modes : int
    field : {"w", "rho", "V", "P"}
        Which physical field the rows hold. w and rho are sampled at the
        grid nodes (Nz features), V and P at the midpoints (Nz-1 features).
        V and P coefficients include the barotropic n = 0 term.
    variant : {"full", "boussinesq"}
        Used when ``fit`` receives a raw array.
    g : float
        Gravity, used when ``fit`` receives a raw array.

    Attributes
    ----------
    modes_ : ModeSet
    speeds_ : ndarray of shape (n_modes,)
    alpha_ : ndarray of shape (n_modes, n_modes)
    """

    def __init__(self, n_modes=8, field="w", variant="full", g=1.0):
        self.n_modes = n_modes
        self.field = field
        self.variant = variant
        self.g = g

    def fit(self, X, y=None):
        if self.field not in FIELDS:
            raise InvalidParams(f"field must be one of {FIELDS}")
        if isinstance(X, DensityProfile):
            profile = X
        else:
            arr = check_array(X, ensure_min_samples=3)
            if arr.shape[1] != 2:
                raise GridError("expected an array with columns (z, rho)")
            profile = DensityProfile(arr[:, 0], arr[:, 1], g=self.g, variant=self.variant)
        self.modes_ = derive_g(solve_modes(profile, brunt_vaisala(profile), self.n_modes))
        self.speeds_ = np.array(self.modes_.speeds)
        self.alpha_ = alpha_matrix(self.modes_)
        self.n_features_in_ = self._n_features()
        return self

    def _n_features(self):
        nz = self.modes_.z.size
        return nz if self.field in ("w", "rho") else nz - 1

    def _layout(self):
        m = self.modes_
        if self.field == "w":
            return m.f, m.node_weights * m.weight * m.n2, m.f
        if self.field == "rho":
            return m.f, m.node_weights * m.gravity, m.f * (m.weight * m.n2 / m.gravity)
        wm = m.weight_mid
        if self.field == "V":
            return m.g, m.mid_weights * wm, m.g
        return m.g, m.mid_weights, m.g * wm

    def transform(self, X):
        check_is_fitted(self, "modes_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise GridError(f"expected {self.n_features_in_} vertical samples, got {X.shape[1]}")
        basis, weights, _ = self._layout()
        return X @ (basis * weights).T

    def inverse_transform(self, X):
        check_is_fitted(self, "modes_")
        _, _, synth = self._layout()
        X = check_array(X)
        if X.shape[1] != synth.shape[0]:
            raise GridError(f"expected {synth.shape[0]} coefficients, got {X.shape[1]}")
        return X @ synth
