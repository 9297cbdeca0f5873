"""Run configuration: JSON files validated with pydantic, unknown keys rejected."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import InputError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProfileConfig(_Strict):
    kind: Literal["exponential", "constant_n", "tabulated", "smoothed_jump"]
    params: dict = Field(default_factory=dict)
    grid_size: int = Field(513, ge=3)
    H: float = Field(1.0, gt=0)
    g: float = Field(1.0, gt=0)
    variant: Literal["full", "boussinesq"] = "full"


class ModesConfig(_Strict):
    M: int = Field(8, ge=1)
    explicit: bool = False


class InitialComponent(_Strict):
    """One additive piece of the initial modal fields.

    ``cosine``: amplitude * cos(wavenumber * 2 pi x / L + phase).
    ``bump``: amplitude * exp((cos(2 pi (x - center) / L) - 1) / width^2).
    ``random``: smooth random field with Fourier indices 1..kmax, drawn
    from numpy's default generator seeded with ``seed``.
    """

    mode: int = Field(ge=1)
    field: Literal["V", "rho"]
    shape: Literal["cosine", "bump", "random"]
    amplitude: float = 1.0
    wavenumber: int = Field(1, ge=0)
    phase: float = 0.0
    center: float = 0.0
    width: float = Field(0.5, gt=0)
    seed: int = 0
    kmax: int = Field(4, ge=1)


class SimulateConfig(_Strict):
    kind: Literal["linear-uncoupled", "linear-coupled", "nonlinear"]
    Nx: int = Field(256, ge=4)
    L: float = Field(2.0 * math.pi, gt=0)
    dt: float = Field(gt=0)
    n_steps: int = Field(ge=1)
    snapshot_every: int = Field(0, ge=0)
    write_snapshots: bool = False
    epsilon: float = Field(0.1, ge=0, le=1)
    mu: float = Field(1.0, gt=0, le=1)
    N: float = Field(math.pi, gt=0)
    convention: Literal["projection", "displayed"] = "projection"
    initial: list[InitialComponent] = Field(default_factory=list)


class SharpLimitConfig(_Strict):
    rho_plus: float = 2.0
    rho_minus: float = 1.0
    z0: float = -1.0 / 3.0
    g: float = Field(1.0, gt=0)
    deltas: list[float] = Field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005])
    grid_size: Optional[int] = Field(None, ge=3)
    fit: Literal["all", "last_half"] = "last_half"


class RunConfig(_Strict):
    profile: Optional[ProfileConfig] = None
    modes: ModesConfig = ModesConfig()
    simulate: Optional[SimulateConfig] = None
    sharp_limit: SharpLimitConfig = SharpLimitConfig()
    output_dir: str = "out"

    @model_validator(mode="after")
    def _explicit_needs_constant_n(self):
        if self.modes.explicit:
            p = self.profile
            if p is None or p.kind != "constant_n" or p.variant != "boussinesq":
                raise ValueError("modes.explicit requires a boussinesq constant_n profile")
        return self


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InputError(f"{path}: {loc}: {first['msg']}") from None
