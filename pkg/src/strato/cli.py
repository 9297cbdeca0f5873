"""Command-line entry point: ``strato <modes|mixing|simulate|sharp-limit> --config PATH``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import RunConfig, load_config
from .errors import InputError, StratoError
from .linear_dynamics import LinearModalSystem
from .mixing import alpha_matrix, beta_gamma, coupled_mass_matrix, selection_branch
from .nonlinear_dynamics import NonlinearModalSystem, mode_activation_history
from .sharp_limit import delta_sweep
from .spectral import HorizontalGrid
from .stratification import brunt_vaisala, build_profile
from .sturm_liouville import (derive_g, explicit_modes, g_at_nodes, orthonormality_residual,
                              solve_modes)

log = logging.getLogger("strato")

CONVENTIONS = {
    "eigenfunction_sign": "first interior sample of f_n positive (f_n'(-H) > 0)",
    "f_normalization": "trapezoidal rule, weight rho_eq N^2",
    "g_basis": "g_n = c_n forward difference of f_n at midpoints; g_0 = alpha/rho_eq; midpoint rule, weight rho_eq",
    "modes_csv_g": "g columns in modes.csv are interpolated to the nodes; modes_mid.csv holds the exact midpoint samples",
    "eigensolver": "bisection + inverse iteration on the symmetrized tridiagonal pencil",
    "fft_normalization": "forward (k=0 coefficient is the horizontal mean); Nyquist wavenumber set to 0",
    "dealias": "2/3 rule, keep |m| < Nx/3",
    "nonlinear_time_stepping": "classical RK4",
    "linear_coupled_time_stepping": "implicit midpoint",
    "linear_uncoupled_time_stepping": "exact per-(n,k) rotation",
    "sharp_limit_normalization": "f_1 and fbar scaled to 1 at z0",
    "csv_float_format": ".17g",
}


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_manifest(out: Path, command: str, config: RunConfig, extra: dict):
    manifest = {
        "command": command,
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "config": config.model_dump(mode="json"),
        "conventions": CONVENTIONS,
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


def _profile(config: RunConfig, base: Path):
    p = config.profile
    if p is None:
        raise InputError("this command needs a 'profile' block")
    params = dict(p.params)
    if p.kind == "tabulated" and "path" in params:
        path = Path(params["path"])
        params["path"] = path if path.is_absolute() else base / path
    return build_profile(p.kind, params, p.grid_size, H=p.H, g=p.g, variant=p.variant)


def _modes(config: RunConfig, base: Path):
    p = config.profile
    if config.modes.explicit:
        return explicit_modes(float(p.params["N"]), config.modes.M, p.grid_size, H=p.H)
    profile = _profile(config, base)
    return derive_g(solve_modes(profile, brunt_vaisala(profile), config.modes.M))


def cmd_modes(config: RunConfig, out: Path, base: Path):
    modes = _modes(config, base)
    M = modes.n_modes
    write_csv(out / "speeds.csv", ["n", "c_n"], ((n + 1, c) for n, c in enumerate(modes.speeds)))
    gn = g_at_nodes(modes)
    header = ["z"] + [f"f_{n}" for n in range(1, M + 1)] + [f"g_{n}" for n in range(M + 1)]
    write_csv(out / "modes.csv", header,
              (np.concatenate([[modes.z[i]], modes.f[:, i], gn[:, i]]) for i in range(modes.z.size)))
    write_csv(out / "modes_mid.csv", ["z_mid"] + [f"g_{n}" for n in range(M + 1)],
              (np.concatenate([[zm], modes.g[:, i]]) for i, zm in enumerate(modes.z_mid)))
    rows = []
    summary = {}
    for which in ("f_basis", "g_basis", "weighted_dual"):
        R = orthonormality_residual(modes, which)
        off = R - np.diag(np.diag(R))
        rows.append((which, np.max(np.abs(R)), np.max(np.abs(off))))
        summary[which] = float(np.max(np.abs(R)))
    write_csv(out / "orthonormality.csv", ["basis", "max_abs_residual", "max_abs_offdiagonal"], rows)
    return {"orthonormality_max_residual": summary, "n_modes": M}


def cmd_mixing(config: RunConfig, out: Path, base: Path):
    modes = _modes(config, base)
    M = modes.n_modes
    alpha = alpha_matrix(modes)
    write_csv(out / "alpha.csv", ["m"] + [f"alpha_{n}" for n in range(1, M + 1)],
              ([m + 1, *alpha[m]] for m in range(M)))
    rows = []
    for n in range(1, M + 1):
        for p in range(1, M + 1):
            for q in range(1, M + 1):
                branch = selection_branch(p, q, n)
                if branch:
                    b, g = beta_gamma(p, q, n)
                    rows.append((p, q, n, branch, b, g))
    write_csv(out / "beta_gamma.csv", ["p", "q", "n", "branch", "beta", "gamma"], rows)
    conds = []
    for k in (0.0, 1.0, 10.0):
        A = coupled_mass_matrix(alpha, modes.speeds, k)
        conds.append((k, np.linalg.cond(A)))
    write_csv(out / "mass_condition.csv", ["k", "condition_number"], conds)
    off = alpha - np.diag(np.diag(alpha))
    return {"alpha_max_offdiagonal": float(np.max(np.abs(off))),
            "mass_matrix_condition": {str(k): float(c) for k, c in conds}}


def initial_fields(components, n_modes, grid: HorizontalGrid):
    """Assemble (V, rho) of shape (M, Nx) from the configured components."""
    V = np.zeros((n_modes, grid.n))
    R = np.zeros((n_modes, grid.n))
    x = grid.x
    two_pi_L = 2.0 * np.pi / grid.length
    for c in components:
        if c.mode > n_modes:
            raise InputError(f"initial component references mode {c.mode} > M={n_modes}")
        if c.shape == "cosine":
            u = np.cos(c.wavenumber * two_pi_L * x + c.phase)
        elif c.shape == "bump":
            u = np.exp((np.cos(two_pi_L * (x - c.center)) - 1.0) / c.width ** 2)
        else:
            rng = np.random.default_rng(c.seed)
            m = np.arange(1, c.kmax + 1)
            a = rng.standard_normal(c.kmax) / m ** 2
            b = rng.standard_normal(c.kmax) / m ** 2
            u = (a[:, None] * np.cos(two_pi_L * m[:, None] * x)
                 + b[:, None] * np.sin(two_pi_L * m[:, None] * x)).sum(axis=0)
        (V if c.field == "V" else R)[c.mode - 1] += c.amplitude * u
    return V, R


def cmd_simulate(config: RunConfig, out: Path, base: Path):
    sim = config.simulate
    if sim is None:
        raise InputError("simulate needs a 'simulate' block")
    grid = HorizontalGrid(sim.Nx, sim.L)
    extra = {}
    if sim.kind == "nonlinear":
        system = NonlinearModalSystem(config.modes.M, grid, sim.N, sim.epsilon, sim.mu, sim.convention)
        M = system.n_modes
        extra = {"nonlinear_convention": sim.convention,
                 "truncation": {"dropped_pairs": system.table.dropped,
                                "truncated": bool(system.table.dropped),
                                "interactions": int(system.table.p.size)}}
    else:
        modes = _modes(config, base)
        coupling = "uncoupled" if sim.kind == "linear-uncoupled" else "coupled"
        system = LinearModalSystem(modes, grid, coupling, mu=sim.mu)
        M = modes.n_modes
    V, R = initial_fields(sim.initial, M, grid)
    state = system.initial_state(V, R)
    every = sim.snapshot_every or sim.n_steps
    final, snaps = system.run(state, sim.dt, sim.n_steps, every=every)
    times, vn, rn = mode_activation_history(snaps, grid)
    energies = [system.energy(s) for s in snaps]
    header = (["t", "energy"] + [f"V_norm_{n}" for n in range(1, M + 1)]
              + [f"rho_norm_{n}" for n in range(1, M + 1)])
    write_csv(out / "timeseries.csv", header,
              ([t, e, *a, *b] for t, e, a, b in zip(times, energies, vn, rn)))
    state_header = ["x"] + [f"V_{n}" for n in range(1, M + 1)] + [f"rho_{n}" for n in range(1, M + 1)]

    def dump(path, s):
        Vp, Rp = system.physical(s)
        write_csv(path, state_header, ([grid.x[i], *Vp[:, i], *Rp[:, i]] for i in range(grid.n)))

    dump(out / "final_state.csv", final)
    if sim.write_snapshots:
        snapdir = out / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for i, s in enumerate(snaps):
            dump(snapdir / f"snapshot_{i:05d}.csv", s)
    extra.update({"final_time": final.time,
                  "energy_initial": energies[0], "energy_final": energies[-1]})
    return extra


def cmd_sharp_limit(config: RunConfig, out: Path, base: Path):
    s = config.sharp_limit
    rep = delta_sweep(s.rho_plus, s.rho_minus, s.z0, s.g, s.deltas, s.grid_size, s.fit)
    write_csv(out / "report.csv", ["delta", "c1", "c1_sq_err", "f_sup_err"], rep.rows())
    return {"cbar": rep.cbar, "fitted_orders": {"c1_sq_err": rep.c2_order, "f_sup_err": rep.sup_order},
            "fit_window": s.fit, "grid_size": rep.grid_size,
            "rayleigh_quotient_fbar": rep.rayleigh_bar.tolist()}


COMMANDS = {
    "modes": cmd_modes,
    "mixing": cmd_mixing,
    "simulate": cmd_simulate,
    "sharp-limit": cmd_sharp_limit,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="strato", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        config = load_config(args.config)
        base = Path(args.config).resolve().parent
        out = Path(args.out) if args.out else Path(config.output_dir)
        if not out.is_absolute() and not args.out:
            out = base / out
        out.mkdir(parents=True, exist_ok=True)
        extra = COMMANDS[args.command](config, out, base)
        write_manifest(out, args.command, config, extra)
    except StratoError as exc:
        print(f"strato: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
