"""Acceptance criteria, each at its stated tolerance.

Every criterion records one PASS/FAIL line, printed at the end of the pytest
run (see conftest.py). Running this file directly prints the same lines.
"""

import time

import numpy as np

from oracles import CBAR_REFERENCE, measured_period, mode2_first_order
from strato.linear_dynamics import LinearModalSystem, dispersion
from strato.mixing import (alpha_matrix, beta_gamma, beta_gamma_quadrature,
                           interaction_table_quadrature)
from strato.nonlinear_dynamics import NonlinearModalSystem, mode_activation_history
from strato.sharp_limit import delta_sweep
from strato.spectral import HorizontalGrid
from strato.stratification import brunt_vaisala, build_profile
from strato.sturm_liouville import derive_g, explicit_modes, orthonormality_residual, solve_modes

RESULTS = {}


def record(number, ok, detail):
    RESULTS[number] = (bool(ok), detail)
    assert ok, detail


def smooth_fields(grid, M, seed, kmax=3):
    rng = np.random.default_rng(seed)
    V = np.zeros((M, grid.n))
    R = np.zeros((M, grid.n))
    for j in range(1, kmax + 1):
        V += np.outer(rng.standard_normal(M), np.cos(j * grid.x + rng.uniform(0, 6))) / j
        R += np.outer(rng.standard_normal(M), np.sin(j * grid.x + rng.uniform(0, 6))) / j
    return V, R


def _numeric_modes(kind, params, nz, M, variant="full"):
    p = build_profile(kind, params, nz, variant=variant)
    return p, derive_g(solve_modes(p, brunt_vaisala(p), M))


def test_criterion_01_explicit_eigenvalues():
    t0 = time.perf_counter()
    _, m = _numeric_modes("constant_n", {"N": np.pi}, 4096, 10, variant="boussinesq")
    n = np.arange(1, 11)
    err = np.abs(m.speeds / (1.0 / n) - 1)
    errs = []
    sizes = (257, 513, 1025, 2049)
    for nz in sizes:
        _, mm = _numeric_modes("constant_n", {"N": np.pi}, nz, 4, variant="boussinesq")
        errs.append(abs(mm.speeds[3] * 4 - 1))
    order = -np.polyfit(np.log(np.array(sizes) - 1.0), np.log(errs), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = err.max() < 1e-6 and 1.8 <= order <= 2.2 and elapsed < 5
    record(1, ok, f"max rel err {err.max():.3g} (n={n[err.argmax()]}, need < 1e-6; "
                  f"n<=6 max {err[:6].max():.3g}), order {order:.3f}, {elapsed:.2f}s")


def test_criterion_02_orthonormality():
    e = explicit_modes(np.pi, 10, 4096)
    _, b = _numeric_modes("constant_n", {"N": np.pi}, 4096, 10, variant="boussinesq")
    bous = max(np.abs(orthonormality_residual(x, w)).max()
               for x in (e, b) for w in ("f_basis", "g_basis", "weighted_dual"))
    full = 0.0
    for kind, params in [("exponential", {"rho0": 1.0, "drho": 0.5, "d": 0.1}),
                         ("constant_n", {"N": 2.0}),
                         ("smoothed_jump", {"rho_plus": 2.0, "rho_minus": 1.0, "z0": -1 / 3, "delta": 0.05})]:
        _, m = _numeric_modes(kind, params, 4096, 10)
        full = max(full, max(np.abs(orthonormality_residual(m, w)).max()
                             for w in ("f_basis", "g_basis", "weighted_dual")))
    record(2, bous < 1e-8 and full < 1e-6, f"boussinesq {bous:.3g} (< 1e-8), full {full:.3g} (< 1e-6)")


def test_criterion_03_alpha_diagonal():
    N = np.pi
    _, m = _numeric_modes("constant_n", {"N": N}, 4096, 8)
    a = alpha_matrix(m)
    off = np.max(np.abs(a - np.diag(np.diag(a))))
    diag = np.max(np.abs(np.diag(a) - 1 / N ** 2))
    record(3, off < 1e-8 and diag < 1e-6, f"off-diagonal {off:.3g} (< 1e-8), diagonal dev {diag:.3g} (< 1e-6)")


def test_criterion_04_selection_rule():
    worst = 0.0
    for p in range(1, 9):
        for q in range(1, 9):
            for n in range(1, 9):
                bq, gq = beta_gamma_quadrature(p, q, n)
                bc, gc = beta_gamma(p, q, n)
                worst = max(worst, abs(bq - bc), abs(gq - gc))
    brute = interaction_table_quadrature(8)
    pattern = set(brute)
    expected = {(p, q, n) for p in range(1, 9) for q in range(1, 9) for n in range(1, 9)
                if p + q == n or abs(p - q) == n}
    ok = worst < 1e-12 and pattern == expected
    record(4, ok, f"max |quadrature - closed form| {worst:.3g} (< 1e-12), "
                  f"sparsity {'matches' if pattern == expected else 'differs'} ({len(pattern)} triples)")


def test_criterion_05_linear_energy():
    grid = HorizontalGrid(256)
    e = explicit_modes(np.pi, 6, 257)
    unc = LinearModalSystem(e, grid)
    st = unc.initial_state(*smooth_fields(grid, 6, 0))
    out, _ = unc.run(st, 0.01, 10_000)
    d_unc = abs(unc.energy(out) / unc.energy(st) - 1)
    _, m = _numeric_modes("exponential", {"rho0": 1.0, "drho": 0.5, "d": 0.1}, 513, 6)
    cou = LinearModalSystem(m, grid, coupling="coupled")
    st = cou.initial_state(*smooth_fields(grid, 6, 1))
    out, _ = cou.run(st, 0.01, 10_000)
    d_cou = abs(cou.energy(out) / cou.energy(st) - 1)
    record(5, d_unc < 1e-13 and d_cou < 1e-10,
           f"uncoupled drift {d_unc:.3g} (< 1e-13), coupled drift {d_cou:.3g} (< 1e-10)")


def test_criterion_06_dispersion():
    N = np.pi
    e = explicit_modes(N, 3, 65)
    worst = 0.0
    for n, k in ((1, np.pi), (2, 2 * np.pi), (3, 5 * np.pi)):
        T = measured_period(N / (n * np.pi), k, N)
        worst = max(worst, abs(2 * np.pi / T / dispersion(n, k, e) - 1))
    cap = dispersion(1, 1e3, e)
    ok = worst < 1e-8 and 0.999 * N <= cap <= N
    record(6, ok, f"max rel err vs measured period {worst:.3g} (< 1e-8), omega(k=1e3)/N = {cap / N:.6f}")


def test_criterion_07_nonlinear_convergence():
    t0 = time.perf_counter()
    M, grid = 8, HorizontalGrid(256)
    V, R = smooth_fields(grid, M, 2)
    lin = LinearModalSystem(explicit_modes(np.pi, M, 65), grid)
    nl0 = NonlinearModalSystem(M, grid, epsilon=0.0)
    st0 = nl0.initial_state(V, R)
    T = 0.5
    exact = lin.step_uncoupled(lin.initial_state(*nl0.physical(st0)), T)
    steps = (25, 50, 100)
    errs = [np.max(np.abs(nl0.run(st0, T / n, n)[0].V_hat - exact.V_hat)) for n in steps]
    order0 = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    nl = NonlinearModalSystem(M, grid, epsilon=0.1)
    st = nl.initial_state(V, R)
    ref, _ = nl.run(st, T / 800, 800)
    errs = [np.max(np.abs(nl.run(st, T / n, n)[0].V_hat - ref.V_hat)) for n in steps]
    order1 = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    t1 = time.perf_counter()
    nl.run(st, 0.001, 1000)
    bench = time.perf_counter() - t1
    ok = 3.8 <= order0 <= 4.2 and 3.8 <= order1 <= 4.2 and bench < 60
    record(7, ok, f"eps=0 order {order0:.3f}, eps=0.1 order {order1:.3f}, "
                  f"1000 steps at M=8 Nx=256: {bench:.1f}s (total {time.perf_counter() - t0:.1f}s)")


def test_criterion_08_mode_activation():
    M, grid, eps, dt = 8, HorizontalGrid(256), 0.1, 0.005
    s = NonlinearModalSystem(M, grid, epsilon=eps)
    V = np.zeros((M, grid.n))
    V[0] = np.cos(grid.x)
    _, snaps = s.run(s.initial_state(V, np.zeros_like(V)), dt, 400, every=10)
    t, vn, rn = mode_activation_history(snaps, grid)
    mode2 = np.hypot(vn[:, 1], rn[:, 1])
    grows = mode2[0] < 1e-12 and mode2[-1] > 1e-4
    early = t <= 0.05 + 1e-12
    mode4 = np.hypot(vn[early, 3], rn[early, 3]).max()
    small = (t > 0) & (t <= 0.2 + 1e-12)
    oracle = eps * mode2_first_order(t[small], 1.0, 1.0)
    rel = np.max(np.abs(rn[small, 1] / oracle - 1))
    ok = grows and mode4 < 1e-8 and rel < 0.05
    record(8, ok, f"mode 2 norm {mode2[0]:.1e} -> {mode2[-1]:.3g}; mode 4 max for t<=0.05 {mode4:.2g} (< 1e-8); "
                  f"first-order oracle rel err for t<=0.2 {rel:.2%} (< 5%)")


def test_criterion_09_sharp_limit():
    t0 = time.perf_counter()
    rep = delta_sweep(2.0, 1.0, -1 / 3, 1.0, (0.04, 0.02, 0.01, 0.005))
    elapsed = time.perf_counter() - t0
    mono = bool(np.all(np.diff(rep.sup_errors) < 0))
    close = abs(rep.c1_values[-1] / CBAR_REFERENCE - 1)
    cbar_ok = abs(rep.cbar ** 2 - 1 / 6) < 1e-15
    ok = 0.8 <= rep.c2_order <= 1.2 and mono and close < 0.02 and cbar_ok and elapsed < 120
    record(9, ok, f"c^2 order {rep.c2_order:.3f}, sup errors decreasing: {mono}, "
                  f"c1(0.005)/cbar - 1 = {close:.3%} (< 2%), {elapsed:.1f}s")


def test_criterion_10_structural_mixing():
    # two-layer-like smooth profile: neighbour couplings comparable to the diagonal
    p = build_profile("smoothed_jump", {"rho_plus": 2.0, "rho_minus": 1.0, "z0": -1 / 3, "delta": 0.2}, 2049)
    m = solve_modes(p, brunt_vaisala(p), 6)
    a = alpha_matrix(m)
    d = np.sqrt(np.outer(np.diag(a), np.diag(a)))
    neighbour = np.abs(np.diag(a, 1)) / np.diag(d, 1)
    ok = neighbour.max() > 0.1 and np.all(neighbour < 10)
    record(10, ok, f"normalized |alpha_n,n+1| in [{neighbour.min():.3f}, {neighbour.max():.3f}]; "
                   "published table and figure values excluded: profile data unavailable")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
