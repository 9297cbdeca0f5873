import logging

import numpy as np
import pytest

from oracles import galerkin_nonlinear_forcing, mode2_first_order
from strato.errors import BlowupDetected, GridError, InvalidParams
from strato.linear_dynamics import LinearModalSystem
from strato.nonlinear_dynamics import NonlinearModalSystem, NonlinearState, mode_activation_history
from strato.spectral import HorizontalGrid, conjugate_defect
from strato.sturm_liouville import explicit_modes


def random_fields(grid, M, seed=0, kmax=3, parity=None):
    rng = np.random.default_rng(seed)
    V = np.zeros((M, grid.n))
    R = np.zeros((M, grid.n))
    for j in range(1, kmax + 1):
        a, b = rng.standard_normal(M), rng.standard_normal(M)
        if parity == "odd_even":
            V += np.outer(a, np.sin(j * grid.x))
            R += np.outer(b, np.cos(j * grid.x))
        else:
            V += np.outer(a, np.cos(j * grid.x + rng.uniform(0, 6)))
            R += np.outer(b, np.cos(j * grid.x + rng.uniform(0, 6)))
    return V, R


def alternating(M):
    return ((-1) ** np.arange(1, M + 1))[:, None]


@pytest.mark.parametrize("N", [1.0, np.pi])
def test_forcing_matches_galerkin_projection(N):
    M, grid = 5, HorizontalGrid(64)
    V, R = random_fields(grid, M, seed=3)
    s = NonlinearModalSystem(M, grid, N=N, epsilon=1.0)
    F, G = (grid.ifft(a) for a in s.quadratic_terms(grid.fft(V), grid.fft(R)))
    # the oracle works with sin(n pi z) modes, which differ by (-1)^n
    sg = alternating(M)
    Fo, Go = galerkin_nonlinear_forcing(sg * V, sg * R, N, grid.length)
    assert np.max(np.abs(F - sg * Fo)) < 1e-11
    assert np.max(np.abs(G - sg * Go)) < 1e-11


def test_epsilon_zero_is_linear_rhs():
    M, grid = 4, HorizontalGrid(32)
    V, R = random_fields(grid, M)
    nl = NonlinearModalSystem(M, grid, N=np.pi, epsilon=0.0, mu=0.7)
    lin = LinearModalSystem(explicit_modes(np.pi, M, 65), grid, mu=0.7)
    st = nl.initial_state(V, R)
    a = nl.rhs(st.V_hat, st.rho_hat)
    b = lin.time_derivative(lin.initial_state(V, R))
    assert np.max(np.abs(a[0] - nl._mask * b[0])) < 1e-14
    assert np.max(np.abs(a[1] - nl._mask * b[1])) < 1e-14


def test_single_mode_forces_only_mode_two():
    M, grid = 4, HorizontalGrid(32)
    V = np.zeros((M, 32))
    V[0] = np.cos(grid.x)
    R = np.zeros((M, 32))
    R[0] = np.sin(grid.x)
    s = NonlinearModalSystem(M, grid, epsilon=0.1)
    F, G = s.quadratic_terms(grid.fft(V), grid.fft(R))
    active = np.max(np.abs(F), axis=1) + np.max(np.abs(G), axis=1)
    assert active[0] == 0 and active[2] == 0 and active[3] == 0
    assert active[1] > 1e-3


def test_two_modes_force_one_and_three():
    M, grid = 4, HorizontalGrid(32)
    V = np.zeros((M, 32))
    R = np.zeros((M, 32))
    V[0] = np.cos(grid.x)
    V[1] = np.sin(2 * grid.x)
    R[0] = np.sin(grid.x)
    R[1] = np.cos(grid.x)
    s = NonlinearModalSystem(M, grid)
    F, G = s.quadratic_terms(grid.fft(V), grid.fft(R))
    act = np.max(np.abs(F), axis=1) + np.max(np.abs(G), axis=1)
    assert act[0] > 1e-3 and act[2] > 1e-3


def test_parity_preserved():
    M, grid = 4, HorizontalGrid(32)
    V, R = random_fields(grid, M, seed=5, parity="odd_even")
    s = NonlinearModalSystem(M, grid, epsilon=0.5)
    st = s.initial_state(V, R)
    out, _ = s.run(st, 0.01, 20)
    Vp, Rp = s.physical(out)
    flip = (-np.arange(32)) % 32
    assert np.max(np.abs(Vp + Vp[:, flip])) < 1e-13
    assert np.max(np.abs(Rp - Rp[:, flip])) < 1e-13


def test_reality_preserved():
    M, grid = 3, HorizontalGrid(32)
    s = NonlinearModalSystem(M, grid, epsilon=0.3)
    out, _ = s.run(s.initial_state(*random_fields(grid, M)), 0.01, 50)
    assert conjugate_defect(out.V_hat) < 1e-13 and conjugate_defect(out.rho_hat) < 1e-13


def test_energy_conserved_by_projection_convention():
    M, grid = 4, HorizontalGrid(64)
    s = NonlinearModalSystem(M, grid, epsilon=0.2)
    st = s.initial_state(*random_fields(grid, M, seed=7))
    E0 = s.energy(st)
    # the conserved form uses the truncated and dealiased products exactly
    dV, dR = s.rhs(st.V_hat, st.rho_hat)
    dE = 2 * np.real(np.sum(s._mass * np.conj(st.V_hat) * dV) + np.sum(np.conj(st.rho_hat) * dR))
    assert abs(dE) < 1e-11 * E0
    out, _ = s.run(st, 0.005, 400)
    assert abs(s.energy(out) / E0 - 1) < 1e-6


def test_displayed_convention_differs():
    M, grid = 3, HorizontalGrid(32)
    V, R = random_fields(grid, M)
    a = NonlinearModalSystem(M, grid, convention="projection")
    b = NonlinearModalSystem(M, grid, convention="displayed")
    Fa, Ga = a.quadratic_terms(grid.fft(V), grid.fft(R))
    Fb, Gb = b.quadratic_terms(grid.fft(V), grid.fft(R))
    assert np.max(np.abs(Ga - Gb)) > 1e-3


def test_rk4_fourth_order_against_exact_linear():
    M, grid = 3, HorizontalGrid(16)
    V, R = random_fields(grid, M)
    nl = NonlinearModalSystem(M, grid, epsilon=0.0)
    lin = LinearModalSystem(explicit_modes(np.pi, M, 65), grid)
    st = nl.initial_state(V, R)
    T = 1.0
    exact = lin.step_uncoupled(lin.initial_state(*nl.physical(st)), T)
    errs = []
    for n in (20, 40, 80):
        out, _ = nl.run(st, T / n, n)
        errs.append(np.max(np.abs(out.V_hat - exact.V_hat)))
    order = -np.polyfit(np.log([20, 40, 80]), np.log(errs), 1)[0]
    assert 3.8 <= order <= 4.2


def test_rk4_self_convergence_nonlinear():
    M, grid = 3, HorizontalGrid(32)
    s = NonlinearModalSystem(M, grid, epsilon=0.1)
    st = s.initial_state(*random_fields(grid, M, kmax=2))
    ref, _ = s.run(st, 1 / 1280, 1280)
    e1 = np.max(np.abs(s.run(st, 1 / 40, 40)[0].V_hat - ref.V_hat))
    e2 = np.max(np.abs(s.run(st, 1 / 80, 80)[0].V_hat - ref.V_hat))
    assert 13 < e1 / e2 < 19


def test_zero_state_and_validation():
    grid = HorizontalGrid(8)
    s = NonlinearModalSystem(2, grid)
    st = s.initial_state(np.zeros((2, 8)), np.zeros((2, 8)))
    assert not np.any(s.step_rk4(st, 0.1).V_hat)
    with pytest.raises(GridError):
        s.initial_state(np.zeros((3, 8)), np.zeros((3, 8)))
    for kw in ({"epsilon": 1.5}, {"mu": 0.0}, {"N": -1.0}):
        with pytest.raises(InvalidParams):
            NonlinearModalSystem(2, grid, **kw)
    with pytest.raises(InvalidParams):
        s.run(st, 0.0, 1)


def test_blowup_detected():
    grid = HorizontalGrid(8)
    s = NonlinearModalSystem(2, grid)
    bad = np.zeros((2, 8), complex)
    bad[0, 1] = np.inf
    with pytest.raises(BlowupDetected) as err:
        s.step_rk4(NonlinearState(1.0, bad, np.zeros_like(bad)), 0.1)
    assert err.value.time == pytest.approx(1.1)


def test_cfl_warning(caplog):
    grid = HorizontalGrid(8)
    s = NonlinearModalSystem(2, grid)
    st = s.initial_state(np.zeros((2, 8)), np.zeros((2, 8)))
    with caplog.at_level(logging.WARNING):
        s.run(st, 2 * s.cfl_limit(), 1)
    assert "advisory" in caplog.text


def test_activation_linear_stays_in_mode_one():
    M, grid = 4, HorizontalGrid(32)
    s = NonlinearModalSystem(M, grid, epsilon=0.0)
    V = np.zeros((M, 32))
    V[0] = np.cos(grid.x)
    _, snaps = s.run(s.initial_state(V, np.zeros_like(V)), 0.05, 200, every=20)
    _, vn, rn = mode_activation_history(snaps, grid)
    assert np.max(vn[:, 1:]) < 1e-12 and np.max(rn[:, 1:]) < 1e-12


def test_activation_first_order_mode_two():
    M, grid, eps = 4, HorizontalGrid(32), 1e-3
    s = NonlinearModalSystem(M, grid, epsilon=eps)
    V = np.zeros((M, 32))
    V[0] = np.cos(grid.x)
    _, snaps = s.run(s.initial_state(V, np.zeros_like(V)), 0.01, 100, every=10)
    t, vn, rn = mode_activation_history(snaps, grid)
    expected = eps * mode2_first_order(t, 1.0, 1.0)
    assert np.allclose(rn[1:, 1], expected[1:], rtol=5e-3)
    # mode 3 needs a 1+2 interaction: second order in eps
    assert np.max(rn[:, 2]) < 1e-3 * np.max(rn[:, 1])
    assert np.max(rn[:, 2]) > 0
