import math

import numpy as np
import pytest

from contactfocus import (BlowUpError, InputError, duffing, harmonic,
                          h2_closed_form, h2_direct, h2_projected,
                          integrate_characteristic, integrate_variational, linear,
                          liouville_residual, rk4_step, scalar_decay, time_grid)


def grad_energy(t, y):
    return y


# -- grid ---------------------------------------------------------------------


def test_time_grid_uniform():
    times = time_grid(0.0, 1.0, 1e-3)
    assert len(times) == 1001
    assert times[0] == 0.0 and times[-1] == 1.0
    assert np.allclose(np.diff(times), 1e-3, atol=1e-15)


def test_time_grid_partial_last_step():
    times = time_grid(0.0, 1.0, 0.3)
    np.testing.assert_allclose(times, [0.0, 0.3, 0.6, 0.9, 1.0])


def test_time_grid_degenerate():
    np.testing.assert_array_equal(time_grid(2.0, 2.0, 0.1), [2.0])
    with pytest.raises(InputError):
        time_grid(0.0, 1.0, 0.0)
    with pytest.raises(InputError):
        time_grid(1.0, 0.0, 0.1)


# -- rk4 step -----------------------------------------------------------------


def test_rk4_step_decay():
    got = rk4_step(lambda t, s: -s, 0.0, np.array([1.0]), 0.1)[0]
    # hand-rolled stages: k = (-1, -0.95, -0.9525, -0.90475) => 1 - 0.0951625
    assert got == pytest.approx(0.9048375, abs=1e-15)
    assert abs(got - math.exp(-0.1)) <= 1e-7


def test_rk4_step_zero_field():
    s = np.array([1.0, -2.0])
    np.testing.assert_array_equal(rk4_step(lambda t, x: np.zeros(2), 0.0, s, 0.5), s)


def test_rk4_step_constant_field_exact():
    got = rk4_step(lambda t, x: np.ones(1), 0.0, np.array([0.0]), 0.5)[0]
    assert got == 0.5


def test_rk4_step_blowup_carries_time():
    def f(t, s):
        return s * s * 1e200
    with pytest.raises(BlowUpError) as err:
        rk4_step(f, 3.0, np.array([1e200]), 0.1)
    assert err.value.t == 3.0


# -- characteristics ----------------------------------------------------------


def test_characteristic_scalar_decay():
    path = integrate_characteristic(scalar_decay(1.0), [1.0], 0.0, 1.0, 1e-3)
    assert abs(path.states[-1][0] - math.exp(-1.0)) <= 1e-9


def test_characteristic_harmonic_period():
    path = integrate_characteristic(harmonic(), [1.0, 0.0], 0.0, 2.0 * math.pi, 1e-3)
    assert np.abs(path.states[-1] - np.array([1.0, 0.0])).max() <= 1e-8


def test_characteristic_zero_span():
    path = integrate_characteristic(duffing(), [0.3, -0.1], 0.0, 0.0, 1e-3)
    assert len(path.times) == 1
    np.testing.assert_array_equal(path.states[0], [0.3, -0.1])


def test_characteristic_blowup():
    with pytest.raises(BlowUpError):
        integrate_characteristic(linear([[30.0]]), [1.0], 0.0, 30.0, 1e-2)


# -- variational equation -----------------------------------------------------


def test_variational_scalar():
    sys = scalar_decay(1.0)
    path = integrate_characteristic(sys, [1.0], 0.0, 1.0, 1e-3)
    fm = integrate_variational(sys, path)
    assert abs(fm.matrices[-1][0, 0] - math.exp(-1.0)) <= 1e-9
    np.testing.assert_array_equal(fm.matrices[0], np.eye(1))


def test_variational_duffing_liouville_determinant():
    sys = duffing(delta=0.3, alpha=1.0, beta=1.0, gamma=0.5, omega=1.2)
    path = integrate_characteristic(sys, [0.0, 0.0], 0.0, 20.0, 1e-3)
    fm = integrate_variational(sys, path)
    det = np.linalg.det(fm.matrices[-1])
    assert abs(det - math.exp(-6.0)) / math.exp(-6.0) <= 1e-6
    assert liouville_residual(sys, path, fm) <= 1e-6


def test_variational_projected_rank():
    from contactfocus import eval_jacobian, projected_jacobian, projector
    sys = harmonic()
    path = integrate_characteristic(sys, [1.0, 0.0], 0.0, 5.0, 1e-3)
    fm = integrate_variational(sys, path, projected=True, grad_h0=grad_energy)
    for k in range(0, len(path.times), 250):
        proj = projector(path.states[k])
        m_tilde = projected_jacobian(eval_jacobian(sys, path.times[k], path.states[k]), proj)
        sv = np.linalg.svd(m_tilde, compute_uv=False)
        assert sv[1] <= 1e-10
    assert fm.matrices.shape == (len(path.times), 2, 2)


def test_variational_projected_requires_gradient():
    sys = harmonic()
    path = integrate_characteristic(sys, [1.0, 0.0], 0.0, 1.0, 1e-2)
    with pytest.raises(InputError):
        integrate_variational(sys, path, projected=True)


def test_variational_cocycle():
    sys = duffing()
    full = integrate_characteristic(sys, [0.0, 0.0], 0.0, 10.0, 1e-3)
    first = integrate_characteristic(sys, [0.0, 0.0], 0.0, 5.0, 1e-3)
    second = integrate_characteristic(sys, first.states[-1], 5.0, 10.0, 1e-3)
    phi_full = integrate_variational(sys, full).matrices[-1]
    phi_1 = integrate_variational(sys, first).matrices[-1]
    phi_2 = integrate_variational(sys, second).matrices[-1]
    assert np.abs(phi_full - phi_2 @ phi_1).max() <= 1e-7


# -- stiffness propagation ----------------------------------------------------


def test_h2_closed_form_scalar():
    sys = scalar_decay(1.0)
    path = integrate_characteristic(sys, [1.0], 0.0, 1.0, 1e-3)
    fm = integrate_variational(sys, path)
    series = h2_closed_form(fm, [[1.0]])
    assert abs(series[-1][0, 0] - math.exp(-2.0)) <= 1e-7
    np.testing.assert_array_equal(series[0], [[1.0]])


def test_h2_closed_form_zero_initial():
    sys = scalar_decay(1.0)
    path = integrate_characteristic(sys, [1.0], 0.0, 1.0, 1e-2)
    fm = integrate_variational(sys, path)
    assert np.abs(h2_closed_form(fm, [[0.0]])).max() == 0.0


def test_h2_direct_matches_closed_form_scalar():
    sys = scalar_decay(1.0)
    path = integrate_characteristic(sys, [1.0], 0.0, 5.0, 1e-3)
    fm = integrate_variational(sys, path)
    assert np.abs(h2_direct(sys, path, [[1.0]]) - h2_closed_form(fm, [[1.0]])).max() <= 1e-8


def test_h2_direct_matches_closed_form_duffing():
    sys = duffing(delta=0.3, alpha=1.0, beta=1.0, gamma=0.5, omega=1.2)
    path = integrate_characteristic(sys, [0.0, 0.0], 0.0, 20.0, 1e-3)
    fm = integrate_variational(sys, path)
    diff = h2_direct(sys, path, np.eye(2)) - h2_closed_form(fm, np.eye(2))
    frob = np.linalg.norm(diff.reshape(len(path.times), -1), axis=1)
    assert frob.max() <= 1e-6


def test_h2_direct_diagonal_decoupled():
    sys = linear(np.diag([-1.0, -2.0]))
    path = integrate_characteristic(sys, [1.0, 1.0], 0.0, 2.0, 1e-3)
    series = h2_direct(sys, path, np.eye(2))
    t = path.times
    np.testing.assert_allclose(series[:, 0, 0], np.exp(-2.0 * t), atol=1e-9)
    np.testing.assert_allclose(series[:, 1, 1], np.exp(-4.0 * t), atol=1e-9)
    np.testing.assert_allclose(series[:, 0, 1], 0.0, atol=1e-15)


def test_h2_projected_harmonic_tracks_tangent_dyad():
    sys = harmonic()
    path = integrate_characteristic(sys, [1.0, 0.0], 0.0, 10.0, 1e-3)
    series = h2_projected(sys, path, [[0.0, 0.0], [0.0, 1.0]], grad_energy)
    # exact solution: outer product of the tangent vector (-y2, y1)
    v = np.stack([-path.states[:, 1], path.states[:, 0]], axis=1)
    exact = np.einsum("ki,kj->kij", v, v)
    assert np.abs(series - exact).max() <= 1e-8
    # degeneracy residual stays at integrator accuracy
    for k in range(0, len(path.times), 200):
        g = path.states[k]
        bound = 1e-8 * max(np.linalg.norm(series[k]) * np.linalg.norm(g), 1e-300)
        assert np.linalg.norm(series[k] @ g) <= bound


def test_h2_projected_zero_gradient_reduces_to_direct():
    sys = duffing()
    path = integrate_characteristic(sys, [0.0, 0.0], 0.0, 2.0, 1e-3)
    h2_0 = np.array([[1.0, 0.3], [0.3, 2.0]])
    proj = h2_projected(sys, path, h2_0, lambda t, y: np.zeros(2))
    assert np.abs(proj - h2_direct(sys, path, h2_0)).max() <= 1e-10


def test_h2_projected_zero_initial():
    sys = harmonic()
    path = integrate_characteristic(sys, [1.0, 0.0], 0.0, 1.0, 1e-2)
    assert np.abs(h2_projected(sys, path, np.zeros((2, 2)), grad_energy)).max() == 0.0


def test_h2_projected_rejects_degeneracy_violation():
    sys = harmonic()
    path = integrate_characteristic(sys, [1.0, 0.0], 0.0, 1.0, 1e-2)
    with pytest.raises(InputError):
        h2_projected(sys, path, np.eye(2), grad_energy)


# -- convergence order ---------------------------------------------------------


def endpoint_error(system, y0, t_end, h, exact):
    path = integrate_characteristic(system, y0, 0.0, t_end, h)
    return np.linalg.norm(path.states[-1] - exact)


def test_rk4_order_scalar_decay():
    sys = scalar_decay(1.0)
    exact = np.array([math.exp(-1.0)])
    e1 = endpoint_error(sys, [1.0], 1.0, 0.1, exact)
    e2 = endpoint_error(sys, [1.0], 1.0, 0.05, exact)
    order = math.log2(e1 / e2)
    assert order >= 3.8


def test_rk4_order_harmonic():
    sys = harmonic()
    exact = np.array([1.0, 0.0])
    e1 = endpoint_error(sys, [1.0, 0.0], 2.0 * math.pi, 0.05, exact)
    e2 = endpoint_error(sys, [1.0, 0.0], 2.0 * math.pi, 0.025, exact)
    order = math.log2(e1 / e2)
    assert order >= 3.8
