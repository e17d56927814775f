import numpy as np
import pytest

from contactfocus import (InputError, UnsupportedDimensionError, duffing, eval_drift,
                          eval_jacobian, fd_jacobian, harmonic, linear, scalar_decay)

ALL_SYSTEMS = [
    duffing(delta=0.3, alpha=1.0, beta=1.0, gamma=0.5, omega=1.2),
    linear([[0.0, 1.0], [-2.0, -1.0]]),
    linear([[-1.0, 0.2, 0.0], [0.0, -2.0, 0.1], [0.3, 0.0, -0.5]]),
    harmonic(),
    scalar_decay(2.0),
]


def test_duffing_drift_at_origin():
    sys = duffing(delta=0.3, alpha=1.0, beta=1.0, gamma=0.5, omega=1.2)
    np.testing.assert_allclose(eval_drift(sys, 0.0, [0.0, 0.0]), [0.0, 0.5], atol=0)


def test_scalar_decay_drift():
    np.testing.assert_allclose(eval_drift(scalar_decay(2.0), 0.0, [3.0]), [-6.0])


def test_harmonic_drift_is_rotation():
    np.testing.assert_allclose(eval_drift(harmonic(), 0.0, [1.0, 0.0]), [0.0, -1.0])


def test_duffing_jacobian_at_origin():
    sys = duffing(delta=0.3, alpha=1.0, beta=1.0)
    expected = [[0.0, 1.0], [-1.0, -0.3]]
    np.testing.assert_allclose(eval_jacobian(sys, 0.0, [0.0, 0.7]), expected)


def test_duffing_jacobian_cubic_term():
    sys = duffing(delta=0.3, alpha=1.0, beta=1.0)
    jac = eval_jacobian(sys, 0.0, [1.0, -0.4])
    np.testing.assert_allclose(jac, [[0.0, 1.0], [-4.0, -0.3]])


def test_scalar_decay_jacobian():
    np.testing.assert_allclose(eval_jacobian(scalar_decay(2.0), 1.0, [5.0]), [[-2.0]])


def test_fd_jacobian_matches_analytic_at_origin():
    sys = duffing(delta=0.3, alpha=1.0, beta=1.0, gamma=0.5, omega=1.2)
    fd = fd_jacobian(sys, 0.0, [0.0, 0.0], h=1e-5)
    assert np.abs(fd - eval_jacobian(sys, 0.0, [0.0, 0.0])).max() <= 1e-8


def test_fd_jacobian_exact_for_linear_fields():
    a = np.array([[0.0, 1.0], [-2.0, -1.0]])
    sys = linear(a)
    fd = fd_jacobian(sys, 0.0, [0.3, -0.7], h=1e-5)
    assert np.abs(fd - a).max() <= 1e-10


def test_fd_jacobian_harmonic_constant():
    fd = fd_jacobian(harmonic(), 0.0, [0.3, -0.7], h=1e-5)
    assert np.abs(fd - np.array([[0.0, 1.0], [-1.0, 0.0]])).max() <= 1e-8


@pytest.mark.parametrize("system", ALL_SYSTEMS, ids=lambda s: s.kind + str(s.dim))
def test_fd_jacobian_random_states(system):
    rng = np.random.default_rng(1234)
    for _ in range(100):
        t = rng.uniform(0.0, 10.0)
        y = rng.uniform(-2.0, 2.0, size=system.dim)
        err = np.abs(eval_jacobian(system, t, y) - fd_jacobian(system, t, y, h=1e-5)).max()
        assert err <= 1e-6


def test_duffing_trace_identity():
    sys = duffing(delta=0.3)
    rng = np.random.default_rng(7)
    for _ in range(50):
        t = rng.uniform(0.0, 10.0)
        y = rng.uniform(-3.0, 3.0, size=2)
        assert np.trace(eval_jacobian(sys, t, y)) == pytest.approx(-0.3, abs=1e-14)


def test_harmonic_conserves_quadratic_energy():
    sys = harmonic()
    rng = np.random.default_rng(8)
    for _ in range(50):
        y = rng.uniform(-3.0, 3.0, size=2)
        # B . grad(H0) with H0 = (y1^2 + y2^2)/2
        assert eval_drift(sys, 0.0, y) @ y == pytest.approx(0.0, abs=1e-13)


def test_dimension_mismatch_rejected():
    with pytest.raises(InputError):
        eval_drift(duffing(), 0.0, [1.0])
    with pytest.raises(InputError):
        eval_jacobian(scalar_decay(1.0), 0.0, [1.0, 2.0])


def test_bad_fd_step_rejected():
    with pytest.raises(InputError):
        fd_jacobian(harmonic(), 0.0, [1.0, 0.0], h=0.0)


def test_bad_parameters_rejected():
    with pytest.raises(InputError):
        duffing(delta=-0.1)
    with pytest.raises(InputError):
        duffing(alpha=float("nan"))
    with pytest.raises(InputError):
        scalar_decay(float("inf"))
    with pytest.raises(InputError):
        linear([[1.0, 2.0]])


def test_dimension_cap():
    with pytest.raises(UnsupportedDimensionError):
        linear(np.zeros((5, 5)))
