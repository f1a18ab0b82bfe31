import numpy as np
import pytest

from weakfem1d.problem import (
    REGISTRY,
    GeneralProblem,
    ManufacturedSolution,
    Problem,
    Rho,
    get_problem,
    manufactured_source,
    to_self_adjoint,
)


def one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def test_source_quadratic():
    m = ManufacturedSolution(lambda x: 2 * x - x**2, lambda x: 2 - 2 * x, lambda x: -2 * one(x))
    f = manufactured_source(one, zero, zero, m)
    np.testing.assert_allclose(f(np.linspace(0, 1, 11)), 2.0, atol=1e-15)


def test_source_sine_at_zero():
    p, m = get_problem("paper-5.6")
    assert p.f(np.array(0.0)) == pytest.approx(4 * np.pi, abs=1e-13)


def test_source_of_zero_solution():
    m = ManufacturedSolution(zero, zero, zero)
    f = manufactured_source(lambda x: 1 + x**2, lambda x: 2 * x, np.sin, m)
    assert np.all(f(np.linspace(0, 1, 9)) == 0)


@pytest.mark.parametrize("key", sorted(REGISTRY))
def test_registry_residual(key):
    p, m = get_problem(key)
    x = np.linspace(p.a, p.b, 100)
    a2p = p.a2_prime(x)
    res = -(a2p * m.u_prime(x) + p.a2(x) * m.u_double_prime(x)) + p.a0(x) * m.u(x) - p.f(x)
    assert np.max(np.abs(res)) <= 1e-10
    assert abs(m.u(np.array(p.a))) <= 1e-12 and abs(m.u_prime(np.array(p.b))) <= 1e-12
    assert np.all(p.a2(x) >= p.a_min) and np.all(p.a0(x) >= 0)


@pytest.mark.parametrize("key", sorted(REGISTRY))
def test_registry_derivatives_consistent(key):
    # closed-form derivatives against centered differences
    p, m = get_problem(key)
    x = np.linspace(0.1, 0.9, 9)
    eps = 1e-6
    np.testing.assert_allclose((m.u(x + eps) - m.u(x - eps)) / (2 * eps), m.u_prime(x), atol=1e-7)
    np.testing.assert_allclose((m.u_prime(x + eps) - m.u_prime(x - eps)) / (2 * eps), m.u_double_prime(x), atol=1e-6)
    np.testing.assert_allclose((p.a2(x + eps) - p.a2(x - eps)) / (2 * eps), p.a2_prime(x), atol=1e-7)


def test_unknown_key():
    with pytest.raises(KeyError):
        get_problem("nope")


def test_problem_validation():
    with pytest.raises(ValueError):
        Problem(1, 0, one, zero, one, 1.0)
    with pytest.raises(ValueError):
        Problem(0, 1, one, zero, one, 0.0)
    with pytest.raises(ValueError):
        ManufacturedSolution(lambda x: x + 1, one, zero).check_boundary(0, 1)


def test_self_adjoint_trivial():
    g = GeneralProblem(0, 1, zero, lambda x: 1 + x, np.cos, np.exp, 1.0)
    p, rho = to_self_adjoint(g)
    x = np.linspace(0, 1, 13)
    np.testing.assert_allclose(rho(x), 1.0, atol=1e-15)
    np.testing.assert_allclose(p.a2(x), 1 + x, atol=1e-15)
    np.testing.assert_allclose(p.f(x), np.exp(x), atol=1e-14)
    assert p.a_min == pytest.approx(1.0)


@pytest.mark.parametrize("c", [-2.0, 0.5, 3.0])
def test_rho_closed_form(c):
    a, b = -0.5, 1.5
    a2 = lambda x: 2 + np.sin(x)  # noqa: E731
    rho = Rho(lambda x: c * a2(x), a2, a, b)
    x = np.linspace(a, b, 101)
    np.testing.assert_allclose(rho(x), np.exp(-c * (x - a)), rtol=1e-12)
    xm = 0.5 * (x[1:] + x[:-1])
    np.testing.assert_allclose(rho(xm), np.exp(-c * (xm - a)), rtol=1e-12)
    assert rho(np.array(a)) == 1.0
    assert rho.minimum > 0
    np.testing.assert_allclose(rho.derivative(xm), -c * np.exp(-c * (xm - a)), rtol=1e-12)


def test_rho_nonfinite():
    with pytest.raises(ValueError):
        Rho(one, lambda x: np.where(x > 0.5, 0.0, 1.0), 0, 1)


def test_self_adjoint_a_min_and_prime():
    g = GeneralProblem(0, 1, one, one, zero, one, 1.0, a2_prime=zero)
    p, rho = to_self_adjoint(g)
    assert p.a_min == pytest.approx(np.exp(-1.0), rel=1e-12)
    x = np.linspace(0, 1, 7)
    np.testing.assert_allclose(p.a2_prime(x), -np.exp(-x), rtol=1e-12)
