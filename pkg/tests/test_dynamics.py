import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import sinusoids
from liehamsys.dynamics import (
    CoefficientFunction as CF,
    TDLinearSystem,
    Trajectory,
    builtin_system,
    convergence_order,
    hyperbolic_closed_form,
    integral_of,
    integrate,
    integrate_prolonged,
    monodromy,
    simpson,
    symplectic_defect,
    system_dimension,
    time_grid,
)
from liehamsys.errors import CoefficientSingular, InvalidArgument
from liehamsys.applications import hyperbolic_preset


def test_coefficient_kinds():
    t = np.array([0.0, 0.5, 2.0])
    assert np.allclose(CF.constant(3)(t), 3)
    assert np.allclose(CF.poly([1, 0, 2])(t), 1 + 2 * t**2)
    s = CF.sinusoid(2, 3, 0.5, 1)
    assert np.allclose(s(t), 1 + 2 * np.sin(3 * t + 0.5))
    tab = CF.tabulated([0, 1, 2, 3], [0, 1, 4, 9])
    assert tab(np.array([1.0]))[0] == pytest.approx(1.0)
    assert np.isnan(tab(np.array([3.5]))[0])


def test_exp_integral_matches_quadrature():
    rate = CF.sinusoid(0.7, 1.3, 0.2, 0.1)
    e = CF.exp_integral(rate, sign=-1, scale=2.0)
    for t in (0.0, 0.37, 2.5, -1.2):
        integral = quad(lambda s: rate(np.array([s]))[0], 0, t)[0]
        assert e(np.array([t]))[0] == pytest.approx(2.0 * math.exp(-2 * integral), rel=1e-9)


def test_coefficient_arithmetic_and_json():
    a, b = CF.sinusoid(1, 1), CF.constant(2)
    t = np.linspace(0, 1, 5)
    assert np.allclose((a * b + 1)(t), 2 * np.sin(t) + 1)
    assert np.allclose((b / a.__add__(3))(t), 2 / (np.sin(t) + 3))
    assert np.allclose((-a) (t) ** 2, (a**2)(t))
    assert np.allclose(CF.constant(4).sqrt()(t), 2)
    for c in (a, b, CF.poly([1, 2]), CF.exp_integral(a), CF.tabulated([0, 1, 2], [1, 2, 3])):
        back = CF.from_json(c.to_json())
        assert np.allclose(back(t), c(t))
    with pytest.raises(InvalidArgument):
        CF.from_json({"kind": "composite"})
    with pytest.raises(InvalidArgument):
        CF.from_json({"kind": "sinusoid"})
    with pytest.raises(InvalidArgument):
        CF.tabulated([0, 0], [1, 2])


def test_simpson_and_integral_of():
    x = np.linspace(0, 1, 11)
    assert simpson(x**3, 0.1) == pytest.approx(0.25, abs=1e-14)
    assert integral_of(CF.sinusoid(1, 1, math.pi / 2), 2.0) == pytest.approx(math.sin(2.0), abs=1e-12)


def test_time_grid():
    g = time_grid(0, 1, 0.25)
    assert np.allclose(g, [0, 0.25, 0.5, 0.75, 1])
    for args in ((0, 1, 0), (1, 1, 0.1), (0, 1, 2)):
        with pytest.raises(InvalidArgument):
            time_grid(*args)


def test_scalar_growth_matches_exponential():
    sys = TDLinearSystem([np.array([[1.0]])], [CF.constant(1)], None, "growth")
    tr = integrate(sys, [1.0], 0, 1, 0.01)
    assert tr.final[0] == pytest.approx(math.e, rel=1e-9)


def test_affine_offset():
    sys = TDLinearSystem([np.zeros((1, 1))], [CF.constant(1)], [np.array([2.0])], "drift")
    assert integrate(sys, [0.0], 0, 3, 0.1).final[0] == pytest.approx(6.0, abs=1e-12)


def test_hyperbolic_closed_form():
    b = CF.sinusoid(1, 1, math.pi / 2)
    sys = builtin_system("sp4", hyperbolic_preset(b))
    lam1, lam2 = 0.7, -0.4
    tr = integrate(sys, [lam2, lam1, 0.0, 0.0], 0, 5, 1e-3)
    exact = hyperbolic_closed_form(b, lam1, lam2, tr.times)
    assert np.max(np.abs(tr.states[:, 0] - exact)) < 1e-10


def test_convergence_order_is_four():
    sys = builtin_system("sp4", sinusoids(10, 4))
    order = convergence_order(sys, [1, 0.5, -0.3, 0.2], 0, 2, 0.05)
    assert 3.5 <= order <= 4.5


@pytest.mark.parametrize("name", ["h6", "so13", "sp4"])
def test_monodromy_is_symplectic(name):
    n, r = system_dimension(name)
    m = monodromy(builtin_system(name, sinusoids(r, 11)), 0, 5, 1e-3)
    assert symplectic_defect(m) < 1e-8


def test_sl2_monodromy_preserves_phi():
    sys = builtin_system("sl2", sinusoids(3, 2))
    tr = integrate(sys, [1.0, 0.3, 2.0], 0, 5, 1e-3)
    phi = tr.states[:, 0] * tr.states[:, 2] - tr.states[:, 1] ** 2
    assert np.max(np.abs(phi - phi[0])) < 1e-8


def test_prolonged_copies_are_independent_runs():
    sys = builtin_system("h6", sinusoids(6, 3))
    x0s = [[1, 0, 0, 1], [0.2, 0.4, -1, 0.3]]
    trs = integrate_prolonged(sys, x0s, 0, 1, 0.01)
    for x0, tr in zip(x0s, trs):
        assert np.allclose(tr.states, integrate(sys, x0, 0, 1, 0.01).states, atol=1e-15)
    with pytest.raises(InvalidArgument):
        integrate_prolonged(sys, [x0s[0]] * 6, 0, 1, 0.1)


def test_singular_coefficient_raises():
    tab = CF.tabulated([0, 1, 2], [1, 1, 1])
    sys = TDLinearSystem([np.eye(2)], [tab], None, "short")
    with pytest.raises(CoefficientSingular):
        integrate(sys, [1, 1], 0, 3, 0.1)
    bad = TDLinearSystem([np.eye(2)], [CF.constant(1) / CF.poly([0, 1])], None, "pole")
    with np.errstate(divide="ignore"), pytest.raises(CoefficientSingular):
        integrate(bad, [1, 1], 0, 1, 0.1)


def test_coefficient_count_checked():
    with pytest.raises(InvalidArgument):
        builtin_system("sp4", [1, 2])
    with pytest.raises(InvalidArgument):
        builtin_system("nope", [])


def test_trajectory_csv_roundtrip(tmp_path):
    sys = builtin_system("h6", sinusoids(6, 8))
    tr = integrate(sys, [1, 2, 3, 4], 0, 0.5, 0.1)
    text = tr.to_csv()
    assert text.splitlines()[0] == "t,x1,x2,x3,x4"
    back = Trajectory.from_csv(text)
    assert np.array_equal(back.states, tr.states)
    assert np.array_equal(back.times, tr.times)


def test_determinism():
    a = integrate(builtin_system("sp4", sinusoids(10, 1)), [1, 0, 0, 1], 0, 1, 0.01).to_csv()
    b = integrate(builtin_system("sp4", sinusoids(10, 1)), [1, 0, 0, 1], 0, 1, 0.01).to_csv()
    assert a == b
