import math
from fractions import Fraction

import numpy as np
import pytest

from liehamsys import applications as apps
from liehamsys.coalgebra_invariants import lh_hamiltonians
from liehamsys.dynamics import CoefficientFunction as CF
from liehamsys.dynamics import builtin_system, integrate
from liehamsys.errors import InvalidArgument, InvalidParams
from liehamsys.poisson import variables

Q1, Q2, P1, P2 = variables(apps.CHART)
A = [Fraction(v) for v in (3, -2, 5, 7, -1, 4)]


def test_relabel_roundtrip():
    assert apps.lorentz_relabel(apps.inverse_relabel(A)) == A
    assert apps.inverse_relabel(apps.lorentz_relabel(A)) == A


def test_lorentz_matrix_matches_assembled_system():
    b = apps.inverse_relabel(A)
    assembled = builtin_system("so13", [float(v) for v in b]).assemble_many(np.array([0.0]))[0][0]
    assert np.allclose(assembled, np.array(apps.lorentz_matrix(A), dtype=float), atol=0)


def test_printed_lorentz_hamiltonian_against_generator():
    # printed / true ratio per a-coefficient: the a3 and a5 terms agree, the rest are doubled
    ratios = {1: 2, 2: 2, 3: 1, 4: 2, 5: 1, 6: 2}
    for i, ratio in ratios.items():
        a = [0] * 6
        a[i - 1] = A[i - 1]
        assert apps.lorentz_hamiltonian_printed(a) == ratio * apps.lorentz_generator(a)


def test_generator_reproduces_field():
    rng = np.random.default_rng(0)
    b = rng.normal(size=10)
    gen = apps.generator("sp4", b.tolist())
    sys = builtin_system("sp4", b.tolist())
    mat = sys.assemble_many(np.array([0.0]))[0][0]
    x = rng.normal(size=4)
    assert np.allclose(apps.hamilton_field(gen, x), mat @ x, atol=1e-8)
    with pytest.raises(InvalidArgument):
        apps.generator("sp4", [1, 2])


def test_bateman_printed_vs_generated():
    # at m = k = 1 and gamma = 0 the printed oscillator pair is twice the true generator
    printed = apps.bateman_hamiltonian_printed(1, 1, 0)
    assert printed == (P1 * P1 - P2 * P2) / 2 + (Q1 * Q1 - Q2 * Q2) / 2
    gen = apps.lorentz_generator(apps.bateman_values(Fraction(1), Fraction(1), Fraction(0)))
    assert printed == 2 * gen


def test_bateman_preset_dynamics():
    p = apps.OscillatorParams(1.0, 1.0, 0.0)
    preset = apps.bateman_preset(p)
    tr = integrate(preset.system(), [1.0, 0.0, 0.0, 0.0], 0, 5, 1e-3)
    # the built-in factor 1/2 halves the frequency: q1 = cos(t / 2)
    assert np.max(np.abs(tr.states[:, 0] - np.cos(tr.times / 2))) < 1e-10
    x = np.array([0.3, -0.2, 0.5, 1.1])
    mat = preset.system().assemble_many(np.array([1.0]))[0][0]
    assert np.allclose(apps.hamilton_field(preset.hamiltonian(1.0), x), mat @ x, atol=1e-8)


def test_bateman_omega():
    assert apps.bateman_omega(2.0, 3.0, 1.0) == pytest.approx(math.sqrt((3 - 1 / 8) / 2))


def test_parameter_checks():
    with pytest.raises(InvalidParams):
        apps.bateman_preset(apps.OscillatorParams(1.0, 0.2, 1.0))
    with pytest.raises(InvalidParams):
        apps.check_oscillator(apps.OscillatorParams(-1.0, 1.0))
    with pytest.raises(InvalidParams):
        apps.check_oscillator(apps.OscillatorParams(1.0, 1.0, CF.poly([0.5, -1.0])), underdamped=False)
    apps.check_oscillator(apps.OscillatorParams(1.0, 0.2, 1.0), underdamped=False)


def test_coupled_ck_damping_factor():
    p = apps.OscillatorParams(2.0, 3.0, 0.4)
    preset = apps.coupled_ck_preset(p, 0.0)
    t = np.linspace(0, 5, 11)
    a2 = preset.extra["a"][1](t)
    assert np.allclose(a2, np.exp(-2 * 0.2 * t) / 2.0, rtol=1e-9)
    a4 = preset.extra["a"][3](t)
    assert np.allclose(a4, 3.0 * np.exp(2 * 0.2 * t), rtol=1e-9)


def test_em_consistent_variant_matches_hamiltonian():
    vals = [Fraction(v) for v in (2, 3, Fraction(1, 2), 5, Fraction(3, 2))]
    consistent = apps.em_values(*vals, variant="consistent")
    assert apps.generator("sp4", consistent) == apps.em_hamiltonian(*vals)
    printed = apps.em_values(*vals, variant="printed")
    assert apps.generator("sp4", printed) != apps.em_hamiltonian(*vals)
    unit = [Fraction(1)] * 5
    assert apps.em_values(*unit, variant="printed") == apps.em_values(*unit, variant="consistent")
    with pytest.raises(InvalidArgument):
        apps.em_values(*unit, variant="other")


def test_coupled_ho_generator():
    b = apps.coupled_ho_values(*(Fraction(v) for v in (2, 3, 1, 1, 5, 0, Fraction(1, 3))))
    gen = apps.generator("sp4", b)
    assert gen == apps.sp4_primed_hamiltonian(b[1], b[4], b[6], b[7], b[9])


def test_presets_build_and_tabulate():
    p = apps.OscillatorParams(1.0, 2.0, 0.3)
    presets = [
        apps.bateman_preset(p),
        apps.coupled_ck_preset(p, 0.1),
        apps.em_preset(1.0, 2.0, 0.5, 1.5, 0.7),
        apps.coupled_ho_preset(p, apps.OscillatorParams(2.0, 1.0), 0.2),
        apps.generalized_cck_preset(p, apps.OscillatorParams(2.0, 1.0, 0.1), 0.2),
    ]
    for preset in presets:
        table = preset.table(np.linspace(0, 5, 6))
        assert table.shape == (6, len(preset.labels))
        assert np.all(np.isfinite(table))
        tr = integrate(preset.system(), [1, 0, 0, 1], 0, 1, 1e-2)
        assert np.all(np.isfinite(tr.states))


def test_bracket_generation():
    h = lh_hamiltonians("sp4")
    gens = [h[1] - h[2], h[4], h[6], h[7], h[9]]
    assert apps.bracket_generated_dimension(gens) == 10
    assert apps.bracket_generated_dimension([h[4], h[7]]) == 3


def test_oscillator_1d():
    sys = apps.oscillator_1d_system(CF.constant(1.0), CF.constant(4.0))
    tr = integrate(sys, [1.0, 0.0], 0, 2, 1e-3)
    assert np.max(np.abs(tr.states[:, 0] - np.cos(2 * tr.times))) < 1e-10
