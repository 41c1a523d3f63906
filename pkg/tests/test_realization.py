from fractions import Fraction

import pytest

from liehamsys.algebra_core import builtin_algebra, builtin_representation
from liehamsys.errors import DimensionMismatch, InvalidArgument, NotHamiltonian
from liehamsys.poisson import Chart, builtin_casimir, variables
from liehamsys.realization import (
    LinearVectorField,
    PolyField,
    SymplecticStructure,
    annihilates,
    closes_on,
    default_chart,
    distribution_rank,
    generic_rank,
    hamiltonian_of,
    hamiltonian_sign,
    hamiltonians,
    is_hamiltonian,
    linearize,
    polynomial_invariants,
)

SYM4 = SymplecticStructure(4)
Q1, Q2, P1, P2 = variables(Chart.canonical(2))


def field_from(rows):
    return LinearVectorField([[Fraction(v) for v in r] for r in rows])


def test_sp4_field_minus_q1_dp1():
    # x' = A x with p1' = -q1
    a = [[0] * 4 for _ in range(4)]
    a[2][0] = -1
    assert hamiltonian_of(field_from(a), SYM4) == Q1 * Q1 / 2


def test_h6_dilation_field():
    a = [[0] * 4 for _ in range(4)]
    a[0][0], a[2][2] = -1, 1
    assert hamiltonian_of(field_from(a), SYM4) == -Q1 * P1


def test_zero_field_has_zero_hamiltonian():
    assert hamiltonian_of(field_from([[0] * 4] * 4), SYM4).is_zero()


def test_non_hamiltonian_field():
    a = [[0] * 4 for _ in range(4)]
    a[0][0] = 1
    f = field_from(a)
    assert not is_hamiltonian(f, SYM4)
    with pytest.raises(NotHamiltonian):
        hamiltonian_of(f, SYM4)


def test_symplectic_checks():
    with pytest.raises(InvalidArgument):
        SymplecticStructure(3)
    with pytest.raises(DimensionMismatch):
        is_hamiltonian(field_from([[0] * 2] * 2), SYM4)


def test_hamilton_equations_reproduce_fields():
    """J grad h = A x for every generator (independent symbolic route)."""
    for rep_name in ("h6_gamma", "so13_gamma", "sp4_fundamental"):
        rep = builtin_representation(rep_name)
        chart = default_chart(4)
        for field, h in zip(linearize(rep), hamiltonians(rep)):
            poly_field = field.as_polyfield(chart)
            q1, q2, p1, p2 = range(4)
            from_h = [h.diff(p1), h.diff(p2), -h.diff(q1), -h.diff(q2)]
            assert list(poly_field.components) == from_h


def test_frozen_sp4_hamiltonians():
    hams = hamiltonians(builtin_representation("sp4_fundamental"))
    expected = [Q1 * P1, Q1 * P2, Q2 * P1, Q2 * P2, Q1 * Q1 / 2, Q1 * Q2, Q2 * Q2 / 2, P1 * P1 / 2, P1 * P2, P2 * P2 / 2]
    assert hams == expected


def test_frozen_h6_hamiltonians():
    hams = hamiltonians(builtin_representation("h6_gamma"))
    expected = [-Q1 * P1, -P1 * P1 / 2, -Q1 * Q1 / 2, -Q2 * P1, -Q1 * Q2, -Q2 * Q2]
    assert hams == expected


def test_hamiltonian_sign_is_negative():
    for rep_name in ("h6_gamma", "so13_gamma", "sp4_fundamental"):
        assert hamiltonian_sign(builtin_representation(rep_name)) == -1


def test_linear_fields_close_with_algebra_table():
    for rep_name, alg in (("sl2_adjoint", "sl2"), ("h6_gamma", "schrodinger_h6"), ("sp4_fundamental", "sp4")):
        rep = builtin_representation(rep_name)
        chart = default_chart(rep.n)
        fields = [f.as_polyfield(chart) for f in linearize(rep)]
        assert closes_on(fields, builtin_algebra(alg)) == []


def test_ranks():
    assert generic_rank(linearize(builtin_representation("sl2_adjoint"))) == 2
    assert generic_rank(linearize(builtin_representation("so13_gamma"))) == 4
    assert generic_rank(linearize(builtin_representation("sp4_fundamental"))) == 4
    # q2 is never moved, so h6 stays at 3
    assert generic_rank(linearize(builtin_representation("h6_gamma"))) == 3
    assert generic_rank(linearize(builtin_representation("sp4_fundamental")), exact=False, seed=5) == 4


def test_rank_at_origin_is_zero():
    for rep_name in ("sl2_adjoint", "sp4_fundamental"):
        fields = linearize(builtin_representation(rep_name))
        assert distribution_rank(fields, [0] * fields[0].n) == 0


def test_rank_errors():
    with pytest.raises(InvalidArgument):
        distribution_rank([], [1, 2])
    with pytest.raises(InvalidArgument):
        generic_rank(linearize(builtin_representation("sl2_adjoint")), samples=0)
    with pytest.raises(DimensionMismatch):
        distribution_rank(linearize(builtin_representation("sl2_adjoint")), [1, 2])


def test_annihilation():
    sl2_fields = linearize(builtin_representation("sl2_adjoint"))
    x1, x2, x3 = variables(default_chart(3))
    assert annihilates(sl2_fields, x1 * x3 - x2 * x2)
    assert not annihilates(sl2_fields, x1)
    assert annihilates(linearize(builtin_representation("h6_gamma")), Q2)


def test_polynomial_invariants_of_sl2_adjoint():
    chart = default_chart(3)
    fields = [f.as_polyfield(chart) for f in linearize(builtin_representation("sl2_adjoint"))]
    found = polynomial_invariants(fields, 2)
    assert len(found) == 1
    x1, x2, x3 = variables(chart)
    phi = x1 * x3 - x2 * x2
    ratio = next(iter(found[0].terms.values())) / next(iter(phi.terms.values()))
    assert found[0] == phi * ratio


def test_polyfield_commutator_antisymmetric():
    chart = default_chart(4)
    fields = [f.as_polyfield(chart) for f in linearize(builtin_representation("h6_gamma"))]
    for a in fields:
        for b in fields:
            assert (a.commutator(b) + b.commutator(a)).is_zero()
    assert isinstance(fields[0] * 2, PolyField)
