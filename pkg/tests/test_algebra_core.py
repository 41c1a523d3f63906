from fractions import Fraction

import pytest

from liehamsys.algebra_core import (
    BUILTIN_ALGEBRAS,
    BUILTIN_REPRESENTATIONS,
    LieAlgebra,
    Representation,
    adjoint_representation,
    algebra_from_json,
    algebra_to_json,
    builtin_algebra,
    builtin_representation,
    invariant_count,
    representation_from_json,
    representation_to_json,
    validate,
)
from liehamsys.errors import InvalidArgument, UnknownAlgebra, UnknownRepresentation


@pytest.mark.parametrize("name", BUILTIN_ALGEBRAS)
def test_builtin_algebras_are_lie_algebras(name):
    report = validate(builtin_algebra(name))
    assert report.ok, report.violations


@pytest.mark.parametrize("name", BUILTIN_REPRESENTATIONS)
def test_builtin_representations_are_faithful_homomorphisms(name):
    rep = builtin_representation(name)
    assert rep.check_homomorphism().ok
    assert rep.is_faithful()


def test_dimensions():
    dims = {name: builtin_algebra(name).dim for name in BUILTIN_ALGEBRAS}
    assert dims == {"sl2": 3, "schrodinger_h6": 6, "so13": 6, "sp4": 10}
    sizes = {name: builtin_representation(name).n for name in BUILTIN_REPRESENTATIONS}
    assert sizes == {"sl2_adjoint": 3, "h6_gamma": 4, "so13_gamma": 4, "sp4_fundamental": 4}


def test_sl2_table():
    sl2 = builtin_algebra("sl2")
    e_minus, h, e_plus = (sl2.index(lab) for lab in ("e-", "h", "e+"))
    assert sl2.bracket(h, e_plus) == {e_plus: 1}
    assert sl2.bracket(h, e_minus) == {e_minus: -1}
    assert sl2.bracket(e_plus, e_minus) == {h: -2}
    assert sl2.constant(e_minus, e_plus, h) == 2


def test_antisymmetry_is_built_in():
    h6 = builtin_algebra("schrodinger_h6")
    for i in range(6):
        for j in range(6):
            for k in range(6):
                assert h6.constant(i, j, k) == -h6.constant(j, i, k)


def test_h6_center_is_m():
    h6 = builtin_algebra("schrodinger_h6")
    m = h6.index("M")
    assert all(not h6.bracket(i, m) for i in range(6))


def test_jacobi_failure_is_reported():
    # [a,b] = a, [a,c] = b: the cyclic sum on (a, b, c) is b
    bad = LieAlgebra.from_brackets("bad", ("a", "b", "c"), {("a", "b"): {"a": 1}, ("a", "c"): {"b": 1}})
    report = validate(bad)
    assert not report.ok
    assert any(v.kind == "jacobi" for v in report.violations)


def test_invariant_counts():
    expected = {"sl2": 1, "schrodinger_h6": 2, "so13": 2, "sp4": 2}
    for name, count in expected.items():
        assert invariant_count(builtin_algebra(name), 8) == count


def test_adjoint_matches_structure_constants():
    sl2 = builtin_algebra("sl2")
    ad = adjoint_representation(sl2)
    assert ad.check_homomorphism().ok
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert ad.mats[i][k][j] == sl2.constant(i, j, k)


def test_decompose_roundtrip():
    rep = builtin_representation("sp4_fundamental")
    coeffs = [Fraction(i + 1, 3) for i in range(10)]
    assert rep.decompose(rep.combination(coeffs)) == coeffs


def test_homomorphism_failure_detected():
    rep = builtin_representation("h6_gamma")
    mats = list(rep.mats)
    mats[0] = tuple(tuple(2 * v for v in row) for row in mats[0])
    broken = Representation(rep.algebra, tuple(mats), "broken")
    assert not broken.check_homomorphism().ok


def test_json_roundtrip():
    for name in BUILTIN_ALGEBRAS:
        alg = builtin_algebra(name)
        assert algebra_from_json(algebra_to_json(alg)).structure == alg.structure
    rep = builtin_representation("so13_gamma")
    back = representation_from_json(representation_to_json(rep))
    assert back.mats == rep.mats


def test_json_errors():
    with pytest.raises(InvalidArgument):
        algebra_from_json({"labels": ["a"]})
    with pytest.raises(InvalidArgument):
        algebra_from_json({"labels": ["a", "b"], "structure": [{"i": 0, "j": 1, "k": 5, "num": 1}]})


def test_unknown_names():
    with pytest.raises(UnknownAlgebra):
        builtin_algebra("e8")
    with pytest.raises(UnknownRepresentation):
        builtin_representation("spin")


def test_so13_with_negative_p1_p2_bracket_breaks_jacobi():
    alg = builtin_algebra("so13")
    j, p1, p2 = (alg.index(lab) for lab in ("J", "P1", "P2"))
    structure = dict(alg.structure)
    structure[(p1, p2, j)] = -structure[(p1, p2, j)]
    structure[(p2, p1, j)] = -structure[(p2, p1, j)]
    flipped = LieAlgebra("so13 flipped", alg.labels, structure)
    assert not validate(flipped).ok
    assert validate(alg).ok


def test_one_sided_flip_reports_antisymmetry():
    alg = builtin_algebra("sl2")
    structure = dict(alg.structure)
    structure[(0, 2, 1)] = -structure[(0, 2, 1)]
    report = validate(LieAlgebra("one-sided", alg.labels, structure))
    kinds = {(v.kind, v.indices) for v in report.violations}
    assert ("antisymmetry", (1, 3)) in kinds
