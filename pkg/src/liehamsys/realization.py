"""Linear vector fields induced by representations and their Hamiltonian structure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact as ex
from .algebra_core import LieAlgebra, Representation
from .errors import DimensionMismatch, InvalidArgument, NotHamiltonian
from .poisson import Chart, Polynomial, bracket, bracket_structure, variables

RANK_TOL = 1e-10


@dataclass(frozen=True)
class LinearVectorField:
    """Field x -> A x on R^n."""

    matrix: ex.Matrix

    def __post_init__(self):
        object.__setattr__(self, "matrix", ex.to_matrix(self.matrix))

    @property
    def n(self) -> int:
        return len(self.matrix)

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])

    def value(self, x):
        if all(isinstance(v, (int, Fraction)) for v in x):
            return [sum((a * ex.frac(b) for a, b in zip(row, x)), Fraction(0)) for row in self.matrix]
        return self.array() @ np.asarray(x, dtype=float)

    def as_polyfield(self, chart: Chart) -> "PolyField":
        if chart.nvars != self.n:
            raise DimensionMismatch("chart size differs from the field dimension")
        v = variables(chart)
        comps = []
        for row in self.matrix:
            comp = Polynomial.zero(chart)
            for c, xv in zip(row, v):
                if c:
                    comp = comp + xv * c
            comps.append(comp)
        return PolyField(chart, tuple(comps))


@dataclass(frozen=True)
class SymplecticStructure:
    """Canonical J = [[0, I], [-I, 0]] in (q_1..q_m, p_1..p_m) ordering."""

    n: int

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise InvalidArgument("symplectic dimension must be even and positive")

    @property
    def matrix(self) -> ex.Matrix:
        m = self.n // 2
        rows = []
        for i in range(self.n):
            row = [0] * self.n
            if i < m:
                row[i + m] = 1
            else:
                row[i - m] = -1
            rows.append(row)
        return ex.to_matrix(rows)

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])


def default_chart(n: int) -> Chart:
    """(q, p) chart for even n, plain x1..xn otherwise."""
    if n % 2 == 0:
        return Chart.canonical(n // 2)
    return Chart.abstract([f"x{i + 1}" for i in range(n)])


def linearize(rep: Representation) -> list[LinearVectorField]:
    """Field matrices A_alpha = Gamma(X_alpha)^T."""
    return [LinearVectorField(ex.transpose(m)) for m in rep.mats]


def _check_dims(field: LinearVectorField, sym: SymplecticStructure):
    if field.n != sym.n:
        raise DimensionMismatch(f"field on R^{field.n} vs symplectic R^{sym.n}")


def is_hamiltonian(field: LinearVectorField, sym: SymplecticStructure) -> bool:
    _check_dims(field, sym)
    jm = sym.matrix
    return ex.is_zero(ex.add(ex.matmul(jm, field.matrix), ex.matmul(ex.transpose(field.matrix), jm)))


def hamiltonian_of(field: LinearVectorField, sym: SymplecticStructure) -> Polynomial:
    """h(x) = -1/2 x^T (J A) x, so that J grad h = A x."""
    if not is_hamiltonian(field, sym):
        raise NotHamiltonian("J A + A^T J does not vanish")
    ja = ex.matmul(sym.matrix, field.matrix)
    chart = Chart.canonical(sym.n // 2)
    x = variables(chart)
    h = Polynomial.zero(chart)
    for i in range(sym.n):
        for j in range(sym.n):
            if ja[i][j]:
                h = h + x[i] * x[j] * (-ja[i][j] / 2)
    return h


def hamiltonians(rep: Representation) -> list[Polynomial]:
    fields = linearize(rep)
    sym = SymplecticStructure(fields[0].n)
    return [hamiltonian_of(f, sym) for f in fields]


def hamiltonian_sign(rep: Representation, hams: Sequence[Polynomial] | None = None) -> int:
    """The s in {h_i, h_j} = s h_[X_i, X_j], which must be one sign for every pair."""
    hams = list(hams) if hams is not None else hamiltonians(rep)
    found = bracket_structure(hams)
    alg = rep.algebra
    if found.structure == alg.structure:
        return 1
    if found.structure == alg.negated().structure:
        return -1
    raise InvalidArgument("Hamiltonian brackets match the algebra up to no single sign")


def lh_algebra(rep: Representation) -> LieAlgebra:
    """Algebra spanned by the Hamiltonian functions under the canonical bracket."""
    s = hamiltonian_sign(rep)
    return rep.algebra if s == 1 else rep.algebra.negated(f"{rep.algebra.name}_lh")


def _value_matrix(fields: Sequence[LinearVectorField], point) -> list:
    return [f.value(point) for f in fields]


def distribution_rank(fields: Sequence[LinearVectorField], point, tol: float = RANK_TOL) -> int:
    """Rank of the span of the field values at a point (exact when the point is exact)."""
    if not fields:
        raise InvalidArgument("no fields given")
    n = fields[0].n
    if any(f.n != n for f in fields) or len(point) != n:
        raise DimensionMismatch("fields and point must share one dimension")
    if all(isinstance(v, (int, Fraction)) for v in point):
        return ex.rank(_value_matrix(fields, point))
    vals = np.array([f.array() @ np.asarray(point, dtype=float) for f in fields])
    s = np.linalg.svd(vals, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def generic_rank(fields: Sequence[LinearVectorField], samples: int = 16, seed: int | None = 0, exact: bool = True) -> int:
    """Maximum pointwise rank over random points."""
    if not fields:
        raise InvalidArgument("no fields given")
    if samples < 1:
        raise InvalidArgument("samples must be at least 1")
    rng = np.random.default_rng(seed)
    n = fields[0].n
    best = 0
    for _ in range(samples):
        if exact:
            point = [int(v) for v in rng.integers(-9, 10, size=n)]
        else:
            point = rng.normal(size=n)
        best = max(best, distribution_rank(fields, point))
    return best


def annihilates(fields: Sequence[LinearVectorField], invariant: Polynomial) -> bool:
    """Whether every field kills the polynomial identically."""
    for f in fields:
        if f.n != invariant.chart.nvars:
            raise DimensionMismatch("invariant chart does not match the field dimension")
        if not f.as_polyfield(invariant.chart).apply(invariant).is_zero():
            return False
    return True


@dataclass(frozen=True)
class PolyField:
    """Vector field with polynomial components on a chart."""

    chart: Chart
    components: tuple[Polynomial, ...]

    def __post_init__(self):
        if len(self.components) != self.chart.nvars:
            raise DimensionMismatch("one component per coordinate is required")

    def apply(self, f: Polynomial) -> Polynomial:
        out = Polynomial.zero(self.chart)
        for j, comp in enumerate(self.components):
            if comp.terms:
                out = out + comp * f.diff(j)
        return out

    def commutator(self, other: "PolyField") -> "PolyField":
        """[X, Y]^j = X(Y^j) - Y(X^j)."""
        comps = tuple(self.apply(b) - other.apply(a) for a, b in zip(self.components, other.components))
        return PolyField(self.chart, comps)

    def __add__(self, other: "PolyField") -> "PolyField":
        return PolyField(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __mul__(self, c) -> "PolyField":
        return PolyField(self.chart, tuple(a * c for a in self.components))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def evaluate(self, point) -> list:
        return [c.evaluate(point) for c in self.components]

    def __str__(self):
        parts = [f"({c})*d/d{self.chart.names[j]}" for j, c in enumerate(self.components) if not c.is_zero()]
        return " + ".join(parts) or "0"


def closes_on(fields: Sequence[PolyField], algebra: LieAlgebra) -> list[tuple[int, int]]:
    """Pairs (1-based) where [X_i, X_j] differs from C_ij^k X_k; empty means closure holds."""
    bad = []
    chart = fields[0].chart
    for i, j in itertools.combinations(range(len(fields)), 2):
        lhs = fields[i].commutator(fields[j])
        rhs = PolyField(chart, tuple(Polynomial.zero(chart) for _ in range(chart.nvars)))
        for k, c in algebra.bracket(i, j).items():
            rhs = rhs + fields[k] * c
        if not (lhs - rhs).is_zero():
            bad.append((i + 1, j + 1))
    return bad


def _monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return out


def polynomial_invariants(fields: Sequence[PolyField], max_degree: int = 2) -> list[Polynomial]:
    """Basis of nonconstant polynomials of degree <= max_degree killed by every field.

    Only degrees 1 and 2 are supported, which covers every built-in case.
    """
    if not fields:
        raise InvalidArgument("no fields given")
    if not 1 <= max_degree <= 2:
        raise InvalidArgument("invariant discovery is implemented for degree <= 2 only")
    chart = fields[0].chart
    monos = [e for d in range(1, max_degree + 1) for e in _monomials(chart.nvars, d)]
    basis = [Polynomial(chart, {e: 1}) for e in monos]
    images = [[f.apply(b) for b in basis] for f in fields]
    keys = sorted({e for row in images for p in row for e in p.terms})
    rows = []
    for row in images:
        for e in keys:
            rows.append([p.terms.get(e, Fraction(0)) for p in row])
    null = ex.nullspace(rows, len(basis)) if rows else [[Fraction(int(i == j)) for i in range(len(basis))] for j in range(len(basis))]
    return [Polynomial(chart, {e: c for e, c in zip(monos, vec)}) for vec in null]
