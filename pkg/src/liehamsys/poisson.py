"""Exact multivariate polynomials over rational coefficients and the canonical Poisson bracket."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _exact as ex
from .algebra_core import LieAlgebra, ValidationReport, Violation
from .errors import ChartMismatch, InvalidArgument, NotCanonical

MAX_COPIES = 5


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names.

    Canonical charts hold ``copies`` blocks of (q_1..q_n, p_1..p_n); abstract charts
    hold one variable per Lie algebra generator.
    """

    kind: str
    dof: int
    copies: int
    names: tuple[str, ...]

    @classmethod
    def canonical(cls, dof: int, copies: int = 1) -> "Chart":
        if dof < 1 or copies < 1:
            raise InvalidArgument("dof and copies must be positive")
        names = []
        for c in range(1, copies + 1):
            suffix = "" if copies == 1 else f"^({c})"
            names += [f"q{i}{suffix}" for i in range(1, dof + 1)]
            names += [f"p{i}{suffix}" for i in range(1, dof + 1)]
        return cls("canonical", dof, copies, tuple(names))

    @classmethod
    def abstract(cls, labels: Sequence[str]) -> "Chart":
        return cls("abstract", len(labels), 1, tuple(labels))

    @property
    def nvars(self) -> int:
        return len(self.names)

    def q(self, i: int, copy: int = 1) -> int:
        """Position of q_i in copy ``copy`` (both 1-based)."""
        return (copy - 1) * 2 * self.dof + (i - 1)

    def p(self, i: int, copy: int = 1) -> int:
        return (copy - 1) * 2 * self.dof + self.dof + (i - 1)

    def block(self, copy: int) -> range:
        start = (copy - 1) * 2 * self.dof
        return range(start, start + 2 * self.dof)

    def with_copies(self, copies: int) -> "Chart":
        if self.kind != "canonical":
            raise NotCanonical("only canonical charts carry copies")
        return Chart.canonical(self.dof, copies)


class Polynomial:
    """Sparse map from exponent tuples to nonzero Fractions, tied to a chart."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[tuple[int, ...], object] | None = None):
        self.chart = chart
        clean: dict[tuple[int, ...], Fraction] = {}
        for expo, c in (terms or {}).items():
            c = ex.frac(c)
            if c == 0:
                continue
            expo = tuple(expo)
            if len(expo) != chart.nvars:
                raise InvalidArgument("exponent length does not match chart")
            clean[expo] = clean.get(expo, Fraction(0)) + c
            if clean[expo] == 0:
                del clean[expo]
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, chart: Chart) -> "Polynomial":
        return cls(chart)

    @classmethod
    def constant(cls, chart: Chart, c) -> "Polynomial":
        return cls(chart, {(0,) * chart.nvars: c})

    @classmethod
    def variable(cls, chart: Chart, index: int | str) -> "Polynomial":
        if isinstance(index, str):
            index = chart.names.index(index)
        expo = [0] * chart.nvars
        expo[index] = 1
        return cls(chart, {tuple(expo): 1})

    @classmethod
    def _raw(cls, chart: Chart, terms: dict) -> "Polynomial":
        out = cls.__new__(cls)
        out.chart = chart
        out.terms = terms
        out._hash = None
        return out

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.chart != self.chart:
                raise ChartMismatch(f"{self.chart.names} vs {other.chart.names}")
            return other
        return Polynomial.constant(self.chart, other)

    # ring operations
    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0) + c
            if v:
                terms[e] = v
            else:
                terms.pop(e, None)
        return Polynomial._raw(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.chart, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = ex.frac(other)
            if c == 0:
                return Polynomial.zero(self.chart)
            return Polynomial._raw(self.chart, {e: c * v for e, v in self.terms.items()})
        other = self._coerce(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = terms.get(e, 0) + c1 * c2
                if v:
                    terms[e] = v
                else:
                    terms.pop(e, None)
        return Polynomial._raw(self.chart, terms)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, Polynomial):
            raise InvalidArgument("only division by scalars is supported")
        return self * (1 / ex.frac(c))

    def __pow__(self, n: int):
        if n < 0:
            raise InvalidArgument("negative powers are not polynomials")
        out = Polynomial.constant(self.chart, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.chart == other.chart and self.terms == other.terms
        try:
            return self.terms == Polynomial.constant(self.chart, other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    # calculus and substitution
    def diff(self, index: int) -> "Polynomial":
        terms = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                e2 = list(e)
                e2[index] = k - 1
                terms[tuple(e2)] = c * k
        return Polynomial._raw(self.chart, terms)

    def evaluate(self, point: Sequence):
        """Exact when the point is exact; float otherwise."""
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def remap(self, chart: Chart, positions: Sequence[int]) -> "Polynomial":
        """Move variable ``i`` to ``positions[i]`` of a new chart."""
        if len(positions) != self.chart.nvars:
            raise InvalidArgument("one target position per variable is required")
        terms = {}
        for e, c in self.terms.items():
            e2 = [0] * chart.nvars
            for i, k in enumerate(e):
                if k:
                    e2[positions[i]] += k
            e2 = tuple(e2)
            terms[e2] = terms.get(e2, 0) + c
        return Polynomial(chart, terms)

    def substitute(self, values: Sequence["Polynomial"]) -> "Polynomial":
        """Replace variable i with values[i] (all on a common chart) and expand."""
        if len(values) != self.chart.nvars:
            raise InvalidArgument("arity mismatch in substitution")
        if not values:
            raise InvalidArgument("nothing to substitute")
        target = values[0].chart
        if any(v.chart != target for v in values):
            raise ChartMismatch("substituted polynomials must share one chart")
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = values[i] ** k
            return cache[(i, k)]

        out = Polynomial.zero(target)
        for e, c in self.terms.items():
            term = Polynomial.constant(target, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def numeric(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorised float evaluator over arrays of shape (..., nvars)."""
        if not self.terms:
            return lambda x: np.zeros(np.shape(x)[:-1])
        expos = np.array(list(self.terms), dtype=float)
        coeffs = np.array([float(c) for c in self.terms.values()])

        def f(x):
            x = np.asarray(x, dtype=float)
            monos = np.prod(x[..., None, :] ** expos, axis=-1)
            return monos @ coeffs

        return f

    # serialisation
    def to_json(self) -> dict:
        return {
            "names": list(self.chart.names),
            "kind": self.chart.kind,
            "dof": self.chart.dof,
            "copies": self.chart.copies,
            "terms": [{"expo": list(e), "num": c.numerator, "den": c.denominator} for e, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Polynomial":
        try:
            chart = Chart(doc["kind"], int(doc["dof"]), int(doc["copies"]), tuple(doc["names"]))
            terms = {tuple(int(v) for v in t["expo"]): Fraction(int(t["num"]), int(t.get("den", 1))) for t in doc["terms"]}
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
            raise InvalidArgument(f"malformed polynomial document: {err}") from None
        return cls(chart, terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), [-k for k in kv[0]])):
            mono = "*".join(
                self.chart.names[i] if k == 1 else f"{self.chart.names[i]}**{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def variables(chart: Chart) -> list[Polynomial]:
    return [Polynomial.variable(chart, i) for i in range(chart.nvars)]


def canonical_pairs(chart: Chart) -> list[tuple[int, int]]:
    return [(chart.q(i, c), chart.p(i, c)) for c in range(1, chart.copies + 1) for i in range(1, chart.dof + 1)]


def bracket(f: Polynomial, g: Polynomial) -> Polynomial:
    """{f, g} = sum over all conjugate pairs of df/dq dg/dp - df/dp dg/dq."""
    if f.chart != g.chart:
        raise ChartMismatch("bracket of polynomials on different charts")
    if f.chart.kind != "canonical":
        raise NotCanonical("the canonical bracket needs a (q, p) chart")
    out = Polynomial.zero(f.chart)
    for qi, pi in canonical_pairs(f.chart):
        out = out + f.diff(qi) * g.diff(pi) - f.diff(pi) * g.diff(qi)
    return out


def lie_poisson_bracket(f: Polynomial, g: Polynomial, algebra: LieAlgebra) -> Polynomial:
    """Bracket on an abstract chart: {v_i, v_j} = C_ij^k v_k."""
    if f.chart != g.chart:
        raise ChartMismatch("bracket of polynomials on different charts")
    if f.chart.nvars != algebra.dim:
        raise InvalidArgument("chart does not match the algebra dimension")
    v = variables(f.chart)
    df = [f.diff(i) for i in range(algebra.dim)]
    dg = [g.diff(j) for j in range(algebra.dim)]
    out = Polynomial.zero(f.chart)
    for (i, j, k), c in algebra.structure.items():
        if df[i].terms and dg[j].terms:
            out = out + df[i] * dg[j] * v[k] * c
    return out


def _combination(hams: Sequence[Polynomial], coeffs: Iterable[tuple[int, Fraction]]) -> Polynomial:
    out = Polynomial.zero(hams[0].chart)
    for k, c in coeffs:
        out = out + hams[k] * c
    return out


def verify_bracket_table(hams: Sequence[Polynomial], algebra: LieAlgebra) -> ValidationReport:
    """Check {h_i, h_j} = C_ij^k h_k for every i < j (1-based indices in the report)."""
    if len(hams) != algebra.dim:
        raise InvalidArgument(f"{len(hams)} Hamiltonians for an algebra of dimension {algebra.dim}")
    bad = []
    checked = 0
    for i, j in itertools.combinations(range(algebra.dim), 2):
        checked += 1
        lhs = bracket(hams[i], hams[j])
        rhs = _combination(hams, algebra.bracket(i, j).items()) if algebra.bracket(i, j) else Polynomial.zero(hams[0].chart)
        residual = lhs - rhs
        if not residual.is_zero():
            bad.append(Violation("bracket", (i + 1, j + 1), f"residual {residual}"))
    return ValidationReport(tuple(bad), checked)


def bracket_structure(hams: Sequence[Polynomial], name: str = "hamiltonians", labels: Sequence[str] | None = None) -> LieAlgebra:
    """Structure constants of a bracket-closed list of polynomials, found by exact linear solve."""
    r = len(hams)
    monos = sorted({e for h in hams for e in h.terms})
    index = {e: n for n, e in enumerate(monos)}

    def coords(p: Polynomial):
        v = [Fraction(0)] * len(monos)
        for e, c in p.terms.items():
            if e not in index:
                raise InvalidArgument("bracket leaves the span of the given polynomials")
            v[index[e]] = c
        return v

    cols = [coords(h) for h in hams]
    rows = [list(r_) for r_ in zip(*cols)]
    structure = {}
    for i, j in itertools.permutations(range(r), 2):
        b = bracket(hams[i], hams[j])
        if b.is_zero():
            continue
        try:
            sol = ex.solve(rows, coords(b))
        except ValueError as err:
            raise InvalidArgument(f"bracket ({i + 1},{j + 1}) not in the span: {err}") from None
        for k, c in enumerate(sol):
            if c:
                structure[(i, j, k)] = c
    return LieAlgebra(name, tuple(labels or (f"h{i + 1}" for i in range(r))), structure)


def compose(casimir: Polynomial, hams: Sequence[Polynomial]) -> Polynomial:
    """Substitute v_i -> h_i in a polynomial over generators."""
    if casimir.chart.kind != "abstract":
        raise InvalidArgument("the invariant must live on an abstract generator chart")
    if len(hams) != casimir.chart.nvars:
        raise InvalidArgument(f"{len(hams)} Hamiltonians for {casimir.chart.nvars} generators")
    return casimir.substitute(list(hams))


def casimir_commutes(casimir: Polynomial, hams: Sequence[Polynomial]) -> bool:
    composed = compose(casimir, hams)
    return all(bracket(composed, h).is_zero() for h in hams)


def is_central(poly: Polynomial, algebra: LieAlgebra) -> bool:
    """Whether a generator polynomial Lie-Poisson commutes with every generator."""
    return all(lie_poisson_bracket(poly, v, algebra).is_zero() for v in variables(poly.chart))


# ---------------------------------------------------------------------------
# printed invariants, written over the Hamiltonian basis v_1..v_r


def _abstract(r: int) -> tuple[Chart, list[Polynomial]]:
    chart = Chart.abstract([f"v{i + 1}" for i in range(r)])
    return chart, variables(chart)


def _h6_c3():
    _, v = _abstract(6)
    v1, v2, v3, v4, v5, v6 = v
    return v6 * (v1**2 - 4 * v2 * v3) + 2 * (v3 * v4**2 + v2 * v5**2 - v1 * v4 * v5)


def _so13_c2():
    _, v = _abstract(6)
    return v[0] ** 2 + v[1] ** 2 + v[2] ** 2 - v[3] ** 2 - v[4] ** 2 - v[5] ** 2


def _so13_c2_prime():
    _, v = _abstract(6)
    return -v[0] * v[3] - v[1] * v[5] + v[2] * v[4]


def _sp4_c2():
    _, h = _abstract(10)
    return h[0] ** 2 + h[3] ** 2 + 2 * h[1] * h[2] - 2 * h[5] * h[8] - 4 * h[4] * h[7] - 4 * h[6] * h[9]


def _sp4_c4():
    # generator ordering X11, X12, X21, X22, Xm11, Xm12, Xm22, X1m1, X1m2, X2m2
    _, v = _abstract(10)
    x11, x12, x21, x22, xm11, xm12, xm22, x1m1, x1m2, x2m2 = v
    return (
        x1m2**2 * xm12**2 - 4 * x1m1 * x2m2 * xm12**2 - 2 * x1m2 * x12 * x21 * xm12 + 4 * x1m1 * x12 * x22 * xm12
        - 4 * xm22 * xm11 * x1m2**2 - 4 * xm22 * x1m1 * x12**2 + x12**2 * x21**2 - 4 * xm11 * x2m2 * x21**2
        - 4 * xm11 * x1m1 * x22**2 + 16 * xm22 * xm11 * x1m1 * x2m2 + 4 * xm11 * x1m2 * x21 * x22
        - 2 * x11 * (-2 * xm22 * x1m2 * x12 + x21 * x22 * x12 - 2 * xm12 * x2m2 * x21 + xm12 * x1m2 * x22)
        + x11**2 * (x22**2 - 4 * xm22 * x2m2)
    )


def _h6_c4():
    # fourth-order invariant in the D, K, H, G, P, M ordering
    _, v = _abstract(6)
    d, k, h, g, p, m = v
    return (-2 * m * h + p**2) * (2 * m * k - g**2) + (m * d - g * p) ** 2


def _h6_c3_generators():
    _, v = _abstract(6)
    d, k, h, g, p, m = v
    return m * (d**2 - 4 * k * h) + 2 * (h * g**2 + k * p**2 - d * g * p)


def _h6_c0():
    _, v = _abstract(6)
    return v[5]


def _so13_c2_generators():
    _, v = _abstract(6)
    j, p1, p2, h, k1, k2 = v
    return j**2 + p1**2 + p2**2 - h**2 - k1**2 - k2**2


def _so13_c2_prime_generators():
    _, v = _abstract(6)
    j, p1, p2, h, k1, k2 = v
    return -j * h - p1 * k2 + p2 * k1


def _sl2_phi():
    _, x = _abstract(3)
    return x[0] * x[2] - x[1] ** 2


_CASIMIRS = {
    "h6_C3": _h6_c3,
    "h6_C3_generators": _h6_c3_generators,
    "h6_C4_generators": _h6_c4,
    "h6_C0_generators": _h6_c0,
    "so13_C2": _so13_c2,
    "so13_C2prime": _so13_c2_prime,
    "so13_C2_generators": _so13_c2_generators,
    "so13_C2prime_generators": _so13_c2_prime_generators,
    "sp4_C2": _sp4_c2,
    "sp4_C4": _sp4_c4,
    "sl2_phi": _sl2_phi,
}

BUILTIN_CASIMIRS = tuple(_CASIMIRS)


def builtin_casimir(name: str) -> Polynomial:
    """Printed invariants on an abstract chart v1..vr.

    Names ending in ``_generators`` are written over the abstract Lie algebra basis;
    the others over the Hamiltonian basis. The sp(4) quartic is the same polynomial
    in both (its generators map to the h-basis in order).
    """
    try:
        return _CASIMIRS[name]()
    except KeyError:
        raise InvalidArgument(f"unknown invariant {name!r}") from None
