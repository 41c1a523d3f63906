"""Exact Lie algebras, matrix representations and their structural checks."""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import _exact as ex
from .errors import InvalidArgument, UnknownAlgebra, UnknownRepresentation

Structure = Mapping[tuple[int, int, int], Fraction]


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: tuple
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """A list of violated identities; empty means everything checked out."""

    violations: tuple[Violation, ...] = ()
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations, self.checked + other.checked)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "violations": [{"kind": v.kind, "indices": list(v.indices), "detail": v.detail} for v in self.violations],
        }


@dataclass(frozen=True)
class LieAlgebra:
    """Real Lie algebra given by structure constants ``[X_i, X_j] = C_ij^k X_k`` (0-based)."""

    name: str
    labels: tuple[str, ...]
    structure: Structure = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j, k), c in self.structure.items():
            c = ex.frac(c)
            if c != 0:
                clean[(i, j, k)] = c
        object.__setattr__(self, "structure", clean)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def constant(self, i: int, j: int, k: int) -> Fraction:
        return self.structure.get((i, j, k), Fraction(0))

    def bracket(self, i: int, j: int) -> dict[int, Fraction]:
        """Coefficients of [X_i, X_j] in the basis."""
        return {k: c for (a, b, k), c in self.structure.items() if a == i and b == j}

    def bracket_vectors(self, u: Sequence, v: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for (i, j, k), c in self.structure.items():
            if u[i] and v[j]:
                out[k] += c * u[i] * v[j]
        return out

    def negated(self, name: str | None = None) -> "LieAlgebra":
        """Same basis with all structure constants negated (isomorphic via X -> -X)."""
        return LieAlgebra(name or f"{self.name}_negated", self.labels, {key: -c for key, c in self.structure.items()})

    @classmethod
    def from_brackets(cls, name: str, labels: Sequence[str], table: Mapping[tuple[str, str], Mapping[str, object]]):
        """Build from a list of nonzero brackets; the antisymmetric partner is filled in."""
        labels = tuple(labels)
        pos = {lab: n for n, lab in enumerate(labels)}
        structure: dict[tuple[int, int, int], Fraction] = {}
        for (a, b), rhs in table.items():
            i, j = pos[a], pos[b]
            for lab, c in rhs.items():
                k = pos[lab]
                structure[(i, j, k)] = ex.frac(c)
                structure[(j, i, k)] = -ex.frac(c)
        return cls(name, labels, structure)


def validate(algebra: LieAlgebra) -> ValidationReport:
    """Report every antisymmetry and Jacobi violation (1-based indices in the report)."""
    r = algebra.dim
    bad: list[Violation] = []
    checked = 0
    for i in range(r):
        for j in range(i, r):
            for k in range(r):
                checked += 1
                if algebra.constant(i, j, k) + algebra.constant(j, i, k) != 0:
                    bad.append(Violation("antisymmetry", (i + 1, j + 1), f"component {algebra.labels[k]}"))
    basis = [[Fraction(int(a == b)) for a in range(r)] for b in range(r)]
    for i, j, k in itertools.combinations(range(r), 3):
        checked += 1
        total = [Fraction(0)] * r
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            inner = algebra.bracket_vectors(basis[a], basis[b])
            outer = algebra.bracket_vectors(inner, basis[c])
            total = [x + y for x, y in zip(total, outer)]
        if any(total):
            detail = " + ".join(f"{v}*{algebra.labels[n]}" for n, v in enumerate(total) if v)
            bad.append(Violation("jacobi", (i + 1, j + 1, k + 1), detail))
    return ValidationReport(tuple(bad), checked)


@dataclass(frozen=True)
class Representation:
    """Exact matrices ``Gamma(X_alpha)``, one per basis element."""

    algebra: LieAlgebra
    mats: tuple[ex.Matrix, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "mats", tuple(ex.to_matrix(m) for m in self.mats))
        if len(self.mats) != self.algebra.dim:
            raise InvalidArgument("one matrix per generator is required")

    @property
    def n(self) -> int:
        return len(self.mats[0])

    def combination(self, coeffs: Sequence[Fraction]) -> ex.Matrix:
        out = ex.zeros(self.n)
        for c, m in zip(coeffs, self.mats):
            if c:
                out = ex.add(out, ex.scale(c, m))
        return out

    def check_homomorphism(self) -> ValidationReport:
        bad = []
        checked = 0
        for i, j in itertools.combinations(range(self.algebra.dim), 2):
            checked += 1
            lhs = ex.commutator(self.mats[i], self.mats[j])
            coeffs = [self.algebra.constant(i, j, k) for k in range(self.algebra.dim)]
            rhs = self.combination(coeffs)
            if lhs != rhs:
                bad.append(Violation("homomorphism", (i + 1, j + 1), f"[{self.algebra.labels[i]},{self.algebra.labels[j]}]"))
        return ValidationReport(tuple(bad), checked)

    def is_faithful(self) -> bool:
        return ex.rank([ex.flatten(m) for m in self.mats]) == self.algebra.dim

    def decompose(self, matrix: ex.Matrix) -> list[Fraction]:
        """Coordinates of a matrix in the span of the generator images."""
        cols = [ex.flatten(m) for m in self.mats]
        rows = list(zip(*cols))
        return ex.solve(rows, ex.flatten(ex.to_matrix(matrix)))


def adjoint_representation(algebra: LieAlgebra) -> Representation:
    """ad(X_i) with entry [k][j] = C_ij^k."""
    r = algebra.dim
    mats = []
    for i in range(r):
        mats.append(tuple(tuple(algebra.constant(i, j, k) for j in range(r)) for k in range(r)))
    return Representation(algebra, tuple(mats), name=f"{algebra.name}_adjoint")


def invariant_count(algebra: LieAlgebra, trials: int = 8, seed: int | None = 0) -> int:
    """dim g minus the generic rank of the matrix (x^k C_ij^k), ranked exactly."""
    if trials <= 0:
        raise InvalidArgument("trials must be positive")
    rng = random.Random(seed)
    r = algebra.dim
    best = 0
    for _ in range(trials):
        x = [0] * r
        while not any(x):
            x = [rng.randint(-9, 9) for _ in range(r)]
        mat = [[Fraction(0)] * r for _ in range(r)]
        for (i, j, k), c in algebra.structure.items():
            mat[i][j] += c * x[k]
        best = max(best, ex.rank(mat))
    return r - best


def abelian_algebra(dim: int, name: str = "abelian") -> LieAlgebra:
    return LieAlgebra(name, tuple(f"A{i + 1}" for i in range(dim)), {})


# ---------------------------------------------------------------------------
# built-in tables

_SL2 = {("h", "e+"): {"e+": 1}, ("h", "e-"): {"e-": -1}, ("e-", "e+"): {"h": 2}}

_H6 = {
    ("D", "K"): {"K": 2}, ("D", "H"): {"H": -2}, ("D", "G"): {"G": 1}, ("D", "P"): {"P": -1},
    ("K", "H"): {"D": -1}, ("K", "P"): {"G": -1}, ("H", "G"): {"P": 1}, ("G", "P"): {"M": -1},
}

# [P1, P2] = +J is the value carried by the 4x4 representation (see ledger)
_SO13 = {
    ("J", "P1"): {"P2": 1}, ("J", "P2"): {"P1": -1}, ("J", "K1"): {"K2": 1}, ("J", "K2"): {"K1": -1},
    ("P1", "P2"): {"J": 1}, ("K1", "K2"): {"J": -1},
    ("P1", "K1"): {"H": -1}, ("P2", "K2"): {"H": -1},
    ("H", "P1"): {"K1": -1}, ("H", "P2"): {"K2": -1},
    ("H", "K1"): {"P1": -1}, ("H", "K2"): {"P2": -1},
}

_SP4_LABELS = ("X11", "X12", "X21", "X22", "Xm11", "Xm12", "Xm22", "X1m1", "X1m2", "X2m2")

_SP4 = {
    ("X11", "X12"): {"X12": 1}, ("X11", "X21"): {"X21": -1}, ("X11", "Xm11"): {"Xm11": 2},
    ("X11", "Xm12"): {"Xm12": 1}, ("X11", "X1m1"): {"X1m1": -2}, ("X11", "X1m2"): {"X1m2": -1},
    ("X12", "X21"): {"X11": 1, "X22": -1}, ("X12", "X22"): {"X12": 1}, ("X12", "Xm12"): {"Xm11": 2},
    ("X12", "Xm22"): {"Xm12": 1}, ("X12", "X1m1"): {"X1m2": -1}, ("X12", "X1m2"): {"X2m2": -2},
    ("X21", "X22"): {"X21": -1}, ("X21", "Xm11"): {"Xm12": 1}, ("X21", "Xm12"): {"Xm22": 2},
    ("X21", "X1m2"): {"X1m1": -2}, ("X21", "X2m2"): {"X1m2": -1},
    ("X22", "Xm12"): {"Xm12": 1}, ("X22", "Xm22"): {"Xm22": 2}, ("X22", "X1m2"): {"X1m2": -1},
    ("X22", "X2m2"): {"X2m2": -2},
    ("Xm11", "X1m1"): {"X11": -1}, ("Xm11", "X1m2"): {"X12": -1}, ("Xm12", "X1m1"): {"X21": -1},
    ("Xm12", "X1m2"): {"X11": -1, "X22": -1}, ("Xm12", "X2m2"): {"X12": -1},
    ("Xm22", "X1m2"): {"X21": -1}, ("Xm22", "X2m2"): {"X22": -1},
}

_ALGEBRAS = {
    "sl2": (("e-", "h", "e+"), _SL2),
    "schrodinger_h6": (("D", "K", "H", "G", "P", "M"), _H6),
    "so13": (("J", "P1", "P2", "H", "K1", "K2"), _SO13),
    "sp4": (_SP4_LABELS, _SP4),
}


def builtin_algebra(name: str) -> LieAlgebra:
    try:
        labels, table = _ALGEBRAS[name]
    except KeyError:
        raise UnknownAlgebra(name) from None
    return LieAlgebra.from_brackets(name, labels, table)


# Generic-element matrices with entries written as linear forms in the generators.
_H6_PATTERN = (
    ("-D", "0", "H", "P"),
    ("-G", "0", "P", "2M"),
    ("-K", "0", "D", "G"),
    ("0", "0", "0", "0"),
)
_SO13_PATTERN = (
    ("K1", "P2", "-H-P1", "-J+K2"),
    ("-P2", "K1", "-J+K2", "H+P1"),
    ("-H+P1", "J+K2", "-K1", "P2"),
    ("J+K2", "H-P1", "-P2", "-K1"),
)
_SP4_PATTERN = (
    ("X11", "X12", "-Xm11", "-Xm12"),
    ("X21", "X22", "-Xm12", "-Xm22"),
    ("X1m1", "X1m2", "-X11", "-X21"),
    ("X1m2", "X2m2", "-X12", "-X22"),
)

_TERM = re.compile(r"([+-]?)(\d*)([A-Za-z][A-Za-z0-9]*)")


def matrices_from_pattern(labels: Sequence[str], pattern, factor=1) -> tuple[ex.Matrix, ...]:
    """Split a matrix of linear forms such as ``-H+P1`` into one matrix per generator."""
    n = len(pattern)
    out = {lab: [[Fraction(0)] * n for _ in range(n)] for lab in labels}
    for r, row in enumerate(pattern):
        for c, entry in enumerate(row):
            if entry.strip() == "0":
                continue
            for sign, num, lab in _TERM.findall(entry.replace(" ", "")):
                coef = Fraction(int(num) if num else 1) * (-1 if sign == "-" else 1)
                out[lab][r][c] += coef * ex.frac(factor)
    return tuple(ex.to_matrix(out[lab]) for lab in labels)


def builtin_representation(name: str) -> Representation:
    if name == "sl2_adjoint":
        return adjoint_representation(builtin_algebra("sl2"))
    if name == "h6_gamma":
        alg = builtin_algebra("schrodinger_h6")
        return Representation(alg, matrices_from_pattern(alg.labels, _H6_PATTERN), name)
    if name == "so13_gamma":
        alg = builtin_algebra("so13")
        return Representation(alg, matrices_from_pattern(alg.labels, _SO13_PATTERN, Fraction(1, 2)), name)
    if name == "sp4_fundamental":
        alg = builtin_algebra("sp4")
        return Representation(alg, matrices_from_pattern(alg.labels, _SP4_PATTERN), name)
    raise UnknownRepresentation(name)


BUILTIN_ALGEBRAS = tuple(_ALGEBRAS)
BUILTIN_REPRESENTATIONS = ("sl2_adjoint", "h6_gamma", "so13_gamma", "sp4_fundamental")


# ---------------------------------------------------------------------------
# JSON exchange


def _pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def algebra_to_json(algebra: LieAlgebra) -> dict:
    return {
        "name": algebra.name,
        "dim": algebra.dim,
        "labels": list(algebra.labels),
        "structure": [
            {"i": i, "j": j, "k": k, "num": c.numerator, "den": c.denominator}
            for (i, j, k), c in sorted(algebra.structure.items())
        ],
    }


def algebra_from_json(doc: Mapping) -> LieAlgebra:
    try:
        labels = list(doc["labels"])
        if int(doc.get("dim", len(labels))) != len(labels):
            raise InvalidArgument("dim does not match the number of labels")
        structure = {(int(e["i"]), int(e["j"]), int(e["k"])): Fraction(int(e["num"]), int(e.get("den", 1))) for e in doc["structure"]}
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
        raise InvalidArgument(f"malformed algebra document: {err}") from None
    r = len(labels)
    if any(not (0 <= v < r) for key in structure for v in key):
        raise InvalidArgument("structure index out of range")
    return LieAlgebra(str(doc.get("name", "user")), labels, structure)


def representation_to_json(rep: Representation) -> dict:
    doc = algebra_to_json(rep.algebra)
    doc["mats"] = [[[_pair(x) for x in row] for row in m] for m in rep.mats]
    return doc


def representation_from_json(doc: Mapping) -> Representation:
    alg = algebra_from_json(doc)
    try:
        mats = tuple(tuple(tuple(Fraction(int(a), int(b)) for a, b in row) for row in m) for m in doc["mats"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
        raise InvalidArgument(f"malformed representation document: {err}") from None
    return Representation(alg, mats, str(doc.get("name", "user")))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def labels_of(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(names)
