"""Reduction by invariants for the sl(2) adjoint system and the two-photon system."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact as ex
from .algebra_core import builtin_algebra, builtin_representation
from .errors import InvalidArgument, SingularChart
from .poisson import Chart, Polynomial, variables
from .realization import PolyField, closes_on, default_chart, linearize

Z_CHART = Chart.abstract(["z1", "z2"])


@dataclass(frozen=True)
class Sl2Reduction:
    """Level set phi = lambda of x1 x3 - x2^2, charted by (z1, z2) with scale beta.

    The chart covers the surface minus the line z2 = 0, i.e. points with x1 != 0.
    """

    lam: object
    beta: object

    def __post_init__(self):
        if self.beta == 0:
            raise InvalidArgument("beta must be nonzero")

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in (self.lam, self.beta))

    @property
    def c(self):
        if self.exact:
            return Fraction(self.lam) / Fraction(self.beta) ** 2
        return float(self.lam) / float(self.beta) ** 2


def sl2_reduced_fields(red: Sl2Reduction) -> list[PolyField]:
    z1, z2 = variables(Z_CHART)
    zero = Polynomial.zero(Z_CHART)
    one = Polynomial.constant(Z_CHART, 1)
    c = ex.frac(red.c)
    return [
        PolyField(Z_CHART, (one, zero)),
        PolyField(Z_CHART, (z1, z2)),
        PolyField(Z_CHART, (z1 * z1 - z2 * z2 * c, z1 * z2 * 2)),
    ]


def phi(x) -> object:
    return x[0] * x[2] - x[1] ** 2


def sl2_diffeo(red: Sl2Reduction, z) -> tuple:
    z1, z2 = z
    if z2 == 0:
        raise SingularChart("z2 = 0 lies outside the chart")
    b, lam = red.beta, red.lam
    if red.exact and all(isinstance(v, (int, Fraction)) for v in z):
        b, lam, z1, z2 = Fraction(b), Fraction(lam), Fraction(z1), Fraction(z2)
    return (b / z2, b * z1 / z2, (b * b * z1 * z1 + lam * z2 * z2) / (b * z2))


def sl2_diffeo_jacobian(red: Sl2Reduction, z) -> np.ndarray:
    """Analytic 3x2 Jacobian of sl2_diffeo."""
    z1, z2 = (float(v) for v in z)
    if z2 == 0:
        raise SingularChart("z2 = 0 lies outside the chart")
    b, lam = float(red.beta), float(red.lam)
    return np.array(
        [
            [0.0, -b / z2**2],
            [b / z2, -b * z1 / z2**2],
            [2 * b * z1 / z2, lam / b - b * z1**2 / z2**2],
        ]
    )


def sl2_diffeo_jacobian_fd(red: Sl2Reduction, z, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, kept as an independent check of the analytic one."""
    z = np.asarray(z, dtype=float)
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        plus = np.array(sl2_diffeo(red, z + e), dtype=float)
        minus = np.array(sl2_diffeo(red, z - e), dtype=float)
        cols.append((plus - minus) / (2 * h))
    return np.stack(cols, axis=1)


def pushforward_residuals(red: Sl2Reduction, points: Sequence, jacobian=sl2_diffeo_jacobian) -> np.ndarray:
    """Per-point max over the three fields of |dPhi(Y_i) - X_i(Phi)| scaled by max(1, |X_i(Phi)|)."""
    ambient = [f.array() for f in linearize(builtin_representation("sl2_adjoint"))]
    reduced = sl2_reduced_fields(red)
    out = []
    for z in points:
        jac = jacobian(red, z)
        image = np.array(sl2_diffeo(red, z), dtype=float)
        worst = 0.0
        for y, a in zip(reduced, ambient):
            pushed = jac @ np.array([float(v) for v in y.evaluate([float(v) for v in z])])
            target = a @ image
            worst = max(worst, float(np.max(np.abs(pushed - target))) / max(1.0, float(np.max(np.abs(target)))))
        out.append(worst)
    return np.array(out)


def sample_surface(lam: float, beta: float = 1.0, z1_range=(-2.0, 2.0), z2_range=(0.2, 2.0), n1: int = 21, n2: int = 21) -> np.ndarray:
    """Grid of points on phi = lambda, rows (x1, x2, x3, lambda).

    z2 stays away from zero so every sample is in the chart.
    """
    if z2_range[0] <= 0 <= z2_range[1]:
        raise SingularChart("the z2 range must exclude zero")
    red = Sl2Reduction(float(lam), float(beta))
    rows = []
    for z1 in np.linspace(*z1_range, n1):
        for z2 in np.linspace(*z2_range, n2):
            rows.append(list(sl2_diffeo(red, (z1, z2))) + [float(lam)])
    return np.array(rows)


def surface_csv(samples: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2", "x3", "lambda"])
    for row in samples:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


@dataclass(frozen=True)
class ReducedSystem:
    """Affine vector fields Y_a on a chart; the system is x' = sum_a b_a(t) Y_a(x)."""

    name: str
    chart: Chart
    fields: tuple[PolyField, ...]

    def affine_parts(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        n = self.chart.nvars
        mats, offs = [], []
        for f in self.fields:
            m = np.zeros((n, n))
            c = np.zeros(n)
            for row, comp in enumerate(f.components):
                if comp.degree > 1:
                    raise InvalidArgument("field is not affine")
                for e, coeff in comp.terms.items():
                    if sum(e) == 0:
                        c[row] += float(coeff)
                    else:
                        m[row, e.index(1)] += float(coeff)
            mats.append(m)
            offs.append(c)
        return mats, offs

    def system(self, coeffs: Sequence):
        from .dynamics import TDLinearSystem

        mats, offs = self.affine_parts()
        return TDLinearSystem(mats, list(coeffs), offs, self.name)

    def closure_failures(self) -> list[tuple[int, int]]:
        return closes_on(list(self.fields), builtin_algebra("schrodinger_h6"))


def _h6_fields_4d() -> list[PolyField]:
    return [f.as_polyfield(default_chart(4)) for f in linearize(builtin_representation("h6_gamma"))]


def h6_reduce(lambda0=1) -> ReducedSystem:
    """Restrict the h6 fields to q2 = lambda0, in coordinates (q, p, s) = (q1, p1, p2)."""
    chart = Chart.abstract(["q", "p", "s"])
    q, p, s = variables(chart)
    lam = Polynomial.constant(chart, ex.frac(lambda0))
    subst = [q, lam, p, s]
    fields = []
    for f in _h6_fields_4d():
        q1c, q2c, p1c, p2c = (comp.substitute(subst) for comp in f.components)
        if not q2c.is_zero():
            raise InvalidArgument("q2 is not preserved by the h6 fields")
        fields.append(PolyField(chart, (q1c, p1c, p2c)))
    return ReducedSystem("h6_reduced", chart, tuple(fields))


def h6_project(lambda0=1) -> ReducedSystem:
    """Drop s from the reduced system; no (q, p) component depends on s."""
    full = h6_reduce(lambda0)
    chart = Chart.abstract(["q", "p"])
    q, p = variables(chart)
    zero = Polynomial.zero(chart)
    fields = []
    for f in full.fields:
        comps = [comp.substitute([q, p, zero]) for comp in f.components[:2]]
        fields.append(PolyField(chart, tuple(comps)))
    return ReducedSystem("p5", chart, tuple(fields))


def c_class(red: Sl2Reduction) -> int:
    """Which of the three inequivalent realizations (c in {-1, 0, 1} after rescaling)."""
    c = red.c
    return 0 if c == 0 else int(math.copysign(1, c))
