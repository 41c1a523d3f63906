"""Physical presets: coupled oscillators, Caldirola-Kanai models and a time-dependent magnetic field.

Each preset maps model parameters to the coefficients b_1..b_r of a built-in system.
Value-level helpers (``*_values``) do plain arithmetic so they stay exact for
Fraction inputs; presets wrap them into coefficient functions of time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _exact as ex
from .coalgebra_invariants import lh_hamiltonians
from .dynamics import CoefficientFunction, TDLinearSystem, builtin_system
from .errors import InvalidArgument, InvalidParams
from .poisson import Chart, Polynomial, bracket, variables

CF = CoefficientFunction
DEFAULT_SPAN = (0.0, 5.0)


# --- Lorentz relabeling


def lorentz_relabel(b: Sequence) -> list:
    b1, b2, b3, b4, b5, b6 = b
    return [b1 + b6, b2 - b4, b3, b2 + b4, b5, b1 - b6]


def inverse_relabel(a: Sequence) -> list:
    a1, a2, a3, a4, a5, a6 = a
    half = Fraction(1, 2) if all(isinstance(v, (int, Fraction)) for v in a) else 0.5
    return [(a1 + a6) * half, (a2 + a4) * half, a3, (a4 - a2) * half, a5, (a1 - a6) * half]


def lorentz_matrix(a: Sequence) -> list[list]:
    """The relabeled so(1,3) system matrix, including its overall factor 1/2."""
    a1, a2, a3, a4, a5, a6 = a
    half = Fraction(1, 2) if all(isinstance(v, (int, Fraction)) for v in a) else 0.5
    rows = [
        [a5, -a3, a2, a1],
        [a3, a5, a1, -a2],
        [-a4, -a6, -a5, -a3],
        [-a6, a4, a3, -a5],
    ]
    return [[half * v for v in row] for row in rows]


# --- Hamiltonians as polynomials at one instant

CHART = Chart.canonical(2)


def _qp():
    q1, q2, p1, p2 = variables(CHART)
    return q1, q2, p1, p2


def generator(system: str, b_values: Sequence) -> Polynomial:
    """sum b_i h_i with the built-in Hamiltonians: the function whose Hamilton equations are the system."""
    hams = lh_hamiltonians(system)
    if len(b_values) != len(hams):
        raise InvalidArgument(f"{system} takes {len(hams)} coefficients")
    out = Polynomial.zero(CHART)
    for c, h in zip(b_values, hams):
        if c:
            out = out + h * c
    return out


def lorentz_hamiltonian_printed(a: Sequence) -> Polynomial:
    """a1 p1p2 + a2/2 (p1^2-p2^2) + a3/2 (q1p2-q2p1) + a4/2 (q1^2-q2^2) + a5/2 (q1p1+q2p2) + a6 q1q2."""
    q1, q2, p1, p2 = _qp()
    a1, a2, a3, a4, a5, a6 = (ex.frac(v) for v in a)
    half = Fraction(1, 2)
    return (
        p1 * p2 * a1
        + (p1 * p1 - p2 * p2) * (a2 * half)
        + (q1 * p2 - q2 * p1) * (a3 * half)
        + (q1 * q1 - q2 * q2) * (a4 * half)
        + (q1 * p1 + q2 * p2) * (a5 * half)
        + q1 * q2 * a6
    )


def lorentz_generator(a: Sequence) -> Polynomial:
    return generator("so13", inverse_relabel([ex.frac(v) for v in a]))


def bateman_hamiltonian_printed(m, k, gamma) -> Polynomial:
    q1, q2, p1, p2 = _qp()
    m, k, gamma = (ex.frac(v) for v in (m, k, gamma))
    m_omega2 = k - gamma * gamma / (4 * m)
    osc1 = p1 * p1 / (2 * m) + q1 * q1 * (m_omega2 / 2)
    osc2 = p2 * p2 / (2 * m) + q2 * q2 * (m_omega2 / 2)
    return osc1 - osc2 - (q1 * p2 + q2 * p1) * (gamma / (2 * m))


def em_hamiltonian(m1, m2, e1, e2, gamma) -> Polynomial:
    """(p1 - e1 A1)^2/2m1 + e1 phi1 + (p2 - e2 A2)^2/2m2 + e2 phi2 with A = (-q2, q1) gamma/2, phi_i = q_i^2/2."""
    q1, q2, p1, p2 = _qp()
    m1, m2, e1, e2, gamma = (ex.frac(v) for v in (m1, m2, e1, e2, gamma))
    a1 = q2 * (-gamma / 2)
    a2 = q1 * (gamma / 2)
    k1 = p1 - a1 * e1
    k2 = p2 - a2 * e2
    return k1 * k1 / (2 * m1) + q1 * q1 * (e1 / 2) + k2 * k2 / (2 * m2) + q2 * q2 * (e2 / 2)


def sp4_primed_hamiltonian(a2, a5, a7, a8, a10) -> Polynomial:
    """(a8 p1^2 + a5 q1^2)/2 + (a10 p2^2 + a7 q2^2)/2 + a2 (q1p2 - q2p1)."""
    q1, q2, p1, p2 = _qp()
    a2, a5, a7, a8, a10 = (ex.frac(v) for v in (a2, a5, a7, a8, a10))
    return (p1 * p1 * a8 + q1 * q1 * a5 + p2 * p2 * a10 + q2 * q2 * a7) * Fraction(1, 2) + (q1 * p2 - q2 * p1) * a2


def hamilton_field(ham: Polynomial, x: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """J grad H at x by central differences."""
    f = ham.numeric()
    x = np.asarray(x, dtype=float)
    grad = np.empty(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2 * h)
    return np.array([grad[2], grad[3], -grad[0], -grad[1]])


# --- parameters


@dataclass
class OscillatorParams:
    m: CoefficientFunction
    k: CoefficientFunction
    gamma: CoefficientFunction = field(default_factory=lambda: CF.constant(0.0))

    def __post_init__(self):
        self.m, self.k, self.gamma = (CF.coerce(v) for v in (self.m, self.k, self.gamma))

    def sample(self, span=DEFAULT_SPAN, samples: int = 201):
        t = np.linspace(span[0], span[1], samples)
        return t, self.m(t), self.k(t), self.gamma(t)


def _require(cond: np.ndarray, t: np.ndarray, what: str):
    cond = np.asarray(cond)
    if not np.all(cond):
        bad = t[np.argmin(cond)] if cond.ndim else t[0]
        raise InvalidParams(f"{what} fails at t={float(bad):.6g}")


def check_oscillator(p: OscillatorParams, span=DEFAULT_SPAN, samples: int = 201, underdamped: bool = True):
    t, m, k, g = p.sample(span, samples)
    _require(np.isfinite(m) & np.isfinite(k) & np.isfinite(g), t, "finiteness")
    _require(m > 0, t, "m > 0")
    _require(k > 0, t, "k > 0")
    _require(g >= 0, t, "gamma >= 0")
    if underdamped:
        _require(k > g * g / (4 * m), t, "k > gamma^2 / 4m")


def _lift(fn: Callable, params: Sequence[CoefficientFunction], count: int, label: str) -> list[CoefficientFunction]:
    """Turn a value-level map of parameters into ``count`` coefficient functions."""
    out = []
    for i in range(count):
        out.append(CF.composite(lambda t, i=i: np.asarray(fn(*(p(t) for p in params))[i], dtype=float) + np.zeros(np.shape(t)), f"{label}[{i + 1}]", params))
    return out


@dataclass
class Preset:
    """Coefficients for a built-in system, with the parameters that produced them."""

    name: str
    system_name: str
    coeffs: list[CoefficientFunction]
    labels: tuple[str, ...]
    extra: dict = field(default_factory=dict)

    def system(self) -> TDLinearSystem:
        return builtin_system(self.system_name, self.coeffs)

    def table(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        return np.stack([np.broadcast_to(c(times), times.shape) for c in self.coeffs], axis=-1)

    def hamiltonian(self, t: float) -> Polynomial:
        """Generator of the assembled system at time t (float coefficients)."""
        vals = [float(c(np.array([t]))[0]) for c in self.coeffs]
        return generator(self.system_name, vals)


# --- Lorentz-based presets


def bateman_values(m, k, gamma) -> list:
    """a-coefficients a2 = 1/m, a3 = gamma/m, a4 = m Omega^2 = k - gamma^2/4m."""
    zero = 0 * m
    return [zero, 1 / m, gamma / m, k - gamma * gamma / (4 * m), zero, zero]


def bateman_omega(m, k, gamma):
    return np.sqrt((k - gamma * gamma / (4 * m)) / m)


def bateman_preset(p: OscillatorParams, span=DEFAULT_SPAN, samples: int = 201) -> Preset:
    check_oscillator(p, span, samples, underdamped=True)
    a = _lift(bateman_values, (p.m, p.k, p.gamma), 6, "bateman a")
    return Preset("bateman", "so13", inverse_relabel(a), tuple(f"b{i}" for i in range(1, 7)), {"a": a})


def coupled_ck_values(m, k, gamma, a3, integral):
    """a2 = e^{-2I}/m, a4 = m Omega^2 e^{2I} with Omega^2 = k/m and I the integral of gamma/m."""
    zero = 0 * m
    return [zero, np.exp(-2 * integral) / m, a3, k * np.exp(2 * integral), zero, zero]


def coupled_ck_preset(p: OscillatorParams, a3, span=DEFAULT_SPAN, samples: int = 201, step: float = 1e-3) -> Preset:
    check_oscillator(p, span, samples, underdamped=False)
    a3 = CF.coerce(a3)
    rate = p.gamma / p.m
    a2 = CF.exp_integral(rate, sign=-1.0, step=step) / p.m
    a4 = p.k * CF.exp_integral(rate, sign=1.0, step=step)
    zero = CF.constant(0.0)
    a = [zero, a2, a3, a4, zero, zero]
    return Preset("coupled_ck", "so13", inverse_relabel(a), tuple(f"b{i}" for i in range(1, 7)), {"a": a})


def lorentz_from_a(a: Sequence, name: str = "lorentz") -> Preset:
    a = [CF.coerce(v) for v in a]
    return Preset(name, "so13", inverse_relabel(a), tuple(f"b{i}" for i in range(1, 7)), {"a": a})


# --- sp(4)-based presets


def em_values(m1, m2, e1, e2, gamma, variant: str = "printed") -> list:
    """b1..b10 for two charges in the field A = gamma (-q2, q1)/2.

    ``printed`` divides the gamma^2 terms of b5 and b7 by 4 m1^2 and 4 m2^2;
    ``consistent`` uses 4 m2 and 4 m1, which is what expanding the Hamiltonian gives.
    """
    zero = 0 * m1
    b2 = -gamma * e2 / (2 * m2)
    b3 = gamma * e1 / (2 * m1)
    if variant == "printed":
        b5 = e1 + gamma * gamma * e2 * e2 / (4 * m1 * m1)
        b7 = e2 + gamma * gamma * e1 * e1 / (4 * m2 * m2)
    elif variant == "consistent":
        b5 = e1 + gamma * gamma * e2 * e2 / (4 * m2)
        b7 = e2 + gamma * gamma * e1 * e1 / (4 * m1)
    else:
        raise InvalidArgument(f"unknown variant {variant!r}")
    return [zero, b2, b3, zero, b5, zero, b7, 1 / m1, zero, 1 / m2]


def em_preset(m1, m2, e1, e2, gamma, variant: str = "printed", span=DEFAULT_SPAN, samples: int = 201) -> Preset:
    params = tuple(CF.coerce(v) for v in (m1, m2, e1, e2, gamma))
    t = np.linspace(span[0], span[1], samples)
    _require(params[0](t) > 0, t, "m1 > 0")
    _require(params[1](t) > 0, t, "m2 > 0")
    b = _lift(lambda *v: em_values(*v, variant=variant), params, 10, f"em {variant}")
    return Preset(f"em_{variant}", "sp4", b, tuple(f"b{i}" for i in range(1, 11)))


def coupled_ho_values(m1, k1, g1, m2, k2, g2, a2) -> list:
    """a8 = 1/m1, a5 = m1 Omega1^2, a10 = 1/m2, a7 = m2 Omega2^2, with b2 = a2 = -b3."""
    zero = 0 * m1
    return [zero, a2, -a2, zero, k1 - g1 * g1 / (4 * m1), zero, k2 - g2 * g2 / (4 * m2), 1 / m1, zero, 1 / m2]


def coupled_ho_preset(p1: OscillatorParams, p2: OscillatorParams, a2, span=DEFAULT_SPAN, samples: int = 201) -> Preset:
    check_oscillator(p1, span, samples, underdamped=True)
    check_oscillator(p2, span, samples, underdamped=True)
    params = (p1.m, p1.k, p1.gamma, p2.m, p2.k, p2.gamma, CF.coerce(a2))
    b = _lift(coupled_ho_values, params, 10, "coupled ho")
    return Preset("coupled_ho", "sp4", b, tuple(f"b{i}" for i in range(1, 11)))


def generalized_cck_preset(p1: OscillatorParams, p2: OscillatorParams, a2, span=DEFAULT_SPAN, samples: int = 201, step: float = 1e-3) -> Preset:
    """a8 = e^{-2I1}/m1, a5 = k1 e^{2I1}, a10 = e^{-2I2}/m2, a7 = k2 e^{2I2}, coupling a2 (q1p2 - q2p1)."""
    check_oscillator(p1, span, samples, underdamped=False)
    check_oscillator(p2, span, samples, underdamped=False)
    a2 = CF.coerce(a2)
    zero = CF.constant(0.0)
    factors = []
    for p in (p1, p2):
        rate = p.gamma / p.m
        factors.append((CF.exp_integral(rate, -1.0, step=step) / p.m, p.k * CF.exp_integral(rate, 1.0, step=step)))
    (a8, a5), (a10, a7) = factors
    b = [zero, a2, -a2, zero, a5, zero, a7, a8, zero, a10]
    return Preset("generalized_cck", "sp4", b, tuple(f"b{i}" for i in range(1, 11)))


def oscillator_1d_system(kinetic, potential) -> TDLinearSystem:
    """q' = kinetic(t) p, p' = -potential(t) q on (q, p)."""
    return TDLinearSystem([np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [-1.0, 0.0]])], [kinetic, potential], None, "oscillator_1d")


def hyperbolic_preset(b) -> list:
    """sp4 coefficients with b2 = b3 = b and all others zero."""
    b = CF.coerce(b)
    zero = CF.constant(0.0)
    return [zero, b, b, zero, zero, zero, zero, zero, zero, zero]


# --- generation of Lie algebras by brackets


def _coefficient_rows(polys: Sequence[Polynomial]) -> tuple[list, list]:
    keys = sorted({e for p in polys for e in p.terms})
    return keys, [[p.terms.get(e, Fraction(0)) for e in keys] for p in polys]


def bracket_generated_dimension(polys: Sequence[Polynomial], max_rounds: int = 10) -> int:
    """Dimension of the Lie algebra generated by the polynomials under the canonical bracket."""
    span = list(polys)
    dim = _span_dim(span)
    for _ in range(max_rounds):
        new = span + [bracket(a, b) for i, a in enumerate(span) for b in span[i + 1 :]]
        basis = _basis(new)
        if len(basis) == dim:
            return dim
        span, dim = basis, len(basis)
    return dim


def _span_dim(polys) -> int:
    _, rows = _coefficient_rows(polys)
    return ex.rank(rows) if rows and rows[0] else 0


def _basis(polys: Sequence[Polynomial]) -> list[Polynomial]:
    out: list[Polynomial] = []
    for p in polys:
        if p.is_zero():
            continue
        if _span_dim(out + [p]) > len(out):
            out.append(p)
    return out


PRESETS = ("bateman", "coupled_ck", "em_printed", "em_consistent", "coupled_ho", "generalized_cck", "hyperbolic")
