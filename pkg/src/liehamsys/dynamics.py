"""Time-dependent linear systems x' = A(t) x (+ f(t)) and a fixed-step RK4 integrator."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import _exact as ex
from .algebra_core import Representation, builtin_representation
from .errors import CoefficientSingular, InvalidArgument

KINDS = ("constant", "poly_in_t", "sinusoid", "exp_integral", "tabulated", "composite")


def simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson on an odd number of uniform samples."""
    n = len(values) - 1
    if n < 2 or n % 2:
        raise InvalidArgument("Simpson needs an even number of intervals")
    return h / 3.0 * (values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-1:2].sum())


class _CumulativeIntegral:
    """Running integral of f from 0 on a uniform node grid, extended lazily.

    Nodes are h apart; each panel [t_k, t_k+1] uses Simpson with its midpoint, and
    off-node values add one more Simpson panel on [t_k, t].
    """

    def __init__(self, f: Callable, h: float):
        self.f = f
        self.h = h
        self.cum = np.zeros(1)

    def _extend(self, n: int):
        have = len(self.cum) - 1
        if n <= have:
            return
        k = np.arange(have, n)
        a = k * self.h
        b = a + self.h
        panels = self.h / 6.0 * (self.f(a) + 4.0 * self.f(a + self.h / 2) + self.f(b))
        self.cum = np.concatenate([self.cum, self.cum[-1] + np.cumsum(panels)])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        sign = np.sign(t)
        ta = np.abs(t)
        k = np.floor(ta / self.h + 1e-12).astype(int)
        self._extend(int(k.max(initial=0)) + 1)
        base = self.cum[k]
        a = k * self.h
        rem = ta - a
        # the integrand is evaluated at signed times for negative t
        fa = self.f(sign * a)
        fm = self.f(sign * (a + rem / 2))
        fb = self.f(sign * ta)
        tail = rem / 6.0 * (fa + 4.0 * fm + fb)
        neg = t < 0
        if np.any(neg):
            # integral from 0 to -s of f equals -(integral of f(-u) du over [0, s])
            out = np.where(neg, 0.0, base + tail)
            rev = _CumulativeIntegral(lambda u: self.f(-u), self.h)
            out = np.where(neg, -rev(ta), out)
            return out
        return base + tail


@dataclass
class CoefficientFunction:
    """Scalar function of time, vectorised over numpy arrays."""

    kind: str
    params: dict = field(default_factory=dict)
    fn: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown coefficient kind {self.kind!r}")
        if self.fn is None:
            self.fn = self._build()

    # constructors
    @classmethod
    def constant(cls, value: float) -> "CoefficientFunction":
        return cls("constant", {"value": float(value)})

    @classmethod
    def poly(cls, coeffs: Sequence[float]) -> "CoefficientFunction":
        return cls("poly_in_t", {"coeffs": [float(c) for c in coeffs]})

    @classmethod
    def sinusoid(cls, amplitude: float, omega: float, phase: float = 0.0, offset: float = 0.0) -> "CoefficientFunction":
        return cls("sinusoid", {"amplitude": float(amplitude), "omega": float(omega), "phase": float(phase), "offset": float(offset)})

    @classmethod
    def exp_integral(cls, rate: "CoefficientFunction", sign: float = 1.0, scale: float = 1.0, step: float = 1e-3) -> "CoefficientFunction":
        """scale * exp(sign * 2 * integral_0^t rate(s) ds)."""
        return cls("exp_integral", {"rate": rate, "sign": float(sign), "scale": float(scale), "step": float(step)})

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[float]) -> "CoefficientFunction":
        return cls("tabulated", {"times": [float(t) for t in times], "values": [float(v) for v in values]})

    @classmethod
    def composite(cls, fn: Callable, label: str = "composite", parts: Sequence["CoefficientFunction"] = ()) -> "CoefficientFunction":
        return cls("composite", {"label": label, "parts": list(parts)}, fn)

    @classmethod
    def coerce(cls, value) -> "CoefficientFunction":
        if isinstance(value, CoefficientFunction):
            return value
        if isinstance(value, (int, float)) or hasattr(value, "numerator"):
            return cls.constant(float(value))
        if callable(value):
            return cls.composite(lambda t, f=value: np.asarray(f(t), dtype=float) + np.zeros(np.shape(t)))
        raise InvalidArgument(f"cannot use {value!r} as a coefficient")

    @classmethod
    def from_json(cls, doc) -> "CoefficientFunction":
        if isinstance(doc, (int, float)):
            return cls.constant(doc)
        try:
            kind = doc["kind"]
            if kind == "constant":
                return cls.constant(doc["value"])
            if kind == "poly_in_t":
                return cls.poly(doc["coeffs"])
            if kind == "sinusoid":
                return cls.sinusoid(doc["amplitude"], doc["omega"], doc.get("phase", 0.0), doc.get("offset", 0.0))
            if kind == "exp_integral":
                return cls.exp_integral(cls.from_json(doc["rate"]), doc.get("sign", 1.0), doc.get("scale", 1.0), doc.get("step", 1e-3))
            if kind == "tabulated":
                return cls.tabulated(doc["times"], doc["values"])
        except (KeyError, TypeError) as err:
            raise InvalidArgument(f"malformed coefficient: {err}") from None
        raise InvalidArgument(f"coefficient kind {doc.get('kind')!r} cannot be read from JSON")

    def to_json(self) -> dict:
        if self.kind == "composite":
            return {"kind": "composite", "label": self.params.get("label", "composite")}
        out = {"kind": self.kind}
        for key, val in self.params.items():
            out[key] = val.to_json() if isinstance(val, CoefficientFunction) else val
        return out

    def _build(self) -> Callable:
        p = self.params
        if self.kind == "constant":
            v = float(p["value"])
            return lambda t: np.full(np.shape(t), v)
        if self.kind == "poly_in_t":
            coeffs = np.asarray(p["coeffs"], dtype=float)[::-1]
            return lambda t: np.polyval(coeffs, np.asarray(t, dtype=float)) + np.zeros(np.shape(t))
        if self.kind == "sinusoid":
            a, w, ph, off = p["amplitude"], p["omega"], p.get("phase", 0.0), p.get("offset", 0.0)
            return lambda t: off + a * np.sin(w * np.asarray(t, dtype=float) + ph)
        if self.kind == "exp_integral":
            rate = CoefficientFunction.coerce(p["rate"])
            p["rate"] = rate
            integral = _CumulativeIntegral(rate, p.get("step", 1e-3))
            sign, scale = p.get("sign", 1.0), p.get("scale", 1.0)
            return lambda t: scale * np.exp(sign * 2.0 * integral(t))
        if self.kind == "tabulated":
            times = np.asarray(p["times"], dtype=float)
            if len(times) < 2 or np.any(np.diff(times) <= 0):
                raise InvalidArgument("tabulated times must be strictly increasing with at least two samples")
            spline = CubicSpline(times, np.asarray(p["values"], dtype=float), extrapolate=False)
            return lambda t: spline(np.asarray(t, dtype=float))
        raise InvalidArgument("composite coefficients need an explicit function")

    def __call__(self, t):
        return self.fn(t)

    # arithmetic builds composite coefficients
    def _binary(self, other, op, label):
        other = CoefficientFunction.coerce(other)
        return CoefficientFunction.composite(lambda t: op(self(t), other(t)), label, (self, other))

    def __add__(self, other):
        return self._binary(other, np.add, "sum")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract, "difference")

    def __rsub__(self, other):
        return CoefficientFunction.coerce(other)._binary(self, np.subtract, "difference")

    def __mul__(self, other):
        return self._binary(other, np.multiply, "product")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide, "quotient")

    def __rtruediv__(self, other):
        return CoefficientFunction.coerce(other)._binary(self, np.divide, "quotient")

    def __neg__(self):
        return CoefficientFunction.composite(lambda t: -self(t), "negation", (self,))

    def __pow__(self, n):
        return CoefficientFunction.composite(lambda t: self(t) ** n, f"power {n}", (self,))

    def sqrt(self) -> "CoefficientFunction":
        return CoefficientFunction.composite(lambda t: np.sqrt(self(t)), "sqrt", (self,))


ZERO = CoefficientFunction.constant(0.0)


def random_sinusoids(count: int, rng: np.random.Generator, amplitude: float = 1.0, max_omega: float = 2.0) -> list[CoefficientFunction]:
    return [
        CoefficientFunction.sinusoid(
            rng.uniform(-amplitude, amplitude), rng.uniform(0.1, max_omega), rng.uniform(0, 2 * math.pi), rng.uniform(-amplitude, amplitude) / 2
        )
        for _ in range(count)
    ]


@dataclass
class TDLinearSystem:
    """x' = sum_a b_a(t) (M_a x + c_a), with M_a the field matrices (transposed representation images)."""

    matrices: list[np.ndarray]
    coeffs: list[CoefficientFunction]
    offsets: list[np.ndarray] | None = None
    name: str = "system"

    def __post_init__(self):
        self.matrices = [np.asarray(m, dtype=float) for m in self.matrices]
        self.coeffs = [CoefficientFunction.coerce(c) for c in self.coeffs]
        if len(self.coeffs) != len(self.matrices):
            raise InvalidArgument(f"{len(self.coeffs)} coefficients for {len(self.matrices)} generators")
        if self.offsets is not None:
            self.offsets = [np.asarray(c, dtype=float) for c in self.offsets]
        self._stack = np.stack(self.matrices)
        self._offset_stack = np.stack(self.offsets) if self.offsets is not None else None

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def affine(self) -> bool:
        return self._offset_stack is not None and bool(np.any(self._offset_stack))

    @classmethod
    def from_representation(cls, rep: Representation, coeffs: Sequence, name: str | None = None) -> "TDLinearSystem":
        mats = [np.array([[float(v) for v in row] for row in ex.transpose(m)]) for m in rep.mats]
        return cls(mats, list(coeffs), None, name or rep.name)

    def coefficient_table(self, times) -> np.ndarray:
        """Shape (len(times), r)."""
        times = np.asarray(times, dtype=float)
        table = np.stack([np.broadcast_to(c(times), times.shape).astype(float) for c in self.coeffs], axis=-1)
        return table

    def assemble_many(self, times) -> tuple[np.ndarray, np.ndarray | None]:
        table = self.coefficient_table(times)
        if not np.all(np.isfinite(table)):
            bad = np.argwhere(~np.isfinite(table))[0]
            raise CoefficientSingular(f"coefficient b{bad[-1] + 1} is not finite at t={np.asarray(times).ravel()[bad[0]]}")
        mats = np.einsum("ta,aij->tij", table, self._stack)
        offs = table @ self._offset_stack if self._offset_stack is not None else None
        return mats, offs


def assemble(sys: TDLinearSystem, t: float) -> np.ndarray:
    return sys.assemble_many(np.array([t]))[0][0]


def offset(sys: TDLinearSystem, t: float) -> np.ndarray:
    _, offs = sys.assemble_many(np.array([t]))
    return np.zeros(sys.n) if offs is None else offs[0]


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if len(self.times) != len(self.states):
            raise InvalidArgument("times and states differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise InvalidArgument("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def at(self, t: float) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.times - t)))
        return self.states[idx]

    def index_of(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))

    def to_csv(self, precision: int = 17) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(self.states.shape[1])])
        for t, row in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [format(float(v), f".{precision}g") for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][0] != "t":
            raise InvalidArgument("trajectory CSV must start with a t,x1..xn header")
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(data[:, 0], data[:, 1:])


def time_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise InvalidArgument("dt must be positive")
    span = t1 - t0
    if span <= 0:
        raise InvalidArgument("t1 must exceed t0")
    if dt > span * (1 + 1e-12):
        raise InvalidArgument("dt exceeds the integration span")
    steps = max(1, int(round(span / dt)))
    if abs(steps * dt - span) > 1e-9 * max(1.0, span):
        steps = int(math.ceil(span / dt))
    return t0 + span * np.arange(steps + 1) / steps


def _rk4(sys: TDLinearSystem, x0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Integrate the columns of x0 (shape (n, m)) along the grid; returns (len(grid), n, m)."""
    h = np.diff(grid)
    mids = grid[:-1] + h / 2
    mats_nodes, offs_nodes = sys.assemble_many(grid)
    mats_mid, offs_mid = sys.assemble_many(mids)
    x = np.array(x0, dtype=float)
    out = np.empty((len(grid),) + x.shape)
    out[0] = x
    affine = offs_nodes is not None and sys.affine
    for k in range(len(h)):
        a0, am, a1 = mats_nodes[k], mats_mid[k], mats_nodes[k + 1]
        if affine:
            f0, fm, f1 = offs_nodes[k][:, None], offs_mid[k][:, None], offs_nodes[k + 1][:, None]
            k1 = a0 @ x + f0
            k2 = am @ (x + h[k] / 2 * k1) + fm
            k3 = am @ (x + h[k] / 2 * k2) + fm
            k4 = a1 @ (x + h[k] * k3) + f1
        else:
            k1 = a0 @ x
            k2 = am @ (x + h[k] / 2 * k1)
            k3 = am @ (x + h[k] / 2 * k2)
            k4 = a1 @ (x + h[k] * k3)
        x = x + h[k] / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = x
    if not np.all(np.isfinite(out)):
        raise CoefficientSingular("integration produced non-finite states")
    return out


def integrate(sys: TDLinearSystem, x0: Sequence[float], t0: float, t1: float, dt: float) -> Trajectory:
    """Classical RK4 with a fixed step, sampled at every step."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n,):
        raise InvalidArgument(f"initial state must have length {sys.n}")
    grid = time_grid(t0, t1, dt)
    states = _rk4(sys, x0[:, None], grid)[:, :, 0]
    return Trajectory(grid, states)


def integrate_prolonged(sys: TDLinearSystem, x0s: Sequence[Sequence[float]], t0: float, t1: float, dt: float, max_copies: int = 5) -> list[Trajectory]:
    """All copies advance through one shared set of coefficient samples."""
    if not 1 <= len(x0s) <= max_copies:
        raise InvalidArgument(f"between 1 and {max_copies} copies are supported")
    cols = np.stack([np.asarray(x, dtype=float) for x in x0s], axis=1)
    if cols.shape[0] != sys.n:
        raise InvalidArgument(f"initial states must have length {sys.n}")
    grid = time_grid(t0, t1, dt)
    states = _rk4(sys, cols, grid)
    return [Trajectory(grid, states[:, :, c]) for c in range(cols.shape[1])]


def monodromy(sys: TDLinearSystem, t0: float, t1: float, dt: float) -> np.ndarray:
    """Fundamental matrix at t1 of the linear part, starting from the identity."""
    grid = time_grid(t0, t1, dt)
    linear = TDLinearSystem(sys.matrices, sys.coeffs, None, sys.name)
    return _rk4(linear, np.eye(sys.n), grid)[-1]


def symplectic_defect(m: np.ndarray) -> float:
    n = m.shape[0] // 2
    j = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return float(np.max(np.abs(m.T @ j @ m - j)))


def integral_of(b: CoefficientFunction, t, dt: float = 1e-3) -> np.ndarray:
    """integral_0^t b(s) ds by composite Simpson on a grid of spacing about dt."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t_arr)
    for i, tv in enumerate(t_arr):
        if tv == 0:
            out[i] = 0.0
            continue
        n = max(2, int(math.ceil(abs(tv) / dt)))
        n += n % 2
        s = np.linspace(0.0, tv, n + 1)
        out[i] = simpson(np.asarray(b(s), dtype=float), tv / n)
    return out if np.ndim(t) else out[0]


def hyperbolic_closed_form(b: CoefficientFunction, lambda1: float, lambda2: float, t, dt: float = 1e-3):
    """lambda1 sinh(B) + lambda2 cosh(B), B = integral_0^t b, for the b2 = b3 = b subsystem."""
    big_b = integral_of(b, t, dt)
    return lambda1 * np.sinh(big_b) + lambda2 * np.cosh(big_b)


def convergence_order(sys: TDLinearSystem, x0, t0: float, t1: float, dt: float, reference: Callable | None = None) -> float:
    """Observed order from step halving: log2 of the ratio of successive differences (or errors)."""
    finals = [integrate(sys, x0, t0, t1, dt / 2**i).final for i in range(3)]
    if reference is not None:
        exact = np.asarray(reference(t1), dtype=float)
        e1 = np.linalg.norm(finals[0] - exact)
        e2 = np.linalg.norm(finals[1] - exact)
        return float(math.log2(e1 / e2))
    d1 = np.linalg.norm(finals[0] - finals[1])
    d2 = np.linalg.norm(finals[1] - finals[2])
    return float(math.log2(d1 / d2))


# ---------------------------------------------------------------------------
# built-in systems indexed by b_1..b_r in the frozen generator ordering

_SYSTEM_REPS = {"sl2": "sl2_adjoint", "h6": "h6_gamma", "so13": "so13_gamma", "sp4": "sp4_fundamental"}
LH_SYSTEMS = ("h6", "so13", "sp4")


def builtin_system(name: str, coeffs: Sequence) -> TDLinearSystem:
    if name in _SYSTEM_REPS:
        return TDLinearSystem.from_representation(builtin_representation(_SYSTEM_REPS[name]), coeffs, name)
    if name in ("h6_reduced", "p5"):
        from .reduction import h6_project, h6_reduce

        reduced = h6_reduce() if name == "h6_reduced" else h6_project()
        return reduced.system(coeffs)
    raise InvalidArgument(f"unknown system {name!r}")


def system_dimension(name: str) -> tuple[int, int]:
    """(state dimension, coefficient count)."""
    table = {"sl2": (3, 3), "h6": (4, 6), "so13": (4, 6), "sp4": (4, 10), "h6_reduced": (3, 6), "p5": (2, 6)}
    if name not in table:
        raise InvalidArgument(f"unknown system {name!r}")
    return table[name]
