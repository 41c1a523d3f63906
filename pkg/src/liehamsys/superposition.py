"""Superposition rules for the h6 family and sp(4), and the so(1,3) route through sp(4).

Constants are recovered from particular solutions by evaluating the prolonged
invariants with the target state as an extra copy. Only squares of the constants
are determined that way; signs are chosen by the smallest reconstruction residual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _exact as ex
from .algebra_core import builtin_representation
from .coalgebra_invariants import (
    builtin_extra_invariant,
    h6_third_order,
    permute_copies,
    printed_sp4_second_order,
)
from .dynamics import CoefficientFunction, Trajectory
from .errors import (
    DegenerateConstants,
    DegenerateSolutionSet,
    InconsistentInvariants,
    InvalidArgument,
    SingularDenominator,
)

DEGENERACY_TOL = 1e-12
ANCHOR_TOL = 1e-6


@dataclass
class SignificantConstants:
    system: str
    values: tuple[float, ...]
    signs: tuple[int, ...]
    provenance: tuple[str, ...]
    invariants: dict = field(default_factory=dict)
    residual: float = 0.0
    anchor_time: float | None = None

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "anchor_time": self.anchor_time,
            "constants": {f"k{i + 1}": float(v) for i, v in enumerate(self.values)} | {"signs": list(self.signs)},
            "provenance": list(self.provenance),
            "residual": float(self.residual),
        }

    def invariant_residual(self) -> float:
        """Largest relative gap between the squared constants and the invariants they came from."""
        worst = 0.0
        for k, label in zip(self.values, self.provenance):
            want = self.invariants[label]
            worst = max(worst, abs(k * k - want) / max(1.0, abs(want)))
        return worst


def _states(sols) -> list[np.ndarray]:
    return [np.asarray(s, dtype=float) for s in sols]


# --- generalized angular momenta


@dataclass(frozen=True)
class GeneralizedAngularMomentum:
    """L_{alpha,beta}^{(i,j)} = p_alpha^(i) q_beta^(j) - q_alpha^(i) p_beta^(j) over states (q1, q2, p1, p2)."""

    alpha: int
    beta: int
    i: int
    j: int

    def __post_init__(self):
        if self.alpha not in (1, 2) or self.beta not in (1, 2):
            raise InvalidArgument("alpha and beta must be 1 or 2")

    def value(self, states: Sequence):
        yi, yj = states[self.i - 1], states[self.j - 1]
        return yi[..., 1 + self.alpha] * yj[..., self.beta - 1] - yi[..., self.alpha - 1] * yj[..., 1 + self.beta]

    def reversed(self) -> "GeneralizedAngularMomentum":
        return GeneralizedAngularMomentum(self.beta, self.alpha, self.j, self.i)


def angular_momentum(states, alpha: int, beta: int, i: int, j: int):
    return GeneralizedAngularMomentum(alpha, beta, i, j).value(states)


def pairing(x, y):
    """Sum over alpha of L_{alpha,alpha} for one pair of states: p.q' - q.p'."""
    return x[..., 2] * y[..., 0] - x[..., 0] * y[..., 2] + x[..., 3] * y[..., 1] - x[..., 1] * y[..., 3]


# --- h6 family


def _require_k3(k):
    if np.any(np.asarray(k[2]) == 0):
        raise DegenerateConstants("k3 vanishes")


def h6_superpose(sols: Sequence, k: Sequence[float]) -> np.ndarray:
    """General (q1, q2, p1, p2) from three particular solutions; arrays broadcast over leading axes."""
    y1, y2, y3 = _states(sols)
    k1, k2, k3, k4 = k
    _require_k3(k)
    if np.any(y1[..., 1] == 0):
        raise SingularDenominator("q2 of the first particular solution vanishes")

    def mix(i):
        return (y1[..., i] - k2 * y2[..., i] + k1 * y3[..., i]) / k3

    p2 = (
        y1[..., 3] * y1[..., 1]
        + k2 * (y2[..., 2] * y1[..., 0] - y1[..., 2] * y2[..., 0] - y1[..., 3] * y2[..., 1])
        + k1 * (-y3[..., 2] * y1[..., 0] + y1[..., 2] * y3[..., 0] + y1[..., 3] * y3[..., 1])
        - k3 * k4
    ) / (k3 * y1[..., 1])
    return np.stack([mix(0), mix(1), mix(2), p2], axis=-1)


def h6_reduced_superpose(sols: Sequence, k: Sequence[float]) -> np.ndarray:
    """Rule on (q, p, s): the h6 rule with every q2 set to 1 and p2 read as s."""
    y1, y2, y3 = _states(sols)
    k1, k2, k3, k4 = k
    _require_k3(k)

    def mix(i):
        return (y1[..., i] - k2 * y2[..., i] + k1 * y3[..., i]) / k3

    s = (
        y1[..., 2]
        + k2 * (y2[..., 1] * y1[..., 0] - y1[..., 1] * y2[..., 0] - y1[..., 2])
        + k1 * (-y3[..., 1] * y1[..., 0] + y1[..., 1] * y3[..., 0] + y1[..., 2])
        - k3 * k4
    ) / k3
    return np.stack([mix(0), mix(1), s], axis=-1)


def p5_superpose(sols: Sequence, k: Sequence[float]) -> np.ndarray:
    y1, y2, y3 = _states(sols)
    k1, k2, k3 = k[:3]
    _require_k3(k)
    return (y1 - k2 * y2 + k1 * y3) / k3


def lift_reduced(state) -> np.ndarray:
    """(q, p, s) -> (q1, q2, p1, p2) on the slice q2 = 1."""
    st = np.asarray(state, dtype=float)
    return np.stack([st[..., 0], np.ones_like(st[..., 0]), st[..., 1], st[..., 2]], axis=-1)


# --- sp4


def _pfaffian_parts(ys):
    om = {(a, b): pairing(ys[b], ys[a]) for a in range(4) for b in range(4) if a < b}
    pf = om[0, 1] * om[2, 3] - om[0, 2] * om[1, 3] + om[0, 3] * om[1, 2]
    return om, pf


def sp4_superpose(sols: Sequence, k: Sequence[float]) -> np.ndarray:
    """General solution x = sum_a c_a y_a fixed by W(y_b, x) = k_b, W(x, y) = p.q' - q.p'.

    Solving the 4x4 antisymmetric system gives c = adj(Omega) k / Pf(Omega) with
    Omega_ab = W(y_b, y_a).
    """
    ys = _states(sols)
    if len(ys) != 4:
        raise InvalidArgument("four particular solutions are required")
    om, pf = _pfaffian_parts(ys)
    scale = np.prod([np.linalg.norm(y, axis=-1) for y in ys], axis=0)
    if np.any(np.abs(pf) <= DEGENERACY_TOL * np.maximum(scale, 1e-300)):
        raise DegenerateSolutionSet("the particular solutions are not symplectically independent")
    k1, k2, k3, k4 = (np.asarray(v, dtype=float) for v in k)
    dual = {(0, 1): om[2, 3], (0, 2): -om[1, 3], (0, 3): om[1, 2], (1, 2): om[0, 3], (1, 3): -om[0, 2], (2, 3): om[0, 1]}

    def d(a, b):
        if a == b:
            return 0.0
        return dual[a, b] if a < b else -dual[b, a]

    ks = (k1, k2, k3, k4)
    coeffs = [sum(d(a, b) * ks[b] for b in range(4)) / pf for a in range(4)]
    return sum(c[..., None] * y for c, y in zip(coeffs, ys))


def sp4_beta_printed(sols: Sequence, swap: bool = False):
    """Six-term product of L_{11} and L_{22} momenta shown under the printed rule."""
    ys = _states(sols)

    def l11(i, j):
        return angular_momentum(ys, 1, 1, i, j)

    def l22(i, j):
        return angular_momentum(ys, 2, 2, i, j)

    if swap:
        l11, l22 = l22, l11
    return (
        l11(1, 3) * l22(4, 2)
        + l11(4, 2) * l22(1, 3)
        + l11(2, 1) * l22(4, 3)
        + l11(4, 3) * l22(2, 1)
        + l11(3, 2) * l22(4, 1)
        + l11(4, 1) * l22(3, 2)
    )


def sp4_superpose_printed(sols: Sequence, k: Sequence[float]) -> np.ndarray:
    """The printed four-solution rule, kept for comparison: it is only right for decoupled systems."""
    ys = _states(sols)
    k1, k2, k3, k4 = k
    beta = sp4_beta_printed(ys)
    if np.any(beta == 0):
        raise DegenerateSolutionSet("beta vanishes")

    def comp(col, mom):
        def v(i):
            return ys[i - 1][..., col]

        def lm(i, j):
            return angular_momentum(ys, mom, mom, i, j)

        if mom == 2:
            return (
                k1 * (v(2) * lm(4, 3) + v(3) * lm(2, 4) + v(4) * lm(3, 2))
                + k2 * (v(1) * lm(3, 4) + v(3) * lm(4, 1) + v(4) * lm(1, 3))
                + k3 * (v(1) * lm(2, 4) + v(2) * lm(4, 1) + v(4) * lm(1, 2))
                + k4 * (v(1) * lm(3, 2) + v(2) * lm(1, 3) + v(3) * lm(2, 1))
            )
        return (
            k1 * (v(2) * lm(3, 4) + v(3) * lm(4, 2) + v(4) * lm(2, 3))
            + k2 * (v(1) * lm(4, 3) + v(3) * lm(1, 4) + v(4) * lm(3, 1))
            + k3 * (v(1) * lm(4, 2) + v(2) * lm(1, 4) + v(4) * lm(2, 1))
            + k4 * (v(1) * lm(2, 3) + v(2) * lm(3, 1) + v(3) * lm(1, 2))
        )

    return np.stack([comp(0, 2), comp(1, 1), comp(2, 2), comp(3, 1)], axis=-1) / beta[..., None]


# --- constants from particular solutions


@lru_cache(maxsize=None)
def _h6_evaluators():
    f3 = h6_third_order(3).embed(4)
    g2 = permute_copies(builtin_extra_invariant("h6_G2").embed(4), 2, 4)
    return {
        "F3": f3.numeric(),
        "F34": permute_copies(f3, 3, 4).numeric(),
        "F24": permute_copies(f3, 2, 4).numeric(),
        "F14": permute_copies(f3, 1, 4).numeric(),
        "G2": g2.numeric(),
    }


@lru_cache(maxsize=None)
def _sp4_evaluators():
    f2 = printed_sp4_second_order(5, (1, 2))
    return {
        "F2": f2.numeric(),
        "F2_23": permute_copies(f2, 2, 3).numeric(),
        "F2_24": permute_copies(f2, 2, 4).numeric(),
        "F2_25": permute_copies(f2, 2, 5).numeric(),
    }


def h6_invariant_values(sols, target) -> dict:
    point = np.concatenate(_states(sols) + [np.asarray(target, dtype=float)], axis=-1)
    return {name: float(f(point)) for name, f in _h6_evaluators().items()}


def sp4_invariant_values(sols, target) -> dict:
    point = np.concatenate([np.asarray(target, dtype=float)] + _states(sols), axis=-1)
    return {name: float(f(point)) for name, f in _sp4_evaluators().items()}


def _h6_magnitudes(sols, target):
    inv = h6_invariant_values(sols, target)
    ys = _states(sols)
    tgt = np.asarray(target, dtype=float)

    def scale(states):
        return float(np.prod([np.linalg.norm(v[:3]) for v in states]))

    if np.sqrt(inv["F3"]) <= DEGENERACY_TOL * scale(ys) or np.sqrt(inv["F14"]) <= DEGENERACY_TOL * scale([tgt] + ys[1:]):
        raise DegenerateConstants("the (q1, q2, p1) parts of the particular solutions or the target are dependent")
    mags = (
        inv["F34"] / inv["F14"],
        inv["F24"] / inv["F14"],
        inv["F3"] / inv["F14"],
        -inv["G2"],
    )
    labels = ("F34/F14", "F24/F14", "F3/F14", "-G2")
    inv.update({"F34/F14": mags[0], "F24/F14": mags[1], "F3/F14": mags[2], "-G2": mags[3]})
    return np.sqrt(np.maximum(mags, 0.0)), labels, inv


def _sp4_magnitudes(sols, target):
    inv = sp4_invariant_values(sols, target)
    names = ("F2", "F2_23", "F2_24", "F2_25")
    labels = tuple(f"-{n}" for n in names)
    for n, lab in zip(names, labels):
        inv[lab] = -inv[n]
    mags = np.array([-inv[n] for n in names])
    return np.sqrt(np.maximum(mags, 0.0)), labels, inv


_RULES = {"h6": (h6_superpose, _h6_magnitudes, 3), "sp4": (sp4_superpose, _sp4_magnitudes, 4)}


def _relative(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def solve_constants(system: str, sols: Sequence, target, anchor_time: float | None = None) -> SignificantConstants:
    """Constants k1..k4 that reproduce ``target`` from ``sols``.

    States may be plain vectors sampled at the anchor time, or Trajectories on one
    shared grid; with trajectories the constants come from the anchor sample and are
    then checked against the target over the whole grid, which is what exposes a
    target that is not a solution.
    """
    if system not in _RULES:
        raise InvalidArgument(f"no superposition rule for {system!r}")
    rule, magnitudes, count = _RULES[system]
    if len(sols) != count:
        raise InvalidArgument(f"{system} needs {count} particular solutions")
    series = isinstance(target, Trajectory)
    if series:
        if any(not isinstance(s, Trajectory) or not np.array_equal(s.times, target.times) for s in sols):
            raise InvalidArgument("particular solutions and target must share one time grid")
        t = target.times[0] if anchor_time is None else anchor_time
        idx = target.index_of(t)
        anchor_sols = [s.states[idx] for s in sols]
        anchor_target = target.states[idx]
        anchor_time = float(target.times[idx])
    else:
        anchor_sols = _states(sols)
        anchor_target = np.asarray(target, dtype=float)
    mags, labels, inv = magnitudes(anchor_sols, anchor_target)
    best = None
    for signs in itertools.product((1, -1), repeat=4):
        k = tuple(float(s * m) for s, m in zip(signs, mags))
        try:
            res = _relative(rule(anchor_sols, k), anchor_target)
        except (DegenerateConstants, SingularDenominator):
            continue
        if best is None or res < best[0]:
            best = (res, k, signs)
    if best is None or best[0] > ANCHOR_TOL:
        raise InconsistentInvariants("no sign choice reproduces the target at the anchor time")
    res, k, signs = best
    if series:
        rebuilt = rule([s.states for s in sols], k)
        res = _relative(rebuilt, target.states)
        if res > ANCHOR_TOL:
            raise InconsistentInvariants(f"reconstruction drifts from the target by {res:.3g}; the inputs are not solutions of one system")
    return SignificantConstants(system, k, signs, labels, inv, res, anchor_time)


def reconstruct(system: str, sols: Sequence[Trajectory], k: SignificantConstants) -> Trajectory:
    rule = _RULES[system][0]
    return Trajectory(sols[0].times, rule([s.states for s in sols], k.values))


# --- so(1,3) inside sp(4)


@lru_cache(maxsize=None)
def embedding_matrix() -> tuple[tuple[Fraction, ...], ...]:
    """10x6 exact matrix E with so(1,3) field X_i = sum_j E[j][i] sp(4) field Y_j."""
    so13 = [ex.transpose(m) for m in builtin_representation("so13_gamma").mats]
    sp4 = [ex.transpose(m) for m in builtin_representation("sp4_fundamental").mats]
    basis = [ex.flatten(m) for m in sp4]
    a = [[basis[j][e] for j in range(len(basis))] for e in range(len(basis[0]))]
    cols = []
    for m in so13:
        cols.append(ex.solve(a, ex.flatten(m)))
    return tuple(tuple(cols[i][j] for i in range(len(cols))) for j in range(len(basis)))


# The printed list, read with b6 where b9 is written. Rows are sp4 indices, columns b1..b6.
PRINTED_EMBEDDING = (
    (0, 0, 0, 0, 1, 0),
    (0, 0, 1, 0, 0, 0),
    (0, 0, -1, 0, 0, 0),
    (0, 0, 0, 0, 1, 0),
    (0, 1, 0, 1, 0, 0),
    (1, 0, 0, 0, 0, -1),
    (0, -1, 0, -1, 0, 0),
    (0, 1, 0, -1, 0, 0),
    (1, 0, 0, 0, 0, 1),
    (0, -1, 0, 1, 0, 0),
)


def embedding_discrepancies() -> list[str]:
    """Entries where the printed list differs from the exact solve."""
    exact = embedding_matrix()
    out = []
    for j, (row, printed) in enumerate(zip(exact, PRINTED_EMBEDDING)):
        if tuple(Fraction(v) for v in printed) != row:
            ratio = {Fraction(p) / r for p, r in zip(printed, row) if r}
            note = f" (printed = {ratio.pop()} x exact)" if len(ratio) == 1 else ""
            out.append(f"b~{j + 1}: printed {list(printed)} vs exact {[str(v) for v in row]}{note}")
    return out


def embed_so13_in_sp4(b: Sequence) -> list:
    """Map six so(1,3) coefficients (numbers or CoefficientFunctions) to ten sp(4) ones."""
    if len(b) != 6:
        raise InvalidArgument("six so(1,3) coefficients are required")
    functions = any(isinstance(v, CoefficientFunction) for v in b)
    out = []
    for row in embedding_matrix():
        if functions:
            terms = [(float(c), CoefficientFunction.coerce(v)) for c, v in zip(row, b) if c]
            if not terms:
                out.append(CoefficientFunction.constant(0.0))
                continue
            out.append(CoefficientFunction.composite(lambda t, terms=terms: sum(c * f(t) for c, f in terms), "so13 embedding", [f for _, f in terms]))
        else:
            out.append(sum((c * v for c, v in zip(row, b) if c), 0 * b[0]))
    return out


def h6_in_sp4_subset() -> tuple[int, ...]:
    """1-based sp4 Hamiltonian indices spanning the h6 algebra."""
    return (1, 2, 5, 8, 9, 10)
