"""Constants of the motion for diagonal prolongations, built from Casimirs by the coalgebra method."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra_core import ValidationReport, Violation, builtin_algebra, builtin_representation
from .dynamics import Trajectory
from .errors import GridMismatch, InvalidArgument
from .poisson import Chart, Polynomial, bracket, builtin_casimir, compose, variables
from .realization import hamiltonians

MAX_COPIES = 5


@dataclass(frozen=True)
class ProlongedObservable:
    k: int
    poly: Polynomial
    name: str = "F"

    def __post_init__(self):
        if self.poly.chart.copies != self.k:
            raise InvalidArgument(f"polynomial lives on {self.poly.chart.copies} copies, not {self.k}")

    def embed(self, k: int) -> "ProlongedObservable":
        """Same function on a chart with more copies (copy l stays copy l)."""
        if k < self.k:
            raise InvalidArgument("cannot embed into fewer copies")
        return ProlongedObservable(k, _embed(self.poly, k), self.name)

    def numeric(self):
        return self.poly.numeric()


def _check_k(k: int):
    if not 1 <= k <= MAX_COPIES:
        raise InvalidArgument(f"copy count must lie in 1..{MAX_COPIES}")


def _embed(poly: Polynomial, k: int) -> Polynomial:
    chart = poly.chart
    target = Chart.canonical(chart.dof, k)
    positions = []
    for copy in range(1, chart.copies + 1):
        positions.extend(target.block(copy))
    return poly.remap(target, positions)


def copy_positions(chart: Chart, copy: int) -> list[int]:
    return list(chart.block(copy))


@lru_cache(maxsize=None)
def lh_hamiltonians(system: str) -> tuple[Polynomial, ...]:
    reps = {"h6": "h6_gamma", "so13": "so13_gamma", "sp4": "sp4_fundamental"}
    if system not in reps:
        raise InvalidArgument(f"no Hamiltonian system {system!r}")
    return tuple(hamiltonians(builtin_representation(reps[system])))


def prolonged_hamiltonians(hams: Sequence[Polynomial], k: int) -> list[Polynomial]:
    """h_i^(k) = h_i(x_1) + ... + h_i(x_k)."""
    _check_k(k)
    base = hams[0].chart
    if base.kind != "canonical" or base.copies != 1:
        raise InvalidArgument("Hamiltonians must live on a single-copy canonical chart")
    target = Chart.canonical(base.dof, k)
    out = []
    for h in hams:
        total = Polynomial.zero(target)
        for copy in range(1, k + 1):
            total = total + h.remap(target, copy_positions(target, copy))
        out.append(total)
    return out


def casimir_prolonged(casimir: Polynomial, hams: Sequence[Polynomial], k: int, name: str = "F") -> ProlongedObservable:
    return ProlongedObservable(k, compose(casimir, prolonged_hamiltonians(hams, k)), f"{name}^({k})")


def permute_copies(obs: ProlongedObservable, i: int, j: int) -> ProlongedObservable:
    """Swap the variables of copies i and j."""
    if not (1 <= i <= obs.k and 1 <= j <= obs.k) or i == j:
        raise InvalidArgument(f"copies {i}, {j} are not two distinct copies of {obs.k}")
    chart = obs.poly.chart
    positions = list(range(chart.nvars))
    for a, b in zip(chart.block(i), chart.block(j)):
        positions[a], positions[b] = b, a
    lo, hi = sorted((i, j))
    return ProlongedObservable(obs.k, obs.poly.remap(chart, positions), f"{obs.name}_{lo}{hi}")


def _momentum_pairing(chart: Chart, a: int, b: int) -> Polynomial:
    """p^(b) . q^(a) - p^(a) . q^(b), summed over degrees of freedom."""
    v = variables(chart)
    out = Polynomial.zero(chart)
    for d in range(1, chart.dof + 1):
        out = out + v[chart.p(d, b)] * v[chart.q(d, a)] - v[chart.p(d, a)] * v[chart.q(d, b)]
    return out


def printed_sp4_second_order(k: int = 2, copies: tuple[int, int] = (1, 2)) -> ProlongedObservable:
    """-(p1^(j) q1^(i) - p1^(i) q1^(j) + p2^(j) q2^(i) - p2^(i) q2^(j))^2 for copies (i, j)."""
    chart = Chart.canonical(2, k)
    w = _momentum_pairing(chart, *copies)
    return ProlongedObservable(k, -(w * w), f"F2[{copies[0]},{copies[1]}]")


def printed_h6_third_order(k: int = 3, copies: tuple[int, int, int] = (1, 2, 3)) -> ProlongedObservable:
    """Square of the determinant-like cubic in (q1, q2, p1) of three copies."""
    chart = Chart.canonical(2, k)
    v = variables(chart)
    a, b, c = copies

    def q1(l):
        return v[chart.q(1, l)]

    def q2(l):
        return v[chart.q(2, l)]

    def p1(l):
        return v[chart.p(1, l)]

    cubic = (
        q2(a) * (p1(b) * q1(c) - p1(c) * q1(b))
        + q2(b) * (q1(a) * p1(c) - q1(c) * p1(a))
        + q2(c) * (p1(a) * q1(b) - p1(b) * q1(a))
    )
    return ProlongedObservable(k, cubic * cubic, f"F3[{a},{b},{c}]")


def builtin_extra_invariant(name: str) -> ProlongedObservable:
    if name != "h6_G2":
        raise InvalidArgument(f"unknown extra invariant {name!r}")
    obs = printed_sp4_second_order(2)
    return ProlongedObservable(2, obs.poly, "G2")


def h6_third_order(k: int = 3) -> ProlongedObservable:
    return casimir_prolonged(builtin_casimir("h6_C3"), lh_hamiltonians("h6"), k)


def sp4_second_order(k: int = 2) -> ProlongedObservable:
    return casimir_prolonged(builtin_casimir("sp4_C2"), lh_hamiltonians("sp4"), k)


@dataclass
class DriftReport:
    invariant: str
    k: int
    times: np.ndarray
    values: np.ndarray
    max_rel_drift: float

    def to_dict(self, values_csv_path: str | None = None) -> dict:
        return {
            "invariant": self.invariant,
            "k": self.k,
            "t_grid_len": int(len(self.times)),
            "max_rel_drift": float(self.max_rel_drift),
            "values_csv_path": values_csv_path,
        }

    def values_csv(self) -> str:
        lines = ["t,value"] + [f"{t!r},{v!r}" for t, v in zip(self.times.tolist(), self.values.tolist())]
        return "\n".join(lines) + "\n"


def evaluate_series(obs: ProlongedObservable, trajs: Sequence[Trajectory]) -> DriftReport:
    if len(trajs) != obs.k:
        raise GridMismatch(f"{len(trajs)} trajectories for a {obs.k}-copy invariant")
    times = trajs[0].times
    for tr in trajs[1:]:
        if len(tr.times) != len(times) or not np.array_equal(tr.times, times):
            raise GridMismatch("trajectories do not share one time grid")
    states = np.concatenate([tr.states for tr in trajs], axis=1)
    if states.shape[1] != obs.poly.chart.nvars:
        raise GridMismatch("trajectory dimension does not match the invariant chart")
    values = np.asarray(obs.numeric()(states), dtype=float)
    drift = float(np.max(np.abs(values - values[0])) / max(1.0, abs(values[0])))
    return DriftReport(obs.name, obs.k, times, values, drift)


def commutes_with_prolonged(obs: ProlongedObservable, hams: Sequence[Polynomial]) -> bool:
    return all(bracket(obs.poly, h).is_zero() for h in prolonged_hamiltonians(hams, obs.k))


def identity_results() -> list[tuple[str, bool]]:
    """Exact relations between higher- and lower-order constants, each with its outcome."""
    out = []
    f4 = h6_third_order(4)
    f3 = h6_third_order(3).embed(4)
    rhs = f3.poly + sum((permute_copies(f3, i, 4).poly for i in (3, 2, 1)), Polynomial.zero(f3.poly.chart))
    out.append(("h6: F^(4) = F^(3) + F_34 + F_24 + F_14", f4.poly == rhs))

    s3 = sp4_second_order(3)
    s2 = sp4_second_order(2).embed(3)
    rhs = s2.poly + permute_copies(s2, 1, 3).poly + permute_copies(s2, 2, 3).poly
    out.append(("sp4: F^(3) = F^(2) + F_13 + F_23", s3.poly == rhs))

    out.append(("h6: F^(1) = 0", h6_third_order(1).poly.is_zero()))
    out.append(("h6: F^(2) = 0", h6_third_order(2).poly.is_zero()))
    out.append(("sp4: F^(1) = 0", sp4_second_order(1).poly.is_zero()))
    out.append(("h6: F^(3) matches the explicit cubic square", h6_third_order(3).poly == printed_h6_third_order(3).poly))
    out.append(("sp4: F^(2) matches the explicit square", sp4_second_order(2).poly == printed_sp4_second_order(2).poly))
    out.append(("h6 G2 equals the sp4 second-order constant", builtin_extra_invariant("h6_G2").poly == sp4_second_order(2).poly))
    return out


def identity_checks() -> ValidationReport:
    results = identity_results()
    violations = tuple(Violation("identity", (), label) for label, ok in results if not ok)
    return ValidationReport(violations, len(results))


def jacobian_rank(observables: Sequence[ProlongedObservable], point: Sequence[float], copy: int = 1, tol: float = 1e-8) -> int:
    """Rank of d(observables)/d(copy variables) at a prolonged point, relative SVD tolerance."""
    if not observables:
        raise InvalidArgument("no observables given")
    chart = observables[0].poly.chart
    if any(o.poly.chart != chart for o in observables):
        raise InvalidArgument("observables must share one chart")
    x = np.asarray(point, dtype=float)
    rows = []
    for o in observables:
        rows.append([float(o.poly.diff(i).numeric()(x)) for i in chart.block(copy)])
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def h6_superposition_set() -> list[ProlongedObservable]:
    """{F^(3), F_34, F_24, G2} on the 4-copy chart, copy 1 being the unknown solution."""
    f3 = h6_third_order(3).embed(4)
    return [f3, permute_copies(f3, 3, 4), permute_copies(f3, 2, 4), builtin_extra_invariant("h6_G2").embed(4)]


def lorentz_constants(k: int) -> list[ProlongedObservable]:
    """Both so(1,3) Casimirs on k copies; only drift-tested, never used for superposition."""
    hams = lh_hamiltonians("so13")
    return [
        casimir_prolonged(builtin_casimir("so13_C2"), hams, k, "C2"),
        casimir_prolonged(builtin_casimir("so13_C2prime"), hams, k, "C2'"),
    ]


def bracket_table_preserved(system: str, k: int) -> bool:
    """{h_i^(k), h_j^(k)} is the same combination of prolonged Hamiltonians as for k = 1."""
    hams = lh_hamiltonians(system)
    pro = prolonged_hamiltonians(hams, k)
    alg = {"h6": "schrodinger_h6", "so13": "so13", "sp4": "sp4"}[system]
    structure = builtin_algebra(alg).negated()
    for i, j in itertools.combinations(range(len(hams)), 2):
        rhs = Polynomial.zero(pro[0].chart)
        for m, c in structure.bracket(i, j).items():
            rhs = rhs + pro[m] * c
        if bracket(pro[i], pro[j]) != rhs:
            return False
    return True
