"""Command-line front end: ``liehamsys <command> [--config PATH] [--seed N] [--out DIR]``.

Exit codes: 0 success, 1 a verification failed, 2 bad configuration,
3 a numerical error (the error class name is printed), 4 an I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from . import applications as apps
from .algebra_core import (
    BUILTIN_ALGEBRAS,
    BUILTIN_REPRESENTATIONS,
    ValidationReport,
    algebra_from_json,
    builtin_algebra,
    builtin_representation,
    representation_from_json,
    validate,
)
from .coalgebra_invariants import (
    builtin_extra_invariant,
    casimir_prolonged,
    evaluate_series,
    identity_results,
    lh_hamiltonians,
    permute_copies,
)
from .dynamics import CoefficientFunction, builtin_system, integrate, integrate_prolonged, system_dimension
from .errors import InvalidArgument, LieHamError, SchemaError, UnknownAlgebra, UnknownRepresentation
from .poisson import builtin_casimir, casimir_commutes, verify_bracket_table
from .realization import distribution_rank, hamiltonians, lh_algebra, linearize
from .reduction import Sl2Reduction, pushforward_residuals, sample_surface, sl2_diffeo, surface_csv
from .superposition import embed_so13_in_sp4, reconstruct, solve_constants

SCHEMA = 1
EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


class OutputError(Exception):
    pass


# --- helpers


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(config: dict, seed: int) -> str:
    blob = json.dumps({"config": config, "seed": seed}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def report_json(doc: dict) -> str:
    return json.dumps({"schema": SCHEMA} | doc, indent=2, sort_keys=True) + "\n"


def _need(config: dict, key: str):
    if key not in config:
        raise SchemaError(f"config is missing {key!r}")
    return config[key]


def _span(config: dict) -> tuple[float, float, float]:
    """span may be {t0, t1, dt}, {t0, t1} or [t0, t1]; dt may also sit at the top level."""
    span = _need(config, "span")
    try:
        if isinstance(span, list):
            t0, t1 = (float(v) for v in span)
            dt = float(_need(config, "dt"))
        else:
            t0, t1 = float(span.get("t0", 0.0)), float(span["t1"])
            dt = float(span["dt"] if "dt" in span else _need(config, "dt"))
    except (KeyError, TypeError, ValueError, AttributeError) as err:
        raise SchemaError(f"malformed span: {err}") from None
    if not dt > 0:
        raise SchemaError("dt must be positive")
    if not t1 > t0:
        raise SchemaError("span must have t1 > t0")
    return t0, t1, dt


def _coeffs(docs, count: int) -> list[CoefficientFunction]:
    if not isinstance(docs, list) or len(docs) != count:
        raise SchemaError(f"expected a list of {count} coefficients")
    try:
        return [CoefficientFunction.from_json(d) for d in docs]
    except InvalidArgument as err:
        raise SchemaError(str(err)) from None


def _states(docs, n: int, what: str) -> list[list[float]]:
    if not isinstance(docs, list) or not docs:
        raise SchemaError(f"{what} must be a non-empty list of states")
    out = []
    for d in docs:
        if not isinstance(d, list) or len(d) != n:
            raise SchemaError(f"each {what} entry must have {n} components")
        out.append([float(v) for v in d])
    return out


def _random_states(count: int, n: int, rng: np.random.Generator) -> list[list[float]]:
    return rng.normal(size=(count, n)).tolist()


def _oscillator(doc) -> apps.OscillatorParams:
    if not isinstance(doc, dict):
        raise SchemaError("oscillator parameters must be an object with m, k and optionally gamma")
    try:
        return apps.OscillatorParams(
            CoefficientFunction.from_json(_need(doc, "m")),
            CoefficientFunction.from_json(_need(doc, "k")),
            CoefficientFunction.from_json(doc.get("gamma", 0.0)),
        )
    except InvalidArgument as err:
        raise SchemaError(str(err)) from None


def build_system(config: dict, span=None):
    """(system name, TDLinearSystem, coefficient audit) from a system or preset config."""
    span = span or (0.0, 5.0)
    if "preset" in config:
        name = config["preset"]
        params = config.get("params", {})
        cf = CoefficientFunction.from_json
        try:
            if name == "bateman":
                preset = apps.bateman_preset(_oscillator(params), span)
            elif name == "coupled_ck":
                preset = apps.coupled_ck_preset(_oscillator(params), cf(params.get("a3", 0.0)), span)
            elif name in ("em_printed", "em_consistent"):
                vals = [cf(_need(params, key)) for key in ("m1", "m2", "e1", "e2", "gamma")]
                preset = apps.em_preset(*vals, variant=name.split("_")[1], span=span)
            elif name == "coupled_ho":
                preset = apps.coupled_ho_preset(_oscillator(_need(params, "osc1")), _oscillator(_need(params, "osc2")), cf(params.get("a2", 0.0)), span)
            elif name == "generalized_cck":
                preset = apps.generalized_cck_preset(_oscillator(_need(params, "osc1")), _oscillator(_need(params, "osc2")), cf(params.get("a2", 0.0)), span)
            elif name == "hyperbolic":
                return "sp4", builtin_system("sp4", apps.hyperbolic_preset(cf(params.get("b", 1.0)))), None
            else:
                raise SchemaError(f"unknown preset {name!r}; choose from {', '.join(apps.PRESETS)}")
        except InvalidArgument as err:
            raise SchemaError(str(err)) from None
        return preset.system_name, preset.system(), preset
    name = _need(config, "system")
    try:
        n, r = system_dimension(name)
    except InvalidArgument as err:
        raise SchemaError(str(err)) from None
    coeffs = _coeffs(_need(config, "coeffs"), 6 if name == "so13" and config.get("embed") else r)
    if name == "so13" and config.get("embed"):
        return "sp4", builtin_system("sp4", embed_so13_in_sp4(coeffs)), None
    return name, builtin_system(name, coeffs), None


# --- commands


def cmd_verify(scope: str, config: dict | None) -> tuple[int, dict]:
    sections: dict[str, Any] = {}

    def record(key: str, report: ValidationReport | bool, detail: str = ""):
        if isinstance(report, ValidationReport):
            sections[key] = report.to_dict()
        else:
            sections[key] = {"ok": bool(report), "checked": 1, "violations": [] if report else [{"kind": "failed", "indices": [], "detail": detail}]}

    if scope in ("algebra", "all"):
        if config and "algebra" in config:
            try:
                alg = algebra_from_json(config["algebra"])
            except InvalidArgument as err:
                raise SchemaError(str(err)) from None
            record(f"algebra:{alg.name}", validate(alg))
        else:
            for name in BUILTIN_ALGEBRAS:
                record(f"algebra:{name}", validate(builtin_algebra(name)))
    if scope in ("representation", "all"):
        if config and "representation" in config:
            try:
                rep = representation_from_json(config["representation"])
            except InvalidArgument as err:
                raise SchemaError(str(err)) from None
            record(f"representation:{rep.name}", rep.check_homomorphism())
        else:
            for name in BUILTIN_REPRESENTATIONS:
                rep = builtin_representation(name)
                record(f"representation:{name}", rep.check_homomorphism())
                record(f"faithful:{name}", rep.is_faithful(), "images are linearly dependent")
    if scope in ("brackets", "all"):
        for name in ("h6_gamma", "so13_gamma", "sp4_fundamental"):
            rep = builtin_representation(name)
            record(f"brackets:{name}", verify_bracket_table(hamiltonians(rep), lh_algebra(rep)))
    if scope in ("casimirs", "all"):
        for system, names in (("h6", ("h6_C3",)), ("so13", ("so13_C2", "so13_C2prime")), ("sp4", ("sp4_C2", "sp4_C4"))):
            for cas in names:
                record(f"casimir:{cas}", casimir_commutes(builtin_casimir(cas), lh_hamiltonians(system)), "does not Poisson-commute")
    if scope in ("identities", "all"):
        results = identity_results()
        violations = [{"kind": "identity", "indices": [], "detail": label} for label, ok in results if not ok]
        sections["identities"] = {"ok": not violations, "checked": len(results), "violations": violations, "results": [{"identity": label, "ok": ok} for label, ok in results]}
    failures = sum(len(s["violations"]) for s in sections.values())
    doc = {"command": "verify", "scope": scope, "failures": failures, "sections": sections}
    return (EXIT_OK if failures == 0 else EXIT_FAILED), doc


def _simulate_one(config: dict, seed: int, out: str | None) -> dict:
    t0, t1, dt = _span(config)
    name, system, preset = build_system(config, (t0, t1))
    rng = np.random.default_rng(seed)
    if "x0s" in config:
        x0s = _states(config["x0s"], system.n, "x0s")
    elif "x0" in config:
        x0s = _states([config["x0"]], system.n, "x0")
    else:
        x0s = _random_states(int(config.get("copies", 1)), system.n, rng)
    trajs = integrate_prolonged(system, x0s, t0, t1, dt) if len(x0s) > 1 else [integrate(system, x0s[0], t0, t1, dt)]
    files = []
    if out:
        base = Path(out)
        for i, tr in enumerate(trajs):
            fname = "trajectory.csv" if len(trajs) == 1 else f"trajectory_{i + 1}.csv"
            atomic_write(base / fname, tr.to_csv())
            files.append(fname)
        if preset is not None:
            grid = trajs[0].times
            table = preset.table(grid)
            lines = ["t," + ",".join(preset.labels)] + [",".join([repr(float(t))] + [repr(float(v)) for v in row]) for t, row in zip(grid, table)]
            atomic_write(base / "coefficients.csv", "\n".join(lines) + "\n")
            files.append("coefficients.csv")
    manifest = {
        "command": "simulate",
        "system": name,
        "preset": config.get("preset"),
        "coeffs": config.get("coeffs"),
        "t0": t0,
        "t1": t1,
        "dt": dt,
        "x0": x0s,
        "seed": seed,
        "config_hash": config_hash(config, seed),
        "files": files,
        "final_states": [tr.final.tolist() for tr in trajs],
    }
    if out:
        atomic_write(Path(out) / "manifest.json", report_json(manifest))
    return manifest


def _sweep_worker(args):
    config, seed, out = args
    try:
        return _simulate_one(config, seed, out)
    except LieHamError as err:
        return {"error": type(err).__name__, "message": str(err)}


def cmd_simulate(config: dict, seed: int, out: str | None, workers: int = 1, sweep: bool = False) -> tuple[int, dict]:
    if sweep and "sweep" not in config:
        raise SchemaError("--sweep needs a 'sweep' list in the config")
    if "sweep" not in config:
        return EXIT_OK, _simulate_one(config, seed, out)
    runs = config["sweep"]
    if not isinstance(runs, list):
        raise SchemaError("sweep must be a list of config overrides")
    base = {k: v for k, v in config.items() if k != "sweep"}
    jobs = [(base | run, seed + i, str(Path(out) / f"run_{i + 1}") if out else None) for i, run in enumerate(runs)]
    for job in jobs:
        _span(job[0])
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    errors = [r for r in results if "error" in r]
    doc = {"command": "simulate", "sweep": len(jobs), "runs": results, "config_hash": config_hash(config, seed)}
    if out:
        atomic_write(Path(out) / "sweep.json", report_json(doc))
    return (EXIT_NUMERIC if errors else EXIT_OK), doc


def _invariant(config: dict):
    wanted = _need(config, "invariant")
    if isinstance(wanted, str):
        if wanted == "h6_G2":
            return builtin_extra_invariant("h6_G2"), "h6"
        raise SchemaError(f"unknown invariant {wanted!r}")
    try:
        cas = builtin_casimir(_need(wanted, "casimir"))
        k = int(_need(wanted, "k"))
        system = _need(wanted, "system")
        obs = casimir_prolonged(cas, lh_hamiltonians(system), k, wanted["casimir"])
        for i, j in wanted.get("permute", []):
            obs = permute_copies(obs, int(i), int(j))
    except InvalidArgument as err:
        raise SchemaError(str(err)) from None
    return obs, system


def cmd_invariants(config: dict, seed: int, out: str | None) -> tuple[int, dict]:
    t0, t1, dt = _span(config)
    obs, _ = _invariant(config)
    name, system, _ = build_system(config, (t0, t1))
    rng = np.random.default_rng(seed)
    x0s = _states(config["x0s"], system.n, "x0s") if "x0s" in config else _random_states(obs.k, system.n, rng)
    if len(x0s) != obs.k:
        raise SchemaError(f"the invariant needs {obs.k} copies, config gives {len(x0s)}")
    trajs = integrate_prolonged(system, x0s, t0, t1, dt)
    report = evaluate_series(obs, trajs)
    csv_name = "invariant_values.csv" if out else None
    doc = {"command": "invariants", "system": name, "config_hash": config_hash(config, seed)} | report.to_dict(csv_name)
    tol = float(config.get("tolerance", 1e-8))
    doc["tolerance"] = tol
    doc["ok"] = report.max_rel_drift <= tol
    if out:
        atomic_write(Path(out) / csv_name, report.values_csv())
        atomic_write(Path(out) / "drift_report.json", report_json(doc))
    return (EXIT_OK if doc["ok"] else EXIT_FAILED), doc


def cmd_superpose(config: dict, seed: int, out: str | None) -> tuple[int, dict]:
    t0, t1, dt = _span(config)
    requested = _need(config, "system")
    if requested not in ("h6", "sp4", "so13"):
        raise SchemaError("superposition is available for h6, sp4 and so13")
    coeffs = _coeffs(_need(config, "coeffs"), system_dimension(requested)[1])
    if requested == "so13":
        system = builtin_system("sp4", embed_so13_in_sp4(coeffs))
        rule = "sp4"
    else:
        system = builtin_system(requested, coeffs)
        rule = requested
    count = 3 if rule == "h6" else 4
    rng = np.random.default_rng(seed)
    particular = _states(config["particular"], 4, "particular") if "particular" in config else _random_states(count, 4, rng)
    target = _states([config["target"]], 4, "target")[0] if "target" in config else _random_states(1, 4, rng)[0]
    if len(particular) != count:
        raise SchemaError(f"{rule} needs {count} particular solutions")
    trajs = integrate_prolonged(system, particular + [target], t0, t1, dt)
    sols, target_tr = trajs[:-1], trajs[-1]
    anchor = float(config.get("anchor_time", t0))
    consts = solve_constants(rule, sols, target_tr, anchor)
    rebuilt = reconstruct(rule, sols, consts)
    sup = float(np.max(np.abs(rebuilt.states - target_tr.states)))
    tol = float(config.get("tolerance", 1e-6))
    doc = {"command": "superpose", "system": requested, "rule": rule, "sup_error": sup, "tolerance": tol, "ok": sup <= tol, "config_hash": config_hash(config, seed)}
    doc |= consts.to_dict() | {"system": requested}
    if out:
        atomic_write(Path(out) / "reconstruction.csv", rebuilt.to_csv())
        atomic_write(Path(out) / "superposition_report.json", report_json(doc))
    return (EXIT_OK if doc["ok"] else EXIT_FAILED), doc


def cmd_rank(config: dict, seed: int, out: str | None) -> tuple[int, dict]:
    names = config.get("representations", list(BUILTIN_REPRESENTATIONS))
    points = int(config.get("points", 64))
    rng = np.random.default_rng(seed)
    rows = []
    summary = {}
    for name in names:
        try:
            fields = linearize(builtin_representation(name))
        except (UnknownRepresentation, UnknownAlgebra, InvalidArgument) as err:
            raise SchemaError(str(err)) from None
        ranks = []
        for i in range(points):
            x = [int(v) for v in rng.integers(-9, 10, size=fields[0].n)]
            if not any(x):
                x[0] = 1
            r = distribution_rank(fields, x)
            ranks.append(r)
            rows.append(f"{name},{i + 1}," + " ".join(str(v) for v in x) + f",{r}")
        summary[name] = {"max": max(ranks), "min": min(ranks), "points": points}
    doc = {"command": "rank", "seed": seed, "ranks": summary, "config_hash": config_hash(config, seed)}
    if out:
        atomic_write(Path(out) / "ranks.csv", "representation,sample,point,rank\n" + "\n".join(rows) + "\n")
        atomic_write(Path(out) / "rank_report.json", report_json(doc))
    return EXIT_OK, doc


def cmd_reduce_sl2(config: dict, seed: int, out: str | None) -> tuple[int, dict]:
    lam = float(config.get("lambda", 1.0))
    beta = float(config.get("beta", 1.0))
    if beta == 0:
        raise SchemaError("beta must be nonzero")
    red = Sl2Reduction(lam, beta)
    count = int(config.get("points", 100))
    rng = np.random.default_rng(seed)
    z = np.column_stack([rng.uniform(-2, 2, count), rng.choice([-1, 1], count) * rng.uniform(0.2, 2, count)])
    residuals = pushforward_residuals(red, z)
    tol = float(config.get("tolerance", 1e-9))
    doc = {
        "command": "reduce_sl2",
        "lambda": lam,
        "beta": beta,
        "c": red.c,
        "points": count,
        "max_pushforward_residual": float(residuals.max()),
        "tolerance": tol,
        "ok": bool(residuals.max() <= tol),
        "config_hash": config_hash(config, seed),
    }
    if out:
        lines = ["z1,z2,x1,x2,x3,residual"]
        for (z1, z2), res in zip(z, residuals):
            x = sl2_diffeo(red, (z1, z2))
            lines.append(",".join(repr(float(v)) for v in (z1, z2, *x, res)))
        atomic_write(Path(out) / "reduced_samples.csv", "\n".join(lines) + "\n")
        atomic_write(Path(out) / "surface.csv", surface_csv(sample_surface(lam, beta)))
        atomic_write(Path(out) / "reduction_report.json", report_json(doc))
    return (EXIT_OK if doc["ok"] else EXIT_FAILED), doc


# --- entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liehamsys", description="Lie-Hamilton systems from Lie algebra representations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="JSON configuration file")
        sp.add_argument("--seed", type=int, default=0, help="seed for every random choice")
        sp.add_argument("--out", help="directory for CSV and JSON outputs")

    v = sub.add_parser("verify", help="run the exact algebraic checks")
    v.add_argument("scope", nargs="?", default="all", choices=["algebra", "representation", "brackets", "casimirs", "identities", "all"])
    common(v, config_required=False)
    s = sub.add_parser("simulate", help="integrate a system or preset")
    common(s)
    s.add_argument("--sweep", action="store_true", help="run every entry of the config's sweep list")
    s.add_argument("--workers", type=int, default=1, help="processes for the sweep")
    common(sub.add_parser("invariants", help="drift of a constant of the motion along a run"))
    common(sub.add_parser("superpose", help="reconstruct a solution from particular ones"))
    common(sub.add_parser("rank", help="distribution ranks at random points"), config_required=False)
    common(sub.add_parser("reduce-sl2", help="check the sl(2) reduction chart"), config_required=False)
    return p


def _load_config(path: str | None) -> dict | None:
    if path is None:
        return None
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise OutputError(f"cannot read {path}: {err}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path} is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise SchemaError("the config must be a JSON object")
    return doc


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        if args.command == "verify":
            code, doc = cmd_verify(args.scope, config)
        elif args.command == "simulate":
            code, doc = cmd_simulate(config, args.seed, args.out, args.workers, args.sweep)
        elif args.command == "invariants":
            code, doc = cmd_invariants(config, args.seed, args.out)
        elif args.command == "superpose":
            code, doc = cmd_superpose(config, args.seed, args.out)
        elif args.command == "rank":
            code, doc = cmd_rank(config or {}, args.seed, args.out)
        else:
            code, doc = cmd_reduce_sl2(config or {}, args.seed, args.out)
        if args.command == "verify" and args.out:
            atomic_write(Path(args.out) / "verify_report.json", report_json(doc))
    except (SchemaError, InvalidArgument, UnknownAlgebra, UnknownRepresentation) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except LieHamError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OutputError, OSError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(report_json(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
