"""``csent`` command line.

Exit codes: 0 success, 1 assertion failure, 2 input error, 3 validation error.
Reports go to stdout and are bit-identical for identical inputs and seeds;
wall-clock runtime is written to stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time

import numpy as np

from . import dist, ent, qmat, states, stateio
from .discord import geometric_discord, mid
from .errors import CsentError, DomainError, NormalizationError, NotPSDError, ShapeError
from .suites import SUITES

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_VALIDATION = 0, 1, 2, 3
REPORT_SCHEMA = 1

MEASURES = ("fidelity-pair", "bures-discord", "hs-discord", "mid-bures", "mid-hs",
            "bures-entanglement", "convex-roof-bures", "cse-bures", "cse-hs")
FAMILIES = ("random-pure", "random-mixed", "werner", "bell-diagonal", "separable", "cc")


class InputError(CsentError, ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    restarts: int | None = None
    tol: float = 1e-6
    fast_mode: bool = False

    def __post_init__(self):
        if self.restarts is not None and self.restarts < 1:
            raise InputError("restarts must be at least 1")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")


# certificates are hashed from their numeric content
def _arrays(obj, depth=0):
    if depth > 4 or obj is None:
        return
    if isinstance(obj, np.ndarray):
        yield np.ascontiguousarray(obj)
    elif isinstance(obj, (list, tuple)):
        for o in obj:
            yield from _arrays(o, depth + 1)
    elif isinstance(obj, (int, float, complex)):
        yield np.asarray([obj], dtype=complex)
    elif dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            yield from _arrays(getattr(obj, f.name), depth + 1)


def certificate_digest(obj) -> str:
    h = hashlib.sha256()
    for a in _arrays(obj):
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def _load_state(path) -> states.MultipartiteState:
    sf = stateio.read(path)
    return sf.state()


def _compute(measure: str, rhos, cfg: RunConfig) -> dict:
    rho = rhos[0]
    r = cfg.restarts
    if measure == "fidelity-pair":
        if len(rhos) != 2:
            raise InputError("fidelity-pair needs exactly two state files")
        f = dist.fidelity(rhos[0], rhos[1])
        return {"value": f, "bound_direction": "Exact", "certificate": None,
                "extra": {"bures_sq": dist.bures_sq(rhos[0], rhos[1])}}
    if len(rhos) != 1:
        raise InputError(f"{measure} takes exactly one state file")
    if measure in ("bures-discord", "hs-discord"):
        rep = geometric_discord(rho, measure.split("-")[0], restarts=r, seed=cfg.seed, tol=cfg.tol)
        return {"value": rep.value, "bound_direction": rep.bound_direction, "certificate": rep.argmin,
                "extra": {"converged_fraction": rep.converged_fraction}}
    if measure in ("mid-bures", "mid-hs"):
        rep = mid(rho, measure.split("-")[1], restarts=r, seed=cfg.seed, tol=cfg.tol)
        return {"value": rep.value, "bound_direction": rep.bound_direction, "certificate": rep.argmin,
                "extra": {"converged_fraction": rep.converged_fraction}}
    kw = {"seed": cfg.seed, "tol": cfg.tol}
    if r is not None:
        kw["restarts"] = r
    elif cfg.fast_mode:
        kw["restarts"] = 4
    if measure == "bures-entanglement":
        rep = ent.bures_entanglement(rho, fast=cfg.fast_mode, **kw)
    elif measure == "convex-roof-bures":
        rep = ent.convex_roof_bures(rho, **kw)
    elif measure == "cse-bures":
        rep = ent.cse_discord_min(rho, "bures", **kw)
    elif measure == "cse-hs":
        rep = ent.cse_discord_min(rho, "hs", **kw)
    else:
        raise InputError(f"unknown measure {measure!r}; expected one of {', '.join(MEASURES)}")
    extra = {k: float(v) for k, v in rep.residuals.items()}
    return {"value": rep.value, "bound_direction": rep.bound_direction,
            "certificate": rep.certificate, "extra": extra}


def _emit(report: dict, as_json: bool, out):
    if as_json:
        out.write(json.dumps(report, sort_keys=True) + "\n")
        return
    for k, v in report.items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                out.write(f"{k}.{kk}: {vv!r}\n" if isinstance(vv, float) else f"{k}.{kk}: {vv}\n")
        else:
            out.write(f"{k}: {v!r}\n" if isinstance(v, float) else f"{k}: {v}\n")


def cmd_compute(args, out) -> int:
    cfg = RunConfig(args.seed, args.restarts, args.tol, args.fast)
    if args.measure not in MEASURES:
        raise InputError(f"unknown measure {args.measure!r}; expected one of {', '.join(MEASURES)}")
    rhos = [_load_state(p) for p in args.files]
    res = _compute(args.measure, rhos, cfg)
    report = {
        "schema": REPORT_SCHEMA,
        "measure": args.measure,
        "value": float(res["value"]),
        "bound_direction": res["bound_direction"],
        "certificate_digest": certificate_digest(res["certificate"]) if res["certificate"] is not None else "none",
        "seed": cfg.seed,
        "config": {"restarts": "default" if cfg.restarts is None else cfg.restarts,
                   "tol": cfg.tol, "fast_mode": cfg.fast_mode},
        "residuals": res["extra"],
    }
    _emit(report, args.json, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; expected one of {', '.join(SUITES)}")
    res = SUITES[args.suite](seed=args.seed, fast=args.fast)
    if args.json:
        doc = {"schema": REPORT_SCHEMA, "suite": res.suite, "seed": res.seed, "fast_mode": res.fast,
               "passed": res.passed, "notes": res.notes,
               "properties": [dataclasses.asdict(p) | {"passed": p.passed} for p in res.properties]}
        out.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        out.write(f"suite: {res.suite}\nseed: {res.seed}\nfast_mode: {res.fast}\n")
        for note in res.notes:
            out.write(f"note: {note}\n")
        for p in res.properties:
            status = "PASS" if p.passed else "FAIL"
            out.write(f"{status} {p.name}: {p.count - p.failures}/{p.count} within {p.tol!r}, "
                      f"worst residual {p.worst!r}\n")
        out.write(f"result: {'PASS' if res.passed else 'FAIL'}\n")
    return EXIT_OK if res.passed else EXIT_FAIL


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        try:
            params[k] = [float(x) for x in v.split(",")] if "," in v else float(v)
        except ValueError:
            raise InputError(f"parameter {k!r} has non-numeric value {v!r}") from None
    return params


def _int_param(params, key, default):
    v = params.pop(key, default)
    if isinstance(v, list) or float(v) != int(v) or int(v) < 1:
        raise InputError(f"parameter {key!r} must be a positive integer")
    return int(v)


def generate(family: str, params: dict, seed: int) -> states.MultipartiteState:
    params = dict(params)
    if family == "werner":
        p = params.pop("p", None)
        if p is None or isinstance(p, list) or not 0 <= p <= 1:
            raise InputError("werner needs p in [0, 1]")
        rho = states.werner(p)
    elif family == "bell-diagonal":
        c = params.pop("coeffs", None)
        if not isinstance(c, list) or len(c) != 4:
            raise InputError("bell-diagonal needs coeffs=c0,c1,c2,c3")
        try:
            rho = states.bell_diagonal(c)
        except CsentError as exc:
            raise InputError(str(exc)) from None
    else:
        da = _int_param(params, "da", 2)
        db = _int_param(params, "db", 2)
        if da * db > qmat.MAX_DIM:
            raise InputError("dimensions exceed the cap")
        if family == "random-pure":
            rho = states.random_pure_state(da, db, seed=seed)
        elif family == "random-mixed":
            rank = _int_param(params, "rank", da * db)
            if rank > da * db:
                raise InputError("rank exceeds the dimension")
            rho = states.random_mixed_state(da, db, rank, seed=seed)
        elif family == "separable":
            rho = states.random_separable_state(da, db, _int_param(params, "terms", 4), seed=seed)
        elif family == "cc":
            rho = states.random_cc_state(da, db, seed=seed)
        else:
            raise InputError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    if params:
        raise InputError(f"unknown parameters for {family}: {sorted(params)}")
    return rho


def cmd_gen(args, out) -> int:
    params = _parse_params(args.param)
    rho = generate(args.family, params, args.seed)
    meta = {"family": args.family, "params": params, "seed": args.seed}
    stateio.write(args.out, stateio.StateFile.from_state(rho, meta))
    out.write(f"wrote {args.out}\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="csent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="evaluate a measure on state files")
    c.add_argument("measure", help=", ".join(MEASURES))
    c.add_argument("files", nargs="+")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--restarts", type=int, default=None)
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--fast", action="store_true")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("suite", help=", ".join(SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fast", action="store_true")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="write a state file from a named family")
    g.add_argument("family", help=", ".join(FAMILIES))
    g.add_argument("out")
    g.add_argument("--param", action="append", metavar="KEY=VALUE")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)
    return p


VALIDATION_ERRORS = (NotPSDError, NormalizationError, DomainError, ShapeError)


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        code = args.func(args, out)
    except (InputError, stateio.StateFileError) as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except VALIDATION_ERRORS as exc:
        err.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except CsentError as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    err.write(f"runtime: {time.perf_counter() - t0:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
