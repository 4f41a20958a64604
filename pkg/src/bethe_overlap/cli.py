"""Command line front end.

Four subcommands: `verify` runs the named check suites, `overlap` evaluates
every applicable overlap formula against the brute-force contraction on an
explicit instance, `solve` runs damped Newton on a Bethe system, and `rate`
computes the transition-rate prefactor.  All of them emit a JSON report with
a fixed key order, so a given config and seed reproduce the report byte for
byte.  Exit status: 0 all records pass, 1 some record failed, 2 the config
was unusable (no report is written in that case).

Scalars in configs may be integers, rational strings ("3/5"), decimal
strings or numbers, or {"re": ..., "im": ...} objects.  Parsing goes through
exact rationals first and only then rounds to the working precision, because
binary float constructors reject rational strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import gmpy2
import jsonschema

from . import __version__, bethe, overlap
from .bethe import BetheSystem, heuristic_initial, solve_newton
from .chain import (DegenerateTwist, SpinChainModel, TwistDiag, TwistGeneral,
                    brute_overlap)
from .overlap import (ConstraintViolated, EigenvalueZeroAtOrigin, NotOnShell,
                      OverlapInput, ReducedSystemViolated)
from .scalars import ParamSet, PoleError, Scalar, one_like, zero_like
from .suites import SUITES, Check, SuiteConfig, _check, _digest, run_suites

SCHEMA_NAME = "bethe-overlap/1"


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_SCALAR_SCHEMA = {"anyOf": [
    {"type": "integer"},
    {"type": "number"},
    {"type": "string"},
    {"type": "object",
     "properties": {"re": {}, "im": {}},
     "required": ["re"], "additionalProperties": False},
]}
_SET_SCHEMA = {"type": "array", "items": _SCALAR_SCHEMA}
_CHAIN_SCHEMA = {
    "type": "object",
    "properties": {"length": {"type": "integer", "minimum": 1},
                   "c": _SCALAR_SCHEMA,
                   "inhomogeneities": _SET_SCHEMA},
    "required": ["length", "c"],
    "additionalProperties": False,
}
_TWIST_SCHEMA = {
    "type": "object",
    "properties": {k: _SCALAR_SCHEMA
                   for k in ("kt", "kp", "km", "k", "rho1", "rho2")},
    "additionalProperties": False,
    "minProperties": 4,
}
_FORMULAS = ("sum_offshell", "sum_onshell", "sum_constrained", "det",
             "det_z_bridge", "det_reduced")

_SCHEMAS = {
    "verify": {
        "type": "object",
        "properties": {
            "suites": {"type": "array",
                       "items": {"enum": sorted(SUITES)}},
            "mode": {"enum": ["exact", "float"]},
            "precision_bits": {"type": "integer", "minimum": 32},
            "seed": {"type": "integer", "minimum": 0},
            "max_set_size": {"type": "integer", "minimum": 0},
            "max_chain_length": {"type": "integer", "minimum": 1},
            "instances": {"type": "integer", "minimum": 1},
            "tolerance": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "overlap": {
        "type": "object",
        "properties": {
            "chain": _CHAIN_SCHEMA,
            "twist": _TWIST_SCHEMA,
            "alpha": _SCALAR_SCHEMA,
            "v_roots": _SET_SCHEMA,
            "u_roots": _SET_SCHEMA,
            "eta_free": _SET_SCHEMA,
            "z": _SCALAR_SCHEMA,
            "formulas": {"type": "array", "items": {"enum": list(_FORMULAS)}},
            "tolerance": {"type": "string"},
        },
        "required": ["chain", "twist", "v_roots", "u_roots"],
        "additionalProperties": False,
    },
    "solve": {
        "type": "object",
        "properties": {
            "chain": _CHAIN_SCHEMA,
            "kind": {"enum": ["diag", "modified", "reduced"]},
            "alpha": _SCALAR_SCHEMA,
            "twist": _TWIST_SCHEMA,
            "root_count": {"type": "integer", "minimum": 1},
            "initial": _SET_SCHEMA,
            "tolerance": {"type": "string"},
            "max_iter": {"type": "integer", "minimum": 0},
        },
        "required": ["chain", "kind", "root_count"],
        "additionalProperties": False,
    },
    "rate": {
        "type": "object",
        "properties": {
            "chain": _CHAIN_SCHEMA,
            "twist": _TWIST_SCHEMA,
            "alpha": _SCALAR_SCHEMA,
            "v_roots": _SET_SCHEMA,
            "u_roots": _SET_SCHEMA,
            "overlap": {"anyOf": [{"const": "auto"}, _SCALAR_SCHEMA]},
        },
        "required": ["chain", "twist", "alpha", "v_roots", "u_roots"],
        "additionalProperties": False,
    },
}


def _load_config(path: str, command: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(obj, _SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{path}: {exc.message}") from exc
    return obj


def _q(x) -> gmpy2.mpq:
    if isinstance(x, bool):
        raise ConfigError("booleans are not scalars")
    if isinstance(x, int):
        return gmpy2.mpq(x)
    if isinstance(x, (float, str)):
        try:
            fr = Fraction(str(x))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad scalar {x!r}") from exc
        return gmpy2.mpq(fr.numerator, fr.denominator)
    raise ConfigError(f"bad scalar {x!r}")


def _parse_scalar(obj, mode: str, bits: int) -> Scalar:
    if isinstance(obj, dict):
        s = Scalar.exact(_q(obj["re"]), _q(obj.get("im", 0)))
    else:
        s = Scalar.exact(_q(obj))
    return s if mode == "exact" else s.to_float(bits)


def _parse_set(objs, mode: str, bits: int) -> ParamSet:
    return ParamSet(_parse_scalar(x, mode, bits) for x in objs)


def _parse_chain(obj, mode: str, bits: int) -> SpinChainModel:
    c = _parse_scalar(obj["c"], "exact", bits)
    if c.is_zero():
        raise ConfigError("chain coupling c must be nonzero")
    ths = [_parse_scalar(x, "exact", bits)
           for x in obj.get("inhomogeneities", [])]
    if ths and len(ths) != obj["length"]:
        raise ConfigError("inhomogeneities must match the chain length")
    if ths:
        model = SpinChainModel(obj["length"], c, tuple(ths))
    else:
        model = SpinChainModel.homogeneous(obj["length"], c)
    return model if mode == "exact" else model.to_float(bits)


_TWIST_ALL = ("kt", "kp", "km", "k", "rho1", "rho2")


def _parse_twist(obj, mode: str, bits: int) -> TwistGeneral:
    vals = {key: _parse_scalar(val, "exact", bits) for key, val in obj.items()}
    try:
        if all(key in vals for key in _TWIST_ALL):
            tw = TwistGeneral(*[vals[key] for key in _TWIST_ALL])
        elif "rho2" in vals:
            tw = TwistGeneral.from_shifts(vals["kt"], vals["k"], vals["km"],
                                          vals["rho1"], vals["rho2"])
        elif "kp" in vals:
            tw = TwistGeneral.from_entries(vals["kt"], vals["kp"], vals["km"],
                                           vals["k"], vals["rho1"])
        else:
            raise ConfigError(
                "twist needs rho2 (shift form), kp (entry form), or all six")
    except KeyError as exc:
        raise ConfigError(f"twist is missing {exc.args[0]!r}") from exc
    except DegenerateTwist as exc:
        raise ConfigError(f"degenerate twist: {exc}") from exc
    return tw if mode == "exact" else tw.to_float(bits)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _row(ch: Check) -> dict:
    return {"name": ch.name, "anchor": ch.anchor,
            "inputs_digest": ch.inputs_digest,
            "lhs": ch.lhs.to_json(), "rhs": ch.rhs.to_json(),
            "residual": ch.residual.to_json(),
            "passed": ch.passed, "detail": ch.detail}


def _emit(command, args, parameters, checks, results=None) -> int:
    checks = sorted(checks, key=lambda ch: ch.name)
    report = {
        "schema": SCHEMA_NAME,
        "command": command,
        "version": __version__,
        "mode": args.mode,
        "precision_bits": args.precision,
        "seed": args.seed,
        "parameters": parameters,
        "checks": [_row(ch) for ch in checks],
        "summary": {"total": len(checks),
                    "passed": sum(ch.passed for ch in checks),
                    "failed": sum(not ch.passed for ch in checks)},
    }
    if results is not None:
        report["results"] = results
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(ch.passed for ch in checks) else 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfgdict = {}
    if args.config:
        cfgdict = dict(_load_config(args.config, "verify"))
    names = cfgdict.pop("suites", None)
    if args.suite:
        names = list(args.suite)
    for flag, key in (("mode", "mode"), ("precision", "precision_bits"),
                      ("seed", "seed"), ("max_size", "max_set_size"),
                      ("chain_length", "max_chain_length"),
                      ("instances", "instances"), ("tolerance", "tolerance")):
        val = getattr(args, flag)
        if val is not None:
            cfgdict[key] = val
    cfg = SuiteConfig(mode=cfgdict.get("mode", "exact"),
                      bits=cfgdict.get("precision_bits", 256),
                      seed=cfgdict.get("seed", 1),
                      max_set_size=cfgdict.get("max_set_size", 3),
                      max_chain_length=cfgdict.get("max_chain_length", 2),
                      instances=cfgdict.get("instances", 2),
                      tolerance=cfgdict.get("tolerance", "1e-25"))
    if names is None:
        names = list(SUITES)
    args.mode, args.precision, args.seed = cfg.mode, cfg.bits, cfg.seed
    checks = run_suites(cfg, names)
    parameters = {"suites": sorted(names), "max_set_size": cfg.max_set_size,
                  "max_chain_length": cfg.max_chain_length,
                  "instances": cfg.instances, "tolerance": cfg.tolerance}
    return _emit("verify", args, parameters, checks)


def cmd_overlap(args) -> int:
    cfgdict = _load_config(args.config, "overlap")
    mode, bits = args.mode, args.precision
    model = _parse_chain(cfgdict["chain"], mode, bits)
    tw = _parse_twist(cfgdict["twist"], mode, bits)
    vs = _parse_set(cfgdict["v_roots"], mode, bits)
    us = _parse_set(cfgdict["u_roots"], mode, bits)
    if "alpha" in cfgdict:
        alpha = _parse_scalar(cfgdict["alpha"], mode, bits)
    else:
        alpha = tw.alpha_partner()
    eta = None
    if "eta_free" in cfgdict and len(us) >= len(vs):
        eta = _parse_set(cfgdict["eta_free"], mode, bits)
    z = _parse_scalar(cfgdict["z"], mode, bits) if "z" in cfgdict else None
    tol = cfgdict.get("tolerance")
    try:
        inp = OverlapInput(model, tw, alpha, vs, us, model.c, eta_free=eta)
    except ValueError as exc:
        raise ConfigError(f"bad overlap instance: {exc}") from exc
    scfg = SuiteConfig(mode=mode, bits=bits, seed=args.seed,
                       tolerance=tol or "1e-25")

    oracle = brute_overlap(model, tw, vs, us)
    zero = zero_like(model.c)
    one = one_like(model.c)

    def bridge():
        if z is None:
            raise ConfigError("det_z_bridge needs a 'z' entry in the config")
        lhs = (one - z) ** (len(vs) - len(us)) * overlap.overlap_det_z(
            inp, z, tol=tol)
        return lhs, overlap.overlap_sum_shifted(inp, z, tol=tol)

    producers = {
        "sum_offshell": lambda: (overlap.overlap_sum_offshell(inp), oracle),
        "sum_onshell": lambda: (overlap.overlap_sum_onshell(inp, tol=tol),
                                oracle),
        "sum_constrained": lambda: (overlap.overlap_sum_onshell(
            inp, assume_constraint=True, tol=tol), oracle),
        "det": lambda: (overlap.overlap_det(inp, tol=tol), oracle),
        "det_z_bridge": bridge,
        "det_reduced": lambda: (overlap.overlap_det_reduced(inp, tol=tol),
                                oracle),
    }
    requested = cfgdict.get("formulas")
    auto = requested is None
    if auto:
        requested = [nm for nm in _FORMULAS
                     if nm != "det_z_bridge" or z is not None]

    checks = []
    base = [vs, us, alpha, tw.kt, tw.kp, tw.km, tw.k, tw.rho1, tw.rho2]
    for nm in requested:
        try:
            lhs, rhs = producers[nm]()
        except (NotOnShell, ConstraintViolated, ReducedSystemViolated) as exc:
            if auto:
                continue
            checks.append(Check(f"overlap/{nm}", "formula vs oracle",
                                _digest(base + [nm]), zero, zero, zero,
                                False, f"{type(exc).__name__}: {exc}"))
            continue
        ch = _check(scfg, f"overlap/{nm}", "formula vs oracle",
                    base + [nm], lhs, rhs)
        checks.append(ch)
    results = {"oracle": oracle.to_json(),
               "values": {ch.name.split("/", 1)[1]: ch.lhs.to_json()
                          for ch in checks if not ch.detail}}
    return _emit("overlap", args, cfgdict, checks, results)


def cmd_solve(args) -> int:
    if args.mode == "exact":
        raise ConfigError("solve is iterative and needs --mode float")
    cfgdict = _load_config(args.config, "solve")
    bits = args.precision
    model = _parse_chain(cfgdict["chain"], "float", bits)
    kind = cfgdict["kind"]
    if kind == "diag":
        if "alpha" not in cfgdict:
            raise ConfigError("diag solve needs an 'alpha' entry")
        twist = TwistDiag(_parse_scalar(cfgdict["alpha"], "float", bits))
    else:
        if "twist" not in cfgdict:
            raise ConfigError(f"{kind} solve needs a 'twist' entry")
        twist = _parse_twist(cfgdict["twist"], "float", bits)
    count = cfgdict["root_count"]
    try:
        system = BetheSystem(kind, model, twist, count, model.c)
    except (ValueError, DegenerateTwist) as exc:
        raise ConfigError(f"bad system: {exc}") from exc
    if "initial" in cfgdict:
        start = _parse_set(cfgdict["initial"], "float", bits)
        if len(start) != count:
            raise ConfigError("initial guess must have root_count points")
    else:
        start = heuristic_initial(count, model.c, bits)
    tol = cfgdict.get("tolerance", bethe.DEFAULT_TOL)
    max_iter = cfgdict.get("max_iter", 200)
    zero = zero_like(model.c)
    detail = ""
    try:
        rs = solve_newton(system, start, tol=tol, max_iter=max_iter)
    except bethe.JacobianSingular as exc:
        rs = None
        detail = f"JacobianSingular: {exc}"
    if rs is None:
        checks = [Check("solve/converged", "newton iteration",
                        _digest(list(start) + [kind]), zero, zero, zero,
                        False, detail)]
        results = {"converged": False}
    else:
        if not rs.converged:
            detail = "NoConvergence: best iterate did not meet tolerance"
        checks = [Check("solve/converged", "newton iteration",
                        _digest(list(start) + [kind]), rs.residual_norm, zero,
                        rs.residual_norm, rs.converged, detail)]
        results = {"roots": [r.to_json() for r in rs.roots],
                   "residual_norm": rs.residual_norm.to_json(),
                   "iterations": rs.iterations,
                   "converged": rs.converged}
    return _emit("solve", args, cfgdict, checks, results)


def cmd_rate(args) -> int:
    cfgdict = _load_config(args.config, "rate")
    mode, bits = args.mode, args.precision
    model = _parse_chain(cfgdict["chain"], mode, bits)
    tw = _parse_twist(cfgdict["twist"], mode, bits)
    alpha = _parse_scalar(cfgdict["alpha"], mode, bits)
    vs = _parse_set(cfgdict["v_roots"], mode, bits)
    us = _parse_set(cfgdict["u_roots"], mode, bits)
    choice = cfgdict.get("overlap", "auto")
    zero = zero_like(model.c)
    if choice == "auto":
        try:
            inp = OverlapInput(model, tw, alpha, vs, us, model.c)
        except ValueError as exc:
            raise ConfigError(f"bad overlap instance: {exc}") from exc
        sval = overlap.overlap_sum_offshell(inp)
    else:
        sval = _parse_scalar(choice, mode, bits)
    base = [vs, us, alpha, sval, tw.kt, tw.rho1, tw.rho2]
    try:
        rate = overlap.rate_prefactor(model, alpha, tw, vs, us, sval)
    except (EigenvalueZeroAtOrigin, PoleError) as exc:
        checks = [Check("rate/computed", "transition prefactor",
                        _digest(base), zero, zero, zero, False,
                        f"{type(exc).__name__}: {exc}")]
        return _emit("rate", args, cfgdict, checks, {})
    checks = [Check("rate/computed", "transition prefactor", _digest(base),
                    rate, rate, zero, True)]
    results = {"rate": rate.to_json(), "overlap": sval.to_json()}
    return _emit("rate", args, cfgdict, checks, results)


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="bethe-overlap",
        description="verify and evaluate overlap formulas for twisted spin chains")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, default_mode="exact", config_required=True):
        p.add_argument("--config", required=config_required,
                       help="JSON config file")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--mode", choices=["exact", "float"],
                       default=default_mode)
        p.add_argument("--precision", type=int, default=256,
                       metavar="BITS")
        p.add_argument("--out", default=None, metavar="FILE",
                       help="write the report here instead of stdout")

    pv = sub.add_parser("verify", help="run the identity check suites")
    common(pv, config_required=False)
    pv.add_argument("--suite", action="append", choices=sorted(SUITES),
                    help="restrict to a suite (repeatable)")
    pv.add_argument("--max-size", dest="max_size", type=int, default=None)
    pv.add_argument("--chain-length", dest="chain_length", type=int,
                    default=None)
    pv.add_argument("--instances", type=int, default=None)
    pv.add_argument("--tolerance", default=None)
    # verify resolves mode/precision/seed against the config file, so its
    # flags must distinguish "absent" from a default value
    pv.set_defaults(func=cmd_verify, mode=None, precision=None, seed=None)

    po = sub.add_parser("overlap", help="formulas vs brute force on one instance")
    common(po)
    po.set_defaults(func=cmd_overlap)

    ps = sub.add_parser("solve", help="Newton iteration on a Bethe system")
    common(ps, default_mode="float")
    ps.set_defaults(func=cmd_solve)

    pr = sub.add_parser("rate", help="transition-rate prefactor")
    common(pr)
    pr.set_defaults(func=cmd_rate)
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
