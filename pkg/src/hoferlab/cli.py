"""Command-line entry point.

Subcommands map one-to-one onto the library surface:

    length       length functionals of a path JSON on a grid JSON
    flow         integrate tracer clouds (CSV) under a path
    gm           shell-family decay table, slopes, and plot data
    displace     square displacement construction + certificate
    shift        half-space shift certificate
    commutator   commutator path length-bound report
    constants    exact constants ledger for a given k
    disjoint     disjoint-support coarse bound report
    snowflake    snowflake transform of a weighted finite group
    verify       property suites; writes a deterministic summary.json
    run          dispatch any of the above from a JSON config file

Exit codes: 0 success, 1 a check failed, 2 invalid config, 3 I/O error.
JSON in, JSON/CSV/.dat out; no binary formats.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import flow as fl
from . import lengths as ln
from . import snowflake as sf
from .errors import CheckFailed, ConfigInvalid, HoferLabError
from .experiments import (commutator_bound_report, constants, disjoint_bound_check,
                          half_space_shift, shell_decay_report, shift_certificate,
                          square_displacement)
from .grid import Grid
from .hampath import AffineSymplectic, HamiltonianPath
from .verify import run_suite, summary_bytes

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_INVALID = 2
EXIT_IO_ERROR = 3

SUBCOMMANDS = ("length", "flow", "gm", "displace", "shift", "commutator",
               "constants", "disjoint", "snowflake", "verify", "run")


def _emit(obj, out=None):
    text = json.dumps(obj, sort_keys=True, indent=2, default=_jsonable)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if hasattr(v, "to_json"):
        return v.to_json()
    raise TypeError(f"not JSON serializable: {type(v)}")


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as err:
        raise ConfigInvalid(f"{what} file not found: {path}", what) from err
    except json.JSONDecodeError as err:
        raise ConfigInvalid(f"{what} is not valid JSON: {err}", what) from err


def _load_path(path_file):
    spec = _load_json(path_file, "path")
    try:
        if spec.get("pieces") and "harmonic" in spec["pieces"][0]:
            return ln.TorusSymplecticPath.from_json(spec)
        return HamiltonianPath.from_json(spec)
    except (KeyError, TypeError, ValueError, HoferLabError) as err:
        raise ConfigInvalid(f"malformed path spec: {err}", "path") from err


def _resolve_path_argument(args):
    """A path JSON file, or a bare Hamiltonian DSL string plus a grid."""
    if getattr(args, "hamiltonian", None):
        if args.path:
            raise ConfigInvalid("give either --path or --hamiltonian, not both",
                                "hamiltonian")
        if not args.grid:
            raise ConfigInvalid("--hamiltonian needs --grid for the domain", "grid")
        grid = Grid.from_json(_load_json(args.grid, "grid"))
        try:
            from . import expr as ex
            from .hampath import autonomous_path
            return autonomous_path(ex.parse(args.hamiltonian), grid.dimension, grid)
        except HoferLabError as err:
            raise ConfigInvalid(f"bad hamiltonian: {err}", "hamiltonian") from err
    if not args.path:
        raise ConfigInvalid("one of --path or --hamiltonian is required", "path")
    return _load_path(args.path)


def cmd_length(args):
    path = _resolve_path_argument(args)
    # a bare --hamiltonian already adopted --grid as its domain
    if args.hamiltonian or not args.grid:
        grid = path.domain
    else:
        grid = Grid.from_json(_load_json(args.grid, "grid"))
    if args.kind != "hl" and isinstance(path, ln.TorusSymplecticPath):
        raise ConfigInvalid("split torus paths support kind=hl only", "kind")
    if args.kind == "k":
        rep = ln.length_k(path, args.k, grid, args.time_samples)
    elif args.kind == "coarse":
        rep = ln.coarse_length_k(path, args.k, grid, max(args.time_samples, 65))
    elif args.kind == "kp":
        if args.p is None:
            raise ConfigInvalid("--p is required for kind=kp", "p")
        rep = ln.length_kp(path, args.k, args.p, grid, args.time_samples)
    else:
        if not isinstance(path, ln.TorusSymplecticPath):
            raise ConfigInvalid("kind=hl needs a torus path with harmonic pieces", "path")
        rep = ln.hofer_like_length_k(path, args.k, grid, args.time_samples)
    _emit(rep.to_json(), args.out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(rep.to_csv())
    return EXIT_OK


def cmd_flow(args):
    path = _resolve_path_argument(args)
    try:
        with open(args.cloud, "r", encoding="utf-8") as fh:
            cloud = fl.TracerCloud.from_csv(fh.read())
    except FileNotFoundError as err:
        raise ConfigInvalid(f"cloud file not found: {args.cloud}", "cloud") from err
    fm = fl.integrate(path, cloud, args.steps)
    if args.out_prefix:
        with open(args.out_prefix + ".final.csv", "w", encoding="utf-8") as fh:
            fh.write(fm.final.to_csv())
        with open(args.out_prefix + ".initial.csv", "w", encoding="utf-8") as fh:
            fh.write(fm.initial.to_csv())
        with open(args.out_prefix + ".stats.json", "w", encoding="utf-8") as fh:
            fh.write(fm.stats_json() + "\n")
    _emit({"stats": fm.stats, "path_hash": fm.path_hash})
    return EXIT_OK


def cmd_gm(args):
    m_values = [int(m) for m in args.m.split(",")]
    orders = [int(i) for i in args.orders.split(",")] if args.orders else None
    rep = shell_decay_report(m_values, args.k, args.p, orders=orders,
                             closed_mode=args.closed)
    _emit(rep.to_json(), args.out)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "decay.csv"), "w", encoding="utf-8") as fh:
            fh.write(rep.to_csv())
        with open(os.path.join(args.out_dir, "decay.dat"), "w", encoding="utf-8") as fh:
            fh.write(rep.to_dat())
    return EXIT_OK


def cmd_displace(args):
    _, cert = square_displacement(args.c, k_max=args.k_max)
    _emit(cert.to_json(), args.out)
    return EXIT_OK if cert.ok() else EXIT_CHECK_FAILED


def cmd_shift(args):
    cert = shift_certificate(args.v, args.eps)
    _emit(cert.to_json(), args.out)
    return EXIT_OK if cert.ok() else EXIT_CHECK_FAILED


def cmd_commutator(args):
    path = _load_path(args.path)
    spec = _load_json(args.theta, "theta")
    try:
        theta = AffineSymplectic(np.array(spec["linear"], dtype=float),
                                 np.array(spec["shift"], dtype=float))
    except (KeyError, ValueError) as err:
        raise ConfigInvalid(f"malformed affine map: {err}", "theta") from err
    rep = commutator_bound_report(path, theta, args.k)
    _emit(rep.to_json(), args.out)
    return EXIT_OK if rep.ok() else EXIT_CHECK_FAILED


def cmd_constants(args):
    ledger = constants(args.k)
    if args.csv:
        print(ledger.to_csv(), end="")
    else:
        print(ledger.format_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(ledger.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_disjoint(args):
    cfg = _load_json(args.config, "config")
    for key in ("paths", "boxes", "k"):
        if key not in cfg:
            raise ConfigInvalid(f"missing key {key!r}", f"$.{key}")
    paths = [HamiltonianPath.from_json(p) for p in cfg["paths"]]
    boxes = [tuple(map(tuple, b)) for b in cfg["boxes"]]
    rep = disjoint_bound_check(paths, boxes, int(cfg["k"]))
    _emit(rep.to_json(), args.out)
    return EXIT_OK if rep.ok() else EXIT_CHECK_FAILED


def cmd_snowflake(args):
    if os.path.exists(args.group):
        group = sf.group_from_file(args.group)
    else:
        try:
            group = sf.builtin_group(args.group)
        except ValueError as err:
            raise ConfigInvalid(str(err), "group") from err
        if args.weights:
            w = _load_json(args.weights, "weights")
            group = group.with_weights(np.array(w, dtype=float))
        elif args.seed is not None:
            rng = np.random.default_rng(args.seed)
            w = rng.uniform(0.05, 4.0, group.order)
            w[group.identity] = 0.0
            group = group.with_weights(w)
    mode = args.mode
    if mode == "generic":
        res = sf.sharp(group)
    elif mode.startswith("dk:"):
        res = sf.sharp_fixed_exponent(group, int(mode.split(":", 1)[1]))
    else:
        raise ConfigInvalid(f"unknown mode {mode!r} (use generic or dk:<k>)", "mode")
    _emit({"C": res.C, "alpha": res.alpha,
           "psi_sharp": res.psi_sharp.tolist(),
           "witnesses": [list(w) for w in res.witnesses]}, args.out)
    return EXIT_OK


def cmd_verify(args):
    summary = run_suite(args.suite, args.seed)
    payload = summary_bytes(summary)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "wb") as fh:
        fh.write(payload)
    for check in summary["checks"]:
        status = "pass" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}")
    print(f"summary written to {os.path.join(out_dir, 'summary.json')}")
    return EXIT_OK if summary["all_passed"] else EXIT_CHECK_FAILED


def cmd_run(args):
    cfg = _load_json(args.config, "config")
    if "command" not in cfg:
        raise ConfigInvalid("missing key 'command'", "$.command")
    command = cfg["command"]
    if command not in SUBCOMMANDS or command == "run":
        raise ConfigInvalid(f"unknown command {command!r}", "$.command")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid("'params' must be an object", "$.params")
    argv = [command]
    for key, value in sorted(params.items()):
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv += [flag, str(value)]
    out_dir = cfg.get("output_dir")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        if command == "verify":
            argv += ["--out", out_dir]
        else:
            argv += ["--out", os.path.join(out_dir, f"{command}.json")]
    if "seed" in cfg and command in ("snowflake", "verify"):
        argv += ["--seed", str(cfg["seed"])]
    return main(argv)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hoferlab",
        description="desk-scale laboratory for higher-order Hamiltonian path lengths")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("length", help="length functionals of a path")
    p.add_argument("--path", default=None, help="path JSON file")
    p.add_argument("--hamiltonian", default=None,
                   help="autonomous Hamiltonian as a DSL string (needs --grid)")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--p", type=float, default=None, help="exponent for kind=kp")
    p.add_argument("--grid", default=None, help="grid JSON file (default: path domain)")
    p.add_argument("--kind", choices=("k", "coarse", "kp", "hl"), default="k")
    p.add_argument("--time-samples", type=int, default=20)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_length)

    p = sub.add_parser("flow", help="integrate a tracer cloud")
    p.add_argument("--path", default=None)
    p.add_argument("--hamiltonian", default=None,
                   help="autonomous Hamiltonian as a DSL string (needs --grid)")
    p.add_argument("--grid", default=None, help="grid JSON (with --hamiltonian)")
    p.add_argument("--cloud", required=True, help="tracer CSV file")
    p.add_argument("--steps", type=int, default=512)
    p.add_argument("--out-prefix", default=None)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("gm", help="shell-family decay report")
    p.add_argument("--m", default="4,8,16,32,64", help="comma-separated m values")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--orders", default=None, help="comma-separated derivative orders")
    p.add_argument("--closed", action="store_true", help="add the mirrored copy")
    p.add_argument("--out", default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_gm)

    p = sub.add_parser("displace", help="square displacement certificate")
    p.add_argument("--c", type=float, required=True, help="square area")
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_displace)

    p = sub.add_parser("shift", help="half-space shift certificate")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("commutator", help="commutator length-bound report")
    p.add_argument("--path", required=True)
    p.add_argument("--theta", required=True, help="affine map JSON {linear, shift}")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_commutator)

    p = sub.add_parser("constants", help="exact constants ledger")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("disjoint", help="disjoint-support coarse bound")
    p.add_argument("--config", required=True, help="JSON with paths, boxes, k")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_disjoint)

    p = sub.add_parser("snowflake", help="snowflake transform of a weighted group")
    p.add_argument("--group", required=True, help="built-in name (Zn, S3, S4, D4) or JSON file")
    p.add_argument("--mode", default="generic", help="generic or dk:<k>")
    p.add_argument("--weights", default=None, help="JSON array of weights")
    p.add_argument("--seed", type=int, default=None, help="random weights seed")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_snowflake)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("--suite", choices=("core", "all"), default="core")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="directory for summary.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run a subcommand from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigInvalid as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG_INVALID
    except CheckFailed as err:
        print(f"check failed: {err}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except HoferLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
