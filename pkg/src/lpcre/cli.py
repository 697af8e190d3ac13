"""Command-line entry point: ``lpcre <command> [options]``.

Every artifact starts with a header recording the tool version, the full
option set and the RNG seed.  JSON artifacts are objects with ``header`` and
a payload; CSV artifacts carry the header as ``#`` comment lines.  Files are
written to a temporary sibling and renamed into place.

Set ``LPCRE_LOG`` (DEBUG, INFO, WARNING, ...) to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .algebra import (
    DEFAULT_SEED,
    HyperbolicSearch,
    adjoint_matrix,
    algebra_from_json_dict,
    coadjoint_matrix,
    find_hyperbolic_element,
)
from .bianchi import BianchiType, catalog, catalog_rows, classify
from .cre import FindCREConfig, find_cre, verify_momentum_map
from .dynamics import drift_report, integrate
from .errors import InvalidParameter, LPCREError, ParseError, SchemaError
from .figures import figure_data
from .poisson import (
    LiePoisson,
    StandardScaling,
    casimir_residual,
    check_conformal_poisson,
    check_exactness,
    check_field_conformal,
    hamiltonian_from_json_dict,
    sample_points,
)
from .spectrum import spectrum

log = logging.getLogger("lpcre")

COMMANDS = ("catalog", "classify", "spectrum", "cre-find", "verify", "simulate", "figure-data")


# ------------------------------------------------------------------ I/O

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), ".17g")


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lpcre-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def csv_text(header: dict, columns: list[str], rows) -> str:
    lines = ["# " + line for line in json.dumps(header, sort_keys=True).splitlines()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def read_json_arg(value: str, what: str):
    """Inline JSON (starting with '{' or '[') or a path to a JSON file."""
    text = value
    if not value.lstrip().startswith(("{", "[")):
        try:
            with open(value, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {what} file {value!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} is not valid JSON: {exc}") from exc


def parse_vector(text: str, what: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t != ""]
    except ValueError as exc:
        raise ParseError(f"{what}: expected comma-separated numbers, got {text!r}") from exc
    if not vals or not np.all(np.isfinite(vals)):
        raise ParseError(f"{what}: expected finite numbers, got {text!r}")
    return np.array(vals)


def load_algebra(value: str):
    """Return (structure constants, Bianchi type or None)."""
    looks_like_file = value.lstrip().startswith("{") or os.path.exists(value)
    if not looks_like_file:
        try:
            bt = BianchiType.parse(value)
        except (InvalidParameter, ValueError) as exc:
            raise ParseError(f"{value!r} is neither a file nor a Bianchi type ({exc})") from exc
        return catalog(bt).algebra, bt
    alg = algebra_from_json_dict(read_json_arg(value, "algebra"))
    bt = None
    if alg.dim == 3:
        try:
            bt = classify(alg)
        except LPCREError:
            bt = None
    return alg, bt


def load_hamiltonian(value: str, dim: int):
    H = hamiltonian_from_json_dict(read_json_arg(value, "hamiltonian"))
    if H.dim != dim:
        raise SchemaError(f"Hamiltonian has dimension {H.dim}, algebra has {dim}")
    return H


def header(command: str, args: argparse.Namespace) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "func", "job")}
    return {"tool": "lpcre", "version": __version__, "command": command,
            "config": config, "rng_seed": args.rng_seed}


# ------------------------------------------------------------- commands

def cmd_catalog(args) -> None:
    rows = catalog_rows(args.vi_h, args.vii_small, args.vii_large)
    emit(args.output, dump_json({"header": header("catalog", args),
                                 "rows": [r.to_json_dict() for r in rows]}))


def cmd_classify(args) -> None:
    obj = read_json_arg(args.algebra, "algebra") if (
        args.algebra.lstrip().startswith("{") or os.path.exists(args.algebra)) else None
    results = []
    if isinstance(obj, dict) and "rows" in obj:
        for row in obj["rows"]:
            if not isinstance(row, dict) or "algebra" not in row:
                raise SchemaError("catalog rows need an 'algebra' entry")
            bt = classify(algebra_from_json_dict(row["algebra"]))
            results.append({"row": row.get("type"), "type": bt.name, "tag": bt.tag, "h": bt.h,
                            "matches": row.get("type") == bt.name})
    else:
        alg, _ = load_algebra(args.algebra)
        bt = classify(alg)
        results.append({"type": bt.name, "tag": bt.tag, "h": bt.h})
    emit(args.output, dump_json({"header": header("classify", args), "results": results}))


def cmd_spectrum(args) -> None:
    alg, _ = load_algebra(args.algebra)
    zeta = parse_vector(args.zeta, "--zeta")
    if zeta.size != alg.dim:
        raise SchemaError(f"--zeta needs {alg.dim} components")
    op = adjoint_matrix if args.operator == "adjoint" else coadjoint_matrix
    rep = spectrum(op(alg, zeta))
    hyp = find_hyperbolic_element(alg, HyperbolicSearch(rng_seed=args.rng_seed))
    payload = rep.to_dict()
    payload["operator"] = args.operator
    payload["hyperbolic_element"] = None if hyp is None else {
        "zeta": hyp[0].tolist(), "lambda": hyp[1]}
    emit(args.output, dump_json({"header": header("spectrum", args), "spectrum": payload}))


def cmd_cre_find(args) -> None:
    alg, bt = load_algebra(args.algebra)
    H = load_hamiltonian(args.hamiltonian, alg.dim)
    cfg = FindCREConfig(seeds=args.seeds, tol=args.tol, rng_seed=args.rng_seed)
    sols = find_cre(LiePoisson(alg), H, StandardScaling(alg.dim), cfg)
    chosen = [s for s in sols if args.include_trivial or not s.trivial]
    head = header("cre-find", args)
    emit(args.output, dump_json({
        "header": head,
        "type": None if bt is None else bt.name,
        "solutions": [s.to_dict() for s in chosen],
        "continuum_suspected": sols.continuum_suspected,
        "stats": sols.stats,
    }))
    if args.csv:
        cols = [f"x{i + 1}" for i in range(alg.dim)] + ["xi", "residual", "trivial"]
        rows = [list(s.x_e) + [s.xi, s.residual, s.trivial] for s in chosen]
        atomic_write(args.csv, csv_text(head, cols, rows))


def cmd_verify(args) -> None:
    alg, bt = load_algebra(args.algebra)
    P = LiePoisson(alg)
    action = StandardScaling(alg.dim)
    rng = np.random.default_rng(args.rng_seed)
    reports = [
        check_conformal_poisson(P, action, 1.0, args.samples, rng=rng).to_dict(),
        check_exactness(P, action, args.samples, rng=rng).to_dict(),
    ]
    if args.hamiltonian:
        H = load_hamiltonian(args.hamiltonian, alg.dim)
        reports.append(check_field_conformal(P, H, action, samples=args.samples, rng=rng).to_dict())
    if bt is not None:
        for C in catalog(bt).casimirs:
            pts = sample_points(alg.dim, args.samples, rng, C.domain)
            reports.append(casimir_residual(P, C, pts).to_dict())
            reports.append(verify_momentum_map(P, action, C, 1.0, args.samples, rng).to_dict())
    emit(args.output, dump_json({"header": header("verify", args),
                                 "type": None if bt is None else bt.name,
                                 "reports": reports}))


def cmd_simulate(args) -> None:
    alg, bt = load_algebra(args.algebra)
    H = load_hamiltonian(args.hamiltonian, alg.dim)
    x0 = parse_vector(args.x0, "--x0")
    if x0.size != alg.dim:
        raise SchemaError(f"--x0 needs {alg.dim} components")
    traj = integrate(LiePoisson(alg), H, x0, args.t_end, args.dt)
    casimirs = []
    if bt is not None:
        casimirs = [C for C in catalog(bt).casimirs if all(C.in_domain(x) for x in traj.states)]
    head = header("simulate", args)
    head["casimirs"] = [C.name for C in casimirs]
    head["escaped"] = traj.escaped
    head["drift"] = drift_report(traj, H, casimirs).to_dict()
    cols = ["t"] + [f"x{i + 1}" for i in range(alg.dim)] + ["H"] + [f"C{k + 1}" for k in range(len(casimirs))]
    rows = ([t] + list(x) + [H(x)] + [C(x) for C in casimirs] for t, x in zip(traj.times, traj.states))
    emit(args.output, csv_text(head, cols, rows))


def cmd_figure_data(args) -> None:
    levels = None
    if args.levels is not None:
        levels = [] if args.levels.strip() == "" else list(parse_vector(args.levels, "--levels"))
    data = figure_data(args.example, args.alpha, args.beta, args.gamma, levels, args.box)
    emit(args.output, dump_json({"header": header("figure-data", args), **data}))


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpcre", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lpcre {__version__}")
    parser.add_argument("--job", help="JSON job file with the command and its options")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    common.add_argument("--rng-seed", type=int, default=DEFAULT_SEED)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("catalog", parents=[common], help="dump the Bianchi catalog")
    p.add_argument("--vi-h", type=float, default=2.0)
    p.add_argument("--vii-small", type=float, default=1.0, help="VII_h parameter with 0<|h|<2")
    p.add_argument("--vii-large", type=float, default=3.0, help="VII_h parameter with |h|>=2")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("classify", parents=[common], help="identify the Bianchi type")
    p.add_argument("--algebra", required=True, help="algebra JSON, catalog JSON or type name")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of ad or ad*")
    p.add_argument("--algebra", required=True)
    p.add_argument("--zeta", required=True, help="comma-separated components")
    p.add_argument("--operator", choices=("adjoint", "coadjoint"), default="adjoint")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("cre-find", parents=[common], help="multi-start CRE search")
    p.add_argument("--algebra", required=True)
    p.add_argument("--hamiltonian", required=True, help="Hamiltonian JSON (file or inline)")
    p.add_argument("--seeds", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--include-trivial", action="store_true")
    p.add_argument("--csv", default=None, help="also write a CSV table here")
    p.set_defaults(func=cmd_cre_find)

    p = sub.add_parser("verify", parents=[common], help="run the identity checks")
    p.add_argument("--algebra", required=True)
    p.add_argument("--hamiltonian", default=None)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="RK4 trajectory as CSV")
    p.add_argument("--algebra", required=True)
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure-data", parents=[common], help="mesh and curve data")
    p.add_argument("--example", choices=("so3", "so21"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--levels", default=None, help="comma-separated Casimir levels; '' for none")
    p.add_argument("--box", type=float, default=3.0)
    p.set_defaults(func=cmd_figure_data)
    return parser


def job_to_argv(path: str) -> list[str]:
    job = read_json_arg(path, "job")
    if not isinstance(job, dict) or job.get("command") not in COMMANDS:
        raise SchemaError(f"job file needs 'command' in {COMMANDS}")
    argv = [job["command"]]
    for key, value in job.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, (list, tuple)):
            argv.append(f"{flag}={','.join(str(v) for v in value)}")
        elif isinstance(value, dict):
            argv.append(f"{flag}={json.dumps(value)}")
        elif value is not None:
            # --flag=value keeps values such as "-1,0,2" from parsing as options
            argv.append(f"{flag}={value}")
    return argv


def _validate(args) -> None:
    for name in ("tol", "dt", "t_end", "box"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise InvalidParameter(f"--{name.replace('_', '-')} must be positive")
    for name in ("seeds", "samples"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise InvalidParameter(f"--{name} must be at least 1")


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LPCRE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--job" in argv:
            k = argv.index("--job")
            if k + 1 >= len(argv):
                raise ParseError("--job needs a path")
            job_path = argv[k + 1]
            rest = argv[:k] + argv[k + 2:]
            argv = job_to_argv(job_path) + rest
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 2
        _validate(args)
        args.func(args)
    except LPCREError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 2 if isinstance(exc, (ParseError, SchemaError)) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
