"""Command-line entry point: ``qmaxent <command> [options]``."""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import DEFAULT_SEED, TOL, Tolerances
from .io import dump_json, load_coefficients, load_observables, load_path_spec, load_problem, state_to_json


def _tol_pair(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    name, value = text.split("=", 1)
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} needs a number, got {value!r}") from None


def _sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("at least one size is required")
    return sizes


def _grid(text: str) -> tuple[float, ...]:
    from .reproduce import parse_grid

    try:
        return parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE", help="override a tolerance; repeatable")
    p.add_argument("--threads", type=int, default=1, help="worker threads for independent grid points")
    return p


def build_parser() -> argparse.ArgumentParser:
    from .reproduce import EXAMPLE_IDS

    common = _common()
    parser = argparse.ArgumentParser(prog="qmaxent", description="Maximum-entropy inference, numerical ranges and phase-transition diagnostics.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("version", parents=[common], help="build metadata and tolerance table")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("maxent", parents=[common], help="solve a max-ent problem from JSON")
    p.add_argument("--problem", required=True, type=Path, help='JSON {"observables": [...], "alpha": [...]}')
    p.add_argument("--out", type=Path, help="solution JSON (default: stdout)")

    p = sub.add_parser("numrange", parents=[common], help="sample the boundary of a joint numerical range")
    p.add_argument("--observables", required=True, type=Path)
    p.add_argument("--resolution", type=int, default=360)
    p.add_argument("--face-samples", type=int, default=200)
    p.add_argument("--out", required=True, type=Path, help="points CSV")

    p = sub.add_parser("ising", parents=[common], help="ground state of an Ising chain or a Pauli-sum file")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--lambda-x", type=float, default=0.0)
    p.add_argument("--lambda-z", type=float, default=0.0)
    p.add_argument("--boundary", choices=["open", "periodic"], default="open")
    p.add_argument("--pauli", type=Path, help="Pauli-sum text file used instead of the Ising chain")
    p.add_argument("--ground-state", type=Path, help="write the ground state as JSON")

    p = sub.add_parser("qcmi-sweep", parents=[common], help="I(A:C|B) of Ising ground states along a field grid")
    p.add_argument("--n", type=_sizes, default=(4, 8, 12), help="comma-separated sizes")
    p.add_argument("--scheme", choices=["ring4", "line3", "line4"], default="ring4")
    p.add_argument("--boundary", choices=["open", "periodic"], help="default: periodic for ring4, open otherwise")
    p.add_argument("--field", choices=["lambda_x", "lambda_z"], default="lambda_x")
    p.add_argument("--lambda", dest="grid", type=_grid, default=_grid("0.1:2.0:0.05"), help="start:stop:step or a list")
    p.add_argument("--allow-adjacent", action="store_true", help="permit A and C to touch (line3 on a ring)")
    p.add_argument("--out", required=True, type=Path, help="sweep CSV")

    p = sub.add_parser("discontinuity", parents=[common], help="path-limit probe at a boundary point")
    p.add_argument("--observables", required=True, type=Path)
    p.add_argument("--h0", type=Path, help="base coefficients (may also sit in the path file)")
    p.add_argument("--path", required=True, type=Path, help='JSON {"scale": [...], "power": [...], "grid": [...]}')
    p.add_argument("--report", type=Path, help="report JSON (default: stdout)")

    p = sub.add_parser("reproduce", parents=[common], help="reproduce an example or figure with embedded checks")
    p.add_argument("example", choices=[*EXAMPLE_IDS, "all"])
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    p.add_argument("--n", type=_sizes, help="sweep sizes for fig5/fig7/fig9 (default 4,8,12)")
    p.add_argument("--lambda", dest="grid", type=_grid, help="sweep grid for fig5/fig7/fig9")
    return parser


def _tolerances(args) -> Tolerances:
    return TOL.with_overrides(dict(args.tol))


def _emit(obj, path: Path | None) -> None:
    if path is None:
        from .io import to_jsonable

        print(json.dumps(to_jsonable(obj), indent=2, sort_keys=True))
    else:
        dump_json(obj, path)


def _cmd_version(args, tol: Tolerances) -> int:
    info = {
        "name": "qmaxent",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": args.seed,
        "tolerances": tol.as_dict(),
    }
    if args.json:
        print(json.dumps(info, indent=2, sort_keys=True))
        return 0
    print(f"qmaxent {__version__} (python {info['python']}, numpy {info['numpy']}, scipy {info['scipy']})")
    print(f"seed        {args.seed}")
    width = max(len(k) for k in info["tolerances"])
    for name, value in info["tolerances"].items():
        print(f"{name:<{width}}  {value:g}")
    return 0


def _cmd_maxent(args, tol: Tolerances) -> int:
    from .maxent import solve_maxent

    F, alpha = load_problem(args.problem)
    _emit(solve_maxent(F, alpha, tol=tol).to_json(), args.out)
    return 0


def _cmd_numrange(args, tol: Tolerances) -> int:
    from .numrange import sample_boundary, write_points_csv

    F = load_observables(args.observables)
    sample = sample_boundary(F, args.resolution, args.face_samples, np.random.default_rng(args.seed), tol.degeneracy)
    write_points_csv(sample, args.out)
    print(f"{len(sample.points)} points, {len(sample.faces)} degenerate faces -> {args.out}")
    return 0


def _cmd_ising(args, tol: Tolerances) -> int:
    from .spin import IsingParams, build_ising, ground_state_lanczos, parse_pauli_string

    sector = None
    if args.pauli is not None:
        h = parse_pauli_string(args.pauli.read_text())
    else:
        h = build_ising(IsingParams(args.n, J=args.J, lambda_x=args.lambda_x, lambda_z=args.lambda_z, boundary=args.boundary))
        sector = 1 if args.lambda_z == 0 else None
    energy, psi = ground_state_lanczos(h, tol=tol.lanczos, seed=args.seed, sector=sector)
    print(f"n={h.n_sites} terms={len(h.terms)} ground energy {energy:.12g}")
    if args.ground_state is not None:
        dump_json(state_to_json(psi, n_sites=h.n_sites, energy=energy), args.ground_state)
    return 0


def _cmd_qcmi_sweep(args, tol: Tolerances) -> int:
    from .qcmi import crossing_detect, default_partition, qcmi_sweep
    from .reproduce import write_sweep_csv
    from .spin import IsingParams

    boundary = args.boundary or ("periodic" if args.scheme == "ring4" else "open")
    curves = {}
    for n in args.n:
        part = default_partition(n, args.scheme, periodic=boundary == "periodic", allow_adjacent=args.allow_adjacent)
        curves[n] = qcmi_sweep(IsingParams(n, boundary=boundary), args.grid, part, field_name=args.field, seed=args.seed, tol=tol.lanczos, workers=args.threads)
    write_sweep_csv(curves, args.out)
    print(f"# I(A:C|B) in bits; {sum(map(len, curves.values()))} rows -> {args.out}")
    if len(curves) > 1:
        for c in crossing_detect(curves):
            print(f"crossing n={c.sizes[0]},{c.sizes[1]} at lambda={c.lam:.6g}")
    return 0


def _cmd_discontinuity(args, tol: Tolerances) -> int:
    from .discontinuity import path_limit_probe

    F = load_observables(args.observables)
    h0 = None if args.h0 is None else load_coefficients(args.h0)
    report = path_limit_probe(load_path_spec(args.path, h0), F, tol=tol)
    _emit(report.to_json(), args.report)
    if args.report is not None:
        print(f"verdict {report.verdict}: gap_trace={report.gap_trace:.6g} gap_entropy_bits={report.gap_entropy_bits:.6g} alpha_drift={report.alpha_drift:.3g}")
    return 0


def _cmd_reproduce(args, tol: Tolerances) -> int:
    from .reproduce import RunConfig, reproduce, reproduce_all

    cfg = RunConfig(out_dir=args.out, seed=args.seed, tol=tol, threads=args.threads)
    if args.n:
        cfg.sweep_sizes = args.n
    if args.grid:
        cfg.sweep_grid = args.grid
    summary = reproduce_all(cfg) if args.example == "all" else reproduce(args.example, cfg)
    for c in summary["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}")
    failed = sum(not c["passed"] for c in summary["checks"])
    print(f"{len(summary['checks']) - failed}/{len(summary['checks'])} checks passed; artifacts in {args.out}")
    return 0 if summary["passed"] else 1


COMMANDS = {
    "version": _cmd_version,
    "maxent": _cmd_maxent,
    "numrange": _cmd_numrange,
    "ising": _cmd_ising,
    "qcmi-sweep": _cmd_qcmi_sweep,
    "discontinuity": _cmd_discontinuity,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage()
        return 2
    try:
        tol = _tolerances(args)
    except KeyError as exc:
        parser.error(str(exc.args[0]))
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return COMMANDS[args.command](args, tol)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"qmaxent {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
